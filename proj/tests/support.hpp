#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "credsim/harness.hpp"

// Shared fixture for the unit tests: the desktop from the console
// transcripts, with mainuser logged on interactively.
namespace testing_support {

inline constexpr const char* kDomain = "DESKTOP-K0FU6JD";
inline constexpr const char* kSid = "S-1-5-21-328600537-1725431280-3419747997";
inline constexpr const char* kMainPassword = "Qwerty!2022";
inline constexpr const char* kMainHash = "91469bcbbdb17d0b7227358b0c0eba0c";
inline constexpr const char* kWdagHash = "cd72d4bdaa51b3aca1b290a9d4efb5db";
inline constexpr const char* kTestHash = "0cb6948805f797bf2a82807973b89537";

inline credsim::Fixture default_fixture()
{
    credsim::Fixture f;
    f.domain_name = kDomain;
    f.domain_sid = kSid;
    f.lsass_path = std::string(credsim::kDefaultLsassPath);
    f.accounts = {
        {503, "DefaultAccount", std::nullopt, {}},
        {1001, "mainuser", std::string(kMainPassword), {"LocalAdministrators"}},
        {504, "WDAGUtilityAccount", std::string("Wdag#Utility-7f3K"), {}},
    };
    f.logons = {{"mainuser", credsim::LogonOrigin::Interactive}};
    f.attacker_user = "mainuser";
    return f;
}

inline credsim::Scenario default_scenario(std::vector<credsim::DefensePolicy> policies,
                                          std::vector<credsim::TechniqueId> techniques)
{
    credsim::Scenario s;
    s.name = "unit";
    s.fixture = default_fixture();
    s.policies = std::move(policies);
    for (auto t : techniques) {
        s.attacks.push_back({t, credsim::default_profile(t)});
    }
    return s;
}

// Booted world with mainuser logged on; no policies.
inline credsim::World default_world()
{
    credsim::World w = credsim::build_world(default_fixture());
    credsim::authenticate(w, "mainuser", kMainPassword);
    return w;
}

inline credsim::Pid spawn_attacker(credsim::World& w, credsim::TechniqueId t, const std::string& user = "mainuser")
{
    const auto profile = credsim::default_profile(t);
    return credsim::spawn_process(w, profile.image_path, user, profile.signature_keywords).pid;
}

inline credsim::AttackResult attack(credsim::World& w, credsim::TechniqueId t, const std::string& user = "mainuser")
{
    const credsim::Pid pid = spawn_attacker(w, t, user);
    return credsim::execute(w, t, pid, credsim::default_profile(t));
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::string scenario_path(const std::string& name)
{
    return std::string(CREDSIM_SCENARIO_DIR) + "/" + name;
}

} // namespace testing_support
