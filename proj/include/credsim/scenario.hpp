#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "credsim/attacks.hpp"
#include "credsim/authcore.hpp"
#include "credsim/defenses.hpp"

namespace credsim {

struct AccountSeed {
    std::uint32_t rid = 0;
    std::string username;
    std::optional<std::string> password;
    std::set<std::string, std::less<>> groups;
};

struct ProcessSeed {
    std::string image_path;
    std::string user;
};

struct LogonSeed {
    std::string username;
    LogonOrigin origin = LogonOrigin::Interactive;
};

struct LogonAttempt {
    std::string username;
    std::string password;
};

struct Fixture {
    std::string domain_name;
    std::string domain_sid;
    std::string lsass_path;
    std::vector<AccountSeed> accounts;
    std::vector<ProcessSeed> processes;
    std::vector<LogonSeed> logons;
    std::vector<LogonAttempt> attempts;
    std::string attacker_user;
    bool use_logon_credential = true;

    const AccountSeed* find_account(std::string_view username) const;
};

struct AttackSpec {
    TechniqueId technique = TechniqueId::MimikatzSekurlsa;
    BinaryProfile profile;
};

struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    Fixture fixture;
    std::set<std::string> allowlist;
    std::vector<DefensePolicy> policies;
    std::vector<AttackSpec> attacks;
    PromptAnswers prompts;
};

/// Strict parser for the line-oriented scenario format. Throws
/// Error{ParseError, line} for syntax problems and Error{ValidationError}
/// when the result breaks a scenario invariant.
Scenario parse_scenario(std::string_view text);

Scenario load_scenario(const std::string& path);

/// Parses one `[policies]` line (`keyword` or `keyword = args`).
DefensePolicy parse_policy_line(std::string_view line, const std::set<std::string>& allowlist = {});

/// Inverse of parse_policy_line; canonical, so equal policies format equally.
std::string format_policy(const DefensePolicy& policy);

/// Throws ValidationError.
void validate(const Scenario& scenario);

} // namespace credsim
