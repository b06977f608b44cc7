#pragma once

#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "credsim/events.hpp"
#include "credsim/procmodel.hpp"

namespace credsim {

inline constexpr std::string_view kDefaultHoneyAgentPath = R"(C:\ProgramData\HoneyAgent\agent.exe)";

// Decoy identity planted through CreateProcessWithLogonW.
struct HoneyToken {
    std::string username = "test";
    std::string domain = "test";
    std::string password = "test";
    std::string agent_path = std::string(kDefaultHoneyAgentPath);

    friend bool operator==(const HoneyToken&, const HoneyToken&) = default;
};

enum class MonitorAction { Warn, Terminate };

// Compares every newly launched image against trusted full paths.
struct AllowlistMonitor {
    std::set<std::string> trusted_full_paths;
    MonitorAction action = MonitorAction::Warn;

    friend bool operator==(const AllowlistMonitor&, const AllowlistMonitor&) = default;
};

enum class HookAction { Prompt, Terminate };

// Intercepts LSA/SAM API calls from untrusted images.
struct LsassApiHook {
    std::set<ApiFunction> watched_functions{ApiFunction::LsaOpenPolicy, ApiFunction::SamConnect};
    std::set<std::string> watched_modules{"samlib.dll", "samsrv.dll"};
    HookAction action = HookAction::Terminate;
    std::set<std::string> trusted_paths;

    friend bool operator==(const LsassApiHook&, const LsassApiHook&) = default;
};

struct AlpcBlock {
    AlpcGate gate;  // gate.restore_on_logout decides the logout behavior

    friend bool operator==(const AlpcBlock& a, const AlpcBlock& b)
    {
        return a.gate.privilege_enabled == b.gate.privilege_enabled &&
               a.gate.enabled_by_default == b.gate.enabled_by_default &&
               a.gate.integrity_level_index == b.gate.integrity_level_index &&
               a.gate.restore_on_logout == b.gate.restore_on_logout;
    }
};

struct WDigestDisable {
    friend bool operator==(const WDigestDisable&, const WDigestDisable&) = default;
};
struct PplEnable {
    friend bool operator==(const PplEnable&, const PplEnable&) = default;
};
struct CredentialGuard {
    friend bool operator==(const CredentialGuard&, const CredentialGuard&) = default;
};
struct DebugPrivilegeRestriction {
    std::set<std::string, std::less<>> allowed_groups;

    friend bool operator==(const DebugPrivilegeRestriction&, const DebugPrivilegeRestriction&) = default;
};
struct ProtectedUsers {
    std::set<std::string> members;

    friend bool operator==(const ProtectedUsers&, const ProtectedUsers&) = default;
};
struct RestrictedAdminRdp {
    friend bool operator==(const RestrictedAdminRdp&, const RestrictedAdminRdp&) = default;
};
struct DisableLmNtlm {
    friend bool operator==(const DisableLmNtlm&, const DisableLmNtlm&) = default;
};
struct SignatureScan {
    std::set<std::string> keywords{"mimikatz"};

    friend bool operator==(const SignatureScan&, const SignatureScan&) = default;
};

using DefensePolicy = std::variant<HoneyToken, AllowlistMonitor, LsassApiHook, AlpcBlock, WDigestDisable, PplEnable,
                                   CredentialGuard, DebugPrivilegeRestriction, ProtectedUsers, RestrictedAdminRdp,
                                   DisableLmNtlm, SignatureScan>;

/// Variant name as used in detection events ("HoneyToken", "AlpcBlock", ...).
std::string_view policy_name(const DefensePolicy& policy);

/// Scenario-file keyword of each variant ("honey_token", "alpc_block", ...).
std::span<const std::string_view> policy_keywords();

enum class PromptAnswer { Allow, Deny };

using PromptAnswers = std::map<ApiFunction, PromptAnswer>;

/// Installed policies; immutable once attached to a world.
class PolicySet final : public Monitor {
public:
    PolicySet() = default;
    PolicySet(std::vector<DefensePolicy> policies, PromptAnswers prompts = {});

    const std::vector<DefensePolicy>& policies() const noexcept { return policies_; }
    const PromptAnswers& prompts() const noexcept { return prompts_; }

    template <class T>
    const T* find() const
    {
        for (const auto& p : policies_) {
            if (const auto* hit = std::get_if<T>(&p)) {
                return hit;
            }
        }
        return nullptr;
    }

    Verdict process_created(const ProcessCreatedEvent& event, const World& world) const override;
    Verdict module_loaded(const ModuleLoadedEvent& event, const World& world) const override;
    Verdict api_called(const ApiCallEvent& event, const World& world) const override;
    Verdict logon_attempted(std::string_view username, std::string_view domain,
                            const World& world) const override;

private:
    std::vector<DefensePolicy> policies_;
    PromptAnswers prompts_;
};

/// Applies each policy's world effect and attaches the policy set as the
/// world's monitor. Throws DuplicatePolicy if a variant appears twice.
void install(World& world, std::vector<DefensePolicy> policies, PromptAnswers prompts = {});

Verdict on_process_created(const PolicySet& policies, const ProcessCreatedEvent& event);
Verdict on_api_call(const PolicySet& policies, const ApiCallEvent& event, const World& world);
Verdict on_decoy_logon(const PolicySet& policies, std::string_view username, std::string_view domain);

/// End of the interactive session. An ALPC block that is not restored here
/// leaves the machine unable to log anyone in.
void logout(World& world);

} // namespace credsim
