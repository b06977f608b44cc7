#include "credsim/defenses.hpp"

#include <array>

#include "credsim/error.hpp"
#include "text.hpp"

namespace credsim {

namespace {

constexpr std::array<std::string_view, std::variant_size_v<DefensePolicy>> kPolicyNames = {
    "HoneyToken",      "AllowlistMonitor",          "LsassApiHook",   "AlpcBlock",
    "WDigestDisable",  "PplEnable",                 "CredentialGuard", "DebugPrivilegeRestriction",
    "ProtectedUsers",  "RestrictedAdminRdp",        "DisableLmNtlm",  "SignatureScan",
};

constexpr std::array<std::string_view, std::variant_size_v<DefensePolicy>> kPolicyKeywords = {
    "honey_token",     "allowlist_monitor",           "lsass_api_hook",   "alpc_block",
    "wdigest_disable", "ppl_enable",                  "credential_guard", "debug_privilege_restriction",
    "protected_users", "restricted_admin_rdp",        "disable_lm_ntlm",  "signature_scan",
};

bool path_listed(const std::set<std::string>& paths, std::string_view path)
{
    for (const auto& p : paths) {
        if (text::iequals(p, path)) {
            return true;
        }
    }
    return false;
}

std::string image_of(const World& world, Pid pid)
{
    const ProcessDescriptor* p = world.find_process(pid);
    return p ? p->image_name : std::string{};
}

Verdict signature_verdict(const SignatureScan& scan, const ProcessCreatedEvent& event)
{
    for (const auto& keyword : scan.keywords) {
        bool hit = text::icontains(event.image_name, keyword);
        for (const auto& s : event.binary_strings) {
            hit = hit || text::icontains(s, keyword);
        }
        if (hit) {
            return Verdict::terminate({0, "SignatureScan", event.pid, event.image_name, DetectionKind::SignatureHit,
                                       "signature '" + keyword + "' matched " + event.image_name});
        }
    }
    return Verdict::allow();
}

Verdict allowlist_verdict(const AllowlistMonitor& monitor, const ProcessCreatedEvent& event)
{
    // Full paths only: a renamed binary must not inherit a trusted name.
    if (path_listed(monitor.trusted_full_paths, event.image_path)) {
        return Verdict::allow();
    }
    DetectionEvent warning{0, "AllowlistMonitor", event.pid, event.image_name, DetectionKind::ProcessWarning,
                           "WARNING: untrusted image " + event.image_path};
    return monitor.action == MonitorAction::Terminate ? Verdict::terminate(std::move(warning))
                                                      : Verdict::warn(std::move(warning));
}

bool hook_watches(const LsassApiHook& hook, ApiFunction function)
{
    if (hook.watched_functions.contains(function)) {
        return true;
    }
    for (const auto& module : hook.watched_modules) {
        if (text::iequals(module, implementing_module(function))) {
            return true;
        }
    }
    return false;
}

} // namespace

std::string_view policy_name(const DefensePolicy& policy)
{
    return kPolicyNames.at(policy.index());
}

std::span<const std::string_view> policy_keywords()
{
    return kPolicyKeywords;
}

PolicySet::PolicySet(std::vector<DefensePolicy> policies, PromptAnswers prompts)
    : policies_(std::move(policies)), prompts_(std::move(prompts))
{}

Verdict PolicySet::process_created(const ProcessCreatedEvent& event, const World&) const
{
    return on_process_created(*this, event);
}

Verdict PolicySet::module_loaded(const ModuleLoadedEvent&, const World&) const
{
    // Module loads only tell the hook which processes touch samlib/samsrv;
    // the decision is taken when a function from them is called.
    return Verdict::allow();
}

Verdict PolicySet::api_called(const ApiCallEvent& event, const World& world) const
{
    return on_api_call(*this, event, world);
}

Verdict PolicySet::logon_attempted(std::string_view username, std::string_view domain, const World&) const
{
    return on_decoy_logon(*this, username, domain);
}

Verdict on_process_created(const PolicySet& policies, const ProcessCreatedEvent& event)
{
    Verdict verdict = Verdict::allow();
    for (const auto& policy : policies.policies()) {
        if (const auto* scan = std::get_if<SignatureScan>(&policy)) {
            verdict.merge(signature_verdict(*scan, event));
        } else if (const auto* monitor = std::get_if<AllowlistMonitor>(&policy)) {
            verdict.merge(allowlist_verdict(*monitor, event));
        }
    }
    return verdict;
}

Verdict on_api_call(const PolicySet& policies, const ApiCallEvent& event, const World& world)
{
    const LsassApiHook* hook = policies.find<LsassApiHook>();
    if (!hook || event.caller_pid == 0 || !hook_watches(*hook, event.function)) {
        return Verdict::allow();
    }
    const ProcessDescriptor* caller = world.find_process(event.caller_pid);
    if (!caller || path_listed(hook->trusted_paths, caller->image_path)) {
        return Verdict::allow();
    }

    const std::string function(to_string(event.function));
    const std::string image = image_of(world, event.caller_pid);
    DetectionEvent detection{0, "LsassApiHook", event.caller_pid, image, DetectionKind::ApiCallBlocked,
                             "suspicious call " + function + " from " + image + "; terminated"};

    if (hook->action == HookAction::Prompt) {
        auto answer = policies.prompts().find(event.function);
        if (answer != policies.prompts().end() && answer->second == PromptAnswer::Allow) {
            detection.kind = DetectionKind::ProcessWarning;
            detection.message = "suspicious call " + function + " from " + image + "; allowed by operator";
            return Verdict::warn(std::move(detection));
        }
        detection.message = "suspicious call " + function + " from " + image + "; permission refused, terminated";
    }
    return Verdict::terminate(std::move(detection));
}

Verdict on_decoy_logon(const PolicySet& policies, std::string_view username, std::string_view domain)
{
    const HoneyToken* honey = policies.find<HoneyToken>();
    if (!honey || !text::iequals(honey->username, username)) {
        return Verdict::allow();
    }
    return Verdict::warn({0, "HoneyToken", 0, "", DetectionKind::DecoyLogonAttempt,
                          "logon attempt with decoy account " + std::string(username) + " (domain " +
                              std::string(domain) + ")"});
}

void install(World& world, std::vector<DefensePolicy> policies, PromptAnswers prompts)
{
    std::array<bool, std::variant_size_v<DefensePolicy>> seen{};
    for (const auto& p : policies) {
        if (seen[p.index()]) {
            throw Error(Errc::DuplicatePolicy, std::string(policy_name(p)) + " listed twice");
        }
        seen[p.index()] = true;
    }
    if (policies.empty()) {
        return;
    }

    for (const auto& policy : policies) {
        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, HoneyToken>) {
                    create_process_with_logon(world, p.username, p.domain, p.password, p.agent_path);
                } else if constexpr (std::is_same_v<T, AlpcBlock>) {
                    world.port(kSamPortName).gate = p.gate;
                } else if constexpr (std::is_same_v<T, WDigestDisable>) {
                    world.credentials().set_use_logon_credential(false);
                } else if constexpr (std::is_same_v<T, PplEnable>) {
                    world.process(world.lsass_pid()).protection = Protection::Ppl;
                } else if constexpr (std::is_same_v<T, CredentialGuard>) {
                    world.credentials().set_credential_guard(true);
                } else if constexpr (std::is_same_v<T, DebugPrivilegeRestriction>) {
                    world.policy().debug_allowed_groups = p.allowed_groups;
                } else if constexpr (std::is_same_v<T, ProtectedUsers>) {
                    for (const auto& member : p.members) {
                        UserAccount* account = world.sam().find_user(member);
                        if (!account) {
                            throw Error(Errc::UnknownUser, "ProtectedUsers member '" + member + "' is not in SAM");
                        }
                        account->groups.insert(std::string(kProtectedUsers));
                    }
                } else if constexpr (std::is_same_v<T, RestrictedAdminRdp>) {
                    world.policy().restricted_admin_rdp = true;
                } else if constexpr (std::is_same_v<T, DisableLmNtlm>) {
                    world.policy().ntlm_disabled = true;
                }
                // AllowlistMonitor, LsassApiHook and SignatureScan act through
                // the monitor only.
            },
            policy);
    }

    world.attach_monitor(std::make_shared<const PolicySet>(std::move(policies), std::move(prompts)));
}

void logout(World& world)
{
    AlpcPort& port = world.port(kSamPortName);
    if (!port.gate) {
        return;
    }
    if (port.gate->restore_on_logout) {
        port.gate.reset();
    } else {
        world.set_locked_out(true);
    }
}

} // namespace credsim
