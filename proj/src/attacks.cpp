#include "credsim/attacks.hpp"

#include <array>

#include "credsim/error.hpp"
#include "text.hpp"

namespace credsim {

namespace {

constexpr std::array kTechniques = {TechniqueId::MimikatzSekurlsa, TechniqueId::MimikatzLsaDumpInject,
                                    TechniqueId::ComsvcsMiniDump, TechniqueId::ProcdumpMa, TechniqueId::TaskmgrDump};

constexpr std::string_view kPolicyInfoTag = "PolicyDnsDomainInformation";

std::string_view step_name(StepKind kind)
{
    switch (kind) {
    case StepKind::PrivilegeDebug: return "PrivilegeDebug";
    case StepKind::OpenProcess: return "OpenProcess";
    case StepKind::LoadModule: return "LoadModule";
    case StepKind::ApiCall: return "ApiCall";
    case StepKind::ReadSessions: return "ReadSessions";
    case StepKind::SamEnumerate: return "SamEnumerate";
    case StepKind::WriteDump: return "WriteDump";
    case StepKind::ParseDump: return "ParseDump";
    }
    return "Unknown";
}

std::string api_argument(ApiFunction function, std::string_view tag = {})
{
    std::string out(to_string(function));
    if (!tag.empty()) {
        out += "/";
        out += tag;
    }
    return out;
}

std::string_view dump_tool_tag(TechniqueId tool)
{
    switch (tool) {
    case TechniqueId::ComsvcsMiniDump: return "comsvcs";
    case TechniqueId::ProcdumpMa: return "procdump";
    case TechniqueId::TaskmgrDump: return "taskmgr";
    default: return "dump";
    }
}

std::string_view dump_call_tag(TechniqueId tool)
{
    switch (tool) {
    case TechniqueId::ComsvcsMiniDump: return "comsvcs.dll#MiniDump";
    case TechniqueId::ProcdumpMa: return "-ma";
    case TechniqueId::TaskmgrDump: return "CreateDumpFile";
    default: return "";
    }
}

// Walks one technique's step chain, recording each step and stopping at the
// first gate that says no.
class Run {
public:
    Run(World& world, Pid attacker, TechniqueId technique) : world_(world), attacker_(attacker)
    {
        result_.technique = technique;
    }

    bool attacker_alive() const { return world_.process(attacker_).alive; }

    void privilege_debug()
    {
        const auto outcome = enable_privilege(world_, attacker_, kSeDebugPrivilege);
        result_.trace.push_back({StepKind::PrivilegeDebug, "", outcome == PrivilegeOutcome::Granted});
    }

    std::optional<ProcessHandle> open_lsass(AccessKind access)
    {
        std::string arg = access == AccessKind::Dump ? "lsass,Dump" : "lsass";
        const OpenResult opened = open_process(world_, attacker_, world_.lsass_pid(), access);
        if (const auto* denied = std::get_if<Denied>(&opened)) {
            result_.trace.push_back({StepKind::OpenProcess, std::move(arg), false});
            block(denied->reason == DenyReason::ProtectedProcess ? BlockReason::ProtectedProcess
                                                                 : BlockReason::NoDebugPrivilege);
            return std::nullopt;
        }
        result_.trace.push_back({StepKind::OpenProcess, std::move(arg), true});
        return std::get<ProcessHandle>(opened);
    }

    bool load(std::string_view module)
    {
        load_module(world_, attacker_, module);
        return after_step({StepKind::LoadModule, std::string(module), true});
    }

    bool api(ApiFunction function, std::string_view tag = {})
    {
        call_api(world_, attacker_, function, tag);
        return after_step({StepKind::ApiCall, api_argument(function, tag), true});
    }

    bool sam_connect()
    {
        const ConnectResult connected = alpc_connect(world_, attacker_, kSamPortName);
        TraceStep step{StepKind::ApiCall, api_argument(ApiFunction::SamConnect), true};
        if (const auto* denied = std::get_if<Denied>(&connected)) {
            step.ok = false;
            result_.trace.push_back(std::move(step));
            if (denied->reason == DenyReason::Terminated) {
                result_.status = AttackStatus::DetectedAndTerminated;
            } else {
                block(BlockReason::GateClosed);
            }
            return false;
        }
        result_.trace.push_back(std::move(step));
        return true;
    }

    void step(StepKind kind, std::string argument = {}) { result_.trace.push_back({kind, std::move(argument), true}); }

    void block(BlockReason reason)
    {
        result_.status = AttackStatus::Blocked;
        result_.block_reason = reason;
    }

    void terminated() { result_.status = AttackStatus::DetectedAndTerminated; }

    void take_sessions(const std::vector<LogonSession>& sessions, RecordSource source)
    {
        bool complete = true;
        for (const auto& s : sessions) {
            CredentialRecord r;
            r.username = s.username;
            r.domain = s.domain;
            r.plaintext = s.wdigest_plaintext;
            r.nt_hash = s.cached_nt_hash;
            r.source = source;
            r.position = result_.records.size();
            r.is_decoy = s.is_decoy;
            complete = complete && r.plaintext.has_value() && r.nt_hash.present();
            result_.records.push_back(std::move(r));
        }
        result_.status = complete ? AttackStatus::Succeeded : AttackStatus::Partial;
    }

    AttackResult& result() { return result_; }
    World& world() { return world_; }
    Pid attacker() const { return attacker_; }

private:
    bool after_step(TraceStep step)
    {
        if (!attacker_alive()) {
            step.ok = false;
            result_.trace.push_back(std::move(step));
            terminated();
            return false;
        }
        result_.trace.push_back(std::move(step));
        return true;
    }

    World& world_;
    Pid attacker_;
    AttackResult result_;
};

} // namespace

std::span<const TechniqueId> list_techniques()
{
    return kTechniques;
}

std::string_view to_string(TechniqueId technique)
{
    switch (technique) {
    case TechniqueId::MimikatzSekurlsa: return "mimikatz_sekurlsa";
    case TechniqueId::MimikatzLsaDumpInject: return "mimikatz_lsadump";
    case TechniqueId::ComsvcsMiniDump: return "comsvcs_minidump";
    case TechniqueId::ProcdumpMa: return "procdump_ma";
    case TechniqueId::TaskmgrDump: return "taskmgr_dump";
    }
    return "unknown";
}

std::optional<TechniqueId> technique_from_string(std::string_view text)
{
    for (auto t : kTechniques) {
        if (to_string(t) == text) {
            return t;
        }
    }
    return std::nullopt;
}

const std::set<std::string>& known_bad_keywords()
{
    static const std::set<std::string> keywords = {"mimikatz", "gentilkiwi", "sekurlsa"};
    return keywords;
}

BinaryProfile default_profile(TechniqueId technique)
{
    switch (technique) {
    case TechniqueId::MimikatzSekurlsa:
    case TechniqueId::MimikatzLsaDumpInject: return {R"(C:\Tools\mimikatz\x64\mimikatz.exe)", {"mimikatz"}, false};
    case TechniqueId::ComsvcsMiniDump: return {R"(C:\Windows\System32\rundll32.exe)", {}, false};
    case TechniqueId::ProcdumpMa: return {R"(C:\Tools\Sysinternals\procdump64.exe)", {}, false};
    case TechniqueId::TaskmgrDump: return {R"(C:\Windows\System32\Taskmgr.exe)", {}, false};
    }
    throw Error(Errc::UnknownTechnique, "technique id " + std::to_string(static_cast<int>(technique)));
}

BinaryProfile obfuscate(const BinaryProfile& profile)
{
    BinaryProfile out = profile;
    out.obfuscated = true;

    const auto slash = out.image_path.find_last_of("\\/");
    const std::size_t name_start = slash == std::string::npos ? 0 : slash + 1;
    std::string name = out.image_path.substr(name_start);
    for (const auto& bad : known_bad_keywords()) {
        for (auto pos = text::lower(name).find(bad); pos != std::string::npos; pos = text::lower(name).find(bad)) {
            name.replace(pos, bad.size(), "sysutil");
        }
    }
    out.image_path = out.image_path.substr(0, name_start) + name;

    std::erase_if(out.signature_keywords, [](const std::string& keyword) {
        for (const auto& bad : known_bad_keywords()) {
            if (text::icontains(keyword, bad)) {
                return true;
            }
        }
        return false;
    });
    return out;
}

std::string_view to_string(RecordSource source)
{
    switch (source) {
    case RecordSource::LogonSession: return "LogonSession";
    case RecordSource::Sam: return "Sam";
    case RecordSource::DumpFile: return "DumpFile";
    }
    return "Unknown";
}

std::string_view to_string(BlockReason reason)
{
    switch (reason) {
    case BlockReason::NoDebugPrivilege: return "NoDebugPrivilege";
    case BlockReason::ProtectedProcess: return "ProtectedProcess";
    case BlockReason::GateClosed: return "GateClosed";
    case BlockReason::InsufficientIntegrity: return "InsufficientIntegrity";
    }
    return "Unknown";
}

std::string TraceStep::label() const
{
    std::string out(step_name(kind));
    if (!argument.empty()) {
        out += "(" + argument + ")";
    }
    return out;
}

std::string AttackResult::status_label() const
{
    switch (status) {
    case AttackStatus::Succeeded: return "Succeeded";
    case AttackStatus::Partial: return "Partial";
    case AttackStatus::Blocked:
        return "Blocked(" + std::string(block_reason ? to_string(*block_reason) : "Unknown") + ")";
    case AttackStatus::DetectedAndTerminated: return "DetectedAndTerminated";
    }
    return "Unknown";
}

std::vector<TraceStep> nominal_trace(TechniqueId technique)
{
    const TraceStep lsa_policy{StepKind::ApiCall, api_argument(ApiFunction::LsaOpenPolicy, kPolicyInfoTag), true};
    switch (technique) {
    case TechniqueId::MimikatzSekurlsa:
        return {{StepKind::PrivilegeDebug, "", true},
                {StepKind::OpenProcess, "lsass", true},
                lsa_policy,
                {StepKind::ReadSessions, "", true}};
    case TechniqueId::MimikatzLsaDumpInject:
        return {{StepKind::PrivilegeDebug, "", true},
                {StepKind::OpenProcess, "lsass", true},
                {StepKind::LoadModule, "samlib.dll", true},
                lsa_policy,
                {StepKind::ApiCall, api_argument(ApiFunction::SamConnect), true},
                {StepKind::ApiCall, api_argument(ApiFunction::SamOpenDomain), true},
                {StepKind::SamEnumerate, "", true}};
    case TechniqueId::ComsvcsMiniDump:
    case TechniqueId::ProcdumpMa:
        return {{StepKind::PrivilegeDebug, "", true},
                {StepKind::OpenProcess, "lsass,Dump", true},
                {StepKind::WriteDump, "", true},
                {StepKind::ParseDump, "", true}};
    case TechniqueId::TaskmgrDump:
        return {{StepKind::OpenProcess, "lsass,Dump", true},
                {StepKind::WriteDump, "", true},
                {StepKind::ParseDump, "", true}};
    }
    throw Error(Errc::UnknownTechnique, "technique id " + std::to_string(static_cast<int>(technique)));
}

AttackResult sekurlsa_logonpasswords(World& world, Pid attacker)
{
    Run run(world, attacker, TechniqueId::MimikatzSekurlsa);
    if (!run.attacker_alive()) {
        run.terminated();
        return run.result();
    }

    run.privilege_debug();
    const auto handle = run.open_lsass(AccessKind::Read);
    if (!handle || !run.api(ApiFunction::LsaOpenPolicy, kPolicyInfoTag)) {
        return run.result();
    }
    run.step(StepKind::ReadSessions);
    run.take_sessions(read_lsass_sessions(world, *handle), RecordSource::LogonSession);
    return run.result();
}

AttackResult lsadump_lsa_inject(World& world, Pid attacker)
{
    Run run(world, attacker, TechniqueId::MimikatzLsaDumpInject);
    if (!run.attacker_alive()) {
        run.terminated();
        return run.result();
    }

    run.privilege_debug();
    if (!run.open_lsass(AccessKind::Read) || !run.load("samlib.dll") ||
        !run.api(ApiFunction::LsaOpenPolicy, kPolicyInfoTag) || !run.sam_connect() ||
        !run.api(ApiFunction::SamOpenDomain)) {
        return run.result();
    }

    run.step(StepKind::SamEnumerate);
    AttackResult& result = run.result();
    result.domain_name = world.sam().domain_name();
    result.domain_sid = world.sam().domain_sid();
    for (const auto& entry : sam_enumerate(world.sam())) {
        CredentialRecord r;
        r.username = entry.username;
        r.domain = world.sam().domain_name();
        r.nt_hash = entry.nt_hash;
        r.source = RecordSource::Sam;
        r.position = result.records.size();
        r.rid = entry.rid;
        result.records.push_back(std::move(r));
    }
    result.status = AttackStatus::Succeeded;
    return result;
}

AttackResult memory_dump(World& world, Pid attacker, TechniqueId tool)
{
    if (tool != TechniqueId::ComsvcsMiniDump && tool != TechniqueId::ProcdumpMa && tool != TechniqueId::TaskmgrDump) {
        throw Error(Errc::UnknownTechnique, std::string(to_string(tool)) + " is not a dump tool");
    }

    Run run(world, attacker, tool);
    if (!run.attacker_alive()) {
        run.terminated();
        return run.result();
    }

    if (tool == TechniqueId::TaskmgrDump) {
        // Elevated Task Manager enables the debug privilege on its own.
        if (world.process(attacker).token.integrity_level_index < static_cast<int>(IntegrityLevel::High)) {
            run.block(BlockReason::InsufficientIntegrity);
            return run.result();
        }
        enable_privilege(world, attacker, kSeDebugPrivilege);
    } else {
        run.privilege_debug();
    }

    const auto handle = run.open_lsass(AccessKind::Dump);
    if (!handle) {
        return run.result();
    }

    call_api(world, attacker, ApiFunction::MiniDumpWriteDump, dump_call_tag(tool));
    if (!run.attacker_alive()) {
        run.result().trace.push_back({StepKind::WriteDump, "", false});
        run.terminated();
        return run.result();
    }
    run.step(StepKind::WriteDump);

    DumpArtifact artifact;
    artifact.name = R"(C:\Windows\Temp\)" + std::string(dump_tool_tag(tool)) + "-lsass-" +
                    std::to_string(world.lsass_pid()) + "-" + std::to_string(world.artifacts().size() + 1) + ".dmp";
    artifact.writer_pid = attacker;
    artifact.snapshot = read_lsass_sessions(world, *handle);
    const DumpArtifact& written = world.add_artifact(std::move(artifact));

    run.step(StepKind::ParseDump);
    run.result().dump_artifact = written.name;
    run.take_sessions(written.snapshot, RecordSource::DumpFile);
    return run.result();
}

AttackResult execute(World& world, TechniqueId technique, Pid attacker, const BinaryProfile&)
{
    // The binary's name and strings only matter to whoever watches the spawn;
    // the step chain is the same for any build of the tool.
    switch (technique) {
    case TechniqueId::MimikatzSekurlsa: return sekurlsa_logonpasswords(world, attacker);
    case TechniqueId::MimikatzLsaDumpInject: return lsadump_lsa_inject(world, attacker);
    case TechniqueId::ComsvcsMiniDump:
    case TechniqueId::ProcdumpMa:
    case TechniqueId::TaskmgrDump: return memory_dump(world, attacker, technique);
    }
    throw Error(Errc::UnknownTechnique, "technique id " + std::to_string(static_cast<int>(technique)));
}

AttackResult execute(World& world, std::string_view technique, Pid attacker, const BinaryProfile& profile)
{
    const auto id = technique_from_string(technique);
    if (!id) {
        throw Error(Errc::UnknownTechnique, std::string(technique));
    }
    return execute(world, *id, attacker, profile);
}

} // namespace credsim
