#include "credsim/procmodel.hpp"

#include <algorithm>

#include "credsim/error.hpp"
#include "text.hpp"

namespace credsim {

namespace {

// lsass.exe module list as seen from a debugger on a Windows 10 host.
const std::vector<std::string>& lsass_boot_modules()
{
    static const std::vector<std::string> modules = {
        "lsass.exe",   "ntdll.dll",   "KERNEL32.DLL", "KERNELBASE.dll", "RPCRT4.dll",     "lsasrv.dll",
        "ucrtbase.dll", "msvcrt_win.dll", "LSAADT.dll", "sechost.dll", "samsrv.dll", "CRYPT32.dll",
        "bcrypt.dll",  "ncrypt.dll",  "NTASN1.dll",   "Wldap.dll",
    };
    return modules;
}

Token default_token(std::string_view user, int integrity)
{
    Token token;
    token.user = std::string(user);
    token.privileges[kSeDebugPrivilege] = PrivilegeState{};
    token.integrity_level_index = integrity;
    return token;
}

} // namespace

bool Token::privilege_enabled(int id) const
{
    auto it = privileges.find(id);
    return it != privileges.end() && it->second.enabled;
}

bool Token::privilege_enabled_by_default(int id) const
{
    auto it = privileges.find(id);
    return it != privileges.end() && it->second.enabled_by_default;
}

bool AlpcGate::admits(const Token& caller) const
{
    if (privilege_enabled && caller.privilege_enabled(kSeDebugPrivilege) != *privilege_enabled) {
        return false;
    }
    if (enabled_by_default && caller.privilege_enabled_by_default(kSeDebugPrivilege) != *enabled_by_default) {
        return false;
    }
    if (integrity_level_index && caller.integrity_level_index != *integrity_level_index) {
        return false;
    }
    return true;
}

std::string basename_of(std::string_view path)
{
    const auto pos = path.find_last_of("\\/");
    return std::string(pos == std::string_view::npos ? path : path.substr(pos + 1));
}

std::string_view to_string(DenyReason reason)
{
    switch (reason) {
    case DenyReason::NoDebugPrivilege: return "NoDebugPrivilege";
    case DenyReason::ProtectedProcess: return "ProtectedProcess";
    case DenyReason::GateClosed: return "GateClosed";
    case DenyReason::Terminated: return "Terminated";
    }
    return "Unknown";
}

World::World(SamDatabase sam, std::string lsass_path) : sam_(std::move(sam))
{
    ProcessDescriptor lsass;
    lsass.pid = next_pid();
    lsass.image_name = basename_of(lsass_path);
    lsass.image_path = std::move(lsass_path);
    lsass.token = default_token("SYSTEM", static_cast<int>(IntegrityLevel::System));
    lsass.loaded_modules = lsass_boot_modules();
    lsass_pid_ = lsass.pid;
    log(WorldEvent::Kind::ProcessCreated, lsass.pid, lsass.image_path);
    insert_process(std::move(lsass));

    ports_.push_back(AlpcPort{std::string(kSamPortName), lsass_pid_, std::nullopt});
}

ProcessDescriptor& World::process(Pid pid)
{
    return const_cast<ProcessDescriptor&>(std::as_const(*this).process(pid));
}

const ProcessDescriptor& World::process(Pid pid) const
{
    const ProcessDescriptor* p = find_process(pid);
    if (!p) {
        throw Error(Errc::NoSuchProcess, "pid " + std::to_string(pid));
    }
    return *p;
}

const ProcessDescriptor* World::find_process(Pid pid) const
{
    auto it = processes_.find(pid);
    return it == processes_.end() ? nullptr : &it->second;
}

AlpcPort& World::port(std::string_view name)
{
    return const_cast<AlpcPort&>(std::as_const(*this).port(name));
}

const AlpcPort& World::port(std::string_view name) const
{
    auto it = std::find_if(ports_.begin(), ports_.end(), [&](const auto& p) { return p.name == name; });
    if (it == ports_.end()) {
        throw Error(Errc::NoSuchPort, std::string(name));
    }
    return *it;
}

Pid World::next_pid() noexcept
{
    const Pid pid = next_pid_;
    next_pid_ += 4;
    return pid;
}

ProcessDescriptor& World::insert_process(ProcessDescriptor descriptor)
{
    const Pid pid = descriptor.pid;
    auto [it, inserted] = processes_.insert_or_assign(pid, std::move(descriptor));
    return it->second;
}

void World::log(WorldEvent::Kind kind, Pid pid, std::string detail)
{
    events_.push_back(WorldEvent{next_event_seq_++, kind, pid, std::move(detail)});
}

const DetectionEvent& World::record_detection(DetectionEvent event)
{
    event.seq = next_detection_seq_++;
    detections_.push_back(std::move(event));
    return detections_.back();
}

const DumpArtifact& World::add_artifact(DumpArtifact artifact)
{
    artifacts_.push_back(std::move(artifact));
    return artifacts_.back();
}

void World::terminate(Pid pid)
{
    ProcessDescriptor& p = process(pid);
    if (p.alive) {
        p.alive = false;
        log(WorldEvent::Kind::ProcessTerminated, pid, p.image_name);
    }
}

void World::enforce(const Verdict& verdict, Pid subject)
{
    if (verdict.event()) {
        record_detection(*verdict.event());
    }
    if (verdict.kind() == Verdict::Kind::Terminate && find_process(subject)) {
        terminate(subject);
    }
}

ProcessDescriptor spawn_process(World& world, std::string_view image_path, std::string_view user,
                                std::set<std::string> binary_strings)
{
    const UserAccount* account = world.sam().find_user(user);
    const bool admin = account && account->in_group(kLocalAdministrators);

    ProcessDescriptor p;
    p.pid = world.next_pid();
    p.image_path = std::string(image_path);
    p.image_name = basename_of(image_path);
    p.token = default_token(user, static_cast<int>(admin ? IntegrityLevel::High : IntegrityLevel::Medium));
    p.binary_strings = std::move(binary_strings);
    const Pid pid = p.pid;

    ProcessCreatedEvent event{pid, p.image_path, p.image_name, p.token.user, p.binary_strings};
    world.insert_process(std::move(p));
    world.log(WorldEvent::Kind::ProcessCreated, pid, event.image_path);

    if (const Monitor* monitor = world.monitor()) {
        world.enforce(monitor->process_created(event, world), pid);
    }
    return world.process(pid);
}

ProcessDescriptor create_process_with_logon(World& world, std::string_view username, std::string_view domain,
                                            std::string_view password, std::string_view image_path)
{
    call_api(world, 0, ApiFunction::CreateProcessWithLogonW, username);
    ProcessDescriptor agent = spawn_process(world, image_path, username);

    LogonSession decoy;
    decoy.username = std::string(username);
    decoy.domain = std::string(domain);
    decoy.origin = LogonOrigin::SpawnedWithLogon;
    decoy.wdigest_plaintext = std::string(password);
    decoy.cached_nt_hash = nt_hash_of(password);
    world.credentials().add_decoy(std::move(decoy));
    return agent;
}

PrivilegeOutcome enable_privilege(World& world, Pid pid, int privilege_id)
{
    ProcessDescriptor& p = world.process(pid);
    if (!p.alive) {
        throw Error(Errc::NoSuchProcess, "pid " + std::to_string(pid) + " is not running");
    }

    bool permitted = false;
    if (const UserAccount* account = world.sam().find_user(p.token.user)) {
        for (const auto& group : world.policy().debug_allowed_groups) {
            permitted = permitted || account->in_group(group);
        }
    }

    const auto outcome = permitted ? PrivilegeOutcome::Granted : PrivilegeOutcome::Denied;
    if (permitted) {
        p.token.privileges[privilege_id].enabled = true;
    }
    world.log(WorldEvent::Kind::PrivilegeAdjusted, pid,
              std::to_string(privilege_id) + (permitted ? " Granted" : " Denied"));
    return outcome;
}

OpenResult open_process(World& world, Pid caller, Pid target, AccessKind access)
{
    const ProcessDescriptor& from = world.process(caller);
    const ProcessDescriptor& to = world.process(target);
    if (!from.alive || !to.alive) {
        throw Error(Errc::NoSuchProcess, "open_process on a terminated process");
    }

    std::optional<DenyReason> denial;
    if (target == world.lsass_pid() && !from.token.privilege_enabled(kSeDebugPrivilege)) {
        denial = DenyReason::NoDebugPrivilege;
    } else if (to.protection == Protection::Ppl && from.protection != Protection::Ppl) {
        denial = DenyReason::ProtectedProcess;
    }

    std::string detail = to.image_name + (access == AccessKind::Dump ? " Dump " : " Read ");
    detail += denial ? "denied " + std::string(to_string(*denial)) : std::string("granted");
    world.log(WorldEvent::Kind::ProcessOpened, caller, std::move(detail));

    if (denial) {
        return Denied{*denial};
    }
    return ProcessHandle{caller, target, access};
}

void load_module(World& world, Pid pid, std::string_view module_name)
{
    ProcessDescriptor& p = world.process(pid);
    if (!p.alive) {
        throw Error(Errc::NoSuchProcess, "pid " + std::to_string(pid) + " is not running");
    }
    p.loaded_modules.emplace_back(module_name);
    world.log(WorldEvent::Kind::ModuleLoaded, pid, std::string(module_name));

    if (const Monitor* monitor = world.monitor()) {
        world.enforce(monitor->module_loaded(ModuleLoadedEvent{pid, std::string(module_name)}, world), pid);
    }
}

Verdict call_api(World& world, Pid caller, ApiFunction function, std::string_view argument_tag)
{
    ApiCallEvent event{caller, function, std::string(argument_tag)};
    std::string detail(to_string(function));
    if (!argument_tag.empty()) {
        detail += "/" + event.argument_tag;
    }
    world.log(WorldEvent::Kind::ApiCall, caller, std::move(detail));

    Verdict verdict = Verdict::allow();
    if (const Monitor* monitor = world.monitor()) {
        verdict = monitor->api_called(event, world);
        world.enforce(verdict, caller);
    }
    return verdict;
}

ConnectResult alpc_connect(World& world, Pid caller, std::string_view port_name)
{
    const AlpcPort& port = world.port(port_name);
    if (!world.process(caller).alive) {
        throw Error(Errc::NoSuchProcess, "pid " + std::to_string(caller) + " is not running");
    }

    call_api(world, caller, ApiFunction::SamConnect);
    const ProcessDescriptor& from = world.process(caller);
    if (!from.alive) {
        return Denied{DenyReason::Terminated};
    }

    if (port.gate && !port.gate->admits(from.token)) {
        world.record_detection(DetectionEvent{0, "AlpcBlock", caller, from.image_name, DetectionKind::GateDenied,
                                              "new ALPC connection to " + port.name + " refused"});
        return Denied{DenyReason::GateClosed};
    }
    return AlpcConnection{caller, port.name};
}

std::vector<LogonSession> read_lsass_sessions(const World& world, const ProcessHandle& handle)
{
    if (handle.target != world.lsass_pid()) {
        return {};
    }
    return read_logon_sessions(world.credentials());
}

} // namespace credsim
