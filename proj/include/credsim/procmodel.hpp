#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "credsim/authcore.hpp"
#include "credsim/events.hpp"

namespace credsim {

inline constexpr int kSeDebugPrivilege = 20;
inline constexpr std::string_view kSamPortName = R"(\RPC Control\samss lpc)";
inline constexpr std::string_view kDefaultLsassPath = R"(C:\Windows\system32\lsass.exe)";

enum class IntegrityLevel : int { Low = 0, Medium = 1, High = 2, System = 3 };

struct PrivilegeState {
    bool enabled = false;
    bool enabled_by_default = false;

    friend bool operator==(const PrivilegeState&, const PrivilegeState&) = default;
};

struct Token {
    std::string user;
    std::map<int, PrivilegeState> privileges;
    int integrity_level_index = static_cast<int>(IntegrityLevel::Medium);

    bool privilege_enabled(int id) const;
    bool privilege_enabled_by_default(int id) const;
};

enum class Protection { None, Ppl };

struct ProcessDescriptor {
    Pid pid = 0;
    std::string image_path;
    std::string image_name;
    Token token;
    Protection protection = Protection::None;
    std::vector<std::string> loaded_modules;
    bool alive = true;
    // Strings embedded in the binary; what a signature scanner would see.
    std::set<std::string> binary_strings;
};

/// Admission predicate installed on the SAM port by ALPC blocking. Each of
/// the three token fields can be pinned; unpinned fields are not checked.
struct AlpcGate {
    std::optional<bool> privilege_enabled;
    std::optional<bool> enabled_by_default;
    std::optional<int> integrity_level_index = static_cast<int>(IntegrityLevel::System);
    bool restore_on_logout = true;

    bool admits(const Token& caller) const;
};

struct AlpcPort {
    std::string name;
    Pid owner_pid = 0;
    std::optional<AlpcGate> gate;
};

/// Dump file left on disk by a dumping tool; parsing it yields the session
/// snapshot taken when it was written.
struct DumpArtifact {
    std::string name;
    Pid writer_pid = 0;
    std::vector<LogonSession> snapshot;
};

/// Policy switches that alter OS behavior rather than observe it.
struct SystemPolicy {
    bool restricted_admin_rdp = false;
    bool ntlm_disabled = false;
    std::set<std::string, std::less<>> debug_allowed_groups{std::string(kLocalAdministrators)};
};

class World;

/// Observer attached to a world; receives every process creation, module
/// load, API call and logon attempt and answers with a verdict. Must be
/// immutable once attached.
class Monitor {
public:
    virtual ~Monitor() = default;

    virtual Verdict process_created(const ProcessCreatedEvent& event, const World& world) const = 0;
    virtual Verdict module_loaded(const ModuleLoadedEvent& event, const World& world) const = 0;
    virtual Verdict api_called(const ApiCallEvent& event, const World& world) const = 0;
    virtual Verdict logon_attempted(std::string_view username, std::string_view domain,
                                    const World& world) const = 0;
};

/// One simulated machine: SAM, LSASS sessions, processes, the SAM ALPC port
/// and the logs. Single-owner; distinct worlds share nothing mutable.
class World {
public:
    /// Boots lsass (System integrity, stock module list) and creates the
    /// SAM port it owns.
    explicit World(SamDatabase sam, std::string lsass_path = std::string(kDefaultLsassPath));

    SamDatabase& sam() noexcept { return sam_; }
    const SamDatabase& sam() const noexcept { return sam_; }
    CredentialStore& credentials() noexcept { return credentials_; }
    const CredentialStore& credentials() const noexcept { return credentials_; }
    SystemPolicy& policy() noexcept { return policy_; }
    const SystemPolicy& policy() const noexcept { return policy_; }

    Pid lsass_pid() const noexcept { return lsass_pid_; }

    /// Throws NoSuchProcess for unknown pids.
    ProcessDescriptor& process(Pid pid);
    const ProcessDescriptor& process(Pid pid) const;
    const ProcessDescriptor* find_process(Pid pid) const;
    const std::map<Pid, ProcessDescriptor>& processes() const noexcept { return processes_; }

    /// Throws NoSuchPort.
    AlpcPort& port(std::string_view name);
    const AlpcPort& port(std::string_view name) const;
    const std::vector<AlpcPort>& ports() const noexcept { return ports_; }

    bool locked_out() const noexcept { return locked_out_; }
    void set_locked_out(bool value) noexcept { locked_out_ = value; }

    void attach_monitor(std::shared_ptr<const Monitor> monitor) { monitor_ = std::move(monitor); }
    const Monitor* monitor() const noexcept { return monitor_.get(); }

    const std::vector<WorldEvent>& event_log() const noexcept { return events_; }
    const std::vector<DetectionEvent>& detections() const noexcept { return detections_; }
    const std::vector<DumpArtifact>& artifacts() const noexcept { return artifacts_; }

    // Low-level mutators used by the operations below.
    Pid next_pid() noexcept;
    ProcessDescriptor& insert_process(ProcessDescriptor descriptor);
    void log(WorldEvent::Kind kind, Pid pid, std::string detail);
    const DetectionEvent& record_detection(DetectionEvent event);
    const DumpArtifact& add_artifact(DumpArtifact artifact);
    void terminate(Pid pid);

    /// Records the verdict's detection event and enforces Terminate against
    /// `subject`.
    void enforce(const Verdict& verdict, Pid subject);

private:
    SamDatabase sam_;
    CredentialStore credentials_;
    SystemPolicy policy_;
    std::map<Pid, ProcessDescriptor> processes_;
    std::vector<AlpcPort> ports_;
    std::vector<WorldEvent> events_;
    std::vector<DetectionEvent> detections_;
    std::vector<DumpArtifact> artifacts_;
    std::shared_ptr<const Monitor> monitor_;
    Pid lsass_pid_ = 0;
    Pid next_pid_ = 500;
    std::uint64_t next_event_seq_ = 1;
    std::uint64_t next_detection_seq_ = 1;
    bool locked_out_ = false;
};

std::string basename_of(std::string_view path);

ProcessDescriptor spawn_process(World& world, std::string_view image_path, std::string_view user,
                                std::set<std::string> binary_strings = {});

/// Starts an agent process under another identity and plants that identity
/// as a decoy logon session at the front of the credential store. The
/// credentials need not exist in SAM.
ProcessDescriptor create_process_with_logon(World& world, std::string_view username,
                                            std::string_view domain, std::string_view password,
                                            std::string_view image_path);

enum class PrivilegeOutcome { Granted, Denied };

PrivilegeOutcome enable_privilege(World& world, Pid pid, int privilege_id);

enum class DenyReason { NoDebugPrivilege, ProtectedProcess, GateClosed, Terminated };

std::string_view to_string(DenyReason reason);

struct Denied {
    DenyReason reason;
};

enum class AccessKind { Read, Dump };

struct ProcessHandle {
    Pid caller = 0;
    Pid target = 0;
    AccessKind access = AccessKind::Read;
};

using OpenResult = std::variant<ProcessHandle, Denied>;

OpenResult open_process(World& world, Pid caller, Pid target, AccessKind access);

void load_module(World& world, Pid pid, std::string_view module_name);

/// Emits the ApiCallEvent, lets the monitor judge it and enforces the
/// verdict. Returns the verdict so callers can stop when terminated.
Verdict call_api(World& world, Pid caller, ApiFunction function, std::string_view argument_tag = {});

struct AlpcConnection {
    Pid caller = 0;
    std::string port_name;
};

using ConnectResult = std::variant<AlpcConnection, Denied>;

/// SamConnect: emits ApiCall(SamConnect) and then applies the port gate.
ConnectResult alpc_connect(World& world, Pid caller, std::string_view port_name);

/// Memory read through an open handle on lsass.
std::vector<LogonSession> read_lsass_sessions(const World& world, const ProcessHandle& handle);

} // namespace credsim
