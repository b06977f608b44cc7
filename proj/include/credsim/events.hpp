#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace credsim {

using Pid = std::uint32_t;

enum class ApiFunction {
    LsaOpenPolicy,
    SamConnect,
    SamOpenDomain,
    CreateProcessWithLogonW,
    MiniDumpWriteDump,
};

std::string_view to_string(ApiFunction function);
std::optional<ApiFunction> api_function_from_string(std::string_view text);

/// Library that exports the function, lowercase.
std::string_view implementing_module(ApiFunction function);

struct ApiCallEvent {
    Pid caller_pid = 0;
    ApiFunction function = ApiFunction::LsaOpenPolicy;
    std::string argument_tag;
};

struct ProcessCreatedEvent {
    Pid pid = 0;
    std::string image_path;
    std::string image_name;
    std::string user;
    std::set<std::string> binary_strings;
};

struct ModuleLoadedEvent {
    Pid pid = 0;
    std::string module_name;
};

/// Raw activity log entry; one per spawn, module load, API call and the
/// other process-level operations.
struct WorldEvent {
    enum class Kind {
        ProcessCreated,
        ProcessTerminated,
        ModuleLoaded,
        ApiCall,
        ProcessOpened,
        PrivilegeAdjusted,
        LogonAttempt,
    };

    std::uint64_t seq = 0;
    Kind kind = Kind::ProcessCreated;
    Pid pid = 0;
    std::string detail;
};

std::string_view to_string(WorldEvent::Kind kind);

enum class DetectionKind { ProcessWarning, ApiCallBlocked, DecoyLogonAttempt, GateDenied, SignatureHit };

std::string_view to_string(DetectionKind kind);

struct DetectionEvent {
    std::uint64_t seq = 0;  // assigned by the world when recorded
    std::string policy;
    Pid subject_pid = 0;
    std::string subject_image;
    DetectionKind kind = DetectionKind::ProcessWarning;
    std::string message;
};

class Verdict {
public:
    enum class Kind { Allow, Warn, Deny, Terminate };

    static Verdict allow() { return Verdict{}; }
    static Verdict warn(DetectionEvent event) { return Verdict{Kind::Warn, std::move(event)}; }
    static Verdict deny(DetectionEvent event) { return Verdict{Kind::Deny, std::move(event)}; }
    static Verdict terminate(DetectionEvent event) { return Verdict{Kind::Terminate, std::move(event)}; }

    Kind kind() const noexcept { return kind_; }
    const std::optional<DetectionEvent>& event() const noexcept { return event_; }

    bool allowed() const noexcept { return kind_ == Kind::Allow || kind_ == Kind::Warn; }

    /// Keeps the more severe of the two; ties keep `*this`.
    Verdict& merge(Verdict other);

private:
    Verdict() = default;
    Verdict(Kind kind, DetectionEvent event) : kind_(kind), event_(std::move(event)) {}

    Kind kind_ = Kind::Allow;
    std::optional<DetectionEvent> event_;
};

std::string_view to_string(Verdict::Kind kind);

} // namespace credsim
