#include "credsim/events.hpp"

namespace credsim {

std::string_view to_string(ApiFunction function)
{
    switch (function) {
    case ApiFunction::LsaOpenPolicy: return "LsaOpenPolicy";
    case ApiFunction::SamConnect: return "SamConnect";
    case ApiFunction::SamOpenDomain: return "SamOpenDomain";
    case ApiFunction::CreateProcessWithLogonW: return "CreateProcessWithLogonW";
    case ApiFunction::MiniDumpWriteDump: return "MiniDumpWriteDump";
    }
    return "Unknown";
}

std::optional<ApiFunction> api_function_from_string(std::string_view text)
{
    for (auto f : {ApiFunction::LsaOpenPolicy, ApiFunction::SamConnect, ApiFunction::SamOpenDomain,
                   ApiFunction::CreateProcessWithLogonW, ApiFunction::MiniDumpWriteDump}) {
        if (to_string(f) == text) {
            return f;
        }
    }
    return std::nullopt;
}

std::string_view implementing_module(ApiFunction function)
{
    switch (function) {
    case ApiFunction::LsaOpenPolicy: return "advapi32.dll";
    case ApiFunction::SamConnect:
    case ApiFunction::SamOpenDomain: return "samlib.dll";
    case ApiFunction::CreateProcessWithLogonW: return "advapi32.dll";
    case ApiFunction::MiniDumpWriteDump: return "dbghelp.dll";
    }
    return "";
}

std::string_view to_string(WorldEvent::Kind kind)
{
    using K = WorldEvent::Kind;
    switch (kind) {
    case K::ProcessCreated: return "ProcessCreated";
    case K::ProcessTerminated: return "ProcessTerminated";
    case K::ModuleLoaded: return "ModuleLoaded";
    case K::ApiCall: return "ApiCall";
    case K::ProcessOpened: return "ProcessOpened";
    case K::PrivilegeAdjusted: return "PrivilegeAdjusted";
    case K::LogonAttempt: return "LogonAttempt";
    }
    return "Unknown";
}

std::string_view to_string(DetectionKind kind)
{
    switch (kind) {
    case DetectionKind::ProcessWarning: return "ProcessWarning";
    case DetectionKind::ApiCallBlocked: return "ApiCallBlocked";
    case DetectionKind::DecoyLogonAttempt: return "DecoyLogonAttempt";
    case DetectionKind::GateDenied: return "GateDenied";
    case DetectionKind::SignatureHit: return "SignatureHit";
    }
    return "Unknown";
}

std::string_view to_string(Verdict::Kind kind)
{
    switch (kind) {
    case Verdict::Kind::Allow: return "Allow";
    case Verdict::Kind::Warn: return "Warn";
    case Verdict::Kind::Deny: return "Deny";
    case Verdict::Kind::Terminate: return "Terminate";
    }
    return "Unknown";
}

Verdict& Verdict::merge(Verdict other)
{
    if (static_cast<int>(other.kind_) > static_cast<int>(kind_)) {
        *this = std::move(other);
    }
    return *this;
}

} // namespace credsim
