#include "credsim/error.hpp"

namespace credsim {

std::string_view to_string(Errc code)
{
    switch (code) {
    case Errc::UnknownUser: return "UnknownUser";
    case Errc::BadPassword: return "BadPassword";
    case Errc::SystemLockedOut: return "SystemLockedOut";
    case Errc::DuplicateAccount: return "DuplicateAccount";
    case Errc::NoSuchProcess: return "NoSuchProcess";
    case Errc::NoSuchPort: return "NoSuchPort";
    case Errc::UnknownTechnique: return "UnknownTechnique";
    case Errc::DuplicatePolicy: return "DuplicatePolicy";
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
    case Errc::UnknownFormat: return "UnknownFormat";
    case Errc::Io: return "Io";
    }
    return "Unknown";
}

static std::string compose(Errc code, const std::string& message, std::optional<std::size_t> line)
{
    std::string out(to_string(code));
    if (line) {
        out += " (line " + std::to_string(*line) + ")";
    }
    out += ": ";
    out += message;
    return out;
}

Error::Error(Errc code, const std::string& message, std::optional<std::size_t> line)
    : std::runtime_error(compose(code, message, line)), code_(code), message_(message), line_(line)
{}

} // namespace credsim
