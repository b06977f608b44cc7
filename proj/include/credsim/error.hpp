#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace credsim {

enum class Errc {
    UnknownUser,
    BadPassword,
    SystemLockedOut,
    DuplicateAccount,
    NoSuchProcess,
    NoSuchPort,
    UnknownTechnique,
    DuplicatePolicy,
    ParseError,
    ValidationError,
    UnknownFormat,
    Io,
};

std::string_view to_string(Errc code);

// Every failure the simulator reports through an exception carries one of
// the codes above. Scenario parse errors also carry the 1-based line.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message, std::optional<std::size_t> line = std::nullopt);

    Errc code() const noexcept { return code_; }
    std::optional<std::size_t> line() const noexcept { return line_; }
    const std::string& message() const noexcept { return message_; }

private:
    Errc code_;
    std::string message_;
    std::optional<std::size_t> line_;
};

} // namespace credsim
