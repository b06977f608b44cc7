#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace credsim {

using Md4Digest = std::array<std::uint8_t, 16>;

/// MD4 message digest (RFC 1320) over an arbitrary byte sequence.
Md4Digest md4(std::span<const std::uint8_t> data);

Md4Digest md4(std::string_view bytes);

std::string to_hex(std::span<const std::uint8_t> bytes);

/// Re-encodes UTF-8 text as UTF-16LE bytes. Malformed sequences are replaced
/// with U+FFFD so that every input string has a defined encoding.
std::string utf8_to_utf16le(std::string_view utf8);

} // namespace credsim
