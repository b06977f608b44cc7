#include "credsim/md4.hpp"

#include <bit>
#include <vector>

namespace credsim {

namespace {

constexpr std::uint32_t f(std::uint32_t x, std::uint32_t y, std::uint32_t z) { return (x & y) | (~x & z); }
constexpr std::uint32_t g(std::uint32_t x, std::uint32_t y, std::uint32_t z) { return (x & y) | (x & z) | (y & z); }
constexpr std::uint32_t h(std::uint32_t x, std::uint32_t y, std::uint32_t z) { return x ^ y ^ z; }

struct Md4State {
    std::uint32_t a = 0x67452301;
    std::uint32_t b = 0xefcdab89;
    std::uint32_t c = 0x98badcfe;
    std::uint32_t d = 0x10325476;

    void compress(const std::uint8_t* block)
    {
        std::uint32_t x[16];
        for (int i = 0; i < 16; ++i) {
            x[i] = std::uint32_t(block[4 * i]) | std::uint32_t(block[4 * i + 1]) << 8 |
                   std::uint32_t(block[4 * i + 2]) << 16 | std::uint32_t(block[4 * i + 3]) << 24;
        }

        std::uint32_t aa = a, bb = b, cc = c, dd = d;

        // Round 1: k walks 0..15, shifts 3 7 11 19.
        static constexpr int r1[4] = {3, 7, 11, 19};
        for (int i = 0; i < 16; ++i) {
            std::uint32_t t = aa + f(bb, cc, dd) + x[i];
            t = std::rotl(t, r1[i % 4]);
            aa = dd; dd = cc; cc = bb; bb = t;
        }

        // Round 2: column order, constant sqrt(2).
        static constexpr int r2[4] = {3, 5, 9, 13};
        static constexpr int k2[16] = {0, 4, 8, 12, 1, 5, 9, 13, 2, 6, 10, 14, 3, 7, 11, 15};
        for (int i = 0; i < 16; ++i) {
            std::uint32_t t = aa + g(bb, cc, dd) + x[k2[i]] + 0x5a827999u;
            t = std::rotl(t, r2[i % 4]);
            aa = dd; dd = cc; cc = bb; bb = t;
        }

        // Round 3: bit-reversed order, constant sqrt(3).
        static constexpr int r3[4] = {3, 9, 11, 15};
        static constexpr int k3[16] = {0, 8, 4, 12, 2, 10, 6, 14, 1, 9, 5, 13, 3, 11, 7, 15};
        for (int i = 0; i < 16; ++i) {
            std::uint32_t t = aa + h(bb, cc, dd) + x[k3[i]] + 0x6ed9eba1u;
            t = std::rotl(t, r3[i % 4]);
            aa = dd; dd = cc; cc = bb; bb = t;
        }

        a += aa;
        b += bb;
        c += cc;
        d += dd;
    }
};

} // namespace

Md4Digest md4(std::span<const std::uint8_t> data)
{
    Md4State state;

    const std::size_t full = data.size() / 64;
    for (std::size_t i = 0; i < full; ++i) {
        state.compress(data.data() + 64 * i);
    }

    // Tail: remaining bytes, 0x80, zero pad to 56 mod 64, 64-bit bit length.
    std::vector<std::uint8_t> tail(data.begin() + static_cast<std::ptrdiff_t>(64 * full), data.end());
    tail.push_back(0x80);
    while (tail.size() % 64 != 56) {
        tail.push_back(0);
    }
    const std::uint64_t bits = static_cast<std::uint64_t>(data.size()) * 8;
    for (int i = 0; i < 8; ++i) {
        tail.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    for (std::size_t off = 0; off < tail.size(); off += 64) {
        state.compress(tail.data() + off);
    }

    Md4Digest out{};
    const std::uint32_t words[4] = {state.a, state.b, state.c, state.d};
    for (int w = 0; w < 4; ++w) {
        for (int i = 0; i < 4; ++i) {
            out[4 * w + i] = static_cast<std::uint8_t>(words[w] >> (8 * i));
        }
    }
    return out;
}

Md4Digest md4(std::string_view bytes)
{
    return md4(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

std::string to_hex(std::span<const std::uint8_t> bytes)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

namespace {

void put_unit(std::string& out, std::uint16_t unit)
{
    out.push_back(static_cast<char>(unit & 0xff));
    out.push_back(static_cast<char>(unit >> 8));
}

} // namespace

std::string utf8_to_utf16le(std::string_view utf8)
{
    constexpr char32_t replacement = 0xfffd;
    std::string out;
    out.reserve(utf8.size() * 2);

    std::size_t i = 0;
    while (i < utf8.size()) {
        const auto lead = static_cast<unsigned char>(utf8[i]);
        char32_t cp = replacement;
        std::size_t len = 1;
        if (lead < 0x80) {
            cp = lead;
        } else if ((lead & 0xe0) == 0xc0) {
            len = 2;
            cp = lead & 0x1f;
        } else if ((lead & 0xf0) == 0xe0) {
            len = 3;
            cp = lead & 0x0f;
        } else if ((lead & 0xf8) == 0xf0) {
            len = 4;
            cp = lead & 0x07;
        } else {
            len = 0;
        }

        bool valid = len > 0 && i + len <= utf8.size();
        for (std::size_t k = 1; valid && k < len; ++k) {
            const auto cont = static_cast<unsigned char>(utf8[i + k]);
            if ((cont & 0xc0) != 0x80) {
                valid = false;
            } else {
                cp = (cp << 6) | (cont & 0x3f);
            }
        }
        static constexpr char32_t min_for_len[5] = {0, 0, 0x80, 0x800, 0x10000};
        if (valid && len > 1 && (cp < min_for_len[len] || cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff))) {
            valid = false;
        }
        if (!valid) {
            cp = replacement;
            len = 1;
        }

        if (cp >= 0x10000) {
            const char32_t v = cp - 0x10000;
            put_unit(out, static_cast<std::uint16_t>(0xd800 + (v >> 10)));
            put_unit(out, static_cast<std::uint16_t>(0xdc00 + (v & 0x3ff)));
        } else {
            put_unit(out, static_cast<std::uint16_t>(cp));
        }
        i += len;
    }
    return out;
}

} // namespace credsim
