#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sparseprov {

inline constexpr std::size_t kDigestBytes = 32;
using Digest = std::array<std::uint8_t, kDigestBytes>;
using Bytes = std::vector<std::uint8_t>;

// SHA-256 over the concatenation of `parts`.
Digest sha256(std::initializer_list<std::span<const std::uint8_t>> parts);
Digest sha256(std::span<const std::uint8_t> data);

// HMAC-SHA-256.
Digest hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> message);

inline void append_be16(Bytes& out, std::uint16_t v)
{
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline void append_be32(Bytes& out, std::uint32_t v)
{
    for (int shift = 24; shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>(v >> shift));
}

inline std::array<std::uint8_t, 4> be32(std::uint32_t v)
{
    return {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16),
            static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
}

inline std::array<std::uint8_t, 2> be16(std::uint16_t v)
{
    return {static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
}

std::string to_hex(std::span<const std::uint8_t> bytes);
// Throws ConfigError on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

} // namespace sparseprov
