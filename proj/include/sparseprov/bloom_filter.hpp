#pragma once

#include "sparseprov/digest.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace sparseprov {

// k Bloom-filter positions of one item, each in [0, m). Repeats are allowed.
struct IndexSet {
    std::vector<std::uint32_t> indices;
};

// Position r (1-based) of `item` under sequence number `seq`:
//   SHA-256(item || be32(seq) || be16(r)), first 8 bytes as a big-endian
//   integer, reduced mod m.
std::uint32_t derive_index(std::span<const std::uint8_t> item, std::uint32_t seq, std::uint32_t m,
                           std::uint16_t r);

// Throws ConfigError unless m >= 1 and 1 <= k <= m.
IndexSet derive_indices(std::span<const std::uint8_t> item, std::uint32_t seq, std::uint32_t m,
                        std::uint16_t k);

// m-bit array with k index derivations per item.
//
// Wire format (big-endian): u32 m, u16 k, then ceil(m/8) bytes where bit i of
// the filter is bit (7 - i % 8) of byte i / 8. Trailing pad bits are zero.
class BloomFilter {
public:
    // Throws ConfigError unless 1 <= k <= m.
    BloomFilter(std::uint32_t m, std::uint16_t k);

    std::uint32_t size() const { return m_; }
    std::uint16_t hash_count() const { return k_; }

    // Throws ConfigError if any index is >= m.
    void insert(const IndexSet& idx);
    bool contains(const IndexSet& idx) const;

    void insert_item(std::span<const std::uint8_t> item, std::uint32_t seq);
    // Derives positions lazily and stops at the first clear bit.
    bool contains_item(std::span<const std::uint8_t> item, std::uint32_t seq) const;

    bool test(std::uint32_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }
    void set(std::uint32_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void saturate();
    std::size_t popcount() const;

    Bytes serialize() const;
    // Throws ConfigError on truncated input, bad (m, k) or non-zero pad bits.
    // `consumed` receives the number of bytes read.
    static BloomFilter deserialize(std::span<const std::uint8_t> data, std::size_t* consumed = nullptr);

    friend bool operator==(const BloomFilter&, const BloomFilter&) = default;

private:
    void check(const IndexSet& idx) const;

    std::uint32_t m_;
    std::uint16_t k_;
    std::vector<std::uint64_t> words_;
};

} // namespace sparseprov
