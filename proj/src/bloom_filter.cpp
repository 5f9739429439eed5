#include "sparseprov/bloom_filter.hpp"

#include "sparseprov/errors.hpp"

#include <bit>
#include <string>

namespace sparseprov {

namespace {

void check_params(std::uint32_t m, std::uint16_t k)
{
    if (m == 0 || k == 0 || k > m)
        throw ConfigError("bloom filter needs 1 <= k <= m (m=" + std::to_string(m) +
                          ", k=" + std::to_string(k) + ")");
}

} // namespace

std::uint32_t derive_index(std::span<const std::uint8_t> item, std::uint32_t seq, std::uint32_t m,
                           std::uint16_t r)
{
    const auto seq_bytes = be32(seq);
    const auto r_bytes = be16(r);
    const Digest d = sha256({item, seq_bytes, r_bytes});
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i)
        x = (x << 8) | d[static_cast<std::size_t>(i)];
    return static_cast<std::uint32_t>(x % m);
}

IndexSet derive_indices(std::span<const std::uint8_t> item, std::uint32_t seq, std::uint32_t m,
                        std::uint16_t k)
{
    check_params(m, k);
    IndexSet out;
    out.indices.reserve(k);
    for (std::uint16_t r = 1; r <= k; ++r)
        out.indices.push_back(derive_index(item, seq, m, r));
    return out;
}

BloomFilter::BloomFilter(std::uint32_t m, std::uint16_t k) : m_(m), k_(k)
{
    check_params(m, k);
    words_.assign((m + 63) / 64, 0);
}

void BloomFilter::check(const IndexSet& idx) const
{
    for (auto i : idx.indices)
        if (i >= m_)
            throw ConfigError("bloom index " + std::to_string(i) + " out of range for m=" +
                              std::to_string(m_));
}

void BloomFilter::insert(const IndexSet& idx)
{
    check(idx);
    for (auto i : idx.indices)
        set(i);
}

bool BloomFilter::contains(const IndexSet& idx) const
{
    check(idx);
    for (auto i : idx.indices)
        if (!test(i))
            return false;
    return true;
}

void BloomFilter::insert_item(std::span<const std::uint8_t> item, std::uint32_t seq)
{
    for (std::uint16_t r = 1; r <= k_; ++r)
        set(derive_index(item, seq, m_, r));
}

bool BloomFilter::contains_item(std::span<const std::uint8_t> item, std::uint32_t seq) const
{
    for (std::uint16_t r = 1; r <= k_; ++r)
        if (!test(derive_index(item, seq, m_, r)))
            return false;
    return true;
}

void BloomFilter::saturate()
{
    for (std::uint32_t i = 0; i < m_; ++i)
        set(i);
}

std::size_t BloomFilter::popcount() const
{
    std::size_t c = 0;
    for (auto w : words_)
        c += static_cast<std::size_t>(std::popcount(w));
    return c;
}

Bytes BloomFilter::serialize() const
{
    Bytes out;
    out.reserve(6 + (m_ + 7) / 8);
    append_be32(out, m_);
    append_be16(out, k_);
    for (std::uint32_t byte = 0; byte < (m_ + 7) / 8; ++byte) {
        std::uint8_t b = 0;
        for (std::uint32_t bit = 0; bit < 8; ++bit) {
            const std::uint32_t i = byte * 8 + bit;
            if (i < m_ && test(i))
                b |= static_cast<std::uint8_t>(0x80U >> bit);
        }
        out.push_back(b);
    }
    return out;
}

BloomFilter BloomFilter::deserialize(std::span<const std::uint8_t> data, std::size_t* consumed)
{
    if (data.size() < 6)
        throw ConfigError("bloom filter: truncated header");
    const std::uint32_t m = (std::uint32_t{data[0]} << 24) | (std::uint32_t{data[1]} << 16) |
                            (std::uint32_t{data[2]} << 8) | data[3];
    const auto k = static_cast<std::uint16_t>((data[4] << 8) | data[5]);
    BloomFilter bf(m, k);
    const std::size_t nbytes = (std::size_t{m} + 7) / 8;
    if (data.size() < 6 + nbytes)
        throw ConfigError("bloom filter: truncated body");
    for (std::size_t byte = 0; byte < nbytes; ++byte) {
        const std::uint8_t b = data[6 + byte];
        for (std::uint32_t bit = 0; bit < 8; ++bit) {
            if (!(b & (0x80U >> bit)))
                continue;
            const auto i = static_cast<std::uint32_t>(byte * 8 + bit);
            if (i >= m)
                throw ConfigError("bloom filter: non-zero pad bits");
            bf.set(i);
        }
    }
    if (consumed)
        *consumed = 6 + nbytes;
    return bf;
}

} // namespace sparseprov
