#include "sparseprov/identity.hpp"

#include "sparseprov/errors.hpp"
#include "sparseprov/rng.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

namespace sparseprov {

HashChain default_chain_seed()
{
    static constexpr std::string_view label = "sparseprov/hash-chain-seed/v1";
    const auto* p = reinterpret_cast<const std::uint8_t*>(label.data());
    return HashChain{sha256(std::span<const std::uint8_t>(p, label.size()))};
}

KeyRing::KeyRing(std::vector<Key> keys, HashChain seed) : keys_(std::move(keys)), seed_(seed)
{
    if (keys_.size() < 2)
        throw ConfigError("key ring needs keys for at least 2 nodes");
}

KeyRing KeyRing::generate(std::size_t n, std::uint64_t seed)
{
    Rng rng(mix64(seed ^ 0x6b657972696e67ULL));
    std::vector<Key> keys(n);
    for (auto& key : keys)
        for (std::size_t i = 0; i < key.size(); i += 8) {
            const std::uint64_t x = rng.next();
            for (std::size_t b = 0; b < 8; ++b)
                key[i + b] = static_cast<std::uint8_t>(x >> (8 * b));
        }
    return KeyRing(std::move(keys));
}

const Key& KeyRing::key(NodeId i) const
{
    if (i >= keys_.size())
        throw ConfigError("no key for node " + std::to_string(i));
    return keys_[i];
}

KeyRing read_keys(std::istream& in, std::size_t n)
{
    std::vector<Key> keys;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos)
            continue;
        const auto last = line.find_last_not_of(" \t\r");
        Bytes raw;
        try {
            raw = from_hex(std::string_view(line).substr(first, last - first + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("key file line " + std::to_string(lineno) + ": " + e.what());
        }
        if (raw.size() != 32)
            throw ConfigError("key file line " + std::to_string(lineno) + ": expected 32-byte key");
        Key k{};
        std::copy(raw.begin(), raw.end(), k.begin());
        keys.push_back(k);
    }
    if (keys.size() + 1 == n)
        keys.push_back(Key{});
    if (keys.size() != n)
        throw ConfigError("key file has " + std::to_string(keys.size()) + " keys, expected " +
                          std::to_string(n - 1) + " or " + std::to_string(n));
    return KeyRing(std::move(keys));
}

KeyRing load_keys(const std::string& path, std::size_t n)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open key file '" + path + "'");
    return read_keys(in, n);
}

void write_keys(std::ostream& out, const KeyRing& keys)
{
    for (NodeId i = 0; i < keys.node_count(); ++i)
        out << to_hex(keys.key(i)) << '\n';
}

EdgeId edge_id(const KeyRing& keys, NodeId i, NodeId j)
{
    if (i == j)
        throw ConfigError("edge id needs distinct endpoints");
    if (j >= keys.node_count())
        throw ConfigError("no key for node " + std::to_string(j));
    Bytes msg;
    append_be16(msg, static_cast<std::uint16_t>(i));
    append_be16(msg, static_cast<std::uint16_t>(j));
    return EdgeId{hmac_sha256(keys.key(i), msg)};
}

DoubleEdgeId double_edge_id(const KeyRing& keys, NodeId prev, NodeId center, NodeId next)
{
    if (prev == center || center == next || prev == next)
        throw ConfigError("double-edge id needs three distinct nodes");
    if (prev >= keys.node_count() || next >= keys.node_count())
        throw ConfigError("double-edge id node out of range");
    Bytes msg;
    append_be16(msg, static_cast<std::uint16_t>(prev));
    append_be16(msg, static_cast<std::uint16_t>(center));
    append_be16(msg, static_cast<std::uint16_t>(next));
    return DoubleEdgeId{hmac_sha256(keys.key(center), msg)};
}

HashChain chain_update(const HashChain& hc, std::span<const std::uint8_t> id, std::uint32_t seq)
{
    const auto seq_bytes = be32(seq);
    return HashChain{sha256({seq_bytes, id, hc.value})};
}

HashChain chain_over(const HashChain& seed, std::span<const Digest> ids, std::uint32_t seq)
{
    HashChain hc = seed;
    for (const auto& id : ids)
        hc = chain_update(hc, id, seq);
    return hc;
}

IdentityTable::IdentityTable(KeyRing keys, bool cache_double_edges)
    : keys_(std::move(keys)), n_(keys_.node_count())
{
    if (n_ <= kMaxCachedPairs) {
        eids_.resize(n_ * n_);
        for (NodeId i = 0; i < n_; ++i)
            for (NodeId j = 0; j < n_; ++j)
                if (i != j)
                    eids_[i * n_ + j] = edge_id(keys_, i, j).bytes;
    }
    if (!cache_double_edges || n_ > kMaxCachedTriples)
        return;
    deids_.resize(n_ * n_ * n_);
    for (NodeId a = 0; a < n_; ++a)
        for (NodeId b = 0; b < n_; ++b)
            for (NodeId c = 0; c < n_; ++c)
                if (a != b && b != c && a != c)
                    deids_[(a * n_ + b) * n_ + c] = double_edge_id(keys_, a, b, c).bytes;
}

} // namespace sparseprov
