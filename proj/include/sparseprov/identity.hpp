#pragma once

#include "sparseprov/digest.hpp"
#include "sparseprov/topology.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace sparseprov {

using Key = std::array<std::uint8_t, 32>;

struct EdgeId {
    Digest bytes{};
    friend bool operator==(const EdgeId&, const EdgeId&) = default;
};

struct DoubleEdgeId {
    Digest bytes{};
    friend bool operator==(const DoubleEdgeId&, const DoubleEdgeId&) = default;
};

struct HashChain {
    Digest value{};
    friend bool operator==(const HashChain&, const HashChain&) = default;
};

// Publicly known initial chain value hc0 = SHA-256("sparseprov/hash-chain-seed/v1").
HashChain default_chain_seed();

// Per-node derived secret keys as held by the destination. The destination's own
// slot (n-1) is present but never used for embedding.
class KeyRing {
public:
    KeyRing(std::vector<Key> keys, HashChain seed = default_chain_seed());

    // Deterministic key material for n nodes.
    static KeyRing generate(std::size_t n, std::uint64_t seed);

    std::size_t node_count() const { return keys_.size(); }
    // Throws ConfigError for an unknown node.
    const Key& key(NodeId i) const;
    const HashChain& chain_seed() const { return seed_; }

private:
    std::vector<Key> keys_;
    HashChain seed_;
};

// Key file: one hex-encoded 32-byte key per line, line i holding node i's key.
// Either n-1 lines (non-destination nodes) or n lines are accepted; a missing
// destination key is filled with zeros. Blank lines and '#' comments are skipped.
KeyRing read_keys(std::istream& in, std::size_t n);
KeyRing load_keys(const std::string& path, std::size_t n);
void write_keys(std::ostream& out, const KeyRing& keys);

// HMAC-SHA-256 under K_i of be16(i) || be16(j). Throws ConfigError if i == j or a
// key is missing.
EdgeId edge_id(const KeyRing& keys, NodeId i, NodeId j);

// HMAC-SHA-256 under K_center of be16(prev) || be16(center) || be16(next).
// Throws ConfigError unless the three nodes are pairwise distinct.
DoubleEdgeId double_edge_id(const KeyRing& keys, NodeId prev, NodeId center, NodeId next);

// SHA-256(be32(seq) || id || hc).
HashChain chain_update(const HashChain& hc, std::span<const std::uint8_t> id, std::uint32_t seq);

// Folds chain_update over ids in order, starting from `seed`.
HashChain chain_over(const HashChain& seed, std::span<const Digest> ids, std::uint32_t seq);

// Identity source for protocol actors and the destination. Small networks get
// every ordered pair (and, on request, every ordered triple) precomputed; larger
// ones derive identities on demand. Read-only after construction, so one table
// can be shared by concurrent trials.
class IdentityTable {
public:
    static constexpr std::size_t kMaxCachedPairs = 4096;
    static constexpr std::size_t kMaxCachedTriples = 64;

    explicit IdentityTable(KeyRing keys, bool cache_double_edges = false);

    std::size_t node_count() const { return n_; }
    const KeyRing& keys() const { return keys_; }

    Digest edge(NodeId i, NodeId j) const
    {
        return eids_.empty() ? edge_id(keys_, i, j).bytes : eids_[i * n_ + j];
    }
    Digest double_edge(NodeId prev, NodeId center, NodeId next) const
    {
        return deids_.empty() ? double_edge_id(keys_, prev, center, next).bytes
                              : deids_[(prev * n_ + center) * n_ + next];
    }

private:
    KeyRing keys_;
    std::size_t n_;
    std::vector<Digest> eids_;
    std::vector<Digest> deids_;
};

} // namespace sparseprov
