#pragma once

#include "sparseprov/learning.hpp"
#include "sparseprov/provenance.hpp"
#include "sparseprov/topology.hpp"

#include <string>
#include <vector>

namespace sparseprov {

// Durations in seconds.
struct DelayParams {
    double t_hN = 0; // one hash at a node
    double t_hR = 0; // one hash at the destination
    double t_qN = 0; // queueing at a relay
    double t_qR = 0; // queueing at the destination
    double t_pr = 0; // one-hop propagation
    double t_cmp_R = 0; // one ADJ comparison during reinforcement

    // Throws ConfigError on a negative field.
    void validate() const;
    DelayParams scaled(double factor) const;
};

struct DelayComponent {
    std::string phase;
    std::string component;
    double seconds = 0;
};

struct SsmpDelay {
    std::vector<double> packet;     // per-node packet duration (closed form)
    std::vector<double> completion; // per-node finish time at the destination
    double node_embedding = 0;      // slowest node's embedding time
    double propagation = 0;         // slowest packet's transit
    double rsu_processing = 0;      // destination busy time incl. reinforcement
    double total = 0;

    std::vector<DelayComponent> components() const;
};

struct MsspDelay {
    std::size_t h_max = 0;
    double node_embedding = 0;
    double propagation = 0;
    double rsu_processing = 0;
    double total = 0;

    std::vector<DelayComponent> components() const;
};

struct PayloadDelay {
    double transmit = 0;
    double recover = 0;      // membership tests over the context graph
    double verification = 0; // worst-case chain checks, beta of them
    double total = 0;

    std::vector<DelayComponent> components(const std::string& phase) const;
};

// Packets leave their sources at time 0; the destination serves arrivals one at
// a time in arrival order, then runs the n^2 reinforcement pass.
SsmpDelay delay_ssmp(const Topology& t, const SsmpParams& params, const DelayParams& d);

MsspDelay delay_mssp(const Topology& t, std::uint16_t k, const DelayParams& d, NodeId start = 0);

// Directed identities tested at recovery: edges not leaving the destination
// (DE) or double-edges neither starting nor centered at it (DDE).
PayloadDelay delay_payload(EmbedMode mode, std::size_t h, std::uint16_t k, std::size_t beta,
                           const ContextGraph& graph, const DelayParams& d);

} // namespace sparseprov
