#include "sparseprov/delay.hpp"

#include "sparseprov/errors.hpp"

#include <algorithm>
#include <numeric>

namespace sparseprov {

void DelayParams::validate() const
{
    for (double v : {t_hN, t_hR, t_qN, t_qR, t_pr, t_cmp_R})
        if (!(v >= 0))
            throw ConfigError("delay parameters must be non-negative");
}

DelayParams DelayParams::scaled(double f) const
{
    return {t_hN * f, t_hR * f, t_qN * f, t_qR * f, t_pr * f, t_cmp_R * f};
}

std::vector<DelayComponent> SsmpDelay::components() const
{
    return {{"learning-ssmp", "node_embedding", node_embedding},
            {"learning-ssmp", "propagation", propagation},
            {"learning-ssmp", "rsu_processing", rsu_processing},
            {"learning-ssmp", "total", total}};
}

std::vector<DelayComponent> MsspDelay::components() const
{
    return {{"learning-mssp", "node_embedding", node_embedding},
            {"learning-mssp", "propagation", propagation},
            {"learning-mssp", "rsu_processing", rsu_processing},
            {"learning-mssp", "total", total}};
}

std::vector<DelayComponent> PayloadDelay::components(const std::string& phase) const
{
    return {{phase, "transmit", transmit},
            {phase, "recover", recover},
            {phase, "verification", verification},
            {phase, "total", total}};
}

SsmpDelay delay_ssmp(const Topology& t, const SsmpParams& params, const DelayParams& d)
{
    d.validate();
    const std::size_t n = t.node_count();
    params.validate(n);
    const auto hops = ssmp_route_schedule(t);
    SsmpDelay out;
    std::vector<double> arrival(n - 1), service(n - 1);
    for (NodeId i = 0; i + 1 < n; ++i) {
        const double embed = d.t_hN * params.k[i] * static_cast<double>(t.degree(i));
        const double transit = static_cast<double>(hops[i]) * (d.t_qN + d.t_pr);
        service[i] = d.t_qR + d.t_hR * static_cast<double>(n) * params.k[i];
        arrival[i] = embed + transit;
        out.packet.push_back(arrival[i] + service[i]);
        out.node_embedding = std::max(out.node_embedding, embed);
        out.propagation = std::max(out.propagation, transit);
    }
    std::vector<std::size_t> order(n - 1);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return arrival[a] < arrival[b]; });
    out.completion.assign(n - 1, 0.0);
    double busy_until = 0;
    for (std::size_t i : order) {
        busy_until = std::max(busy_until, arrival[i]) + service[i];
        out.completion[i] = busy_until;
        out.rsu_processing += service[i];
    }
    const double reinforce = d.t_cmp_R * static_cast<double>(n * n);
    out.rsu_processing += reinforce;
    out.total = busy_until + reinforce;
    return out;
}

MsspDelay delay_mssp(const Topology& t, std::uint16_t k, const DelayParams& d, NodeId start)
{
    d.validate();
    const std::size_t n = t.node_count();
    MsspDelay out;
    out.h_max = mssp_walk(t, start).size() - 1;
    double gamma_sum = 0;
    for (NodeId i = 0; i + 1 < n; ++i)
        gamma_sum += static_cast<double>(t.degree(i));
    out.node_embedding = d.t_hN * k * gamma_sum;
    out.propagation = static_cast<double>(out.h_max) * d.t_pr;
    out.rsu_processing = d.t_hR * static_cast<double>(n * (n - 1)) * k +
                         d.t_cmp_R * static_cast<double>(n * n);
    out.total = out.node_embedding + out.propagation + out.rsu_processing;
    return out;
}

PayloadDelay delay_payload(EmbedMode mode, std::size_t h, std::uint16_t k, std::size_t beta,
                           const ContextGraph& graph, const DelayParams& d)
{
    d.validate();
    if (beta < 1)
        throw ConfigError("beta must be at least 1");
    const double theta = static_cast<double>(mode == EmbedMode::DE ? h : h / 2);
    PayloadDelay out;
    out.transmit = theta * ((k + 1) * d.t_hN + d.t_pr);
    const auto tested = mode == EmbedMode::DE ? graph.directed_edge_count()
                                              : graph.directed_double_edge_count();
    out.recover = static_cast<double>(tested) * k * d.t_hR;
    out.verification = static_cast<double>(beta) * theta * d.t_hR;
    out.total = out.transmit + out.recover + out.verification;
    return out;
}

} // namespace sparseprov
