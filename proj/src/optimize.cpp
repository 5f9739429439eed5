#include "sparseprov/optimize.hpp"

#include "sparseprov/errors.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <string>

namespace sparseprov {

MsspOptimum solve_mssp(const NeighborProfile& profile, std::uint32_t m, std::uint16_t k_max)
{
    if (m < 1)
        throw ConfigError("filter size must be at least 1");
    MsspOptimum best;
    best.m = m;
    const auto top = static_cast<std::uint16_t>(std::min<std::uint32_t>(m, k_max));
    double best_raw = std::numeric_limits<double>::infinity();
    for (std::uint16_t k = 1; k <= top; ++k) {
        const Prob p = mssp_fpr(profile, m, k);
        const double raw = p.value + p.excess;
        best.scan.push_back({k, raw});
        if (raw < best_raw) {
            best_raw = raw;
            best.k = k;
            best.objective = p;
        }
    }
    return best;
}

SsmpOptimum solve_ssmp_equal(const NeighborProfile& profile, const SsmpBudget& budget)
{
    const std::size_t nodes = profile.gamma.size();
    const std::uint64_t mi = budget.m_sum / nodes;
    if (mi < 1 || mi > 0xffffffffULL)
        throw InfeasibleError("budget of " + std::to_string(budget.m_sum) + " bits cannot cover " +
                              std::to_string(nodes) + " nodes");
    SsmpOptimum best;
    best.leftover_bits = budget.m_sum - mi * nodes;
    best.exhaustive = true;
    const auto top = static_cast<std::uint16_t>(std::min<std::uint64_t>(mi, budget.k_max));
    double best_raw = std::numeric_limits<double>::infinity();
    for (std::uint16_t k = 1; k <= top; ++k) {
        const auto params = SsmpParams::equal(nodes + 1, static_cast<std::uint32_t>(mi), k);
        const Prob p = ssmp_fpr_bound(profile, params);
        const double raw = p.value + p.excess;
        best.scan.push_back({k, raw});
        ++best.evaluated;
        if (raw < best_raw) {
            best_raw = raw;
            best.params = params;
            best.objective = p;
        }
    }
    return best;
}

std::uint16_t best_node_k(std::uint32_t m, std::uint64_t gamma, std::uint16_t k_max)
{
    const auto top = static_cast<std::uint16_t>(std::min<std::uint32_t>(m, k_max));
    std::uint16_t best = 1;
    double best_f = 2.0;
    for (std::uint16_t k = 1; k <= top; ++k) {
        const double f = p_edge_recovered(m, k, gamma);
        if (f < best_f) {
            best_f = f;
            best = k;
        }
    }
    return best;
}

namespace {

class Evaluator {
public:
    Evaluator(const NeighborProfile& profile, std::uint16_t k_max) : profile_(profile), k_max_(k_max) {}

    std::uint16_t k_for(std::uint32_t m, std::uint64_t gamma)
    {
        const auto key = std::make_pair(m, gamma);
        auto it = k_.find(key);
        if (it == k_.end())
            it = k_.emplace(key, best_node_k(m, gamma, k_max_)).first;
        return it->second;
    }

    SsmpParams params_for(const std::vector<std::uint32_t>& m)
    {
        SsmpParams p;
        p.m = m;
        for (std::size_t i = 0; i < m.size(); ++i)
            p.k.push_back(k_for(m[i], profile_.gamma[i]));
        return p;
    }

    double raw(const SsmpParams& p)
    {
        ++evaluated;
        const Prob b = ssmp_fpr_bound(profile_, p);
        return b.value + b.excess;
    }

    std::uint64_t evaluated = 0;

private:
    const NeighborProfile& profile_;
    std::uint16_t k_max_;
    std::map<std::pair<std::uint32_t, std::uint64_t>, std::uint16_t> k_;
};

// Number of compositions of `free_units` into `parts` non-negative parts,
// saturating at limit + 1.
std::uint64_t composition_count(std::uint64_t free_units, std::uint64_t parts, std::uint64_t limit)
{
    // C(free_units + parts - 1, parts - 1)
    long double c = 1;
    for (std::uint64_t i = 1; i < parts; ++i) {
        c = c * (free_units + i) / i;
        if (c > static_cast<long double>(limit))
            return limit + 1;
    }
    return static_cast<std::uint64_t>(c + 0.5L);
}

} // namespace

SsmpOptimum solve_ssmp_variable(const NeighborProfile& profile, const SsmpBudget& budget,
                                std::uint64_t exhaustive_cap)
{
    const std::size_t nodes = profile.gamma.size();
    if (budget.granularity < 1)
        throw ConfigError("granularity must be at least 1");
    const std::uint64_t g = budget.granularity;
    const std::uint64_t min_units = std::max<std::uint64_t>(1, (budget.min_per_node + g - 1) / g);
    const std::uint64_t units = budget.m_sum / g;
    const std::uint64_t remainder = budget.m_sum % g;
    if (units < min_units * nodes)
        throw InfeasibleError("budget of " + std::to_string(budget.m_sum) +
                              " bits cannot give every node " + std::to_string(min_units * g) +
                              " bits");
    Evaluator eval(profile, budget.k_max);
    SsmpOptimum best;
    double best_raw = std::numeric_limits<double>::infinity();
    auto consider = [&](const std::vector<std::uint32_t>& m) {
        const auto p = eval.params_for(m);
        const double r = eval.raw(p);
        if (r < best_raw) {
            best_raw = r;
            best.params = p;
        }
        return r;
    };
    // Evaluates a unit allocation with the sub-granularity remainder placed on
    // each node in turn; returns the best objective.
    auto consider_units = [&](const std::vector<std::uint64_t>& u) {
        std::vector<std::uint32_t> m(nodes);
        for (std::size_t i = 0; i < nodes; ++i)
            m[i] = static_cast<std::uint32_t>(u[i] * g);
        if (remainder == 0)
            return consider(m);
        double r = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < nodes; ++i) {
            m[i] += static_cast<std::uint32_t>(remainder);
            r = std::min(r, consider(m));
            m[i] -= static_cast<std::uint32_t>(remainder);
        }
        return r;
    };

    const std::uint64_t free_units = units - min_units * nodes;
    best.exhaustive = composition_count(free_units, nodes, exhaustive_cap) <= exhaustive_cap;
    if (best.exhaustive) {
        std::vector<std::uint64_t> u(nodes, min_units);
        auto place = [&](auto&& self, std::size_t i, std::uint64_t left) -> void {
            if (i + 1 == nodes) {
                u[i] = min_units + left;
                consider_units(u);
                return;
            }
            for (std::uint64_t x = 0; x <= left; ++x) {
                u[i] = min_units + x;
                self(self, i + 1, left - x);
            }
        };
        place(place, 0, free_units);
    } else {
        // Seed proportional to neighbor counts, then hill-climb.
        std::uint64_t gsum = 0;
        for (auto v : profile.gamma)
            gsum += v;
        std::vector<std::uint64_t> u(nodes, min_units);
        std::uint64_t given = 0;
        for (std::size_t i = 0; i < nodes; ++i) {
            const std::uint64_t share = gsum ? free_units * profile.gamma[i] / gsum : 0;
            u[i] += share;
            given += share;
        }
        for (std::size_t i = 0; given < free_units; i = (i + 1) % nodes, ++given)
            ++u[i];
        double current = consider_units(u);
        bool improved = true;
        while (improved) {
            improved = false;
            for (std::size_t from = 0; from < nodes && !improved; ++from) {
                if (u[from] <= min_units)
                    continue;
                for (std::size_t to = 0; to < nodes && !improved; ++to) {
                    if (to == from)
                        continue;
                    --u[from];
                    ++u[to];
                    const double r = consider_units(u);
                    if (r < current) {
                        current = r;
                        improved = true;
                    } else {
                        ++u[from];
                        --u[to];
                    }
                }
            }
        }
    }

    // The equal split is always a candidate.
    const std::uint64_t mi = budget.m_sum / nodes;
    if (mi >= 1) {
        std::vector<std::uint32_t> m(nodes, static_cast<std::uint32_t>(mi));
        const auto extra = static_cast<std::uint32_t>(budget.m_sum - mi * nodes);
        for (std::size_t i = 0; i < nodes; ++i) {
            m[i] += extra;
            consider(m);
            m[i] -= extra;
            if (extra == 0)
                break;
        }
    }

    best.objective = ssmp_fpr_bound(profile, best.params);
    best.evaluated = eval.evaluated;
    best.leftover_bits = budget.m_sum - best.params.m_sum();
    return best;
}

} // namespace sparseprov
