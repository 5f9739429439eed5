#include "sparseprov/analysis.hpp"

#include "sparseprov/errors.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>

namespace sparseprov {

namespace mp = boost::multiprecision;
using BigFloat = mp::cpp_bin_float_50;

Prob Prob::clamp(double raw)
{
    Prob p;
    p.excess = raw > 1.0 ? raw - 1.0 : 0.0;
    p.value = std::clamp(raw, 0.0, 1.0);
    return p;
}

BigInt stirling2(unsigned k, unsigned n)
{
    if (n == 0)
        return k == 0 ? 1 : 0;
    BigInt sum = 0;
    BigInt binom = 1; // C(n, i)
    for (unsigned i = 0; i <= n; ++i) {
        const BigInt term = binom * mp::pow(BigInt(n - i), k);
        if (i % 2)
            sum -= term;
        else
            sum += term;
        binom = binom * (n - i) / (i + 1);
    }
    BigInt fact = 1;
    for (unsigned i = 2; i <= n; ++i)
        fact *= i;
    return sum / fact;
}

namespace {

std::vector<double> compute_set_bits(std::uint32_t m, std::uint64_t inserted)
{
    const std::uint64_t imax = std::min<std::uint64_t>(m, inserted);
    std::vector<double> out(imax + 1, 0.0);
    if (inserted == 0) {
        out[0] = 1.0;
        return out;
    }
    const auto N = static_cast<unsigned>(inserted);
    std::vector<BigInt> pw(imax + 1);
    for (std::uint64_t x = 0; x <= imax; ++x)
        pw[x] = mp::pow(BigInt(x), N);
    const BigFloat denom(mp::pow(BigInt(m), N));

    // row[j] = C(i, j); surjections(N, i) = sum_j (-1)^j C(i, j) (i - j)^N = i! S(N, i).
    std::vector<BigInt> row{1};
    BigInt choose_m = 1; // C(m, i)
    for (std::uint64_t i = 1; i <= imax; ++i) {
        row.push_back(0);
        for (std::size_t j = row.size() - 1; j > 0; --j)
            row[j] += row[j - 1];
        choose_m = choose_m * (m - i + 1) / i;
        BigInt surj = 0;
        for (std::uint64_t j = 0; j <= i; ++j) {
            if (j % 2)
                surj -= row[j] * pw[i - j];
            else
                surj += row[j] * pw[i - j];
        }
        out[i] = static_cast<double>(BigFloat(choose_m * surj) / denom);
    }
    return out;
}

} // namespace

const std::vector<double>& set_bits_distribution(std::uint32_t m, std::uint64_t inserted)
{
    if (m < 1)
        throw ConfigError("filter size must be at least 1");
    static std::mutex mu;
    static std::map<std::pair<std::uint32_t, std::uint64_t>, std::unique_ptr<std::vector<double>>>
        cache;
    const auto key = std::make_pair(m, inserted);
    {
        std::lock_guard lock(mu);
        if (auto it = cache.find(key); it != cache.end())
            return *it->second;
    }
    auto dist = std::make_unique<std::vector<double>>(compute_set_bits(m, inserted));
    std::lock_guard lock(mu);
    auto [it, fresh] = cache.emplace(key, std::move(dist));
    return *it->second;
}

Prob p_set_bits(std::uint32_t i, std::uint32_t m, std::uint64_t inserted)
{
    if (i < 1 || i > m || i > inserted)
        throw ConfigError("p_set_bits needs 1 <= i <= min(m, inserted)");
    return Prob::clamp(set_bits_distribution(m, inserted)[i]);
}

Prob p_edge_recovered(std::uint32_t m, std::uint16_t k, std::uint64_t gamma)
{
    if (k < 1 || k > m)
        throw ConfigError("need 1 <= k <= m");
    if (gamma == 0)
        return Prob{};
    const auto& dist = set_bits_distribution(m, gamma * k);
    double sum = 0.0;
    for (std::size_t i = 1; i < dist.size(); ++i)
        sum += std::pow(static_cast<double>(i) / m, k) * dist[i];
    return Prob::clamp(sum);
}

namespace {

std::vector<double> node_factors(const NeighborProfile& profile, const SsmpParams& params)
{
    params.validate(profile.node_count());
    std::vector<double> f(profile.gamma.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = p_edge_recovered(params.m[i], params.k[i], profile.gamma[i]);
    return f;
}

} // namespace

Prob ssmp_fpr_exact(const Topology& t, const SsmpParams& params)
{
    const auto f = node_factors(neighbor_profile(t), params);
    double log_none = 0.0;
    for (const Edge& e : complement_edges(t))
        log_none += std::log1p(-f[e.a] * f[e.b]);
    return Prob::clamp(-std::expm1(log_none));
}

Prob ssmp_fpr_bound(const NeighborProfile& profile, const SsmpParams& params)
{
    const auto f = node_factors(profile, params);
    const std::size_t n = profile.node_count();
    std::vector<std::size_t> sorted(f.size());
    std::iota(sorted.begin(), sorted.end(), 0);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
    double sum = 0.0;
    for (std::size_t x : sorted) {
        const long want = static_cast<long>(n) - static_cast<long>(profile.gamma[x]) - 2;
        long taken = 0;
        for (auto it = sorted.rbegin(); it != sorted.rend() && taken < want; ++it) {
            if (*it == x)
                continue;
            sum += f[x] * f[*it];
            ++taken;
        }
    }
    return Prob::clamp(sum);
}

ComplementCount complement_count(const NeighborProfile& profile)
{
    const std::uint64_t n = profile.node_count();
    const std::uint64_t two_e = profile.degree_sum();
    if (two_e % 2)
        throw ConfigError("neighbor counts have an odd sum");
    const long long c = static_cast<long long>(n * (n - 1) / 2) -
                        static_cast<long long>(two_e / 2) - static_cast<long long>(n) +
                        static_cast<long long>(profile.gamma_rsu) + 1;
    if (c < 0)
        throw ConfigError("neighbor counts are not realizable");
    return ComplementCount{two_e, static_cast<std::uint64_t>(c)};
}

namespace {

std::uint64_t mssp_inserted(const NeighborProfile& profile, std::uint16_t k)
{
    return (complement_count(profile).edges_embedded - profile.gamma_rsu) * k;
}

} // namespace

Prob mssp_fpr(const NeighborProfile& profile, std::uint32_t m, std::uint16_t k)
{
    if (k < 1 || k > m)
        throw ConfigError("need 1 <= k <= m");
    const double ebar = static_cast<double>(complement_count(profile).complement_size);
    if (ebar == 0)
        return Prob{};
    const auto& dist = set_bits_distribution(m, mssp_inserted(profile, k));
    double sum = 0.0;
    for (std::size_t j = 1; j < dist.size(); ++j) {
        const double delta = std::pow(static_cast<double>(j) / m, 2.0 * k);
        sum += dist[j] * -std::expm1(ebar * std::log1p(-delta));
    }
    return Prob::clamp(sum);
}

double mssp_fpr_double_sum(const NeighborProfile& profile, std::uint32_t m, std::uint16_t k)
{
    if (k < 1 || k > m)
        throw ConfigError("need 1 <= k <= m");
    const std::uint64_t ebar = complement_count(profile).complement_size;
    const auto& dist = set_bits_distribution(m, mssp_inserted(profile, k));
    double sum = 0.0;
    for (std::uint64_t i = 1; i <= ebar; ++i) {
        const double binom = std::exp(std::lgamma(ebar + 1.0) - std::lgamma(i + 1.0) -
                                      std::lgamma(static_cast<double>(ebar - i) + 1.0));
        for (std::size_t j = 1; j < dist.size(); ++j) {
            const double delta = std::pow(static_cast<double>(j) / m, 2.0 * k);
            sum += binom * std::pow(delta, static_cast<double>(i)) *
                   std::pow(1.0 - delta, static_cast<double>(ebar - i)) * dist[j];
        }
    }
    return sum;
}

Prob impersonation_success_bound(const NeighborProfile& profile, std::uint32_t m, std::uint16_t k)
{
    if (k < 1 || k > m)
        throw ConfigError("need 1 <= k <= m");
    const auto& dist = set_bits_distribution(m, mssp_inserted(profile, k));
    const double mk = std::pow(static_cast<double>(m), k);
    double sum = 0.0;
    for (std::size_t i = 1; i < dist.size(); ++i) {
        double inner = 0.0;
        double falling = 1.0;     // k! / (k - j)! = C(k, j) j!
        double choose_free = 1.0; // C(m - i, j)
        for (std::uint32_t j = 0; j <= k && j <= m - i; ++j) {
            if (j > 0) {
                falling *= k - j + 1;
                choose_free = choose_free * static_cast<double>(m - i - j + 1) / j;
            }
            const double match = falling * std::pow(static_cast<double>(i), k - j) / mk;
            inner += choose_free * match * match;
        }
        sum += dist[i] * inner;
    }
    return Prob::clamp(sum);
}

double PathBoundProfile::evaluate(double p) const
{
    double sum = 0.0;
    for (std::size_t s = 0; s < histogram.size(); ++s)
        if (histogram[s])
            sum += static_cast<double>(histogram[s]) * std::pow(p, static_cast<double>(s));
    return sum;
}

namespace {

std::vector<std::uint64_t> identity_keys(EmbedMode mode, const DirectedPath& p, std::uint64_t n)
{
    std::vector<std::uint64_t> keys;
    const auto& v = p.nodes;
    if (mode == EmbedMode::DE) {
        for (std::size_t j = 0; j + 1 < v.size(); ++j)
            keys.push_back(v[j] * n + v[j + 1]);
    } else {
        for (std::size_t j = 1; j + 1 < v.size(); j += 2)
            keys.push_back((v[j - 1] * n + v[j]) * n + v[j + 1]);
    }
    return keys;
}

} // namespace

PathBoundProfile path_bound_profile(const Topology& t, NodeId source, std::size_t h,
                                    std::size_t beta, EmbedMode mode, const DirectedPath& actual,
                                    std::uint64_t cap)
{
    if (beta < 1)
        throw ConfigError("beta must be at least 1");
    const auto paths = enumerate_paths(t, source, h);
    const auto self = std::find(paths.begin(), paths.end(), actual);
    if (self == paths.end())
        throw ConfigError("actual path is not an h-hop path from the source");

    PathBoundProfile out;
    out.lambda = paths.size();
    out.beta = beta;
    const std::size_t others = paths.size() - 1;
    if (others < beta)
        return out;

    // C(others, beta), saturating at cap + 1.
    long double combos = 1;
    for (std::size_t i = 0; i < beta; ++i)
        combos = combos * (others - i) / (i + 1);
    if (combos > static_cast<long double>(cap))
        throw CapExceededError("C(" + std::to_string(others) + ", " + std::to_string(beta) +
                               ") combinations exceed the cap of " + std::to_string(cap));

    const std::uint64_t n = t.node_count();
    auto actual_keys = identity_keys(mode, actual, n);
    std::sort(actual_keys.begin(), actual_keys.end());
    std::map<std::uint64_t, std::uint32_t> dense;
    std::vector<std::vector<std::uint32_t>> extra;
    for (auto it = paths.begin(); it != paths.end(); ++it) {
        if (it == self)
            continue;
        std::vector<std::uint32_t> ids;
        for (auto key : identity_keys(mode, *it, n)) {
            if (std::binary_search(actual_keys.begin(), actual_keys.end(), key))
                continue;
            auto [d, fresh] = dense.emplace(key, static_cast<std::uint32_t>(dense.size()));
            ids.push_back(d->second);
        }
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        extra.push_back(std::move(ids));
    }

    std::vector<std::uint64_t> stamp(dense.size(), 0);
    std::uint64_t gen = 0;
    std::vector<std::size_t> pick(beta);
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
        ++gen;
        std::size_t size = 0;
        for (std::size_t c : pick)
            for (auto id : extra[c])
                if (stamp[id] != gen) {
                    stamp[id] = gen;
                    ++size;
                }
        if (out.histogram.size() <= size)
            out.histogram.resize(size + 1, 0);
        ++out.histogram[size];

        std::size_t i = beta;
        while (i > 0 && pick[i - 1] == others - beta + i - 1)
            --i;
        if (i == 0)
            break;
        ++pick[i - 1];
        for (std::size_t j = i; j < beta; ++j)
            pick[j] = pick[j - 1] + 1;
    }
    return out;
}

Prob payload_identity_fp(std::uint32_t m, std::uint16_t k, std::size_t h, EmbedMode mode)
{
    return p_edge_recovered(m, k, mode == EmbedMode::DE ? h : h / 2);
}

Prob de_dde_fpr_bound(const Topology& t, NodeId source, std::size_t h, std::uint32_t m,
                      std::uint16_t k, std::size_t beta, EmbedMode mode,
                      const DirectedPath& actual, std::uint64_t cap)
{
    const auto profile = path_bound_profile(t, source, h, beta, mode, actual, cap);
    return Prob::clamp(profile.evaluate(payload_identity_fp(m, k, h, mode)));
}

} // namespace sparseprov
