// Seeded Monte Carlo simulation of the selection process.
//
// A policy is replayed against a value sequence as a pure state machine:
// at 1-based step i with j = n - i + 1 observations still to come, the value
// is selected iff it falls in the policy's closed acceptance window for
// (j, state), and a selection moves the state to the selected value.
//
// Replications draw from counter-keyed RNG streams (seed, replication) and
// summaries are reduced from exact integer count sums, so every result is
// bit-identical for a fixed seed regardless of thread count.
#pragma once

#include "monoselect/families.hpp"
#include "monoselect/rng.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

namespace monoselect {

struct AcceptWindow {
    double lo = 0.0;
    double hi = 1.0;
};

template <typename P>
concept interval_policy = requires(const P p, std::int64_t j, double s) {
    { p(j, s) } -> std::convertible_to<AcceptWindow>;
};

template <typename P>
concept selection_policy = interval_policy<P> || threshold_family<P>;

// Increasing selection: window [s, h_j(s)].
template <threshold_family F>
struct IncreasingPolicy {
    F family;
    AcceptWindow operator()(std::int64_t j, double s) const {
        return {s, family(j, s)};
    }
};

// Reflection x -> 1-x: accepts x from state s iff the base policy accepts
// 1-x from state 1-s. Turns an increasing policy into a decreasing one
// (and is an involution on acceptance behavior).
template <selection_policy P>
struct MirrorPolicy {
    P base;
    AcceptWindow operator()(std::int64_t j, double s) const;
};

namespace detail {

template <selection_policy P>
AcceptWindow window_of(const P& policy, std::int64_t j, double state) {
    if constexpr (interval_policy<P>) {
        return policy(j, state);
    } else {
        return {state, policy(j, state)};
    }
}

}  // namespace detail

template <selection_policy P>
AcceptWindow MirrorPolicy<P>::operator()(std::int64_t j, double s) const {
    const AcceptWindow w = detail::window_of(base, j, 1.0 - s);
    return {1.0 - w.hi, 1.0 - w.lo};
}

template <selection_policy P>
MirrorPolicy<P> mirror_policy(P base) {
    return MirrorPolicy<P>{std::move(base)};
}

template <threshold_family F>
auto mirror_family(F family) {
    return mirror_policy(IncreasingPolicy<F>{std::move(family)});
}

// ============================================================================
// Deterministic replay
// ============================================================================

struct SelectionTrace {
    std::int64_t n = 0;
    double initial_state = 0.0;
    std::vector<std::int64_t> indices;  // 1-based selection times, increasing
    std::vector<double> values;         // selected values
    double final_state = 0.0;

    std::int64_t count() const { return static_cast<std::int64_t>(indices.size()); }
};

template <selection_policy P>
SelectionTrace run_policy(const P& policy, std::span<const double> observations,
                          double initial_state) {
    detail::require_unit(initial_state, "initial state");
    SelectionTrace trace;
    trace.n = static_cast<std::int64_t>(observations.size());
    trace.initial_state = initial_state;
    double state = initial_state;
    for (std::int64_t i = 0; i < trace.n; ++i) {
        const double x = observations[static_cast<std::size_t>(i)];
        detail::require_unit(x, "observation");
        const AcceptWindow w = detail::window_of(policy, trace.n - i, state);
        if (x >= w.lo && x <= w.hi) {
            trace.indices.push_back(i + 1);
            trace.values.push_back(x);
            state = x;
        }
    }
    trace.final_state = state;
    return trace;
}

namespace detail {

template <selection_policy P>
std::int64_t count_selections(const P& policy, RngStream& g, std::int64_t n,
                              double s0) {
    double state = s0;
    std::int64_t count = 0;
    for (std::int64_t j = n; j >= 1; --j) {
        const double x = g.uniform();
        const AcceptWindow w = window_of(policy, j, state);
        if (x >= w.lo && x <= w.hi) {
            state = x;
            ++count;
        }
    }
    return count;
}

// Static partition of [0, reps) across at most `threads` workers. Each
// replication owns its stream, so the partition never affects results.
template <typename Body>
void for_each_replication(std::int64_t reps, int threads, const Body& body) {
    if (threads < 1) threads = 1;
    if (threads == 1 || reps < 2) {
        for (std::int64_t r = 0; r < reps; ++r) body(r);
        return;
    }
    const auto workers = static_cast<std::int64_t>(threads) < reps
                             ? static_cast<std::int64_t>(threads)
                             : reps;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (std::int64_t w = 0; w < workers; ++w) {
        const std::int64_t lo = reps * w / workers;
        const std::int64_t hi = reps * (w + 1) / workers;
        pool.emplace_back([lo, hi, &body] {
            for (std::int64_t r = lo; r < hi; ++r) body(r);
        });
    }
    for (auto& t : pool) t.join();
}

struct CountMoments {
    unsigned long long sum = 0;
    unsigned __int128 sum_sq = 0;
};

inline CountMoments reduce_counts(const std::vector<std::int32_t>& counts) {
    CountMoments m;
    for (const auto c : counts) {
        const auto u = static_cast<unsigned long long>(c);
        m.sum += u;
        m.sum_sq += static_cast<unsigned __int128>(u) * u;
    }
    return m;
}

inline double sample_variance(const CountMoments& m, std::int64_t reps) {
    if (reps < 2) return 0.0;
    const long double sum = static_cast<long double>(m.sum);
    const long double sum_sq = static_cast<long double>(m.sum_sq);
    const long double r = static_cast<long double>(reps);
    long double var = (sum_sq - sum * sum / r) / (r - 1.0L);
    if (var < 0.0L) var = 0.0L;
    return static_cast<double>(var);
}

}  // namespace detail

// ============================================================================
// Monte Carlo summaries
// ============================================================================

// sqrt(3) (L - sqrt(2n)) / (2n)^{1/4}
inline double clt_statistic(std::int64_t selections, std::int64_t n) {
    detail::require_horizon(n);
    const double two_n = 2.0 * static_cast<double>(n);
    return std::sqrt(3.0) * (static_cast<double>(selections) - std::sqrt(two_n)) /
           std::pow(two_n, 0.25);
}

struct MCSummary {
    std::int64_t reps = 0;
    std::int64_t n = 0;
    double s0 = 0.0;
    std::uint64_t seed = 0;
    double mean = 0.0;
    double variance = 0.0;
    double std_error = 0.0;
    double clt_mean = 0.0;
    double clt_variance = 0.0;
    std::vector<double> clt_values;  // per-replication statistics, on request
};

struct MonteCarloOptions {
    int threads = 1;
    bool keep_clt_values = false;
};

namespace detail {

inline MCSummary summarize_counts(const std::vector<std::int32_t>& counts,
                                  std::int64_t n, double s0, std::uint64_t seed,
                                  bool keep_clt_values) {
    const auto reps = static_cast<std::int64_t>(counts.size());
    const CountMoments m = reduce_counts(counts);
    MCSummary out;
    out.reps = reps;
    out.n = n;
    out.s0 = s0;
    out.seed = seed;
    out.mean = static_cast<double>(m.sum) / static_cast<double>(reps);
    out.variance = sample_variance(m, reps);
    out.std_error = std::sqrt(out.variance / static_cast<double>(reps));
    // clt_statistic is affine in L, so its moments follow exactly.
    const double two_n = 2.0 * static_cast<double>(n);
    const double scale = std::sqrt(3.0) / std::pow(two_n, 0.25);
    out.clt_mean = scale * (out.mean - std::sqrt(two_n));
    out.clt_variance = scale * scale * out.variance;
    if (keep_clt_values) {
        out.clt_values.reserve(counts.size());
        for (const auto c : counts) {
            out.clt_values.push_back(scale * (static_cast<double>(c) - std::sqrt(two_n)));
        }
    }
    return out;
}

}  // namespace detail

template <selection_policy P>
MCSummary monte_carlo(const P& policy, std::int64_t n, double s0,
                      std::int64_t reps, std::uint64_t seed,
                      MonteCarloOptions options = {}) {
    detail::require_horizon(n);
    detail::require_unit(s0, "initial state");
    if (reps < 1) throw std::invalid_argument("reps must be >= 1");
    std::vector<std::int32_t> counts(static_cast<std::size_t>(reps));
    detail::for_each_replication(reps, options.threads, [&](std::int64_t r) {
        RngStream g(seed, static_cast<std::uint64_t>(r));
        counts[static_cast<std::size_t>(r)] =
            static_cast<std::int32_t>(detail::count_selections(policy, g, n, s0));
    });
    return detail::summarize_counts(counts, n, s0, seed, options.keep_clt_values);
}

// Common-random-numbers comparison: replication r feeds the same uniform
// stream to both policies; the difference summary has the paired variance.
struct PairedSummary {
    std::int64_t reps = 0;
    std::int64_t n = 0;
    double s0 = 0.0;
    std::uint64_t seed = 0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double mean_diff = 0.0;  // a - b
    double se_diff = 0.0;
};

template <selection_policy PA, selection_policy PB>
PairedSummary paired_monte_carlo(const PA& policy_a, const PB& policy_b,
                                 std::int64_t n, double s0, std::int64_t reps,
                                 std::uint64_t seed, int threads = 1) {
    detail::require_horizon(n);
    detail::require_unit(s0, "initial state");
    if (reps < 1) throw std::invalid_argument("reps must be >= 1");
    std::vector<std::int32_t> a(static_cast<std::size_t>(reps));
    std::vector<std::int32_t> b(static_cast<std::size_t>(reps));
    detail::for_each_replication(reps, threads, [&](std::int64_t r) {
        RngStream ga(seed, static_cast<std::uint64_t>(r));
        a[static_cast<std::size_t>(r)] =
            static_cast<std::int32_t>(detail::count_selections(policy_a, ga, n, s0));
        RngStream gb(seed, static_cast<std::uint64_t>(r));
        b[static_cast<std::size_t>(r)] =
            static_cast<std::int32_t>(detail::count_selections(policy_b, gb, n, s0));
    });
    long long diff_sum = 0;
    __int128 diff_sq = 0;
    unsigned long long sum_a = 0, sum_b = 0;
    for (std::int64_t r = 0; r < reps; ++r) {
        const auto i = static_cast<std::size_t>(r);
        const long long d = static_cast<long long>(a[i]) - b[i];
        diff_sum += d;
        diff_sq += static_cast<__int128>(d) * d;
        sum_a += static_cast<unsigned long long>(a[i]);
        sum_b += static_cast<unsigned long long>(b[i]);
    }
    PairedSummary out;
    out.reps = reps;
    out.n = n;
    out.s0 = s0;
    out.seed = seed;
    const auto rd = static_cast<double>(reps);
    out.mean_a = static_cast<double>(sum_a) / rd;
    out.mean_b = static_cast<double>(sum_b) / rd;
    out.mean_diff = static_cast<double>(diff_sum) / rd;
    if (reps >= 2) {
        const long double s1 = static_cast<long double>(diff_sum);
        const long double s2 = static_cast<long double>(diff_sq);
        long double var = (s2 - s1 * s1 / rd) / (rd - 1.0L);
        if (var < 0.0L) var = 0.0L;
        out.se_diff = std::sqrt(static_cast<double>(var) / rd);
    }
    return out;
}

// ============================================================================
// Unimodal extension
// ============================================================================

// Increasing adaptive run over the first `turning` observations from state 0,
// then the mirrored (decreasing) adaptive run over the rest from state 1.
struct UnimodalTrace {
    std::int64_t n = 0;
    std::int64_t turning = 0;
    SelectionTrace rising;   // indices relative to the full sequence
    SelectionTrace falling;

    std::int64_t count() const { return rising.count() + falling.count(); }

    std::vector<std::int64_t> combined_indices() const {
        std::vector<std::int64_t> out(rising.indices);
        out.insert(out.end(), falling.indices.begin(), falling.indices.end());
        return out;
    }
    std::vector<double> combined_values() const {
        std::vector<double> out(rising.values);
        out.insert(out.end(), falling.values.begin(), falling.values.end());
        return out;
    }
};

inline UnimodalTrace run_unimodal(std::span<const double> observations,
                                  std::optional<std::int64_t> turning = {}) {
    const auto n = static_cast<std::int64_t>(observations.size());
    if (n < 2) throw std::invalid_argument("unimodal run needs n >= 2");
    const std::int64_t t = turning.value_or(n / 2);
    if (t < 1 || t >= n) {
        throw std::invalid_argument("turning time must lie in [1, n-1]");
    }
    UnimodalTrace out;
    out.n = n;
    out.turning = t;
    out.rising = run_policy(adaptive_family(),
                            observations.first(static_cast<std::size_t>(t)), 0.0);
    out.falling = run_policy(mirror_family(adaptive_family()),
                             observations.subspan(static_cast<std::size_t>(t)), 1.0);
    for (auto& idx : out.falling.indices) idx += t;
    return out;
}

inline MCSummary monte_carlo_unimodal(std::int64_t n,
                                      std::optional<std::int64_t> turning,
                                      std::int64_t reps, std::uint64_t seed,
                                      MonteCarloOptions options = {}) {
    if (n < 2) throw std::invalid_argument("unimodal run needs n >= 2");
    const std::int64_t t = turning.value_or(n / 2);
    if (t < 1 || t >= n) {
        throw std::invalid_argument("turning time must lie in [1, n-1]");
    }
    if (reps < 1) throw std::invalid_argument("reps must be >= 1");
    const auto rising = adaptive_family();
    const auto falling = mirror_family(adaptive_family());
    std::vector<std::int32_t> counts(static_cast<std::size_t>(reps));
    detail::for_each_replication(reps, options.threads, [&](std::int64_t r) {
        RngStream g(seed, static_cast<std::uint64_t>(r));
        const auto c1 = detail::count_selections(rising, g, t, 0.0);
        const auto c2 = detail::count_selections(falling, g, n - t, 1.0);
        counts[static_cast<std::size_t>(r)] = static_cast<std::int32_t>(c1 + c2);
    });
    return detail::summarize_counts(counts, n, 0.0, seed, options.keep_clt_values);
}

}  // namespace monoselect
