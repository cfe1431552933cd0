// Residual functions, per-step residual increments, and the numerical
// verification suite for the bounds behind the adaptive policy.
//
// The residual r_k(s) = sqrt(2k(1-s)) - v_k(s) measures the shortfall of the
// adaptive value below the relaxation cap. Its per-step increment is bounded
// by the closed-form delta_k, which is evaluated here analytically (exact
// antiderivative, no quadrature) so the checks are independent of the grid
// DP's numerical error.
#pragma once

#include "monoselect/value_table.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace monoselect {

// ============================================================================
// Residuals
// ============================================================================

struct ResidualReport {
    std::int64_t k = 0;
    double max_residual = 0.0;
    std::int64_t argmax_node = 0;
    double telescoped_bound = 0.0;  // 2 (log k + 1)
};

inline double residual(const ValueTable& adaptive, std::int64_t k, double s) {
    if (adaptive.kind() != TableKind::adaptive) {
        throw std::invalid_argument("residual is defined on the adaptive table");
    }
    detail::require_horizon(k);
    return upper_bound(k, s) - adaptive.eval(k, s);
}

namespace detail {

struct RowResidualStats {
    double max = 0.0;
    std::int64_t argmax = 0;
    double min = 0.0;
};

// Residual extrema over the nodes of one value row. `sqrt_one_minus` holds
// sqrt(1 - s_i).
inline RowResidualStats row_residual_stats(std::int64_t k,
                                           std::span<const double> values,
                                           std::span<const double> sqrt_one_minus) {
    const double ub_factor = std::sqrt(2.0 * static_cast<double>(k));
    RowResidualStats stats;
    stats.max = -1e300;
    stats.min = 1e300;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double r = ub_factor * sqrt_one_minus[i] - values[i];
        if (r > stats.max) {
            stats.max = r;
            stats.argmax = static_cast<std::int64_t>(i);
        }
        if (r < stats.min) stats.min = r;
    }
    return stats;
}

}  // namespace detail

inline ResidualReport max_residual(const ValueTable& adaptive, std::int64_t k) {
    if (adaptive.kind() != TableKind::adaptive) {
        throw std::invalid_argument("residual is defined on the adaptive table");
    }
    detail::require_horizon(k);
    auto row = adaptive.row(k);
    const auto G = adaptive.grid_nodes();
    std::vector<double> sqrt1ms(static_cast<std::size_t>(G) + 1);
    for (std::int64_t i = 0; i <= G; ++i) {
        sqrt1ms[static_cast<std::size_t>(i)] =
            std::sqrt(1.0 - adaptive.config().node(i));
    }
    const auto stats = detail::row_residual_stats(k, row, sqrt1ms);
    return ResidualReport{k, stats.max, stats.argmax,
                          2.0 * (std::log(static_cast<double>(k)) + 1.0)};
}

// ============================================================================
// delta_k and gamma_k
// ============================================================================

// Conservative branch (h = s + sqrt(2(1-s)/k)), exact antiderivative of the
// integrand a + b sqrt(1-x).
inline double delta_conservative(std::int64_t k, double s) {
    detail::require_horizon(k);
    detail::require_unit(s, "state");
    const double kd = static_cast<double>(k);
    const double u = 1.0 - s;
    const double sqrt_u = std::sqrt(u);
    // sqrt(2ku) - sqrt(2(k-1)u), written cancellation-free
    const double head = sqrt_u * std::sqrt(2.0) / (std::sqrt(kd) + std::sqrt(kd - 1.0));
    const double w = sqrt_u * std::sqrt(2.0 / kd);  // h - s
    const double a = std::sqrt(2.0 * (kd - 1.0));   // sqrt(2(k-1))
    double rem = u - w;                              // 1 - h
    if (rem < 0.0) rem = 0.0;
    return head + (a * sqrt_u - 1.0) * w +
           (2.0 / 3.0) * a * (rem * std::sqrt(rem) - u * sqrt_u);
}

// Greedy branch (h = 1), closed form after carrying the integration.
inline double delta_greedy(std::int64_t k, double s) {
    detail::require_horizon(k);
    detail::require_unit(s, "state");
    const double kd = static_cast<double>(k);
    const double u = 1.0 - s;
    const double sqrt_u = std::sqrt(u);
    const double head = sqrt_u * std::sqrt(2.0) / (std::sqrt(kd) + std::sqrt(kd - 1.0));
    return head + u * (std::sqrt(2.0 * (kd - 1.0)) * sqrt_u / 3.0 - 1.0);
}

// Per-step residual increment bound; regime boundary assigned to greedy.
inline double delta(std::int64_t k, double s) {
    return s < critical_state(k) ? delta_conservative(k, s) : delta_greedy(k, s);
}

// Second factor of the delta_k derivative in the conservative regime,
// defined for y = 1/(k(1-s)) in [0, 1/2]; nonnegative there.
inline double gamma_k(std::int64_t k, double y) {
    if (k < 3) throw std::domain_error("gamma_k requires k >= 3");
    if (!(y >= 0.0 && y <= 0.5)) {
        throw std::domain_error("gamma_k requires y in [0, 1/2]");
    }
    const double kd = static_cast<double>(k);
    const double root2y = std::sqrt(2.0 * y);
    double inner = 1.0 - root2y;
    if (inner < 0.0) inner = 0.0;  // y = 1/2 up to rounding
    const double root_inner = std::sqrt(inner);
    return 2.0 + y * kd * (1.0 - std::sqrt(1.0 - 1.0 / kd)) - 2.0 * root_inner -
           root2y * (2.0 - root_inner);
}

// a_j = (2j)! / ((2j-1) (j!)^2 2^{3j/2}) via the overflow-free recursion
// a_j = ((2j-3) / (sqrt(2) j)) a_{j-1}, a_1 = 1/sqrt(2).
inline double series_coefficient(std::int64_t j) {
    if (j < 1) throw std::domain_error("series coefficient needs j >= 1");
    double a = 1.0 / std::sqrt(2.0);
    for (std::int64_t i = 2; i <= j; ++i) {
        a *= (2.0 * static_cast<double>(i) - 3.0) /
             (std::sqrt(2.0) * static_cast<double>(i));
    }
    return a;
}

// ============================================================================
// Check reports
// ============================================================================

// One verification row: pass iff margin >= 0, where margin is the slack of
// `statistic` inside `bound` in the check's direction.
struct CheckRow {
    std::string check;
    std::int64_t k = 0;
    double statistic = 0.0;
    double bound = 0.0;
    double margin = 0.0;
    bool pass = false;
};

namespace detail {

inline CheckRow upper_check(std::string name, std::int64_t k, double statistic,
                            double bound) {
    const double margin = bound - statistic;
    return CheckRow{std::move(name), k, statistic, bound, margin, margin >= 0.0};
}

inline CheckRow lower_check(std::string name, std::int64_t k, double statistic,
                            double bound) {
    const double margin = statistic - bound;
    return CheckRow{std::move(name), k, statistic, bound, margin, margin >= 0.0};
}

}  // namespace detail

inline bool all_pass(std::span<const CheckRow> rows) {
    for (const auto& row : rows) {
        if (!row.pass) return false;
    }
    return true;
}

// sqrt(2) a_j - a_{j-1} >= 0 for j = 3..j_max, plus the identity
// sqrt(2) a_j - a_{j-1} = ((j-3)/j) a_{j-1} within relative 1e-10.
inline std::vector<CheckRow> check_coefficient_difference(std::int64_t j_max,
                                                          double tol_scale = 1.0) {
    if (j_max < 3) throw std::invalid_argument("j_max must be >= 3");
    std::vector<CheckRow> rows;
    rows.reserve(static_cast<std::size_t>(j_max));
    double prev = series_coefficient(2);
    double max_identity_err = 0.0;
    for (std::int64_t j = 3; j <= j_max; ++j) {
        const double curr = prev * (2.0 * static_cast<double>(j) - 3.0) /
                            (std::sqrt(2.0) * static_cast<double>(j));
        const double diff = std::sqrt(2.0) * curr - prev;
        rows.push_back(detail::lower_check("coefficient_difference", j, diff,
                                           -1e-12 * tol_scale));
        const double identity = (static_cast<double>(j) - 3.0) /
                                static_cast<double>(j) * prev;
        const double rel = std::abs(diff - identity) / prev;
        if (rel > max_identity_err) max_identity_err = rel;
        prev = curr;
    }
    rows.push_back(detail::upper_check("coefficient_identity", j_max,
                                       max_identity_err, 1e-10 * tol_scale));
    return rows;
}

// min over an equispaced y-grid of RHS - LHS for
// (2y)^{1/2} {2 - [1-(2y)^{1/2}]^{1/2}} <= 2 + y/2 - 2 [1-(2y)^{1/2}]^{1/2}.
inline std::vector<CheckRow> check_series_inequality(std::int64_t samples,
                                                     double tol_scale = 1.0) {
    if (samples < 2) throw std::invalid_argument("samples must be >= 2");
    double min_diff = 1e300;
    for (std::int64_t i = 0; i < samples; ++i) {
        const double y = 0.5 * static_cast<double>(i) /
                         static_cast<double>(samples - 1);
        const double root2y = std::sqrt(2.0 * y);
        double inner = 1.0 - root2y;
        if (inner < 0.0) inner = 0.0;
        const double root_inner = std::sqrt(inner);
        const double lhs = root2y * (2.0 - root_inner);
        const double rhs = 2.0 + 0.5 * y - 2.0 * root_inner;
        const double diff = rhs - lhs;
        if (diff < min_diff) min_diff = diff;
    }
    return {detail::lower_check("series_inequality", samples, min_diff,
                                -1e-12 * tol_scale)};
}

inline std::vector<CheckRow> check_gamma_nonneg(std::span<const std::int64_t> ks,
                                                std::int64_t samples,
                                                double tol_scale = 1.0) {
    if (samples < 2) throw std::invalid_argument("samples must be >= 2");
    std::vector<CheckRow> rows;
    rows.reserve(ks.size());
    for (const auto k : ks) {
        double min_val = 1e300;
        for (std::int64_t i = 0; i < samples; ++i) {
            const double y = 0.5 * static_cast<double>(i) /
                             static_cast<double>(samples - 1);
            const double g = gamma_k(k, y);
            if (g < min_val) min_val = g;
        }
        rows.push_back(detail::lower_check("gamma_nonneg", k, min_val,
                                           -1e-12 * tol_scale));
    }
    return rows;
}

// delta_k(s) <= 2/k over an s-grid; for k >= 3 additionally nondecreasing on
// [0, s_k] with its maximum 4/(3k) attained at s_k.
inline std::vector<CheckRow> check_delta_bounds_for_k(std::int64_t k,
                                                      std::int64_t samples,
                                                      double tol_scale = 1.0) {
    detail::require_horizon(k);
    if (samples < 2) throw std::invalid_argument("samples must be >= 2");
    const double kd = static_cast<double>(k);
    const double sk = critical_state(k);
    std::vector<CheckRow> rows;
    double max_all = -1e300;
    double max_conservative = -1e300;
    double worst_decrease = 0.0;
    double prev_conservative = -1e300;
    for (std::int64_t i = 0; i < samples; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(samples - 1);
        const double d = delta(k, s);
        if (d > max_all) max_all = d;
        if (k >= 3 && s <= sk) {
            if (d > max_conservative) max_conservative = d;
            if (prev_conservative > -1e300) {
                const double drop = prev_conservative - d;
                if (drop > worst_decrease) worst_decrease = drop;
            }
            prev_conservative = d;
        }
    }
    rows.push_back(detail::upper_check("delta_upper", k, max_all,
                                       2.0 / kd + 1e-10 * tol_scale));
    if (k >= 3) {
        const double at_critical = delta(k, sk);
        if (at_critical > max_conservative) max_conservative = at_critical;
        if (prev_conservative > -1e300 && prev_conservative - at_critical > worst_decrease) {
            worst_decrease = prev_conservative - at_critical;
        }
        rows.push_back(detail::upper_check("delta_monotone", k, worst_decrease,
                                           1e-12 * tol_scale));
        rows.push_back(detail::upper_check("delta_critical", k, max_conservative,
                                           4.0 / (3.0 * kd) + 1e-10 * tol_scale));
        rows.push_back(detail::upper_check("delta_critical_attained", k,
                                           max_conservative - at_critical,
                                           1e-12 * tol_scale));
    }
    return rows;
}

inline std::vector<CheckRow> check_delta_bounds(std::int64_t k_max,
                                                std::int64_t samples,
                                                double tol_scale = 1.0) {
    if (k_max < 3) throw std::invalid_argument("k_max must be >= 3");
    std::vector<CheckRow> rows;
    for (std::int64_t k = 1; k <= k_max; ++k) {
        auto sub = check_delta_bounds_for_k(k, samples, tol_scale);
        rows.insert(rows.end(), sub.begin(), sub.end());
    }
    return rows;
}

// Conservative and greedy closed forms agree at the regime boundary s_k.
inline std::vector<CheckRow> check_delta_branch_agreement(
    std::span<const std::int64_t> ks, double tol_scale = 1.0) {
    std::vector<CheckRow> rows;
    rows.reserve(ks.size());
    for (const auto k : ks) {
        if (k < 3) throw std::invalid_argument("branch agreement needs k >= 3");
        const double sk = critical_state(k);
        const double gap = std::abs(delta_conservative(k, sk) - delta_greedy(k, sk));
        rows.push_back(detail::upper_check("delta_branch_agreement", k, gap,
                                           1e-10 * tol_scale));
    }
    return rows;
}

// ============================================================================
// Residual recursion consistency (table-level)
// ============================================================================

namespace detail {

struct RecursionWorkspace {
    std::vector<double> residual_prev;
    std::vector<double> residual_prefix;
};

// Max |r_k(s_i) - (delta_k + (1-h+s) r_{k-1}(s_i) + integral_s^h r_{k-1})|
// over nodes, with the integral on the same trapezoid quadrature as the DP.
inline double residual_recursion_discrepancy(const GridConfig& config,
                                             std::int64_t k,
                                             std::span<const double> values,
                                             std::span<const double> prev_values,
                                             std::span<const double> sqrt_one_minus,
                                             RecursionWorkspace& ws) {
    const auto G = config.nodes();
    const double kd = static_cast<double>(k);
    const double ub_factor = std::sqrt(2.0 * kd);
    const double ub_factor_prev = std::sqrt(2.0 * (kd - 1.0));
    const double window_factor = std::sqrt(2.0 / kd);
    ws.residual_prev.resize(static_cast<std::size_t>(G) + 1);
    ws.residual_prefix.resize(static_cast<std::size_t>(G) + 1);
    for (std::int64_t i = 0; i <= G; ++i) {
        ws.residual_prev[static_cast<std::size_t>(i)] =
            ub_factor_prev * sqrt_one_minus[static_cast<std::size_t>(i)] -
            prev_values[static_cast<std::size_t>(i)];
    }
    trapezoid_prefix(ws.residual_prev, config.spacing(), ws.residual_prefix);
    double worst = 0.0;
    for (std::int64_t i = 0; i <= G; ++i) {
        const double s = config.node(i);
        double h = s + window_factor * sqrt_one_minus[static_cast<std::size_t>(i)];
        if (h > 1.0) h = 1.0;
        const double lhs =
            ub_factor * sqrt_one_minus[static_cast<std::size_t>(i)] -
            values[static_cast<std::size_t>(i)];
        const double rhs =
            delta(k, s) +
            (1.0 - h + s) * ws.residual_prev[static_cast<std::size_t>(i)] +
            segment_integral(ws.residual_prev, ws.residual_prefix, G, i, h);
        const double err = std::abs(lhs - rhs);
        if (err > worst) worst = err;
    }
    return worst;
}

}  // namespace detail

inline CheckRow check_residual_recursion(const ValueTable& adaptive,
                                         std::int64_t k, double tol_scale = 1.0) {
    if (adaptive.kind() != TableKind::adaptive) {
        throw std::invalid_argument("recursion check needs the adaptive table");
    }
    detail::require_horizon(k);
    const auto G = adaptive.grid_nodes();
    std::vector<double> sqrt1ms(static_cast<std::size_t>(G) + 1);
    for (std::int64_t i = 0; i <= G; ++i) {
        sqrt1ms[static_cast<std::size_t>(i)] =
            std::sqrt(1.0 - adaptive.config().node(i));
    }
    detail::RecursionWorkspace ws;
    const double disc = detail::residual_recursion_discrepancy(
        adaptive.config(), k, adaptive.row(k), adaptive.row(k - 1), sqrt1ms, ws);
    return detail::upper_check("residual_recursion", k, disc,
                               adaptive.config().error_budget() * tol_scale);
}

// ============================================================================
// Relaxation optimum and optimality gaps
// ============================================================================

struct RelaxationOptimum {
    double w_star = 0.0;
    double d_star = 0.0;
};

// Closed-form optimum of max sum d_i s.t. sum d_i^2 <= 2(1-s): the KKT point
// has equal coordinates d* = sqrt(2(1-s)/k) and value w* = sqrt(2k(1-s)).
inline RelaxationOptimum relaxation_optimum(std::int64_t k, double s) {
    detail::require_horizon(k);
    detail::require_unit(s, "state");
    const double kd = static_cast<double>(k);
    RelaxationOptimum opt;
    opt.d_star = std::sqrt(2.0 * (1.0 - s) / kd);
    opt.w_star = std::sqrt(2.0 * kd * (1.0 - s));
    const double feas = std::abs(kd * opt.d_star * opt.d_star - 2.0 * (1.0 - s));
    const double objective = std::abs(opt.w_star - kd * opt.d_star);
    if (feas > 1e-12 || objective > 1e-12 * (1.0 + opt.w_star)) {
        throw std::logic_error("relaxation optimum failed its feasibility identity");
    }
    return opt;
}

inline std::vector<CheckRow> check_relaxation_identity(
    std::span<const std::int64_t> ks, std::int64_t s_samples,
    double tol_scale = 1.0) {
    if (s_samples < 2) throw std::invalid_argument("samples must be >= 2");
    std::vector<CheckRow> rows;
    rows.reserve(ks.size());
    for (const auto k : ks) {
        double worst = 0.0;
        for (std::int64_t i = 0; i < s_samples; ++i) {
            const double s = static_cast<double>(i) /
                             static_cast<double>(s_samples - 1);
            const auto opt = relaxation_optimum(k, s);
            const double err = std::abs(opt.w_star - upper_bound(k, s));
            if (err > worst) worst = err;
        }
        rows.push_back(detail::upper_check("relaxation_matches_upper_bound", k,
                                           worst, 1e-12 * tol_scale));
    }
    return rows;
}

struct GapReport {
    std::int64_t n = 0;
    double v_opt = 0.0;
    double v_hat = 0.0;
    double gap = 0.0;  // v_opt - v_hat
    double g_n = 0.0;  // sqrt(2n) - v_opt
};

// Per-n gap reports from the values at s = 0. `v_opt_at_zero` and
// `v_hat_at_zero` are indexed by horizon (entry k holds v_k(0)).
inline std::vector<GapReport> optimality_gap(std::span<const double> v_opt_at_zero,
                                             std::span<const double> v_hat_at_zero,
                                             std::span<const std::int64_t> ns) {
    std::vector<GapReport> out;
    out.reserve(ns.size());
    for (const auto n : ns) {
        detail::require_horizon(n);
        if (n >= static_cast<std::int64_t>(v_opt_at_zero.size()) ||
            n >= static_cast<std::int64_t>(v_hat_at_zero.size())) {
            throw std::out_of_range("n exceeds the computed horizon range");
        }
        GapReport r;
        r.n = n;
        r.v_opt = v_opt_at_zero[static_cast<std::size_t>(n)];
        r.v_hat = v_hat_at_zero[static_cast<std::size_t>(n)];
        r.gap = r.v_opt - r.v_hat;
        r.g_n = std::sqrt(2.0 * static_cast<double>(n)) - r.v_opt;
        out.push_back(r);
    }
    return out;
}

inline std::vector<GapReport> optimality_gap(const ValueTable& optimal,
                                             const ValueTable& adaptive,
                                             std::span<const std::int64_t> ns) {
    if (optimal.kind() != TableKind::optimal ||
        adaptive.kind() != TableKind::adaptive) {
        throw std::invalid_argument("optimality_gap needs (optimal, adaptive) tables");
    }
    if (optimal.config().step != adaptive.config().step ||
        optimal.k_max() != adaptive.k_max()) {
        throw std::invalid_argument("tables were built on different grids");
    }
    std::vector<double> opt0(static_cast<std::size_t>(optimal.k_max()) + 1);
    std::vector<double> hat0(opt0.size());
    for (std::int64_t k = 0; k <= optimal.k_max(); ++k) {
        opt0[static_cast<std::size_t>(k)] = optimal.at(k, 0);
        hat0[static_cast<std::size_t>(k)] = adaptive.at(k, 0);
    }
    return optimality_gap(opt0, hat0, ns);
}

// Theorem-level cap on the gap; the conjectured constant is reported by the
// caller, never asserted.
inline std::vector<CheckRow> check_gap_bounds(std::span<const GapReport> reports,
                                              double eps) {
    std::vector<CheckRow> rows;
    rows.reserve(reports.size() * 3);
    for (const auto& r : reports) {
        const double cap = 2.0 * (std::log(static_cast<double>(r.n)) + 1.0) + eps;
        rows.push_back(detail::upper_check("gap_log_bound", r.n, r.gap, cap));
        rows.push_back(detail::lower_check("gap_nonneg", r.n, r.gap, -eps));
        rows.push_back(detail::lower_check("g_n_nonneg", r.n, r.g_n, -eps));
    }
    return rows;
}

}  // namespace monoselect
