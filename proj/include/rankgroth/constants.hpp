#pragma once

// Rounding constants: beta(r, G) and K(r, G) = 1/beta from the absolute
// inverse series, the sphere-to-sphere refinement beta(q -> r, G) through
// Gegenbauer expansions, and the explicit truncated-rounding factor used for
// graphs with large theta number.

#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "power_series.hpp"
#include "special_functions.hpp"

namespace rankgroth {

struct SeriesOptions {
    std::size_t terms = kDefaultTerms;
    unsigned precision_bits = kDefaultPrecisionBits;
};

struct BetaResult {
    unsigned r = 0;
    double theta = 0.0;
    double beta = 0.0;
    double k_bound = 0.0;
    std::size_t terms_used = 0;
    double residual = 0.0;
};

struct BetaQRResult {
    unsigned q = 0;
    unsigned r = 0;
    double theta = 0.0;
    double beta = 0.0;
    double k_bound = 0.0;
    double gk_abs_sum = 0.0;
    std::size_t terms_used = 0;
};

/// Solves sum_k |b_{2k+1}| beta^{2k+1} = 1/(theta - 1) by bisection on the
/// increasing absolute series of E_r^{-1}; the bracket is shrunk below tol.
inline BetaResult beta_rank(const OddSeries& inverse, double theta, double tol = 1e-12) {
    detail::require(inverse.rank >= 1, "beta_rank: series must carry its rank");
    detail::require(theta >= 2.0, "beta_rank: theta must be >= 2 (graph with an edge)");
    detail::require(tol > 0.0, "beta_rank: tol must be positive");
    ScopedPrecision guard(inverse.precision_bits);

    const HighPrec target = HighPrec(1) / (HighPrec(theta) - 1);
    if (eval_abs_series(inverse, HighPrec(1)) < target)
        throw numerical_error("beta_rank: absolute series at 1 is below 1/(theta-1)");

    HighPrec lo(0), hi(1);
    while (hi - lo >= tol) {
        const HighPrec mid = (lo + hi) / 2;
        if (eval_abs_series(inverse, mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    BetaResult res;
    res.r = inverse.rank;
    res.theta = theta;
    res.beta = static_cast<double>((lo + hi) / 2);
    res.k_bound = 1.0 / res.beta;
    res.terms_used = inverse.size();
    res.residual = tol + tail_estimate(inverse, res.beta);
    return res;
}

inline BetaResult beta_rank(unsigned r, double theta, double tol = 1e-12, SeriesOptions opts = {}) {
    detail::require(r >= 1, "beta_rank: rank must be positive");
    return beta_rank(er_inverse_taylor(r, opts.terms, opts.precision_bits), theta, tol);
}

/// All (r, theta) pairs for r = 1..r_max, rows ordered by r then theta.
inline std::vector<BetaResult> grothendieck_table(unsigned r_max, const std::vector<double>& thetas,
                                                  double tol = 1e-12, SeriesOptions opts = {}) {
    detail::require(r_max >= 1, "grothendieck_table: r_max must be >= 1");
    std::vector<BetaResult> rows;
    for (unsigned r = 1; r <= r_max; ++r) {
        const auto inverse = er_inverse_taylor(r, opts.terms, opts.precision_bits);
        for (double theta : thetas) rows.push_back(beta_rank(inverse, theta, tol));
    }
    return rows;
}

inline std::string table_to_csv(const std::vector<BetaResult>& rows) {
    std::ostringstream os;
    os.precision(15);
    os << "r,theta,beta,K,terms,residual\n";
    for (const auto& row : rows)
        os << row.r << ',' << row.theta << ',' << row.beta << ',' << row.k_bound << ',' << row.terms_used << ','
           << row.residual << '\n';
    return os.str();
}

inline nlohmann::json to_json(const BetaResult& row) {
    return {{"r", row.r},         {"theta", row.theta},      {"beta", row.beta},
            {"K", row.k_bound},   {"terms", row.terms_used}, {"residual", row.residual}};
}

inline nlohmann::json to_json(const BetaQRResult& res) {
    return {{"q", res.q},        {"r", res.r},       {"theta", res.theta},
            {"beta", res.beta},  {"K", res.k_bound}, {"gk_abs_sum", res.gk_abs_sum},
            {"terms", res.terms_used}};
}

/// Gegenbauer coefficients of t -> E_r^{-1}(beta t) in the basis P_k^q:
/// g_k = sum_l b_l beta^l m_{l,k}, over odd l <= max_degree.
class GegenbauerExpansion {
public:
    GegenbauerExpansion(const OddSeries& inverse, unsigned q)
        : b_(coefficients_as_double(inverse)),
          table_(q, static_cast<unsigned>(2 * inverse.size() - 1)) {}

    unsigned q() const { return table_.q(); }
    std::size_t terms() const { return b_.size(); }

    /// g_k(beta) for k = 0..max_degree (even k are zero).
    std::vector<double> coefficients(double beta) const {
        const unsigned lmax = effective_degree(beta);
        std::vector<double> g(lmax + 1, 0.0);
        double p = beta;
        for (unsigned l = 1; l <= lmax; l += 2) {
            const double w = b_[l / 2] * p;
            const auto& row = table_.row(l);
            for (unsigned k = 1; k <= l; k += 2) g[k] += w * row[k];
            p *= beta * beta;
        }
        return g;
    }

    double abs_sum(double beta) const {
        double s = 0.0;
        for (double v : coefficients(beta)) s += std::abs(v);
        return s;
    }

private:
    // Drop rows once the l-tail of sum |b_l| beta^l is below 1e-12.
    unsigned effective_degree(double beta) const {
        const unsigned full = static_cast<unsigned>(2 * b_.size() - 1);
        if (beta >= 1.0) return full;
        std::vector<double> terms(b_.size());
        double p = beta;
        for (std::size_t k = 0; k < b_.size(); ++k) {
            terms[k] = std::abs(b_[k]) * p;
            p *= beta * beta;
        }
        double tail = 0.0;
        for (std::size_t k = b_.size(); k-- > 0;) {
            tail += terms[k];
            if (tail >= 1e-12) return static_cast<unsigned>(std::min<std::size_t>(2 * k + 3, full));
        }
        return 1;
    }

    std::vector<double> b_;
    GegenbauerTable<double> table_;
};

/// Largest beta in (0, 1] with sum_k |g_k^q(beta)| = 1/(theta - 1): scan
/// downward from 1 in steps of grid_step, then bisect the first bracket.
inline BetaQRResult beta_qr(const OddSeries& inverse, unsigned q, double theta, double grid_step = 1e-3,
                            double tol = 1e-12) {
    const unsigned r = inverse.rank;
    detail::require(r >= 1, "beta_qr: series must carry its rank");
    detail::require(q >= r, "beta_qr: requires q >= r");
    detail::require(q >= 2, "beta_qr: requires q >= 2");
    detail::require(theta >= 2.0, "beta_qr: theta must be >= 2");
    detail::require(grid_step > 0.0 && grid_step < 1.0, "beta_qr: grid_step must be in (0, 1)");

    const GegenbauerExpansion expansion(inverse, q);
    const double target = 1.0 / (theta - 1.0);
    auto excess = [&](double beta) { return expansion.abs_sum(beta) - target; };

    double upper = 1.0;
    if (excess(upper) < 0.0) throw numerical_error("beta_qr: sum at beta = 1 is already below the target");
    std::optional<double> lower;
    for (double b = 1.0 - grid_step; b > 0.0; b -= grid_step) {
        if (excess(b) < 0.0) {
            lower = b;
            break;
        }
        upper = b;
    }
    if (!lower) throw numerical_error("beta_qr: no crossing found in (0, 1]");

    double lo = *lower, hi = upper;
    while (hi - lo >= tol) {
        const double mid = 0.5 * (lo + hi);
        if (excess(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    BetaQRResult res;
    res.q = q;
    res.r = r;
    res.theta = theta;
    res.beta = 0.5 * (lo + hi);
    res.k_bound = 1.0 / res.beta;
    res.gk_abs_sum = expansion.abs_sum(res.beta);
    res.terms_used = inverse.size();
    return res;
}

inline BetaQRResult beta_qr(unsigned q, unsigned r, double theta, double grid_step = 1e-3, double tol = 1e-12,
                            SeriesOptions opts = {}) {
    detail::require(r >= 1, "beta_qr: rank must be positive");
    detail::require(q >= r, "beta_qr: requires q >= r");
    return beta_qr(er_inverse_taylor(r, opts.terms, opts.precision_bits), q, theta, grid_step, tol);
}

/// (1/R^2) (1 - (1/2 + lambda 2^((r+1)/2) / (sqrt(r) Gamma(r/2)) Gamma((r+1)/2, r R^2 / 2))^2).
/// Negative values mean the bound is vacuous for this R.
inline double truncation_bound_factor(unsigned r, double lambda, double radius) {
    detail::require(r >= 1, "truncation_bound_factor: rank must be positive");
    detail::require(lambda >= 2.0, "truncation_bound_factor: lambda must be >= 2");
    detail::require(radius >= 2.0, "truncation_bound_factor: R must be >= 2");
    const double rr = r;
    const double coeff = std::exp((rr + 1.0) / 2.0 * std::log(2.0) - 0.5 * std::log(rr) - std::lgamma(rr / 2.0));
    const double bracket =
        0.5 + lambda * coeff * upper_incomplete_gamma((rr + 1.0) / 2.0, rr * radius * radius / 2.0);
    return (1.0 - bracket * bracket) / (radius * radius);
}

struct TruncationRadius {
    double radius = 2.0;
    double factor = 0.0;
    bool positive = false;
};

/// Maximizes truncation_bound_factor over R in [2, 2 + sqrt(4 ln(lambda) / r)]:
/// 1000-point grid followed by golden-section refinement around the best point.
inline TruncationRadius best_truncation_radius(unsigned r, double lambda) {
    detail::require(r >= 1, "best_truncation_radius: rank must be positive");
    detail::require(lambda >= 2.0, "best_truncation_radius: lambda must be >= 2");
    constexpr int kGrid = 1000;
    const double lo = 2.0;
    const double hi = 2.0 + std::sqrt(4.0 * std::log(lambda) / std::max(1.0, static_cast<double>(r)));
    const double h = (hi - lo) / (kGrid - 1);
    int best = 0;
    double best_val = truncation_bound_factor(r, lambda, lo);
    for (int i = 1; i < kGrid; ++i) {
        const double v = truncation_bound_factor(r, lambda, lo + i * h);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    double a = lo + std::max(0, best - 1) * h;
    double b = lo + std::min(kGrid - 1, best + 1) * h;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = truncation_bound_factor(r, lambda, c), fd = truncation_bound_factor(r, lambda, d);
    for (int it = 0; it < 100 && b - a > 1e-12; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = truncation_bound_factor(r, lambda, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = truncation_bound_factor(r, lambda, d);
        }
    }
    TruncationRadius out;
    const double refined = 0.5 * (a + b);
    const double refined_val = truncation_bound_factor(r, lambda, refined);
    if (refined_val >= best_val) {
        out.radius = refined;
        out.factor = refined_val;
    } else {
        out.radius = lo + best * h;
        out.factor = best_val;
    }
    out.positive = out.factor > 0.0;
    return out;
}

}  // namespace rankgroth
