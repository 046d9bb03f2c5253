#pragma once

// Gamma ratios, the hypergeometric and integral forms of E_r, the upper
// incomplete gamma function, and Gegenbauer polynomials normalized to
// P_k^q(1) = 1 together with monomial -> Gegenbauer connection tables.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "core.hpp"

namespace rankgroth {

/// (2/r) (Gamma((r+1)/2) / Gamma(r/2))^2 for integer r, exact in Real.
/// Uses rho_1^2 = 1/pi, rho_2^2 = pi/4 and rho_{r+2} = (r+1)/r rho_r.
template <typename Real>
Real lead_coefficient(unsigned r) {
    detail::require(r >= 1, "lead_coefficient: rank must be positive");
    const Real pi = boost::math::constants::pi<Real>();
    Real rho_sq = (r % 2 == 1) ? Real(1) / pi : pi / Real(4);
    for (unsigned s = (r % 2 == 1) ? 1 : 2; s + 2 <= r; s += 2) {
        const Real ratio = Real(s + 1) / Real(s);
        rho_sq *= ratio * ratio;
    }
    return Real(2) / Real(r) * rho_sq;
}

/// Same quantity for real r >= 1 through log-gamma; tends to 1 as r grows.
inline double lead_coefficient(double r) {
    detail::require(r >= 1.0, "lead_coefficient: rank must be >= 1");
    const double log_ratio = std::lgamma((r + 1.0) / 2.0) - std::lgamma(r / 2.0);
    return 2.0 / r * std::exp(2.0 * log_ratio);
}

/// E_r(t) by direct summation of t 2F1(1/2,1/2; r/2+1; t^2). Terms are
/// summed until the geometric tail bound drops below machine precision.
/// At |t| = 1 the Gauss sum gives E_r(+-1) = +-1. When |t| is so close to 1
/// that summation would need more than 5e7 terms, the Euler integral is
/// used instead.
inline double er_eval_quadrature(unsigned r, double t);

inline double er_eval_hyp(unsigned r, double t) {
    detail::require(r >= 1, "er_eval_hyp: rank must be positive");
    detail::require(std::abs(t) <= 1.0, "er_eval_hyp: |t| must be <= 1");
    if (t == 0.0) return 0.0;
    if (std::abs(t) == 1.0) return t;
    const long double z = static_cast<long double>(t) * t;
    const long double c = r / 2.0L + 1.0L;
    const long double eps = 1e-19L;
    constexpr long kCap = 50'000'000;
    if (std::log(eps * (1.0L - z)) / std::log(z) > kCap) {
        if (r == 1) return 2.0 / boost::math::constants::pi<double>() * std::asin(t);
        return er_eval_quadrature(r, t);
    }
    long double term = 1.0L, sum = 1.0L;
    for (long k = 0; k < kCap; ++k) {
        const long double kh = k + 0.5L;
        term *= kh * kh / ((k + 1.0L) * (k + c)) * z;
        sum += term;
        if (term * z < eps * (1.0L - z) * sum) break;
    }
    return static_cast<double>(lead_coefficient(static_cast<double>(r)) * t * sum);
}

/// E_r(t) = 2(r-1) Gamma((r+1)/2) / (Gamma(1/2) Gamma(r/2))
///          * int_0^{pi/2} cos^{r-2} th sin th asin(t sin th) dth,   r >= 2.
inline double er_eval_quadrature(unsigned r, double t) {
    detail::require(r >= 2, "er_eval_quadrature: requires r >= 2");
    detail::require(std::abs(t) <= 1.0, "er_eval_quadrature: |t| must be <= 1");
    if (t == 0.0) return 0.0;
    const double pi = boost::math::constants::pi<double>();
    const double prefactor = 2.0 * (r - 1.0) *
                             std::exp(std::lgamma((r + 1.0) / 2.0) - std::lgamma(0.5) - std::lgamma(r / 2.0));
    auto integrand = [r, t](double th) {
        const double s = std::sin(th);
        return std::pow(std::cos(th), static_cast<int>(r) - 2) * s * std::asin(t * s);
    };
    double err = 0.0;
    const double val =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, pi / 2.0, 20, 1e-14, &err);
    return prefactor * val;
}

/// Gamma(a, x) = int_x^inf s^(a-1) e^(-s) ds (the upper incomplete gamma).
inline double upper_incomplete_gamma(double a, double x) {
    detail::require(a > 0.0, "upper_incomplete_gamma: a must be positive");
    detail::require(x >= 0.0, "upper_incomplete_gamma: x must be non-negative");
    return boost::math::tgamma(a, x);
}

/// P_k^q(t), Gegenbauer polynomial of parameter (q-2)/2 scaled to P_k^q(1) = 1.
/// Recurrence (k + q - 2) P_{k+1} = (2k + q - 2) t P_k - k P_{k-1}.
inline double gegenbauer_eval(unsigned q, unsigned k, double t) {
    detail::require(q >= 2, "gegenbauer_eval: q must be >= 2");
    if (k == 0) return 1.0;
    if (q == 2) return std::cos(k * std::acos(std::clamp(t, -1.0, 1.0)));
    const double nu = q - 2.0;
    double prev = 1.0, cur = t;
    for (unsigned j = 1; j < k; ++j) {
        const double next = ((2.0 * j + nu) * t * cur - j * prev) / (j + nu);
        prev = cur;
        cur = next;
    }
    return cur;
}

/// P_0^q(t) .. P_kmax^q(t) in one pass.
inline std::vector<double> gegenbauer_all(unsigned q, unsigned kmax, double t) {
    detail::require(q >= 2, "gegenbauer_all: q must be >= 2");
    std::vector<double> p(kmax + 1);
    p[0] = 1.0;
    if (kmax == 0) return p;
    p[1] = t;
    const double nu = q - 2.0;
    for (unsigned j = 1; j < kmax; ++j) {
        if (q == 2)
            p[j + 1] = 2.0 * t * p[j] - p[j - 1];
        else
            p[j + 1] = ((2.0 * j + nu) * t * p[j] - j * p[j - 1]) / (j + nu);
    }
    return p;
}

/// Coefficients m_{l,k} with t^l = sum_k m_{l,k} P_k^q(t), 0 <= k <= l <= L.
template <typename Real>
class GegenbauerTable {
public:
    GegenbauerTable(unsigned q, unsigned max_degree) : q_(q), max_degree_(max_degree) {
        detail::require(q >= 2, "GegenbauerTable: q must be >= 2");
        detail::require(max_degree >= 1, "GegenbauerTable: need max degree >= 1");
        const Real nu(static_cast<long>(q) - 2);
        rows_.resize(max_degree + 1);
        rows_[0] = {Real(1)};
        // t P_0 = P_1;  t P_k = ((k+nu) P_{k+1} + k P_{k-1}) / (2k+nu), k >= 1
        for (unsigned l = 0; l < max_degree; ++l) {
            const auto& cur = rows_[l];
            auto& next = rows_[l + 1];
            next.assign(l + 2, Real(0));
            for (unsigned k = 0; k <= l; ++k) {
                if (cur[k] == 0) continue;
                if (k == 0) {
                    next[1] += cur[0];
                    continue;
                }
                const Real denom = Real(2 * k) + nu;
                next[k + 1] += cur[k] * (Real(k) + nu) / denom;
                next[k - 1] += cur[k] * Real(k) / denom;
            }
        }
    }

    unsigned q() const { return q_; }
    unsigned max_degree() const { return max_degree_; }
    const Real& operator()(unsigned l, unsigned k) const { return rows_.at(l).at(k); }
    const std::vector<Real>& row(unsigned l) const { return rows_.at(l); }

private:
    unsigned q_;
    unsigned max_degree_;
    std::vector<std::vector<Real>> rows_;
};

template <typename Real = double>
GegenbauerTable<Real> build_connection_table(unsigned q, unsigned max_degree) {
    return GegenbauerTable<Real>(q, max_degree);
}

}  // namespace rankgroth
