#pragma once

// Truncated odd power series: Taylor coefficients of the rank-r
// Grothendieck function E_r and of its compositional inverse.
//
// E_r(t) = a_1 t 2F1(1/2, 1/2; r/2 + 1; t^2) is the expected inner product
// of Zx/|Zx| and Zy/|Zy| for unit vectors with x.y = t and Z an r x n
// standard Gaussian matrix.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "special_functions.hpp"

namespace rankgroth {

enum class SeriesKind { generic, forward, inverse };

/// Odd series sum_k coeffs[k] t^(2k+1).
template <typename Real>
struct BasicOddSeries {
    unsigned rank = 0;  // 0 = untagged
    SeriesKind kind = SeriesKind::generic;
    unsigned precision_bits = 53;
    std::vector<Real> coeffs;

    std::size_t size() const { return coeffs.size(); }
    /// Coefficient of t^degree (zero for even or out-of-range degree).
    Real at_degree(std::size_t degree) const {
        if (degree % 2 == 0 || degree / 2 >= coeffs.size()) return Real(0);
        return coeffs[degree / 2];
    }
};

using OddSeries = BasicOddSeries<HighPrec>;

namespace detail {

template <typename Real>
void check_series(const BasicOddSeries<Real>& s) {
    if (s.coeffs.empty()) throw std::invalid_argument("odd series needs at least one term");
    for (const auto& c : s.coeffs)
        if (!is_finite(c)) throw numerical_error("odd series has a non-finite coefficient");
}

// Dense truncated product, indices 0..deg.
template <typename Real>
std::vector<Real> mul_trunc(const std::vector<Real>& a, const std::vector<Real>& b, std::size_t deg) {
    std::vector<Real> out(deg + 1, Real(0));
    for (std::size_t i = 0; i < a.size() && i <= deg; ++i) {
        if (a[i] == 0) continue;
        const std::size_t jmax = std::min(b.size() - 1, deg - i);
        for (std::size_t j = 0; j <= jmax; ++j) {
            if (b[j] == 0) continue;
            out[i + j] += a[i] * b[j];
        }
    }
    return out;
}

// Reciprocal of a dense series with nonzero constant term, through degree deg.
template <typename Real>
std::vector<Real> reciprocal(const std::vector<Real>& a, std::size_t deg) {
    std::vector<Real> inv(deg + 1, Real(0));
    inv[0] = Real(1) / a[0];
    for (std::size_t n = 1; n <= deg; ++n) {
        Real acc(0);
        for (std::size_t i = 1; i <= n && i < a.size(); ++i) acc += a[i] * inv[n - i];
        inv[n] = -acc * inv[0];
    }
    return inv;
}

// sum_k c_k x^(2k+1) and its derivative, composed with the dense series x.
template <typename Real>
std::pair<std::vector<Real>, std::vector<Real>> compose_odd(const std::vector<Real>& c,
                                                            const std::vector<Real>& x,
                                                            std::size_t deg) {
    const std::size_t kmax = std::min(c.size() - 1, (deg - 1) / 2);
    const auto x2 = mul_trunc(x, x, deg);
    std::vector<Real> acc(deg + 1, Real(0)), dacc(deg + 1, Real(0));
    acc[0] = c[kmax];
    dacc[0] = c[kmax] * Real(2 * kmax + 1);
    for (std::size_t k = kmax; k-- > 0;) {
        acc = mul_trunc(acc, x2, deg);
        acc[0] += c[k];
        dacc = mul_trunc(dacc, x2, deg);
        dacc[0] += c[k] * Real(2 * k + 1);
    }
    return {mul_trunc(acc, x, deg), std::move(dacc)};
}

}  // namespace detail

/// First n odd Taylor coefficients of E_r, from the term ratio
/// a_{2k+3}/a_{2k+1} = (2k+1)^2 / ((2k+2)(r+2k+2)).
inline OddSeries er_taylor(unsigned r, std::size_t n, unsigned precision_bits = kDefaultPrecisionBits) {
    detail::require(r >= 1, "er_taylor: rank must be positive");
    detail::require(n >= 1, "er_taylor: need at least one term");
    ScopedPrecision guard(precision_bits);
    OddSeries s;
    s.rank = r;
    s.kind = SeriesKind::forward;
    s.precision_bits = precision_bits;
    s.coeffs.resize(n);
    s.coeffs[0] = lead_coefficient<HighPrec>(r);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const HighPrec odd(2 * k + 1);
        s.coeffs[k + 1] = s.coeffs[k] * odd * odd / (HighPrec(2 * k + 2) * HighPrec(r + 2 * k + 2));
    }
    return s;
}

/// Compositional inverse of an odd series by Newton iteration on truncated
/// series, doubling the number of correct terms per step. Returns b with
/// a(b(t)) = t + O(t^(2n+1)).
template <typename Real>
BasicOddSeries<Real> revert_odd_series(const BasicOddSeries<Real>& a, std::size_t n) {
    detail::check_series(a);
    detail::require(n >= 1, "revert_odd_series: need at least one term");
    detail::require(a.size() >= n, "revert_odd_series: input series is too short");
    if (a.coeffs[0] == 0) throw std::invalid_argument("revert_odd_series: leading coefficient is zero");

    std::optional<ScopedPrecision> guard;
    if constexpr (std::is_same_v<Real, HighPrec>) guard.emplace(a.precision_bits);

    const std::size_t full_deg = 2 * n - 1;
    std::vector<Real> c(a.coeffs.begin(), a.coeffs.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<Real> b(full_deg + 1, Real(0));
    b[1] = Real(1) / c[0];

    std::size_t known = 2;  // b is exact through this degree
    while (known < full_deg) {
        const std::size_t deg = std::min(2 * known + 1, full_deg);
        std::vector<Real> x(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(deg + 1));
        auto [ab, dab] = detail::compose_odd(c, x, deg);
        ab[1] -= Real(1);
        const auto step = detail::mul_trunc(ab, detail::reciprocal(dab, deg), deg);
        for (std::size_t i = 0; i <= deg; ++i) b[i] -= step[i];
        known = deg;
    }

    BasicOddSeries<Real> out;
    out.rank = a.rank;
    out.kind = a.kind == SeriesKind::forward ? SeriesKind::inverse : SeriesKind::generic;
    out.precision_bits = a.precision_bits;
    out.coeffs.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.coeffs[k] = b[2 * k + 1];
        if (!detail::is_finite(out.coeffs[k]))
            throw numerical_error("revert_odd_series: non-finite coefficient");
    }
    return out;
}

/// First n odd Taylor coefficients of E_r^{-1}.
///
/// With u = E_r / a_1, the function u(x) = x 2F1(1/2, 1/2; r/2+1; x^2)
/// satisfies x^2 (1-x^2) u'' + ((r-1) x - x^3) u' - (r-1) u = 0, so the
/// inverse x = F(u) satisfies
///   F^2 (1-F^2) F'' - ((r-1) F - F^3) F'^2 + (r-1) u F'^3 = 0.
/// The coefficient of u^n gives (n-1)(n+r-1) f_n + (terms in f_1..f_{n-2}) = 0,
/// an O(n^2) recurrence with no cancellation-prone composition. Finally
/// b_n = f_n / a_1^n.
inline OddSeries er_inverse_taylor(unsigned r, std::size_t n,
                                   unsigned precision_bits = kDefaultPrecisionBits) {
    detail::require(r >= 1, "er_inverse_taylor: rank must be positive");
    detail::require(n >= 1, "er_inverse_taylor: need at least one term");
    ScopedPrecision guard(precision_bits);
    using R = HighPrec;

    const std::size_t deg = 2 * n - 1;
    const std::size_t len = deg + 4;
    std::vector<R> f(len, R(0));   // F
    std::vector<R> d1(len, R(0));  // F'
    std::vector<R> d2(len, R(0));  // F''
    std::vector<R> p2(len, R(0));  // F^2
    std::vector<R> p3(len, R(0));  // F^3
    std::vector<R> p4(len, R(0));  // F^4
    std::vector<R> q2(len, R(0));  // F'^2
    f[1] = 1;
    d1[0] = 1;
    q2[0] = 1;
    p2[2] = 1;
    p3[3] = 1;
    p4[4] = 1;
    const R rm1(static_cast<long>(r) - 1);

    R t1, t2, t3, t4, t5, q2_partial, tmp;
    for (std::size_t m = 3; m <= deg; m += 2) {
        // F'^2 at index m-1 without the f_m contribution (d1[m-1] is still 0)
        q2_partial = 0;
        for (std::size_t i = 0; i <= m - 1; i += 2) q2_partial += d1[i] * d1[m - 1 - i];

        t1 = 0;  // [u^m] F^2 F''
        for (std::size_t j = 4; j <= m; j += 2) t1 += p2[j] * d2[m - j];
        t2 = 0;  // [u^m] F^4 F''
        for (std::size_t j = 4; j <= m; j += 2) t2 += p4[j] * d2[m - j];
        t3 = q2_partial;  // [u^m] F F'^2, j = 1 term
        for (std::size_t j = 3; j < m; j += 2) t3 += f[j] * q2[m - j];
        t4 = 0;  // [u^m] F^3 F'^2
        for (std::size_t j = 3; j <= m; j += 2) t4 += p3[j] * q2[m - j];
        t5 = q2_partial;  // [u^m] u F'^3 = [u^(m-1)] F' F'^2
        for (std::size_t i = 2; i < m - 1; i += 2) t5 += d1[i] * q2[m - 1 - i];

        tmp = t1 - t2 - rm1 * t3 + t4 + rm1 * t5;
        const R fm = -tmp / (R(m - 1) * R(static_cast<long>(m + r) - 1));
        if (!detail::is_finite(fm)) throw numerical_error("er_inverse_taylor: non-finite coefficient");

        f[m] = fm;
        d1[m - 1] = R(m) * fm;
        d2[m - 2] = R(m) * R(m - 1) * fm;
        q2[m - 1] = q2_partial + 2 * d1[m - 1];
        tmp = 0;
        for (std::size_t i = 1; i <= m; i += 2) tmp += f[i] * f[m + 1 - i];
        p2[m + 1] = tmp;
        tmp = 0;
        for (std::size_t j = 2; j <= m + 1; j += 2) tmp += p2[j] * f[m + 2 - j];
        p3[m + 2] = tmp;
        tmp = 0;
        for (std::size_t j = 3; j <= m + 2; j += 2) tmp += p3[j] * f[m + 3 - j];
        p4[m + 3] = tmp;
    }

    OddSeries s;
    s.rank = r;
    s.kind = SeriesKind::inverse;
    s.precision_bits = precision_bits;
    s.coeffs.resize(n);
    const R a1 = lead_coefficient<R>(r);
    const R inv_a1 = R(1) / a1;
    R scale = inv_a1;
    const R inv_a1_sq = inv_a1 * inv_a1;
    for (std::size_t k = 0; k < n; ++k) {
        s.coeffs[k] = f[2 * k + 1] * scale;
        scale *= inv_a1_sq;
    }
    return s;
}

/// sum_k c_{2k+1} t^(2k+1), Horner in t^2.
template <typename Real>
Real eval_series(const BasicOddSeries<Real>& s, const Real& t) {
    if (s.coeffs.empty()) return Real(0);
    const Real t2 = t * t;
    Real acc = s.coeffs.back();
    for (std::size_t k = s.coeffs.size() - 1; k-- > 0;) acc = acc * t2 + s.coeffs[k];
    return acc * t;
}

/// sum_k |c_{2k+1}| t^(2k+1); increasing in t >= 0.
template <typename Real>
Real eval_abs_series(const BasicOddSeries<Real>& s, const Real& t) {
    using std::abs;
    using boost::multiprecision::abs;
    if (s.coeffs.empty()) return Real(0);
    const Real t2 = t * t;
    Real acc = abs(s.coeffs.back());
    for (std::size_t k = s.coeffs.size() - 1; k-- > 0;) acc = acc * t2 + abs(s.coeffs[k]);
    return acc * t;
}

/// A-posteriori tail estimate |c_last| t^(2N-1) / (1 - t^2) for 0 <= t < 1.
template <typename Real>
double tail_estimate(const BasicOddSeries<Real>& s, double t) {
    if (s.coeffs.empty()) return 0.0;
    const double last = std::abs(detail::to_double(s.coeffs.back()));
    const double deg = 2.0 * static_cast<double>(s.coeffs.size()) - 1.0;
    if (t >= 1.0) return std::numeric_limits<double>::infinity();
    return last * std::pow(t, deg) / (1.0 - t * t);
}

template <typename Real>
std::vector<double> coefficients_as_double(const BasicOddSeries<Real>& s) {
    std::vector<double> out;
    out.reserve(s.coeffs.size());
    for (const auto& c : s.coeffs) out.push_back(detail::to_double(c));
    return out;
}

/// Double-precision evaluator for hot loops (Gram assembly, rounding).
class SeriesEvaluator {
public:
    SeriesEvaluator() = default;
    template <typename Real>
    explicit SeriesEvaluator(const BasicOddSeries<Real>& s, double scale = 1.0) {
        // coefficients of t -> sum c_k (scale t)^(2k+1)
        double p = scale;
        for (const auto& c : s.coeffs) {
            const double v = detail::to_double(c) * p;
            signed_.push_back(v);
            abs_.push_back(std::abs(v));
            p *= scale * scale;
            if (p == 0.0) break;
        }
    }
    double value(double t) const { return horner(signed_, t); }
    double abs_value(double t) const { return horner(abs_, t); }

private:
    static double horner(const std::vector<double>& c, double t) {
        if (c.empty()) return 0.0;
        const double t2 = t * t;
        double acc = c.back();
        for (std::size_t k = c.size() - 1; k-- > 0;) acc = acc * t2 + c[k];
        return acc * t;
    }
    std::vector<double> signed_, abs_;
};

// JSON: {rank, precision_bits, coefficients: [decimal strings]}
inline nlohmann::json to_json(const OddSeries& s) {
    nlohmann::json j;
    j["rank"] = s.rank;
    j["precision_bits"] = s.precision_bits;
    j["kind"] = s.kind == SeriesKind::forward ? "forward" : s.kind == SeriesKind::inverse ? "inverse" : "generic";
    auto& arr = j["coefficients"] = nlohmann::json::array();
    const auto digits = static_cast<std::streamsize>(bits_to_digits10(s.precision_bits) + 2);
    for (const auto& c : s.coeffs) arr.push_back(c.str(digits, std::ios_base::scientific));
    return j;
}

inline OddSeries series_from_json(const nlohmann::json& j) {
    OddSeries s;
    s.rank = j.at("rank").get<unsigned>();
    s.precision_bits = j.at("precision_bits").get<unsigned>();
    const auto kind = j.value("kind", std::string("generic"));
    s.kind = kind == "forward" ? SeriesKind::forward : kind == "inverse" ? SeriesKind::inverse : SeriesKind::generic;
    ScopedPrecision guard(s.precision_bits);
    for (const auto& c : j.at("coefficients")) s.coeffs.emplace_back(c.get<std::string>());
    detail::check_series(s);
    return s;
}

}  // namespace rankgroth
