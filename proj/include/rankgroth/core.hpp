#pragma once

// Shared scalar types, error classes and small numeric helpers.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/mpfr.hpp>
#include <Eigen/Dense>

namespace rankgroth {

/// Binary floating point with a run-time mantissa width (MPFR backed).
using HighPrec = boost::multiprecision::mpfr_float;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr unsigned kDefaultPrecisionBits = 256;
inline constexpr std::size_t kDefaultTerms = 1024;

/// Raised when an algorithm cannot reach its numerical contract
/// (non-finite coefficients, solver stagnation, violated certificate).
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline unsigned bits_to_digits10(unsigned bits) {
    return static_cast<unsigned>(std::ceil(bits * 0.30102999566398119521)) + 1;
}

/// Sets the default MPFR precision for values created in this scope.
class ScopedPrecision {
public:
    explicit ScopedPrecision(unsigned bits)
        : saved_(HighPrec::default_precision()) {
        HighPrec::default_precision(bits_to_digits10(bits));
    }
    ~ScopedPrecision() { HighPrec::default_precision(saved_); }
    ScopedPrecision(const ScopedPrecision&) = delete;
    ScopedPrecision& operator=(const ScopedPrecision&) = delete;

private:
    unsigned saved_;
};

namespace detail {

template <typename Real>
inline double to_double(const Real& x) {
    return static_cast<double>(x);
}

template <typename Real>
inline bool is_finite(const Real& x) {
    using std::isfinite;
    using boost::multiprecision::isfinite;
    return isfinite(x);
}

inline void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

}  // namespace detail
}  // namespace rankgroth
