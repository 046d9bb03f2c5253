#pragma once

// Gram matrix of R(u) = s(u) (x) S(f(u)) + t(u) (x) T(f(u)) expressed through
// inner products only:
//   M(u,v) = (S(u,v) + T(u,v)) Phi_abs(f(u).f(v)) + (ST(u,v) + ST(v,u)) Phi_sgn(f(u).f(v)),
// and extraction of unit vectors g(u) from M.

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "constants.hpp"
#include "core.hpp"
#include "power_series.hpp"
#include "sdp_solver.hpp"
#include "special_functions.hpp"
#include "theta_sdp.hpp"

namespace rankgroth {

struct EmbeddedGram {
    Matrix M;
    double beta_used = 0.0;
    double min_eigenvalue = 0.0;
};

inline nlohmann::json to_json(const EmbeddedGram& eg) {
    nlohmann::json m = nlohmann::json::array();
    for (Eigen::Index i = 0; i < eg.M.rows(); ++i) {
        std::vector<double> row(eg.M.cols());
        for (Eigen::Index j = 0; j < eg.M.cols(); ++j) row[j] = eg.M(i, j);
        m.push_back(row);
    }
    return {{"beta", eg.beta_used}, {"min_eigenvalue", eg.min_eigenvalue}, {"M", m}};
}

namespace detail {

template <typename AbsFn, typename SgnFn>
EmbeddedGram assemble_gram(const UnitVectorAssignment& f, const DualEmbedding& de, double beta, AbsFn&& phi_abs,
                           SgnFn&& phi_sgn) {
    const auto n = f.size();
    require(static_cast<std::size_t>(de.S_gram.rows()) == n, "embedded gram: dual embedding size mismatch");
    const Matrix inner = f.gram();
    EmbeddedGram eg;
    eg.beta_used = beta;
    eg.M.resize(n, n);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u; v < n; ++v) {
            const double t = std::clamp(inner(u, v), -1.0, 1.0);
            const double val = (de.S_gram(u, v) + de.T_gram(u, v)) * phi_abs(t) +
                               (de.ST_gram(u, v) + de.ST_gram(v, u)) * phi_sgn(t);
            eg.M(u, v) = eg.M(v, u) = val;
        }
    for (std::size_t u = 0; u < n; ++u)
        if (std::abs(eg.M(u, u) - 1.0) > 1e-6)
            throw numerical_error("embedded gram: diagonal entry deviates from 1 by more than 1e-6");
    eg.min_eigenvalue = Eigen::SelfAdjointEigenSolver<Matrix>(eg.M, Eigen::EigenvaluesOnly).eigenvalues()(0);
    return eg;
}

}  // namespace detail

/// Phi_abs(t) = sum |b_{2k+1}| beta^{2k+1} t^{2k+1}, Phi_sgn(t) = E_r^{-1}(beta t).
inline EmbeddedGram build_embedded_gram(const UnitVectorAssignment& f, const DualEmbedding& de,
                                        const OddSeries& inverse, double beta) {
    detail::require(beta > 0.0 && beta <= 1.0, "build_embedded_gram: beta must lie in (0, 1]");
    const SeriesEvaluator phi(inverse, beta);
    const double norm = phi.abs_value(1.0);
    if (std::abs(norm * (de.lambda - 1.0) - 1.0) > 1e-9)
        throw std::invalid_argument("build_embedded_gram: beta is inconsistent with lambda");
    return detail::assemble_gram(
        f, de, beta, [&](double t) { return phi.abs_value(t); }, [&](double t) { return phi.value(t); });
}

/// Same construction on S^{q-1} with Phi_abs(t) = sum_k |g_k| P_k^q(t) and
/// Phi_sgn(t) = sum_k g_k P_k^q(t) = E_r^{-1}(beta t).
inline EmbeddedGram build_embedded_gram_qr(const UnitVectorAssignment& f, const GegenbauerExpansion& expansion,
                                           const DualEmbedding& de, double beta) {
    const unsigned q = expansion.q();
    detail::require(f.dim() == q, "build_embedded_gram_qr: f must have dimension q");
    detail::require(beta > 0.0 && beta <= 1.0, "build_embedded_gram_qr: beta must lie in (0, 1]");
    const std::vector<double> g = expansion.coefficients(beta);
    double abs_sum = 0.0;
    for (double v : g) abs_sum += std::abs(v);
    if (std::abs(abs_sum * (de.lambda - 1.0) - 1.0) > 1e-9)
        throw std::invalid_argument("build_embedded_gram_qr: beta is inconsistent with lambda");
    const unsigned kmax = static_cast<unsigned>(g.size() - 1);
    auto series = [&](double t, bool absolute) {
        const auto p = gegenbauer_all(q, kmax, t);
        double s = 0.0;
        for (unsigned k = 1; k <= kmax; k += 2) s += (absolute ? std::abs(g[k]) : g[k]) * p[k];
        return s;
    };
    return detail::assemble_gram(
        f, de, beta, [&](double t) { return series(t, true); }, [&](double t) { return series(t, false); });
}

struct ExtractedVectors {
    UnitVectorAssignment vectors;
    double max_renormalization = 0.0;  // largest |1 - row norm| before rescaling
};

/// Eigen-factorization with negative eigenvalues clipped, rows rescaled to unit length.
inline ExtractedVectors gram_to_unit_vectors_report(const EmbeddedGram& eg) {
    if (eg.min_eigenvalue < -1e-6) throw numerical_error("gram_to_unit_vectors: Gram matrix is not PSD");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (eg.M + eg.M.transpose()));
    if (eig.eigenvalues()(0) < -1e-6) throw numerical_error("gram_to_unit_vectors: Gram matrix is not PSD");
    const Vector roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Matrix rows = eig.eigenvectors() * roots.asDiagonal();
    ExtractedVectors out;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        const double nrm = rows.row(i).norm();
        if (nrm <= 0.0) throw numerical_error("gram_to_unit_vectors: zero row");
        out.max_renormalization = std::max(out.max_renormalization, std::abs(1.0 - nrm));
        rows.row(i) /= nrm;
    }
    out.vectors = UnitVectorAssignment(std::move(rows));
    return out;
}

inline UnitVectorAssignment gram_to_unit_vectors(const EmbeddedGram& eg) {
    return gram_to_unit_vectors_report(eg).vectors;
}

}  // namespace rankgroth
