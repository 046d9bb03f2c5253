#pragma once

// Gaussian projection rounding h(u) = Z g(u) / |Z g(u)|, truncated rounding
// into the unit ball, Monte-Carlo estimators and the full pipeline
// SDP_inf -> theta / coloring -> beta(r, G) -> embedded Gram -> rounding.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <json.hpp>

#include "constants.hpp"
#include "core.hpp"
#include "graph.hpp"
#include "krivine_embedding.hpp"
#include "power_series.hpp"
#include "random.hpp"
#include "sdp_solver.hpp"
#include "special_functions.hpp"
#include "theta_sdp.hpp"

namespace rankgroth {

/// r x d matrix of independent N(0, sigma^2) entries from stream (seed, stream).
inline Matrix gaussian_matrix(std::size_t rows, std::size_t cols, CounterRng& rng, double sigma = 1.0) {
    Matrix z(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) z(i, j) = sigma * rng.normal();
    return z;
}

/// h(u) = Z g(u) / |Z g(u)| for a given Z; returns false if some image is
/// (numerically) zero.
inline bool project_normalize(const UnitVectorAssignment& g, const Matrix& z, UnitVectorAssignment& out) {
    if (static_cast<std::size_t>(z.cols()) != g.dim())
        throw std::invalid_argument("project_normalize: Z has wrong number of columns");
    Matrix h = g.vectors * z.transpose();
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        const double nrm = h.row(i).norm();
        if (!(nrm >= 1e-300)) return false;
        h.row(i) /= nrm;
    }
    out = UnitVectorAssignment(std::move(h));
    return true;
}

/// One rounding sample. Z is redrawn (continuing the same stream) in the
/// probability-zero event that some |Z g(u)| vanishes.
inline UnitVectorAssignment gaussian_round(const UnitVectorAssignment& g, unsigned r, std::uint64_t seed,
                                           std::uint64_t stream = 0) {
    detail::require(r >= 1, "gaussian_round: r must be >= 1");
    CounterRng rng(seed, stream);
    UnitVectorAssignment h;
    for (int attempt = 0; attempt < 64; ++attempt)
        if (project_normalize(g, gaussian_matrix(r, g.dim(), rng), h)) return h;
    throw numerical_error("gaussian_round: degenerate projection persisted");
}

struct RoundingReport {
    unsigned r = 0;
    std::size_t samples = 0;
    double mean_value = 0.0;
    double std_error = 0.0;
    double best_value = -std::numeric_limits<double>::infinity();
    UnitVectorAssignment best_assignment;
    std::size_t best_sample = 0;
    double beta_reference = 0.0;
    double sdp_inf_reference = 0.0;
    std::uint64_t seed = 0;

    // Pipeline details (algorithm_a only).
    double sdp_inf_upper = 0.0;
    double lambda = 0.0;
    std::string theta_mode;
    double gram_min_eigenvalue = 0.0;
    double max_renormalization = 0.0;

    double ratio() const { return sdp_inf_reference != 0.0 ? mean_value / sdp_inf_reference : 0.0; }
};

inline nlohmann::json to_json(const RoundingReport& rep, bool include_assignment = true) {
    nlohmann::json j = {{"r", rep.r},
                        {"samples", rep.samples},
                        {"seed", rep.seed},
                        {"mean_value", rep.mean_value},
                        {"std_error", rep.std_error},
                        {"best_value", rep.best_value},
                        {"best_sample", rep.best_sample},
                        {"beta_reference", rep.beta_reference},
                        {"sdp_inf_reference", rep.sdp_inf_reference},
                        {"ratio", rep.ratio()}};
    if (!rep.theta_mode.empty()) {
        j["sdp_inf_upper"] = rep.sdp_inf_upper;
        j["lambda"] = rep.lambda;
        j["theta_mode"] = rep.theta_mode;
        j["gram_min_eigenvalue"] = rep.gram_min_eigenvalue;
        j["max_renormalization"] = rep.max_renormalization;
    }
    if (include_assignment) j["best_assignment"] = to_json(rep.best_assignment);
    return j;
}

/// Sample i uses stream i of `seed`; mean and standard error are exact
/// sample statistics accumulated in sample order.
inline RoundingReport estimate_rounding(const WeightedInstance& inst, const UnitVectorAssignment& g, unsigned r,
                                        std::size_t samples, std::uint64_t seed, double beta_ref = 0.0,
                                        double sdp_ref = 0.0) {
    detail::require(samples >= 1, "estimate_rounding: need at least one sample");
    detail::require(g.size() == inst.num_vertices(), "estimate_rounding: assignment size mismatch");
    RoundingReport rep;
    rep.r = r;
    rep.samples = samples;
    rep.seed = seed;
    rep.beta_reference = beta_ref;
    rep.sdp_inf_reference = sdp_ref;
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        auto h = gaussian_round(g, r, seed, i);
        const double value = objective(inst, h);
        const double delta = value - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (value - mean);
        if (value > rep.best_value) {
            rep.best_value = value;
            rep.best_assignment = std::move(h);
            rep.best_sample = i;
        }
    }
    rep.mean_value = mean;
    rep.std_error = samples > 1 ? std::sqrt(m2 / static_cast<double>(samples - 1) / static_cast<double>(samples)) : 0.0;
    return rep;
}

/// Ball-valued rounding with Z_ij ~ N(0, 1/r): Z f(u) / R inside the radius,
/// Z f(u) / |Z f(u)| outside.
inline UnitVectorAssignment truncated_round(const UnitVectorAssignment& f, unsigned r, double radius,
                                            std::uint64_t seed, std::uint64_t stream = 0) {
    detail::require(r >= 1, "truncated_round: r must be >= 1");
    detail::require(radius >= 2.0, "truncated_round: R must be >= 2");
    CounterRng rng(seed, stream);
    const Matrix z = gaussian_matrix(r, f.dim(), rng, 1.0 / std::sqrt(static_cast<double>(r)));
    Matrix h = f.vectors * z.transpose();
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        const double nrm = h.row(i).norm();
        if (nrm <= radius)
            h.row(i) /= radius;
        else
            h.row(i) /= nrm;
    }
    return UnitVectorAssignment(std::move(h), true);
}

/// Replaces vectors one at a time by w_u / |w_u|, w_u = sum_v A~(u,v) h(v).
/// The objective is linear in each block, so no step decreases it.
inline UnitVectorAssignment lift_to_sphere(const WeightedInstance& inst, UnitVectorAssignment h) {
    detail::require(h.size() == inst.num_vertices(), "lift_to_sphere: assignment size mismatch");
    const auto n = inst.num_vertices();
    std::vector<std::vector<std::pair<std::size_t, double>>> nbrs(n);
    const auto& edges = inst.graph.edges();
    for (std::size_t i = 0; i < edges.size(); ++i) {
        nbrs[edges[i].u].push_back({edges[i].v, inst.weights[i]});
        nbrs[edges[i].v].push_back({edges[i].u, inst.weights[i]});
    }
    Matrix& m = h.vectors;
    Eigen::RowVectorXd w(m.cols());
    for (std::size_t u = 0; u < n; ++u) {
        w.setZero();
        for (const auto& [v, a] : nbrs[u]) w += a * m.row(v);
        const double nrm = w.norm();
        if (nrm > 0.0) {
            m.row(u) = w / nrm;
        } else {
            // Any unit vector is optimal for this block.
            const double own = m.row(u).norm();
            if (own > 0.0) {
                m.row(u) /= own;
            } else {
                m.row(u).setZero();
                m(u, 0) = 1.0;
            }
        }
    }
    h.ball_valued = false;
    return h;
}

inline UnitVectorAssignment truncated_round(const WeightedInstance& inst, const UnitVectorAssignment& f, unsigned r,
                                            double radius, std::uint64_t seed, bool lift) {
    auto h = truncated_round(f, r, radius, seed);
    return lift ? lift_to_sphere(inst, std::move(h)) : h;
}

struct PipelineOptions {
    SeriesOptions series;
    double beta_tol = 1e-12;
    double sdp_tol = 1e-9;
    int sdp_max_iter = 100000;
    ThetaOptions theta;
};

/// Algorithm A: solve SDP_inf, build the embedding for beta(r, G), round.
inline RoundingReport algorithm_a(const WeightedInstance& inst, unsigned r, std::size_t samples, std::uint64_t seed,
                                  const ThetaMode& mode, const PipelineOptions& opts = {}) {
    detail::require(inst.graph.num_edges() >= 1, "algorithm_a: instance has no edges");
    detail::require(r >= 1, "algorithm_a: r must be >= 1");
    const auto sol = solve_sdp_infinity(inst, opts.sdp_tol, opts.sdp_max_iter, seed);
    const auto cert = theta_certificate(inst.graph, mode, opts.theta);
    const auto de = build_dual_embedding(cert, inst.graph);
    const auto inverse = er_inverse_taylor(r, opts.series.terms, opts.series.precision_bits);
    const auto beta = beta_rank(inverse, cert.lambda, opts.beta_tol);
    const auto eg = build_embedded_gram(sol.assignment, de, inverse, beta.beta);
    const auto g = gram_to_unit_vectors_report(eg);
    auto rep = estimate_rounding(inst, g.vectors, r, samples, seed, beta.beta, sol.value);
    rep.sdp_inf_upper = sol.dual_bound;
    rep.lambda = cert.lambda;
    rep.theta_mode = mode.str();
    rep.gram_min_eigenvalue = eg.min_eigenvalue;
    rep.max_renormalization = g.max_renormalization;
    return rep;
}

/// chi:2 for bipartite graphs, otherwise solve.
inline ThetaMode default_theta_mode(const Graph& g) {
    return is_bipartite(g).bipartite ? ThetaMode::chi(2) : ThetaMode::solver();
}

struct IdentityCheck {
    double mc_mean = 0.0;
    double std_error = 0.0;
    double series_value = 0.0;
};

/// Monte-Carlo estimate of E[Zu/|Zu| . Zv/|Zv|] for u = (1,0), v = (t, sqrt(1-t^2)).
/// The reference is the 1024-term Taylor polynomial of E_r, or the summed
/// hypergeometric series when |t| > 0.99 where truncation would show.
inline IdentityCheck identity_check(unsigned r, double t, std::size_t samples, std::uint64_t seed) {
    detail::require(r >= 1, "identity_check: r must be >= 1");
    detail::require(std::abs(t) <= 1.0, "identity_check: |t| must be <= 1");
    detail::require(samples >= 2, "identity_check: need at least two samples");
    const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
    double mean = 0.0, m2 = 0.0;
    Vector z1(r), z2(r);
    for (std::size_t i = 0; i < samples; ++i) {
        CounterRng rng(seed, i);
        double value = 0.0;
        for (;;) {
            for (unsigned k = 0; k < r; ++k) {
                z1(k) = rng.normal();
                z2(k) = rng.normal();
            }
            const Vector zv = t * z1 + s * z2;
            const double n1 = z1.norm(), n2 = zv.norm();
            if (n1 >= 1e-300 && n2 >= 1e-300) {
                value = z1.dot(zv) / (n1 * n2);
                break;
            }
        }
        const double delta = value - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (value - mean);
    }
    IdentityCheck out;
    out.mc_mean = mean;
    out.std_error = std::sqrt(m2 / static_cast<double>(samples - 1) / static_cast<double>(samples));
    if (std::abs(t) <= 0.99) {
        const auto series = er_taylor(r, kDefaultTerms);
        ScopedPrecision guard(series.precision_bits);
        out.series_value = static_cast<double>(eval_series(series, HighPrec(t)));
    } else {
        out.series_value = er_eval_hyp(r, t);
    }
    return out;
}

}  // namespace rankgroth
