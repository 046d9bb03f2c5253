#pragma once

// SDP_inf by full-dimension block coordinate ascent with a weak-duality
// certificate, plus rank-1 brute force and rank-r local search oracles.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "graph.hpp"
#include "random.hpp"

namespace rankgroth {

/// n rows in R^d; rows are unit vectors unless `ball_valued` is set.
struct UnitVectorAssignment {
    Matrix vectors;
    bool ball_valued = false;

    UnitVectorAssignment() = default;
    explicit UnitVectorAssignment(Matrix v, bool ball = false) : vectors(std::move(v)), ball_valued(ball) {}

    std::size_t size() const { return static_cast<std::size_t>(vectors.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }
    Matrix gram() const { return vectors * vectors.transpose(); }

    double max_norm_defect() const {
        double worst = 0.0;
        for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
            const double nrm = vectors.row(i).norm();
            worst = std::max(worst, ball_valued ? std::max(0.0, nrm - 1.0) : std::abs(nrm - 1.0));
        }
        return worst;
    }
};

inline nlohmann::json to_json(const UnitVectorAssignment& f) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < f.vectors.rows(); ++i) {
        std::vector<double> row(f.vectors.cols());
        for (Eigen::Index j = 0; j < f.vectors.cols(); ++j) row[j] = f.vectors(i, j);
        rows.push_back(row);
    }
    return {{"d", f.dim()}, {"vectors", rows}, {"ball_valued", f.ball_valued}};
}

/// sum over edges A(u,v) f(u).f(v).
inline double objective(const WeightedInstance& inst, const UnitVectorAssignment& f) {
    if (f.size() != inst.num_vertices())
        throw std::invalid_argument("objective: assignment has wrong number of vertices");
    double s = 0.0;
    const auto& edges = inst.graph.edges();
    for (std::size_t i = 0; i < edges.size(); ++i)
        s += inst.weights[i] * f.vectors.row(edges[i].u).dot(f.vectors.row(edges[i].v));
    return s;
}

inline Matrix random_unit_rows(std::size_t n, std::size_t d, std::uint64_t seed, std::uint64_t stream = 0) {
    CounterRng rng(seed, stream);
    Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        double nrm = 0.0;
        do {
            for (std::size_t j = 0; j < d; ++j) m(i, j) = rng.normal();
            nrm = m.row(i).norm();
        } while (nrm < 1e-300);
        m.row(i) /= nrm;
    }
    return m;
}

namespace detail {

struct AscentResult {
    double value = 0.0;
    int sweeps = 0;
};

/// Cyclic updates f(u) <- w_u / |w_u| with w_u = sum_v A~(u,v) f(v); a block
/// with w_u = 0 keeps its vector. Stops when one sweep gains less than tol.
inline AscentResult block_ascent(const WeightedInstance& inst, Matrix& f, double tol, int max_sweeps) {
    const auto n = inst.num_vertices();
    std::vector<std::vector<std::pair<std::size_t, double>>> nbrs(n);
    const auto& edges = inst.graph.edges();
    for (std::size_t i = 0; i < edges.size(); ++i) {
        nbrs[edges[i].u].push_back({edges[i].v, inst.weights[i]});
        nbrs[edges[i].v].push_back({edges[i].u, inst.weights[i]});
    }
    AscentResult res;
    double prev = -std::numeric_limits<double>::infinity();
    Eigen::RowVectorXd w(f.cols());
    for (res.sweeps = 1; res.sweeps <= max_sweeps; ++res.sweeps) {
        for (std::size_t u = 0; u < n; ++u) {
            w.setZero();
            for (const auto& [v, a] : nbrs[u]) w += a * f.row(v);
            const double nrm = w.norm();
            if (nrm > 0.0) f.row(u) = w / nrm;
        }
        double value = 0.0;
        for (std::size_t i = 0; i < edges.size(); ++i)
            value += inst.weights[i] * f.row(edges[i].u).dot(f.row(edges[i].v));
        res.value = value;
        if (value - prev < tol) break;
        prev = value;
    }
    res.sweeps = std::min(res.sweeps, max_sweeps);
    return res;
}

}  // namespace detail

struct DualCertificate {
    Vector y;
    double mu = 0.0;
    double bound = 0.0;
};

/// Weak-duality bound for max (1/2)<A~, X> over X >= 0 with unit diagonal:
/// y_u = |w_u|/2, mu = max(0, -lambda_min(Diag(y) - A~/2)), bound = sum y + n mu.
inline DualCertificate sdp_dual_certificate(const WeightedInstance& inst, const Matrix& f) {
    const Matrix a = inst.dense();
    const Matrix w = a * f;
    DualCertificate cert;
    cert.y = w.rowwise().norm() / 2.0;
    Matrix m = -a / 2.0;
    m.diagonal() += cert.y;
    const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
    cert.mu = std::max(0.0, -lmin);
    cert.bound = cert.y.sum() + static_cast<double>(inst.num_vertices()) * cert.mu;
    return cert;
}

struct SdpSolution {
    UnitVectorAssignment assignment;
    double value = 0.0;
    double dual_bound = 0.0;
    double dual_gap = 0.0;
    int iterations = 0;
    bool converged = false;
};

inline nlohmann::json to_json(const SdpSolution& s) {
    auto j = to_json(s.assignment);
    j["value"] = s.value;
    j["dual_bound"] = s.dual_bound;
    j["dual_gap"] = s.dual_gap;
    j["iterations"] = s.iterations;
    j["converged"] = s.converged;
    return j;
}

inline SdpSolution solve_sdp_infinity(const WeightedInstance& inst, double tol = 1e-9, int max_iter = 100000,
                                      std::uint64_t seed = 1) {
    const auto n = inst.num_vertices();
    detail::require(n >= 2, "solve_sdp_infinity: need at least 2 vertices");
    detail::require(inst.graph.num_edges() >= 1, "solve_sdp_infinity: instance has no edges");
    detail::require(tol > 0.0 && max_iter >= 1, "solve_sdp_infinity: bad tolerance or iteration cap");
    Matrix f = random_unit_rows(n, n, seed);
    const auto run = detail::block_ascent(inst, f, tol, max_iter);
    SdpSolution sol;
    sol.assignment = UnitVectorAssignment(std::move(f));
    sol.value = objective(inst, sol.assignment);
    sol.iterations = run.sweeps;
    sol.converged = run.sweeps < max_iter;
    const auto cert = sdp_dual_certificate(inst, sol.assignment.vectors);
    sol.dual_bound = cert.bound;
    sol.dual_gap = cert.bound - sol.value;
    if (sol.dual_gap < -1e-9) throw numerical_error("solve_sdp_infinity: dual bound below primal value");
    return sol;
}

struct RankOneOptimum {
    std::vector<int> signs;
    double value = 0.0;
};

/// Exact SDP_1 by enumerating 2^(n-1) sign patterns (vertex 0 fixed to +1).
inline RankOneOptimum brute_force_rank1(const WeightedInstance& inst) {
    const auto n = inst.num_vertices();
    detail::require(n >= 1, "brute_force_rank1: empty graph");
    detail::require(n <= 20, "brute_force_rank1: n must be <= 20");
    const auto& edges = inst.graph.edges();
    RankOneOptimum best;
    best.value = -std::numeric_limits<double>::infinity();
    const std::uint32_t patterns = 1u << (n - 1);
    for (std::uint32_t mask = 0; mask < patterns; ++mask) {
        auto sign = [mask](std::size_t v) { return v == 0 ? 1 : ((mask >> (v - 1)) & 1u ? -1 : 1); };
        double value = 0.0;
        for (std::size_t i = 0; i < edges.size(); ++i) value += inst.weights[i] * sign(edges[i].u) * sign(edges[i].v);
        if (value > best.value) {
            best.value = value;
            best.signs.assign(n, 1);
            for (std::size_t v = 0; v < n; ++v) best.signs[v] = sign(v);
        }
    }
    return best;
}

struct LocalSearchResult {
    UnitVectorAssignment assignment;
    double value = 0.0;
    std::size_t best_restart = 0;
};

/// Block coordinate ascent in R^r from `restarts` random starts (restart i
/// uses seed + i); returns the best, ties to the lowest restart index.
inline LocalSearchResult local_search_rank_r(const WeightedInstance& inst, unsigned r, unsigned restarts,
                                             std::uint64_t seed, double tol = 1e-12, int max_sweeps = 100000) {
    detail::require(r >= 1, "local_search_rank_r: r must be >= 1");
    detail::require(restarts >= 1, "local_search_rank_r: need at least one restart");
    LocalSearchResult best;
    best.value = -std::numeric_limits<double>::infinity();
    for (unsigned i = 0; i < restarts; ++i) {
        Matrix f = random_unit_rows(inst.num_vertices(), r, seed + i);
        detail::block_ascent(inst, f, tol, max_sweeps);
        UnitVectorAssignment cand(std::move(f));
        const double value = objective(inst, cand);
        if (value > best.value) {
            best.value = value;
            best.assignment = std::move(cand);
            best.best_restart = i;
        }
    }
    return best;
}

}  // namespace rankgroth
