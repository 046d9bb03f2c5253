#pragma once

// Theta number of the complement graph,
//   theta(Gbar) = min { lambda : Z >= 0, Z(u,u) = lambda - 1, Z(u,v) = -1 on edges },
// by a primal-dual interior point method (bisection with alternating
// projections for large constraint counts), and the s/t dual embedding
// blocks A = (lambda-1)(J+Z)/(2 lambda), B = ((lambda-1)J - Z)/(2 lambda).

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "graph.hpp"

namespace rankgroth {

struct ThetaCertificate {
    double lambda = 0.0;
    Matrix Z;
    double psd_residual = 0.0;     // max(0, -lambda_min(Z))
    double affine_residual = 0.0;  // max deviation from the linear constraints
    double lower_bound = 0.0;      // certified lower bound on theta(Gbar)
    int iterations = 0;            // total projection rounds
    int bisection_steps = 0;
    bool converged = true;
    std::string source;  // "coloring" or "solver"
};

enum class ThetaMethod { automatic, interior_point, alternating_projections };

struct ThetaOptions {
    double tol = 1e-6;
    int max_inner = 50000;
    ThetaMethod method = ThetaMethod::automatic;
    // automatic uses the interior point method up to this many constraints
    std::size_t max_ipm_constraints = 2500;
};

/// Recomputes both residuals of Z against lambda and the graph.
inline void update_residuals(ThetaCertificate& cert, const Graph& g) {
    const auto n = g.num_vertices();
    detail::require(static_cast<std::size_t>(cert.Z.rows()) == n && static_cast<std::size_t>(cert.Z.cols()) == n,
                    "theta certificate: Z has wrong size");
    double aff = (cert.Z - cert.Z.transpose()).cwiseAbs().maxCoeff();
    for (std::size_t u = 0; u < n; ++u) aff = std::max(aff, std::abs(cert.Z(u, u) - (cert.lambda - 1.0)));
    for (const auto& e : g.edges()) aff = std::max(aff, std::abs(cert.Z(e.u, e.v) + 1.0));
    cert.affine_residual = aff;
    const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(cert.Z, Eigen::EigenvaluesOnly).eigenvalues()(0);
    cert.psd_residual = std::max(0.0, -lmin);
}

/// Z = k C - J from a proper coloring (C(u,v) = 1 on equal colors), feasible
/// with lambda = k, the number of colors. Same-colored vertices map to the
/// same vertex of a regular (k-1)-simplex.
inline ThetaCertificate coloring_certificate(const Graph& g, const std::vector<int>& colors) {
    detail::require(g.num_edges() >= 1, "coloring_certificate: graph has no edges");
    detail::require(is_proper_coloring(g, colors), "coloring_certificate: coloring is not proper");
    const int k = color_count(colors);
    const auto n = g.num_vertices();
    ThetaCertificate cert;
    cert.lambda = k;
    cert.Z = Matrix::Constant(n, n, -1.0);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v)
            if (colors[u] == colors[v]) cert.Z(u, v) = k - 1.0;
    cert.lower_bound = 2.0;
    cert.source = "coloring";
    update_residuals(cert, g);
    return cert;
}

namespace detail {

// Outcome of alternating projections at a fixed lambda.
struct ProjectionRun {
    bool feasible = false;
    bool infeasible = false;
    double upper = 0.0;  // certified feasible lambda when feasible
    Matrix Z;
    double lower = 0.0;  // best dual lower bound seen
    int iterations = 0;
};

inline void affine_reset(Matrix& q, const Graph& g, double lambda) {
    q = 0.5 * (q + q.transpose()).eval();
    q.diagonal().setConstant(lambda - 1.0);
    for (const auto& e : g.edges()) q(e.u, e.v) = q(e.v, e.u) = -1.0;
}

// 1 + 2 sum_E Y(u,v) / tr Y for Y >= 0 vanishing off edges and diagonal.
inline double dual_lower_bound(Matrix y, const Graph& g) {
    const auto n = g.num_vertices();
    Matrix masked = Matrix::Zero(n, n);
    masked.diagonal() = y.diagonal();
    for (const auto& e : g.edges()) masked(e.u, e.v) = masked(e.v, e.u) = y(e.u, e.v);
    const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(masked, Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (lmin < 0.0) masked.diagonal().array() += -lmin;
    const double trace = masked.trace();
    if (trace <= 0.0) return 0.0;
    double edge_sum = 0.0;
    for (const auto& e : g.edges()) edge_sum += masked(e.u, e.v);
    return 1.0 + 2.0 * edge_sum / trace;
}

// Alternates Q = affine(P), P = psd(Q). Feasible once Q + eps I (eps = -lambda_min(Q))
// beats `accept_upper`; infeasible once the dual bound reaches `accept_lower`.
inline ProjectionRun project_at(const Graph& g, Matrix& p, double lambda, double accept_upper, double accept_lower,
                                int max_inner) {
    ProjectionRun run;
    Matrix q = p;
    Eigen::SelfAdjointEigenSolver<Matrix> eig;
    for (run.iterations = 1; run.iterations <= max_inner; ++run.iterations) {
        q = p;
        affine_reset(q, g, lambda);
        eig.compute(q);
        const Vector& d = eig.eigenvalues();
        const double eps = std::max(0.0, -d(0));
        if (lambda + eps <= accept_upper) {
            run.feasible = true;
            run.upper = lambda + eps;
            run.Z = q;
            run.Z.diagonal().array() += eps;
            return run;
        }
        const Matrix& v = eig.eigenvectors();
        p = v * d.cwiseMax(0.0).asDiagonal() * v.transpose();
        if (run.iterations % 10 == 0 || run.iterations == 1) {
            const Matrix y = v * (-d).cwiseMax(0.0).asDiagonal() * v.transpose();
            run.lower = std::max(run.lower, dual_lower_bound(y, g));
            if (run.lower >= accept_lower) {
                run.infeasible = true;
                return run;
            }
        }
    }
    run.iterations = max_inner;
    return run;
}

// Sparse symmetric constraint matrix as (row, col, value) triplets, both
// triangles listed.
struct SparseSym {
    std::vector<std::tuple<std::size_t, std::size_t, double>> entries;
    double dot(const Matrix& m) const {
        double s = 0.0;
        for (const auto& [p, q, a] : entries) s += a * m(p, q);
        return s;
    }
    void add_to(Matrix& m, double scale) const {
        for (const auto& [p, q, a] : entries) m(p, q) += scale * a;
    }
};

// Largest step in (0, 1] keeping x + alpha dx positive definite, damped by 0.95.
inline double max_step(const Matrix& x, const Matrix& dx) {
    Eigen::LLT<Matrix> llt(x);
    if (llt.info() != Eigen::Success) return 0.0;
    const Matrix linv = llt.matrixL().solve(Matrix::Identity(x.rows(), x.cols()));
    const Matrix w = linv * dx * linv.transpose();
    const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (w + w.transpose()), Eigen::EigenvaluesOnly)
                            .eigenvalues()(0);
    return lmin >= 0.0 ? 1.0 : std::min(1.0, -0.95 / lmin);
}

// Exactly feasible Z for lambda = 1 + tr(X)/n + eps: snap X to the affine
// set, then shift by the most negative eigenvalue eps.
inline std::pair<double, Matrix> shifted_certificate(const Matrix& x, const Graph& g) {
    Matrix z = x;
    const double lambda0 = 1.0 + z.trace() / static_cast<double>(g.num_vertices());
    affine_reset(z, g, lambda0);
    const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(z, Eigen::EigenvaluesOnly).eigenvalues()(0);
    const double eps = std::max(0.0, -lmin);
    z.diagonal().array() += eps;
    return {lambda0 + eps, std::move(z)};
}

struct IpmResult {
    double upper = std::numeric_limits<double>::infinity();
    Matrix Z;
    double lower = 0.0;
    int iterations = 0;
};

// Infeasible primal-dual path following with the HKM direction and a
// Mehrotra-style centering parameter, for
//   min <I/n, Z>  s.t.  Z(u,u) = Z(u+1,u+1),  2 Z(u,v) = -2 on edges,  Z >= 0,
// so theta(Gbar) = 1 + <I/n, Z>. Every iterate is turned into certified
// bounds; the best of each is kept, since on degenerate faces the Schur
// system loses accuracy before the nominal gap closes.
inline IpmResult theta_interior_point(const Graph& g, double tol, int max_iter = 100) {
    const auto n = g.num_vertices();
    std::vector<SparseSym> a;
    std::vector<double> b;
    for (std::size_t u = 0; u + 1 < n; ++u) {
        a.push_back({{{u, u, 1.0}, {u + 1, u + 1, -1.0}}});
        b.push_back(0.0);
    }
    for (const auto& e : g.edges()) {
        a.push_back({{{e.u, e.v, 1.0}, {e.v, e.u, 1.0}}});
        b.push_back(-2.0);
    }
    const auto m = a.size();
    const Matrix c = Matrix::Identity(n, n) / static_cast<double>(n);
    const Vector bv = Eigen::Map<Vector>(b.data(), static_cast<Eigen::Index>(m));

    IpmResult res;
    Matrix x = static_cast<double>(n) * Matrix::Identity(n, n);
    Matrix s = c;
    Vector y = Vector::Zero(m);
    auto apply_a = [&](const Matrix& mat) {
        Vector out(m);
        for (std::size_t i = 0; i < m; ++i) out(i) = a[i].dot(mat);
        return out;
    };
    auto apply_at = [&](const Vector& v) {
        Matrix out = Matrix::Zero(n, n);
        for (std::size_t i = 0; i < m; ++i) a[i].add_to(out, v(i));
        return out;
    };

    for (res.iterations = 1; res.iterations <= max_iter; ++res.iterations) {
        auto [upper, z] = shifted_certificate(x, g);
        if (upper < res.upper) {
            res.upper = upper;
            res.Z = std::move(z);
        }
        res.lower = std::max(res.lower, dual_lower_bound(s, g));
        if (res.upper - res.lower <= 1e-2 * tol) break;

        const Vector rp = bv - apply_a(x);
        const Matrix rd = c - apply_at(y) - s;
        const double mu = (x.cwiseProduct(s)).sum() / static_cast<double>(n);

        Eigen::LLT<Matrix> s_llt(s);
        if (s_llt.info() != Eigen::Success) break;
        const Matrix sinv = s_llt.solve(Matrix::Identity(n, n));

        Matrix schur(m, m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i; j < m; ++j) {
                double v = 0.0;
                for (const auto& [p, q, ai] : a[i].entries)
                    for (const auto& [r, t, aj] : a[j].entries) v += ai * aj * x(p, r) * sinv(t, q);
                schur(i, j) = schur(j, i) = v;
            }
        const Eigen::LDLT<Matrix> schur_f(schur);
        const Vector base = rp + apply_a(x) + apply_a(x * rd * sinv);

        auto direction = [&](double target_mu, Matrix& dx, Vector& dy, Matrix& ds) {
            dy = schur_f.solve(base - target_mu * apply_a(sinv));
            ds = rd - apply_at(dy);
            dx = target_mu * sinv - x - x * ds * sinv;
            dx = 0.5 * (dx + dx.transpose()).eval();
        };
        Matrix dx, ds;
        Vector dy;
        direction(0.0, dx, dy, ds);
        if (!dy.allFinite() || !dx.allFinite()) break;
        const double ap0 = max_step(x, dx), ad0 = max_step(s, ds);
        const double mu_aff = ((x + ap0 * dx).cwiseProduct(s + ad0 * ds)).sum() / static_cast<double>(n);
        const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);
        direction(sigma * mu, dx, dy, ds);
        if (!dy.allFinite() || !dx.allFinite()) break;
        const double ap = max_step(x, dx), ad = max_step(s, ds);
        if (ap <= 0.0 || ad <= 0.0) break;
        x += ap * dx;
        x = 0.5 * (x + x.transpose()).eval();
        y += ad * dy;
        s += ad * ds;
        s = 0.5 * (s + s.transpose()).eval();
    }
    res.iterations = std::min(res.iterations, max_iter);
    return res;
}

}  // namespace detail

inline ThetaCertificate solve_theta_interior_point(const Graph& g, ThetaOptions opts = {}) {
    auto ipm = detail::theta_interior_point(g, opts.tol);
    ThetaCertificate cert;
    cert.source = "solver";
    cert.iterations = ipm.iterations;
    cert.lambda = ipm.upper;
    cert.Z = std::move(ipm.Z);
    // A greedy coloring is an exact certificate whenever it is not worse,
    // or when it meets the clique bound (then theta is pinned exactly).
    const auto colors = greedy_coloring(g);
    const double clique = static_cast<double>(greedy_clique(g).size());
    const double chromatic = color_count(colors);
    if (chromatic <= cert.lambda || chromatic <= clique) {
        auto col = coloring_certificate(g, colors);
        cert.lambda = col.lambda;
        cert.Z = std::move(col.Z);
        cert.source = col.source;
    }
    cert.lower_bound = std::min(cert.lambda, std::max({2.0, clique, ipm.lower}));
    cert.converged = cert.lambda - cert.lower_bound <= opts.tol;
    update_residuals(cert, g);
    return cert;
}

/// Bisection over [max(2, clique), greedy chromatic bound]. Every accepted
/// upper end carries an exactly feasible Z; lower ends come from dual bounds.
inline ThetaCertificate solve_theta_projections(const Graph& g, ThetaOptions opts = {}) {
    ThetaCertificate best = coloring_certificate(g, greedy_coloring(g));
    best.source = "solver";
    double hi = best.lambda;
    double lo = std::max(2.0, static_cast<double>(greedy_clique(g).size()));
    Matrix p = best.Z;
    while (hi - lo > opts.tol) {
        const double mid = 0.5 * (lo + hi);
        const double accept_upper = mid + 0.25 * (hi - mid);
        const double accept_lower = mid - 0.25 * (mid - lo);
        auto run = detail::project_at(g, p, mid, accept_upper, accept_lower, opts.max_inner);
        best.iterations += run.iterations;
        ++best.bisection_steps;
        lo = std::max(lo, std::min(run.lower, hi));
        if (run.feasible) {
            hi = run.upper;
            best.lambda = run.upper;
            best.Z = std::move(run.Z);
        } else if (!run.infeasible) {
            best.converged = false;
            break;
        }
    }
    best.lower_bound = std::min(lo, best.lambda);
    update_residuals(best, g);
    return best;
}

inline ThetaCertificate solve_theta_complement(const Graph& g, ThetaOptions opts = {}) {
    detail::require(g.num_edges() >= 1, "solve_theta_complement: graph has no edges");
    detail::require(g.num_vertices() <= 128, "solve_theta_complement: n must be <= 128");
    detail::require(opts.tol > 0.0 && opts.max_inner >= 1, "solve_theta_complement: bad options");
    const std::size_t constraints = g.num_vertices() - 1 + g.num_edges();
    const bool use_ipm = opts.method == ThetaMethod::interior_point ||
                         (opts.method == ThetaMethod::automatic && constraints <= opts.max_ipm_constraints);
    return use_ipm ? solve_theta_interior_point(g, opts) : solve_theta_projections(g, opts);
}

/// Either solves the SDP or builds the coloring certificate for chi:k.
struct ThetaMode {
    enum class Kind { solve, chi };
    Kind kind = Kind::solve;
    int k = 0;

    static ThetaMode solver() { return {}; }
    static ThetaMode chi(int k) {
        detail::require(k >= 2, "theta mode chi:k needs k >= 2");
        return {Kind::chi, k};
    }
    static ThetaMode parse(const std::string& text) {
        if (text == "solve") return solver();
        if (text.rfind("chi:", 0) == 0) {
            int k = 0;
            try {
                std::size_t used = 0;
                k = std::stoi(text.substr(4), &used);
                if (used != text.size() - 4) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw std::invalid_argument("theta mode: malformed '" + text + "'");
            }
            return chi(k);
        }
        throw std::invalid_argument("theta mode must be 'solve' or 'chi:k', got '" + text + "'");
    }
    std::string str() const { return kind == Kind::solve ? "solve" : "chi:" + std::to_string(k); }
};

inline ThetaCertificate theta_certificate(const Graph& g, const ThetaMode& mode, ThetaOptions opts = {}) {
    if (mode.kind == ThetaMode::Kind::solve) return solve_theta_complement(g, opts);
    auto cert = coloring_certificate(g, find_coloring(g, mode.k));
    // A coloring may use fewer than k colors; k itself is still feasible.
    if (cert.lambda < mode.k) {
        const auto n = g.num_vertices();
        cert.Z += (mode.k - cert.lambda) * Matrix::Identity(n, n);
        cert.lambda = mode.k;
        update_residuals(cert, g);
    }
    return cert;
}

inline nlohmann::json to_json(const ThetaCertificate& c) {
    nlohmann::json z = nlohmann::json::array();
    for (Eigen::Index i = 0; i < c.Z.rows(); ++i) {
        std::vector<double> row(c.Z.cols());
        for (Eigen::Index j = 0; j < c.Z.cols(); ++j) row[j] = c.Z(i, j);
        z.push_back(row);
    }
    return {{"lambda", c.lambda},
            {"lower_bound", c.lower_bound},
            {"residuals", {{"psd", c.psd_residual}, {"affine", c.affine_residual}}},
            {"iterations", c.iterations},
            {"bisection_steps", c.bisection_steps},
            {"converged", c.converged},
            {"source", c.source},
            {"Z", z}};
}

struct DualEmbedding {
    Matrix S_gram;
    Matrix T_gram;
    Matrix ST_gram;
    double lambda = 0.0;

    /// Gram matrix of (s(u))_u followed by (t(u))_u.
    Matrix block_gram() const {
        const auto n = S_gram.rows();
        Matrix u(2 * n, 2 * n);
        u << S_gram, ST_gram, ST_gram.transpose(), T_gram;
        return u;
    }
};

/// Builds the Gram blocks of s and t and checks properties
///   1: s(u).t(u) = 0       2: |s(u)|^2 = |t(u)|^2 = (lambda-1)/2
///   3: s(u).s(v) = 0 on edges   4: s(u).t(v) = 1/2 on edges
///   5: A + B >= 0 and A - B >= 0
/// Eigenvalues of A +- B in [-1e-8, 0) are clipped to zero.
inline DualEmbedding build_dual_embedding(const ThetaCertificate& cert, const Graph& g) {
    ThetaCertificate checked = cert;
    update_residuals(checked, g);
    if (checked.psd_residual > 1e-6 || checked.affine_residual > 1e-6)
        throw numerical_error("build_dual_embedding: certificate residuals exceed 1e-6");
    detail::require(cert.lambda >= 2.0 - 1e-12, "build_dual_embedding: lambda must be >= 2");
    const auto n = g.num_vertices();
    const double lambda = cert.lambda;
    const Matrix j = Matrix::Ones(n, n);
    const Matrix zs = 0.5 * (cert.Z + cert.Z.transpose());
    const Matrix a = (lambda - 1.0) * (j + zs) / (2.0 * lambda);
    const Matrix b = ((lambda - 1.0) * j - zs) / (2.0 * lambda);

    auto clip = [](const Matrix& m, int property) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
        if (eig.eigenvalues()(0) < -1e-8)
            throw numerical_error("build_dual_embedding: property " + std::to_string(property) +
                                  " violated (A +- B not PSD)");
        if (eig.eigenvalues()(0) >= 0.0) return m;
        const Matrix& v = eig.eigenvectors();
        return Matrix(v * eig.eigenvalues().cwiseMax(0.0).asDiagonal() * v.transpose());
    };
    const Matrix plus = clip(a + b, 5);
    const Matrix minus = clip(a - b, 5);

    DualEmbedding de;
    de.lambda = lambda;
    de.S_gram = 0.5 * (plus + minus);
    de.T_gram = de.S_gram;
    de.ST_gram = 0.5 * (plus - minus);

    constexpr double kTol = 1e-6;
    auto fail = [](int property) {
        throw numerical_error("build_dual_embedding: property " + std::to_string(property) + " violated");
    };
    for (std::size_t u = 0; u < n; ++u) {
        if (std::abs(de.ST_gram(u, u)) > kTol) fail(1);
        if (std::abs(de.S_gram(u, u) - (lambda - 1.0) / 2.0) > kTol) fail(2);
    }
    for (const auto& e : g.edges()) {
        if (std::abs(de.S_gram(e.u, e.v)) > kTol) fail(3);
        if (std::abs(de.ST_gram(e.u, e.v) - 0.5) > kTol || std::abs(de.ST_gram(e.v, e.u) - 0.5) > kTol) fail(4);
    }
    return de;
}

}  // namespace rankgroth
