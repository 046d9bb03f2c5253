#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <rankgroth/rankgroth.hpp>

namespace rg = rankgroth;

namespace {

const double kPi = std::acos(-1.0);

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Accumulates failure messages for one criterion.
struct Check {
    std::vector<std::string> failures;
    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
    bool ok() const { return failures.empty(); }
};

std::string fmt(double x, int digits = 12) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

const rg::OddSeries& inverse(unsigned r) {
    static std::vector<rg::OddSeries> cache;
    while (cache.size() < r) cache.push_back(rg::er_inverse_taylor(static_cast<unsigned>(cache.size() + 1), rg::kDefaultTerms));
    return cache[r - 1];
}

rg::WeightedInstance random_instance(std::size_t n, double p, std::uint64_t seed) {
    rg::CounterRng rng(seed, 404);
    rg::Graph g(n);
    std::vector<double> w;
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v)
            if (rng.uniform() < p) {
                g.add_edge(u, v);
                w.push_back(2.0 * rng.uniform() - 1.0);
            }
    if (g.num_edges() == 0) {
        g.add_edge(0, 1);
        w.push_back(1.0);
    }
    return rg::WeightedInstance(std::move(g), std::move(w));
}

// ---- 1 -------------------------------------------------------------------

const double kPrintedBipartite[10] = {1.782213, 1.404909, 1.280812, 1.216786, 1.177179,
                                      1.150060, 1.130249, 1.115110, 1.103150, 1.093456};
const double kPrintedTripartite[10] = {3.264251, 2.621596, 2.412700, 2.309224, 2.247399,
                                       2.206258, 2.176891, 2.154868, 2.137736, 2.124024};

Check criterion1() {
    Check c;
    const auto t0 = Clock::now();
    const auto rows = rg::grothendieck_table(10, {2.0, 3.0});
    const double elapsed = seconds_since(t0);
    c.expect(rows.size() == 20, "table has " + std::to_string(rows.size()) + " rows");
    for (const auto& row : rows) {
        const double printed = row.theta == 2.0 ? kPrintedBipartite[row.r - 1] : kPrintedTripartite[row.r - 1];
        c.expect(row.k_bound >= printed && row.k_bound <= printed + 1e-6,
                 "K(" + std::to_string(row.r) + ", theta=" + fmt(row.theta) + ") = " + fmt(row.k_bound) +
                     " vs printed " + fmt(printed));
    }
    c.expect(elapsed < 60.0, "table took " + fmt(elapsed, 4) + " s");
    return c;
}

// ---- 2 -------------------------------------------------------------------

Check criterion2() {
    Check c;
    const double b12 = rg::beta_rank(inverse(1), 2.0).beta;
    const double want_b = 2.0 * std::log(1.0 + std::sqrt(2.0)) / kPi;
    c.expect(std::abs(b12 - want_b) <= 1e-12, "beta(1,2) = " + fmt(b12, 17) + " vs " + fmt(want_b, 17));
    const double k13 = rg::beta_rank(inverse(1), 3.0).k_bound;
    const double want_k = kPi / (2.0 * std::asinh(0.5));
    c.expect(std::abs(k13 - want_k) <= 1e-9, "K(1,3) = " + fmt(k13, 15) + " vs " + fmt(want_k, 15));
    return c;
}

// ---- 3 -------------------------------------------------------------------

Check criterion3() {
    Check c;
    const double k21 = rg::beta_qr(inverse(1), 2, 2.0).k_bound;
    c.expect(std::abs(k21 - std::sqrt(2.0)) <= 1e-4, "K(2->1) = " + fmt(k21, 10) + ", sqrt 2 = " + fmt(std::sqrt(2.0), 10));
    const double k31 = rg::beta_qr(inverse(1), 3, 2.0).k_bound;
    c.expect(k31 <= 1.517 + 1e-3, "K(3->1) = " + fmt(k31, 10));
    const double k41 = rg::beta_qr(inverse(1), 4, 2.0).k_bound;
    c.expect(k41 <= kPi / 2.0 + 1e-3, "K(4->1) = " + fmt(k41, 10));
    for (unsigned r = 1; r <= 3; ++r) {
        // q >= 2 is required, so the r = 1 scan starts at q = 2
        double prev = 2.0;
        for (unsigned q = std::max(2u, r); q <= r + 4; ++q) {
            const double b = rg::beta_qr(inverse(r), q, 2.0).beta;
            c.expect(b < prev, "beta(" + std::to_string(q) + "->" + std::to_string(r) + ") = " + fmt(b) +
                                   " not below previous " + fmt(prev));
            prev = b;
        }
    }
    return c;
}

// ---- 4 -------------------------------------------------------------------

Check criterion4() {
    Check c;
    for (std::size_t n : {2u, 3u}) {
        const auto g = rg::complete_graph(n);
        const auto cert = rg::solve_theta_complement(g);
        const double clique = static_cast<double>(rg::greedy_clique(g).size());
        const double chrom = rg::greedy_chromatic_upper_bound(g);
        c.expect(cert.lambda == static_cast<double>(n) && clique == chrom && clique == static_cast<double>(n),
                 "theta(K" + std::to_string(n) + " bar) = " + fmt(cert.lambda, 15));
    }
    const double c5 = rg::solve_theta_complement(rg::cycle_graph(5)).lambda;
    c.expect(std::abs(c5 - std::sqrt(5.0)) <= 1e-4, "theta(C5 bar) = " + fmt(c5));

    double worst = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        rg::CounterRng rng(s, 77);
        const std::size_t n = 4 + s % 21;
        rg::Graph g(n);
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = u + 1; v < n; ++v)
                if (rng.uniform() < 0.35) g.add_edge(u, v);
        if (g.num_edges() == 0) g.add_edge(0, 1);
        const auto cert = rg::solve_theta_complement(g);
        const auto de = rg::build_dual_embedding(cert, g);
        const double half = (cert.lambda - 1.0) / 2.0;
        for (std::size_t u = 0; u < n; ++u) {
            worst = std::max(worst, std::abs(de.ST_gram(u, u)));
            worst = std::max(worst, std::abs(de.S_gram(u, u) - half));
            worst = std::max(worst, std::abs(de.T_gram(u, u) - half));
        }
        for (const auto& e : g.edges()) {
            worst = std::max(worst, std::abs(de.S_gram(e.u, e.v)));
            worst = std::max(worst, std::abs(de.T_gram(e.u, e.v)));
            worst = std::max(worst, std::abs(de.ST_gram(e.u, e.v) - 0.5));
            worst = std::max(worst, std::abs(de.ST_gram(e.v, e.u) - 0.5));
        }
    }
    c.expect(worst <= 1e-6, "dual embedding property residual " + fmt(worst, 4));
    return c;
}

// ---- 5 -------------------------------------------------------------------

Check criterion5() {
    Check c;
    for (unsigned r = 1; r <= 3; ++r)
        for (double t : {0.0, 0.5, -0.5, 0.99}) {
            const auto ic = rg::identity_check(r, t, 1'000'000, 5000 + r);
            const double z = std::abs(ic.mc_mean - ic.series_value) / ic.std_error;
            c.expect(z <= 4.0, "r=" + std::to_string(r) + " t=" + fmt(t) + ": " + fmt(z, 3) + " standard errors");
        }
    double worst = 0.0;
    for (unsigned r : {2u, 3u, 5u})
        for (int i = 0; i <= 20; ++i) {
            const double t = -1.0 + i / 10.0;
            worst = std::max(worst, std::abs(rg::er_eval_hyp(r, t) - rg::er_eval_quadrature(r, t)));
        }
    c.expect(worst <= 1e-8, "hyp vs quadrature max difference " + fmt(worst, 4));
    return c;
}

// ---- 6 -------------------------------------------------------------------

Check criterion6() {
    Check c;
    double worst = 0.0;
    for (unsigned r = 1; r <= 10; ++r) {
        const rg::SeriesEvaluator inv(inverse(r));
        for (int i = -99; i <= 99; ++i) {
            const double t = i / 100.0;
            worst = std::max(worst, std::abs(rg::er_eval_hyp(r, inv.value(t)) - t));
        }
        c.expect(inverse(r).coeffs.at(1) < 0, "b_3 >= 0 for r = " + std::to_string(r));
    }
    c.expect(worst <= 1e-9, "round trip max error " + fmt(worst, 4));

    const auto base = rg::grothendieck_table(10, {2.0, 3.0});
    rg::SeriesOptions fine;
    fine.terms = 2 * rg::kDefaultTerms;
    fine.precision_bits = 2 * rg::kDefaultPrecisionBits;
    const auto doubled = rg::grothendieck_table(10, {2.0, 3.0}, 1e-12, fine);
    double shift = 0.0;
    for (std::size_t i = 0; i < base.size() && i < doubled.size(); ++i)
        shift = std::max(shift, std::abs(base[i].k_bound - doubled[i].k_bound));
    c.expect(base.size() == doubled.size() && shift < 1e-9, "doubling terms and precision shifts K by " + fmt(shift, 4));
    return c;
}

// ---- 7 -------------------------------------------------------------------

Check criterion7() {
    Check c;
    const auto t0 = Clock::now();
    const auto g = rg::lattice_graph({4, 4, 4});
    rg::CounterRng rng(1, 0xC0FFEE);
    std::vector<double> w(g.num_edges());
    for (auto& x : w) x = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const rg::WeightedInstance inst(g, w);
    const auto rep = rg::algorithm_a(inst, 3, 2000, 1, rg::default_theta_mode(g));
    const double ratio = rep.ratio();
    const double se = rep.std_error / rep.sdp_inf_reference;
    const double elapsed = seconds_since(t0);
    c.expect(ratio >= 0.78 - 4.0 * se, "mean/SDP_inf = " + fmt(ratio, 6) + " (stderr " + fmt(se, 3) + ")");
    c.expect(elapsed < 300.0, "pipeline took " + fmt(elapsed, 4) + " s");
    std::printf("  lattice 4x4x4, r = 3: mean/SDP_inf = %.6f +- %.6f, beta(3,2) = %.6f, %.1f s\n", ratio, se,
                rep.beta_reference, elapsed);
    return c;
}

// ---- 8 -------------------------------------------------------------------

Check criterion8() {
    Check c;
    int hits = 0;
    const int total = 50;
    for (int s = 0; s < total; ++s) {
        const auto inst = random_instance(4 + s % 9, 0.5, 900 + s);
        const double opt1 = rg::brute_force_rank1(inst).value;
        const double ls = rg::local_search_rank_r(inst, 1, 200, 31 + s).value;
        if (opt1 <= ls + 1e-9) ++hits;
        const auto sdp = rg::solve_sdp_infinity(inst, 1e-13);
        c.expect(sdp.value >= opt1 - 1e-9 && sdp.dual_bound >= opt1 - 1e-12,
                 "instance " + std::to_string(s) + ": SDP_inf " + fmt(sdp.value) + " (dual " + fmt(sdp.dual_bound) +
                     ") < OPT_1 " + fmt(opt1));
        const auto rep = rg::algorithm_a(inst, 1, 2000, 61 + s, rg::default_theta_mode(inst.graph));
        c.expect(rep.mean_value >= rep.beta_reference * rep.sdp_inf_reference - 4.0 * rep.std_error,
                 "instance " + std::to_string(s) + ": rounding mean " + fmt(rep.mean_value) + " below beta * SDP_inf " +
                     fmt(rep.beta_reference * rep.sdp_inf_reference));
    }
    c.expect(hits >= 48, "local search matched brute force on " + std::to_string(hits) + " of 50");
    return c;
}

// ---- 9 -------------------------------------------------------------------

double tail_integral(unsigned r, double radius) {
    auto f = [r](double rho) { return std::pow(rho, r) * std::exp(-0.5 * r * rho * rho); };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, radius, radius + 40.0, 15, 1e-14);
}

double factor_by_quadrature(unsigned r, double lambda, double radius) {
    const double bracket = 0.5 + 2.0 * lambda * std::pow(r, r / 2.0) / std::tgamma(r / 2.0) * tail_integral(r, radius);
    return (1.0 - bracket * bracket) / (radius * radius);
}

Check criterion9() {
    Check c;
    double worst = 0.0;
    for (unsigned r : {1u, 2u, 3u, 5u, 8u, 10u})
        for (double lambda : {2.0, 5.0, 10.0, 100.0})
            for (double radius : {2.0, 2.5, 3.0, 3.5, 4.0})
                worst = std::max(worst, std::abs(rg::truncation_bound_factor(r, lambda, radius) -
                                                 factor_by_quadrature(r, lambda, radius)));
    c.expect(worst <= 1e-8, "factor vs quadrature max difference " + fmt(worst, 4));

    int positive_cases = 0;
    for (unsigned r = 1; r <= 10; ++r)
        for (double lambda : {2.0, 3.0, 5.0, 10.0, 30.0, 100.0}) {
            if (lambda > std::exp(static_cast<double>(r)) * 10.0) continue;
            const double hi = 2.0 + std::sqrt(4.0 * std::log(lambda) / r);
            double scan = -1e300;
            for (int i = 0; i <= 200; ++i) scan = std::max(scan, factor_by_quadrature(r, lambda, 2.0 + (hi - 2.0) * i / 200));
            if (scan <= 0.0) continue;
            ++positive_cases;
            const auto best = rg::best_truncation_radius(r, lambda);
            c.expect(best.positive && best.factor >= scan - 1e-8,
                     "r=" + std::to_string(r) + " lambda=" + fmt(lambda) + ": best factor " + fmt(best.factor) +
                         " vs scanned " + fmt(scan));
        }
    c.expect(positive_cases > 0, "no grid case with a positive factor");
    return c;
}

// ---- 10 ------------------------------------------------------------------

Check criterion10() {
    Check c;
    const auto inst = rg::xor_game_instance(rg::chsh_game());
    const double classical = (1.0 + rg::brute_force_rank1(inst).value) / 2.0;
    c.expect(classical == 0.75, "classical value " + fmt(classical, 17));
    const double upper = (1.0 + rg::solve_sdp_infinity(inst).value) / 2.0;
    c.expect(std::abs(upper - 0.85355) <= 1e-4, "entangled upper bound " + fmt(upper));
    return c;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
        {"constants table", criterion1},      {"closed forms", criterion2},
        {"q -> r constants", criterion3},     {"theta solver", criterion4},
        {"rounding identity", criterion5},    {"series quality", criterion6},
        {"lattice pipeline", criterion7},     {"oracle chain", criterion8},
        {"truncated rounding", criterion9},   {"CHSH", criterion10},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = Clock::now();
        Check c;
        try {
            c = criteria[i].second();
        } catch (const std::exception& e) {
            c.failures.push_back(std::string("exception: ") + e.what());
        }
        std::printf("%s %zu %s (%.1f s)\n", c.ok() ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    seconds_since(t0));
        for (const auto& f : c.failures) std::printf("  %s\n", f.c_str());
        std::fflush(stdout);
        if (!c.ok()) ++failed;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
