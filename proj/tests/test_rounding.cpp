#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include <rankgroth/rounding.hpp>

namespace rg = rankgroth;

namespace {

const double kPi = std::acos(-1.0);

rg::WeightedInstance random_instance(std::size_t n, double p, std::uint64_t seed) {
    rg::CounterRng rng(seed, 31);
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

}  // namespace

TEST(ProjectNormalize, IdentityProjection) {
    const rg::UnitVectorAssignment g(rg::random_unit_rows(5, 3, 1));
    rg::UnitVectorAssignment h;
    ASSERT_TRUE(rg::project_normalize(g, rg::Matrix::Identity(3, 3), h));
    EXPECT_LE((h.vectors - g.vectors).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_THROW(rg::project_normalize(g, rg::Matrix::Identity(2, 2), h), std::invalid_argument);
    // a zero image is reported, not divided by
    EXPECT_FALSE(rg::project_normalize(g, rg::Matrix::Zero(2, 3), h));
}

TEST(GaussianRound, EqualInputsGiveEqualOutputs) {
    rg::Matrix m(3, 4);
    m << 1, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0;
    const auto h = rg::gaussian_round(rg::UnitVectorAssignment(m), 3, 5);
    EXPECT_EQ(h.vectors.row(0), h.vectors.row(2));
    EXPECT_EQ(h.dim(), 3u);
    EXPECT_LE(h.max_norm_defect(), 1e-15);
}

TEST(GaussianRound, RankOneGivesSigns) {
    const rg::UnitVectorAssignment g(rg::random_unit_rows(20, 6, 2));
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto h = rg::gaussian_round(g, 1, s);
        for (std::size_t u = 0; u < 20; ++u) EXPECT_EQ(std::abs(h.vectors(u, 0)), 1.0);
    }
}

TEST(GaussianRound, Deterministic) {
    const rg::UnitVectorAssignment g(rg::random_unit_rows(8, 5, 3));
    EXPECT_EQ(rg::gaussian_round(g, 2, 9, 4).vectors, rg::gaussian_round(g, 2, 9, 4).vectors);
    EXPECT_NE(rg::gaussian_round(g, 2, 9, 4).vectors, rg::gaussian_round(g, 2, 9, 5).vectors);
}

TEST(EstimateRounding, AlignedEdgeIsExact) {
    const auto inst = rg::uniform_instance(rg::complete_graph(2), 1.0);
    rg::Matrix m(2, 3);
    m << 0, 1, 0, 0, 1, 0;
    for (unsigned r : {1u, 2u, 4u}) {
        const auto rep = rg::estimate_rounding(inst, rg::UnitVectorAssignment(m), r, 100, 1);
        EXPECT_NEAR(rep.mean_value, 1.0, 1e-14);
        EXPECT_NEAR(rep.std_error, 0.0, 1e-14);
    }
}

TEST(EstimateRounding, EdgeMeanMatchesHyp) {
    // E[h(u).h(v)] = E_r(g(u).g(v)) on a single edge
    const auto inst = rg::uniform_instance(rg::complete_graph(2), 1.0);
    const double t = 0.4;
    rg::Matrix m(2, 2);
    m << 1, 0, t, std::sqrt(1 - t * t);
    for (unsigned r : {1u, 3u}) {
        const auto rep = rg::estimate_rounding(inst, rg::UnitVectorAssignment(m), r, 100000, 12);
        EXPECT_NEAR(rep.mean_value, rg::er_eval_hyp(r, t), 4.0 * rep.std_error);
        EXPECT_NEAR(rep.best_value, 1.0, 1e-6);
    }
    EXPECT_NEAR(rg::er_eval_hyp(1, t), 2.0 / kPi * std::asin(t), 1e-14);
}

TEST(EstimateRounding, ReportJson) {
    const auto inst = rg::uniform_instance(rg::complete_graph(3), -1.0);
    const auto rep = rg::estimate_rounding(inst, rg::UnitVectorAssignment(rg::random_unit_rows(3, 3, 1)), 2, 10, 4);
    const auto j = rg::to_json(rep);
    EXPECT_EQ(j.at("samples").get<std::size_t>(), 10u);
    EXPECT_TRUE(j.contains("best_assignment"));
    EXPECT_FALSE(rg::to_json(rep, false).contains("best_assignment"));
}

TEST(TruncatedRound, BallValuedAndScaled) {
    const rg::UnitVectorAssignment f(rg::random_unit_rows(30, 10, 5));
    for (unsigned r : {1u, 2u, 5u}) {
        const auto h = rg::truncated_round(f, r, 2.0, 7);
        EXPECT_TRUE(h.ball_valued);
        EXPECT_LE(h.max_norm_defect(), 1e-12);
        // huge radius: nothing is truncated, so h = Z f / R exactly
        const auto big = rg::truncated_round(f, r, 1e6, 7);
        for (std::size_t u = 0; u < 30; ++u) EXPECT_LE(big.vectors.row(u).norm(), 1e-4);
        EXPECT_THROW(rg::truncated_round(f, r, 1.5, 7), std::invalid_argument);
    }
}

TEST(TruncatedRound, EntriesHaveVarianceOneOverR) {
    // with nothing truncated, E |Z f(u)|^2 = |f(u)|^2 = 1
    const rg::UnitVectorAssignment f(rg::random_unit_rows(1, 4, 6));
    const double radius = 1e3;
    for (unsigned r : {1u, 3u}) {
        double s = 0.0;
        const int n = 40000;
        for (int i = 0; i < n; ++i) s += radius * radius * rg::truncated_round(f, r, radius, 3, i).vectors.squaredNorm();
        EXPECT_NEAR(s / n, 1.0, 5.0 * std::sqrt(2.0 / r / n));
    }
}

TEST(TruncatedRound, LiftNeverDecreasesObjective) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto inst = random_instance(12, 0.4, s);
        const rg::UnitVectorAssignment f(rg::random_unit_rows(12, 12, s));
        const auto h = rg::truncated_round(f, 3, 2.5, s);
        const auto lifted = rg::truncated_round(inst, f, 3, 2.5, s, true);
        EXPECT_GE(rg::objective(inst, lifted), rg::objective(inst, h) - 1e-12);
        EXPECT_FALSE(lifted.ball_valued);
        EXPECT_LE(lifted.max_norm_defect(), 1e-12);
    }
}

TEST(AlgorithmA, SingleEdge) {
    const auto inst = rg::uniform_instance(rg::complete_graph(2), 1.0);
    for (unsigned r : {1u, 2u}) {
        const auto rep = rg::algorithm_a(inst, r, 2000, 3, rg::ThetaMode::chi(2));
        EXPECT_NEAR(rep.sdp_inf_reference, 1.0, 1e-12);
        EXPECT_NEAR(rep.lambda, 2.0, 0.0);
        // the embedded edge has inner product E_r^{-1}(beta), so rounding returns beta on average
        EXPECT_NEAR(rep.mean_value, rep.beta_reference, 4.0 * rep.std_error);
        EXPECT_EQ(rep.theta_mode, "chi:2");
    }
}

TEST(AlgorithmA, TriangleWithThreeColors) {
    const auto inst = rg::uniform_instance(rg::complete_graph(3), -1.0);
    const auto rep = rg::algorithm_a(inst, 2, 20000, 8, rg::ThetaMode::chi(3));
    EXPECT_NEAR(rep.sdp_inf_reference, 1.5, 1e-6);
    EXPECT_EQ(rep.lambda, 3.0);
    EXPECT_GE(rep.ratio(), rep.beta_reference - 4.0 * rep.std_error / rep.sdp_inf_reference);
    EXPECT_LE(rep.best_value, 1.5 + 1e-9);
}

TEST(AlgorithmA, BipartiteLatticeGuarantee) {
    rg::CounterRng rng(4, 0);
    const auto g = rg::lattice_graph({4, 4});
    std::vector<double> w(g.num_edges());
    for (auto& x : w) x = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const rg::WeightedInstance inst(g, w);
    for (unsigned r : {1u, 2u, 3u}) {
        const auto rep = rg::algorithm_a(inst, r, 4000, 21, rg::default_theta_mode(g));
        EXPECT_GE(rep.mean_value, rep.beta_reference * rep.sdp_inf_reference - 4.0 * rep.std_error) << r;
        EXPECT_GE(rep.gram_min_eigenvalue, -1e-8);
        EXPECT_LE(rep.max_renormalization, 1e-6);
    }
}

TEST(AlgorithmA, DeterministicAndValidated) {
    const auto inst = random_instance(9, 0.5, 2);
    const auto a = rg::algorithm_a(inst, 2, 300, 5, rg::ThetaMode::solver());
    const auto b = rg::algorithm_a(inst, 2, 300, 5, rg::ThetaMode::solver());
    EXPECT_EQ(a.mean_value, b.mean_value);
    EXPECT_EQ(a.best_sample, b.best_sample);
    EXPECT_THROW(rg::algorithm_a(inst, 0, 10, 1, rg::ThetaMode::solver()), std::invalid_argument);
    EXPECT_THROW(rg::algorithm_a(rg::WeightedInstance(rg::Graph(3), {}), 1, 10, 1, rg::ThetaMode::solver()),
                 std::invalid_argument);
}

TEST(IdentityCheck, MatchesSeries) {
    for (unsigned r : {1u, 2u, 4u})
        for (double t : {-0.7, 0.0, 0.3, 0.995}) {
            const auto c = rg::identity_check(r, t, 50000, 100 + r);
            EXPECT_NEAR(c.mc_mean, c.series_value, 4.0 * c.std_error + 1e-12) << r << " " << t;
            EXPECT_NEAR(c.series_value, rg::er_eval_hyp(r, t), 1e-9);
        }
    EXPECT_THROW(rg::identity_check(1, 1.5, 10, 1), std::invalid_argument);
}
