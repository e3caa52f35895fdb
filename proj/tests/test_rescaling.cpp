#include "test_util.hpp"

using namespace ssg;
using namespace ssg::testing;

TEST(HeatResidual, LinearMapIsCaloric) {
  corpus::Rng rng(41);
  const GraphSpec g = corpus::linear_spec(corpus::random_matrix_with_norm(2, 3, 2.0, rng));
  for (double t : {0.0, 0.5, 0.99}) {
    const HeatResidual h = heat_residual(g, 1.0, vec({0.3, -2.0, 1.0}), t);
    EXPECT_LE(h.direct.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(h.discrepancy, 1e-12);
  }
}

TEST(HeatResidual, SquareMapAtOrigin) {
  for (double t : {0.0, 0.75}) {
    const HeatResidual h = heat_residual(square_graph(), 2.0, vec({0.0}), t);
    EXPECT_NEAR(h.direct(0), -1.0 / std::sqrt(2.0 - t), 1e-14);
    EXPECT_NEAR(h.via_residual(0), -1.0 / std::sqrt(2.0 - t), 1e-14);
  }
}

TEST(HeatResidual, RoutesAgreeAndTimeDerivativeMatchesOracle) {
  corpus::Rng rng(42);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 1 + trial % 3, m = 1 + trial % 2;
    const GraphSpec g = corpus::random_poly_spec(n, m, 3, rng);
    for (const auto& x : random_ball_points(n, 1.5, 5, rng)) {
      const double t = corpus::uniform(rng, 0.0, 0.9);
      const HeatResidual h = heat_residual(g, 1.0, x, t);
      EXPECT_LE(h.discrepancy, 1e-10);
      EXPECT_TRUE(h.time_derivative.pass) << h.time_derivative.abs_discrepancy;
    }
  }
}

TEST(HeatResidual, TimeAtHorizonIsRejected) {
  EXPECT_EQ(error_kind_of([] { heat_residual(square_graph(), 1.0, vec({0.0}), 1.0); }), ErrorKind::invalid_time);
  EXPECT_EQ(error_kind_of([] { heat_residual(square_graph(), 0.0, vec({0.0}), -1.0); }), ErrorKind::invalid_time);
}

TEST(RescaledMap, InitialSliceIsScaledSpec) {
  const RescaledMap map{square_graph(), 4.0};
  EXPECT_DOUBLE_EQ(map.value(vec({3.0}), 0.0)(0), 2.0 * 1.5 * 1.5);
}

TEST(GrowthBound, FlatMapMargin) {
  const GrowthReport r = growth_bound_check(zero_graph(2, 2), {0.0, 1.0, 10.0}, 2000, 64);
  ASSERT_EQ(r.rows.size(), 3u);
  for (const auto& row : r.rows) EXPECT_NEAR(row.min_margin, (2 * row.radius * row.radius / 6.0 + 1.0) * 24.0, 1e-9);
  EXPECT_EQ(r.curvature_constant, 1.0);
  EXPECT_TRUE(r.holds());
}

TEST(GrowthBound, LinearCorpusHolds) {
  corpus::Rng rng(43);
  for (int trial = 0; trial < 6; ++trial) {
    const GraphSpec g = corpus::linear_spec(corpus::random_matrix_with_norm(1 + trial % 3, 1 + trial % 4,
                                                                            trial == 0 ? 5.0 : corpus::uniform(rng, 0, 5), rng));
    const GrowthReport r = growth_bound_check(g, {1.0, 10.0, 100.0}, 2000, 128);
    EXPECT_TRUE(r.holds());
    for (const auto& row : r.rows) EXPECT_GE(row.min_curvature_margin, 0.0);
  }
}

TEST(GrowthBound, ErrorsOnEmptyOrNegativeRadii) {
  EXPECT_EQ(error_kind_of([] { growth_bound_check(square_graph(), {}); }), ErrorKind::invalid_argument);
  EXPECT_EQ(error_kind_of([] { growth_bound_check(square_graph(), {-1.0}, 100, 8); }), ErrorKind::invalid_radius);
}

TEST(GrowthG, KnownValues) {
  EXPECT_NEAR(growth_g(1.0), 0.5, 1e-16);
  EXPECT_NEAR(growth_g(3.4), 0.998478060678540386501, 1e-14);
  EXPECT_NEAR(growth_g(3.5), 1.043246239832108434897, 1e-14);
}

TEST(GrowthG, IncreasingBeyondOne) {
  double prev = growth_g(1.0);
  for (double s = 1.01; s <= 20.0; s += 0.01) {
    const double v = growth_g(s);
    EXPECT_GT(v, prev) << s;
    prev = v;
  }
}

TEST(S0, BracketAndRegressionValue) {
  const S0Result r = s0_solve();
  EXPECT_GT(r.s0, 3.4);
  EXPECT_LT(r.s0, 3.5);
  EXPECT_LE(r.residual, 1e-12);
  EXPECT_LT(growth_g(r.lo), 1.0);
  EXPECT_GT(growth_g(r.hi), 1.0);
  EXPECT_NEAR(s0_solve(1e-15).s0, 3.40349787906229328067528311264, 1e-12);
  EXPECT_NEAR(s0_value(), 3.40349787906229328067528311264, 1e-12);
  EXPECT_EQ(error_kind_of([] { s0_solve(0.0); }), ErrorKind::invalid_argument);
}

TEST(Zeta, SpecExamples) {
  const ZetaWitness z4 = zeta_witness(4.0);
  EXPECT_NEAR(z4.zeta, 1.6, 1e-15);
  EXPECT_NEAR(z4.margin, 6.5536 - 5.0, 1e-10);
  EXPECT_TRUE(z4.in_range);
  EXPECT_NEAR(zeta_witness(s0_value()).margin, 0.0, 1e-10);
  EXPECT_NEAR(zeta_witness(10.0).margin, 383.796328375840509301, 1e-9);
  EXPECT_FALSE(zeta_witness(2.0).in_range);
  EXPECT_EQ(error_kind_of([] { zeta_witness(1.0); }), ErrorKind::invalid_argument);
}

TEST(Zeta, SweepMarginsNonNegative) {
  for (double s = s0_value(); s <= 20.0; s += 0.01) {
    const ZetaWitness z = zeta_witness(s);
    EXPECT_GE(z.margin, -1e-12) << s;
    EXPECT_GT(z.zeta, 1.0);
    EXPECT_LT(z.zeta, 2.0);
  }
}

TEST(GrowthConstants, SpecExamples) {
  const GrowthConstants gc = growth_constants(4.0, 2, 1.0, 1.0, 1.0, 3.0);
  EXPECT_NEAR(gc.theta * gc.theta, 0.8, 1e-15);
  EXPECT_NEAR(gc.k2, 1.6, 1e-15);
  EXPECT_NEAR(gc.R0sq, 4.0, 1e-14);
  EXPECT_NEAR(growth_constants(4.0, 2, 1.0, 1.0, 1.0, 100.0).R0sq, 100.0, 0.0);
  for (double s = s0_value(); s < 50.0; s += 0.5) {
    const GrowthConstants c = growth_constants(s, 3, 2.0, 1.0, 1.0, 1.0);
    EXPECT_GT(c.k2, 1.0);
    EXPECT_LT(c.k2, 2.0);
    EXPECT_GE(c.R0sq, 0.5 * (3 * 2.0 + 1.0) * c.k2 / (c.k2 - 1.0) - 1e-12);
  }
  EXPECT_EQ(error_kind_of([] { growth_constants(3.0, 2, 1, 1, 1, 1); }), ErrorKind::below_threshold);
  EXPECT_EQ(error_kind_of([] { growth_constants(4.0, 2, 0, 1, 1, 1); }), ErrorKind::invalid_argument);
}

TEST(ShiftedRadius, BaseAndRecursion) {
  const GrowthConstants gc = growth_constants(4.0, 2, 1.0, 1.0, 1.0, 3.0);
  EXPECT_EQ(shifted_radius(gc, 5.0, 1), 5.0);
  EXPECT_NEAR(shifted_radius(gc, 5.0, 2), std::sqrt(25.0 / 1.6 + 1.5), 1e-14);
  // R_{m+1} = shifted_radius(R_m, 2)
  const double r3 = shifted_radius(gc, 5.0, 3);
  EXPECT_NEAR(r3, shifted_radius(gc, shifted_radius(gc, 5.0, 2), 2), 1e-13);
  EXPECT_EQ(error_kind_of([&] { shifted_radius(gc, 5.0, 0); }), ErrorKind::invalid_argument);
}

TEST(Gel, ShrinkerCoefficientsReproduceResidual) {
  corpus::Rng rng(44);
  const GraphSpec g = corpus::random_poly_spec(2, 2, 3, rng);
  const CoefficientSampler a = [&](const Vec& x) { return induced_metric(eval_jet(g, x, 1), Signature::euclidean()).ginv; };
  const auto grid = box_grid(2, -1.0, 1.0, 4);
  const GelReport rep = gel_residual_and_conditions(a, g, grid, growth_constants(4.0, 2, 1.0, 1.0, 1.0, 1.0));
  for (std::size_t k = 0; k < grid.size(); ++k)
    EXPECT_EQ(rep.points[k].residual,
              shrinker_residual(eval_jet(g, grid[k], 2), Signature::euclidean()).cwiseAbs().maxCoeff());
  // g^{-1} has eigenvalues in (0, 1].
  EXPECT_GE(rep.min_sigma_margin, -1e-15);
}

TEST(Gel, IdentityCoefficientsOnLinearMap) {
  Mat A(1, 2);
  A << 0.6, -0.8;
  const GraphSpec g = corpus::linear_spec(A);
  const CoefficientSampler id = [](const Vec&) { return Mat(Mat::Identity(2, 2)); };
  const GelReport rep = gel_residual_and_conditions(id, g, box_grid(2, -3.0, 3.0, 7), growth_constants(4.0, 2, 1.0, 1.0, 1.0, 1.0));
  EXPECT_LE(rep.max_residual, 1e-14);
  EXPECT_NEAR(rep.min_sigma_margin, 0.0, 1e-15);
  EXPECT_GE(rep.min_decay_margin, -1e-15);
  const CoefficientSampler bad = [](const Vec&) { return Mat(-Mat::Identity(2, 2)); };
  EXPECT_EQ(error_kind_of([&] { gel_residual_and_conditions(bad, g, {vec({0, 0})}, growth_constants(4.0, 2, 1, 1, 1, 1)); }),
            ErrorKind::invalid_coefficients);
}

TEST(GrowthAlternative, FlatAndLinearMaps) {
  const GrowthConstants gc = growth_constants(4.0, 2, 1.0, 1.0, 1.0, 1.0);
  const auto ball = ball_points(2, 1.0, 2000);
  const GrowthAlternative z = lemma9_check(gc, zero_graph(2, 1), 3.0, ball);
  EXPECT_TRUE(z.holds_decay_form);
  EXPECT_TRUE(z.holds_doubling_form);
  Mat A(2, 2);
  A << 1.0, 0.5, -0.3, 2.0;
  for (double R : {2.5, 5.0, 20.0}) EXPECT_TRUE(lemma9_check(gc, corpus::linear_spec(A), R, ball).holds_doubling_form) << R;
  EXPECT_EQ(error_kind_of([&] { lemma9_check(gc, zero_graph(2, 1), 2.0, ball); }), ErrorKind::out_of_range);
}

TEST(DecayBound, BoundShape) {
  const GrowthConstants gc = growth_constants(4.0, 2, 1.0, 5.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(theorem15_bound(gc, 0.0, vec({2.0, 0.0})), 1.0 + std::pow(2.0, 5.0));
  EXPECT_DOUBLE_EQ(theorem15_bound(gc, 1.0, vec({0.0, 0.0}), 3.0), 6.0);
  EXPECT_NEAR(bound_sup_radius(gc), std::sqrt(2.6) * gc.R0, 1e-15);
}
