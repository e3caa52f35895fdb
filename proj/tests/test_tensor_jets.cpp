#include "test_util.hpp"

using namespace ssg;
using namespace ssg::testing;

TEST(EvalJet, CubicOnTheLine) {
  const GraphSpec g = scalar_graph(1, make_monomial_poly({mono(1, {3})}));
  const Jet j = eval_jet(g, vec({2.0}), 3);
  EXPECT_EQ(j.u(0), 8.0);
  EXPECT_EQ(j.du(0, 0), 12.0);
  EXPECT_EQ(j.d2u(0, 0, 0), 12.0);
  EXPECT_EQ(j.d3u(0, 0, 0, 0), 6.0);
}

TEST(EvalJet, ZeroMapHasZeroTensors) {
  const Jet j = eval_jet(zero_graph(3, 2), vec({0.3, -1.0, 2.0}), 3);
  EXPECT_EQ(j.u.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(j.du.cwiseAbs().maxCoeff(), 0.0);
  for (double v : j.d2u.data()) EXPECT_EQ(v, 0.0);
  for (double v : j.d3u.data()) EXPECT_EQ(v, 0.0);
}

TEST(EvalJet, IsotropicQuadratic) {
  const Jet j = eval_jet(scalar_graph(2, make_iso_quadratic(1.0)), vec({1.0, 0.0}), 2);
  EXPECT_EQ(j.du(0, 0), 1.0);
  EXPECT_EQ(j.du(0, 1), 0.0);
  EXPECT_EQ(j.hessian(0), Mat::Identity(2, 2));
}

TEST(EvalJet, Errors) {
  const GraphSpec g = square_graph();
  EXPECT_EQ(error_kind_of([&] { eval_jet(g, vec({1.0}), 4); }), ErrorKind::unsupported_order);
  EXPECT_EQ(error_kind_of([&] { eval_jet(g, vec({NAN}), 1); }), ErrorKind::invalid_point);
  EXPECT_EQ(error_kind_of([&] { eval_jet(g, vec({1.0, 2.0}), 1); }), ErrorKind::invalid_point);
  GraphSpec bad = scalar_graph(1, make_monomial_poly({mono(1, {5})}));
  EXPECT_EQ(error_kind_of([&] { bad.validate(); }), ErrorKind::invalid_spec);
}

TEST(EvalJet, SymmetryIsExactAndDeterministic) {
  corpus::Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const GraphSpec g = corpus::random_poly_spec(3, 2, 4, rng);
    const Vec x = vec({0.4, -0.7, 1.1});
    const Jet j = eval_jet(g, x, 3);
    const Jet k = eval_jet(g, x, 3);
    EXPECT_EQ(j.d3u.data(), k.d3u.data());
    for (int a = 0; a < 2; ++a)
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) {
          EXPECT_EQ(j.d2u(a, p, q), j.d2u(a, q, p));
          for (int r = 0; r < 3; ++r) {
            const double v = j.d3u(a, p, q, r);
            EXPECT_EQ(v, j.d3u(a, q, p, r));
            EXPECT_EQ(v, j.d3u(a, r, q, p));
            EXPECT_EQ(v, j.d3u(a, p, r, q));
          }
        }
  }
}

// Builtins: exact jets against the FD oracle on each component.
TEST(EvalJet, FiniteDifferencesReproduceJets) {
  std::vector<GraphSpec> specs;
  corpus::Rng rng(5);
  specs.push_back(corpus::random_poly_spec(2, 2, 4, rng));
  Radial gauss;
  gauss.a = 0.7;
  gauss.b = 0.9;
  Radial poly;
  poly.profile = Radial::Profile::poly_r2;
  poly.coeffs = {0.1, -0.3, 0.05};
  Radial lg;
  lg.profile = Radial::Profile::log1p;
  lg.a = 1.3;
  lg.b = 0.6;
  specs.push_back(GraphSpec{2, 3, {ScalarExpr(gauss), ScalarExpr(poly), ScalarExpr(lg)}});
  specs.push_back(GraphSpec{2, 3,
                            {make_axial(Axial::Profile::exp, 0, 0.5, -0.8), make_axial(Axial::Profile::sin, 1, 1.2, 1.7),
                             make_axial(Axial::Profile::erf_ramp, 0, 0.9, 1.0)}});
  specs.push_back(GraphSpec{2, 1, {make_scaled(Rational(4, 3), 0.8, ScalarExpr(gauss))}});
  const Vec x = vec({0.35, -0.6});
  for (const auto& g : specs) {
    const Jet j = eval_jet(g, x, 2);
    for (int a = 0; a < g.m; ++a) {
      const FieldSampler f = [&](const Vec& y) { return eval_jet(g, y, 0).u(a); };
      const FDJet fd = finite_diff_jet(f, x, FDPolicy::default_at(x));
      const FDJet fd2 = finite_diff_jet(f, x, FDPolicy::second_order_at(x));
      for (int i = 0; i < 2; ++i) {
        std::vector<double> lg1;
        for (const auto& v : fd.grad_levels) lg1.push_back(v(i));
        EXPECT_TRUE(richardson_check("grad", j.du(a, i), lg1).pass) << a << " " << i;
        for (int k = 0; k < 2; ++k) {
          std::vector<double> lh;
          for (const auto& H : fd2.hess_levels) lh.push_back(H(i, k));
          EXPECT_TRUE(richardson_check("hess", j.d2u(a, i, k), lh).pass) << a << " " << i << k;
        }
      }
    }
  }
}

// Third and fourth derivatives of builtins against FD of the lower order.
TEST(ScalarExpr, HigherDerivativesMatchFiniteDifferences) {
  Radial gauss;
  gauss.a = -0.4;
  gauss.b = 1.3;
  const std::vector<ScalarExpr> exprs = {ScalarExpr(gauss), make_axial(Axial::Profile::erf_ramp, 1, 1.0, 1.0),
                                         make_axial(Axial::Profile::sin, 0, 0.6, 2.0)};
  const Vec x = vec({0.2, 0.45});
  for (const auto& e : exprs) {
    const ScalarJet s = e.jet(x, 4);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const FieldSampler f = [&](const Vec& y) { return e.jet(y, 2).hess(i, j); };
        const FDJet fd = finite_diff_jet(f, x, FDPolicy::default_at(x));
        const FDJet fd2 = finite_diff_jet(f, x, FDPolicy::second_order_at(x));
        for (int k = 0; k < 2; ++k) {
          std::vector<double> l3, l4;
          for (const auto& g : fd.grad_levels) l3.push_back(g(k));
          EXPECT_TRUE(richardson_check("d3", s.d3(i, j, k), l3).pass);
          for (int l = 0; l < 2; ++l) {
            for (const auto& H : fd2.hess_levels) l4.push_back(H(k, l));
            EXPECT_TRUE(richardson_check("d4", s.d4(i, j, k, l), l4, RichardsonOptions{1e-5, 1.8, -1}).pass);
            l4.clear();
          }
        }
      }
  }
}

TEST(FiniteDiff, SpecExamples) {
  const FDPolicy pol = FDPolicy::default_at(vec({1.0}));
  const FDJet sq = finite_diff_jet([](const Vec& y) { return y(0) * y(0); }, vec({1.0}), pol);
  EXPECT_NEAR(sq.grad(0), 2.0, 1e-8);
  const FDJet c = finite_diff_jet([](const Vec&) { return 3.0; }, vec({0.2, 0.1}), pol);
  EXPECT_NEAR(c.grad.norm(), 0.0, 1e-12);
  const FDJet s = finite_diff_jet([](const Vec& y) { return std::sin(y(0)); }, vec({0.0}), FDPolicy::default_at(vec({0.0})));
  EXPECT_NEAR(s.hess(0, 0), 0.0, 1e-6);
}

TEST(FiniteDiff, SamplingFailureNamesStencilPoint) {
  const FieldSampler f = [](const Vec& y) { return y(0) > 1.0005 ? NAN : 1.0; };
  try {
    finite_diff_jet(f, vec({1.0}), FDPolicy{1e-3, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::sampling_failure);
    EXPECT_NE(std::string(e.what()).find("1.001"), std::string::npos);
  }
}

TEST(FiniteDiff, PolicyValidation) {
  EXPECT_EQ(error_kind_of([] { FDPolicy{1e-7, 3}.validate(); }), ErrorKind::invalid_argument);
  EXPECT_EQ(error_kind_of([] { FDPolicy{0.2, 3}.validate(); }), ErrorKind::invalid_argument);
  EXPECT_EQ(error_kind_of([] { FDPolicy{1e-3, 1}.validate(); }), ErrorKind::invalid_argument);
  EXPECT_DOUBLE_EQ(FDPolicy::default_at(vec({3.0, 4.0})).h0, 5e-3);
  EXPECT_DOUBLE_EQ(FDPolicy::second_order_at(vec({0.3, 0.4})).h0, 1e-2);
}

TEST(Richardson, SpecExamples) {
  const CheckReport a = richardson_check("a", 2.0, {2.01, 2.0025});
  EXPECT_TRUE(a.pass);
  ASSERT_TRUE(a.observed_order.has_value());
  EXPECT_NEAR(*a.observed_order, 2.0, 1e-9);
  EXPECT_FALSE(richardson_check("b", 2.0, {3.0, 3.0}).pass);
  EXPECT_TRUE(richardson_check("c", 0.0, {1e-4, 2.5e-5}).pass);
}

TEST(Richardson, DivergingLadderThrows) {
  EXPECT_EQ(error_kind_of([] { richardson_check("d", 0.0, {1e-3, 2e-3, 1.0}); }), ErrorKind::oracle_divergence);
}

TEST(Rational, ParseAndReduce) {
  const Rational r = Rational::parse("6/-8");
  EXPECT_EQ(r.num, -3);
  EXPECT_EQ(r.den, 4);
  EXPECT_EQ(Rational::parse("5").str(), "5");
  EXPECT_EQ(error_kind_of([] { Rational::parse("1/0"); }), ErrorKind::invalid_spec);
  EXPECT_EQ(error_kind_of([] { Rational::parse("x"); }), ErrorKind::invalid_spec);
}

TEST(Linalg, SvdReconstructsAndOrders) {
  corpus::Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + trial % 4, n = 1 + (trial / 4) % 4;
    Mat A = corpus::random_matrix_with_norm(m, n, 2.5, rng);
    const auto s = linalg::svd(A);
    Mat S = Mat::Zero(m, n);
    for (int i = 0; i < s.sigma.size(); ++i) S(i, i) = s.sigma(i);
    EXPECT_LT((s.U * S * s.V.transpose() - A).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((s.U.transpose() * s.U - Mat::Identity(m, m)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((s.V.transpose() * s.V - Mat::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
    for (int i = 1; i < s.sigma.size(); ++i) EXPECT_GE(s.sigma(i - 1), s.sigma(i));
  }
}

TEST(Linalg, SymEigenReconstructs) {
  corpus::Rng rng(4);
  for (int n = 1; n <= 8; ++n) {
    Mat A = Mat::Random(n, n);
    A = (A + A.transpose()).eval();
    const auto e = linalg::sym_eigen(A);
    EXPECT_LT((e.vectors * e.values.asDiagonal() * e.vectors.transpose() - A).cwiseAbs().maxCoeff(), 1e-12);
    for (int i = 1; i < n; ++i) EXPECT_LE(e.values(i - 1), e.values(i));
  }
}

TEST(Linalg, RandomOrthogonal) {
  corpus::Rng rng(9);
  const Mat Q = linalg::random_orthogonal(5, rng);
  EXPECT_LT((Q.transpose() * Q - Mat::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-13);
}
