#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "tmcmc/errors.hpp"
#include "tmcmc/map_optimizer.hpp"
#include "tmcmc/problems.hpp"
#include "tmcmc/transport_map.hpp"

using namespace tmcmc;

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

MultiIndexSet set_1d(std::vector<int> degrees) {
  std::vector<MultiIndex> idx;
  for (int d : degrees) idx.emplace_back(std::vector<int>{d});
  return MultiIndexSet(0, 1, std::move(idx));
}

// T(theta) = theta^3 + theta with monomials.
TriangularMap cubic_plus_linear(double radius = TriangularMap::kUnbounded) {
  return TriangularMap({MapComponent(set_1d({0, 1, 3}), Eigen::Vector3d(0, 1, 1), PolynomialFamily::kMonomial)},
                       TriangularMap::kDefaultLambdaMin, radius);
}

// Lower-triangular linear map T(theta) = A theta in two dimensions.
TriangularMap linear_2d(const Eigen::Matrix2d& a, double radius = TriangularMap::kUnbounded) {
  const auto s0 = build_total_order(0, 1, 2);
  const auto s1 = build_total_order(1, 1, 2);
  Eigen::VectorXd c0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s0.size()));
  Eigen::VectorXd c1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s1.size()));
  c0[s0.find(MultiIndex({1, 0}))] = a(0, 0);
  c1[s1.find(MultiIndex({1, 0}))] = a(1, 0);
  c1[s1.find(MultiIndex({0, 1}))] = a(1, 1);
  return TriangularMap({MapComponent(s0, c0), MapComponent(s1, c1)}, TriangularMap::kDefaultLambdaMin, radius);
}

// A monotone map with mixed cubic terms: each diagonal derivative is bounded below.
TriangularMap nonlinear_2d(double radius = TriangularMap::kUnbounded) {
  const auto s0 = build_total_order(0, 3, 2);
  const auto s1 = build_total_order(1, 3, 2);
  Eigen::VectorXd c0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s0.size()));
  Eigen::VectorXd c1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s1.size()));
  c0[s0.find(MultiIndex({0, 0}))] = 0.2;
  c0[s0.find(MultiIndex({1, 0}))] = 1.3;
  c0[s0.find(MultiIndex({3, 0}))] = 0.1;
  c1[s1.find(MultiIndex({2, 0}))] = 0.8;
  c1[s1.find(MultiIndex({1, 0}))] = -0.3;
  c1[s1.find(MultiIndex({0, 1}))] = 0.9;
  c1[s1.find(MultiIndex({1, 1}))] = 0.1;
  c1[s1.find(MultiIndex({2, 1}))] = 0.05;
  c1[s1.find(MultiIndex({0, 3}))] = 0.05;
  return TriangularMap({MapComponent(s0, c0, PolynomialFamily::kMonomial),
                        MapComponent(s1, c1, PolynomialFamily::kMonomial)},
                       TriangularMap::kDefaultLambdaMin, radius);
}

std::vector<MultiIndexSet> sets_for(int n, int degree) {
  BasisSpec spec;
  spec.degree = degree;
  return spec.build(n);
}

}  // namespace

TEST(Identity, ForwardDeterminantAndInverse) {
  const auto map = identity_map(sets_for(2, 3));
  const Eigen::Vector2d theta(0.3, -1.2);
  EXPECT_TRUE(map.forward(theta).isApprox(theta, 1e-15));
  EXPECT_DOUBLE_EQ(map.log_det_jacobian(theta), 0.0);
  EXPECT_TRUE(map.jacobian_diag(theta).isApprox(Eigen::Vector2d::Ones()));
  EXPECT_TRUE(map.inverse(Eigen::Vector2d(5, -3)).isApprox(Eigen::Vector2d(5, -3), 1e-12));
}

TEST(Identity, Coefficients) {
  const auto s = build_total_order(1, 3, 2);
  const Eigen::VectorXd c = identity_coefficients(s);
  ASSERT_EQ(c.size(), 10);
  EXPECT_DOUBLE_EQ(c.sum(), 1.0);
  EXPECT_DOUBLE_EQ(c[s.find(MultiIndex({0, 1}))], 1.0);
}

TEST(Identity, ExtensionOfLinearMapIsItself) {
  const auto map = identity_map(sets_for(3, 2), PolynomialFamily::kHermite, 1e-8, 1.5);
  const Eigen::Vector3d theta(4.0, -7.0, 2.5);
  EXPECT_TRUE(map.forward(theta).isApprox(theta, 1e-12));
}

TEST(Forward, CubicOneDimensional) {
  const auto map = cubic_plus_linear();
  EXPECT_DOUBLE_EQ(map.forward(Eigen::VectorXd::Constant(1, 1.0))[0], 2.0);
  EXPECT_DOUBLE_EQ(map.jacobian_diag(Eigen::VectorXd::Constant(1, 2.0))[0], 13.0);
  EXPECT_NEAR(map.log_det_jacobian(Eigen::VectorXd::Constant(1, 1.0)), std::log(4.0), 1e-14);
  EXPECT_NEAR(map.inverse(Eigen::VectorXd::Constant(1, 2.0))[0], 1.0, 1e-10);
}

TEST(Forward, HermiteAndMonomialAgree) {
  // theta^3 + theta = He_3 + 4 He_1.
  const TriangularMap h({MapComponent(set_1d({0, 1, 3}), Eigen::Vector3d(0, 4, 1))});
  const auto m = cubic_plus_linear();
  for (double t : {-2.0, -0.3, 0.0, 1.7}) {
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, t);
    EXPECT_NEAR(h.forward(x)[0], m.forward(x)[0], 1e-12);
  }
}

TEST(Extension, QuadraticOutsideRadius) {
  const TriangularMap map({MapComponent(set_1d({2}), Eigen::VectorXd::Constant(1, 1.0), PolynomialFamily::kMonomial)},
                          TriangularMap::kDefaultLambdaMin, 2.0);
  EXPECT_DOUBLE_EQ(map.forward_component(0, std::vector<double>{3.0}), 8.0);
  EXPECT_DOUBLE_EQ(map.forward_component(0, std::vector<double>{1.5}), 2.25);
}

TEST(Extension, MatchesRadialTangentFormula) {
  const double radius = 1.5;
  const auto raw = nonlinear_2d();
  const auto ext = nonlinear_2d(radius);
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Vector2d theta(3 * z(gen), 3 * z(gen));
    for (int i = 0; i < 2; ++i) {
      const Eigen::VectorXd prefix = theta.head(i + 1);
      const double norm = prefix.norm();
      double expected;
      if (norm <= radius) {
        expected = raw.forward(theta)[i];
      } else {
        Eigen::Vector2d p = theta;
        p.head(i + 1) *= radius / norm;
        const Eigen::MatrixXd jac = raw.jacobian(p);
        expected = raw.forward(p)[i] + jac.row(i).head(i + 1).dot(theta.head(i + 1) - p.head(i + 1));
      }
      EXPECT_NEAR(ext.forward(theta)[i], expected, 1e-10 * (1 + std::abs(expected)));
    }
  }
}

TEST(Extension, ContinuousAcrossBoundary) {
  const auto ext = nonlinear_2d(1.5);
  for (double angle = 0.1; angle < 6.2; angle += 0.7) {
    const Eigen::Vector2d dir(std::cos(angle), std::sin(angle));
    const Eigen::Vector2d in = dir * (1.5 - 1e-9), out = dir * (1.5 + 1e-9);
    EXPECT_NEAR(ext.forward_component(0, std::vector<double>{in[0]}),
                ext.forward_component(0, std::vector<double>{out[0]}), 1e-7);
    EXPECT_NEAR(ext.forward(in)[1], ext.forward(out)[1], 1e-7);
  }
}

TEST(Jacobian, DiagonalLinearMap) {
  Eigen::Matrix2d a;
  a << 2, 0, 0, 3;
  const auto map = linear_2d(a);
  EXPECT_NEAR(map.log_det_jacobian(Eigen::Vector2d(0.4, 9.0)), std::log(6.0), 1e-14);
}

TEST(Jacobian, MatchesFiniteDifferences) {
  for (double radius : {TriangularMap::kUnbounded, 1.5}) {
    const auto map = nonlinear_2d(radius);
    std::mt19937_64 gen(11);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 40; ++trial) {
      const Eigen::Vector2d theta(1.5 * z(gen), 1.5 * z(gen));
      Eigen::MatrixXd jac, hrows;
      map.second_order(theta, jac, hrows);
      EXPECT_TRUE(jac.isApprox(map.jacobian(theta), 1e-12));
      EXPECT_TRUE(jac.diagonal().isApprox(map.jacobian_diag(theta), 1e-12));
      EXPECT_DOUBLE_EQ(jac(0, 1), 0.0);
      const double h = 1e-6;
      for (int m = 0; m < 2; ++m) {
        Eigen::Vector2d up = theta, dn = theta;
        up[m] += h;
        dn[m] -= h;
        const Eigen::VectorXd fd = (map.forward(up) - map.forward(dn)) / (2 * h);
        const Eigen::VectorXd dfd = (map.jacobian_diag(up) - map.jacobian_diag(dn)) / (2 * h);
        for (int i = 0; i < 2; ++i) {
          EXPECT_NEAR(jac(i, m), fd[i], 1e-6 * (1 + std::abs(fd[i])));
          if (m <= i) EXPECT_NEAR(hrows(i, m), dfd[i], 1e-5 * (1 + std::abs(dfd[i])));
        }
      }
    }
  }
}

TEST(Jacobian, NonMonotoneMapRaises) {
  const TriangularMap constant({MapComponent(set_1d({0, 1}), Eigen::Vector2d(0.7, 0.0))});
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.5);
  EXPECT_DOUBLE_EQ(constant.jacobian_diag(x)[0], 0.0);
  EXPECT_THROW(constant.log_det_jacobian(x), MonotonicityError);
  try {
    constant.log_det_jacobian(x);
  } catch (const MonotonicityError& e) {
    EXPECT_EQ(e.component(), 0);
    EXPECT_DOUBLE_EQ(e.derivative(), 0.0);
  }
}

TEST(Jacobian, ForwardWithLogDetAgrees) {
  const auto map = nonlinear_2d(2.0);
  const Eigen::Vector2d theta(0.9, -2.4);
  double ld = 0;
  const Eigen::VectorXd r = map.forward_with_log_det(theta, ld);
  EXPECT_TRUE(r.isApprox(map.forward(theta)));
  EXPECT_NEAR(ld, map.log_det_jacobian(theta), 1e-14);
}

TEST(Inverse, RoundTripOnNonlinearMap) {
  for (double radius : {TriangularMap::kUnbounded, 1.5}) {
    const auto map = nonlinear_2d(radius);
    std::mt19937_64 gen(5);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 1000; ++trial) {
      Eigen::Vector2d r(z(gen), z(gen));
      r *= (10 * std::sqrt(2.0)) * std::uniform_real_distribution<double>(0, 1)(gen) / r.norm();
      const Eigen::VectorXd theta = map.inverse(r);
      EXPECT_LT((map.forward(theta) - r).lpNorm<Eigen::Infinity>(), 1e-8);
    }
  }
}

TEST(Inverse, RoundTripOnFittedMap) {
  BananaTarget banana;
  Rng rng(21);
  const Eigen::MatrixXd x = banana.sample(4000, rng);
  OptimizerConfig cfg;
  const auto fit = fit_map(x, sets_for(2, 3), PolynomialFamily::kHermite, cfg);
  std::mt19937_64 gen(6);
  std::normal_distribution<double> z;
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::Vector2d r(z(gen), z(gen));
    r *= (10 * std::sqrt(2.0)) * std::uniform_real_distribution<double>(0, 1)(gen) / r.norm();
    const Eigen::VectorXd theta = fit.map.inverse(r);
    EXPECT_LT((fit.map.forward(theta) - r).lpNorm<Eigen::Infinity>(), 1e-8) << r.transpose();
    ++checked;
  }
  EXPECT_EQ(checked, 1000);
}

TEST(Inverse, HintDoesNotChangeRoot) {
  const auto map = nonlinear_2d();
  const Eigen::Vector2d r(1.3, -0.8);
  const Eigen::VectorXd a = map.inverse(r);
  const Eigen::VectorXd hint = Eigen::Vector2d(-4.0, 6.0);
  const Eigen::VectorXd b = map.inverse(r, &hint);
  EXPECT_TRUE(a.isApprox(b, 1e-9));
  const Eigen::VectorXd bad_hint = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(map.inverse(r, &bad_hint), DimensionError);
}

TEST(Inverse, DimensionMismatch) {
  const auto map = identity_map(sets_for(2, 1));
  EXPECT_THROW(map.forward(Eigen::Vector3d::Zero()), DimensionError);
  EXPECT_THROW(map.inverse(Eigen::VectorXd::Zero(1)), DimensionError);
}

TEST(Pullback, IdentityIsStandardNormal) {
  const auto map = identity_map(sets_for(1, 2));
  EXPECT_NEAR(map.pullback_log_density(Eigen::VectorXd::Zero(1)), -0.5 * kLog2Pi, 1e-15);
  const auto map3 = identity_map(sets_for(3, 2));
  const Eigen::Vector3d theta(0.2, -1.7, 3.1);
  EXPECT_NEAR(map3.pullback_log_density(theta), -1.5 * kLog2Pi - 0.5 * theta.squaredNorm(), 1e-13);
}

TEST(Pullback, CholeskyMapGivesGaussian) {
  Eigen::Matrix2d cov;
  cov << 2.0, 0.7, 0.7, 1.5;
  GaussianTarget g(Eigen::Vector2d::Zero(), cov);
  const Eigen::Matrix2d linv = g.cholesky().inverse();
  const auto map = linear_2d(linv);
  Rng rng(8);
  const Eigen::MatrixXd pts = g.sample(100, rng) * 1.7;
  for (Eigen::Index k = 0; k < pts.rows(); ++k) {
    const Eigen::VectorXd theta = pts.row(k).transpose();
    EXPECT_NEAR(map.pullback_log_density(theta), g.log_density(theta), 1e-12);
  }
}

TEST(Pushforward, IdentityReturnsTarget) {
  BananaTarget banana;
  const auto target = banana.target();
  const auto map = identity_map(sets_for(2, 2));
  Rng rng(2);
  const Eigen::MatrixXd pts = banana.sample(20, rng);
  for (Eigen::Index k = 0; k < pts.rows(); ++k) {
    const Eigen::VectorXd r = pts.row(k).transpose();
    EXPECT_NEAR(pushforward_log_density(map, target, r), banana.log_density(r), 1e-12);
    Eigen::VectorXd grad;
    banana.log_density_gradient(r, grad);
    EXPECT_TRUE(pushforward_gradient(map, target, r).isApprox(grad, 1e-12));
  }
}

TEST(Pushforward, ExactMapGivesReferenceUpToConstant) {
  Eigen::Matrix2d cov;
  cov << 1.0, 0.5, 0.5, 1.0;
  GaussianTarget g(Eigen::Vector2d(0.3, -0.2), cov);
  // T(theta) = L^{-1} (theta - mu): linear part plus constant terms.
  const Eigen::Matrix2d linv = g.cholesky().inverse();
  const Eigen::Vector2d shift = -linv * g.mean();
  const auto s0 = build_total_order(0, 1, 2);
  const auto s1 = build_total_order(1, 1, 2);
  Eigen::VectorXd c0 = Eigen::VectorXd::Zero(2), c1 = Eigen::VectorXd::Zero(3);
  c0[s0.find(MultiIndex({0, 0}))] = shift[0];
  c0[s0.find(MultiIndex({1, 0}))] = linv(0, 0);
  c1[s1.find(MultiIndex({0, 0}))] = shift[1];
  c1[s1.find(MultiIndex({1, 0}))] = linv(1, 0);
  c1[s1.find(MultiIndex({0, 1}))] = linv(1, 1);
  const TriangularMap map({MapComponent(s0, c0), MapComponent(s1, c1)});
  const auto target = g.target();
  std::mt19937_64 gen(4);
  std::normal_distribution<double> z;
  for (int k = 0; k < 20; ++k) {
    const Eigen::Vector2d r(2 * z(gen), 2 * z(gen));
    // The Gaussian target is normalized, so the constant is zero.
    EXPECT_NEAR(pushforward_log_density(map, target, r), standard_normal_log_density(r), 1e-12);
    EXPECT_TRUE(pushforward_gradient(map, target, r).isApprox(-r, 1e-10));
  }
}

TEST(Pushforward, LinearMapGradientChainRule) {
  Eigen::Matrix2d a;
  a << 1.5, 0.0, -0.4, 0.8;
  const auto map = linear_2d(a);
  BananaTarget banana;
  const auto target = banana.target();
  const Eigen::Vector2d r(0.6, -1.1);
  const Eigen::Matrix2d ainv = a.inverse();
  Eigen::VectorXd grad;
  banana.log_density_gradient(ainv * r, grad);
  const Eigen::VectorXd expected = ainv.transpose() * grad;
  EXPECT_TRUE(pushforward_gradient(map, target, r).isApprox(expected, 1e-10));
}

TEST(Pushforward, GradientMatchesFiniteDifferences) {
  BananaTarget banana;
  const auto target = banana.target();
  for (double radius : {TriangularMap::kUnbounded, 2.0}) {
    const auto map = nonlinear_2d(radius);
    std::mt19937_64 gen(12);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::Vector2d r(z(gen), z(gen));
      const Eigen::VectorXd g = pushforward_gradient(map, target, r);
      const double h = 1e-5;
      Eigen::Vector2d fd;
      for (int m = 0; m < 2; ++m) {
        Eigen::Vector2d up = r, dn = r;
        up[m] += h;
        dn[m] -= h;
        fd[m] = (pushforward_log_density(map, target, up) - pushforward_log_density(map, target, dn)) / (2 * h);
      }
      EXPECT_LT((g - fd).norm() / std::max(1.0, fd.norm()), 1e-5);
    }
  }
}

TEST(Serialization, RoundTripIsExact) {
  const auto map = nonlinear_2d(2.5);
  std::stringstream io;
  write_map(io, map);
  const auto back = read_map(io);
  ASSERT_EQ(back.dimension(), 2);
  EXPECT_EQ(back.radius(), 2.5);
  EXPECT_EQ(back.family(), PolynomialFamily::kMonomial);
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(back.component(i).index_set(), map.component(i).index_set());
    EXPECT_EQ(back.component(i).coefficients(), map.component(i).coefficients());
  }
  const auto unbounded = identity_map(sets_for(3, 2));
  std::stringstream io2;
  write_map(io2, unbounded);
  EXPECT_TRUE(std::isinf(read_map(io2).radius()));
}

TEST(Serialization, MalformedInputRaises) {
  std::istringstream empty("");
  EXPECT_THROW(read_map(empty), ParseError);
  std::istringstream garbage("not a map\n");
  EXPECT_THROW(read_map(garbage), ParseError);
}

TEST(Construction, ValidatesComponents) {
  const auto s = build_total_order(1, 1, 2);
  EXPECT_THROW(MapComponent(s, Eigen::VectorXd::Zero(2)), DimensionError);
  // Components must appear in order 0..n-1.
  EXPECT_THROW(TriangularMap({MapComponent(s, identity_coefficients(s))}), Error);
  EXPECT_THROW(identity_map({build_diagonal(0, 0, 1)}), Error);
}

TEST(SliceCoefficients, ReproduceComponent) {
  const auto map = nonlinear_2d();
  const auto& c = map.component(1);
  const std::vector<double> prefix{0.7};
  const Eigen::VectorXd coeffs = c.slice_coefficients(prefix);
  for (double t : {-1.3, 0.0, 2.2}) {
    double poly = 0, pw = 1;
    for (Eigen::Index d = 0; d < coeffs.size(); ++d, pw *= t) poly += coeffs[d] * pw;
    EXPECT_NEAR(poly, c.value(std::vector<double>{0.7, t}), 1e-12);
  }
}
