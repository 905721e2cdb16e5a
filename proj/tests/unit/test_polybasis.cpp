#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "tmcmc/errors.hpp"
#include "tmcmc/polybasis.hpp"

using namespace tmcmc;

namespace {

constexpr auto kH = PolynomialFamily::kHermite;
constexpr auto kM = PolynomialFamily::kMonomial;

MultiIndexSet make_set(int component, int dimension, std::vector<std::vector<int>> entries) {
  std::vector<MultiIndex> idx;
  for (auto& e : entries) idx.emplace_back(std::move(e));
  return MultiIndexSet(component, dimension, std::move(idx));
}

std::set<std::vector<int>> as_set(const MultiIndexSet& s) {
  std::set<std::vector<int>> out;
  for (const auto& j : s) out.insert(j.entries());
  return out;
}

// Brute-force enumeration of {j in [0,p]^n : |j| <= p, j_k = 0 past component}.
std::set<std::vector<int>> brute_total_order(int component, int p, int n, bool no_mixed) {
  std::set<std::vector<int>> out;
  std::vector<int> j(static_cast<std::size_t>(n), 0);
  const int total = static_cast<int>(std::pow(p + 1, n));
  for (int code = 0; code < total; ++code) {
    int c = code, sum = 0, active = 0;
    bool ok = true;
    for (int k = 0; k < n; ++k) {
      j[static_cast<std::size_t>(k)] = c % (p + 1);
      c /= p + 1;
      sum += j[static_cast<std::size_t>(k)];
      if (j[static_cast<std::size_t>(k)] > 0) ++active;
      if (k > component && j[static_cast<std::size_t>(k)] > 0) ok = false;
    }
    if (ok && sum <= p && (!no_mixed || active <= 1)) out.insert(j);
  }
  return out;
}

}  // namespace

TEST(Univariate, HermiteValues) {
  EXPECT_DOUBLE_EQ(eval_univariate(kH, 0, 7.3), 1.0);
  EXPECT_DOUBLE_EQ(eval_univariate(kH, 1, -2.5), -2.5);
  EXPECT_DOUBLE_EQ(eval_univariate(kH, 3, 2.0), 2.0);
}

TEST(Univariate, HermiteDerivatives) {
  EXPECT_DOUBLE_EQ(eval_univariate_deriv(kH, 0, 5.0), 0.0);
  EXPECT_DOUBLE_EQ(eval_univariate_deriv(kH, 1, 5.0), 1.0);
  EXPECT_DOUBLE_EQ(eval_univariate_deriv(kH, 3, 1.0), 0.0);
}

TEST(Univariate, HermiteMatchesClosedForms) {
  for (double x : {-3.1, -0.4, 0.0, 0.9, 2.7}) {
    EXPECT_NEAR(eval_univariate(kH, 2, x), x * x - 1, 1e-12);
    EXPECT_NEAR(eval_univariate(kH, 4, x), std::pow(x, 4) - 6 * x * x + 3, 1e-10);
    EXPECT_NEAR(eval_univariate_deriv(kH, 4, x), 4 * std::pow(x, 3) - 12 * x, 1e-10);
    EXPECT_NEAR(eval_univariate_second_deriv(kH, 4, x), 12 * x * x - 12, 1e-10);
  }
}

TEST(Univariate, HermiteRecurrenceAndAppellProperty) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = u(gen);
    for (int k = 1; k < 8; ++k) {
      const double lhs = eval_univariate(kH, k + 1, x);
      const double rhs = x * eval_univariate(kH, k, x) - k * eval_univariate(kH, k - 1, x);
      EXPECT_NEAR(lhs, rhs, 1e-9 * (1 + std::abs(lhs)));
      EXPECT_NEAR(eval_univariate_deriv(kH, k, x), k * eval_univariate(kH, k - 1, x),
                  1e-9 * (1 + std::abs(lhs)));
    }
  }
}

TEST(Univariate, MonomialValues) {
  EXPECT_DOUBLE_EQ(eval_univariate(kM, 3, 2.0), 8.0);
  EXPECT_DOUBLE_EQ(eval_univariate_deriv(kM, 3, 2.0), 12.0);
  EXPECT_DOUBLE_EQ(eval_univariate_second_deriv(kM, 3, 2.0), 12.0);
  EXPECT_DOUBLE_EQ(eval_univariate(kM, 0, -4.0), 1.0);
}

TEST(Univariate, TableAgreesWithPointwise) {
  for (auto fam : {kH, kM}) {
    std::vector<double> v(6), d(6), s(6);
    eval_univariate_table(fam, 5, 1.37, v, d, s);
    for (int k = 0; k <= 5; ++k) {
      EXPECT_NEAR(v[static_cast<std::size_t>(k)], eval_univariate(fam, k, 1.37), 1e-12);
      EXPECT_NEAR(d[static_cast<std::size_t>(k)], eval_univariate_deriv(fam, k, 1.37), 1e-12);
      EXPECT_NEAR(s[static_cast<std::size_t>(k)], eval_univariate_second_deriv(fam, k, 1.37), 1e-12);
    }
  }
}

TEST(Univariate, FamilyNamesRoundTrip) {
  EXPECT_EQ(parse_family(to_string(kH)), kH);
  EXPECT_EQ(parse_family(to_string(kM)), kM);
  EXPECT_THROW(parse_family("legendre"), Error);
}

TEST(Multivariate, Values) {
  const std::vector<double> theta{2.0, 3.0};
  EXPECT_DOUBLE_EQ(eval_multivariate(kH, MultiIndex({0, 0}), theta), 1.0);
  EXPECT_DOUBLE_EQ(eval_multivariate(kH, MultiIndex({1, 1}), theta), 6.0);
  EXPECT_DOUBLE_EQ(eval_multivariate(kH, MultiIndex({2, 1}), theta), 9.0);
}

TEST(Multivariate, Partials) {
  EXPECT_DOUBLE_EQ(eval_multivariate_partial(kH, MultiIndex({0, 0}), std::vector<double>{0.3, -1.0}, 0), 0.0);
  EXPECT_DOUBLE_EQ(eval_multivariate_partial(kH, MultiIndex({1, 0}), std::vector<double>{4.0, 9.0}, 0), 1.0);
  EXPECT_DOUBLE_EQ(eval_multivariate_partial(kH, MultiIndex({2, 1}), std::vector<double>{2.0, 3.0}, 1), 3.0);
}

TEST(Multivariate, PartialMatchesFiniteDifference) {
  const MultiIndex j({2, 1, 3});
  std::vector<double> t{0.7, -1.1, 0.4};
  for (int c = 0; c < 3; ++c) {
    auto up = t, dn = t;
    up[static_cast<std::size_t>(c)] += 1e-6;
    dn[static_cast<std::size_t>(c)] -= 1e-6;
    const double fd = (eval_multivariate(kH, j, up) - eval_multivariate(kH, j, dn)) / 2e-6;
    EXPECT_NEAR(eval_multivariate_partial(kH, j, t, c), fd, 1e-7);
  }
}

TEST(IndexSets, TotalOrder) {
  EXPECT_EQ(as_set(build_total_order(0, 1, 3)), (std::set<std::vector<int>>{{0, 0, 0}, {1, 0, 0}}));
  EXPECT_EQ(build_total_order(1, 3, 2).size(), 10u);
  EXPECT_EQ(as_set(build_total_order(0, 0, 1)), (std::set<std::vector<int>>{{0}}));
}

TEST(IndexSets, TotalOrderMatchesBruteForce) {
  for (int n = 1; n <= 4; ++n) {
    for (int i = 0; i < n; ++i) {
      for (int p = 0; p <= 4; ++p) {
        EXPECT_EQ(as_set(build_total_order(i, p, n)), brute_total_order(i, p, n, false));
        EXPECT_EQ(as_set(build_no_mixed(i, p, n)), brute_total_order(i, p, n, true));
      }
    }
  }
}

TEST(IndexSets, NoMixed) {
  EXPECT_EQ(as_set(build_no_mixed(1, 2, 2)),
            (std::set<std::vector<int>>{{0, 0}, {1, 0}, {2, 0}, {0, 1}, {0, 2}}));
  EXPECT_EQ(as_set(build_no_mixed(0, 2, 2)), (std::set<std::vector<int>>{{0, 0}, {1, 0}, {2, 0}}));
  EXPECT_EQ(build_no_mixed(1, 1, 2), build_total_order(1, 1, 2));
}

TEST(IndexSets, Diagonal) {
  const auto d = build_diagonal(2, 3, 3);
  ASSERT_EQ(d.size(), 4u);
  std::set<int> degrees;
  for (const auto& j : d) {
    EXPECT_EQ(j[0], 0);
    EXPECT_EQ(j[1], 0);
    degrees.insert(j[2]);
  }
  EXPECT_EQ(degrees, (std::set<int>{0, 1, 2, 3}));
  EXPECT_EQ(as_set(build_diagonal(0, 0, 2)), (std::set<std::vector<int>>{{0, 0}}));
  EXPECT_EQ(as_set(build_diagonal(1, 2, 2)), (std::set<std::vector<int>>{{0, 0}, {0, 1}, {0, 2}}));
}

TEST(IndexSets, Union) {
  const auto s = build_total_order(1, 2, 3);
  EXPECT_EQ(union_sets(s, s), s);
  EXPECT_EQ(union_sets(s, MultiIndexSet(1, 3)), s);
  EXPECT_EQ(union_sets(build_total_order(1, 1, 2), build_diagonal(1, 3, 2)).size(), 5u);
}

TEST(IndexSets, SetsAreLowerTriangularAndOrdered) {
  for (auto type : {SetType::kTotalOrder, SetType::kNoMixed, SetType::kDiagonal}) {
    BasisSpec spec;
    spec.type = type;
    spec.degree = 3;
    spec.diagonal_degree = 5;
    const auto sets = spec.build(4);
    ASSERT_EQ(sets.size(), 4u);
    for (int i = 0; i < 4; ++i) {
      const auto& s = sets[static_cast<std::size_t>(i)];
      EXPECT_EQ(s.component(), i);
      EXPECT_GE(s.find(MultiIndex(std::vector<int>(4, 0))), 0);
      std::vector<int> e(4, 0);
      e[static_cast<std::size_t>(i)] = 5;
      EXPECT_GE(s.find(MultiIndex(e)), 0);
      for (std::size_t k = 0; k < s.size(); ++k) {
        for (int m = i + 1; m < 4; ++m) EXPECT_EQ(s[k][static_cast<std::size_t>(m)], 0);
        if (k > 0) EXPECT_LT(s[k - 1], s[k]);
      }
    }
  }
}

TEST(IndexSets, GradedOrdering) {
  EXPECT_LT(MultiIndex({1, 0}), MultiIndex({0, 1}));
  EXPECT_LT(MultiIndex({0, 1}), MultiIndex({2, 0}));
  const auto s = make_set(1, 2, {{0, 1}, {0, 0}, {1, 0}, {0, 1}});
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], MultiIndex({0, 0}));
  EXPECT_EQ(s[1], MultiIndex({1, 0}));
  EXPECT_EQ(s[2], MultiIndex({0, 1}));
}

TEST(IndexSets, RejectsInvalidMembers) {
  EXPECT_THROW(make_set(0, 2, {{0, 1}}), Error);
  EXPECT_THROW(make_set(1, 2, {{0, 1, 0}}), Error);
  EXPECT_THROW(make_set(1, 2, {{-1, 0}}), Error);
  EXPECT_THROW(MultiIndexSet(2, 2), Error);
}

TEST(IndexSets, TextRoundTrip) {
  const auto s = build_total_order(2, 3, 4);
  std::stringstream io;
  write_index_set(io, s);
  EXPECT_EQ(read_index_set(io, 2, 4), s);
  std::istringstream bad("0 0 x 0\n");
  EXPECT_THROW(read_index_set(bad, 2, 4), Error);
}

TEST(IndexSets, SetTypeNames) {
  for (auto t : {SetType::kTotalOrder, SetType::kNoMixed, SetType::kDiagonal}) {
    EXPECT_EQ(parse_set_type(to_string(t)), t);
  }
  EXPECT_THROW(parse_set_type("full"), Error);
}
