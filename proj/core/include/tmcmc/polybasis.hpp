#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tmcmc {

/// Univariate polynomial family used to build tensor-product basis functions.
enum class PolynomialFamily {
  kHermite,   ///< probabilists' Hermite polynomials He_k
  kMonomial,  ///< x^k
};

std::string_view to_string(PolynomialFamily family);
PolynomialFamily parse_family(std::string_view name);

double eval_univariate(PolynomialFamily family, int degree, double x);
double eval_univariate_deriv(PolynomialFamily family, int degree, double x);
double eval_univariate_second_deriv(PolynomialFamily family, int degree, double x);

/// Fills values[k], first[k], second[k] for k = 0..max_degree at x.
/// Either derivative span may be empty to skip it; non-empty spans must have
/// length max_degree + 1.
void eval_univariate_table(PolynomialFamily family, int max_degree, double x,
                           std::span<double> values, std::span<double> first = {},
                           std::span<double> second = {});

/// Generic-scalar evaluation of phi_0..phi_max_degree (used with jets).
template <class Scalar>
void eval_univariate_table_generic(PolynomialFamily family, int max_degree, const Scalar& x,
                                   std::vector<Scalar>& values) {
  values.assign(static_cast<std::size_t>(max_degree) + 1, Scalar(1.0));
  if (max_degree == 0) return;
  values[1] = x;
  for (int k = 1; k < max_degree; ++k) {
    if (family == PolynomialFamily::kHermite) {
      values[k + 1] = x * values[k] - Scalar(static_cast<double>(k)) * values[k - 1];
    } else {
      values[k + 1] = x * values[k];
    }
  }
}

/// Multi-index j = (j_1, ..., j_n) with non-negative entries.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> entries);

  std::size_t size() const noexcept { return entries_.size(); }
  int operator[](std::size_t k) const { return entries_[k]; }
  const std::vector<int>& entries() const noexcept { return entries_; }
  int total_degree() const noexcept;
  int max_entry() const noexcept;

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  /// Graded ordering: total degree first, then lexicographically descending
  /// entries, so (1,0) sorts before (0,1).
  friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b);

 private:
  std::vector<int> entries_;
};

/// Ordered, duplicate-free set of multi-indices feeding one map component.
/// Every member has zero entries past the owning component, which makes the
/// resulting map lower triangular.
class MultiIndexSet {
 public:
  /// `component` is zero-based; `dimension` is the ambient dimension n.
  MultiIndexSet(int component, int dimension);
  MultiIndexSet(int component, int dimension, std::vector<MultiIndex> indices);

  int component() const noexcept { return component_; }
  int dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  const MultiIndex& operator[](std::size_t k) const { return indices_[k]; }
  const std::vector<MultiIndex>& indices() const noexcept { return indices_; }
  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }

  /// Position of `index` in the set, or -1.
  std::ptrdiff_t find(const MultiIndex& index) const;
  int max_degree() const noexcept;

  friend bool operator==(const MultiIndexSet&, const MultiIndexSet&) = default;

 private:
  void normalize();

  int component_;
  int dimension_;
  std::vector<MultiIndex> indices_;
};

/// Total-order set {j : |j|_1 <= degree, j_k = 0 for k > component}.
MultiIndexSet build_total_order(int component, int degree, int dimension);
/// Total-order set with all mixed terms removed.
MultiIndexSet build_no_mixed(int component, int degree, int dimension);
/// Diagonal set: only the component's own coordinate appears.
MultiIndexSet build_diagonal(int component, int degree, int dimension);
MultiIndexSet union_sets(const MultiIndexSet& a, const MultiIndexSet& b);

enum class SetType { kTotalOrder, kNoMixed, kDiagonal };
std::string_view to_string(SetType type);
SetType parse_set_type(std::string_view name);

/// Recipe for the index sets of every component. When `diagonal_degree`
/// exceeds `degree` each set is unioned with the diagonal set of that degree.
struct BasisSpec {
  PolynomialFamily family = PolynomialFamily::kHermite;
  SetType type = SetType::kTotalOrder;
  int degree = 1;
  int diagonal_degree = 0;

  std::vector<MultiIndexSet> build(int dimension) const;
};

/// psi_j(theta) = prod_k phi_{j_k}(theta_k).
double eval_multivariate(PolynomialFamily family, const MultiIndex& index,
                         std::span<const double> theta);
/// d psi_j / d theta_i, with `coordinate` zero-based.
double eval_multivariate_partial(PolynomialFamily family, const MultiIndex& index,
                                 std::span<const double> theta, int coordinate);

/// One line per multi-index, entries separated by single spaces.
void write_index_set(std::ostream& out, const MultiIndexSet& set);
MultiIndexSet read_index_set(std::istream& in, int component, int dimension);

}  // namespace tmcmc
