#include "tmcmc/polybasis.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "tmcmc/errors.hpp"

namespace tmcmc {

std::string_view to_string(PolynomialFamily family) {
  switch (family) {
    case PolynomialFamily::kHermite:
      return "hermite";
    case PolynomialFamily::kMonomial:
      return "monomial";
  }
  return "unknown";
}

PolynomialFamily parse_family(std::string_view name) {
  if (name == "hermite") return PolynomialFamily::kHermite;
  if (name == "monomial") return PolynomialFamily::kMonomial;
  throw ParseError("unknown polynomial family '" + std::string(name) + "'");
}

void eval_univariate_table(PolynomialFamily family, int max_degree, double x,
                           std::span<double> values, std::span<double> first,
                           std::span<double> second) {
  const auto len = static_cast<std::size_t>(max_degree) + 1;
  if (values.size() != len || (!first.empty() && first.size() != len) ||
      (!second.empty() && second.size() != len)) {
    throw DimensionError("univariate table size does not match degree");
  }
  values[0] = 1.0;
  if (max_degree >= 1) values[1] = x;
  for (int k = 1; k < max_degree; ++k) {
    values[k + 1] = family == PolynomialFamily::kHermite ? x * values[k] - k * values[k - 1]
                                                         : x * values[k];
  }
  // He'_k = k He_{k-1}; (x^k)' = k x^{k-1}. Both families share the same rule.
  if (!first.empty()) {
    first[0] = 0.0;
    for (int k = 1; k <= max_degree; ++k) first[k] = k * values[k - 1];
  }
  if (!second.empty()) {
    second[0] = 0.0;
    if (max_degree >= 1) second[1] = 0.0;
    for (int k = 2; k <= max_degree; ++k) second[k] = k * (k - 1.0) * values[k - 2];
  }
}

namespace {

std::vector<double> table(PolynomialFamily family, int degree, double x) {
  std::vector<double> v(static_cast<std::size_t>(degree) + 1);
  eval_univariate_table(family, degree, x, v);
  return v;
}

}  // namespace

double eval_univariate(PolynomialFamily family, int degree, double x) {
  if (degree < 0) throw DimensionError("negative polynomial degree");
  return table(family, degree, x).back();
}

double eval_univariate_deriv(PolynomialFamily family, int degree, double x) {
  if (degree < 0) throw DimensionError("negative polynomial degree");
  if (degree == 0) return 0.0;
  return degree * table(family, degree - 1, x).back();
}

double eval_univariate_second_deriv(PolynomialFamily family, int degree, double x) {
  if (degree < 0) throw DimensionError("negative polynomial degree");
  if (degree < 2) return 0.0;
  return degree * (degree - 1.0) * table(family, degree - 2, x).back();
}

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
  if (std::any_of(entries_.begin(), entries_.end(), [](int e) { return e < 0; })) {
    throw DimensionError("multi-index entries must be non-negative");
  }
}

int MultiIndex::total_degree() const noexcept {
  return std::accumulate(entries_.begin(), entries_.end(), 0);
}

int MultiIndex::max_entry() const noexcept {
  return entries_.empty() ? 0 : *std::max_element(entries_.begin(), entries_.end());
}

std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) {
  if (auto c = a.total_degree() <=> b.total_degree(); c != 0) return c;
  // Reversed comparison: larger leading entries come first within a degree.
  return b.entries_ <=> a.entries_;
}

MultiIndexSet::MultiIndexSet(int component, int dimension)
    : component_(component), dimension_(dimension) {
  if (dimension < 1 || component < 0 || component >= dimension) {
    throw DimensionError("multi-index set component out of range");
  }
}

MultiIndexSet::MultiIndexSet(int component, int dimension, std::vector<MultiIndex> indices)
    : MultiIndexSet(component, dimension) {
  indices_ = std::move(indices);
  for (const auto& j : indices_) {
    if (static_cast<int>(j.size()) != dimension_) {
      throw DimensionError("multi-index length does not match set dimension");
    }
    for (int k = component_ + 1; k < dimension_; ++k) {
      if (j[k] != 0) {
        throw DimensionError("multi-index breaks lower-triangular structure");
      }
    }
  }
  normalize();
}

void MultiIndexSet::normalize() {
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
}

std::ptrdiff_t MultiIndexSet::find(const MultiIndex& index) const {
  auto it = std::lower_bound(indices_.begin(), indices_.end(), index);
  if (it == indices_.end() || *it != index) return -1;
  return it - indices_.begin();
}

int MultiIndexSet::max_degree() const noexcept {
  int d = 0;
  for (const auto& j : indices_) d = std::max(d, j.max_entry());
  return d;
}

namespace {

// Enumerates all j with |j|_1 <= degree over the first `active` coordinates,
// keeping those accepted by `keep`.
template <class Pred>
MultiIndexSet enumerate(int component, int degree, int dimension, Pred keep) {
  MultiIndexSet probe(component, dimension);
  if (degree < 0) throw DimensionError("negative total degree");
  std::vector<MultiIndex> out;
  std::vector<int> entries(static_cast<std::size_t>(dimension), 0);
  const int active = component + 1;
  auto recurse = [&](auto&& self, int k, int budget) -> void {
    if (k == active) {
      if (keep(entries)) out.emplace_back(entries);
      return;
    }
    for (int e = 0; e <= budget; ++e) {
      entries[k] = e;
      self(self, k + 1, budget - e);
    }
    entries[k] = 0;
  };
  recurse(recurse, 0, degree);
  return MultiIndexSet(component, dimension, std::move(out));
}

}  // namespace

MultiIndexSet build_total_order(int component, int degree, int dimension) {
  return enumerate(component, degree, dimension, [](const std::vector<int>&) { return true; });
}

MultiIndexSet build_no_mixed(int component, int degree, int dimension) {
  return enumerate(component, degree, dimension, [](const std::vector<int>& e) {
    return std::count_if(e.begin(), e.end(), [](int v) { return v != 0; }) <= 1;
  });
}

MultiIndexSet build_diagonal(int component, int degree, int dimension) {
  return enumerate(component, degree, dimension, [component](const std::vector<int>& e) {
    for (int k = 0; k < static_cast<int>(e.size()); ++k) {
      if (k != component && e[k] != 0) return false;
    }
    return true;
  });
}

MultiIndexSet union_sets(const MultiIndexSet& a, const MultiIndexSet& b) {
  if (a.component() != b.component() || a.dimension() != b.dimension()) {
    throw DimensionError("cannot union multi-index sets of different components");
  }
  std::vector<MultiIndex> all(a.indices());
  all.insert(all.end(), b.begin(), b.end());
  return MultiIndexSet(a.component(), a.dimension(), std::move(all));
}

std::string_view to_string(SetType type) {
  switch (type) {
    case SetType::kTotalOrder: return "total";
    case SetType::kNoMixed: return "nomixed";
    case SetType::kDiagonal: return "diagonal";
  }
  return "unknown";
}

SetType parse_set_type(std::string_view name) {
  if (name == "total") return SetType::kTotalOrder;
  if (name == "nomixed") return SetType::kNoMixed;
  if (name == "diagonal") return SetType::kDiagonal;
  throw ParseError("unknown index set type '" + std::string(name) + "'");
}

std::vector<MultiIndexSet> BasisSpec::build(int dimension) const {
  if (dimension < 1) throw DimensionError("basis dimension must be positive");
  if (degree < 1) throw Error("basis degree must be at least 1");
  std::vector<MultiIndexSet> sets;
  sets.reserve(static_cast<std::size_t>(dimension));
  for (int i = 0; i < dimension; ++i) {
    MultiIndexSet s = type == SetType::kTotalOrder ? build_total_order(i, degree, dimension)
                      : type == SetType::kNoMixed  ? build_no_mixed(i, degree, dimension)
                                                   : build_diagonal(i, degree, dimension);
    if (diagonal_degree > degree) s = union_sets(s, build_diagonal(i, diagonal_degree, dimension));
    sets.push_back(std::move(s));
  }
  return sets;
}

double eval_multivariate(PolynomialFamily family, const MultiIndex& index,
                         std::span<const double> theta) {
  if (theta.size() != index.size()) throw DimensionError("point and multi-index lengths differ");
  double prod = 1.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (index[k] != 0) prod *= eval_univariate(family, index[k], theta[k]);
  }
  return prod;
}

double eval_multivariate_partial(PolynomialFamily family, const MultiIndex& index,
                                 std::span<const double> theta, int coordinate) {
  if (theta.size() != index.size()) throw DimensionError("point and multi-index lengths differ");
  if (coordinate < 0 || coordinate >= static_cast<int>(theta.size())) {
    throw DimensionError("partial derivative coordinate out of range");
  }
  double prod = 1.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (static_cast<int>(k) == coordinate) {
      prod *= eval_univariate_deriv(family, index[k], theta[k]);
    } else if (index[k] != 0) {
      prod *= eval_univariate(family, index[k], theta[k]);
    }
  }
  return prod;
}

void write_index_set(std::ostream& out, const MultiIndexSet& set) {
  for (const auto& j : set) {
    for (std::size_t k = 0; k < j.size(); ++k) {
      if (k) out << ' ';
      out << j[k];
    }
    out << '\n';
  }
}

MultiIndexSet read_index_set(std::istream& in, int component, int dimension) {
  std::vector<MultiIndex> indices;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) break;
    std::istringstream row(line);
    std::vector<int> entries;
    int v = 0;
    while (row >> v) entries.push_back(v);
    if (!row.eof()) throw ParseError("malformed multi-index line: '" + line + "'");
    if (static_cast<int>(entries.size()) != dimension) {
      throw ParseError("multi-index line has wrong length: '" + line + "'");
    }
    indices.emplace_back(std::move(entries));
  }
  return MultiIndexSet(component, dimension, std::move(indices));
}

}  // namespace tmcmc
