#include "tmcmc/transport_map.hpp"

#include <cstdio>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "jet.hpp"
#include "tmcmc/errors.hpp"

namespace tmcmc {

using detail::Jet;

namespace {

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Univariate tables for coordinates 0..active-1, stored row-wise with stride
// (max_degree + 1).
struct BasisTables {
  int stride = 0;
  std::vector<double> values, first, second;

  void fill(PolynomialFamily family, int max_degree, std::span<const double> theta, int active,
            bool want_first, bool want_second) {
    stride = max_degree + 1;
    const auto len = static_cast<std::size_t>(stride) * static_cast<std::size_t>(active);
    values.resize(len);
    first.resize(want_first ? len : 0);
    second.resize(want_second ? len : 0);
    for (int k = 0; k < active; ++k) {
      const auto off = static_cast<std::size_t>(k * stride);
      eval_univariate_table(
          family, max_degree, theta[static_cast<std::size_t>(k)],
          std::span<double>(values).subspan(off, static_cast<std::size_t>(stride)),
          want_first ? std::span<double>(first).subspan(off, static_cast<std::size_t>(stride))
                     : std::span<double>{},
          want_second ? std::span<double>(second).subspan(off, static_cast<std::size_t>(stride))
                      : std::span<double>{});
    }
  }
  double v(int k, int d) const { return values[static_cast<std::size_t>(k * stride + d)]; }
  double d1(int k, int d) const { return first[static_cast<std::size_t>(k * stride + d)]; }
  double d2(int k, int d) const { return second[static_cast<std::size_t>(k * stride + d)]; }
};

template <class Scalar>
Scalar component_value_generic(const MapComponent& c, const std::vector<Scalar>& theta) {
  const int active = c.component() + 1;
  std::vector<std::vector<Scalar>> tables(static_cast<std::size_t>(active));
  for (int k = 0; k < active; ++k) {
    eval_univariate_table_generic(c.family(), c.max_degree(), theta[static_cast<std::size_t>(k)],
                                  tables[static_cast<std::size_t>(k)]);
  }
  Scalar sum(0.0);
  const auto& set = c.index_set();
  for (std::size_t t = 0; t < set.size(); ++t) {
    Scalar term(c.coefficients()[static_cast<Eigen::Index>(t)]);
    for (int k = 0; k < active; ++k) {
      const int d = set[t][static_cast<std::size_t>(k)];
      if (d != 0) term = term * tables[static_cast<std::size_t>(k)][static_cast<std::size_t>(d)];
    }
    sum = sum + term;
  }
  return sum;
}

// T^R_i evaluated in generic scalar arithmetic outside the ball:
// T_i(w) + (u . grad T_i(w)) (||x|| - R), with w = R u and u = x / ||x||.
template <class S>
S extended_value(const MapComponent& c, const std::vector<S>& x, double radius) {
  S norm2(0.0);
  for (const auto& xi : x) norm2 = norm2 + xi * xi;
  const S norm = sqrt(norm2);
  std::vector<Jet<S>> w(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const S u = x[k] / norm;
    w[k] = Jet<S>(u * radius, u);
  }
  const Jet<S> tw = component_value_generic(c, w);
  return tw.v + tw.d * (norm - radius);
}

}  // namespace

namespace {

double extended_value_d(const MapComponent& c, std::span<const double> theta, double radius) {
  const int active = c.component() + 1;
  std::vector<double> x(theta.begin(), theta.begin() + active);
  double norm = 0.0;
  for (double xi : x) norm += xi * xi;
  norm = std::sqrt(norm);
  std::vector<Jet<double>> w(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double u = x[k] / norm;
    w[k] = Jet<double>(u * radius, u);
  }
  const Jet<double> tw = component_value_generic(c, w);
  return tw.v + tw.d * (norm - radius);
}

// Gradient of T^R_i outside the ball via first-order jets (one per direction).
Eigen::VectorXd extended_gradient(const MapComponent& c, std::span<const double> theta,
                                  double radius) {
  const int active = c.component() + 1;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(theta.size()));
  for (int m = 0; m < active; ++m) {
    std::vector<Jet<double>> x(static_cast<std::size_t>(active));
    for (int k = 0; k < active; ++k) x[static_cast<std::size_t>(k)] = Jet<double>(theta[static_cast<std::size_t>(k)], k == m ? 1.0 : 0.0);
    g[m] = extended_value(c, x, radius).d;
  }
  return g;
}

// Row of second derivatives d^2 T^R_i / (dx_m dx_i) outside the ball.
Eigen::VectorXd extended_diag_row(const MapComponent& c, std::span<const double> theta,
                                  double radius) {
  using J2 = Jet<Jet<double>>;
  const int active = c.component() + 1;
  const int i = c.component();
  Eigen::VectorXd h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(theta.size()));
  for (int m = 0; m < active; ++m) {
    std::vector<J2> x(static_cast<std::size_t>(active));
    for (int k = 0; k < active; ++k) {
      x[static_cast<std::size_t>(k)] =
          J2(Jet<double>(theta[static_cast<std::size_t>(k)], k == m ? 1.0 : 0.0),
             Jet<double>(k == i ? 1.0 : 0.0, 0.0));
    }
    h[m] = extended_value(c, x, radius).d.d;
  }
  return h;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

MapComponent::MapComponent(MultiIndexSet index_set, Eigen::VectorXd coefficients,
                           PolynomialFamily family)
    : set_(std::move(index_set)),
      coeffs_(std::move(coefficients)),
      family_(family),
      max_degree_(set_.max_degree()) {
  if (static_cast<std::size_t>(coeffs_.size()) != set_.size()) {
    throw DimensionError("coefficient count does not match index set size");
  }
  if (!coeffs_.allFinite()) throw Error("map coefficients must be finite");
}

double MapComponent::value(std::span<const double> theta) const {
  BasisTables tab;
  const int active = component() + 1;
  tab.fill(family_, max_degree_, theta, active, false, false);
  double sum = 0.0;
  for (std::size_t t = 0; t < set_.size(); ++t) {
    double term = coeffs_[static_cast<Eigen::Index>(t)];
    for (int k = 0; k < active; ++k) term *= tab.v(k, set_[t][static_cast<std::size_t>(k)]);
    sum += term;
  }
  return sum;
}

double MapComponent::value_and_diag(std::span<const double> theta, double& diag) const {
  BasisTables tab;
  const int active = component() + 1;
  const int i = component();
  tab.fill(family_, max_degree_, theta, active, true, false);
  double sum = 0.0;
  diag = 0.0;
  for (std::size_t t = 0; t < set_.size(); ++t) {
    const auto& j = set_[t];
    double prefix = coeffs_[static_cast<Eigen::Index>(t)];
    for (int k = 0; k < i; ++k) prefix *= tab.v(k, j[static_cast<std::size_t>(k)]);
    const int ji = j[static_cast<std::size_t>(i)];
    sum += prefix * tab.v(i, ji);
    diag += prefix * tab.d1(i, ji);
  }
  return sum;
}

void MapComponent::derivatives(std::span<const double> theta, Eigen::Ref<Eigen::VectorXd> gradient,
                               Eigen::Ref<Eigen::VectorXd> diag_row) const {
  BasisTables tab;
  const int active = component() + 1;
  const int i = component();
  tab.fill(family_, max_degree_, theta, active, true, true);
  gradient.setZero();
  diag_row.setZero();
  for (std::size_t t = 0; t < set_.size(); ++t) {
    const auto& j = set_[t];
    const double c = coeffs_[static_cast<Eigen::Index>(t)];
    if (c == 0.0) continue;
    const int ji = j[static_cast<std::size_t>(i)];
    for (int m = 0; m < active; ++m) {
      const int jm = j[static_cast<std::size_t>(m)];
      if (jm == 0) continue;
      double g = c * tab.d1(m, jm);
      double h = m == i ? c * tab.d2(i, ji) : c * tab.d1(m, jm) * tab.d1(i, ji);
      for (int k = 0; k < active; ++k) {
        if (k == m) continue;
        const int jk = j[static_cast<std::size_t>(k)];
        g *= tab.v(k, jk);
        if (k != i) h *= tab.v(k, jk);
      }
      gradient[m] += g;
      diag_row[m] += h;
    }
  }
}

Eigen::VectorXd MapComponent::slice_coefficients(std::span<const double> prefix) const {
  const int i = component();
  BasisTables tab;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(max_degree_ + 1);
  if (i > 0) tab.fill(family_, max_degree_, prefix, i, false, false);
  for (std::size_t t = 0; t < set_.size(); ++t) {
    const auto& j = set_[t];
    double w = coeffs_[static_cast<Eigen::Index>(t)];
    for (int k = 0; k < i; ++k) w *= tab.v(k, j[static_cast<std::size_t>(k)]);
    c[j[static_cast<std::size_t>(i)]] += w;
  }
  return c;
}

TriangularMap::TriangularMap(std::vector<MapComponent> components, double lambda_min,
                             double radius)
    : components_(std::move(components)), lambda_min_(lambda_min), radius_(radius) {
  if (components_.empty()) throw DimensionError("a map needs at least one component");
  const int n = dimension();
  for (int i = 0; i < n; ++i) {
    const auto& set = components_[static_cast<std::size_t>(i)].index_set();
    if (set.component() != i || set.dimension() != n) {
      throw DimensionError("component " + std::to_string(i) +
                           " has an index set for a different component or dimension");
    }
    if (components_[static_cast<std::size_t>(i)].family() != components_.front().family()) {
      throw Error("all map components must share a polynomial family");
    }
  }
  if (!(lambda_min_ > 0.0)) throw Error("lambda_min must be positive");
  if (!(radius_ > 0.0)) throw Error("extension radius must be positive");
}

std::vector<MultiIndexSet> TriangularMap::index_sets() const {
  std::vector<MultiIndexSet> sets;
  sets.reserve(components_.size());
  for (const auto& c : components_) sets.push_back(c.index_set());
  return sets;
}

bool TriangularMap::inside(std::span<const double> theta, int i) const {
  if (std::isinf(radius_)) return true;
  double norm2 = 0.0;
  for (int k = 0; k <= i; ++k) norm2 += theta[static_cast<std::size_t>(k)] * theta[static_cast<std::size_t>(k)];
  return norm2 <= radius_ * radius_;
}

double TriangularMap::forward_component(int i, std::span<const double> theta) const {
  const auto& c = components_[static_cast<std::size_t>(i)];
  if (inside(theta, i)) return c.value(theta);
  return extended_value_d(c, theta, radius_);
}

double TriangularMap::diag_component(int i, std::span<const double> theta) const {
  const auto& c = components_[static_cast<std::size_t>(i)];
  if (inside(theta, i)) {
    double diag = 0.0;
    c.value_and_diag(theta, diag);
    return diag;
  }
  return extended_gradient(c, theta, radius_)[i];
}

Eigen::VectorXd TriangularMap::forward(const Eigen::VectorXd& theta) const {
  if (theta.size() != dimension()) throw DimensionError("forward: point has wrong dimension");
  std::span<const double> x(theta.data(), static_cast<std::size_t>(theta.size()));
  Eigen::VectorXd r(theta.size());
  for (int i = 0; i < dimension(); ++i) r[i] = forward_component(i, x);
  return r;
}

Eigen::VectorXd TriangularMap::jacobian_diag(const Eigen::VectorXd& theta) const {
  if (theta.size() != dimension()) throw DimensionError("jacobian_diag: point has wrong dimension");
  std::span<const double> x(theta.data(), static_cast<std::size_t>(theta.size()));
  Eigen::VectorXd d(theta.size());
  for (int i = 0; i < dimension(); ++i) d[i] = diag_component(i, x);
  return d;
}

Eigen::MatrixXd TriangularMap::jacobian(const Eigen::VectorXd& theta) const {
  Eigen::MatrixXd jac, h;
  second_order(theta, jac, h);
  return jac;
}

double TriangularMap::log_det_jacobian(const Eigen::VectorXd& theta) const {
  double log_det = 0.0;
  forward_with_log_det(theta, log_det);
  return log_det;
}

Eigen::VectorXd TriangularMap::forward_with_log_det(const Eigen::VectorXd& theta,
                                                    double& log_det) const {
  if (theta.size() != dimension()) throw DimensionError("forward: point has wrong dimension");
  std::span<const double> x(theta.data(), static_cast<std::size_t>(theta.size()));
  Eigen::VectorXd r(theta.size());
  log_det = 0.0;
  for (int i = 0; i < dimension(); ++i) {
    const auto& c = components_[static_cast<std::size_t>(i)];
    double diag = 0.0;
    if (inside(x, i)) {
      r[i] = c.value_and_diag(x, diag);
    } else {
      r[i] = extended_value_d(c, x, radius_);
      diag = extended_gradient(c, x, radius_)[i];
    }
    if (!(diag > 0.0)) throw MonotonicityError(i, to_vector(theta), diag);
    log_det += std::log(diag);
  }
  return r;
}

double TriangularMap::solve_component(int i, std::span<const double> prefix, double target,
                                     double start) const {
  const auto& comp = components_[static_cast<std::size_t>(i)];
  std::vector<double> x(prefix.begin(), prefix.begin() + i);
  x.push_back(0.0);
  const bool polynomial_slice = std::isinf(radius_);
  Eigen::VectorXd slice;
  std::vector<double> vals, d1;
  if (polynomial_slice) {
    slice = comp.slice_coefficients(prefix);
    vals.resize(static_cast<std::size_t>(slice.size()));
    d1.resize(vals.size());
  }
  const int deg = static_cast<int>(slice.size()) - 1;

  auto residual = [&](double t, double* deriv) {
    if (polynomial_slice) {
      eval_univariate_table(comp.family(), deg, t, vals, d1);
      double f = -target, df = 0.0;
      for (int d = 0; d <= deg; ++d) {
        f += slice[d] * vals[static_cast<std::size_t>(d)];
        df += slice[d] * d1[static_cast<std::size_t>(d)];
      }
      if (deriv) *deriv = df;
      return f;
    }
    x[static_cast<std::size_t>(i)] = t;
    if (deriv) *deriv = diag_component(i, x);
    return forward_component(i, x) - target;
  };

  // Bracket a sign change by geometric expansion away from the start point,
  // with the first step sized by a Newton step. Local dips of the slice are
  // tolerated here; the derivative is checked at the root.
  constexpr int kMaxExpansions = 80;
  double d0 = 0.0;
  const double f0 = residual(start, &d0);
  if (!std::isfinite(f0)) throw InversionError(i, "non-finite map value during inversion");
  if (f0 == 0.0 && d0 > 0.0) return start;
  const double dir = f0 < 0.0 ? 1.0 : -1.0;
  double near = start, f_near = f0;
  double step = d0 > 0.0 && std::isfinite(d0) ? std::max(std::abs(f0) / d0, 1e-8 * (1.0 + std::abs(start))) : 1.0;
  double far = start, f_far = f0;
  bool bracketed = false;
  for (int e = 0; e < kMaxExpansions; ++e) {
    far = near + dir * step;
    f_far = residual(far, nullptr);
    if (!std::isfinite(f_far)) throw InversionError(i, "non-finite map value during bracketing");
    if ((f_far > 0.0) != (f_near > 0.0) || f_far == 0.0) {
      bracketed = true;
      break;
    }
    near = far;
    f_near = f_far;
    step *= 2.0;
  }
  if (!bracketed) throw InversionError(i, "could not bracket root within expansion limit");
  double lo = std::min(near, far), hi = std::max(near, far);
  if (f_far == 0.0) lo = hi = far;
  double t = 0.5 * (lo + hi);
  // Bisection down to a coarse width, then Newton polish inside the bracket.
  constexpr int kMaxBisections = 40;
  for (int it = 0; it < kMaxBisections && lo < hi; ++it) {
    t = 0.5 * (lo + hi);
    const double f = residual(t, nullptr);
    if (f == 0.0) {
      lo = hi = t;
      break;
    }
    if (f < 0.0) lo = t; else hi = t;
    if (hi - lo <= 1e-6 * (1.0 + std::abs(t))) break;
  }
  t = 0.5 * (lo + hi);
  // Safeguarded Newton inside the bracket. When the map value suffers
  // cancellation the residual floor can exceed the tolerance, so a bracket
  // collapsed to a few ulps also counts as converged.
  constexpr int kPolishSteps = 60;
  const auto collapsed = [&] {
    return hi - lo <= 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(t));
  };
  double deriv = 0.0;
  double f = residual(t, &deriv);
  for (int it = 0; it < kPolishSteps && f != 0.0 && std::abs(f) > kInverseTolerance; ++it) {
    if (f < 0.0) lo = t; else hi = t;
    if (collapsed()) break;
    double next = deriv > 0.0 ? t - f / deriv : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
    f = residual(t, &deriv);
  }
  if (!(std::abs(f) <= kInverseTolerance) && !collapsed()) {
    throw InversionError(i, "one-dimensional solve did not reach tolerance (residual " + fmt_g(f) +
                                ", target " + fmt_g(target) + ", t " + fmt_g(t) + ")");
  }
  if (!(deriv > 0.0)) {
    x[static_cast<std::size_t>(i)] = t;
    throw MonotonicityError(i, x, deriv);
  }
  return t;
}

Eigen::VectorXd TriangularMap::inverse(const Eigen::VectorXd& r, const Eigen::VectorXd* hint) const {
  if (r.size() != dimension()) throw DimensionError("inverse: point has wrong dimension");
  if (hint && hint->size() != dimension()) throw DimensionError("inverse: hint has wrong dimension");
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(r.size());
  for (int i = 0; i < dimension(); ++i) {
    theta[i] = solve_component(i, std::span<const double>(theta.data(), static_cast<std::size_t>(theta.size())), r[i],
                               hint ? (*hint)[i] : 0.0);
  }
  return theta;
}

double standard_normal_log_density(const Eigen::VectorXd& r) {
  return -0.5 * static_cast<double>(r.size()) * std::log(2.0 * std::numbers::pi) - 0.5 * r.squaredNorm();
}

double TriangularMap::pullback_log_density(const Eigen::VectorXd& theta) const {
  double log_det = 0.0;
  const Eigen::VectorXd r = forward_with_log_det(theta, log_det);
  return standard_normal_log_density(r) + log_det;
}

void TriangularMap::second_order(const Eigen::VectorXd& theta, Eigen::MatrixXd& jac,
                                 Eigen::MatrixXd& hrows) const {
  if (theta.size() != dimension()) throw DimensionError("second_order: point has wrong dimension");
  const int n = dimension();
  std::span<const double> x(theta.data(), static_cast<std::size_t>(n));
  jac = Eigen::MatrixXd::Zero(n, n);
  hrows = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd g(n), h(n);
  for (int i = 0; i < n; ++i) {
    const auto& c = components_[static_cast<std::size_t>(i)];
    if (inside(x, i)) {
      c.derivatives(x, g, h);
    } else {
      g = extended_gradient(c, x, radius_);
      h = extended_diag_row(c, x, radius_);
    }
    jac.row(i) = g.transpose();
    hrows.row(i) = h.transpose();
  }
}

Eigen::VectorXd identity_coefficients(const MultiIndexSet& set) {
  std::vector<int> e(static_cast<std::size_t>(set.dimension()), 0);
  e[static_cast<std::size_t>(set.component())] = 1;
  const auto pos = set.find(MultiIndex(e));
  if (pos < 0) {
    throw Error("index set for component " + std::to_string(set.component()) +
                " lacks the linear diagonal term required by the identity map");
  }
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(set.size()));
  c[pos] = 1.0;
  return c;
}

TriangularMap identity_map(const std::vector<MultiIndexSet>& sets, PolynomialFamily family,
                           double lambda_min, double radius) {
  std::vector<MapComponent> comps;
  comps.reserve(sets.size());
  for (const auto& s : sets) comps.emplace_back(s, identity_coefficients(s), family);
  return TriangularMap(std::move(comps), lambda_min, radius);
}

double pushforward_log_density(const TriangularMap& map, const TargetDensity& target,
                               const Eigen::VectorXd& r) {
  const Eigen::VectorXd theta = map.inverse(r);
  const double lp = target.log_density(theta);
  return lp - map.log_det_jacobian(theta);
}

Eigen::VectorXd pushforward_gradient_at(const TriangularMap& map, const Eigen::VectorXd& theta,
                                        const Eigen::VectorXd& target_gradient) {
  Eigen::MatrixXd jac, hrows;
  map.second_order(theta, jac, hrows);
  Eigen::VectorXd v = target_gradient;
  for (int i = 0; i < map.dimension(); ++i) {
    const double d = jac(i, i);
    if (!(d > 0.0)) throw MonotonicityError(i, to_vector(theta), d);
    v -= hrows.row(i).transpose() / d;
  }
  // Row vector v times DT^{-1}: solve DT^T g = v (upper-triangular system).
  return jac.transpose().triangularView<Eigen::Upper>().solve(v);
}

Eigen::VectorXd pushforward_gradient(const TriangularMap& map, const TargetDensity& target,
                                     const Eigen::VectorXd& r) {
  if (!target.has_gradient()) throw Error("target '" + target.name + "' supplies no gradient");
  const Eigen::VectorXd theta = map.inverse(r);
  Eigen::VectorXd grad(theta.size());
  target.log_density_gradient(theta, grad);
  return pushforward_gradient_at(map, theta, grad);
}

MonotonicityError::MonotonicityError(int component, std::vector<double> point, double derivative)
    : Error("map is not monotone in component " + std::to_string(component) +
            " (diagonal derivative " + std::to_string(derivative) + ")"),
      component_(component),
      point_(std::move(point)),
      derivative_(derivative) {}

InversionError::InversionError(int component, const std::string& what)
    : Error("inversion failed in component " + std::to_string(component) + ": " + what),
      component_(component) {}

}  // namespace tmcmc
