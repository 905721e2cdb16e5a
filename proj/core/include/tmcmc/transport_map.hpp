#pragma once

#include <iosfwd>
#include <limits>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "tmcmc/polybasis.hpp"
#include "tmcmc/target.hpp"

namespace tmcmc {

/// One component T_i(theta_1..theta_i) = sum_j gamma_j psi_j(theta).
class MapComponent {
 public:
  MapComponent(MultiIndexSet index_set, Eigen::VectorXd coefficients,
               PolynomialFamily family = PolynomialFamily::kHermite);

  const MultiIndexSet& index_set() const noexcept { return set_; }
  const Eigen::VectorXd& coefficients() const noexcept { return coeffs_; }
  PolynomialFamily family() const noexcept { return family_; }
  int component() const noexcept { return set_.component(); }
  int max_degree() const noexcept { return max_degree_; }

  /// Raw polynomial value. Only theta[0..component] is read.
  double value(std::span<const double> theta) const;
  /// Raw value and the diagonal derivative dT_i/dtheta_i.
  double value_and_diag(std::span<const double> theta, double& diag) const;
  /// Raw gradient over theta[0..component] (remaining entries set to zero)
  /// and the row of second derivatives d^2 T_i / (dtheta_m dtheta_i).
  void derivatives(std::span<const double> theta, Eigen::Ref<Eigen::VectorXd> gradient,
                   Eigen::Ref<Eigen::VectorXd> diag_row) const;

  /// Polynomial in the component's own coordinate with earlier coordinates
  /// fixed: T_i(prefix, t) = sum_d c_d phi_d(t). Returns c_0..c_maxdeg.
  Eigen::VectorXd slice_coefficients(std::span<const double> prefix) const;

 private:
  MultiIndexSet set_;
  Eigen::VectorXd coeffs_;
  PolynomialFamily family_;
  int max_degree_;
};

/// Lower-triangular transport map T(theta) from target space to a standard
/// normal reference.
///
/// With a finite radius R each component is linearly extended outside the
/// ball ||theta_{1:i}|| <= R along the radial direction, which bounds the
/// derivatives while keeping the map triangular. R = infinity disables it.
class TriangularMap {
 public:
  static constexpr double kUnbounded = std::numeric_limits<double>::infinity();
  static constexpr double kDefaultLambdaMin = 1e-8;

  TriangularMap(std::vector<MapComponent> components, double lambda_min = kDefaultLambdaMin,
                double radius = kUnbounded);

  int dimension() const noexcept { return static_cast<int>(components_.size()); }
  const MapComponent& component(int i) const { return components_.at(static_cast<std::size_t>(i)); }
  const std::vector<MapComponent>& components() const noexcept { return components_; }
  double lambda_min() const noexcept { return lambda_min_; }
  double radius() const noexcept { return radius_; }
  PolynomialFamily family() const noexcept { return components_.front().family(); }

  std::vector<MultiIndexSet> index_sets() const;

  Eigen::VectorXd forward(const Eigen::VectorXd& theta) const;
  /// Component i of T^R at theta (reads theta[0..i]).
  double forward_component(int i, std::span<const double> theta) const;
  Eigen::VectorXd jacobian_diag(const Eigen::VectorXd& theta) const;
  /// Full lower-triangular Jacobian DT(theta).
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& theta) const;
  /// sum_i log dT_i/dtheta_i; throws MonotonicityError on a non-positive
  /// diagonal derivative.
  double log_det_jacobian(const Eigen::VectorXd& theta) const;
  /// Forward image and log-determinant in one pass.
  Eigen::VectorXd forward_with_log_det(const Eigen::VectorXd& theta, double& log_det) const;

  /// Sequential inversion by one-dimensional bracketed solves. Brackets
  /// expand from `hint` (a nearby preimage, e.g. the current chain state)
  /// when given, otherwise from zero.
  Eigen::VectorXd inverse(const Eigen::VectorXd& r, const Eigen::VectorXd* hint = nullptr) const;

  /// log N(T(theta); 0, I) + log det DT(theta).
  double pullback_log_density(const Eigen::VectorXd& theta) const;

  /// Jacobian and the matrix whose row i is H_i = d/dtheta (dT_i/dtheta_i).
  void second_order(const Eigen::VectorXd& theta, Eigen::MatrixXd& jac, Eigen::MatrixXd& hrows) const;

  /// Absolute residual tolerance per component for `inverse`.
  static constexpr double kInverseTolerance = 1e-10;

 private:
  bool inside(std::span<const double> theta, int i) const;
  double diag_component(int i, std::span<const double> theta) const;
  double solve_component(int i, std::span<const double> prefix, double target, double start) const;

  std::vector<MapComponent> components_;
  double lambda_min_;
  double radius_;
};

using MapPtr = std::shared_ptr<const TriangularMap>;

/// Identity map over the given index sets; each set must contain e_i.
TriangularMap identity_map(const std::vector<MultiIndexSet>& sets,
                           PolynomialFamily family = PolynomialFamily::kHermite,
                           double lambda_min = TriangularMap::kDefaultLambdaMin,
                           double radius = TriangularMap::kUnbounded);

/// Coefficients of the identity component for `set` (1 on e_i, 0 elsewhere).
Eigen::VectorXd identity_coefficients(const MultiIndexSet& set);

/// log N(r; 0, I).
double standard_normal_log_density(const Eigen::VectorXd& r);

/// log pi(T^{-1}(r)) - log det DT(T^{-1}(r)).
double pushforward_log_density(const TriangularMap& map, const TargetDensity& target,
                               const Eigen::VectorXd& r);

/// Gradient of the pushforward log-density at r. Requires a target gradient.
Eigen::VectorXd pushforward_gradient(const TriangularMap& map, const TargetDensity& target,
                                     const Eigen::VectorXd& r);

/// Same as above given theta = T^{-1}(r) and grad_theta log pi(theta).
Eigen::VectorXd pushforward_gradient_at(const TriangularMap& map, const Eigen::VectorXd& theta,
                                        const Eigen::VectorXd& target_gradient);

/// Structured text serialization; coefficients use 17 significant digits.
void write_map(std::ostream& out, const TriangularMap& map);
TriangularMap read_map(std::istream& in);

}  // namespace tmcmc
