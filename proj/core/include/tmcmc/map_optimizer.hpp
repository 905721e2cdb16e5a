#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "tmcmc/polybasis.hpp"
#include "tmcmc/transport_map.hpp"

namespace tmcmc {

struct OptimizerConfig {
  double k_r = 1e-4;            ///< weight of k_R ||gamma - gamma_Id||^2
  double lambda_min = 1e-8;     ///< floor on the diagonal derivative at samples
  double newton_tol = 1e-8;     ///< on ||grad||_inf / max(1, K)
  int max_newton_iters = 50;
  double contraction = 0.5;          ///< backtracking factor
  double sufficient_decrease = 1e-4;  ///< Armijo constant
  double fraction_to_boundary = 0.995;

  /// Throws tmcmc::Error when a field is out of range.
  void validate() const;
};

/// Per-component least-squares data: F (basis values), G (diagonal partials)
/// and the running Gram matrix F^T F. Rows are only ever appended.
class ComponentWorkspace {
 public:
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  ComponentWorkspace(MultiIndexSet set, PolynomialFamily family);

  /// Appends one row of F and G per sample row (samples is K x n).
  void append(const Eigen::Ref<const Eigen::MatrixXd>& samples);

  const MultiIndexSet& index_set() const noexcept { return set_; }
  PolynomialFamily family() const noexcept { return family_; }
  Eigen::Index rows() const noexcept { return rows_; }
  Eigen::Index terms() const noexcept { return static_cast<Eigen::Index>(set_.size()); }
  Eigen::Map<const RowMatrix> F() const;
  Eigen::Map<const RowMatrix> G() const;
  const Eigen::MatrixXd& gram() const noexcept { return gram_; }
  const Eigen::VectorXd& identity() const noexcept { return identity_; }

 private:
  MultiIndexSet set_;
  PolynomialFamily family_;
  Eigen::VectorXd identity_;
  std::vector<double> f_, g_;
  Eigen::Index rows_ = 0;
  Eigen::MatrixXd gram_;
};

/// 1/2 g^T (F^T F) g - sum_k log (G g)_k + k_R ||g - g_Id||^2, or +infinity
/// when some (G g)_k <= 0.
double objective(const ComponentWorkspace& ws, const Eigen::VectorXd& gamma,
                 const OptimizerConfig& cfg);

/// Objective with its gradient and Hessian; returns +infinity (leaving grad
/// and hess untouched) at infeasible points.
double objective_derivatives(const ComponentWorkspace& ws, const Eigen::VectorXd& gamma,
                             const OptimizerConfig& cfg, Eigen::VectorXd& grad,
                             Eigen::MatrixXd& hess);

struct ComponentSolution {
  Eigen::VectorXd coefficients;
  int iterations = 0;
  double objective = 0.0;
  double gradient_norm = 0.0;
  bool warm_started = false;
  /// Objective at the start point followed by one entry per Newton iteration.
  std::vector<double> objective_history;
};

/// Damped Newton solve of one component subproblem. A cold solve starts from
/// the identity or from the affine map standardizing theta_i, whichever has
/// the lower objective. A warm start at or near the constraint boundary is
/// blended toward that affine map.
ComponentSolution solve_component(const ComponentWorkspace& ws, const OptimizerConfig& cfg,
                                  const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

struct FitResult {
  TriangularMap map;
  std::vector<ComponentSolution> components;

  double total_objective() const;
};

/// Owns one workspace per component and refits the map as samples arrive.
class MapFitter {
 public:
  MapFitter(std::vector<MultiIndexSet> sets, PolynomialFamily family, OptimizerConfig cfg,
            double radius = TriangularMap::kUnbounded);

  void append(const Eigen::Ref<const Eigen::MatrixXd>& samples);
  Eigen::Index sample_count() const noexcept;
  int dimension() const noexcept { return static_cast<int>(workspaces_.size()); }
  const ComponentWorkspace& workspace(int i) const { return workspaces_.at(static_cast<std::size_t>(i)); }
  const OptimizerConfig& config() const noexcept { return cfg_; }

  /// Solves every component (concurrently when `parallel`), warm-started
  /// from `previous` when given. Throws FitError naming the failing component.
  FitResult fit(const TriangularMap* previous = nullptr, bool parallel = true) const;

  /// Fits only component i.
  ComponentSolution fit_component(int i, const TriangularMap* previous = nullptr) const;

 private:
  std::vector<ComponentWorkspace> workspaces_;
  PolynomialFamily family_;
  OptimizerConfig cfg_;
  double radius_;
};

/// One-shot fit from a K x n sample matrix.
FitResult fit_map(const Eigen::Ref<const Eigen::MatrixXd>& samples,
                  const std::vector<MultiIndexSet>& sets, PolynomialFamily family,
                  const OptimizerConfig& cfg, const TriangularMap* previous = nullptr);

}  // namespace tmcmc
