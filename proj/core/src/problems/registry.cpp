#include <ostream>

#include "tmcmc/errors.hpp"
#include "tmcmc/problems.hpp"

namespace tmcmc {

std::vector<std::string> problem_names() { return {"gaussian", "banana", "bod", "predator-prey"}; }

Problem make_problem(const ProblemOptions& options) {
  Problem p;
  if (options.name == "gaussian") {
    if (!(std::abs(options.correlation) < 1.0)) throw Error("correlation must lie in (-1, 1)");
    Eigen::Matrix2d cov;
    cov << 1.0, options.correlation, options.correlation, 1.0;
    p.target = GaussianTarget(Eigen::Vector2d::Zero(), cov).target();
    p.start = Eigen::Vector2d::Zero();
  } else if (options.name == "banana") {
    p.target = BananaTarget{options.curvature, options.scale}.target();
    p.start = Eigen::Vector2d::Zero();
  } else if (options.name == "bod") {
    const BodTarget bod = BodTarget::synthesize(options.data_seed);
    p.target = bod.target();
    p.start = bod.mode();
    p.write_dataset = [bod](std::ostream& out) { bod.write(out); };
  } else if (options.name == "predator-prey") {
    const PredatorPreyTarget pp = PredatorPreyTarget::synthesize(options.data_seed);
    p.target = pp.target();
    p.start = Eigen::VectorXd::Ones(8);
    p.write_dataset = [pp](std::ostream& out) { pp.write(out); };
  } else {
    throw Error("unknown problem '" + options.name + "'");
  }
  return p;
}

}  // namespace tmcmc
