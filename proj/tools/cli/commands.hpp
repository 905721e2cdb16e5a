#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tmcmc/map_optimizer.hpp"
#include "tmcmc/polybasis.hpp"

namespace tmcmc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

struct RunOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> output;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

struct FitmapOptions {
  std::filesystem::path samples;
  std::filesystem::path output;
  std::optional<std::filesystem::path> config;  ///< [basis] and [map] sections
  BasisSpec basis;
  OptimizerConfig optimizer;
  double radius = TriangularMap::kUnbounded;
};

struct CompareOptions {
  std::vector<std::filesystem::path> directories;
  std::string baseline;
  std::optional<std::filesystem::path> output;
};

/// Runs every replicate of a configured experiment and writes samples,
/// map snapshots, diagnostics.json and summary.txt into the output directory.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);
int cmd_fitmap(const FitmapOptions& options, std::ostream& out, std::ostream& err);
int cmd_compare(const CompareOptions& options, std::ostream& out, std::ostream& err);

/// Header "# dim=n steps=L seed=S" then one whitespace-separated row per step.
void write_samples(std::ostream& out, const Eigen::MatrixXd& samples, std::uint64_t seed);
/// Reads a sample file; '#' lines are skipped. Throws ParseError on ragged,
/// malformed or empty input.
Eigen::MatrixXd read_samples(std::istream& in);

std::string samples_file_name(int replicate);

}  // namespace tmcmc::cli
