#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "tmcmc/adaptive_metropolis.hpp"
#include "tmcmc/errors.hpp"
#include "tmcmc/mcmc.hpp"
#include "tmcmc/problems.hpp"

namespace tmcmc::cli {

/// Configuration error with the offending line (0 when unknown) and field.
class ConfigError : public Error {
 public:
  ConfigError(int line, std::string field, const std::string& message);
  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  int line_;
  std::string field_;
};

/// `[section]` headers and `key = value` lines; `#` and `;` start comments.
class IniDocument {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static IniDocument parse(std::istream& in);
  static IniDocument load(const std::filesystem::path& path);

  bool has(const std::string& section, const std::string& key) const;
  const Entry* find(const std::string& section, const std::string& key) const;
  const std::map<std::string, std::map<std::string, Entry>>& sections() const noexcept { return sections_; }

 private:
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

enum class Sampler { kTransportMap, kAdaptiveMetropolis };

struct RunConfig {
  std::string name;  ///< method label; defaults to the sampler's label
  Sampler sampler = Sampler::kTransportMap;
  ProblemOptions problem;
  ChainConfig chain;
  AdaptiveMetropolisConfig am;
  int replicates = 1;
  std::uint64_t seed = 0;
  std::filesystem::path output = "tmcmc-out";

  std::string method_label() const;
};

/// Parses a run configuration. Unknown sections or keys, malformed values
/// and out-of-range settings raise ConfigError.
RunConfig parse_run_config(const IniDocument& doc);
RunConfig load_run_config(const std::filesystem::path& path);

/// Reads the [basis] and [map] sections, ignoring any others (used by fitmap).
void apply_basis_sections(const IniDocument& doc, BasisSpec& basis, OptimizerConfig& optimizer,
                          double& radius);

}  // namespace tmcmc::cli
