#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tmcmc/mcmc.hpp"

namespace tmcmc {

struct AutocorrelationTime {
  double tau = 1.0;  ///< 1 + 2 sum_{t<=W} rho(t); an iid series gives 1
  long window = 0;   ///< W
};

/// Self-consistent window: W is the smallest lag with W >= c * tau_half(W),
/// where tau_half = 1/2 + sum rho. Throws for series shorter than 100 or with
/// zero variance.
AutocorrelationTime autocorrelation_time(std::span<const double> series, double c = 6.0);
double integrated_autocorrelation(std::span<const double> series);
double effective_sample_size(std::span<const double> series);

struct EssReport {
  std::string method;
  std::uint64_t seed = 0;
  long steps = 0;        ///< whole run, including burn-in
  long samples = 0;      ///< post-burn-in rows used for tau
  long evaluations = 0;  ///< whole run
  double seconds = 0.0;  ///< whole run
  std::vector<double> tau;
  double tau_max = 0.0;
  double min_ess = 0.0;
  double ess_per_eval = 0.0;
  double ess_per_second = 0.0;
  double acceptance_rate = 0.0;
  std::vector<double> stage_acceptance;  ///< accepts / attempts per stage
};

/// tau and ESS from the post-burn-in samples, costs from the whole run.
EssReport ess_report(const ChainResult& result);

struct EfficiencyRow {
  std::string method;
  int replicates = 0;
  double tau_max = 0.0;    ///< mean over replicates
  double sigma_tau = 0.0;  ///< standard deviation of tau_max over replicates
  double min_ess = 0.0;
  double ess_per_second = 0.0;
  double ess_per_eval = 0.0;
  double rel_ess_per_second = 1.0;
  double rel_ess_per_eval = 1.0;
  double acceptance_rate = 0.0;
};

/// One row per method (in order of first appearance), averaged over its
/// replicates, with ratios against `baseline` (the first method when empty).
std::vector<EfficiencyRow> efficiency_table(const std::vector<EssReport>& reports,
                                            const std::string& baseline = "");

void write_table(std::ostream& out, const std::vector<EfficiencyRow>& rows);
std::string table_json(const std::vector<EfficiencyRow>& rows);

std::string report_json(const std::vector<EssReport>& reports);
/// Inverse of report_json; throws ParseError on malformed input.
std::vector<EssReport> parse_report_json(const std::string& text);

}  // namespace tmcmc
