#include "tmcmc/diagnostics.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include <json.hpp>

#include "tmcmc/errors.hpp"

namespace tmcmc {

AutocorrelationTime autocorrelation_time(std::span<const double> x, double c) {
  const std::size_t n = x.size();
  if (n < 100) throw Error("autocorrelation needs at least 100 samples");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> d(n);
  double c0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = x[i] - mean;
    c0 += d[i] * d[i];
  }
  if (!(c0 > 0.0)) throw Error("autocorrelation of a constant series is undefined");

  double tau_half = 0.5;
  std::size_t t = 1;
  const std::size_t max_lag = n / 2;
  for (; t <= max_lag; ++t) {
    double ct = 0.0;
    for (std::size_t i = 0; i + t < n; ++i) ct += d[i] * d[i + t];
    tau_half += ct / c0;
    if (static_cast<double>(t) >= c * tau_half) break;
  }
  return {2.0 * std::max(tau_half, 0.5), static_cast<long>(std::min(t, max_lag))};
}

double integrated_autocorrelation(std::span<const double> series) {
  return autocorrelation_time(series).tau;
}

double effective_sample_size(std::span<const double> series) {
  return static_cast<double>(series.size()) / integrated_autocorrelation(series);
}

EssReport ess_report(const ChainResult& result) {
  EssReport rep;
  rep.method = result.method;
  rep.seed = result.seed;
  rep.steps = result.steps();
  rep.samples = result.steps() - result.burn_in;
  rep.evaluations = result.total_evaluations();
  rep.seconds = result.seconds;
  std::vector<double> col(static_cast<std::size_t>(rep.samples));
  for (Eigen::Index j = 0; j < result.samples.cols(); ++j) {
    for (long k = 0; k < rep.samples; ++k) {
      col[static_cast<std::size_t>(k)] = result.samples(result.burn_in + k, j);
    }
    rep.tau.push_back(integrated_autocorrelation(col));
  }
  rep.tau_max = *std::max_element(rep.tau.begin(), rep.tau.end());
  rep.min_ess = static_cast<double>(rep.samples) / rep.tau_max;
  rep.ess_per_eval = rep.evaluations > 0 ? rep.min_ess / static_cast<double>(rep.evaluations) : 0.0;
  rep.ess_per_second = rep.seconds > 0.0 ? rep.min_ess / rep.seconds : 0.0;
  rep.acceptance_rate = result.acceptance_rate(result.burn_in);
  for (std::size_t s = 0; s < result.stage_attempts.size(); ++s) {
    if (result.stage_attempts[s] == 0) continue;
    rep.stage_acceptance.push_back(static_cast<double>(result.stage_accepts[s]) /
                                   static_cast<double>(result.stage_attempts[s]));
  }
  return rep;
}

std::vector<EfficiencyRow> efficiency_table(const std::vector<EssReport>& reports,
                                            const std::string& baseline) {
  if (reports.empty()) throw Error("efficiency table needs at least one report");
  std::vector<EfficiencyRow> rows;
  std::vector<std::vector<double>> taus;
  for (const auto& r : reports) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& row) { return row.method == r.method; });
    if (it == rows.end()) {
      rows.push_back(EfficiencyRow{r.method});
      taus.emplace_back();
      it = rows.end() - 1;
    }
    auto& row = *it;
    ++row.replicates;
    row.tau_max += r.tau_max;
    row.min_ess += r.min_ess;
    row.ess_per_second += r.ess_per_second;
    row.ess_per_eval += r.ess_per_eval;
    row.acceptance_rate += r.acceptance_rate;
    taus[static_cast<std::size_t>(it - rows.begin())].push_back(r.tau_max);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& row = rows[i];
    const double m = row.replicates;
    row.tau_max /= m;
    row.min_ess /= m;
    row.ess_per_second /= m;
    row.ess_per_eval /= m;
    row.acceptance_rate /= m;
    double ss = 0.0;
    for (double t : taus[i]) ss += (t - row.tau_max) * (t - row.tau_max);
    row.sigma_tau = taus[i].size() > 1 ? std::sqrt(ss / static_cast<double>(taus[i].size() - 1)) : 0.0;
  }
  const std::string base = baseline.empty() ? rows.front().method : baseline;
  const auto b = std::find_if(rows.begin(), rows.end(), [&](const auto& row) { return row.method == base; });
  if (b == rows.end()) throw Error("baseline method '" + base + "' is not in the table");
  const EfficiencyRow ref = *b;
  for (auto& row : rows) {
    row.rel_ess_per_second = ref.ess_per_second > 0.0 ? row.ess_per_second / ref.ess_per_second : 0.0;
    row.rel_ess_per_eval = ref.ess_per_eval > 0.0 ? row.ess_per_eval / ref.ess_per_eval : 0.0;
  }
  return rows;
}

void write_table(std::ostream& out, const std::vector<EfficiencyRow>& rows) {
  const auto flags = out.flags();
  out << std::left << std::setw(14) << "method" << std::right << std::setw(5) << "reps" << std::setw(10)
      << "tau_max" << std::setw(10) << "sigma_tau" << std::setw(12) << "min ESS" << std::setw(12)
      << "ESS/sec" << std::setw(12) << "ESS/eval" << std::setw(14) << "Rel ESS/sec" << std::setw(14)
      << "Rel ESS/eval" << std::setw(8) << "acc" << '\n';
  out << std::fixed;
  for (const auto& r : rows) {
    out << std::left << std::setw(14) << r.method << std::right << std::setw(5) << r.replicates
        << std::setprecision(2) << std::setw(10) << r.tau_max << std::setw(10) << r.sigma_tau
        << std::setprecision(1) << std::setw(12) << r.min_ess << std::setw(12) << r.ess_per_second
        << std::setprecision(5) << std::setw(12) << r.ess_per_eval << std::setprecision(2)
        << std::setw(14) << r.rel_ess_per_second << std::setw(14) << r.rel_ess_per_eval
        << std::setw(8) << r.acceptance_rate << '\n';
  }
  out.flags(flags);
}

std::string table_json(const std::vector<EfficiencyRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"method", r.method},
                   {"replicates", r.replicates},
                   {"tau_max", r.tau_max},
                   {"sigma_tau", r.sigma_tau},
                   {"min_ess", r.min_ess},
                   {"ess_per_second", r.ess_per_second},
                   {"ess_per_eval", r.ess_per_eval},
                   {"rel_ess_per_second", r.rel_ess_per_second},
                   {"rel_ess_per_eval", r.rel_ess_per_eval},
                   {"acceptance_rate", r.acceptance_rate}});
  }
  return out.dump(2);
}

std::string report_json(const std::vector<EssReport>& reports) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : reports) {
    out.push_back({{"method", r.method},
                   {"seed", r.seed},
                   {"steps", r.steps},
                   {"samples", r.samples},
                   {"evaluations", r.evaluations},
                   {"seconds", r.seconds},
                   {"tau", r.tau},
                   {"tau_max", r.tau_max},
                   {"min_ess", r.min_ess},
                   {"ess_per_eval", r.ess_per_eval},
                   {"ess_per_second", r.ess_per_second},
                   {"acceptance_rate", r.acceptance_rate},
                   {"stage_acceptance", r.stage_acceptance}});
  }
  return out.dump(2);
}

std::vector<EssReport> parse_report_json(const std::string& text) {
  std::vector<EssReport> reports;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (!doc.is_array()) throw ParseError("diagnostics must be a JSON array of records");
    for (const auto& j : doc) {
      EssReport r;
      j.at("method").get_to(r.method);
      j.at("seed").get_to(r.seed);
      j.at("steps").get_to(r.steps);
      j.at("samples").get_to(r.samples);
      j.at("evaluations").get_to(r.evaluations);
      j.at("seconds").get_to(r.seconds);
      j.at("tau").get_to(r.tau);
      j.at("tau_max").get_to(r.tau_max);
      j.at("min_ess").get_to(r.min_ess);
      j.at("ess_per_eval").get_to(r.ess_per_eval);
      j.at("ess_per_second").get_to(r.ess_per_second);
      j.at("acceptance_rate").get_to(r.acceptance_rate);
      j.at("stage_acceptance").get_to(r.stage_acceptance);
      reports.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed diagnostics record: ") + e.what());
  }
  return reports;
}

}  // namespace tmcmc
