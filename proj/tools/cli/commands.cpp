#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "config.hpp"
#include "tmcmc/diagnostics.hpp"
#include "tmcmc/errors.hpp"

namespace tmcmc::cli {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw Error("write to '" + path.string() + "' failed");
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct Replicate {
  int index = 0;
  ChainResult result;
  EssReport report;
};

Replicate run_replicate(const RunConfig& cfg, const Problem& problem, int index) {
  Replicate rep;
  rep.index = index;
  const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(index);
  if (cfg.sampler == Sampler::kAdaptiveMetropolis) {
    AdaptiveMetropolisConfig am = cfg.am;
    am.seed = seed;
    rep.result = run_adaptive_metropolis(am, problem.target, problem.start);
  } else {
    ChainConfig chain = cfg.chain;
    chain.seed = seed;
    rep.result = run_adaptive(chain, problem.target, problem.start);
  }
  rep.result.method = cfg.method_label();
  rep.report = ess_report(rep.result);
  return rep;
}

void write_replicate(const fs::path& dir, const Replicate& rep) {
  {
    std::ostringstream s;
    write_samples(s, rep.result.samples, rep.result.seed);
    write_file(dir / samples_file_name(rep.index), s.str());
  }
  if (!rep.result.adaptations.empty()) {
    std::ostringstream s;
    s << "# step sigma2_before sigma2_after applied newton_iterations\n" << std::setprecision(17);
    for (const auto& a : rep.result.adaptations) {
      s << a.step << ' ' << a.sigma2_before << ' ' << a.sigma2_after << ' ' << (a.applied ? 1 : 0) << ' ';
      for (std::size_t i = 0; i < a.newton_iterations.size(); ++i) {
        s << (i ? "," : "") << a.newton_iterations[i];
      }
      if (a.newton_iterations.empty()) s << '-';
      s << '\n';
    }
    write_file(dir / ("adaptations_r" + std::to_string(rep.index) + ".txt"), s.str());
  }
  if (rep.result.maps.size() > 1) {
    const fs::path maps = dir / "maps";
    fs::create_directories(maps);
    for (const auto& snap : rep.result.maps) {
      std::ostringstream s;
      write_map(s, *snap.map);
      write_file(maps / ("r" + std::to_string(rep.index) + "_step" + std::to_string(snap.step) + ".map"),
                 s.str());
    }
  }
}

std::string summary_text(const RunConfig& cfg, const std::vector<Replicate>& reps) {
  std::ostringstream s;
  s << "method   " << cfg.method_label() << '\n';
  s << "problem  " << cfg.problem.name << '\n';
  s << "steps    " << (cfg.sampler == Sampler::kAdaptiveMetropolis ? cfg.am.steps : cfg.chain.steps)
    << " (burn-in " << cfg.chain.burn_in << ")\n\n";
  s << "replicate seed acceptance evaluations seconds adaptations final_sigma2\n";
  for (const auto& r : reps) {
    const auto hist = r.result.sigma2_history();
    s << r.index << ' ' << r.result.seed << ' ' << std::fixed << std::setprecision(4)
      << r.report.acceptance_rate << ' ' << r.report.evaluations << ' ' << std::setprecision(3)
      << r.report.seconds << ' ' << r.result.adaptations.size() << ' ' << std::defaultfloat
      << std::setprecision(6) << (hist.empty() ? std::numeric_limits<double>::quiet_NaN() : hist.back())
      << '\n';
  }
  s << '\n';
  std::vector<EssReport> reports;
  for (const auto& r : reps) reports.push_back(r.report);
  write_table(s, efficiency_table(reports));
  return s.str();
}

}  // namespace

std::string samples_file_name(int replicate) { return "samples_r" + std::to_string(replicate) + ".txt"; }

void write_samples(std::ostream& out, const Eigen::MatrixXd& samples, std::uint64_t seed) {
  out << "# dim=" << samples.cols() << " steps=" << samples.rows() << " seed=" << seed << '\n';
  out << std::setprecision(17);
  for (Eigen::Index k = 0; k < samples.rows(); ++k) {
    for (Eigen::Index j = 0; j < samples.cols(); ++j) out << (j ? " " : "") << samples(k, j);
    out << '\n';
  }
}

Eigen::MatrixXd read_samples(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::vector<double> vals;
    std::string token;
    while (row >> token) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size()) throw ParseError("line " + std::to_string(lineno) + ": bad number '" + token + "'");
      vals.push_back(v);
    }
    if (vals.empty()) continue;
    if (!rows.empty() && vals.size() != rows.front().size()) {
      throw ParseError("line " + std::to_string(lineno) + ": expected " + std::to_string(rows.front().size()) +
                       " columns");
    }
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw ParseError("sample file contains no samples");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t j = 0; j < rows[k].size(); ++j) m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = rows[k][j];
  }
  return m;
}

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_run_config(options.config);
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (options.seed) {
    cfg.seed = *options.seed;
    cfg.chain.seed = cfg.am.seed = cfg.seed;
  }
  if (options.output) cfg.output = *options.output;
  if (options.jobs < 1) {
    err << "config error: --jobs must be at least 1\n";
    return kExitConfig;
  }

  try {
    fs::create_directories(cfg.output);
    const Problem problem = make_problem(cfg.problem);
    if (problem.write_dataset) {
      std::ostringstream s;
      problem.write_dataset(s);
      write_file(cfg.output / "dataset.txt", s.str());
    }

    std::vector<Replicate> reps(static_cast<std::size_t>(cfg.replicates));
    for (int first = 0; first < cfg.replicates; first += options.jobs) {
      const int last = std::min(cfg.replicates, first + options.jobs);
      std::vector<std::future<Replicate>> wave;
      for (int r = first; r < last; ++r) {
        wave.push_back(std::async(std::launch::async, [&cfg, &problem, r] { return run_replicate(cfg, problem, r); }));
      }
      for (int r = first; r < last; ++r) reps[static_cast<std::size_t>(r)] = wave[static_cast<std::size_t>(r - first)].get();
    }

    std::vector<EssReport> reports;
    for (const auto& rep : reps) {
      write_replicate(cfg.output, rep);
      reports.push_back(rep.report);
    }
    write_file(cfg.output / "diagnostics.json", report_json(reports) + "\n");
    const std::string summary = summary_text(cfg, reps);
    write_file(cfg.output / "summary.txt", summary);
    out << summary;
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_fitmap(const FitmapOptions& options, std::ostream& out, std::ostream& err) {
  FitmapOptions opt = options;
  Eigen::MatrixXd samples;
  try {
    if (opt.config) apply_basis_sections(IniDocument::load(*opt.config), opt.basis, opt.optimizer, opt.radius);
    std::ifstream in(opt.samples);
    if (!in) throw ParseError("cannot open sample file '" + opt.samples.string() + "'");
    samples = read_samples(in);
  } catch (const Error& e) {
    err << "input error: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    const auto sets = opt.basis.build(static_cast<int>(samples.cols()));
    const FitResult fit = fit_map(samples, sets, opt.basis.family, opt.optimizer, nullptr);
    TriangularMap map(fit.map.components(), fit.map.lambda_min(), opt.radius);
    std::ostringstream s;
    write_map(s, map);
    if (opt.output.has_parent_path()) fs::create_directories(opt.output.parent_path());
    write_file(opt.output, s.str());
    out << std::setprecision(17) << "samples " << samples.rows() << " dimension " << samples.cols() << '\n';
    out << "objective " << fit.total_objective() << '\n';
    for (std::size_t i = 0; i < fit.components.size(); ++i) {
      out << "component " << i << " newton_iterations " << fit.components[i].iterations << " objective "
          << fit.components[i].objective << '\n';
    }
    for (std::size_t i = 0; i < fit.components.size(); ++i) {
      out << "coefficients " << i << ':';
      const auto& g = fit.components[i].coefficients;
      for (Eigen::Index t = 0; t < g.size(); ++t) out << ' ' << g[t];
      out << '\n';
    }
  } catch (const std::exception& e) {
    err << "fit failed: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_compare(const CompareOptions& options, std::ostream& out, std::ostream& err) {
  if (options.directories.size() < 2) {
    err << "compare needs at least two result directories\n";
    return kExitConfig;
  }
  std::vector<EssReport> reports;
  try {
    for (const auto& dir : options.directories) {
      const fs::path file = dir / "diagnostics.json";
      if (!fs::exists(file)) throw ParseError("missing diagnostics in '" + dir.string() + "'");
      auto part = parse_report_json(read_file(file));
      if (part.empty()) throw ParseError("no diagnostics records in '" + dir.string() + "'");
      reports.insert(reports.end(), part.begin(), part.end());
    }
  } catch (const Error& e) {
    err << "input error: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    const auto rows = efficiency_table(reports, options.baseline);
    std::ostringstream table;
    write_table(table, rows);
    out << table.str();
    if (options.output) {
      fs::create_directories(*options.output);
      write_file(*options.output / "comparison.txt", table.str());
      write_file(*options.output / "comparison.json", table_json(rows) + "\n");
    } else {
      out << table_json(rows) << '\n';
    }
  } catch (const std::exception& e) {
    err << "compare failed: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace tmcmc::cli
