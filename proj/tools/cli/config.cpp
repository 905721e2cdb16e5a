#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace tmcmc::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double x = std::stod(v, &used);
  if (used != v.size() || std::isnan(x)) throw std::invalid_argument("expected a real number");
  return x;
}

long to_long(const std::string& v) {
  std::size_t used = 0;
  // Accept integral values written in scientific notation, e.g. 7.5e4.
  const double x = std::stod(v, &used);
  if (used != v.size() || x != std::floor(x) || std::abs(x) > 9e15) {
    throw std::invalid_argument("expected an integer");
  }
  return static_cast<long>(x);
}

std::uint64_t to_u64(const std::string& v) {
  if (v.empty() || v[0] == '-') throw std::invalid_argument("expected a non-negative integer");
  std::size_t used = 0;
  const auto x = std::stoull(v, &used);
  if (used != v.size()) throw std::invalid_argument("expected a non-negative integer");
  return x;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw std::invalid_argument("expected true or false");
}

struct ProposalFields {
  std::string type = "rw";
  double sigma = 1.0;
  double step = 1.0;
  double sigma1 = 1.0;
  std::optional<double> sigma2;
  double w_max = 0.9;
  double w_scale = 1.0;

  ReferenceProposal build() const {
    if (type == "rw") return RandomWalk{sigma};
    if (type == "mala") return Mala{step};
    if (type == "drg") return DelayedRejectionGlobal{sigma2.value_or(0.5)};
    if (type == "drl") return DelayedRejectionLocal{sigma1, sigma2.value_or(0.3)};
    if (type == "mix") return Mixture{w_max, w_scale, sigma};
    throw std::invalid_argument("unknown proposal type '" + type + "' (rw, mala, drg, drl, mix)");
  }
};

using Setter = std::function<void(const std::string&)>;
using Schema = std::map<std::string, std::map<std::string, Setter>>;

}  // namespace

ConfigError::ConfigError(int line, std::string field, const std::string& message)
    : Error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
            (field.empty() ? std::string() : field + ": ") + message),
      line_(line),
      field_(std::move(field)) {}

IniDocument IniDocument::parse(std::istream& in) {
  IniDocument doc;
  std::string raw, section;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto cut = raw.find_first_of("#;");
    const std::string line = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(lineno, "", "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(lineno, "", "empty section name");
      if (doc.sections_.count(section)) throw ConfigError(lineno, section, "duplicate section");
      doc.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(lineno, "", "expected 'key = value'");
    if (section.empty()) throw ConfigError(lineno, "", "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(lineno, "", "missing key");
    auto& keys = doc.sections_[section];
    if (keys.count(key)) throw ConfigError(lineno, section + "." + key, "duplicate key");
    keys[key] = Entry{value, lineno};
  }
  return doc;
}

IniDocument IniDocument::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "", "cannot open config file '" + path.string() + "'");
  return parse(in);
}

bool IniDocument::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

const IniDocument::Entry* IniDocument::find(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

std::string RunConfig::method_label() const {
  if (!name.empty()) return name;
  if (sampler == Sampler::kAdaptiveMetropolis) return "am";
  return "tm+" + std::string(proposal_name(chain.proposal));
}

namespace {

void apply_schema(const IniDocument& doc, const Schema& schema, bool other_sections_allowed = false) {
  for (const auto& [section, keys] : doc.sections()) {
    const auto s = schema.find(section);
    if (s == schema.end()) {
      if (other_sections_allowed) continue;
      const int line = keys.empty() ? 0 : keys.begin()->second.line;
      throw ConfigError(line, section, "unknown section");
    }
    for (const auto& [key, entry] : keys) {
      const auto k = s->second.find(key);
      const std::string field = section + "." + key;
      if (k == s->second.end()) throw ConfigError(entry.line, field, "unknown key");
      try {
        k->second(entry.value);
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        throw ConfigError(entry.line, field, std::string(e.what()) + " (got '" + entry.value + "')");
      }
    }
  }
}

void add_basis_schema(Schema& schema, BasisSpec& basis, OptimizerConfig& opt, double& radius) {
  schema["basis"] = {
      {"family", [&](const std::string& v) { basis.family = parse_family(v); }},
      {"type", [&](const std::string& v) { basis.type = parse_set_type(v); }},
      {"degree", [&](const std::string& v) { basis.degree = static_cast<int>(to_long(v)); }},
      {"diagonal_degree", [&](const std::string& v) { basis.diagonal_degree = static_cast<int>(to_long(v)); }},
  };
  schema["map"] = {
      {"k_r", [&](const std::string& v) { opt.k_r = to_double(v); }},
      {"lambda_min", [&](const std::string& v) { opt.lambda_min = to_double(v); }},
      {"radius", [&](const std::string& v) { radius = to_double(v); }},
      {"newton_tol", [&](const std::string& v) { opt.newton_tol = to_double(v); }},
      {"max_newton_iters", [&](const std::string& v) { opt.max_newton_iters = static_cast<int>(to_long(v)); }},
  };
}

}  // namespace

void apply_basis_sections(const IniDocument& doc, BasisSpec& basis, OptimizerConfig& optimizer,
                          double& radius) {
  Schema schema;
  add_basis_schema(schema, basis, optimizer, radius);
  apply_schema(doc, schema, true);
  if (basis.degree < 1) throw ConfigError(doc.find("basis", "degree") ? doc.find("basis", "degree")->line : 0,
                                          "basis.degree", "must be at least 1");
  try {
    optimizer.validate();
  } catch (const Error& e) {
    throw ConfigError(0, "map", e.what());
  }
}

RunConfig parse_run_config(const IniDocument& doc) {
  RunConfig cfg;
  ProposalFields prop;
  std::string sampler = "tm";
  Schema schema;
  schema["run"] = {
      {"name", [&](const std::string& v) { cfg.name = v; }},
      {"sampler", [&](const std::string& v) {
         if (v != "tm" && v != "am") throw std::invalid_argument("expected 'tm' or 'am'");
         sampler = v;
       }},
      {"replicates", [&](const std::string& v) { cfg.replicates = static_cast<int>(to_long(v)); }},
      {"seed", [&](const std::string& v) { cfg.seed = to_u64(v); }},
      {"output", [&](const std::string& v) { cfg.output = v; }},
  };
  schema["problem"] = {
      {"name", [&](const std::string& v) {
         const auto names = problem_names();
         if (std::find(names.begin(), names.end(), v) == names.end()) {
           throw std::invalid_argument("unknown problem");
         }
         cfg.problem.name = v;
       }},
      {"data_seed", [&](const std::string& v) { cfg.problem.data_seed = to_u64(v); }},
      {"correlation", [&](const std::string& v) { cfg.problem.correlation = to_double(v); }},
      {"curvature", [&](const std::string& v) { cfg.problem.curvature = to_double(v); }},
      {"scale", [&](const std::string& v) { cfg.problem.scale = to_double(v); }},
  };
  schema["proposal"] = {
      {"type", [&](const std::string& v) { prop.type = v; }},
      {"sigma", [&](const std::string& v) { prop.sigma = to_double(v); }},
      {"step", [&](const std::string& v) { prop.step = to_double(v); }},
      {"sigma1", [&](const std::string& v) { prop.sigma1 = to_double(v); }},
      {"sigma2", [&](const std::string& v) { prop.sigma2 = to_double(v); }},
      {"w_max", [&](const std::string& v) { prop.w_max = to_double(v); }},
      {"w_scale", [&](const std::string& v) { prop.w_scale = to_double(v); }},
  };
  schema["chain"] = {
      {"steps", [&](const std::string& v) { cfg.chain.steps = cfg.am.steps = to_long(v); }},
      {"burn_in", [&](const std::string& v) { cfg.chain.burn_in = cfg.am.burn_in = to_long(v); }},
      {"adapt_interval", [&](const std::string& v) { cfg.chain.adapt_interval = to_long(v); }},
      {"adapt_start", [&](const std::string& v) { cfg.chain.adapt_start = to_long(v); }},
      {"adapt", [&](const std::string& v) { cfg.chain.adapt = to_bool(v); }},
      {"tune", [&](const std::string& v) { cfg.chain.tune = cfg.am.tune = to_bool(v); }},
      {"target_acceptance", [&](const std::string& v) {
         cfg.chain.target_acceptance = cfg.am.target_acceptance = to_double(v);
       }},
      {"tune_interval", [&](const std::string& v) { cfg.chain.tune_interval = cfg.am.tune_interval = to_long(v); }},
      {"sigma2_window", [&](const std::string& v) { cfg.chain.sigma2_window = to_long(v); }},
      {"parallel_fit", [&](const std::string& v) { cfg.chain.parallel_fit = to_bool(v); }},
  };
  schema["am"] = {
      {"initial_scale", [&](const std::string& v) { cfg.am.initial_scale = to_double(v); }},
      {"adapt_start", [&](const std::string& v) { cfg.am.adapt_start = to_long(v); }},
      {"epsilon", [&](const std::string& v) { cfg.am.epsilon = to_double(v); }},
  };
  add_basis_schema(schema, cfg.chain.basis, cfg.chain.optimizer, cfg.chain.radius);
  apply_schema(doc, schema);

  const auto line_of = [&](const char* section, const char* key) {
    const auto* e = doc.find(section, key);
    return e ? e->line : 0;
  };
  if (cfg.problem.name.empty()) throw ConfigError(0, "problem.name", "missing required key");
  if (cfg.replicates < 1) throw ConfigError(line_of("run", "replicates"), "run.replicates", "must be at least 1");
  try {
    cfg.chain.proposal = prop.build();
  } catch (const std::exception& e) {
    throw ConfigError(line_of("proposal", "type"), "proposal.type", e.what());
  }
  cfg.sampler = sampler == "am" ? Sampler::kAdaptiveMetropolis : Sampler::kTransportMap;
  cfg.chain.seed = cfg.am.seed = cfg.seed;
  try {
    if (cfg.chain.basis.degree < 1) throw Error("basis degree must be at least 1");
    cfg.chain.validate();
    cfg.am.validate();
  } catch (const Error& e) {
    throw ConfigError(0, "", e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(IniDocument::load(path));
}

}  // namespace tmcmc::cli
