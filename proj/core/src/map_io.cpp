#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "tmcmc/errors.hpp"
#include "tmcmc/transport_map.hpp"

namespace tmcmc {

namespace {

constexpr const char* kMagic = "tmcmc-transport-map 1";

std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << std::scientific << v;
  return os.str();
}

double parse_real(const std::string& token) {
  if (token == "inf") return std::numeric_limits<double>::infinity();
  if (token == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw ParseError("expected a real number, got '" + token + "'");
  }
  if (used != token.size()) throw ParseError("expected a real number, got '" + token + "'");
  return v;
}

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    return line;
  }
  throw ParseError(std::string("unexpected end of map file while reading ") + what);
}

std::string expect_key(std::istringstream& row, const std::string& key) {
  std::string k, v;
  row >> k >> v;
  if (k != key || v.empty()) throw ParseError("expected '" + key + " <value>' in map file");
  return v;
}

}  // namespace

void write_map(std::ostream& out, const TriangularMap& map) {
  out << kMagic << '\n';
  out << "family " << to_string(map.family()) << '\n';
  out << "dimension " << map.dimension() << '\n';
  out << "lambda_min " << format_real(map.lambda_min()) << '\n';
  out << "radius " << format_real(map.radius()) << '\n';
  for (const auto& comp : map.components()) {
    const auto& set = comp.index_set();
    out << "component " << comp.component() << " terms " << set.size() << '\n';
    for (std::size_t t = 0; t < set.size(); ++t) {
      for (std::size_t k = 0; k < set[t].size(); ++k) out << set[t][k] << ' ';
      out << format_real(comp.coefficients()[static_cast<Eigen::Index>(t)]) << '\n';
    }
  }
}

TriangularMap read_map(std::istream& in) {
  if (next_line(in, "header") != kMagic) throw ParseError("not a tmcmc transport map file");
  std::istringstream row;
  auto load = [&](const char* what) {
    row = std::istringstream(next_line(in, what));
  };
  load("family");
  const PolynomialFamily family = parse_family(expect_key(row, "family"));
  load("dimension");
  const int n = std::stoi(expect_key(row, "dimension"));
  if (n < 1) throw ParseError("map dimension must be positive");
  load("lambda_min");
  const double lambda_min = parse_real(expect_key(row, "lambda_min"));
  load("radius");
  const double radius = parse_real(expect_key(row, "radius"));

  std::vector<MapComponent> comps;
  for (int i = 0; i < n; ++i) {
    load("component header");
    std::string word, terms_word;
    int idx = -1;
    std::size_t terms = 0;
    row >> word >> idx >> terms_word >> terms;
    if (word != "component" || terms_word != "terms" || idx != i || row.fail()) {
      throw ParseError("malformed component header for component " + std::to_string(i));
    }
    std::vector<MultiIndex> indices;
    std::vector<double> coeffs;
    for (std::size_t t = 0; t < terms; ++t) {
      load("coefficient row");
      std::vector<int> entries(static_cast<std::size_t>(n));
      for (auto& e : entries) row >> e;
      std::string coeff;
      row >> coeff;
      if (row.fail()) throw ParseError("malformed coefficient row in component " + std::to_string(i));
      indices.emplace_back(std::move(entries));
      coeffs.push_back(parse_real(coeff));
    }
    // MultiIndexSet sorts its members; reorder coefficients to match.
    MultiIndexSet set(i, n, indices);
    if (set.size() != indices.size()) throw ParseError("duplicate multi-index in component " + std::to_string(i));
    Eigen::VectorXd gamma(static_cast<Eigen::Index>(set.size()));
    for (std::size_t t = 0; t < indices.size(); ++t) gamma[set.find(indices[t])] = coeffs[t];
    comps.emplace_back(std::move(set), std::move(gamma), family);
  }
  return TriangularMap(std::move(comps), lambda_min, radius);
}

}  // namespace tmcmc
