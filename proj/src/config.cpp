#include "rotforch/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "rotforch/errors.hpp"
#include "rotforch/field_expr.hpp"

namespace rotforch {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back({});
  return out;
}

double to_double(const std::string& s, const std::string& where) {
  const std::string t = trim(s);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty()) {
    throw ConfigError(where, "expected a number, got '" + s + "'");
  }
  return v;
}

template <class I>
I to_integer(const std::string& s, const std::string& where) {
  const std::string t = trim(s);
  I v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty()) {
    throw ConfigError(where, "expected an integer, got '" + s + "'");
  }
  return v;
}

void set_value(double& m, const std::string& v, const std::string& w) { m = to_double(v, w); }
void set_value(int& m, const std::string& v, const std::string& w) { m = to_integer<int>(v, w); }
void set_value(std::uint64_t& m, const std::string& v, const std::string& w) {
  m = to_integer<std::uint64_t>(v, w);
}
void set_value(std::string& m, const std::string& v, const std::string&) { m = trim(v); }
void set_value(std::vector<double>& m, const std::string& v, const std::string& w) {
  m.clear();
  if (trim(v).empty()) return;
  for (const std::string& item : split(v, ',')) m.push_back(to_double(item, w));
}
void set_value(std::vector<int>& m, const std::string& v, const std::string& w) {
  m.clear();
  if (trim(v).empty()) return;
  for (const std::string& item : split(v, ',')) m.push_back(to_integer<int>(item, w));
}
void set_value(std::vector<std::string>& m, const std::string& v, const std::string&) {
  m = split(v, ';');
}

void check_expression(const std::string& text, const std::string& where) {
  try {
    FieldExpr::parse(text);
  } catch (const ParseError& e) {
    throw ConfigError(where, e.what());
  }
}

enum class Kind { plain, expression, expression_list };

struct Field {
  std::string section;
  std::string key;
  bool required;
  Kind kind;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<nlohmann::ordered_json(const RunConfig&)> get;
};

template <class T>
Field field(const char* section, const char* key, T RunConfig::*member, bool required = false,
            Kind kind = Kind::plain) {
  return Field{section,
               key,
               required,
               kind,
               [member](RunConfig& c, const std::string& v, const std::string& w) {
                 set_value(c.*member, v, w);
               },
               [member](const RunConfig& c) { return nlohmann::ordered_json(c.*member); }};
}

const std::vector<Field>& schema() {
  static const std::vector<Field> fields = {
      field("domain", "lx", &RunConfig::lx),
      field("domain", "ly", &RunConfig::ly),
      field("domain", "nx", &RunConfig::nx),
      field("domain", "ny", &RunConfig::ny),
      field("domain", "porosity", &RunConfig::porosity, false, Kind::expression),
      field("domain", "segments", &RunConfig::segments),
      field("law", "degrees", &RunConfig::degrees, true),
      field("law", "coeffs", &RunConfig::coeffs, true, Kind::expression_list),
      field("eos", "kind", &RunConfig::eos_kind),
      field("eos", "varpi", &RunConfig::varpi),
      field("eos", "c", &RunConfig::eos_c),
      field("eos", "gamma", &RunConfig::eos_gamma),
      field("rotation", "omega", &RunConfig::omega),
      field("rotation", "gravity", &RunConfig::gravity),
      field("rotation", "gravity_angle", &RunConfig::gravity_angle),
      field("rotation", "gravity_rate", &RunConfig::gravity_rate),
      field("boundary", "psi1", &RunConfig::psi1, false, Kind::expression),
      field("boundary", "psi2", &RunConfig::psi2, false, Kind::expression),
      field("initial", "u0", &RunConfig::u0, true, Kind::expression),
      field("solver", "policy", &RunConfig::policy),
      field("solver", "dt", &RunConfig::dt),
      field("solver", "safety", &RunConfig::safety),
      field("solver", "probe_interval", &RunConfig::probe_interval),
      field("solver", "eps_reg", &RunConfig::eps_reg),
      field("solver", "t_end", &RunConfig::t_end),
      field("solver", "snapshot_dt", &RunConfig::snapshot_dt),
      field("solver", "max_steps", &RunConfig::max_steps),
      field("solver", "diag_alphas", &RunConfig::diag_alphas),
      field("solver", "diag_every", &RunConfig::diag_every),
      field("estimates", "alpha", &RunConfig::alpha),
      field("estimates", "r", &RunConfig::r),
      field("estimates", "r1", &RunConfig::r1),
      field("estimates", "kappa_tilde", &RunConfig::kappa_tilde),
      field("estimates", "p", &RunConfig::p),
      field("estimates", "sigma", &RunConfig::sigma),
      field("estimates", "T", &RunConfig::T),
      field("estimates", "eps", &RunConfig::eps),
      field("estimates", "eta", &RunConfig::eta),
      field("estimates", "omegas", &RunConfig::omegas),
      field("estimates", "calibration_amplitudes", &RunConfig::calibration_amplitudes),
      field("estimates", "assertion_amplitudes", &RunConfig::assertion_amplitudes),
      field("estimates", "fine_nx", &RunConfig::fine_nx),
      field("estimates", "sweep_omegas", &RunConfig::sweep_omegas),
      field("estimates", "sweep_amplitudes", &RunConfig::sweep_amplitudes),
      field("estimates", "sweep_eps", &RunConfig::sweep_eps),
      field("estimates", "sweep_nx", &RunConfig::sweep_nx),
      field("mms", "exact", &RunConfig::mms_exact, false, Kind::expression),
      field("mms", "grids", &RunConfig::mms_grids),
      field("mms", "t_end", &RunConfig::mms_t_end),
      field("mms", "temporal_grid", &RunConfig::mms_temporal_grid),
      field("mms", "temporal_t_end", &RunConfig::mms_temporal_t_end),
      field("verify", "samples", &RunConfig::verify_samples),
      field("verify", "laws", &RunConfig::verify_laws),
      field("verify", "elementary_samples", &RunConfig::elementary_samples),
      field("verify", "exponent_tuples", &RunConfig::exponent_tuples),
      field("verify", "corpus_size", &RunConfig::corpus_size),
      field("verify", "calibration", &RunConfig::calibration),
      field("output", "dir", &RunConfig::out_dir),
      field("run", "seed", &RunConfig::seed),
  };
  return fields;
}

void validate(const RunConfig& c) {
  auto req = [](bool ok, const std::string& where, const std::string& what) {
    if (!ok) throw ConfigError(where, what);
  };
  req(c.lx > 0.0 && c.ly > 0.0, "domain.lx/ly", "must be positive");
  req(c.nx >= 2 && c.ny >= 2, "domain.nx/ny", "must be at least 2");
  req(c.degrees.size() >= 2, "law.degrees", "needs at least two degrees");
  req(c.degrees.size() == c.coeffs.size(), "law.coeffs",
      "needs one coefficient per degree (" + std::to_string(c.degrees.size()) + ")");
  req(c.eos_kind == "slightly_compressible" || c.eos_kind == "isentropic", "eos.kind",
      "must be slightly_compressible or isentropic");
  req(c.policy == "adaptive" || c.policy == "fixed", "solver.policy", "must be adaptive or fixed");
  req(c.p.size() == 5, "estimates.p", "needs five values p1..p5");
  req(c.sigma > 0.0 && c.sigma < 1.0, "estimates.sigma", "must lie in (0,1)");
  req(c.T > 0.0, "estimates.T", "must be positive");
  req(c.diag_every >= 1, "solver.diag_every", "must be at least 1");
  req(c.corpus_size >= 1, "verify.corpus_size", "must be positive");
}

}  // namespace

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const Field& f : schema()) j[f.section][f.key] = f.get(*this);
  return j;
}

RunConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("", std::string("config syntax: ") + e.what());
  }

  std::set<std::string> sections;
  for (const Field& f : schema()) sections.insert(f.section);

  RunConfig c;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) {
      throw ConfigError(section, "key appears outside any section");
    }
    if (!sections.count(section)) throw ConfigError(section, "unknown section");
    for (const auto& [key, value] : body) {
      const std::string where = section + "." + key;
      const auto it = std::find_if(schema().begin(), schema().end(), [&](const Field& f) {
        return f.section == section && f.key == key;
      });
      if (it == schema().end()) throw ConfigError(where, "unknown key");
      const std::string v = value.data();
      if (it->kind == Kind::expression && !trim(v).empty()) check_expression(v, where);
      if (it->kind == Kind::expression_list) {
        for (const std::string& e : split(v, ';')) check_expression(e, where);
      }
      it->set(c, v, where);
      seen.insert({section, key});
    }
  }
  for (const Field& f : schema()) {
    if (f.required && !seen.count({f.section, f.key})) {
      throw ConfigError(f.section + "." + f.key, "missing required key");
    }
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string default_config_text() {
  return "[law]\n"
         "degrees = 0, 1\n"
         "coeffs = 1; 1\n"
         "\n"
         "[initial]\n"
         "u0 = 0.5 + 0.25*cos(pi*x)*cos(pi*y)\n";
}

}  // namespace rotforch
