#include "chermnykh/app.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/core.h>
#include <json.hpp>

#include "chermnykh/equilibria.hpp"
#include "chermnykh/error.hpp"
#include "chermnykh/integrate.hpp"
#include "chermnykh/linearize.hpp"
#include "chermnykh/normalform.hpp"

namespace chermnykh::app {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------- config parsing

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_double(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", key, raw));
  }
  if (!std::isfinite(v)) throw ConfigError(fmt::format("{}: value must be finite", key));
  return v;
}

long long parse_int(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(fmt::format("{}: '{}' is not an integer", key, raw));
  }
  return v;
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

OutputFormat parse_format(const std::string& raw) {
  if (raw == "json") return OutputFormat::Json;
  if (raw == "csv") return OutputFormat::Csv;
  throw ConfigError(fmt::format("format must be json or csv, got '{}'", raw));
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"model", {"mu", "q1", "epsilon", "a2", "mb", "flatness", "core", "rc"}},
      {"output", {"out", "format"}},
      {"run", {"threads", "seed", "tolerance"}},
      {"stability",
       {"sweep", "mu_min", "mu_max", "mu_steps", "atlas_q1", "a2_min", "a2_max", "a2_steps", "mb_min",
        "mb_max", "mb_steps", "atlas_rc", "atlas_flatness", "atlas_core"}},
      {"zvc", {"levels", "xmin", "xmax", "ymin", "ymax", "resolution"}},
      {"orbit", {"origin", "x", "y", "vx", "vy", "t_end", "rel_tol", "abs_tol", "stride"}},
  };
  return keys;
}

void apply_key(RunConfig& c, const std::string& section, const std::string& key, const std::string& value,
               const fs::path& base_dir) {
  const std::string name = section + "." + key;
  auto num = [&] { return parse_double(name, value); };
  auto count = [&](long long lo) {
    const long long v = parse_int(name, value);
    if (v < lo) throw ConfigError(fmt::format("{} must be at least {}", name, lo));
    return v;
  };
  if (section == "model") {
    if (key == "mu") c.model.mu = num();
    else if (key == "q1") c.model.q1 = num();
    else if (key == "epsilon") c.model.epsilon = num();
    else if (key == "a2") c.model.A2 = num();
    else if (key == "mb") c.model.Mb = num();
    else if (key == "flatness") c.model.flatness = num();
    else if (key == "core") c.model.core = num();
    else if (key == "rc") c.model.rc = num();
  } else if (section == "output") {
    if (key == "out") {
      const fs::path p = trim(value);
      c.out = p.is_absolute() ? p : base_dir / p;
    } else if (key == "format") {
      c.format = parse_format(trim(value));
    }
  } else if (section == "run") {
    if (key == "threads") c.threads = static_cast<unsigned>(count(0));
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(count(0));
    else if (key == "tolerance") c.tolerance = num();
  } else if (section == "stability") {
    auto& s = c.stability;
    if (key == "sweep") s.sweep = trim(value);
    else if (key == "mu_min") s.mu_min = num();
    else if (key == "mu_max") s.mu_max = num();
    else if (key == "mu_steps") s.mu_steps = static_cast<int>(count(1));
    else if (key == "atlas_q1") {
      s.atlas_q1.clear();
      for (const auto& item : split_list(value)) s.atlas_q1.push_back(parse_double(name, item));
    } else if (key == "a2_min") s.a2_min = num();
    else if (key == "a2_max") s.a2_max = num();
    else if (key == "a2_steps") s.a2_steps = static_cast<int>(count(1));
    else if (key == "mb_min") s.mb_min = num();
    else if (key == "mb_max") s.mb_max = num();
    else if (key == "mb_steps") s.mb_steps = static_cast<int>(count(1));
    else if (key == "atlas_rc") s.atlas_rc = num();
    else if (key == "atlas_flatness") s.atlas_flatness = num();
    else if (key == "atlas_core") s.atlas_core = num();
  } else if (section == "zvc") {
    auto& z = c.zvc;
    if (key == "levels") z.levels = split_list(value);
    else if (key == "xmin") z.bounds.xmin = num();
    else if (key == "xmax") z.bounds.xmax = num();
    else if (key == "ymin") z.bounds.ymin = num();
    else if (key == "ymax") z.bounds.ymax = num();
    else if (key == "resolution") z.resolution = static_cast<std::size_t>(count(16));
  } else if (section == "orbit") {
    auto& o = c.orbit;
    if (key == "origin") o.origin = trim(value);
    else if (key == "x") o.x = num();
    else if (key == "y") o.y = num();
    else if (key == "vx") o.vx = num();
    else if (key == "vy") o.vy = num();
    else if (key == "t_end") o.t_end = num();
    else if (key == "rel_tol") o.rel_tol = num();
    else if (key == "abs_tol") o.abs_tol = num();
    else if (key == "stride") o.stride = num();
  }
}

void validate_commands(const RunConfig& c) {
  const auto& s = c.stability;
  if (s.sweep != "none" && s.sweep != "mu" && s.sweep != "atlas") {
    throw ConfigError(fmt::format("stability.sweep must be none, mu or atlas, got '{}'", s.sweep));
  }
  if (!(s.mu_min > 0.0 && s.mu_max > s.mu_min && s.mu_max <= 0.5)) {
    throw ConfigError("stability sweep needs 0 < mu_min < mu_max <= 0.5");
  }
  if (s.a2_max < s.a2_min || s.mb_max < s.mb_min || s.a2_min < 0.0 || s.mb_min < 0.0) {
    throw ConfigError("atlas ranges must be non-negative and ordered");
  }
  if (c.zvc.levels.empty()) throw ConfigError("zvc.levels is empty");
  const auto& b = c.zvc.bounds;
  if (!(b.xmax > b.xmin && b.ymax > b.ymin)) throw ConfigError("zvc bounds must be non-empty");
  if (c.zvc.resolution < 16) throw ConfigError("zvc.resolution must be at least 16");
  const auto& o = c.orbit;
  if (o.origin != "l4" && o.origin != "absolute") throw ConfigError("orbit.origin must be l4 or absolute");
  if (!(o.t_end > 0.0)) throw ConfigError("orbit.t_end must be positive");
  if (!(o.stride >= 0.0)) throw ConfigError("orbit.stride must be non-negative");
  if (!(o.rel_tol >= 1e-14 && o.rel_tol <= 1e-3 && o.abs_tol >= 1e-14 && o.abs_tol <= 1e-3)) {
    throw ConfigError("orbit tolerances must lie in [1e-14, 1e-3]");
  }
  if (!(c.tolerance > 0.0)) throw ConfigError("run.tolerance must be positive");
}

// ---------------------------------------------------------------- serialization helpers

std::vector<double> linspace(double lo, double hi, int steps) {
  std::vector<double> v(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) v[k] = steps == 1 ? lo : lo + (hi - lo) * k / (steps - 1);
  return v;
}

std::string num17(double v) { return fmt::format("{:.17g}", v); }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json complex_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

json params_json(const SystemParams& p) {
  return json{{"mu", p.mu},       {"q1", p.q1()},        {"epsilon", p.epsilon()},
              {"A2", p.A2},       {"Mb", p.Mb()},        {"flatness", p.belt.flatness},
              {"core", p.belt.core}, {"T", p.T()},       {"rc", p.rc},
              {"rc_overridden", p.rc_overridden},        {"n", p.n}};
}

json envelope(const std::string& command, const SystemParams& p, const RunConfig& c) {
  return json{{"command", command}, {"version", kVersion}, {"seed", c.seed}, {"parameters", params_json(p)}};
}

std::vector<std::string> params_lines(const std::string& command, const SystemParams& p, const RunConfig& c) {
  std::vector<std::string> lines{fmt::format("command={}", command), fmt::format("version={}", kVersion),
                                 fmt::format("seed={}", c.seed)};
  const json params = params_json(p);
  for (const auto& [k, v] : params.items()) {
    lines.push_back(v.is_boolean() ? fmt::format("{}={}", k, v.get<bool>()) : fmt::format("{}={}", k, num17(v.get<double>())));
  }
  return lines;
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& rows) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, rows);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), rows);
  } else if (j.is_number_float()) {
    rows.emplace_back(prefix, num17(j.get<double>()));
  } else if (j.is_string()) {
    rows.emplace_back(prefix, j.get<std::string>());
  } else {
    rows.emplace_back(prefix, j.dump());
  }
}

/// JSON document, or its flattened key,value form when CSV output is requested.
Artifact document(const std::string& stem, const json& j, OutputFormat format) {
  if (format == OutputFormat::Json) return {stem + ".json", j.dump(2) + "\n"};
  std::vector<std::pair<std::string, std::string>> rows;
  flatten(j, "", rows);
  std::string out = "key,value\n";
  for (const auto& [k, v] : rows) out += fmt::format("{},{}\n", k, v);
  return {stem + ".csv", out};
}

json point_json(const EquilibriumPoint& e) {
  return json{{"x", e.x}, {"y", e.y}, {"residual", e.residual}, {"method", to_string(e.method)}, {"iterations", e.iterations}};
}

json report_json(const StabilityReport& r) {
  return json{{"lambda_squared", json::array({complex_json(r.lambda_squared[0]), complex_json(r.lambda_squared[1])})},
              {"D", r.D},
              {"sum", r.sum},
              {"product", r.product},
              {"omega1", opt_json(r.omega1)},
              {"omega2", opt_json(r.omega2)},
              {"stable", r.stable},
              {"verdict", to_string(r.verdict)}};
}

json coeffs_json(const QuadraticCoeffs& c) { return json{{"E", c.E}, {"F", c.F}, {"G", c.G}, {"n", c.n}}; }

SystemParams system_of(const RunConfig& c) {
  try {
    return build_system(model_inputs(c.model));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

RefineOptions refine_of(const RunConfig& c) { RefineOptions r;
  r.tolerance = c.tolerance;
  return r; }

}  // namespace

// ---------------------------------------------------------------- public config API

RunConfig parse_config(const std::string& text, const fs::path& base_dir) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config syntax: {} (line {})", e.message(), e.line()));
  }
  RunConfig c;
  const auto& keys = known_keys();
  for (const auto& [section, body] : tree) {
    const auto it = keys.find(section);
    if (body.empty()) throw ConfigError(fmt::format("key '{}' outside a section", section));
    if (it == keys.end()) throw ConfigError(fmt::format("unknown section [{}]", section));
    for (const auto& [key, node] : body) {
      if (!it->second.contains(key)) throw ConfigError(fmt::format("unknown key {}.{}", section, key));
      apply_key(c, section, key, node.data(), base_dir);
    }
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), fs::absolute(path).parent_path());
}

ModelInputs model_inputs(const ModelConfig& m) {
  if (!m.mu) throw ConfigError("mu is required");
  if (m.q1 && m.epsilon) throw ConfigError("q1 and epsilon are mutually exclusive");
  ModelInputs in;
  in.mu = *m.mu;
  in.q1 = m.q1 ? *m.q1 : (m.epsilon ? 1.0 - *m.epsilon : 1.0);
  if (m.epsilon && !(*m.epsilon >= 0.0 && *m.epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
  in.A2 = m.A2;
  in.Mb = m.Mb;
  in.flatness = m.flatness;
  in.core = m.core;
  in.rc = m.rc;
  return in;
}

double resolve_level(const std::string& token, const SystemParams& p) {
  static const std::regex labelled(R"(^\s*L([1-5])\s*(([+-])\s*(.+))?$)");
  std::smatch m;
  if (std::regex_match(token, m, labelled)) {
    const int k = std::stoi(m[1].str()) - 1;
    double offset = 0.0;
    if (m[2].matched) {
      offset = parse_double("zvc.levels", m[4].str());
      if (m[3].str() == "-") offset = -offset;
    }
    const CriticalLevels levels = critical_levels(p);
    return levels.C[static_cast<std::size_t>(k)] + offset;
  }
  return parse_double("zvc.levels", token);
}

// ---------------------------------------------------------------- commands

std::vector<Artifact> cmd_equilibria(const RunConfig& c) {
  const SystemParams p = system_of(c);
  const RefineOptions ro = refine_of(c);
  json doc = envelope("equilibria", p, c);

  json points = json::array();
  const auto collinear = collinear_points(p, ro);
  for (const auto& e : collinear) {
    points.push_back(json{{"label", to_string(e.label)},
                          {"refined", point_json(e)},
                          {"C", 2.0 * effective_potential(e.x, e.y, p)}});
  }

  json l4{{"label", "L4"}};
  json l5{{"label", "L5"}};
  try {
    const EquilibriumPoint r = triangular_point(p, ro);
    const double C = 2.0 * effective_potential(r.x, r.y, p);
    l4["refined"] = point_json(r);
    l4["C"] = C;
    EquilibriumPoint mirror = r;
    mirror.y = -r.y;
    l5["refined"] = point_json(mirror);
    l5["C"] = C;
  } catch (const Error& e) {
    l4["refined"] = json{{"error", e.what()}};
    l5["refined"] = json{{"error", e.what()}};
  }
  try {
    const auto closed = triangular_points_closed(p);
    l4["closed_form"] = point_json(closed[0]);
    l5["closed_form"] = point_json(closed[1]);
  } catch (const Error& e) {
    l4["closed_form"] = json{{"error", e.what()}};
    l5["closed_form"] = json{{"error", e.what()}};
  }
  const SeriesTriangular s = triangular_points_series(p);
  l4["series"] = point_json(s.l4);
  l4["series"]["a"] = s.a;
  l4["series"]["b"] = s.b;
  EquilibriumPoint s5 = s.l4;
  s5.y = -s.l4.y;
  l5["series"] = point_json(s5);
  points.push_back(l4);
  points.push_back(l5);

  const EquilibriumRadii radii = equilibrium_radii(p);
  doc["points"] = points;
  doc["radii"] = json{{"r1", radii.r1}, {"r2", radii.r2}};
  return {document("equilibria", doc, c.format)};
}

std::vector<Artifact> cmd_stability(const RunConfig& c) {
  const SystemParams p = system_of(c);
  const ModelInputs base = model_inputs(c.model);
  const RefineOptions ro = refine_of(c);
  std::vector<Artifact> files;

  json doc = envelope("stability", p, c);
  doc["sweep_mode"] = c.stability.sweep;

  const EquilibriumPoint l4 = triangular_point(p, ro);
  const QuadraticCoeffs exact = coefficients_exact(p, ro);
  const QuadraticCoeffs series = coefficients_series(p);
  const FrequencyRelations freq = frequency_relations_series(p);
  json point{{"L4", {{"x", l4.x}, {"y", l4.y}}},
             {"coefficients", {{"exact", coeffs_json(exact)}, {"series", coeffs_json(series)}}},
             {"exact", report_json(stability_analysis(exact))},
             {"series", report_json(stability_analysis(series))},
             {"frequency_relations",
              {{"sum_printed", freq.sum_printed},
               {"product_printed", freq.product_printed},
               {"sum_exact", opt_json(freq.sum_exact)},
               {"product_exact", opt_json(freq.product_exact)}}}};

  json critical{{"routh", kRouthCriticalMass},
                {"series_as_printed", critical_mass_series(p, CriticalSeriesMode::AsPrinted)},
                {"series_a2_corrected", critical_mass_series(p, CriticalSeriesMode::A2Corrected)}};
  try {
    critical["numeric"] = critical_mass_numeric(base, CriticalMassOptions{.refine = ro});
  } catch (const Error& e) {
    critical["numeric"] = nullptr;
    critical["numeric_error"] = e.what();
  }
  point["critical_mass"] = critical;
  doc["point"] = point;

  const LagrangianTerms lt = lagrangian_terms(p, ro);
  const SeriesAudit audit = series_audit(p.mu);
  doc["audit"] = json{
      {"classical_mu", audit.mu},
      {"E_constant_printed", audit.E_constant_printed},
      {"E_constant_exact", audit.E_constant_exact},
      {"F_series_classical", audit.series.F},
      {"F_exact_classical", audit.exact.F},
      {"G_series_classical", audit.series.G},
      {"G_exact_classical", audit.exact.G},
      {"frequency_sum_printed_limit", audit.sum_printed_limit},
      {"frequency_sum_exact_limit", audit.sum_exact_limit},
      {"frequency_product_printed_classical", audit.product_printed},
      {"frequency_product_exact_classical", audit.product_exact},
      {"critical_mass_as_printed_classical", audit.critical_as_printed},
      {"critical_mass_a2_corrected_classical", audit.critical_corrected},
      {"lagrangian",
       {{"a", lt.a},
        {"b", lt.b},
        {"L0", lt.L0},
        {"L0_printed", lt.L0_printed},
        {"L1", json::array({lt.L1[0], lt.L1[1]})},
        {"L1_printed", json::array({lt.L1_printed[0], lt.L1_printed[1]})},
        {"L2_potential", json::array({lt.L2_potential[0], lt.L2_potential[1], lt.L2_potential[2]})},
        {"L2_coriolis", lt.L2_coriolis}}}};

  const auto header = params_lines("stability", p, c);
  if (c.stability.sweep == "mu") {
    const AtlasGrid grid{linspace(c.stability.mu_min, c.stability.mu_max, c.stability.mu_steps), {base.A2}, {base.Mb}, {p.q1()}};
    const auto rows = stability_atlas(grid, base, c.threads);
    json nodes = json::array();
    std::string csv;
    for (const auto& line : header) csv += "# " + line + "\n";
    csv += "# table=mu_sweep\nmu,E,F,G,D,omega1,omega2,verdict,error\n";
    json boundary = nullptr;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto& r = rows[k];
      json node{{"mu", r.mu}};
      if (r.report) {
        node["E"] = r.coeffs->E;
        node["F"] = r.coeffs->F;
        node["G"] = r.coeffs->G;
        node["D"] = r.report->D;
        node["omega1"] = opt_json(r.report->omega1);
        node["omega2"] = opt_json(r.report->omega2);
        node["verdict"] = to_string(r.report->verdict);
        csv += fmt::format("{},{},{},{},{},{},{},{},\n", num17(r.mu), num17(r.coeffs->E), num17(r.coeffs->F),
                           num17(r.coeffs->G), num17(r.report->D),
                           r.report->omega1 ? num17(*r.report->omega1) : "", r.report->omega2 ? num17(*r.report->omega2) : "",
                           to_string(r.report->verdict));
      } else {
        node["error"] = r.error;
        csv += fmt::format("{},,,,,,,,\"{}\"\n", num17(r.mu), r.error);
      }
      const bool stable = r.report && r.report->stable;
      const bool prev_stable = k > 0 && rows[k - 1].report && rows[k - 1].report->stable;
      if (boundary.is_null() && k > 0 && prev_stable && !stable) {
        boundary = json{{"last_stable_mu", rows[k - 1].mu}, {"first_unstable_mu", r.mu}};
      }
      nodes.push_back(node);
    }
    doc["sweep"] = json{{"nodes", nodes}, {"boundary", boundary}};
    files.push_back({"atlas.csv", csv});
  } else if (c.stability.sweep == "atlas") {
    const auto& s = c.stability;
    const AtlasGrid grid{{}, linspace(s.a2_min, s.a2_max, s.a2_steps), linspace(s.mb_min, s.mb_max, s.mb_steps), s.atlas_q1};
    ModelInputs atlas_base = base;
    atlas_base.rc = s.atlas_rc;
    atlas_base.flatness = s.atlas_flatness;
    atlas_base.core = s.atlas_core;
    const auto rows = critical_mass_surface(grid, atlas_base, CriticalMassOptions{.refine = ro}, c.threads);
    std::string csv;
    for (const auto& line : header) csv += "# " + line + "\n";
    csv += fmt::format("# table=critical_mass_surface\n# atlas_rc={}\n# atlas_flatness={}\n# atlas_core={}\n",
                       num17(s.atlas_rc), num17(s.atlas_flatness), num17(s.atlas_core));
    csv += "q1,A2,Mb,mu_crit,error\n";
    std::size_t failed = 0;
    for (const auto& r : rows) {
      if (!r.mu_crit) ++failed;
      csv += fmt::format("{},{},{},{},{}\n", num17(r.q1), num17(r.A2), num17(r.Mb), r.mu_crit ? num17(*r.mu_crit) : "",
                         r.error.empty() ? "" : "\"" + r.error + "\"");
    }
    doc["atlas"] = json{{"rows", rows.size()}, {"without_boundary", failed}, {"rc", s.atlas_rc},
                        {"T", s.atlas_flatness + s.atlas_core}, {"q1", s.atlas_q1}};
    files.push_back({"atlas.csv", csv});
  }
  files.insert(files.begin(), document("stability", doc, c.format));
  return files;
}

std::vector<Artifact> cmd_zvc(const RunConfig& c) {
  const SystemParams p = system_of(c);
  const GridSpec grid{c.zvc.bounds, c.zvc.resolution};
  std::vector<Artifact> files;
  std::optional<CriticalLevels> levels;
  const auto header = params_lines("zvc", p, c);
  for (std::size_t k = 0; k < c.zvc.levels.size(); ++k) {
    const std::string& token = c.zvc.levels[k];
    double C = 0.0;
    if (token.find('L') != std::string::npos) {
      if (!levels) levels = critical_levels(p, refine_of(c));
      C = resolve_level(token, p);
    } else {
      C = parse_double("zvc.levels", token);
    }
    const ContourSet set = zvc_contours(C, grid, p, ContourOptions{.threads = c.threads});
    const auto n_closed = static_cast<std::size_t>(std::count(set.closed.begin(), set.closed.end(), true));
    std::vector<std::string> meta{fmt::format("token={}", token)};
    meta.insert(meta.end(), header.begin(), header.end());
    meta.push_back(fmt::format("bounds={},{},{},{}", num17(grid.bounds.xmin), num17(grid.bounds.xmax),
                               num17(grid.bounds.ymin), num17(grid.bounds.ymax)));
    meta.push_back(fmt::format("resolution={}", grid.resolution));
    meta.push_back(fmt::format("polylines={}", set.polylines.size()));
    meta.push_back(fmt::format("closed={}", n_closed));
    files.push_back({fmt::format("zvc_{:02d}.csv", k), contour_csv(set, meta)});
  }
  return files;
}

std::vector<Artifact> cmd_orbit(const RunConfig& c) {
  const SystemParams p = system_of(c);
  const auto& o = c.orbit;
  VelocityState start{o.x, o.y, o.vx, o.vy};
  if (o.origin == "l4") {
    const EquilibriumPoint l4 = triangular_point(p, refine_of(c));
    start.x += l4.x;
    start.y += l4.y;
  }
  const Trajectory tr = integrate_orbit(start, o.t_end, p,
                                        IntegrateOptions{.rel_tol = o.rel_tol, .abs_tol = o.abs_tol, .sample_interval = o.stride});
  std::string csv;
  for (const auto& line : params_lines("orbit", p, c)) csv += "# " + line + "\n";
  csv += fmt::format("# origin={}\n# t_end={}\n# rel_tol={}\n# abs_tol={}\n# stride={}\n", o.origin, num17(o.t_end),
                     num17(o.rel_tol), num17(o.abs_tol), num17(o.stride));
  csv += fmt::format("# status={}\n", to_string(tr.status));
  if (tr.event_time) csv += fmt::format("# event_time={}\n", num17(*tr.event_time));
  csv += fmt::format("# jacobi_drift={}\n# accepted_steps={}\n# rejected_steps={}\n", num17(tr.jacobi_drift),
                     tr.steps.accepted, tr.steps.rejected);
  csv += "t,x,y,vx,vy,C\n";
  for (const auto& s : tr.samples) {
    csv += fmt::format("{},{},{},{},{},{}\n", num17(s.t), num17(s.state.x), num17(s.state.y), num17(s.state.vx),
                       num17(s.state.vy), num17(jacobi_constant(s.state, p)));
  }
  return {{"orbit.csv", csv}};
}

std::vector<Artifact> cmd_normalform(const RunConfig& c) {
  const SystemParams p = system_of(c);
  const RefineOptions ro = refine_of(c);
  const EquilibriumPoint l4 = triangular_point(p, ro);
  const QuadraticCoeffs coeffs = coefficients_at(l4, p);
  const StabilityReport report = stability_analysis(coeffs);
  const NormalFormTransform nf = build_transform(coeffs, report);
  const PrintedScalars ps = printed_scalars(coeffs, report);

  json doc = envelope("normalform", p, c);
  doc["L4"] = json{{"x", l4.x}, {"y", l4.y}};
  doc["coefficients"] = coeffs_json(coeffs);
  doc["omega1"] = nf.omega1;
  doc["omega2"] = nf.omega2;
  json J = json::array();
  for (int r = 0; r < 4; ++r) J.push_back(json::array({nf.J(r, 0), nf.J(r, 1), nf.J(r, 2), nf.J(r, 3)}));
  doc["J"] = J;
  doc["residuals"] = json{{"canonical", nf.residual_canonical},
                          {"diagonal", nf.residual_diagonal},
                          {"imaginary", nf.residual_imaginary},
                          {"normality", json::array({nf.residual_normality[0], nf.residual_normality[1]})},
                          {"nullspace", nf.solutions.nullspace_residual}};
  doc["column_rescale"] = json::array({nf.column_rescale[0], nf.column_rescale[1]});
  doc["krein"] = json::array({nf.solutions.krein[0], nf.solutions.krein[1]});
  json K = json::array();
  for (const auto& k : nf.solutions.K) K.push_back(complex_json(k));
  doc["K"] = K;
  doc["unit_action_amplitude"] = json::array({unit_action_amplitude(nf, 1), unit_action_amplitude(nf, 2)});
  auto pair = [](const std::array<std::complex<double>, 2>& a) { return json::array({complex_json(a[0]), complex_json(a[1])}); };
  doc["printed_scalars"] = json{{"M", pair(ps.M)},
                                {"M_star", pair(ps.M_star)},
                                {"M_bar", pair(ps.M_bar)},
                                {"h_printed", pair(ps.h_printed)},
                                {"h_numeric", pair(ps.h_numeric)}};
  return {document("normalform", doc, c.format)};
}

// ---------------------------------------------------------------- entry point

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App cli{"Restricted three-body model with radiation, oblateness and a belt: equilibria, stability, normal forms, zero-velocity curves, orbits"};
  cli.require_subcommand(1);
  cli.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::optional<double> mu, q1, epsilon, a2, mb, flatness, core, rc;
  std::optional<unsigned> threads;
  std::string format;
  cli.add_option("--config", config_path, "INI configuration file");
  cli.add_option("--out", out_dir, "Output directory");
  cli.add_option("--mu", mu, "Mass ratio of the smaller primary");
  auto* q1_opt = cli.add_option("--q1", q1, "Mass reduction factor of the bigger primary");
  auto* eps_opt = cli.add_option("--epsilon", epsilon, "Radiation parameter, 1 - q1");
  q1_opt->excludes(eps_opt);
  cli.add_option("--a2", a2, "Oblateness coefficient of the smaller primary");
  cli.add_option("--mb", mb, "Belt mass");
  cli.add_option("--flatness", flatness, "Belt flatness parameter");
  cli.add_option("--core", core, "Belt core parameter");
  cli.add_option("--rc", rc, "Override of the belt reference radius");
  cli.add_option("--threads", threads, "Worker threads (0: all cores)");
  cli.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* equilibria = cli.add_subcommand("equilibria", "Locate L1..L5");
  auto* stability = cli.add_subcommand("stability", "Linear stability of L4 and critical mass sweeps");
  std::string sweep;
  stability->add_option("--sweep", sweep, "none, mu or atlas")->check(CLI::IsMember({"none", "mu", "atlas"}));
  auto* zvc = cli.add_subcommand("zvc", "Zero-velocity curves");
  std::vector<std::string> levels;
  std::optional<std::size_t> resolution;
  zvc->add_option("--level", levels, "Jacobi level: number or label such as L4+1e-3 (repeatable)");
  zvc->add_option("--resolution", resolution, "Cells per axis");
  auto* orbit = cli.add_subcommand("orbit", "Integrate a trajectory");
  std::optional<double> t_end;
  orbit->add_option("--t-end", t_end, "Integration time");
  auto* normalform = cli.add_subcommand("normalform", "Normal form of H2 at L4");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.out = fs::absolute(out_dir);
    if (mu) cfg.model.mu = mu;
    if (q1) {
      cfg.model.q1 = q1;
      cfg.model.epsilon.reset();
    }
    if (epsilon) {
      cfg.model.epsilon = epsilon;
      cfg.model.q1.reset();
    }
    if (a2) cfg.model.A2 = *a2;
    if (mb) cfg.model.Mb = *mb;
    if (flatness) cfg.model.flatness = *flatness;
    if (core) cfg.model.core = *core;
    if (rc) cfg.model.rc = rc;
    if (threads) cfg.threads = *threads;
    if (!format.empty()) cfg.format = parse_format(format);
    if (!sweep.empty()) cfg.stability.sweep = sweep;
    if (!levels.empty()) cfg.zvc.levels = levels;
    if (resolution) cfg.zvc.resolution = *resolution;
    if (t_end) cfg.orbit.t_end = *t_end;
    validate_commands(cfg);
    (void)system_of(cfg);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }

  std::vector<Artifact> files;
  try {
    if (equilibria->parsed()) files = cmd_equilibria(cfg);
    else if (stability->parsed()) files = cmd_stability(cfg);
    else if (zvc->parsed()) files = cmd_zvc(cfg);
    else if (orbit->parsed()) files = cmd_orbit(cfg);
    else if (normalform->parsed()) files = cmd_normalform(cfg);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "computation error: " << e.what() << "\n";
    return 3;
  }

  try {
    fs::create_directories(cfg.out);
    for (const auto& f : files) {
      const fs::path target = cfg.out / f.name;
      std::ofstream os(target, std::ios::binary | std::ios::trunc);
      os << f.content;
      if (!os) throw std::runtime_error(fmt::format("cannot write '{}'", target.string()));
      out << target.string() << "\n";
    }
  } catch (const std::exception& e) {
    err << "output error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace chermnykh::app
