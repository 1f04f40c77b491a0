#include "mechsim/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mechsim/evolve.hpp"

namespace mechsim::cli {
namespace {

constexpr int kMaxDefaultSteps = 200000;

struct Reader {
  std::string source;

  [[noreturn]] void fail(const YAML::Node& node, const std::string& path,
                         const std::string& msg) const {
    std::ostringstream out;
    out << source;
    if (node.IsDefined() && node.Mark().line >= 0) {
      out << ':' << node.Mark().line + 1 << ':' << node.Mark().column + 1;
    }
    out << ": " << path << ": " << msg;
    throw ConfigError(out.str());
  }

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    throw ConfigError(source + ": " + path + ": " + msg);
  }

  void require_map(const YAML::Node& node, const std::string& path) const {
    if (!node.IsMap()) fail(node, path, "expected a mapping");
  }

  void check_keys(const YAML::Node& node, const std::string& path,
                  const std::set<std::string>& allowed) const {
    require_map(node, path);
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) {
        std::string known;
        for (const auto& a : allowed) known += (known.empty() ? "" : ", ") + a;
        fail(kv.first, join(path, key), "unknown key (allowed: " + known + ")");
      }
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  template <typename T>
  T scalar(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, path, "expected a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, path, "cannot parse '" + node.Scalar() + "'");
    }
  }

  double number(const YAML::Node& node, const std::string& path) const {
    const double v = scalar<double>(node, path);
    if (!std::isfinite(v)) fail(node, path, "must be finite");
    return v;
  }

  int integer(const YAML::Node& node, const std::string& path, int min_value) const {
    const int v = scalar<int>(node, path);
    if (v < min_value) fail(node, path, "must be >= " + std::to_string(min_value));
    return v;
  }

  cplx complex(const YAML::Node& node, const std::string& path) const {
    if (node.IsScalar()) return {number(node, path), 0.0};
    if (node.IsSequence() && node.size() == 2) {
      return {number(node[0], path + "[0]"), number(node[1], path + "[1]")};
    }
    fail(node, path, "expected a number or [re, im]");
  }

  /// A rate given as `key` (rad/s) or `key_hz` (Hz, times 2 pi).
  std::optional<double> rate(const YAML::Node& map, const std::string& path,
                             const std::string& key) const {
    const auto plain = map[key];
    const auto hz = map[key + "_hz"];
    if (plain && hz) fail(hz, join(path, key + "_hz"), "conflicts with '" + key + "'");
    if (plain) return number(plain, join(path, key));
    if (hz) return 2.0 * kPi * number(hz, join(path, key + "_hz"));
    return std::nullopt;
  }

  std::optional<cplx> complex_rate(const YAML::Node& map, const std::string& path,
                                   const std::string& key) const {
    const auto plain = map[key];
    const auto hz = map[key + "_hz"];
    if (plain && hz) fail(hz, join(path, key + "_hz"), "conflicts with '" + key + "'");
    if (plain) return complex(plain, join(path, key));
    if (hz) return 2.0 * kPi * complex(hz, join(path, key + "_hz"));
    return std::nullopt;
  }

  std::vector<double> numbers(const YAML::Node& node, const std::string& path) const {
    std::vector<double> out;
    if (node.IsScalar()) {
      out.push_back(number(node, path));
      return out;
    }
    if (!node.IsSequence()) fail(node, path, "expected a list of numbers");
    for (std::size_t k = 0; k < node.size(); ++k) {
      out.push_back(number(node[k], path + "[" + std::to_string(k) + "]"));
    }
    return out;
  }
};

std::set<std::string> with_hz(std::initializer_list<std::string> rates,
                              std::initializer_list<std::string> others = {}) {
  std::set<std::string> keys(others);
  for (const auto& r : rates) {
    keys.insert(r);
    keys.insert(r + "_hz");
  }
  return keys;
}

void parse_system(const Reader& rd, const YAML::Node& node, RunConfig& cfg) {
  const std::string path = "system";
  rd.check_keys(node, path, with_hz({"drive", "delta"}, {"preset", "params", "alpha"}));
  const bool has_preset = static_cast<bool>(node["preset"]);
  const bool has_params = static_cast<bool>(node["params"]);
  if (has_preset == has_params) {
    rd.fail(node, path, "exactly one of 'preset' or 'params' is required");
  }

  PhysicalParams p;
  if (has_preset) {
    const auto name = rd.scalar<std::string>(node["preset"], "system.preset");
    try {
      p = preset(name);
    } catch (const std::invalid_argument& e) {
      rd.fail(node["preset"], "system.preset", e.what());
    }
    cfg.preset_name = name;
  } else {
    const auto pn = node["params"];
    const std::string pp = "system.params";
    rd.check_keys(pn, pp,
                  with_hz({"omega_m", "omega_c", "kappa", "gamma_m"},
                          {"g_quad", "g_tilde", "mass", "temperature"}));
    const auto wm = rd.rate(pn, pp, "omega_m");
    if (!wm) rd.fail(pn, pp, "missing 'omega_m'");
    p.omega_m = *wm;
    p.omega_c = rd.rate(pn, pp, "omega_c");
    p.kappa = rd.rate(pn, pp, "kappa").value_or(0.0);
    p.gamma_m = rd.rate(pn, pp, "gamma_m").value_or(0.0);
    if (pn["mass"]) p.mass = rd.number(pn["mass"], pp + ".mass");
    if (pn["temperature"]) p.temperature = rd.number(pn["temperature"], pp + ".temperature");
    if (pn["g_quad"] && pn["g_tilde"]) {
      rd.fail(pn["g_tilde"], pp + ".g_tilde", "conflicts with 'g_quad'");
    }
    if (pn["g_quad"]) p.g_quad = rd.number(pn["g_quad"], pp + ".g_quad");
    if (pn["g_tilde"]) {
      if (!p.mass) rd.fail(pn["g_tilde"], pp + ".g_tilde", "needs 'mass'");
      p.g_quad = quadratic_coupling_from_gtilde(rd.number(pn["g_tilde"], pp + ".g_tilde"),
                                                *p.mass, p.omega_m);
    }
  }

  p.delta = rd.rate(node, path, "delta").value_or(p.delta);
  const auto drive = rd.complex_rate(node, path, "drive");
  if (drive && node["alpha"]) rd.fail(node["alpha"], "system.alpha", "conflicts with 'drive'");
  if (drive) p.drive = *drive;
  try {
    p.validate();
    if (node["alpha"]) {
      const double alpha = rd.number(node["alpha"], "system.alpha");
      if (alpha < 0.0) rd.fail(node["alpha"], "system.alpha", "must be >= 0");
      p.drive = drive_for_mean_field(p, alpha);
    }
  } catch (const std::invalid_argument& e) {
    rd.fail(node, path, e.what());
  }
  cfg.physical = p;
}

void parse_rates(const Reader& rd, const YAML::Node& node, RunConfig& cfg) {
  const std::string path = "rates";
  rd.check_keys(node, path, with_hz({"omega_c", "omega_m", "g0", "g"}, {"scaled_from"}));
  if (node["scaled_from"]) {
    for (const char* k : {"omega_c", "omega_m", "g0"}) {
      if (rd.rate(node, path, k)) {
        rd.fail(node, path, std::string("'") + k + "' conflicts with 'scaled_from'");
      }
    }
    const auto sn = node["scaled_from"];
    const std::string sp = "rates.scaled_from";
    rd.check_keys(sn, sp, {"preset", "alpha", "g0_over_omega_c", "coupling"});
    for (const char* k : {"preset", "alpha", "g0_over_omega_c"}) {
      if (!sn[k]) rd.fail(sn, sp, std::string("missing '") + k + "'");
    }
    ScaledFrom s;
    s.preset = rd.scalar<std::string>(sn["preset"], sp + ".preset");
    try {
      (void)preset(s.preset);
    } catch (const std::invalid_argument& e) {
      rd.fail(sn["preset"], sp + ".preset", e.what());
    }
    s.alpha = rd.number(sn["alpha"], sp + ".alpha");
    if (s.alpha <= 0.0) rd.fail(sn["alpha"], sp + ".alpha", "must be > 0");
    s.g0_over_omega_c = rd.number(sn["g0_over_omega_c"], sp + ".g0_over_omega_c");
    if (sn["coupling"]) {
      const auto c = rd.scalar<std::string>(sn["coupling"], sp + ".coupling");
      if (c != "exact" && c != "uncorrected") {
        rd.fail(sn["coupling"], sp + ".coupling", "expected 'exact' or 'uncorrected'");
      }
      s.uncorrected = c == "uncorrected";
    }
    if (node["g"] || node["g_hz"]) rd.fail(node, path, "'g' is derived from 'scaled_from'");
    cfg.scaled = s;
    return;
  }
  FrameRates r;
  const auto wc = rd.rate(node, path, "omega_c");
  const auto wm = rd.rate(node, path, "omega_m");
  if (!wc) rd.fail(node, path, "missing 'omega_c'");
  if (!wm) rd.fail(node, path, "missing 'omega_m'");
  r.omega_c = *wc;
  r.omega_m = *wm;
  r.g0 = rd.rate(node, path, "g0").value_or(0.0);
  r.g = rd.rate(node, path, "g").value_or(0.0);
  try {
    r.validate();
  } catch (const std::invalid_argument& e) {
    rd.fail(node, path, e.what());
  }
  cfg.rates = r;
}

void parse_initial(const Reader& rd, const YAML::Node& node, InitialState& init) {
  const std::string path = "run.initial_state";
  rd.check_keys(node, path, {"kind", "j", "k", "alpha_a", "alpha_b"});
  if (node["kind"]) init.kind = rd.scalar<std::string>(node["kind"], path + ".kind");
  if (init.kind == "vacuum") {
    if (node.size() > 1) rd.fail(node, path, "vacuum takes no parameters");
  } else if (init.kind == "fock") {
    if (node["alpha_a"] || node["alpha_b"]) rd.fail(node, path, "fock takes only j and k");
    if (node["j"]) init.j = rd.integer(node["j"], path + ".j", 0);
    if (node["k"]) init.k = rd.integer(node["k"], path + ".k", 0);
  } else if (init.kind == "coherent") {
    if (node["j"] || node["k"]) rd.fail(node, path, "coherent takes only alpha_a and alpha_b");
    if (node["alpha_a"]) init.alpha_a = rd.complex(node["alpha_a"], path + ".alpha_a");
    if (node["alpha_b"]) init.alpha_b = rd.complex(node["alpha_b"], path + ".alpha_b");
  } else {
    rd.fail(node["kind"], path + ".kind", "expected vacuum, fock or coherent");
  }
}

void parse_run(const Reader& rd, const YAML::Node& node, RunConfig& cfg) {
  const std::string path = "run";
  rd.check_keys(node, path,
                {"t_max", "t_max_cavity_periods", "n_steps", "include_small", "initial_state"});
  if (node["t_max"] && node["t_max_cavity_periods"]) {
    rd.fail(node["t_max_cavity_periods"], "run.t_max_cavity_periods", "conflicts with 't_max'");
  }
  if (node["t_max"]) {
    cfg.t_max = rd.number(node["t_max"], "run.t_max");
    if (*cfg.t_max <= 0.0) rd.fail(node["t_max"], "run.t_max", "must be > 0");
  }
  if (node["t_max_cavity_periods"]) {
    cfg.t_max_cavity_periods = rd.number(node["t_max_cavity_periods"], "run.t_max_cavity_periods");
    if (*cfg.t_max_cavity_periods <= 0.0) {
      rd.fail(node["t_max_cavity_periods"], "run.t_max_cavity_periods", "must be > 0");
    }
  }
  if (node["n_steps"]) cfg.n_steps = rd.integer(node["n_steps"], "run.n_steps", 1);
  if (node["include_small"]) cfg.include_small = rd.scalar<bool>(node["include_small"], "run.include_small");
  if (node["initial_state"]) parse_initial(rd, node["initial_state"], cfg.initial);
}

void parse_wigner(const Reader& rd, const YAML::Node& node, RunConfig& cfg) {
  const std::string path = "wigner";
  rd.check_keys(node, path, {"modes", "times", "times_cavity_periods", "points", "extent"});
  if (node["modes"]) {
    cfg.wigner_modes.clear();
    const auto m = node["modes"];
    std::vector<YAML::Node> items;
    if (m.IsScalar()) {
      items.push_back(m);
    } else if (m.IsSequence()) {
      for (const auto& x : m) items.push_back(x);
    } else {
      rd.fail(m, "wigner.modes", "expected a list of 'a'/'b'");
    }
    for (const auto& x : items) {
      const auto s = rd.scalar<std::string>(x, "wigner.modes");
      if (s != "a" && s != "b") rd.fail(x, "wigner.modes", "expected 'a' or 'b'");
      cfg.wigner_modes.push_back(s);
    }
  }
  if (node["times"] && node["times_cavity_periods"]) {
    rd.fail(node["times_cavity_periods"], "wigner.times_cavity_periods", "conflicts with 'times'");
  }
  if (node["times"]) cfg.wigner_times = rd.numbers(node["times"], "wigner.times");
  if (node["times_cavity_periods"]) {
    cfg.wigner_times_cavity_periods =
        rd.numbers(node["times_cavity_periods"], "wigner.times_cavity_periods");
  }
  for (double t : cfg.wigner_times) {
    if (t < 0.0) rd.fail(node["times"], "wigner.times", "times must be >= 0");
  }
  for (double t : cfg.wigner_times_cavity_periods) {
    if (t < 0.0) rd.fail(node["times_cavity_periods"], "wigner.times_cavity_periods", "must be >= 0");
  }
  if (node["points"]) cfg.wigner_points = rd.integer(node["points"], "wigner.points", 3);
  if (node["extent"]) {
    cfg.wigner_extent = rd.number(node["extent"], "wigner.extent");
    if (*cfg.wigner_extent <= 0.0) rd.fail(node["extent"], "wigner.extent", "must be > 0");
  }
}

void parse_spectrum(const Reader& rd, const YAML::Node& node, RunConfig& cfg) {
  const std::string path = "spectrum";
  rd.check_keys(node, path, {"n_max", "l_max", "chi"});
  if (node["n_max"]) cfg.spectrum_n_max = rd.integer(node["n_max"], "spectrum.n_max", 0);
  if (node["l_max"]) cfg.spectrum_l_max = rd.integer(node["l_max"], "spectrum.l_max", 0);
  if (const auto c = node["chi"]) {
    if (c.IsScalar() && c.Scalar() == "cure") {
      cfg.spectrum_chi_cure = true;
    } else {
      cfg.spectrum_chi = rd.number(c, "spectrum.chi");
      if (cfg.spectrum_chi < 0.0) rd.fail(c, "spectrum.chi", "must be >= 0");
    }
  }
}

}  // namespace

PureState InitialState::build(const ModeSpace& space) const {
  if (kind == "fock") {
    if (j >= space.n_a() || k >= space.n_b()) {
      throw ConfigError("run.initial_state: Fock state |" + std::to_string(j) + "," +
                        std::to_string(k) + "> does not fit the space");
    }
    return fock::product_state(fock::fock_state(space.n_a(), j), fock::fock_state(space.n_b(), k),
                               space);
  }
  if (kind == "coherent") {
    return fock::product_state(fock::coherent_state(alpha_a, space.n_a()),
                               fock::coherent_state(alpha_b, space.n_b()), space);
  }
  return fock::product_state(fock::fock_state(space.n_a(), 0), fock::fock_state(space.n_b(), 0),
                             space);
}

std::optional<DerivedFrame> RunConfig::physical_frame() const {
  if (!physical) return std::nullopt;
  return solve_frame(*physical);
}

FrameRates RunConfig::frame_rates() const {
  if (rates) return *rates;
  if (scaled) {
    const DerivedFrame f = frame_at_mean_field(preset(scaled->preset), scaled->alpha);
    const double g0_phys = scaled->uncorrected ? f.g0_uncorrected : f.g0;
    FrameRates r;
    r.omega_c = 1.0;
    r.g0 = scaled->g0_over_omega_c;
    r.omega_m = f.omega_m * r.g0 / g0_phys;
    r.g = std::abs(r.g0) / scaled->alpha;
    return r;
  }
  if (physical) return solve_frame(*physical).rates();
  throw ConfigError(source + ": neither 'system' nor 'rates' given");
}

double RunConfig::t_final() const {
  if (t_max) return *t_max;
  if (t_max_cavity_periods) {
    const double wc = frame_rates().omega_c;
    if (wc == 0.0) throw ConfigError(source + ": run.t_max_cavity_periods needs Omega_c != 0");
    return *t_max_cavity_periods * 2.0 * kPi / std::abs(wc);
  }
  throw ConfigError(source + ": run: one of 't_max' or 't_max_cavity_periods' is required");
}

int RunConfig::steps() const {
  if (n_steps > 0) return n_steps;
  const int n = default_step_count(frame_rates(), t_final());
  if (n > kMaxDefaultSteps) {
    throw ConfigError(source + ": run.n_steps: the default rule asks for " + std::to_string(n) +
                      " steps (> " + std::to_string(kMaxDefaultSteps) + "); set run.n_steps");
  }
  return n;
}

void apply_override(YAML::Node& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--set '" + assignment + "': expected key.path=value");
  }
  const std::string key = assignment.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(assignment.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw ConfigError("--set '" + assignment + "': " + e.what());
  }
  if (!root.IsDefined() || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);

  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) throw ConfigError("--set '" + assignment + "': empty path segment");
    parts.push_back(part);
  }
  // Walk with fresh handles: yaml-cpp node assignment rebinds, so use a stack.
  std::vector<YAML::Node> chain{root};
  for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
    YAML::Node child = chain.back()[parts[k]];
    if (!child.IsDefined() || child.IsNull()) {
      chain.back()[parts[k]] = YAML::Node(YAML::NodeType::Map);
      child = chain.back()[parts[k]];
    } else if (!child.IsMap()) {
      throw ConfigError("--set '" + assignment + "': '" + parts[k] + "' is not a mapping");
    }
    chain.push_back(child);
  }
  chain.back()[parts.back()] = value;
}

RunConfig parse_config(const YAML::Node& root, const std::string& source) {
  Reader rd{source};
  RunConfig cfg;
  cfg.source = source;
  rd.check_keys(root, "<root>",
                {"system", "rates", "space", "run", "output", "budget", "wigner", "spectrum"});
  const bool has_system = static_cast<bool>(root["system"]);
  const bool has_rates = static_cast<bool>(root["rates"]);
  if (has_system && has_rates) {
    rd.fail(root["rates"], "rates", "conflicts with 'system' (give physical parameters or rates)");
  }
  if (has_system) parse_system(rd, root["system"], cfg);
  if (has_rates) parse_rates(rd, root["rates"], cfg);

  if (const auto s = root["space"]) {
    rd.check_keys(s, "space", {"n_a", "n_b"});
    if (s["n_a"]) cfg.n_a = rd.integer(s["n_a"], "space.n_a", 2);
    if (s["n_b"]) cfg.n_b = rd.integer(s["n_b"], "space.n_b", 2);
  }
  if (root["run"]) parse_run(rd, root["run"], cfg);
  if (const auto o = root["output"]) {
    rd.check_keys(o, "output", {"dir"});
    if (o["dir"]) cfg.out_dir = rd.scalar<std::string>(o["dir"], "output.dir");
  }
  if (const auto b = root["budget"]) {
    rd.check_keys(b, "budget", {"squeezing_db", "alpha"});
    if (b["squeezing_db"]) {
      cfg.squeezing_db = rd.number(b["squeezing_db"], "budget.squeezing_db");
      if (cfg.squeezing_db < 0.0) rd.fail(b["squeezing_db"], "budget.squeezing_db", "must be >= 0");
    }
    if (b["alpha"]) {
      cfg.budget_alpha = rd.number(b["alpha"], "budget.alpha");
      if (*cfg.budget_alpha < 0.0) rd.fail(b["alpha"], "budget.alpha", "must be >= 0");
    }
  }
  if (root["wigner"]) parse_wigner(rd, root["wigner"], cfg);
  if (root["spectrum"]) parse_spectrum(rd, root["spectrum"], cfg);
  return cfg;
}

namespace {

RunConfig load_node(YAML::Node root, const std::vector<std::string>& overrides,
                    const std::string& source) {
  for (const auto& o : overrides) apply_override(root, o);
  if (!root.IsDefined() || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  return parse_config(root, source);
}

}  // namespace

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  YAML::Node root;
  try {
    root = YAML::Load(in);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(path + ":" + std::to_string(e.mark.line + 1) + ":" +
                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  return load_node(root, overrides, path);
}

RunConfig load_config_string(const std::string& text, const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("<inline>:" + std::to_string(e.mark.line + 1) + ":" +
                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  return load_node(root, overrides, "<inline>");
}

}  // namespace mechsim::cli
