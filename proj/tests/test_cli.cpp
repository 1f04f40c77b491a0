#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mechsim/cli/commands.hpp"
#include "mechsim/cli/config.hpp"
#include "mechsim/cli/main.hpp"
#include "mechsim/cli/verify.hpp"

using namespace mechsim;
using namespace mechsim::cli;

namespace {

const std::string kConfigs = MECHSIM_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mechsim_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::vector<std::string>* header = nullptr) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  if (header) {
    std::stringstream hs(line);
    for (std::string c; std::getline(hs, c, ',');) header->push_back(c);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) row.push_back(std::stod(c));
    rows.push_back(row);
  }
  return rows;
}

int run(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "mechsim");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run_main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

std::string config_error(const std::string& yaml) {
  try {
    load_config_string(yaml);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config: rates, space and run sections") {
  const auto cfg = load_config_string(R"(
rates: {omega_c: 1.0, omega_m_hz: 0.5, g0: 0.1}
space: {n_a: 7, n_b: 9}
run:
  t_max_cavity_periods: 2
  include_small: true
  initial_state: {kind: fock, j: 1, k: 2}
)");
  const auto r = cfg.frame_rates();
  CHECK(r.omega_m == doctest::Approx(M_PI));
  CHECK(cfg.t_final() == doctest::Approx(4 * M_PI));
  CHECK(cfg.space() == ModeSpace(7, 9));
  CHECK(cfg.include_small);
  const auto psi = cfg.initial.build(cfg.space());
  CHECK(std::abs(psi[cfg.space().index(1, 2)]) == doctest::Approx(1.0));
  CHECK_FALSE(cfg.physical_units());
}

TEST_CASE("config: diagnostics carry line and field") {
  const auto e = config_error("rates: {omega_c: 1, omega_m: 1}\nspace:\n  n_a: 5\n  nb: 4\n");
  CHECK(e.find(":4:") != std::string::npos);
  CHECK(e.find("space.nb") != std::string::npos);
  CHECK(config_error("rates: {omega_c: 1, omega_m: 1}\nsystem: {preset: cqed}\n").find("conflicts") != std::string::npos);
  CHECK(config_error("system: {preset: cqed, params: {omega_m: 1}}\n").find("exactly one") != std::string::npos);
  CHECK(config_error("rates: {omega_c: 1, omega_m: one}\n").find("rates.omega_m") != std::string::npos);
  CHECK(config_error("rates: {omega_c: 1, omega_m: 1, omega_m_hz: 1}\n").find("conflicts") != std::string::npos);
  CHECK(config_error("system: {preset: nope}\n").find("unknown preset") != std::string::npos);
  CHECK(config_error("rates: {omega_c: 1, omega_m: 1}\nrun: {initial_state: {kind: squeezed}}\n").find("kind") != std::string::npos);
  CHECK(config_error("rates: [1, 2\n").find("<inline>:") != std::string::npos);
}

TEST_CASE("config: --set overrides dotted keys") {
  const auto cfg = load_config_string("rates: {omega_c: 1, omega_m: 1}\n",
                                      {"space.n_a=13", "rates.g0=0.2", "run.initial_state.kind=coherent"});
  CHECK(cfg.n_a == 13);
  CHECK(cfg.frame_rates().g0 == doctest::Approx(0.2));
  CHECK(cfg.initial.kind == "coherent");
  CHECK_THROWS_AS(load_config_string("rates: {omega_c: 1, omega_m: 1}\n", {"space.n_a"}), ConfigError);
  CHECK_THROWS_AS(load_config_string("rates: {omega_c: 1, omega_m: 1}\n", {"rates.omega_c.x=1"}), ConfigError);
}

TEST_CASE("config: the default step rule refuses huge counts") {
  CHECK_THROWS_AS(load_config(kConfigs + "/strong_coupling.yaml", {"run.n_steps=0"}), ConfigError);
  const auto cfg = load_config_string(R"(
system: {preset: cqed, alpha: 80752}
run: {t_max: 1.0e-6}
)");
  CHECK_THROWS_AS(cfg.steps(), ConfigError);
  CHECK(load_config(kConfigs + "/strong_coupling.yaml").steps() == 400);
}

TEST_CASE("config: scaled cQED rates") {
  const auto cfg = load_config(kConfigs + "/strong_coupling.yaml");
  const auto r = cfg.frame_rates();
  CHECK(r.omega_c == 1.0);
  CHECK(r.g0 == 0.5);
  CHECK(r.g == doctest::Approx(0.5 / 80752));
  // Omega_m / g0 equals the physical frame's ratio
  PhysicalParams p = preset("cqed");
  const auto f = frame_at_mean_field(p, 80752);
  CHECK(r.omega_m / r.g0 == doctest::Approx(f.omega_m / f.g0));
  const auto lit = load_config(kConfigs + "/strong_coupling.yaml", {"rates.scaled_from.coupling=uncorrected"}).frame_rates();
  CHECK(lit.omega_m == doctest::Approx(222.7).epsilon(1e-3));
}

TEST_CASE("budget: 5.8 MHz squeezing experiment numbers") {
  const auto b = run_budget(load_config(kConfigs + "/squeezing_budget.yaml"));
  CHECK(b.n_p == doctest::Approx(35).epsilon(0.03));
  CHECK(b.decoherence_time == doctest::Approx(0.6e-3).epsilon(0.10));
  CHECK(b.r_max == doctest::Approx(0.54).epsilon(0.01 / 0.54));
  CHECK_FALSE(b.frame.has_value());
}

TEST_CASE("budget: presets") {
  const auto mech = run_budget(load_config(kConfigs + "/mechanics_budget.yaml"));
  CHECK(mech.n_p == doctest::Approx(74000).epsilon(0.03));
  const auto cq = run_budget(load_config(kConfigs + "/cqed_budget.yaml"));
  CHECK(std::abs(cq.n_p - 0.3) <= 0.05);
  CHECK(cq.ground_state);
  REQUIRE(cq.frame.has_value());
  CHECK(cq.frame->alpha == doctest::Approx(80752).epsilon(1e-9));
  CHECK(cq.l_max == doctest::Approx(instability_threshold(cq.frame->rates())));
  // budget needs physical parameters
  CHECK_THROWS_AS(run_budget(load_config(kConfigs + "/spectrum.yaml")), ConfigError);
}

TEST_CASE("fidelity: g0 = 0 gives F_exact = 1 everywhere") {
  const auto dir = scratch("g0zero");
  std::string log;
  REQUIRE(run({"fidelity", "-c", kConfigs + "/vacuum_law.yaml", "-o", dir.string(), "--set", "rates.g0=0",
               "--set", "run.t_max=5", "--set", "run.initial_state.kind=coherent",
               "--set", "run.initial_state.alpha_a=0.5", "--set", "space.n_a=12", "--set", "space.n_b=12"},
              &log) == 0);
  std::vector<std::string> header;
  const auto rows = read_csv(dir / "fidelity.csv", &header);
  CHECK(header == std::vector<std::string>{"t", "t_dimensionless_eta", "F_exact", "F_perturbative", "deficit_exact",
                                           "deficit_perturbative"});
  CHECK(rows.size() == 401);
  for (const auto& r : rows) CHECK(r[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fs::exists(dir / "fidelity.csv.meta.json"));
}

TEST_CASE("fidelity: vacuum deficit columns agree at epsilon = 0.01") {
  const auto dir = scratch("vacuum");
  REQUIRE(run({"fidelity", "-c", kConfigs + "/vacuum_law.yaml", "-o", dir.string()}) == 0);
  const auto rows = read_csv(dir / "fidelity.csv");
  double peak = 0.0;
  for (const auto& r : rows) peak = std::max(peak, r[5]);
  int n = 0;
  for (const auto& r : rows) {
    if (r[5] < 0.5 * peak) continue;  // nodes of the leading term are excluded
    ++n;
    CHECK(std::abs(r[4] / r[5] - 1.0) <= 0.2);
  }
  CHECK(n > 50);
}

TEST_CASE("identical runs write byte-identical files") {
  const auto a = scratch("repro_a"), b = scratch("repro_b");
  for (const auto& d : {a, b}) {
    REQUIRE(run({"fidelity", "-c", kConfigs + "/vacuum_law.yaml", "-o", d.string(), "--set", "run.n_steps=50"}) == 0);
    REQUIRE(run({"spectrum", "-c", kConfigs + "/instability.yaml", "-o", d.string()}) == 0);
  }
  for (const char* f : {"fidelity.csv", "fidelity.csv.meta.json", "spectrum.csv", "spectrum.csv.meta.json"}) {
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(slurp(a / "fidelity.csv").find("0.20000000000000001") != std::string::npos);
}

TEST_CASE("wigner: coherent start, vacuum start, thread-count independence") {
  auto cfg = load_config_string(R"(
rates: {omega_c: 1.0, omega_m: 0.7, g0: 0.3}
space: {n_a: 14, n_b: 12}
run: {initial_state: {kind: coherent, alpha_a: 0.6, alpha_b: 0.8}}
wigner: {modes: [a, b], times: [0, 1.5, 3.0], points: 41}
)");
  const auto one = run_wigner(cfg, 1);
  const auto four = run_wigner(cfg, 4);
  REQUIRE(one.size() == 6);
  for (std::size_t k = 0; k < one.size(); ++k) {
    CHECK(one[k].mode == four[k].mode);
    CHECK(one[k].time == four[k].time);
    CHECK((one[k].grid.values - four[k].grid.values).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(one[0].time == 0.0);
  CHECK(one[0].negativity <= 1e-6);
  CHECK(one[3].negativity <= 1e-6);

  cfg = load_config_string(R"(
rates: {omega_c: 1.0, omega_m: 0.7, g0: 0.0}
space: {n_a: 6, n_b: 6}
wigner: {modes: [b], times: [2.0], points: 21, extent: 4}
)");
  const auto vac = run_wigner(cfg, 2);
  REQUIRE(vac.size() == 1);
  const auto& g = vac[0].grid;
  for (int ip = 0; ip < 21; ip += 4)
    for (int ix = 0; ix < 21; ix += 4)
      CHECK(g.at(ip, ix) == doctest::Approx(std::exp(-g.x[ix] * g.x[ix] - g.p[ip] * g.p[ip]) / M_PI).epsilon(1e-12).scale(1e-3));
}

TEST_CASE("wigner command writes grids and a summary") {
  const auto dir = scratch("wigner");
  REQUIRE(run({"wigner", "-c", kConfigs + "/vacuum_law.yaml", "-o", dir.string(), "--set", "wigner.points=11",
               "--set", "wigner.times=[0, 1]"}) == 0);
  CHECK(fs::exists(dir / "wigner_b_000.csv"));
  CHECK(fs::exists(dir / "wigner_b_001.csv.meta.json"));
  const auto summary = json::parse(slurp(dir / "wigner_summary.json"));
  REQUIRE(summary["snapshots"].size() == 2);
  CHECK(summary["snapshots"][0].contains("negativity_volume"));
  std::vector<std::string> header;
  CHECK(read_csv(dir / "wigner_b_000.csv", &header).size() == 121);
  CHECK(header == std::vector<std::string>{"x", "p", "W"});
}

TEST_CASE("spectrum command") {
  const auto dir = scratch("spectrum");
  REQUIRE(run({"spectrum", "-c", kConfigs + "/spectrum.yaml", "-o", dir.string()}) == 0);
  std::vector<std::string> header;
  const auto rows = read_csv(dir / "spectrum.csv", &header);
  CHECK(header == std::vector<std::string>{"n", "l", "lambda_analytic", "lambda_numeric", "abs_err", "is_unstable"});
  REQUIRE(rows.size() == 25);
  CHECK(rows[0][2] == 0.0);
  CHECK(std::abs(rows[0][3]) < 1e-12);
  for (const auto& r : rows) CHECK(r[4] <= 1e-6 * std::max(1.0, std::abs(r[2])));

  const auto ins = scratch("instability");
  REQUIRE(run({"spectrum", "-c", kConfigs + "/instability.yaml", "-o", ins.string()}) == 0);
  bool negative = false;
  for (const auto& r : read_csv(ins / "spectrum.csv")) {
    CHECK((r[5] == 1.0) == (r[1] >= 6));
    negative = negative || r[2] < 0.0;
  }
  CHECK(negative);
  REQUIRE(run({"spectrum", "-c", kConfigs + "/instability.yaml", "-o", ins.string(), "--set", "spectrum.chi=cure"}) == 0);
  for (const auto& r : read_csv(ins / "spectrum.csv")) CHECK(r[2] >= 0.0);
}

TEST_CASE("verify passes and reports errata") {
  const auto rep = run_verify();
  CHECK(rep.passed());
  const auto doc = rep.to_json();
  REQUIRE(doc["errata"].contains("F_pm_ratio"));
  CHECK(doc["errata"]["F_pm_ratio"].size() == 4);
  CHECK(doc["errata"].contains("F_uni_printed"));
  CHECK(doc["errata"].contains("F_b2_printed"));
  CHECK(doc["errata"].contains("uncorrected_frame"));
}

TEST_CASE("verify detects an injected G_- sign error") {
  VerifyOptions opt;
  opt.flip_g_minus = true;
  const auto rep = run_verify(opt);
  CHECK_FALSE(rep.passed());
  CHECK_FALSE(rep.check("factorization").passed);
  CHECK(rep.check("E1_dual_construction").passed);
}

TEST_CASE("tool binary exit status") {
  const auto dir = scratch("tool");
  const std::string tool = MECHSIM_TOOL;
  CHECK(std::system((tool + " verify -o " + dir.string() + " > /dev/null").c_str()) == 0);
  CHECK(fs::exists(dir / "verify_report.json"));
  std::ofstream(dir / "bad.yaml") << "rates: {omega_c: 1}\n";
  const int bad = std::system((tool + " fidelity -c " + (dir / "bad.yaml").string() + " 2> /dev/null").c_str());
  CHECK(WEXITSTATUS(bad) == 2);
  const int missing = std::system((tool + " fidelity 2> /dev/null > /dev/null").c_str());
  CHECK(WEXITSTATUS(missing) == 2);
  CHECK(std::system((tool + " presets > /dev/null").c_str()) == 0);
}
