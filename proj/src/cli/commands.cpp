#include "mechsim/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "mechsim/evolve.hpp"

namespace mechsim::cli {
namespace {


json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json rates_json(const FrameRates& r) {
  return {{"omega_c", r.omega_c}, {"omega_m", r.omega_m}, {"g0", r.g0}, {"g", r.g},
          {"epsilon", r.epsilon()}, {"l_max", finite_or_null(instability_threshold(r))}};
}

json frame_json(const DerivedFrame& f) {
  return {{"alpha", f.alpha},
          {"r", f.r},
          {"omega_c", f.omega_c},
          {"omega_m", f.omega_m},
          {"g0", f.g0},
          {"g", f.g},
          {"g_bare", f.g_bare},
          {"drive_phase", f.drive_phase},
          {"residual", f.residual},
          {"omega_c_uncorrected", f.omega_c_uncorrected},
          {"g0_uncorrected", f.g0_uncorrected}};
}

/// Common sidecar fields: units, frame convention and the rates used.
json base_meta(const RunConfig& cfg, const std::string& kind) {
  json m;
  m["kind"] = kind;
  m["config"] = cfg.source;
  m["hbar"] = 1;
  m["frame"] =
      "displaced-squeezed frame D(alpha) S(r), drive phase rotated so alpha is real; "
      "H_MO = Omega_c a^dag a + Omega_m b^dag b + g0 (a + a^dag) b^dag b";
  m["index_order"] = "mode-a-major (j * n_b + k)";
  if (cfg.physical_units()) {
    m["time_unit"] = "s";
    m["rate_unit"] = "rad/s";
  } else {
    m["time_unit"] = "dimensionless (rates as configured)";
    m["rate_unit"] = "dimensionless";
  }
  if (cfg.preset_name) m["preset"] = *cfg.preset_name;
  if (cfg.scaled) {
    m["scaled_from"] = {{"preset", cfg.scaled->preset},
                        {"alpha", cfg.scaled->alpha},
                        {"g0_over_omega_c", cfg.scaled->g0_over_omega_c},
                        {"coupling", cfg.scaled->uncorrected ? "uncorrected" : "exact"}};
  }
  m["space"] = {{"n_a", cfg.n_a}, {"n_b", cfg.n_b}};
  return m;
}

json initial_json(const InitialState& s) {
  json j{{"kind", s.kind}};
  if (s.kind == "fock") {
    j["j"] = s.j;
    j["k"] = s.k;
  } else if (s.kind == "coherent") {
    j["alpha_a"] = {s.alpha_a.real(), s.alpha_a.imag()};
    j["alpha_b"] = {s.alpha_b.real(), s.alpha_b.imag()};
  }
  return j;
}

PhysicalParams require_physical(const RunConfig& cfg, const char* cmd) {
  if (!cfg.physical) {
    throw ConfigError(cfg.source + ": " + cmd + " needs a 'system' section (physical parameters)");
  }
  return *cfg.physical;
}

std::vector<double> wigner_times(const RunConfig& cfg, const FrameRates& rates) {
  std::vector<double> t = cfg.wigner_times;
  const double period = 2.0 * kPi / std::abs(rates.omega_c);
  if (!cfg.wigner_times_cavity_periods.empty()) {
    for (double c : cfg.wigner_times_cavity_periods) t.push_back(c * period);
  }
  if (t.empty()) t = {0.0, 0.5 * period, period};
  return t;
}

std::string snapshot_name(const std::string& mode, std::size_t index) {
  std::ostringstream s;
  s << "wigner_" << mode << "_" << std::setw(3) << std::setfill('0') << index << ".csv";
  return s.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// budget

json BudgetReport::to_json() const {
  json j{{"n_p", n_p},
         {"decoherence_time_s", finite_or_null(decoherence_time)},
         {"periods_within_decoherence", finite_or_null(periods_within_decoherence)},
         {"squeezing_db", squeezing_db},
         {"r_max", r_max},
         {"flags",
          {{"ground_state", ground_state},
           {"sideband_resolved", sideband_resolved},
           {"squeezing_reachable", squeezing_reachable},
           {"perturbative", perturbative}}}};
  if (frame) {
    j["frame"] = frame_json(*frame);
    j["l_max"] = finite_or_null(l_max);
    j["epsilon"] = epsilon;
  } else {
    j["frame"] = nullptr;
  }
  return j;
}

BudgetReport run_budget(const RunConfig& cfg) {
  const PhysicalParams p = require_physical(cfg, "budget");
  BudgetReport b;
  b.n_p = fock::thermal_occupation(p.omega_m, p.temperature);
  const double rate = p.gamma_m * b.n_p;
  b.decoherence_time = rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
  b.periods_within_decoherence = b.decoherence_time * p.omega_m / (2.0 * kPi);
  b.squeezing_db = cfg.squeezing_db;
  b.r_max = squeezing_from_dB(cfg.squeezing_db);
  b.ground_state = b.n_p < 1.0;
  b.sideband_resolved = p.kappa < p.omega_m;

  if (cfg.budget_alpha) {
    b.frame = frame_at_mean_field(p, *cfg.budget_alpha);
  } else if (std::abs(p.drive) > 0.0) {
    b.frame = solve_frame(p);
  }
  if (b.frame) {
    const FrameRates r = b.frame->rates();
    b.l_max = instability_threshold(r);
    b.epsilon = r.epsilon();
    b.squeezing_reachable = std::abs(b.frame->r) <= b.r_max;
    b.perturbative = std::abs(b.epsilon) < 0.1;
  }
  return b;
}

int cmd_budget(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const BudgetReport b = run_budget(cfg);
  json doc = b.to_json();
  doc["config"] = cfg.source;
  if (cfg.preset_name) doc["preset"] = *cfg.preset_name;
  doc["units"] = {{"decoherence_time_s", "s"}, {"rates", "rad/s"}, {"r", "dimensionless"}};
  write_json(out / "budget.json", doc);
  log << "n_p = " << b.n_p << "\n"
      << "decoherence time = " << b.decoherence_time << " s ("
      << b.periods_within_decoherence << " mechanical periods)\n"
      << "|r_max| = " << b.r_max << " from " << b.squeezing_db << " dB\n";
  if (b.frame) {
    log << "frame: alpha = " << b.frame->alpha << ", r = " << b.frame->r
        << ", epsilon = " << b.epsilon << ", l_max = " << b.l_max << "\n";
  }
  log << "wrote " << (out / "budget.json").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fidelity

FidelityTrace run_fidelity(const RunConfig& cfg) {
  const FrameRates rates = cfg.frame_rates();
  const ModeSpace space = cfg.space();
  const TimeGrid grid = TimeGrid::uniform(0.0, cfg.t_final(), cfg.steps());
  return ds_vs_mo_experiment(rates, cfg.initial.build(space), grid, space, cfg.include_small);
}

int cmd_fidelity(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const FrameRates rates = cfg.frame_rates();
  const FidelityTrace tr = run_fidelity(cfg);
  CsvTable csv({"t", "t_dimensionless_eta", "F_exact", "F_perturbative", "deficit_exact",
                "deficit_perturbative"});
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    csv.add_row({tr.times[k], tr.eta[k], tr.F_exact[k], tr.F_perturbative[k], tr.deficit_exact[k],
                 tr.deficit_perturbative[k]});
  }
  const fs::path file = out / "fidelity.csv";
  csv.write(file);

  const auto valid = std::count(tr.valid.begin(), tr.valid.end(), true);
  json meta = base_meta(cfg, "fidelity");
  meta["rates"] = rates_json(rates);
  meta["columns"] = {{"t", meta["time_unit"]},
                     {"t_dimensionless_eta", "Omega_m t"},
                     {"F_exact", "|<psi_MO(t)|psi_DS(t)>|^2"},
                     {"F_perturbative", "1 - F_uni(t)"},
                     {"deficit_exact", "1 - F_exact"},
                     {"deficit_perturbative", "F_uni(t)"}};
  meta["include_small"] = cfg.include_small;
  meta["initial_state"] = initial_json(cfg.initial);
  meta["n_steps"] = static_cast<int>(tr.times.size()) - 1;
  meta["min_F_exact"] = tr.min_F_exact();
  meta["max_edge_weight"] = tr.max_edge_weight;
  meta["perturbative_valid_samples"] = valid;
  if (rates.epsilon_warning()) meta["warning"] = "epsilon = g0/Omega_m >= 0.1";
  write_sidecar(file, meta);

  log << "epsilon = " << tr.epsilon << ", min F_exact = " << std::setprecision(10)
      << tr.min_F_exact() << "\n";
  if (rates.epsilon_warning()) log << "warning: epsilon >= 0.1, perturbative column unreliable\n";
  log << "wrote " << file.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// wigner

int thread_budget() {
  if (const char* env = std::getenv("MECH_SIM_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(n);
    throw ConfigError(std::string("MECH_SIM_THREADS='") + env + "' is not a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<WignerSnapshot> run_wigner(const RunConfig& cfg, int threads) {
  const FrameRates rates = cfg.frame_rates();
  const ModeSpace space = cfg.space();
  const std::vector<double> requested = wigner_times(cfg, rates);

  std::vector<double> grid_times = requested;
  grid_times.push_back(0.0);
  std::sort(grid_times.begin(), grid_times.end());
  grid_times.erase(std::unique(grid_times.begin(), grid_times.end()), grid_times.end());
  const PureState psi0 = cfg.initial.build(space);
  std::vector<PureState> states;
  if (grid_times.size() == 1) {
    states.push_back(psi0);
  } else {
    states = evolve_unitary(build_H_MO(rates, space), psi0, TimeGrid::from_times(grid_times),
                            "H_MO")
                 .pure;
  }
  auto state_at = [&](double t) -> const PureState& {
    const auto it = std::lower_bound(grid_times.begin(), grid_times.end(), t);
    return states[static_cast<std::size_t>(it - grid_times.begin())];
  };

  struct Job {
    std::string mode;
    double time;
    DensityMatrix rho;
  };
  std::vector<Job> jobs;
  for (const auto& mode : cfg.wigner_modes) {
    for (double t : requested) {
      jobs.push_back({mode, t, fock::partial_trace(state_at(t), mode == "a" ? Mode::a : Mode::b,
                                                   space)});
    }
  }

  // One square grid per mode, wide enough for every snapshot of that mode.
  std::vector<WignerSpec> specs(jobs.size());
  for (const auto& mode : cfg.wigner_modes) {
    double extent = 0.0;
    if (cfg.wigner_extent) {
      extent = *cfg.wigner_extent;
    } else {
      for (const auto& j : jobs) {
        if (j.mode == mode) extent = std::max(extent, WignerSpec::around(j.rho).x_max);
      }
    }
    WignerSpec s;
    s.x_min = s.p_min = -extent;
    s.x_max = s.p_max = extent;
    s.n_x = s.n_p = cfg.wigner_points;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      if (jobs[k].mode == mode) specs[k] = s;
    }
  }

  std::vector<WignerSnapshot> out(jobs.size());
  const int n_threads =
      std::max(1, std::min<int>(threads > 0 ? threads : thread_budget(), static_cast<int>(jobs.size())));
  std::vector<std::exception_ptr> errors(n_threads);
  auto worker = [&](int w) {
    try {
      for (std::size_t k = w; k < jobs.size(); k += n_threads) {
        WignerGrid g = wigner(jobs[k].rho, specs[k]);
        const double neg = negativity_volume(g);
        out[k] = {jobs[k].mode, jobs[k].time, std::move(g), neg};
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < n_threads; ++w) pool.emplace_back(worker, w);
  worker(0);
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

int cmd_wigner(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const FrameRates rates = cfg.frame_rates();
  const auto snaps = run_wigner(cfg);
  const double period = 2.0 * kPi / std::abs(rates.omega_c);

  json summary = base_meta(cfg, "wigner");
  summary["rates"] = rates_json(rates);
  summary["initial_state"] = initial_json(cfg.initial);
  summary["evolution"] = "H_MO, unitary";
  summary["convention"] = "W(x, p) with a = (x + i p)/sqrt(2), vacuum peak 1/pi";
  summary["snapshots"] = json::array();
  std::map<std::string, std::size_t> counter;
  for (const auto& s : snaps) {
    const std::string name = snapshot_name(s.mode, counter[s.mode]++);
    CsvTable csv({"x", "p", "W"});
    for (int ip = 0; ip < s.grid.spec.n_p; ++ip) {
      for (int ix = 0; ix < s.grid.spec.n_x; ++ix) {
        csv.add_row({s.grid.x[ix], s.grid.p[ip], s.grid.at(ip, ix)});
      }
    }
    csv.write(out / name);
    json meta = base_meta(cfg, "wigner");
    meta["mode"] = s.mode;
    meta["time"] = s.time;
    meta["time_cavity_periods"] = s.time / period;
    meta["columns"] = {{"x", "dimensionless quadrature"},
                       {"p", "dimensionless quadrature"},
                       {"W", "quasi-probability density"}};
    meta["grid"] = {{"n_x", s.grid.spec.n_x},
                    {"n_p", s.grid.spec.n_p},
                    {"x_range", {s.grid.spec.x_min, s.grid.spec.x_max}},
                    {"p_range", {s.grid.spec.p_min, s.grid.spec.p_max}}};
    write_sidecar(out / name, meta);
    summary["snapshots"].push_back({{"file", name},
                                    {"mode", s.mode},
                                    {"time", s.time},
                                    {"time_cavity_periods", s.time / period},
                                    {"negativity_volume", s.negativity},
                                    {"min_W", s.grid.min()},
                                    {"integral", s.grid.integral()}});
    log << s.mode << " t = " << s.time << " (" << s.time / period
        << " cavity periods): negativity = " << s.negativity << ", min W = " << s.grid.min()
        << "\n";
  }
  write_json(out / "wigner_summary.json", summary);
  log << "wrote " << snaps.size() << " grids and " << (out / "wigner_summary.json").string()
      << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// spectrum

double spectrum_chi(const RunConfig& cfg) {
  if (!cfg.spectrum_chi_cure) return cfg.spectrum_chi;
  const FrameRates r = cfg.frame_rates();
  return r.g0 * r.g0 / r.omega_c;
}

std::vector<SpectrumRow> run_spectrum(const RunConfig& cfg) {
  return spectrum_with_numerics(cfg.frame_rates(), cfg.spectrum_n_max, cfg.spectrum_l_max,
                                cfg.space(), spectrum_chi(cfg));
}

int cmd_spectrum(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const FrameRates rates = cfg.frame_rates();
  const double chi = spectrum_chi(cfg);
  const auto rows = run_spectrum(cfg);
  CsvTable csv({"n", "l", "lambda_analytic", "lambda_numeric", "abs_err", "is_unstable"});
  double worst_rel = 0.0;
  double worst_residual = 0.0;
  int matched = 0, unstable = 0;
  for (const auto& r : rows) {
    csv.add_row({double(r.n), double(r.l), r.analytic, r.numeric, r.abs_err,
                 r.unstable ? 1.0 : 0.0});
    if (r.unstable) ++unstable;
    if (std::isfinite(r.numeric)) {
      ++matched;
      const double scale = std::max(std::abs(r.analytic), std::abs(rates.omega_c));
      worst_rel = std::max(worst_rel, r.abs_err / scale);
      worst_residual = std::max(worst_residual, r.residual);
    }
  }
  const fs::path file = out / "spectrum.csv";
  csv.write(file);
  json meta = base_meta(cfg, "spectrum");
  meta["rates"] = rates_json(rates);
  meta["chi"] = chi;
  meta["columns"] = {{"n", "photon label"},
                     {"l", "phonon label"},
                     {"lambda_analytic", "n Omega_c + l Omega_m - l^2 g0^2/Omega_c + chi l^2"},
                     {"lambda_numeric", "matched eigenvalue of H_MO + chi N_b^2 (nan if the "
                                        "eigenstate does not fit the space)"},
                     {"abs_err", "|lambda_numeric - lambda_analytic|"},
                     {"is_unstable", "1 if l >= l_max"}};
  meta["rate_unit_note"] = "eigenvalues in the rate unit";
  meta["matched_rows"] = matched;
  meta["unstable_rows"] = unstable;
  meta["max_relative_error"] = worst_rel;
  meta["max_eigenstate_residual"] = worst_residual;
  write_sidecar(file, meta);
  log << rows.size() << " rows, " << matched << " cross-checked (max relative error "
      << worst_rel << "), " << unstable << " with l >= l_max = " << instability_threshold(rates)
      << "\nwrote " << file.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// presets

int cmd_presets(std::ostream& log) {
  json doc = json::object();
  for (const auto& name : preset_names()) {
    const PhysicalParams p = preset(name);
    doc[name] = {{"omega_m", p.omega_m},
                 {"omega_m_hz", p.omega_m / (2.0 * kPi)},
                 {"kappa", p.kappa},
                 {"gamma_m", p.gamma_m},
                 {"temperature", p.temperature},
                 {"g_quad", p.g_quad},
                 {"n_p", fock::thermal_occupation(p.omega_m, p.temperature)}};
  }
  log << doc.dump(2) << "\n";
  return 0;
}

}  // namespace mechsim::cli
