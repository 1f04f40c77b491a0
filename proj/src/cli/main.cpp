#include "mechsim/cli/main.hpp"

#include <CLI11.hpp>
#include <ostream>

#include "mechsim/cli/commands.hpp"
#include "mechsim/cli/config.hpp"
#include "mechsim/cli/verify.hpp"

namespace mechsim::cli {

int run_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quadratically coupled optomechanics simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "YAML run configuration")->required();
    sub->add_option("-o,--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--set", overrides, "override a key, e.g. --set space.n_a=30")
        ->take_all()
        ->allow_extra_args(false);
  };

  auto* budget = app.add_subcommand("budget", "thermal occupation, decoherence and squeezing budget");
  auto* fidelity = app.add_subcommand("fidelity", "fidelity of H_DS against H_MO evolution");
  auto* wigner = app.add_subcommand("wigner", "Wigner snapshots of the reduced states under H_MO");
  auto* spectrum = app.add_subcommand("spectrum", "H_MO eigenvalues with a diagonalization check");
  for (auto* sub : {budget, fidelity, wigner, spectrum}) add_common(sub);

  auto* verify = app.add_subcommand("verify", "run the built-in invariant suite");
  VerifyOptions vopt;
  std::string verify_out = ".";
  verify->add_option("-o,--out", verify_out, "directory for verify_report.json");
  verify->add_option("--n-a", vopt.n_a, "photon truncation")->check(CLI::Range(6, 60));
  verify->add_option("--n-b", vopt.n_b, "phonon truncation")->check(CLI::Range(6, 60));

  auto* presets = app.add_subcommand("presets", "list the built-in parameter presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*presets) return cmd_presets(out);
    if (*verify) {
      const VerifyReport rep = run_verify(vopt);
      write_json(fs::path(verify_out) / "verify_report.json", rep.to_json());
      for (const auto& c : rep.checks) {
        out << (c.passed ? "PASS " : "FAIL ") << c.name << "  " << c.value << " (tol "
            << c.tolerance << ")\n";
      }
      out << (rep.passed() ? "all checks passed" : "verification FAILED") << "\n";
      return rep.passed() ? 0 : 1;
    }

    RunConfig cfg = load_config(config_path, overrides);
    const fs::path dir = out_dir.empty() ? fs::path(cfg.out_dir) : fs::path(out_dir);
    if (*budget) return cmd_budget(cfg, dir, out);
    if (*fidelity) return cmd_fidelity(cfg, dir, out);
    if (*wigner) return cmd_wigner(cfg, dir, out);
    if (*spectrum) return cmd_spectrum(cfg, dir, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace mechsim::cli
