// Self-contained invariant suite behind `mechsim verify`.
#pragma once

#include <string>
#include <vector>

#include "mechsim/cli/output.hpp"

namespace mechsim::cli {

struct VerifyOptions {
  int n_a = 12;
  int n_b = 12;
  bool flip_g_minus = false;  // builds the factored propagator with the wrong G_- sign
};

struct VerifyCheck {
  std::string name;
  double value = 0.0;      // measured deviation (or 1 - fidelity)
  double tolerance = 0.0;
  bool passed = false;
  json detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  json errata;

  bool passed() const;
  const VerifyCheck& check(const std::string& name) const;
  json to_json() const;
};

VerifyReport run_verify(const VerifyOptions& opt = {});

}  // namespace mechsim::cli
