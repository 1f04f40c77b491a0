#include "mechsim/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "mechsim/quadrature.hpp"

namespace mechsim {

namespace {

const cplx kI(0.0, 1.0);

// int_0^t cos(w s) ds and int_0^t sin(w s) ds, finite as w -> 0.
double int_cos(double w, double t) {
  const double x = w * t;
  if (std::abs(x) < 1e-8) return t * (1.0 - x * x / 6.0);
  return std::sin(x) / w;
}

double int_sin(double w, double t) {
  const double x = 0.5 * w * t;
  if (std::abs(x) < 1e-8) return 0.5 * w * t * t * (1.0 - x * x / 3.0);
  return 2.0 * std::sin(x) * std::sin(x) / w;
}

// sin(x)/x
double sinc(double x) {
  if (std::abs(x) < 1e-6) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

}  // namespace

// ---------------------------------------------------------------------------
// F coefficients

FCoefficients f_coefficients(const FrameRates& rates, const CouplingSchedule& schedule,
                             const TimeGrid& grid) {
  rates.validate();
  if (grid.t0() < 0.0) throw std::invalid_argument("f_coefficients: grid must start at t >= 0");
  if (!schedule.covers(0.0, grid.t1())) {
    throw std::out_of_range("f_coefficients: schedule must cover [0, t1]");
  }
  const double wc = rates.omega_c;
  const std::size_t n = grid.size();
  FCoefficients f;
  f.t = grid.times();
  f.F_a.resize(n);
  f.F_b.resize(n);
  f.F_plus.assign(n, 0.0);
  f.F_minus.assign(n, 0.0);
  f.F_b2.assign(n, 0.0);
  f.F_b2_printed.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    f.F_a[k] = wc * f.t[k];
    f.F_b[k] = rates.omega_m * f.t[k];
  }

  // Cumulative quadrature from t = 0; the first interval [0, t0] is included.
  const auto knots = schedule.knots();
  auto gc = [&](double s) { return schedule(s) * std::cos(wc * s); };
  auto gs = [&](double s) { return schedule(s) * std::sin(wc * s); };
  double prev_t = 0.0;
  double fp = 0.0, fm = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = f.t[k];
    if (t > prev_t) {
      fp += integrate(gc, prev_t, t, knots);
      fm += integrate(gs, prev_t, t, knots);
    }
    f.F_plus[k] = fp;
    f.F_minus[k] = fm;
    prev_t = t;
  }

  // F_b2 from the coupled system (F_+, F_b2), RK4 with step doubling.
  auto rk4 = [&](int per_unit_substeps) {
    std::vector<double> out(n, 0.0);
    double y0 = 0.0, y1 = 0.0, t = 0.0;
    auto rhs = [&](double s, double a, double& d0, double& d1) {
      const double g = schedule(s);
      d0 = g * std::cos(wc * s);
      d1 = -2.0 * a * g * std::sin(wc * s);
    };
    for (std::size_t k = 0; k < n; ++k) {
      const double target = f.t[k];
      if (target > t) {
        const int m = std::max(1, static_cast<int>(std::ceil((target - t) * per_unit_substeps)));
        const double h = (target - t) / m;
        for (int s = 0; s < m; ++s) {
          double a0, a1, b0, b1, c0, c1, d0, d1;
          rhs(t, y0, a0, a1);
          rhs(t + 0.5 * h, y0 + 0.5 * h * a0, b0, b1);
          rhs(t + 0.5 * h, y0 + 0.5 * h * b0, c0, c1);
          rhs(t + h, y0 + h * c0, d0, d1);
          y0 += h / 6.0 * (a0 + 2 * b0 + 2 * c0 + d0);
          y1 += h / 6.0 * (a1 + 2 * b1 + 2 * c1 + d1);
          t += h;
        }
        t = target;
      }
      out[k] = y1;
    }
    return out;
  };
  const double rate = std::max({std::abs(wc), schedule.max_abs(), 1.0 / std::max(grid.t1(), 1e-300)});
  int per_unit = std::max(8, static_cast<int>(std::ceil(8.0 * rate)));
  std::vector<double> coarse = rk4(per_unit);
  for (int round = 0;; ++round) {
    per_unit *= 2;
    std::vector<double> fine = rk4(per_unit);
    double diff = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      diff = std::max(diff, std::abs(fine[k] - coarse[k]));
      scale = std::max(scale, std::abs(fine[k]));
    }
    coarse = std::move(fine);
    if (diff <= 1e-10 * scale || scale == 0.0) break;
    if (round > 14) throw QuadratureError("f_coefficients: F_b2 integration did not converge");
  }
  f.F_b2 = std::move(coarse);

  const double root = std::sqrt(std::abs(wc * rates.omega_m));
  for (std::size_t k = 0; k < n; ++k) {
    const double t = f.t[k];
    f.F_b2_printed[k] = root > 0.0
        ? -2.0 * schedule(t) / root * std::sin(wc * t) * f.F_plus[k]
        : std::numeric_limits<double>::quiet_NaN();
  }
  return f;
}

Operator generator_G_plus(const ModeSpace& space) {
  const Operator a = fock::annihilation(space.n_a(), Mode::a);
  return fock::tensor(a + a.adjoint(), fock::number(space.n_b(), Mode::b), space);
}

Operator generator_G_minus(const ModeSpace& space) {
  const Operator a = fock::annihilation(space.n_a(), Mode::a);
  return fock::tensor(kI * (a.adjoint() - a), fock::number(space.n_b(), Mode::b), space);
}

namespace {

// exp(-i F X (x) N_b) for Hermitian X on mode a: block k is exp(-i F k X).
Matrix exp_x_times_nb(const Matrix& x, double F, const ModeSpace& space) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(x);
  const Matrix& v = solver.eigenvectors();
  const RealVector& ev = solver.eigenvalues();
  const int na = space.n_a();
  const int nb = space.n_b();
  Matrix out = Matrix::Zero(space.joint_dim(), space.joint_dim());
  Vector ph(na);
  for (int k = 0; k < nb; ++k) {
    for (int j = 0; j < na; ++j) ph(j) = std::polar(1.0, -F * k * ev(j));
    const Matrix block = v * ph.asDiagonal() * v.adjoint();
    for (int j = 0; j < na; ++j)
      for (int jp = 0; jp < na; ++jp) out(space.index(j, k), space.index(jp, k)) = block(j, jp);
  }
  return out;
}

}  // namespace

Operator factored_unitary(double F_a, double F_b, double F_b2, double F_plus, double F_minus,
                          const ModeSpace& space, const FactorOptions& opt) {
  const Matrix a = fock::annihilation(space.n_a(), Mode::a).matrix();
  const Matrix x_plus = a + a.adjoint();
  const Matrix x_minus = opt.g_minus_sign * (kI * (a.adjoint() - a));
  Vector diag(space.joint_dim());
  for (int j = 0; j < space.n_a(); ++j) {
    for (int k = 0; k < space.n_b(); ++k) {
      const double phase = F_b * k + F_b2 * double(k) * k + F_a * j;
      diag(space.index(j, k)) = std::polar(1.0, -phase);
    }
  }
  Matrix u = exp_x_times_nb(x_plus, F_plus, space) * exp_x_times_nb(x_minus, F_minus, space);
  u = diag.asDiagonal() * u;
  return {SpaceTag::joint, std::move(u)};
}

std::vector<Operator> factored_propagator(const FrameRates& rates,
                                          const CouplingSchedule& schedule,
                                          const TimeGrid& grid, const ModeSpace& space,
                                          const FactorOptions& opt) {
  const FCoefficients f = f_coefficients(rates, schedule, grid);
  std::vector<Operator> out;
  out.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out.push_back(factored_unitary(f.F_a[k], f.F_b[k], f.F_b2[k], f.F_plus[k], f.F_minus[k],
                                   space, opt));
  }
  return out;
}

ConjugationReport conjugation_identities_check(const ModeSpace& space,
                                               std::vector<double> F_a_samples,
                                               std::vector<double> F_plus_samples, int keep_a,
                                               int keep_b) {
  const Operator gp = generator_G_plus(space);
  const Operator gm = generator_G_minus(space);
  const Operator nb = fock::embed(fock::number(space.n_b(), Mode::b), space);
  const Operator nb2 = nb * nb;
  ConjugationReport rep;
  auto deviation = [&](const Operator& x, const Operator& y) {
    return fock::interior_block(x.matrix() - y.matrix(), space, keep_a, keep_b)
        .cwiseAbs()
        .maxCoeff();
  };
  for (double fa : F_a_samples) {
    const Operator ua = factored_unitary(fa, 0.0, 0.0, 0.0, 0.0, space);
    const Operator lhs_p = ua * gp * ua.adjoint();
    const Operator rhs_p = cplx(std::cos(fa)) * gp - cplx(std::sin(fa)) * gm;
    const Operator lhs_m = ua * gm * ua.adjoint();
    const Operator rhs_m = cplx(std::cos(fa)) * gm + cplx(std::sin(fa)) * gp;
    rep.entries.push_back({"U_a G_+ U_a^dagger", fa, deviation(lhs_p, rhs_p)});
    rep.entries.push_back({"U_a G_- U_a^dagger", fa, deviation(lhs_m, rhs_m)});
  }
  for (double fp : F_plus_samples) {
    const Operator up = factored_unitary(0.0, 0.0, 0.0, fp, 0.0, space);
    const Operator lhs = up * gm * up.adjoint();
    const Operator rhs = gm + cplx(2.0 * fp) * nb2;
    rep.entries.push_back({"U_+ G_- U_+^dagger", fp, deviation(lhs, rhs)});
  }
  for (const auto& e : rep.entries) rep.max_deviation = std::max(rep.max_deviation, e.deviation);
  return rep;
}

// ---------------------------------------------------------------------------
// F_{+-} functions

FPM F_pm_functions(const FrameRates& rates, const CouplingSchedule& schedule, double t) {
  rates.validate();
  if (t < 0.0) throw std::invalid_argument("F_pm_functions: t must be >= 0");
  FPM f;
  if (t == 0.0) return f;
  const double wc = rates.omega_c;
  const double w2 = 2.0 * rates.omega_m;
  const auto knots = schedule.knots();
  auto q = [&](auto&& shape) {
    return 0.5 * integrate([&](double s) { return schedule(s) * shape(s); }, 0.0, t, knots);
  };
  f.pp = q([&](double s) { return std::cos(wc * s) * std::cos(w2 * s); });
  f.mm = q([&](double s) { return std::sin(wc * s) * std::sin(w2 * s); });
  f.pm = q([&](double s) { return std::cos(wc * s) * std::sin(w2 * s); });
  f.mp = q([&](double s) { return std::sin(wc * s) * std::cos(w2 * s); });
  return f;
}

FPM F_pm_functions(const FrameRates& rates, double t) {
  return F_pm_functions(rates, CouplingSchedule::constant(rates.g0), t);
}

FPM F_pm_closed_form(const FrameRates& rates, double t) {
  const double wp = rates.omega_plus();
  const double wm = rates.omega_minus();
  const double c = 0.25 * rates.g0;
  return {c * (int_cos(wm, t) + int_cos(wp, t)), c * (int_cos(wm, t) - int_cos(wp, t)),
          c * (int_sin(wp, t) - int_sin(wm, t)), c * (int_sin(wp, t) + int_sin(wm, t))};
}

FPM F_pm_printed(const FrameRates& rates, double t) {
  const double Wm = rates.omega_m;
  const double wp = rates.omega_plus();
  const double wm = rates.omega_minus();
  if (std::abs(wm) < 1e-9 * Wm || std::abs(wp) < 1e-9 * Wm) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan, nan};
  }
  const double den = rates.omega_c * rates.omega_c - 4.0 * Wm * Wm;
  const double h = 0.5 * Wm;
  return {h * (std::sin(wm * t) / wm + std::sin(wp * t) / wp),
          h * (std::sin(wm * t) / wm - std::sin(wp * t) / wp),
          h * (std::cos(wm * t) / wm - std::cos(wp * t) / wp) - 2.0 * Wm * Wm / den,
          h * (std::cos(wm * t) / wm + std::cos(wp * t) / wp) - rates.omega_c * Wm / den};
}

std::vector<RatioLog> F_pm_ratio_log(const FrameRates& rates, const std::vector<double>& times) {
  const double k = rates.g0 / (2.0 * rates.omega_m);
  std::vector<RatioLog> logs{{"F_pp", 0, 0, k, 0}, {"F_mm", 0, 0, k, 0},
                             {"F_pm", 0, 0, k, 0}, {"F_mp", 0, 0, -k, 0}};
  std::vector<std::vector<double>> ratios(4);
  for (double t : times) {
    if (t <= 0.0) continue;
    const FPM q = F_pm_functions(rates, t);
    const FPM p = F_pm_printed(rates, t);
    const double qa[4] = {q.pp, q.mm, q.pm, q.mp};
    const double pa[4] = {p.pp, p.mm, p.pm, p.mp};
    for (int i = 0; i < 4; ++i) {
      if (std::isfinite(pa[i]) && std::abs(pa[i]) > 1e-6 * rates.omega_m / std::abs(rates.omega_plus())) {
        ratios[i].push_back(qa[i] / pa[i]);
      }
    }
  }
  for (int i = 0; i < 4; ++i) {
    auto& r = ratios[i];
    logs[i].samples = static_cast<int>(r.size());
    if (r.empty()) continue;
    const double mean = std::accumulate(r.begin(), r.end(), 0.0) / r.size();
    double spread = 0.0;
    for (double v : r) spread = std::max(spread, std::abs(v - mean));
    logs[i].mean_ratio = mean;
    logs[i].max_spread = mean != 0.0 ? spread / std::abs(mean) : spread;
  }
  return logs;
}

double F_uni(const FrameRates& rates, double t) {
  const double x = 0.5 * rates.omega_plus() * t;
  const double s = 0.5 * t * sinc(x);  // sin(Omega_+ t/2) / Omega_+
  return 2.0 * rates.g0 * rates.g0 * s * s;
}

double F_uni_printed(const FrameRates& rates, double t) {
  const double a = t * sinc(rates.omega_plus() * t);  // sin(Omega_+ t)/Omega_+
  const double y = 0.5 * rates.omega_minus() * t;
  const double b = t * sinc(y) * std::sin(y);  // sin^2(y) / (Omega_-/2)
  return 2.0 * rates.g0 * rates.g0 * (a * a + b * b);
}

double F_uni_from_pm(const FrameRates& rates, double t) {
  const FPM f = F_pm_functions(rates, t);
  const double u = f.pp - f.mm;
  const double v = f.pm + f.mp;
  return 2.0 * (u * u + v * v);
}

CorrectionOperators correction_operators(const ModeSpace& space) {
  const Operator a = fock::annihilation(space.n_a(), Mode::a);
  const Operator b = fock::annihilation(space.n_b(), Mode::b);
  const Operator ad = a.adjoint();
  const Operator b2 = b * b;
  const Operator bd2 = b2.adjoint();
  auto ea = [&](const Operator& x) { return fock::embed(x, space); };
  return {ea(ad + a), ea(-kI * (a - ad)), ea(bd2 + b2), ea(-kI * (b2 - bd2))};
}

E1Result E1_operator(const FrameRates& rates, const CouplingSchedule& schedule, double t,
                     const ModeSpace& space) {
  rates.validate();
  if (t < 0.0) throw std::invalid_argument("E1_operator: t must be >= 0");
  const int d = space.joint_dim();
  if (t == 0.0) {
    return {Operator::zero(SpaceTag::joint, d), Operator::zero(SpaceTag::joint, d), 0.0};
  }
  const Matrix a = fock::annihilation(space.n_a(), Mode::a).matrix();
  const Matrix b = fock::annihilation(space.n_b(), Mode::b).matrix();
  const Matrix b2 = b * b;
  const double wc = rates.omega_c;
  const double w2 = 2.0 * rates.omega_m;
  auto integrand = [&](double s) -> Matrix {
    const Matrix xa = a * std::polar(1.0, -wc * s) + a.adjoint() * std::polar(1.0, wc * s);
    const Matrix xb = b2 * std::polar(1.0, -w2 * s) + b2.adjoint() * std::polar(1.0, w2 * s);
    const Operator k = fock::tensor({SpaceTag::mode_a, xa}, {SpaceTag::mode_b, xb}, space);
    return (0.5 * schedule(s)) * k.matrix();
  };
  Matrix quad = integrate_simpson<Matrix>(integrand, 0.0, t, [](const Matrix& m) { return m.norm(); },
                                          schedule.knots());

  const FPM f = F_pm_functions(rates, schedule, t);
  const CorrectionOperators c = correction_operators(space);
  const Operator expansion = cplx(f.pp) * (c.A_plus * c.B_plus) + cplx(f.mm) * (c.A_minus * c.B_minus) +
                       cplx(f.pm) * (c.A_plus * c.B_minus) + cplx(f.mp) * (c.A_minus * c.B_plus);
  E1Result r{{SpaceTag::joint, std::move(quad)}, expansion, 0.0};
  const double scale = r.by_expansion.max_abs();
  const double dev = (r.by_quadrature.matrix() - r.by_expansion.matrix()).cwiseAbs().maxCoeff();
  r.relative_deviation = scale > 0.0 ? dev / scale : dev;
  return r;
}

double perturbative_fidelity(const Operator& e1, const PureState& psi0) {
  const Vector v = e1.matrix() * psi0.amplitudes();
  const double mean = psi0.amplitudes().dot(v).real();
  return 1.0 + mean * mean - v.squaredNorm();
}

// ---------------------------------------------------------------------------
// Spectrum

double mo_eigenvalue(const FrameRates& rates, int n, int l) {
  if (n < 0 || l < 0) throw std::invalid_argument("mo_eigenvalue: n, l must be >= 0");
  return n * rates.omega_c + l * rates.omega_m - double(l) * l * rates.g0 * rates.g0 / rates.omega_c;
}

Eigenstate mo_eigenstate(const FrameRates& rates, int n, int l, const ModeSpace& space) {
  if (n < 0 || l < 0 || n >= space.n_a() || l >= space.n_b()) {
    throw std::out_of_range("mo_eigenstate: (n, l) outside the mode space");
  }
  const double beta = l * rates.g0 / rates.omega_c;
  const double reach = (std::sqrt(double(n)) + std::abs(beta));
  const int padded = space.n_a() + 40 + static_cast<int>(std::ceil(reach * reach + 10.0 * reach));
  const Operator d = displacement_op(cplx(-beta, 0.0), padded, Mode::a);
  const Vector col = d.matrix().col(n);
  Eigenstate out{PureState::basis(2, 0), 0.0};
  for (int m = space.n_a() - 2; m < padded; ++m) out.truncated_weight += std::norm(col(m));
  const PureState pa = PureState::normalized(col.head(space.n_a()));
  out.state = fock::product_state(pa, PureState::basis(space.n_b(), l), space);
  return out;
}

std::vector<SpectrumRow> spectrum(const FrameRates& rates, int n_max, int l_max) {
  rates.validate();
  if (n_max < 0 || l_max < 0) throw std::invalid_argument("spectrum: n_max, l_max must be >= 0");
  const double lm = instability_threshold(rates);
  std::vector<SpectrumRow> rows;
  for (int n = 0; n <= n_max; ++n) {
    for (int l = 0; l <= l_max; ++l) {
      SpectrumRow r;
      r.n = n;
      r.l = l;
      r.analytic = mo_eigenvalue(rates, n, l);
      r.unstable = l >= lm;
      rows.push_back(r);
    }
  }
  return rows;
}

std::vector<SpectrumRow> spectrum_with_numerics(const FrameRates& rates, int n_max, int l_max,
                                                const ModeSpace& space, double chi) {
  std::vector<SpectrumRow> rows = spectrum(rates, n_max, l_max);
  Operator h = build_H_MO(rates, space);
  if (chi != 0.0) {
    const Operator nb = fock::number(space.n_b(), Mode::b);
    h += cplx(chi) * fock::embed(nb * nb, space);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix(), Eigen::EigenvaluesOnly);
  const RealVector ev = solver.eigenvalues();
  std::vector<bool> used(ev.size(), false);

  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  for (auto& r : rows) r.analytic += chi * double(r.l) * r.l;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return rows[x].analytic < rows[y].analytic; });
  for (std::size_t idx : order) {
    SpectrumRow& r = rows[idx];
    if (r.n >= space.n_a() - 2 || r.l >= space.n_b()) continue;
    const Eigenstate es = mo_eigenstate(rates, r.n, r.l, space);
    r.fits = es.truncated_weight <= 1e-12;
    if (!r.fits) continue;
    Eigen::Index best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
      if (used[k]) continue;
      const double dist = std::abs(ev(k) - r.analytic);
      if (dist < best_d) {
        best_d = dist;
        best = k;
      }
    }
    if (best < 0) continue;
    used[best] = true;
    r.numeric = ev(best);
    r.abs_err = best_d;
    const Vector hv = h.matrix() * es.state.amplitudes();
    r.residual = (hv - r.analytic * es.state.amplitudes()).norm();
  }
  return rows;
}

double instability_threshold(const FrameRates& rates) {
  if (rates.g0 == 0.0) return std::numeric_limits<double>::infinity();
  return rates.omega_m * rates.omega_c / (rates.g0 * rates.g0);
}

namespace {

double converged_min(const Matrix& h, const ModeSpace& space, int* count) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  const Matrix& v = solver.eigenvectors();
  double lo = std::numeric_limits<double>::infinity();
  int c = 0;
  for (Eigen::Index col = 0; col < v.cols(); ++col) {
    double edge = 0.0;
    for (int j = space.n_a() - 2; j < space.n_a(); ++j)
      for (int k = 0; k < space.n_b(); ++k) edge += std::norm(v(space.index(j, k), col));
    if (edge <= 1e-10) {
      lo = std::min(lo, solver.eigenvalues()(col));
      ++c;
    }
  }
  if (count) *count = c;
  return lo;
}

}  // namespace

CureReport anharmonic_cure_check(const FrameRates& rates, double chi, const ModeSpace& space) {
  rates.validate();
  if (chi < 0.0) throw std::invalid_argument("anharmonic_cure_check: chi must be >= 0");
  CureReport rep;
  rep.chi = chi;
  rep.l_max = instability_threshold(rates);
  rep.analytic_min = std::numeric_limits<double>::infinity();
  for (int n = 0; n < space.n_a(); ++n)
    for (int l = 0; l < space.n_b(); ++l)
      rep.analytic_min = std::min(rep.analytic_min, mo_eigenvalue(rates, n, l) + chi * double(l) * l);

  const Operator h = build_H_MO(rates, space);
  const Operator nb = fock::number(space.n_b(), Mode::b);
  const Operator cure = fock::embed(nb * nb, space);
  rep.numeric_min_uncured = converged_min(h.matrix(), space, nullptr);
  rep.numeric_min = converged_min((h + cplx(chi) * cure).matrix(), space, &rep.converged_states);
  return rep;
}

}  // namespace mechsim
