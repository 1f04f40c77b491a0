#include <doctest.h>

#include "mechsim/model.hpp"
#include "oracles.hpp"

using namespace mechsim;
using oracle::Mat;

namespace {

struct Ops {
  Mat a, ad, na, ia, b, bd, nb, ib;
};

Ops ops(int n_a, int n_b) {
  Ops o;
  o.a = oracle::lowering(n_a);
  o.ad = o.a.adjoint();
  o.na = o.ad * o.a;
  o.ia = Mat::Identity(n_a, n_a);
  o.b = oracle::lowering(n_b);
  o.bd = o.b.adjoint();
  o.nb = o.bd * o.b;
  o.ib = Mat::Identity(n_b, n_b);
  return o;
}

double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

Mat block(const Mat& m, int n_b, int keep_a, int keep_b) {
  Mat out(keep_a * keep_b, keep_a * keep_b);
  for (int j = 0; j < keep_a; ++j)
    for (int k = 0; k < keep_b; ++k)
      for (int jj = 0; jj < keep_a; ++jj)
        for (int kk = 0; kk < keep_b; ++kk) out(j * keep_b + k, jj * keep_b + kk) = m(j * n_b + k, jj * n_b + kk);
  return out;
}

PhysicalParams small_system(double alpha) {
  PhysicalParams p;
  p.omega_m = 1.0;
  p.delta = -0.3;
  p.g_quad = 0.05 / alpha;
  p.drive = drive_for_mean_field(p, alpha);
  return p;
}

}  // namespace

TEST_CASE("H_MO from explicit Kronecker products") {
  const FrameRates r{0.9, 1.3, 0.21, 0.0};
  const ModeSpace s(5, 6);
  const Ops o = ops(5, 6);
  const Mat ref = r.omega_c * oracle::kron(o.na, o.ib) + r.omega_m * oracle::kron(o.ia, o.nb) +
                  r.g0 * oracle::kron(o.a + o.ad, o.nb);
  CHECK(max_abs(build_H_MO(r, s).matrix() - ref) < 1e-14);
}

TEST_CASE("H_DS is H_MO plus the auxiliary and small terms") {
  const FrameRates r{0.9, 1.3, 0.21, 0.04};
  const ModeSpace s(5, 6);
  const Ops o = ops(5, 6);
  const Mat aux = 0.5 * r.g0 * oracle::kron(o.a + o.ad, o.b * o.b + o.bd * o.bd);
  const Mat small = r.g * oracle::kron(o.na, o.nb + 0.5 * (o.b * o.b + o.bd * o.bd));
  const Mat mo = build_H_MO(r, s).matrix();
  CHECK(max_abs(build_H_DS(r, s, false).matrix() - mo - aux) < 1e-14);
  CHECK(max_abs(build_H_DS(r, s, true).matrix() - mo - aux - small) < 1e-14);
  CHECK(build_H_DS(r, s, true).is_hermitian());
}

TEST_CASE("H_full from explicit Kronecker products") {
  PhysicalParams p;
  p.omega_m = 2.0;
  p.delta = 0.4;
  p.g_quad = 0.03;
  p.drive = {0.2, -0.1};
  const ModeSpace s(4, 5);
  const Ops o = ops(4, 5);
  const Mat ref = -p.delta * oracle::kron(o.na, o.ib) + p.omega_m * oracle::kron(o.ia, o.nb) +
                  oracle::kron(std::conj(p.drive) * o.a + p.drive * o.ad, o.ib) +
                  p.g_quad * oracle::kron(o.na, o.nb + 0.5 * (o.b * o.b + o.bd * o.bd + o.ib));
  CHECK(max_abs(build_H_full(p, s).matrix() - ref) < 1e-14);
}

TEST_CASE("displacement and squeezing against a Taylor exponential") {
  const int d = 20;
  const cplx al(0.6, 0.3), z(-0.35, 0.1);
  const Mat a = oracle::lowering(d);
  const Mat dref = oracle::expm(al * a.adjoint() - std::conj(al) * a);
  const Mat sref = oracle::expm(-0.5 * (std::conj(z) * a * a - z * a.adjoint() * a.adjoint()));
  CHECK(max_abs(displacement_op(al, d, Mode::a).matrix() - dref) < 1e-11);
  CHECK(max_abs(squeezing_op(z, d, Mode::b).matrix() - sref) < 1e-11);
}

TEST_CASE("squeezed vacuum quadrature variance is e^{2r}") {
  const int d = 60;
  const double r = -0.54;
  const auto s = squeezing_op(r, d, Mode::b);
  const oracle::Vec v = s.matrix().col(0);
  const Mat x = oracle::lowering(d) + oracle::lowering(d).adjoint();
  const double var = (v.adjoint() * x * x * v)(0).real();
  CHECK(var == doctest::Approx(std::exp(2 * r)).epsilon(1e-9));
}

TEST_CASE("frame at mean field: closed-form rates") {
  PhysicalParams p;
  p.omega_m = 1.7;
  p.delta = -0.2;
  p.g_quad = 0.01;
  const double alpha = 3.0;
  const auto f = frame_at_mean_field(p, alpha);
  const double Wm = std::sqrt(p.omega_m * p.omega_m + 2 * p.g_quad * p.omega_m * alpha * alpha);
  CHECK(f.omega_m == doctest::Approx(Wm));
  CHECK(std::exp(2 * f.r) == doctest::Approx(p.omega_m / Wm));
  CHECK(f.omega_c == doctest::Approx(-p.delta + 0.5 * p.g_quad * p.omega_m / Wm));
  CHECK(f.g0 == doctest::Approx(f.g * alpha));
  CHECK(f.g == doctest::Approx(p.g_quad * p.omega_m / Wm));
  CHECK(f.g0_uncorrected == doctest::Approx(p.g_quad * alpha));
}

TEST_CASE("conjugating H_full by D(alpha) S(r) reproduces H_DS on the interior") {
  // Independent numerics: Taylor exponentials and explicit Kronecker products.
  const double alpha = 2.0;
  const PhysicalParams p = small_system(alpha);
  const auto f = solve_frame(p);
  const int n_a = 40, n_b = 24;
  const Ops o = ops(n_a, n_b);
  const Mat h = build_H_full(p, ModeSpace(n_a, n_b)).matrix();
  const Mat d = oracle::expm(f.alpha * (o.ad - o.a));
  const Mat s = oracle::expm(-0.5 * f.r * (o.b * o.b - o.bd * o.bd));
  const Mat u = oracle::kron(d, s);
  // the drive phase is zero for a real positive mean field
  CHECK(std::abs(f.drive_phase) < 1e-12);
  const Mat conj = u.adjoint() * h * u;
  const Mat ds = build_H_DS(f.rates(), ModeSpace(n_a, n_b), true).matrix();
  const int ka = 8, kb = 6;
  Mat diff = block(conj - ds, n_b, ka, kb);
  const cplx offset = diff.diagonal().mean();
  diff -= offset * Mat::Identity(ka * kb, ka * kb);
  CHECK(max_abs(diff) < 1e-9 * max_abs(block(ds, n_b, ka, kb)));

  // the textbook coefficients leave a visible residue
  FrameRates lit = f.rates();
  lit.omega_c = f.omega_c_uncorrected;
  lit.g0 = f.g0_uncorrected;
  lit.g = p.g_quad;
  Mat ldiff = block(conj - build_H_DS(lit, ModeSpace(n_a, n_b), true).matrix(), n_b, ka, kb);
  ldiff -= ldiff.diagonal().mean() * Mat::Identity(ka * kb, ka * kb);
  CHECK(max_abs(ldiff) > 1e-4 * max_abs(block(ds, n_b, ka, kb)));
}

TEST_CASE("library conjugation check agrees with the oracle") {
  const auto dev = frame_conjugation_check(small_system(3.0), ModeSpace(70, 30), 10, 8);
  CHECK(dev.relative() < 1e-9);
  const auto lit = frame_conjugation_check(small_system(3.0), ModeSpace(70, 30), 10, 8, true);
  CHECK(lit.relative() > 1e-4);
}

TEST_CASE("solve_frame finds the classical fixed point") {
  PhysicalParams p;
  p.omega_m = 1.0;
  p.delta = -0.5;
  p.g_quad = 0.02;
  p.kappa = 0.1;
  p.drive = {0.3, 0.4};
  const auto f = solve_frame(p);
  // alpha_lab solves (-i Omega_c - kappa) alpha - i eps = 0 with Omega_c(|alpha|)
  const cplx i(0, 1);
  const cplx al = f.alpha_lab();
  const cplx res = (-i * f.omega_c - p.kappa) * al - i * p.drive;
  CHECK(std::abs(res) < 1e-10);
  CHECK(f.alpha >= 0.0);
  CHECK(std::abs(classical_drift_residual(f, p)) < 1e-10);
  // the self-consistent Omega_c belongs to |alpha|
  CHECK(f.omega_c == doctest::Approx(frame_at_mean_field(p, f.alpha).omega_c));
}

TEST_CASE("drive_for_mean_field round trip") {
  PhysicalParams p = preset("cqed");
  p.drive = drive_for_mean_field(p, 80752.0);
  const auto f = solve_frame(p);
  CHECK(f.alpha == doctest::Approx(80752.0).epsilon(1e-10));
}

TEST_CASE("no stable mean field raises FrameError") {
  PhysicalParams p;
  p.omega_m = 1.0;
  p.g_quad = 0.2;
  p.delta = 0.1;  // Omega_c(0) = 0 with kappa = 0
  p.drive = 0.05;
  CHECK_THROWS_AS(solve_frame(p), FrameError);
}

TEST_CASE("zero drive gives alpha = 0") {
  PhysicalParams p;
  p.omega_m = 1.0;
  p.g_quad = 0.2;
  p.delta = -1.0;
  const auto f = solve_frame(p);
  CHECK(f.alpha == 0.0);
  CHECK(f.g0 == 0.0);
}

TEST_CASE("parameter validation") {
  PhysicalParams p;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.omega_m = 1.0;
  p.kappa = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  FrameRates r{1.0, 0.0, 0.1, 0.0};
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  CHECK_THROWS_AS(preset("nonsense"), std::invalid_argument);
}

TEST_CASE("epsilon warning threshold") {
  CHECK_FALSE(FrameRates{1.0, 1.0, 0.05, 0.0}.epsilon_warning());
  CHECK(FrameRates{1.0, 1.0, 0.1, 0.0}.epsilon_warning());
}

TEST_CASE("quadratic coupling from the frequency curvature") {
  const double gt = 3.0e20, m = 1e-12, w = 2 * M_PI * 140e3;
  CHECK(quadratic_coupling_from_gtilde(gt, m, w) == doctest::Approx(1.054571817e-34 * gt / (2 * m * w)));
}

TEST_CASE("squeezing parameter from dB") {
  CHECK(squeezing_from_dB(0.0) == 0.0);
  CHECK(squeezing_from_dB(10.0) == doctest::Approx(0.5 * std::log(10.0)));
  CHECK(squeezing_from_dB(4.7) == doctest::Approx(0.54).epsilon(0.01 / 0.54));
}

TEST_CASE("presets are listed") {
  const auto names = preset_names();
  REQUIRE(names.size() == 2);
  for (const auto& n : names) CHECK_NOTHROW(preset(n).validate());
}
