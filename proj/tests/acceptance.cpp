// Acceptance suite: one line per criterion, exit 0 only if all pass.
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <vector>

#include <Eigen/SVD>

#include "helpers.hpp"
#include "kropina/config.hpp"
#include "kropina/connect.hpp"
#include "kropina/cr_models.hpp"
#include "kropina/equivalence.hpp"
#include "kropina/euler_lagrange.hpp"
#include "kropina/lift.hpp"
#include "kropina/metrics.hpp"

using namespace kropina;
using kropina::testing::random_structure;
using kropina::testing::random_transverse_xi;
using kropina::testing::random_vec;

namespace {

int failures = 0;

void report(int idx, bool ok, const std::string& what) {
  std::printf("%s criterion %2d: %s\n", ok ? "PASS" : "FAIL", idx, what.c_str());
  if (!ok) ++failures;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const auto start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

struct SeedState {
  Vec x, xi;
};

std::vector<SeedState> fermat_seeds(const KropinaStructure& h, int count) {
  std::mt19937 rng(0xFE43A7);
  std::vector<SeedState> seeds;
  while (static_cast<int>(seeds.size()) < count) {
    const Vec x = random_vec(rng, 3, -0.3, 0.3);
    const Vec xi = random_vec(rng, 3, -1.0, 1.0);
    if (std::abs(h.oneform(x).dot(xi)) < 0.2) continue;
    seeds.push_back({x, xi});
  }
  return seeds;
}

// criteria 1 and 2 share the integrations
void criterion_1_2() {
  const auto h = heisenberg_kropina(1);
  const auto seeds = fermat_seeds(h, 20);
  TraceOptions opts;
  opts.rel_tol = 1e-9;
  opts.abs_tol = 1e-12;

  const double t0 = now_seconds();
  double worst_sup = 0.0;
  double worst_p0 = 0.0, worst_null = 0.0;
  bool all_finished = true;
  for (const auto& seed : seeds) {
    const auto el = trace_geodesic(h, {seed.x, seed.xi}, Gauge::OmegaConstant, 1.0, opts);
    const auto lift =
        trace_lift_geodesic(h, null_initial_lift(h, {seed.x, seed.xi}), 1.0, opts);
    if (el.meta.termination != Termination::ReachedEnd ||
        lift.meta.termination != Termination::ReachedEnd) {
      all_finished = false;
      continue;
    }
    const auto times = linspace(0.0, 1.0, 201);
    const auto el_s = resample_dense(el, times);
    const auto pr = project_and_check(h, lift, times);
    for (int i = 0; i < 201; ++i) {
      worst_sup = std::max(worst_sup, (el_s.samples[i].x - pr.samples[i].x).norm());
    }
    const double p0 = lift.samples.front().p0;
    for (const auto& smp : lift.samples) {
      worst_p0 = std::max(worst_p0, std::abs(smp.p0 - p0));
      worst_null = std::max(worst_null, std::abs(smp.gnorm));
    }
  }
  const double elapsed = now_seconds() - t0;

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "fermat oracle: sup|EL - lift| = %.3g (tol 1e-6) over 20 seeds, %.2fs "
                "(budget 5s)",
                worst_sup, elapsed);
  report(1, all_finished && worst_sup <= 1e-6 && elapsed < 5.0, buf);

  std::snprintf(buf, sizeof(buf),
                "conservation: max p0 drift = %.3g, max |gtilde(v,v)| = %.3g (tol 1e-8)",
                worst_p0, worst_null);
  report(2, all_finished && worst_p0 <= 1e-8 && worst_null <= 1e-8, buf);
}

void criterion_3() {
  std::mt19937 rng(0xA11CE);
  bool ok = true;
  double worst_kernel = 0, worst_res = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 4;
    const auto s = random_structure(rng, n);
    const Vec x = random_vec(rng, n, -0.7, 0.7);
    const Vec xi = random_transverse_xi(rng, s, x);
    const auto sys = assemble_el_system(s, x, xi);

    const double kernel_rel = (sys.A * xi).norm() / (sys.A.norm() * xi.norm());
    worst_kernel = std::max(worst_kernel, kernel_rel);
    if (kernel_rel > 1e-12) ok = false;

    Eigen::JacobiSVD<Mat> svd(sys.A);
    const auto& sv = svd.singularValues();
    if (!(sv[n - 1] <= 1e-12 * sv[0]) || (n >= 2 && !(sv[n - 2] > 1e-10 * sv[0]))) {
      ok = false;
    }

    const Vec eta = min_norm_acceleration(sys);
    const double denom = std::max(sys.b.norm(), sys.A.norm() * eta.norm());
    const double res = denom > 0 ? (sys.A * eta - sys.b).norm() / denom : 0.0;
    worst_res = std::max(worst_res, res);
    if (res > 1e-10) ok = false;
  }
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "algebra on 100 random systems: max |A xi|/(|A||xi|) = %.3g (tol 1e-12), "
                "rank defect = 1, max solve residual = %.3g (tol 1e-10)",
                worst_kernel, worst_res);
  report(3, ok, buf);
}

void criterion_4() {
  // g = delta, omega = d(x1 + 0.3 sin x2) on R^2
  const auto closed = make_structure(
      2, [](const Vec&) { return Mat(Mat::Identity(2, 2)); },
      [](const Vec& x) {
        Vec w(2);
        w << 1.0, 0.3 * std::cos(x[1]);
        return w;
      },
      [](const Vec&) { return Tensor3(2, Mat::Zero(2, 2)); },
      [](const Vec& x) {
        Mat dw = Mat::Zero(2, 2);
        dw(1, 1) = -0.3 * std::sin(x[1]);
        return dw;
      },
      "sine-closed");

  auto symbols = [&closed](const Vec& x) { return closed_form_connection(closed, x); };
  std::mt19937 rng(0xC10);
  TraceOptions opts;
  opts.rel_tol = 1e-10;
  opts.abs_tol = 1e-13;
  double worst = 0;
  int used = 0;
  while (used < 10) {
    const Vec x = random_vec(rng, 2, -0.4, 0.4);
    Vec xi = random_transverse_xi(rng, closed, x);
    xi /= xi.norm();
    const auto traj = trace_geodesic(closed, {x, xi}, Gauge::OmegaConstant, 1.0, opts);
    if (traj.meta.termination != Termination::ReachedEnd) continue;
    worst = std::max(worst, pregeodesic_residual(traj, symbols));
    ++used;
  }

  bool refused = false;
  try {
    closed_form_connection(heisenberg_kropina(1), Vec::Zero(3));
  } catch (const NotClosed&) {
    refused = true;
  }
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "closed-omega connection: max pregeodesic residual = %.3g (tol 1e-6) on "
                "10 seeds; contact form refused: %s",
                worst, refused ? "yes" : "no");
  report(4, worst <= 1e-6 && refused, buf);
}

void criterion_5() {
  const auto h = heisenberg_kropina(1);
  std::vector<double> svals;
  for (int k = 0; k <= 12; ++k) svals.push_back(1e-1 * std::pow(10.0, -0.25 * k));
  Vec xi0(3), v(3);
  xi0 << 1, 0, 0;
  v << 0, 0, 1;
  const auto rep = blowup_probe(h, Vec::Zero(3), xi0, v, svals);
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "blow-up exponent = %.4f (target -1.00 +/- 0.05, s in [1e-4, 1e-1])",
                rep.fitted_exponent);
  report(5, std::abs(rep.fitted_exponent + 1.0) <= 0.05, buf);
}

void criterion_6() {
  bool ok = true;
  double worst = 0;
  const auto euclid = resolve_model("euclidean:3").structure;
  const auto hpd = make_positive_definite(heisenberg_kropina(1), Vec::Zero(3));
  for (const auto& s : {euclid, hpd}) {
    const Vec x = Vec::Zero(3);
    const auto vs = sample_indicatrix(s, x, 100);
    if (static_cast<int>(vs.size()) != 100) ok = false;
    for (const Vec& v : vs) {
      worst = std::max(worst, std::abs(eval_F(s, x, v) - 1.0));
    }
    // the zero vector satisfies the sphere equation exactly
    const auto ind = indicatrix_of(s, x);
    const Mat g = s.metric(x);
    const Vec c = ind.center;
    if (std::abs(c.dot(g * c) - ind.radius_sq) != 0.0) ok = false;
  }
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "indicatrix: max |F - 1| = %.3g over 100 samples x 2 models (tol "
                "1e-10); zero vector on sphere exactly",
                worst);
  report(6, ok && worst <= 1e-10, buf);
}

void criterion_7() {
  const CRModelSpec bs{1, burns_shnider_upsilon(1), "burns-shnider:1"};
  std::mt19937 rng(0xB5);
  std::uniform_real_distribution<double> d(-1.5, 1.5);
  double worst = 0;
  int tested = 0;
  while (tested < 50) {
    Vec p(3);
    p << d(rng), d(rng), d(rng);
    const std::complex<double> z(p[0], p[1]);
    const double rho = std::pow(std::pow(std::abs(z), 4.0) + p[2] * p[2], 0.25);
    if (rho < 0.5 || rho > 2.0) continue;
    const double closed = burns_shnider_scalar(1, z, p[2]);
    const double formula = tw_scalar_curvature(bs, p);
    worst = std::max(worst, std::abs(formula - closed));
    ++tested;
  }
  double worst_circle = 0;
  for (double t : {0.5, 1.0, -1.3}) {
    Vec p(3);
    p << 0, 0, t;
    worst_circle = std::max(worst_circle, std::abs(tw_scalar_curvature(bs, p)));
  }
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "burns-shnider curvature: max |formula - closed| = %.3g (tol 1e-6, 50 "
                "pts rho in [0.5,2]); |R(0,t)| = %.3g (tol 1e-8)",
                worst, worst_circle);
  report(7, worst <= 1e-6 && worst_circle <= 1e-8, buf);
}

void criterion_8() {
  const auto h = heisenberg_kropina(1);
  const CovectorField beta = exact_form(linear_field((Vec(3) << 0.1, 0, 0).finished()));
  const auto shifted = projective_shift(h, 2.0, beta);
  std::mt19937 rng(0xE8);
  TraceOptions opts;
  opts.rel_tol = 1e-10;
  double worst = 0;
  int used = 0;
  while (used < 10) {
    const Vec xi = random_transverse_xi(rng, h, Vec::Zero(3), 0.3);
    const auto a = trace_geodesic(h, {Vec::Zero(3), xi}, Gauge::OmegaConstant, 0.8, opts);
    const auto b =
        trace_geodesic(shifted, {Vec::Zero(3), xi}, Gauge::OmegaConstant, 0.8, opts);
    if (a.meta.termination != Termination::ReachedEnd ||
        b.meta.termination != Termination::ReachedEnd) {
      continue;
    }
    worst = std::max(worst, trace_distance(a.positions(), b.positions()));
    ++used;
  }

  // c = -1 reverses traces
  CovectorField zero;
  zero.value = [](const Vec&) { return Vec(Vec::Zero(3)); };
  zero.jacobian = [](const Vec&) { return Mat(Mat::Zero(3, 3)); };
  const auto neg = projective_shift(h, -1.0, zero);
  const auto fwd = trace_geodesic(h, {Vec::Zero(3), (Vec(3) << 1, 0, 1).finished()},
                                  Gauge::OmegaConstant, 1.0, opts);
  const auto back =
      trace_geodesic(neg, {fwd.samples.back().x, Vec(-fwd.samples.back().xi)},
                     Gauge::OmegaConstant, 1.0, opts);
  const auto times = linspace(0.0, 1.0, 201);
  const auto rf = resample_dense(fwd, times);
  const auto rb = resample_dense(back, times);
  double rev_dist = 0;
  for (int i = 0; i < 201; ++i) {
    rev_dist = std::max(rev_dist, (rf.samples[i].x - rb.samples[200 - i].x).norm());
  }

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "projective shift 2F + d(0.1 x1): max trace distance = %.3g (tol 1e-5) "
                "on 10 seeds; c = -1 reversal distance = %.3g",
                worst, rev_dist);
  report(8, worst <= 1e-5 && rev_dist <= 1e-5, buf);
}

void criterion_9() {
  const double t0 = now_seconds();
  ShootingProblem prob;
  prob.structure = heisenberg_kropina(1);
  prob.p = Vec::Zero(3);
  prob.q = (Vec(3) << 0.1, 0.05, 0.02).finished();
  prob.endpoint_tol = 1e-6;
  ConnectResult res;
  bool threw = false;
  try {
    res = connect_points(prob);
  } catch (const KropinaError&) {
    threw = true;
  }
  const double elapsed = now_seconds() - t0;
  const bool omega_pos = res.found && res.min_omega > 0;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "connectivity p=0 -> q=(0.1,0.05,0.02): found=%s residual=%.3g (tol "
                "1e-6), min omega=%.3g > 0, %.1fs (budget 30s)",
                res.found ? "yes" : "no", res.found ? res.residual : -1.0,
                res.found ? res.min_omega : -1.0, elapsed);
  report(9, !threw && res.found && res.residual <= 1e-6 && omega_pos && elapsed < 30.0,
         buf);
}

void criterion_10() {
  const auto h = heisenberg_kropina(1);
  const int n = 3;
  OdeRhs rhs = [&h, n](double, const Vec& y, Vec& dy) {
    GeodesicState st{y.head(n), y.segment(n, n)};
    Vec dx(n), dxi(n);
    geodesic_rhs(h, st, Gauge::OmegaConstant, dx, dxi);
    dy.resize(2 * n);
    dy << dx, dxi;
  };
  Vec y0(6);
  y0 << Vec::Zero(3), (Vec(3) << 1, 0, 1).finished();
  OdeOptions tight;
  tight.rel_tol = 1e-13;
  tight.abs_tol = 1e-14;
  const Vec ref = integrate_adaptive(rhs, y0, 0, 1, tight).y.back();

  // fixed-step classical RK4 against the adaptive reference
  auto rk4 = [&rhs](Vec y, int steps) {
    const double h = 1.0 / steps;
    Vec k1(6), k2(6), k3(6), k4(6);
    double t = 0;
    for (int i = 0; i < steps; ++i) {
      rhs(t, y, k1);
      rhs(t + h / 2, Vec(y + h / 2 * k1), k2);
      rhs(t + h / 2, Vec(y + h / 2 * k2), k3);
      rhs(t + h, Vec(y + h * k3), k4);
      y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      t += h;
    }
    return y;
  };
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int steps : {16, 32, 64, 128, 256}) {  // four halvings of h
    const double err = (rk4(y0, steps) - ref).norm();
    const double lx = std::log(1.0 / steps), ly = std::log(err);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "integrator order: self-convergence slope = %.3f (>= 3.9) across four "
                "step halvings on the chain seed",
                slope);
  report(10, slope >= 3.9, buf);
}

void criterion_11() {
  const auto h = heisenberg_kropina(1);
  TraceOptions opts;
  opts.rel_tol = 1e-10;
  const auto traj = trace_geodesic(h, {Vec::Zero(3), (Vec(3) << 0, 0, 1).finished()},
                                   Gauge::OmegaConstant, 1.0, opts);
  double worst = 0;
  for (const auto& smp : traj.samples) {
    worst = std::max(worst, std::hypot(smp.x[0], smp.x[1]));
  }
  const bool reached = traj.meta.termination == Termination::ReachedEnd;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "reeb orbit: max distance from the t-axis = %.3g (tol 1e-9) over [0,1]",
                worst);
  report(11, reached && worst <= 1e-9, buf);
}

}  // namespace

int main() {
  now_seconds();  // start the clock
  criterion_1_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  if (failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", failures);
  return 1;
}
