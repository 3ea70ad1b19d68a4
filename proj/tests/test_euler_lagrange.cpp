#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>

#include "helpers.hpp"
#include "kropina/cr_models.hpp"
#include "kropina/euler_lagrange.hpp"
#include "kropina/metrics.hpp"

using namespace kropina;
using kropina::testing::make_rng;
using kropina::testing::random_structure;
using kropina::testing::random_transverse_xi;
using kropina::testing::random_vec;

namespace {

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

KropinaStructure euclidean(int n) {
  return make_structure(
      n, [n](const Vec&) { return Mat(Mat::Identity(n, n)); },
      [n](const Vec&) { return Vec(Vec::Unit(n, 0)); },
      [n](const Vec&) { return Tensor3(n, Mat::Zero(n, n)); },
      [n](const Vec&) { return Mat(Mat::Zero(n, n)); }, "euclidean");
}

// structure frozen at the normal-coordinate pullback of s at p: constant g(p),
// vanishing dg, and d omega replaced by the covariant derivative.
KropinaStructure normal_pullback(const KropinaStructure& s, const Vec& p) {
  const int n = s.dim;
  const Mat g = s.metric(p);
  const Vec w = s.oneform(p);
  const Tensor3 gamma = levi_civita_symbols(s, p);
  const Mat dw = s.doneform(p);
  Mat nabla_w(n, n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      double v = dw(k, j);
      for (int l = 0; l < n; ++l) v -= gamma[l](k, j) * w[l];
      nabla_w(k, j) = v;
    }
  }
  return make_structure(
      n, [g](const Vec&) { return g; }, [w](const Vec&) { return w; },
      [n](const Vec&) { return Tensor3(n, Mat::Zero(n, n)); },
      [nabla_w](const Vec&) { return nabla_w; }, "normal-pullback");
}

}  // namespace

TEST_CASE("christoffel symbols of a constant metric vanish") {
  auto rng = make_rng(21);
  const auto s = euclidean(4);
  const Tensor3 gamma = levi_civita_symbols(s, random_vec(rng, 4));
  for (const Mat& m : gamma) CHECK(m.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("christoffel symbols of diag(e^{2x}, 1)") {
  auto s = euclidean(2);
  s.metric = [](const Vec& x) {
    Mat g = Mat::Identity(2, 2);
    g(0, 0) = std::exp(2 * x[0]);
    return g;
  };
  s.dmetric = [](const Vec& x) {
    Tensor3 t(2, Mat::Zero(2, 2));
    t[0](0, 0) = 2 * std::exp(2 * x[0]);
    return t;
  };
  const Vec p = v3(0.3, -0.7, 0).head(2);
  const Tensor3 gamma = levi_civita_symbols(s, p);
  CHECK(gamma[0](0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(gamma[1](0, 0)) <= 1e-14);
  CHECK(std::abs(gamma[0](0, 1)) <= 1e-14);
  CHECK(std::abs(gamma[0](1, 1)) <= 1e-14);
  CHECK(std::abs(gamma[1](1, 1)) <= 1e-14);
}

TEST_CASE("christoffel symmetry on random structures") {
  auto rng = make_rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 4;
    const auto s = random_structure(rng, n);
    const Tensor3 gamma = levi_civita_symbols(s, random_vec(rng, n, -0.7, 0.7));
    for (const Mat& m : gamma) {
      CHECK((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("levi_civita_symbols rejects degenerate g") {
  CHECK_THROWS_AS(levi_civita_symbols(heisenberg_kropina(1), Vec::Zero(3)),
                  DegenerateMetric);
}

TEST_CASE("EL system of the flat euclidean structure") {
  const auto s = euclidean(3);
  const auto sys = assemble_el_system(s, Vec::Zero(3), Vec::Unit(3, 0));
  Mat expect = Mat::Identity(3, 3);
  expect(0, 0) = 0;
  CHECK((sys.A - expect).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(sys.b.norm() <= 1e-15);
  CHECK(min_norm_acceleration(sys).norm() <= 1e-15);
}

TEST_CASE("EL system on the Reeb direction of the Heisenberg model") {
  const auto h = heisenberg_kropina(1);
  const auto sys = assemble_el_system(h, Vec::Zero(3), v3(0, 0, 1));
  CHECK(sys.b.norm() <= 1e-15);
  CHECK(min_norm_acceleration(sys).norm() <= 1e-15);
  Vec dx(3), dxi(3);
  geodesic_rhs(h, {Vec::Zero(3), v3(0, 0, 1)}, Gauge::OmegaConstant, dx, dxi);
  CHECK((dx - v3(0, 0, 1)).norm() == 0.0);
  CHECK(dxi.norm() <= 1e-15);
}

TEST_CASE("A annihilates xi, rank is n-1, solve residual is tight") {
  auto rng = make_rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 4;
    const auto s = random_structure(rng, n);
    const Vec x = random_vec(rng, n, -0.7, 0.7);
    const Vec xi = random_transverse_xi(rng, s, x);
    const auto sys = assemble_el_system(s, x, xi);

    CHECK((sys.A * xi).norm() <= 1e-12 * sys.A.norm() * xi.norm());

    Eigen::JacobiSVD<Mat> svd(sys.A);
    const auto& sv = svd.singularValues();
    CHECK(sv[n - 1] <= 1e-12 * sv[0]);
    if (n >= 2) CHECK(sv[n - 2] > 1e-10 * sv[0]);

    const Vec eta = min_norm_acceleration(sys);
    const double res = (sys.A * eta - sys.b).norm();
    CHECK(res <= 1e-10 * std::max(sys.b.norm(), sys.A.norm() * eta.norm()) + 1e-13);

    // kernel shift: eta + xi still solves
    CHECK((sys.A * (eta + xi) - sys.b).norm() <=
          1e-10 * std::max(sys.b.norm(), sys.A.norm() * (eta + xi).norm()) + 1e-13);
  }
}

TEST_CASE("auxiliary inner product changes the optimal solution along xi only") {
  auto rng = make_rng(24);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3;
    const auto s = random_structure(rng, n);
    const Vec x = random_vec(rng, n, -0.7, 0.7);
    const Vec xi = random_transverse_xi(rng, s, x);
    const auto sys = assemble_el_system(s, x, xi);
    const Vec eta = min_norm_acceleration(sys);

    // min-norm under a random positive definite gring: project along xi
    Mat B(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) B(i, j) = random_vec(rng, 1)[0];
    const Mat gring = B * B.transpose() + 0.4 * Mat::Identity(n, n);
    const Vec eta_ring = eta - (xi.dot(gring * eta) / xi.dot(gring * xi)) * xi;

    CHECK((sys.A * eta_ring - sys.b).norm() <=
          1e-9 * std::max(1.0, sys.A.norm() * eta_ring.norm()));
    // the difference is parallel to xi
    const Vec d = eta_ring - eta;
    if (d.norm() > 1e-13) {
      const double cosang = std::abs(d.dot(xi)) / (d.norm() * xi.norm());
      CHECK(cosang == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("normal-coordinate forms reproduce the chart assembly") {
  auto rng = make_rng(25);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 4;
    const auto s = random_structure(rng, n);
    const Vec p = random_vec(rng, n, -0.6, 0.6);
    const auto sN = normal_pullback(s, p);
    const Vec xi = random_transverse_xi(rng, sN, Vec::Zero(n));

    const auto sys = assemble_el_system(sN, Vec::Zero(n), xi);
    const Mat g = sN.metric(Vec::Zero(n));
    const Mat ginv = g.inverse();
    const Vec w = sN.oneform(Vec::Zero(n));
    const Mat D = sN.doneform(Vec::Zero(n));  // here: nabla omega at p
    const double u = w.dot(xi);
    const double q = xi.dot(g * xi);
    const Vec w_up = ginv * w;
    const double wsq = w.dot(w_up);

    // endomorphism A eta = eta - omega(eta)/omega(xi) xi - g(xi,eta)/omega(xi) w_up
    //                    + |xi|^2 omega(eta)/omega(xi)^2 w_up
    const Mat A_endo = Mat::Identity(n, n) - (xi * w.transpose()) / u -
                       (w_up * (g * xi).transpose()) / u +
                       (q / (u * u)) * (w_up * w.transpose());
    CHECK((ginv * sys.A - A_endo).cwiseAbs().maxCoeff() <=
          1e-8 * std::max(1.0, A_endo.cwiseAbs().maxCoeff()));

    // b = (nabla omega)(xi,xi)/u xi + |xi|^2/u (d omega)_g xi
    //     - |xi|^2 (nabla omega)(xi,xi)/u^2 w_up
    const double nw = xi.dot(D * xi);
    const Vec dw_g = 0.5 * (ginv * ((D.transpose() - D) * xi));
    const Vec b_vec = (nw / u) * xi + (q / u) * dw_g - (q * nw / (u * u)) * w_up;
    CHECK((ginv * sys.b - b_vec).cwiseAbs().maxCoeff() <=
          1e-8 * std::max(1.0, b_vec.cwiseAbs().maxCoeff()));

    // optimal solution in closed form (coordinate gring = identity)
    auto proj = [&](const Vec& v) { return Vec(v - (w.dot(v) / wsq) * w_up); };
    const Vec pdw = proj(dw_g);
    const Vec t1 = (q / u) * (pdw - (xi.dot(pdw) / xi.squaredNorm()) * xi);
    const Vec t2 = (nw / wsq) * (w_up - (xi.dot(w_up) / xi.squaredNorm()) * xi);
    const Vec eta_closed = t1 - t2;
    const Vec eta = min_norm_acceleration(sys);
    CHECK((eta - eta_closed).norm() <= 1e-8 * std::max(1.0, eta_closed.norm()));
  }
}

TEST_CASE("gauge_fix solves the stated scalar conditions") {
  const auto s = euclidean(3);
  const Vec eta0 = Vec::Zero(3);
  const Vec fixed =
      gauge_fix(s, Vec::Zero(3), Vec::Unit(3, 0), eta0, Gauge::OmegaConstant);
  CHECK(fixed.norm() == 0.0);

  auto rng = make_rng(26);
  const auto h = heisenberg_kropina(1);
  for (int k = 0; k < 20; ++k) {
    const Vec x = random_vec(rng, 3, -0.5, 0.5);
    const Vec xi = random_transverse_xi(rng, h, x);
    const auto sys = assemble_el_system(h, x, xi);
    const Vec eta = min_norm_acceleration(sys);
    const Vec w = h.oneform(x);
    const Mat dw = h.doneform(x);

    const Vec eo = gauge_fix(h, x, xi, eta, Gauge::OmegaConstant);
    CHECK(std::abs(w.dot(eo) + xi.dot(dw * xi)) <= 1e-10);
    // still a solution
    CHECK((sys.A * eo - sys.b).norm() <=
          1e-9 * std::max(1.0, sys.A.norm() * eo.norm()));
  }
}

TEST_CASE("assemble_el_system guards the kernel") {
  const auto h = heisenberg_kropina(1);
  CHECK_THROWS_AS(assemble_el_system(h, Vec::Zero(3), v3(1, 0, 0)), KernelDirection);
}

TEST_CASE("a tampered right-hand side is rejected as inconsistent") {
  auto rng = make_rng(27);
  const auto s = random_structure(rng, 3);
  const Vec x = random_vec(rng, 3, -0.5, 0.5);
  const Vec xi = random_transverse_xi(rng, s, x);
  ELSystem sys = assemble_el_system(s, x, xi);
  // push b out of range(A) = xi-perp
  sys.b += xi * (1.0 + sys.b.norm());
  CHECK_THROWS_AS(min_norm_acceleration(sys), InconsistentSystem);
}

TEST_CASE("gauge_fix FArclength requires positive g(xi, xi)") {
  const auto h = heisenberg_kropina(1);
  CHECK_THROWS_AS(
      gauge_fix(h, Vec::Zero(3), v3(0, 0, 1), Vec::Zero(3), Gauge::FArclength),
      GaugeSingular);
}

TEST_CASE("trace uniqueness under velocity rescaling") {
  // gamma_{2 xi}(t) = gamma_xi(2t); compare pointwise through dense output
  const auto h = heisenberg_kropina(1);
  TraceOptions opts;
  opts.rel_tol = 1e-10;
  opts.abs_tol = 1e-13;
  const auto a = trace_geodesic(h, {Vec::Zero(3), v3(1, 0, 1)}, Gauge::OmegaConstant,
                                1.0, opts);
  const auto b = trace_geodesic(h, {Vec::Zero(3), v3(2, 0, 2)}, Gauge::OmegaConstant,
                                0.5, opts);
  const auto times_b = linspace(0.0, 0.5, 101);
  std::vector<double> times_a(times_b);
  for (double& t : times_a) t *= 2.0;
  const auto ra = resample_dense(a, times_a);
  const auto rb = resample_dense(b, times_b);
  double worst = 0;
  for (int i = 0; i < 101; ++i) {
    worst = std::max(worst, (ra.samples[i].x - rb.samples[i].x).norm());
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("backward structure integrates the reversed trace") {
  // bwd(t) = fwd(1 - t) exactly; compare pointwise through dense output
  const auto h = heisenberg_kropina(1);
  const auto hb = backward_structure(h);
  TraceOptions opts;
  opts.rel_tol = 1e-10;
  opts.abs_tol = 1e-13;
  const auto fwd =
      trace_geodesic(h, {Vec::Zero(3), v3(1, 0, 1)}, Gauge::OmegaConstant, 1.0, opts);
  const auto bwd = trace_geodesic(hb, {fwd.samples.back().x, Vec(-fwd.samples.back().xi)},
                                  Gauge::OmegaConstant, 1.0, opts);
  const auto times = linspace(0.0, 1.0, 101);
  const auto rf = resample_dense(fwd, times);
  const auto rb = resample_dense(bwd, times);
  double worst = 0;
  for (int i = 0; i < 101; ++i) {
    worst = std::max(worst, (rf.samples[i].x - rb.samples[100 - i].x).norm());
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("modify_metric leaves unparameterized geodesics unchanged") {
  const auto h = heisenberg_kropina(1);
  const auto hp = modify_metric(h, linear_field(v3(0.2, -0.1, 1.0)));
  TraceOptions opts;
  opts.rel_tol = 1e-10;
  const GeodesicState seed{Vec::Zero(3), v3(1, 0, 1)};
  const auto a = trace_geodesic(h, seed, Gauge::OmegaConstant, 1.0, opts);
  const auto b = trace_geodesic(hp, seed, Gauge::OmegaConstant, 1.0, opts);
  CHECK(trace_distance(a.positions(), b.positions()) <= 1e-5);
}
