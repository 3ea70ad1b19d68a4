#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "kropina/cr_models.hpp"
#include "kropina/lift.hpp"
#include "kropina/metrics.hpp"

using namespace kropina;
using kropina::testing::make_rng;
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

}  // namespace

TEST_CASE("lift metric block form") {
  const auto s = euclidean(2);
  const auto L = lift_metric(s);
  const Mat gt = L.gtilde(Vec::Zero(2));
  Mat expect(3, 3);
  expect << 0, 1, 0, 1, 1, 0, 0, 0, 1;
  CHECK((gt - expect).cwiseAbs().maxCoeff() == 0.0);
  CHECK(gt.determinant() == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("heisenberg lift is nonsingular despite degenerate g") {
  const auto h = heisenberg_kropina(1);
  const auto L = lift_metric(h);
  const Mat gt = L.gtilde(Vec::Zero(3));
  CHECK(std::abs(gt.determinant()) > 1e-10);

  auto rng = make_rng(31);
  for (int k = 0; k < 100; ++k) {
    const Vec x = random_vec(rng, 3);
    // K = d/dx0 stays null: the (0,0) block is identically zero
    CHECK(L.gtilde(x)(0, 0) == 0.0);
  }
}

TEST_CASE("null initial lift") {
  const auto s = euclidean(3);
  const auto st = null_initial_lift(s, {Vec::Zero(3), Vec::Unit(3, 0)});
  CHECK(st.xi0 == doctest::Approx(-0.5).epsilon(1e-15));

  // the lifted vector is null
  const auto L = lift_metric(s);
  Vec xit(4);
  xit << st.xi0, st.xi;
  const Mat gt = L.gtilde(st.x);
  CHECK(std::abs(xit.dot(gt * xit)) <= 1e-14);

  const auto h = heisenberg_kropina(1);
  const auto reeb = null_initial_lift(h, {Vec::Zero(3), v3(0, 0, 1)});
  CHECK(reeb.xi0 == 0.0);

  CHECK_THROWS_AS(null_initial_lift(h, {Vec::Zero(3), v3(1, 0, 0)}), KernelDirection);
}

TEST_CASE("euclidean lift geodesics are straight lines") {
  const auto s = euclidean(3);
  const auto init = null_initial_lift(s, {Vec::Zero(3), Vec::Unit(3, 0)});
  const auto lift = trace_lift_geodesic(s, init, 1.0);
  REQUIRE(lift.meta.termination == Termination::ReachedEnd);
  const auto& last = lift.samples.back().state;
  CHECK((last.x - Vec::Unit(3, 0)).norm() <= 1e-10);
  CHECK(std::abs(last.x0 - (-0.5)) <= 1e-10);

  const auto proj = project_and_check(s, lift);
  for (const auto& smp : proj.samples) {
    CHECK(std::abs(smp.x[1]) <= 1e-12);
    CHECK(std::abs(smp.x[2]) <= 1e-12);
  }
}

TEST_CASE("conserved momentum and null constraint along lift geodesics") {
  const auto h = heisenberg_kropina(1);
  auto rng = make_rng(32);
  TraceOptions opts;
  opts.rel_tol = 1e-10;
  for (int trial = 0; trial < 10; ++trial) {
    Vec xi = random_vec(rng, 3);
    const Vec x = 0.3 * random_vec(rng, 3);
    const Vec w = h.oneform(x);
    if (std::abs(w.dot(xi)) < 0.2 * w.norm() * xi.norm()) {
      xi += w;  // push away from the kernel
    }
    const auto init = null_initial_lift(h, {x, xi});
    const auto lift = trace_lift_geodesic(h, init, 1.0, opts);
    REQUIRE(lift.meta.termination == Termination::ReachedEnd);
    const double p0 = lift.samples.front().p0;
    for (const auto& smp : lift.samples) {
      CHECK(std::abs(smp.p0 - p0) <= 1e-8);
      CHECK(std::abs(smp.gnorm) <= 1e-8);
    }
  }
}

TEST_CASE("projected lift matches the EL integration") {
  const auto h = heisenberg_kropina(1);
  TraceOptions opts;
  opts.rel_tol = 1e-9;
  const GeodesicState seed{Vec::Zero(3), v3(1, 0, 1)};
  const auto el = trace_geodesic(h, seed, Gauge::OmegaConstant, 1.0, opts);
  const auto lift = trace_lift_geodesic(h, null_initial_lift(h, seed), 1.0, opts);

  const auto times = linspace(0.0, 1.0, 201);
  const auto el_s = resample_dense(el, times);
  const auto pr = project_and_check(h, lift, times);
  double worst = 0;
  for (int i = 0; i < 201; ++i) {
    worst = std::max(worst, (el_s.samples[i].x - pr.samples[i].x).norm());
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("EL and lift routes agree on structures with varying g") {
  // the lift route never touches the singular-system assembly, so agreement
  // here validates the derivative terms of the chart formulas end to end
  auto rng = make_rng(33);
  TraceOptions opts;
  opts.rel_tol = 1e-10;
  opts.abs_tol = 1e-13;
  int used = 0;
  for (int trial = 0; trial < 12 && used < 6; ++trial) {
    const int n = 2 + trial % 3;
    const auto s = kropina::testing::random_structure(rng, n);
    const Vec x = random_vec(rng, n, -0.3, 0.3);
    const Vec xi = kropina::testing::random_transverse_xi(rng, s, x, 0.3);
    Trajectory el;
    LiftTrajectory lift;
    try {
      el = trace_geodesic(s, {x, xi}, Gauge::OmegaConstant, 0.6, opts);
      lift = trace_lift_geodesic(s, null_initial_lift(s, {x, xi}), 0.6, opts);
    } catch (const KropinaError&) {
      continue;
    }
    if (el.meta.termination != Termination::ReachedEnd ||
        lift.meta.termination != Termination::ReachedEnd) {
      continue;
    }
    const auto times = linspace(0.0, 0.6, 121);
    const auto el_s = resample_dense(el, times);
    const auto pr = project_and_check(s, lift, times);
    double worst = 0;
    for (int i = 0; i < 121; ++i) {
      worst = std::max(worst, (el_s.samples[i].x - pr.samples[i].x).norm());
    }
    CHECK(worst <= 1e-6);
    ++used;
  }
  CHECK(used >= 4);
}

TEST_CASE("EL and lift routes agree on the five-dimensional flat model") {
  const auto h2 = heisenberg_kropina(2);
  TraceOptions opts;
  opts.rel_tol = 1e-9;
  Vec x = Vec::Zero(5);
  Vec xi(5);
  xi << 1, 0.2, -0.4, 0.3, 1.0;
  const auto el = trace_geodesic(h2, {x, xi}, Gauge::OmegaConstant, 1.0, opts);
  const auto lift = trace_lift_geodesic(h2, null_initial_lift(h2, {x, xi}), 1.0, opts);
  const auto times = linspace(0.0, 1.0, 101);
  const auto el_s = resample_dense(el, times);
  const auto pr = project_and_check(h2, lift, times);
  double worst = 0;
  for (int i = 0; i < 101; ++i) {
    worst = std::max(worst, (el_s.samples[i].x - pr.samples[i].x).norm());
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("projection is invariant under the x0 starting fiber") {
  const auto h = heisenberg_kropina(1);
  const GeodesicState seed{Vec::Zero(3), v3(1, 0, 1)};
  const auto a = trace_lift_geodesic(h, null_initial_lift(h, seed, 0.0), 1.0);
  const auto b = trace_lift_geodesic(h, null_initial_lift(h, seed, 5.0), 1.0);
  const auto times = linspace(0.0, 1.0, 101);
  const auto pa = project_and_check(h, a, times);
  const auto pb = project_and_check(h, b, times);
  double worst = 0;
  for (int i = 0; i < 101; ++i) {
    worst = std::max(worst, (pa.samples[i].x - pb.samples[i].x).norm());
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("project_and_check rejects kernel-grazing lifts") {
  // a state heading into ker omega: on the euclidean model send xi1 -> 0
  const auto s = euclidean(2);
  LiftTrajectory fake;
  fake.base_dim = 2;
  LiftSample smp;
  smp.t = 0;
  smp.state.x0 = 0;
  smp.state.x = Vec::Zero(2);
  smp.state.xi0 = 0;
  smp.state.xi = Vec::Unit(2, 1) * 1.0;  // omega(xi) = 0
  fake.samples.push_back(smp);
  CHECK_THROWS_AS(project_and_check(s, fake), KernelApproach);
}
