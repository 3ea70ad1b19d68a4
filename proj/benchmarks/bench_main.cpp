#include <benchmark/benchmark.h>

#include <random>

#include "kropina/config.hpp"
#include "kropina/cr_models.hpp"
#include "kropina/euler_lagrange.hpp"
#include "kropina/lift.hpp"

using namespace kropina;

namespace {

KropinaStructure random_structure(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Mat B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = d(rng);
  const Mat G0 = B * B.transpose() + 0.6 * Mat::Identity(n, n);
  Mat S(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) S(i, j) = S(j, i) = d(rng);
  Vec a(n), w0(n), cvec(n), b(n);
  for (int i = 0; i < n; ++i) {
    a[i] = d(rng);
    w0[i] = d(rng);
    cvec[i] = d(rng);
    b[i] = d(rng);
  }
  w0 /= w0.norm();
  const double amp = 0.08;
  return make_structure(
      n,
      [G0, S, a, amp](const Vec& x) { return Mat(G0 + amp * std::sin(a.dot(x)) * S); },
      [w0, b, cvec, amp](const Vec& x) {
        return Vec(w0 + amp * std::cos(b.dot(x)) * cvec);
      },
      [S, a, amp, n](const Vec& x) {
        Tensor3 t(n);
        const double c = amp * std::cos(a.dot(x));
        for (int k = 0; k < n; ++k) t[k] = c * a[k] * S;
        return t;
      },
      [b, cvec, amp, n](const Vec& x) {
        return Mat(-amp * std::sin(b.dot(x)) * (b * cvec.transpose()));
      },
      "bench");
}

void BM_AssembleAndSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto s = random_structure(n, 7);
  const Vec x = Vec::Constant(n, 0.2);
  Vec xi = Vec::Ones(n);
  xi[0] = 2.0;
  for (auto _ : state) {
    const ELSystem sys = assemble_el_system(s, x, xi);
    benchmark::DoNotOptimize(min_norm_acceleration(sys));
  }
}
BENCHMARK(BM_AssembleAndSolve)->Arg(3)->Arg(5)->Arg(7);

void BM_GeodesicRhs(benchmark::State& state) {
  const auto h = heisenberg_kropina(1);
  Vec dx(3), dxi(3);
  const GeodesicState st{Vec::Zero(3), (Vec(3) << 1, 0, 1).finished()};
  for (auto _ : state) {
    geodesic_rhs(h, st, Gauge::OmegaConstant, dx, dxi);
    benchmark::DoNotOptimize(dxi);
  }
}
BENCHMARK(BM_GeodesicRhs);

void BM_LiftRhs(benchmark::State& state) {
  const auto h = heisenberg_kropina(1);
  const auto L = lift_metric(h);
  const LiftState st =
      null_initial_lift(h, {Vec::Zero(3), (Vec(3) << 1, 0, 1).finished()});
  LiftState dst;
  for (auto _ : state) {
    lift_geodesic_rhs(L, st, dst);
    benchmark::DoNotOptimize(dst.xi);
  }
}
BENCHMARK(BM_LiftRhs);

void BM_TraceChainSeed(benchmark::State& state) {
  const auto h = heisenberg_kropina(1);
  TraceOptions opts;
  opts.rel_tol = 1e-9;
  for (auto _ : state) {
    const auto traj = trace_geodesic(h, {Vec::Zero(3), (Vec(3) << 1, 0, 1).finished()},
                                     Gauge::OmegaConstant, 1.0, opts);
    benchmark::DoNotOptimize(traj.samples.back().x);
  }
}
BENCHMARK(BM_TraceChainSeed);

void BM_RescaledMetricEval(benchmark::State& state) {
  const auto bs = resolve_model("burns-shnider:1").structure;
  const Vec x = (Vec(3) << 0.8, 0.3, -0.4).finished();
  for (auto _ : state) {
    benchmark::DoNotOptimize(bs.metric(x));
  }
}
BENCHMARK(BM_RescaledMetricEval);

}  // namespace

BENCHMARK_MAIN();
