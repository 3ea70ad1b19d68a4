#include "kropina/structure.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <utility>

namespace kropina {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double fd_step(const Vec& x) {
  return std::cbrt(kEps) * std::max(1.0, x.norm());
}

}  // namespace

bool all_finite(const Vec& v) { return v.allFinite(); }
bool all_finite(const Mat& m) { return m.allFinite(); }

ScalarField linear_field(const Vec& a, double c) {
  const int n = static_cast<int>(a.size());
  ScalarField f;
  f.value = [a, c](const Vec& x) { return a.dot(x) + c; };
  f.gradient = [a](const Vec&) { return a; };
  f.hessian = [n](const Vec&) { return Mat::Zero(n, n); };
  return f;
}

CovectorField exact_form(const ScalarField& f) {
  ScalarField g = f;
  if (!g.gradient) {
    auto value = g.value;
    g.gradient = [value](const Vec& x) {
      const double h = fd_step(x);
      Vec out(x.size());
      for (int k = 0; k < x.size(); ++k) {
        Vec xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        out[k] = (value(xp) - value(xm)) / (2 * h);
      }
      return out;
    };
  }
  if (!g.hessian) {
    auto grad = g.gradient;
    g.hessian = [grad](const Vec& x) {
      const double h = fd_step(x);
      Mat out(x.size(), x.size());
      for (int k = 0; k < x.size(); ++k) {
        Vec xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        out.row(k) = ((grad(xp) - grad(xm)) / (2 * h)).transpose();
      }
      // exact hessians are symmetric; symmetrize the FD estimate
      return Mat(0.5 * (out + out.transpose()));
    };
  }
  CovectorField beta;
  beta.value = g.gradient;
  beta.jacobian = g.hessian;
  return beta;
}

KropinaStructure make_structure(int dim,
                                std::function<Mat(const Vec&)> metric,
                                std::function<Vec(const Vec&)> oneform,
                                std::function<Tensor3(const Vec&)> dmetric,
                                std::function<Mat(const Vec&)> doneform,
                                std::string label) {
  KropinaStructure s;
  s.dim = dim;
  s.metric = std::move(metric);
  s.oneform = std::move(oneform);
  s.label = std::move(label);
  s.derivative_mode =
      (dmetric && doneform) ? DerivativeMode::Analytic : DerivativeMode::FiniteDifference;
  if (dmetric) {
    s.dmetric = std::move(dmetric);
  } else {
    auto g = s.metric;
    s.dmetric = [g, dim](const Vec& x) {
      const double h = fd_step(x);
      Tensor3 out(dim);
      for (int k = 0; k < dim; ++k) {
        Vec xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        out[k] = (g(xp) - g(xm)) / (2 * h);
      }
      return out;
    };
  }
  if (doneform) {
    s.doneform = std::move(doneform);
  } else {
    auto w = s.oneform;
    s.doneform = [w, dim](const Vec& x) {
      const double h = fd_step(x);
      Mat out(dim, dim);
      for (int k = 0; k < dim; ++k) {
        Vec xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        out.row(k) = ((w(xp) - w(xm)) / (2 * h)).transpose();
      }
      return out;
    };
  }
  return s;
}

double omega_guard(const KropinaStructure& s, const Vec& x, const Vec& v) {
  return 1e-12 * s.oneform(x).norm() * v.norm();
}

double eval_F(const KropinaStructure& s, const Vec& x, const Vec& v) {
  const Vec w = s.oneform(x);
  const double u = w.dot(v);
  if (std::abs(u) < 1e-12 * w.norm() * v.norm()) {
    throw KernelDirection("eval_F: omega(v) below kernel guard");
  }
  const Mat g = s.metric(x);
  return v.dot(g * v) / u;
}

Indicatrix indicatrix_of(const KropinaStructure& s, const Vec& x) {
  const Mat g = s.metric(x);
  Eigen::FullPivLU<Mat> lu(g);
  if (!lu.isInvertible()) {
    throw DegenerateMetric("indicatrix_of: g singular at the requested point");
  }
  const Vec w = s.oneform(x);
  Indicatrix ind;
  ind.base = x;
  ind.center = 0.5 * lu.solve(w);
  ind.radius_sq = ind.center.dot(g * ind.center);
  return ind;
}

namespace {

// Quasi-uniform directions on the Euclidean unit sphere S^{n-1}: golden-angle
// spiral for n = 3, golden-ratio lattice mapped through a normal quantile for
// other n. Deterministic.
Vec unit_direction(int idx, int total, int n) {
  if (n == 1) return Vec::Constant(1, idx % 2 == 0 ? 1.0 : -1.0);
  if (n == 2) {
    const double phi = 2.0 * std::numbers::pi * idx / total;
    Vec u(2);
    u << std::cos(phi), std::sin(phi);
    return u;
  }
  if (n == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    const double z = 1.0 - 2.0 * (idx + 0.5) / total;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * idx;
    Vec u(3);
    u << r * std::cos(phi), r * std::sin(phi), z;
    return u;
  }
  // higher dimensions: deterministic normalized Gaussians, seeded per index
  std::mt19937_64 rng(0x9E3779B97F4A7C15ull ^ (static_cast<std::uint64_t>(idx) << 1));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec u(n);
  double nrm = 0;
  do {
    for (int j = 0; j < n; ++j) u[j] = gauss(rng);
    nrm = u.norm();
  } while (nrm < 1e-6);
  return Vec(u / nrm);
}

}  // namespace

std::vector<Vec> sample_indicatrix(const KropinaStructure& s, const Vec& x,
                                   int m, double delta_cap) {
  if (m == 0) return {};
  const Mat g = s.metric(x);
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) {
    // distinguish singular from indefinite for the error report
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo < -1e-12 * std::abs(hi)) {
      throw NonCompactIndicatrix("sample_indicatrix: g indefinite, indicatrix not compact");
    }
    throw DegenerateMetric("sample_indicatrix: g not positive definite");
  }
  const Indicatrix ind = indicatrix_of(s, x);
  const double r = std::sqrt(ind.radius_sq);
  if (delta_cap < 0) delta_cap = 0.05 * 4.0 * ind.radius_sq;
  const Mat L = llt.matrixL();
  const auto Lt = L.transpose();
  const Vec w = s.oneform(x);

  std::vector<Vec> out;
  out.reserve(m);
  // Sweep the whole sphere and keep what clears the cap; double the sweep
  // density until m samples survive.
  for (int total = std::max(m, 8); total < (1 << 24); total *= 2) {
    out.clear();
    for (int idx = 0; idx < total && static_cast<int>(out.size()) < m; ++idx) {
      const Vec u = unit_direction(idx, total, s.dim);
      const Vec v = ind.center + Lt.triangularView<Eigen::Upper>().solve(r * u);
      if (w.dot(v) < delta_cap) continue;
      out.push_back(v);
    }
    if (static_cast<int>(out.size()) == m) return out;
  }
  throw KropinaError("sample_indicatrix: omega cap excludes the requested sample count");
}

KernelNondegeneracyReport check_nondegenerate_on_kernel(const KropinaStructure& s,
                                                        const Vec& x) {
  const int n = s.dim;
  Mat bordered = Mat::Zero(n + 1, n + 1);
  bordered.block(1, 1, n, n) = s.metric(x);
  const Vec w = s.oneform(x);
  bordered.block(0, 1, 1, n) = w.transpose();
  bordered.block(1, 0, n, 1) = w;
  KernelNondegeneracyReport rep;
  rep.bordered_det = bordered.determinant();
  const double scale = bordered.norm() / std::sqrt(static_cast<double>(n + 1));
  const double eps_det = 1e-10 * std::pow(scale, n + 1);
  rep.ok = std::abs(rep.bordered_det) > eps_det;
  return rep;
}

KropinaStructure modify_metric(const KropinaStructure& s, const ScalarField& f) {
  const CovectorField df = exact_form(f);
  auto g = s.metric;
  auto w = s.oneform;
  auto dg = s.dmetric;
  auto dw = s.doneform;
  auto grad = df.value;
  auto hess = df.jacobian;
  const int n = s.dim;

  KropinaStructure out;
  out.dim = n;
  out.derivative_mode = s.derivative_mode;
  out.label = s.label.empty() ? "modified" : s.label + "+df";
  out.metric = [g, w, grad](const Vec& x) {
    const Vec omega = w(x);
    const Vec d = grad(x);
    return Mat(g(x) + 0.5 * (omega * d.transpose() + d * omega.transpose()));
  };
  out.oneform = w;
  out.doneform = dw;
  out.dmetric = [dg, dw, w, grad, hess, n](const Vec& x) {
    Tensor3 t = dg(x);
    const Vec omega = w(x);
    const Vec d = grad(x);
    const Mat dwx = dw(x);   // (k, j) = d_k omega_j
    const Mat h = hess(x);   // (k, j) = d_k d_j f
    for (int k = 0; k < n; ++k) {
      const Vec dwk = dwx.row(k).transpose();
      const Vec hk = h.row(k).transpose();
      t[k] += 0.5 * (dwk * d.transpose() + d * dwk.transpose() +
                     omega * hk.transpose() + hk * omega.transpose());
    }
    return t;
  };
  return out;
}

KropinaStructure make_positive_definite(const KropinaStructure& s, const Vec& center) {
  const Mat g = s.metric(center);
  const Vec w = s.oneform(center);
  // ker df = ker omega(center): take df = c * omega(center). Scale c so the
  // new tt-block is comparable to the existing Levi part.
  const double gscale = std::max(g.cwiseAbs().maxCoeff(), 1e-8);
  const double wsq = w.squaredNorm();
  if (wsq == 0) throw KernelDirection("make_positive_definite: omega vanishes at center");
  const double c = gscale / wsq;
  ScalarField f = linear_field(c * w, 0.0);
  KropinaStructure out = modify_metric(s, f);
  out.label = s.label.empty() ? "pd" : s.label + "+pd";
  Eigen::LLT<Mat> llt(out.metric(center));
  if (llt.info() != Eigen::Success) {
    throw DegenerateOnKernel(
        "make_positive_definite: g + omega*df not positive definite at center; "
        "g restricted to ker omega is probably not positive definite");
  }
  return out;
}

KropinaStructure backward_structure(const KropinaStructure& s) {
  KropinaStructure out = s;
  auto w = s.oneform;
  auto dw = s.doneform;
  out.oneform = [w](const Vec& x) { return Vec(-w(x)); };
  out.doneform = [dw](const Vec& x) { return Mat(-dw(x)); };
  out.label = s.label.empty() ? "backward" : s.label + ":backward";
  return out;
}

bool metric_symmetric_at(const KropinaStructure& s, const Vec& x) {
  const Mat g = s.metric(x);
  const double asym = (g - g.transpose()).cwiseAbs().maxCoeff();
  return asym <= 1e-12 * std::max(1e-300, g.cwiseAbs().maxCoeff());
}

}  // namespace kropina
