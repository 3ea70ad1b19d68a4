#include "kropina/equivalence.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>

namespace kropina {

Tensor3 closed_form_connection(const KropinaStructure& s, const Vec& x) {
  const int n = s.dim;
  const Mat dw = s.doneform(x);
  const double closedness = (dw - dw.transpose()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, dw.cwiseAbs().maxCoeff());
  if (closedness > 1e-8 * scale) {
    throw NotClosed("closed_form_connection: d omega != 0 at the requested point");
  }
  const Mat g = s.metric(x);
  Eigen::FullPivLU<Mat> lu(g);
  if (!lu.isInvertible()) {
    throw DegenerateMetric("closed_form_connection: g singular");
  }
  const Vec w = s.oneform(x);
  const Vec w_up = lu.solve(w);       // omega^k
  const double wsq = w.dot(w_up);     // |omega|_g^2
  if (std::abs(wsq) < 1e-14 * w.norm() * w_up.norm()) {
    throw NullOmega("closed_form_connection: |omega|_g^2 = 0");
  }

  Tensor3 gamma = levi_civita_symbols(s, x);
  // nabla_i omega_j = d_i omega_j - Gamma_ij^l omega_l
  Mat nw(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double v = dw(i, j);
      for (int l = 0; l < n; ++l) v -= gamma[l](i, j) * w[l];
      nw(i, j) = v;
    }
  }
  for (int k = 0; k < n; ++k) {
    gamma[k] += (w_up[k] / wsq) * nw;
  }
  return gamma;
}

double pregeodesic_residual(const Trajectory& traj,
                            const std::function<Tensor3(const Vec&)>& symbols_at) {
  if (!traj.dense) {
    throw OutOfSpan("pregeodesic_residual: trajectory lacks dense data");
  }
  const int n = static_cast<int>(traj.samples.front().x.size());
  double worst = 0.0;
  // knot derivatives are exact rhs evaluations; their xi-part is xdotdot
  for (int k = 0; k < traj.dense->step_count(); ++k) {
    const auto& st = traj.dense->step(k);
    const Vec x = st.r1.head(n);
    const Vec xd = st.r1.segment(n, n);
    const Vec xdd = st.f0.segment(n, n);
    const Tensor3 gamma = symbols_at(x);
    Vec r(n);
    for (int kk = 0; kk < n; ++kk) r[kk] = xdd[kk] + xd.dot(gamma[kk] * xd);
    const double xd2 = xd.squaredNorm();
    if (xd2 > 0) r -= (r.dot(xd) / xd2) * xd;
    worst = std::max(worst, r.norm());
  }
  return worst;
}

KropinaStructure projective_shift(const KropinaStructure& s, double c,
                                  const CovectorField& beta,
                                  const std::vector<Vec>& probe_points) {
  if (c == 0) {
    throw KropinaError("projective_shift: c must be nonzero");
  }
  CovectorField b = beta;
  if (!b.jacobian) {
    auto val = b.value;
    b.jacobian = [val](const Vec& x) {
      const double h = std::cbrt(std::numeric_limits<double>::epsilon()) *
                       std::max(1.0, x.norm());
      Mat out(x.size(), x.size());
      for (int k = 0; k < x.size(); ++k) {
        Vec xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        out.row(k) = ((val(xp) - val(xm)) / (2 * h)).transpose();
      }
      return out;
    };
  }
  std::vector<Vec> probes = probe_points;
  if (probes.empty()) probes.push_back(Vec::Zero(s.dim));
  for (const Vec& p : probes) {
    const Mat j = b.jacobian(p);
    const double skew = (j - j.transpose()).cwiseAbs().maxCoeff();
    if (skew > 1e-8 * std::max(1.0, j.cwiseAbs().maxCoeff())) {
      throw NotClosed("projective_shift: beta is not closed at a probe point");
    }
  }

  auto g = s.metric;
  auto dg = s.dmetric;
  auto w = s.oneform;
  auto dw = s.doneform;
  auto bval = b.value;
  auto bjac = b.jacobian;
  const int n = s.dim;

  KropinaStructure out;
  out.dim = n;
  out.derivative_mode = s.derivative_mode;
  out.label = s.label + ":shift";
  out.oneform = w;
  out.doneform = dw;
  out.metric = [g, w, bval, c](const Vec& x) {
    const Vec om = w(x);
    const Vec bv = bval(x);
    return Mat(c * g(x) + 0.5 * (bv * om.transpose() + om * bv.transpose()));
  };
  out.dmetric = [dg, dw, w, bval, bjac, c, n](const Vec& x) {
    Tensor3 t = dg(x);
    const Vec om = w(x);
    const Vec bv = bval(x);
    const Mat dwx = dw(x);
    const Mat bj = bjac(x);
    for (int k = 0; k < n; ++k) {
      t[k] *= c;
      const Vec dwk = dwx.row(k).transpose();
      const Vec bjk = bj.row(k).transpose();
      t[k] += 0.5 * (bjk * om.transpose() + om * bjk.transpose() +
                     bv * dwk.transpose() + dwk * bv.transpose());
    }
    return t;
  };
  return out;
}

bool in_exceptional_set(const KropinaStructure& s, const Vec& x, const Vec& xi0,
                        double tol) {
  const int n = s.dim;
  const Vec w = s.oneform(x);
  if (xi0.norm() == 0) return true;
  if (std::abs(w.dot(xi0)) > 1e-12 * w.norm() * xi0.norm()) {
    throw NotInKernel("in_exceptional_set: xi0 is not tangent to ker omega");
  }
  const Mat g = s.metric(x);
  const double q = xi0.dot(g * xi0);
  const double gscale = std::max(g.cwiseAbs().maxCoeff(), 1e-300) * xi0.squaredNorm();
  if (std::abs(q) <= tol * gscale) return true;

  // basis of H = ker omega from the Householder complement of omega
  const Mat wmat = w;
  Eigen::HouseholderQR<Mat> qr(wmat);
  const Mat Q = Mat(qr.householderQ()).rightCols(n - 1);
  const Mat dwm = s.doneform(x);
  const Mat C = dwm - dwm.transpose();  // d omega(X, Y) = X^T C Y
  const Vec contraction = Q.transpose() * (C.transpose() * xi0);  // d omega(xi0, h_a)
  const double cscale = std::max(C.cwiseAbs().maxCoeff(), 1e-300) * xi0.norm();
  return contraction.norm() <= tol * cscale;
}

BlowupReport blowup_probe(const KropinaStructure& s, const Vec& x, const Vec& xi0,
                          const Vec& v, const std::vector<double>& s_values) {
  const Vec w = s.oneform(x);
  if (std::abs(w.dot(v) - 1.0) > 1e-10) {
    throw KropinaError("blowup_probe: omega(v) must equal 1");
  }
  if (in_exceptional_set(s, x, xi0)) {
    throw InExceptionalSet("blowup_probe: xi0 lies in the exceptional set");
  }
  BlowupReport rep;
  rep.xi0_in_exceptional_set = false;
  std::vector<double> svals = s_values;
  std::sort(svals.rbegin(), svals.rend());
  for (double sv : svals) {
    const Vec xi = xi0 + sv * v;
    const ELSystem sys = assemble_el_system(s, x, xi);
    const Vec eta = min_norm_acceleration(sys);
    rep.probes.push_back({sv, w.dot(xi), eta.norm()});
  }
  // least-squares slope of log(eta) on log|omega(xi)|
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& p : rep.probes) {
    if (p.eta_norm <= 0 || p.omega_xi == 0) continue;
    const double lx = std::log(std::abs(p.omega_xi));
    const double ly = std::log(p.eta_norm);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  rep.fitted_exponent = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
  return rep;
}

}  // namespace kropina
