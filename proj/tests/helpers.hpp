// shared test fixtures: deterministic random structures and states
#ifndef KROPINA_TESTS_HELPERS_HPP_
#define KROPINA_TESTS_HELPERS_HPP_

#include <random>

#include "kropina/structure.hpp"

namespace kropina::testing {

inline std::mt19937 make_rng(unsigned seed = 0xC0FFEE) { return std::mt19937(seed); }

inline Vec random_vec(std::mt19937& rng, int n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

/// Smooth structure with analytic derivative suppliers: positive definite
/// constant core plus small trigonometric ripples. Valid on |x| <~ 1.5.
inline KropinaStructure random_structure(std::mt19937& rng, int n, double amp = 0.08,
                                         bool closed_omega = false) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Mat B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = d(rng);
  const Mat G0 = B * B.transpose() + 0.6 * Mat::Identity(n, n);

  Mat S(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      S(i, j) = d(rng);
      S(j, i) = S(i, j);
    }
  const Vec a = random_vec(rng, n);
  const double phi = d(rng);

  Vec w0 = random_vec(rng, n);
  w0 *= (1.2 + 0.5 * d(rng)) / w0.norm();
  const Vec b = random_vec(rng, n);
  const Vec cvec = random_vec(rng, n);
  const double psi = d(rng);

  auto metric = [G0, S, a, phi, amp](const Vec& x) {
    return Mat(G0 + amp * std::sin(a.dot(x) + phi) * S);
  };
  auto dmetric = [S, a, phi, amp, n](const Vec& x) {
    Tensor3 t(n);
    const double c = amp * std::cos(a.dot(x) + phi);
    for (int k = 0; k < n; ++k) t[k] = c * a[k] * S;
    return t;
  };

  std::function<Vec(const Vec&)> oneform;
  std::function<Mat(const Vec&)> doneform;
  if (closed_omega) {
    // omega = d(w0 . x + amp sin(b . x + psi)), exactly closed
    oneform = [w0, b, psi, amp](const Vec& x) {
      return Vec(w0 + amp * std::cos(b.dot(x) + psi) * b);
    };
    doneform = [b, psi, amp](const Vec& x) {
      return Mat(-amp * std::sin(b.dot(x) + psi) * (b * b.transpose()));
    };
  } else {
    oneform = [w0, b, cvec, psi, amp](const Vec& x) {
      return Vec(w0 + amp * std::cos(b.dot(x) + psi) * cvec);
    };
    doneform = [b, cvec, psi, amp](const Vec& x) {
      return Mat(-amp * std::sin(b.dot(x) + psi) * (b * cvec.transpose()));
    };
  }
  return make_structure(n, metric, oneform, dmetric, doneform, "random");
}

/// xi with |omega(xi)| >= frac * |omega| |xi| at x.
inline Vec random_transverse_xi(std::mt19937& rng, const KropinaStructure& s,
                                const Vec& x, double frac = 0.2) {
  const Vec w = s.oneform(x);
  for (int tries = 0; tries < 256; ++tries) {
    Vec xi = random_vec(rng, s.dim);
    if (std::abs(w.dot(xi)) >= frac * w.norm() * xi.norm() && xi.norm() > 0.1) {
      return xi;
    }
  }
  // deterministic fallback: along the raised one-form direction
  Vec xi = w / w.norm();
  return xi;
}

}  // namespace kropina::testing

#endif  // KROPINA_TESTS_HELPERS_HPP_
