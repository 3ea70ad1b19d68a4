// kropina - Kropina structures (g, omega) and pointwise geometry
#ifndef KROPINA_STRUCTURE_HPP_
#define KROPINA_STRUCTURE_HPP_

#include <functional>
#include <string>
#include <vector>

#include "kropina/types.hpp"

namespace kropina {

enum class DerivativeMode { Analytic, FiniteDifference };

/// The pair (g, omega) defining F = g(v,v)/omega(v), with first-derivative
/// suppliers for both fields. Immutable after construction; all evaluators
/// must be pure. g may be degenerate (the Heisenberg model has g(d_t, .) = 0);
/// only operations that invert g demand nonsingularity.
struct KropinaStructure {
  int dim = 0;
  std::function<Mat(const Vec&)> metric;        // x -> symmetric n x n
  std::function<Vec(const Vec&)> oneform;       // x -> omega components
  std::function<Tensor3(const Vec&)> dmetric;   // x -> [k](i,j) = d_k g_ij
  std::function<Mat(const Vec&)> doneform;      // x -> (k,j) = d_k omega_j
  DerivativeMode derivative_mode = DerivativeMode::Analytic;
  std::string label;
};

/// Builds a structure; absent derivative suppliers are replaced by central
/// differences of the value suppliers with step h = cbrt(eps) * max(1, |x|).
KropinaStructure make_structure(int dim,
                                std::function<Mat(const Vec&)> metric,
                                std::function<Vec(const Vec&)> oneform,
                                std::function<Tensor3(const Vec&)> dmetric = {},
                                std::function<Mat(const Vec&)> doneform = {},
                                std::string label = {});

/// Relative guard under which omega(v) counts as a kernel direction.
/// epsilon_omega = 1e-12 * |omega(x)| * |v|.
double omega_guard(const KropinaStructure& s, const Vec& x, const Vec& v);

/// F(x, v) = g_x(v, v) / omega_x(v). Throws KernelDirection when |omega_x(v)|
/// is below the guard.
double eval_F(const KropinaStructure& s, const Vec& x, const Vec& v);

/// The indicatrix {F = 1} at a point: the g-sphere through 0 centered at
/// W = (1/2) g^{-1} omega.
struct Indicatrix {
  Vec base;        // point coordinates
  Vec center;      // W components
  double radius_sq = 0.0;  // g(W, W)
};

/// Requires g_x nonsingular (apply modify_metric first if degenerate).
Indicatrix indicatrix_of(const KropinaStructure& s, const Vec& x);

/// m quasi-uniform samples of the indicatrix sphere with omega(v) >= delta_cap.
/// delta_cap <= 0 selects the default 0.05 * (4 g(W,W)), i.e. 5% of the
/// maximal omega value attained on the sphere. Requires g_x positive definite.
std::vector<Vec> sample_indicatrix(const KropinaStructure& s, const Vec& x,
                                   int m, double delta_cap = -1.0);

struct KernelNondegeneracyReport {
  bool ok = false;
  double bordered_det = 0.0;
};

/// Tests nondegeneracy of g restricted to ker(omega) via the bordered matrix
/// [[0, omega], [omega^T, g]]; scale-free threshold on its determinant.
KernelNondegeneracyReport check_nondegenerate_on_kernel(const KropinaStructure& s,
                                                        const Vec& x);

/// g' = g + sym(omega (x) df). Adds the exact form df to F, leaving
/// unparameterized geodesics unchanged.
KropinaStructure modify_metric(const KropinaStructure& s, const ScalarField& f);

/// Chooses f per modify_metric so that g' is positive definite near the given
/// center (linear form with ker df = ker omega(center)). Throws
/// DegenerateOnKernel when g restricted to ker omega is not positive definite
/// there.
KropinaStructure make_positive_definite(const KropinaStructure& s, const Vec& center);

/// Structure with the same g and reversed one-form (g, -omega); integrating it
/// forward reproduces the reversed traces.
KropinaStructure backward_structure(const KropinaStructure& s);

/// Diagnostic: max |g - g^T| entry, checked against 1e-12 * |g|.
bool metric_symmetric_at(const KropinaStructure& s, const Vec& x);

}  // namespace kropina

#endif  // KROPINA_STRUCTURE_HPP_
