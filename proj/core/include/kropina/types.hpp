// kropina - basic linear algebra aliases, domain types, and error taxonomy
#ifndef KROPINA_TYPES_HPP_
#define KROPINA_TYPES_HPP_

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kropina {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Third-order array T[k](i,j); used for partial derivatives of metric
/// components (k is the differentiation index) and for Christoffel symbols
/// (k is the upper index).
using Tensor3 = std::vector<Mat>;

/// Chart coordinates of a point; dimension equals the ambient structure's.
struct Point {
  Vec coords;

  Point() = default;
  explicit Point(Vec c) : coords(std::move(c)) {}
  int dim() const { return static_cast<int>(coords.size()); }
};

/// A tangent vector attached to a base point.
struct TangentVector {
  Point base;
  Vec components;

  TangentVector() = default;
  TangentVector(Point b, Vec v) : base(std::move(b)), components(std::move(v)) {}
  int dim() const { return static_cast<int>(components.size()); }
};

/// State (x, xi) of the first-order geodesic system. omega_x(xi) must stay
/// away from zero for the system to be defined.
struct GeodesicState {
  Vec x;
  Vec xi;
};

bool all_finite(const Vec& v);
bool all_finite(const Mat& m);

// ---------------------------------------------------------------------------
// Error taxonomy. Every named failure mode of the engine maps to one type so
// callers can discriminate without string matching.

class KropinaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// F is undefined on ker(omega); raised when |omega(v)| falls under the guard.
class KernelDirection : public KropinaError {
 public:
  using KropinaError::KropinaError;
};

class DegenerateMetric : public KropinaError {
 public:
  using KropinaError::KropinaError;
};

class NonCompactIndicatrix : public KropinaError {
 public:
  using KropinaError::KropinaError;
};

class DegenerateOnKernel : public KropinaError {
 public:
  using KropinaError::KropinaError;
};

/// The deflated solve of A(xi) eta = b(xi) failed its residual bound.
class InconsistentSystem : public KropinaError {
 public:
  using KropinaError::KropinaError;
};

class GaugeSingular : public KropinaError {
 public:
  using KropinaError::KropinaError;
};

/// A projected lift trajectory came too close to ker(omega).
class KernelApproach : public KropinaError {
 public:
  using KropinaError::KropinaError;
};

class OutOfSpan : public KropinaError {
 public:
  using KropinaError::KropinaError;
};

class NotClosed : public KropinaError {
 public:
  using KropinaError::KropinaError;
};

class NullOmega : public KropinaError {
 public:
  using KropinaError::KropinaError;
};

class NotInKernel : public KropinaError {
 public:
  using KropinaError::KropinaError;
};

class InExceptionalSet : public KropinaError {
 public:
  using KropinaError::KropinaError;
};

class SingularPoint : public KropinaError {
 public:
  using KropinaError::KropinaError;
};

class OriginExcluded : public KropinaError {
 public:
  using KropinaError::KropinaError;
};

class NotAdmissible : public KropinaError {
 public:
  using KropinaError::KropinaError;
};

class IOFailure : public KropinaError {
 public:
  using KropinaError::KropinaError;
};

// ---------------------------------------------------------------------------
// Scalar and covector fields with derivative suppliers. Missing suppliers are
// filled in by central differences (see structure.cpp).

struct ScalarField {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;  // may be empty -> finite differences
  std::function<Mat(const Vec&)> hessian;   // may be empty -> finite differences
};

/// Covector field beta with jacobian(x)(k, j) = d_k beta_j.
struct CovectorField {
  std::function<Vec(const Vec&)> value;
  std::function<Mat(const Vec&)> jacobian;  // may be empty -> finite differences
};

/// f(x) = a.x + c with exact derivatives.
ScalarField linear_field(const Vec& a, double c = 0.0);

/// beta = df; closed by construction.
CovectorField exact_form(const ScalarField& f);

}  // namespace kropina

#endif  // KROPINA_TYPES_HPP_
