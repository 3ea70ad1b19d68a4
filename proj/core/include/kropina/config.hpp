// kropina - model configuration text, expression-backed structures, catalog
#ifndef KROPINA_CONFIG_HPP_
#define KROPINA_CONFIG_HPP_

#include <optional>
#include <string>
#include <vector>

#include "kropina/cr_models.hpp"
#include "kropina/expr.hpp"
#include "kropina/structure.hpp"

namespace kropina {

class DimensionMismatch : public KropinaError {
 public:
  using KropinaError::KropinaError;
};

/// Parsed model description. Only the upper triangle of g is written in the
/// source text; the matrix is symmetric by construction. Coordinate names
/// default to (x), (x, y), (x, y, t), or (x1..xn, y-free) depending on the
/// dimension when no coords statement is present.
struct ModelConfig {
  int dim = 0;
  std::vector<std::string> coords;
  std::vector<std::vector<ExprPtr>> g;  // dim x dim, symmetric
  std::vector<ExprPtr> omega;
  ExprPtr upsilon;  // optional
  std::string label;
};

/// Statements separated by ';' or newlines; '#' comments. Recognized:
///   dim = 3
///   coords = x, y, t
///   label = some-name
///   g11 = 2          (single-digit 1-based indices, upper triangle only)
///   w = [-2*y, 2*x, 1]
///   upsilon = ...
/// Throws SyntaxError / UnknownSymbol / DimensionMismatch with positions.
ModelConfig parse_model_config(std::string_view text);

/// Canonical text form; parse(pretty_print(c)) reproduces c.
std::string pretty_print(const ModelConfig& c);

/// Structure with analytic derivative suppliers obtained by differentiating
/// the expression trees.
KropinaStructure structure_from_expressions(int dim,
                                            const std::vector<std::vector<ExprPtr>>& g,
                                            const std::vector<ExprPtr>& omega,
                                            std::string label);

KropinaStructure structure_from_config(const ModelConfig& c);

struct ResolvedModel {
  KropinaStructure structure;
  std::optional<CRModelSpec> cr;  // set for catalog CR models
};

/// Catalog names:
///   heisenberg:<n>        flat model on R^{2n+1}
///   burns-shnider:<n>     rescaled by Upsilon = -2 log rho
///   rescaled:<n>:<id>     id one of "bs", "zero", or an inline expression
///   euclidean:<n>         g = identity, omega = dx1
/// Anything else is read as a model-config file path.
ResolvedModel resolve_model(const std::string& name);

}  // namespace kropina

#endif  // KROPINA_CONFIG_HPP_
