#include "kropina/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace kropina {

namespace {

struct Statement {
  std::string key;    // lowered identifier left of '='
  std::string value;  // raw right-hand side
  int line = 1;
  int col = 1;        // of the value
};

std::string strip(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return {};
  return s.substr(a, b - a + 1);
}

std::vector<Statement> split_statements(std::string_view text) {
  std::vector<Statement> out;
  int line = 1, col = 1;
  std::string cur;
  int stmt_line = 1, stmt_col = 1;
  bool fresh = true;
  bool in_comment = false;
  int bracket_depth = 0;

  auto flush = [&]() {
    const std::string s = strip(cur);
    cur.clear();
    fresh = true;
    if (s.empty()) return;
    const size_t eq = s.find('=');
    if (eq == std::string::npos) {
      throw SyntaxError("expected 'name = value'", stmt_line, stmt_col);
    }
    Statement st;
    st.key = strip(s.substr(0, eq));
    st.value = strip(s.substr(eq + 1));
    st.line = stmt_line;
    st.col = stmt_col;
    std::transform(st.key.begin(), st.key.end(), st.key.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (st.key.empty()) throw SyntaxError("empty statement name", stmt_line, stmt_col);
    out.push_back(std::move(st));
  };

  for (char c : text) {
    if (c == '\n') {
      in_comment = false;
      if (bracket_depth == 0) flush();
      ++line;
      col = 1;
      continue;
    }
    if (in_comment) {
      ++col;
      continue;
    }
    if (c == '#') {
      in_comment = true;
      ++col;
      continue;
    }
    if (c == '[') ++bracket_depth;
    if (c == ']') --bracket_depth;
    if (c == ';' && bracket_depth == 0) {
      flush();
      ++col;
      continue;
    }
    if (fresh && !std::isspace(static_cast<unsigned char>(c))) {
      stmt_line = line;
      stmt_col = col;
      fresh = false;
    }
    cur.push_back(c);
    ++col;
  }
  flush();
  return out;
}

std::vector<std::string> default_coords(int dim) {
  if (dim == 1) return {"x"};
  if (dim == 2) return {"x", "y"};
  if (dim == 3) return {"x", "y", "t"};
  std::vector<std::string> names(dim);
  for (int i = 0; i < dim; ++i) names[i] = "x" + std::to_string(i + 1);
  return names;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(strip(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  const std::string last = strip(cur);
  if (!last.empty() || !out.empty()) out.push_back(last);
  return out;
}

}  // namespace

ModelConfig parse_model_config(std::string_view text) {
  const std::vector<Statement> stmts = split_statements(text);

  // first pass: fix the dimension and coordinate names
  int dim = 0;
  std::vector<std::string> coords;
  std::string label;
  int max_g_index = 0;
  int w_len = 0;
  for (const auto& st : stmts) {
    if (st.key == "dim") {
      try {
        dim = std::stoi(st.value);
      } catch (...) {
        throw SyntaxError("dim must be an integer", st.line, st.col);
      }
    } else if (st.key == "coords") {
      coords = split_list(st.value);
      if (coords.empty()) throw SyntaxError("empty coords list", st.line, st.col);
    } else if (st.key == "label") {
      label = st.value;
    } else if (st.key == "w") {
      std::string v = st.value;
      if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
        throw SyntaxError("w must be a bracketed list [..]", st.line, st.col);
      }
      w_len = static_cast<int>(split_list(v.substr(1, v.size() - 2)).size());
    } else if (st.key.size() == 3 && st.key[0] == 'g' &&
               std::isdigit(static_cast<unsigned char>(st.key[1])) &&
               std::isdigit(static_cast<unsigned char>(st.key[2]))) {
      const int i = st.key[1] - '0';
      const int j = st.key[2] - '0';
      if (i < 1 || j < 1) throw DimensionMismatch("g indices are 1-based");
      if (i > j) {
        throw DimensionMismatch("only the upper triangle of g may be given (g" +
                                std::to_string(i) + std::to_string(j) + ")");
      }
      max_g_index = std::max(max_g_index, j);
    } else if (st.key != "upsilon") {
      throw SyntaxError("unknown statement '" + st.key + "'", st.line, st.col);
    }
  }
  if (dim == 0) dim = !coords.empty() ? static_cast<int>(coords.size())
                                      : std::max(max_g_index, w_len);
  if (dim <= 0) {
    throw DimensionMismatch("cannot infer the model dimension (give dim, coords, or w)");
  }
  if (dim > 9) {
    throw DimensionMismatch("gIJ entry syntax supports dimensions up to 9");
  }
  if (coords.empty()) coords = default_coords(dim);
  if (static_cast<int>(coords.size()) != dim) {
    throw DimensionMismatch("coords lists " + std::to_string(coords.size()) +
                            " names for dimension " + std::to_string(dim));
  }
  if (max_g_index > dim || (w_len != 0 && w_len != dim)) {
    throw DimensionMismatch("g or w entries exceed the declared dimension");
  }

  // second pass: parse expressions
  ModelConfig cfg;
  cfg.dim = dim;
  cfg.coords = coords;
  cfg.label = label;
  cfg.g.assign(dim, std::vector<ExprPtr>(dim, constant(0)));
  for (const auto& st : stmts) {
    if (st.key == "w") {
      const std::string inner = st.value.substr(1, st.value.size() - 2);
      const std::vector<std::string> parts = split_list(inner);
      if (static_cast<int>(parts.size()) != dim) {
        throw DimensionMismatch("w lists " + std::to_string(parts.size()) +
                                " components for dimension " + std::to_string(dim));
      }
      cfg.omega.resize(dim);
      for (int j = 0; j < dim; ++j) cfg.omega[j] = parse_expression(parts[j], coords);
    } else if (st.key == "upsilon") {
      cfg.upsilon = parse_expression(st.value, coords);
    } else if (st.key.size() == 3 && st.key[0] == 'g') {
      const int i = st.key[1] - '0' - 1;
      const int j = st.key[2] - '0' - 1;
      const ExprPtr e = parse_expression(st.value, coords);
      cfg.g[i][j] = e;
      cfg.g[j][i] = e;
    }
  }
  if (cfg.omega.empty()) {
    throw DimensionMismatch("model config lacks the one-form statement w = [..]");
  }
  return cfg;
}

std::string pretty_print(const ModelConfig& c) {
  std::ostringstream os;
  os << "dim = " << c.dim << "\n";
  os << "coords = ";
  for (size_t i = 0; i < c.coords.size(); ++i) {
    os << (i ? ", " : "") << c.coords[i];
  }
  os << "\n";
  if (!c.label.empty()) os << "label = " << c.label << "\n";
  for (int i = 0; i < c.dim; ++i) {
    for (int j = i; j < c.dim; ++j) {
      os << "g" << (i + 1) << (j + 1) << " = " << to_string(c.g[i][j], c.coords) << "\n";
    }
  }
  os << "w = [";
  for (int j = 0; j < c.dim; ++j) {
    os << (j ? ", " : "") << to_string(c.omega[j], c.coords);
  }
  os << "]\n";
  if (c.upsilon) os << "upsilon = " << to_string(c.upsilon, c.coords) << "\n";
  return os.str();
}

KropinaStructure structure_from_expressions(int dim,
                                            const std::vector<std::vector<ExprPtr>>& g,
                                            const std::vector<ExprPtr>& omega,
                                            std::string label) {
  std::vector<std::vector<std::vector<ExprPtr>>> dg(
      dim, std::vector<std::vector<ExprPtr>>(dim, std::vector<ExprPtr>(dim)));
  std::vector<std::vector<ExprPtr>> dw(dim, std::vector<ExprPtr>(dim));
  for (int k = 0; k < dim; ++k) {
    for (int i = 0; i < dim; ++i) {
      for (int j = i; j < dim; ++j) {
        dg[k][i][j] = diff(g[i][j], k);
        dg[k][j][i] = dg[k][i][j];
      }
      dw[k][i] = diff(omega[i], k);
    }
  }
  return make_structure(
      dim,
      [g, dim](const Vec& x) {
        Mat out(dim, dim);
        for (int i = 0; i < dim; ++i)
          for (int j = i; j < dim; ++j) {
            out(i, j) = eval(g[i][j], x);
            out(j, i) = out(i, j);
          }
        return out;
      },
      [omega, dim](const Vec& x) {
        Vec out(dim);
        for (int j = 0; j < dim; ++j) out[j] = eval(omega[j], x);
        return out;
      },
      [dg, dim](const Vec& x) {
        Tensor3 out(dim, Mat(dim, dim));
        for (int k = 0; k < dim; ++k)
          for (int i = 0; i < dim; ++i)
            for (int j = i; j < dim; ++j) {
              out[k](i, j) = eval(dg[k][i][j], x);
              out[k](j, i) = out[k](i, j);
            }
        return out;
      },
      [dw, dim](const Vec& x) {
        Mat out(dim, dim);
        for (int k = 0; k < dim; ++k)
          for (int j = 0; j < dim; ++j) out(k, j) = eval(dw[k][j], x);
        return out;
      },
      std::move(label));
}

KropinaStructure structure_from_config(const ModelConfig& c) {
  return structure_from_expressions(c.dim, c.g, c.omega,
                                    c.label.empty() ? "config-model" : c.label);
}

namespace {

KropinaStructure euclidean_structure(int n) {
  KropinaStructure s = make_structure(
      n, [n](const Vec&) { return Mat(Mat::Identity(n, n)); },
      [n](const Vec&) { return Vec(Vec::Unit(n, 0)); },
      [n](const Vec&) { return Tensor3(n, Mat::Zero(n, n)); },
      [n](const Vec&) { return Mat(Mat::Zero(n, n)); },
      "euclidean:" + std::to_string(n));
  return s;
}

}  // namespace

ResolvedModel resolve_model(const std::string& name) {
  const size_t c1 = name.find(':');
  const std::string head = name.substr(0, c1);
  if (head == "heisenberg" || head == "burns-shnider" || head == "rescaled" ||
      head == "euclidean") {
    if (c1 == std::string::npos) {
      throw KropinaError("model '" + head + "' needs a dimension, e.g. " + head + ":1");
    }
    const size_t c2 = name.find(':', c1 + 1);
    const std::string nfield =
        name.substr(c1 + 1, c2 == std::string::npos ? std::string::npos : c2 - c1 - 1);
    int n = 0;
    try {
      n = std::stoi(nfield);
    } catch (...) {
      throw KropinaError("bad dimension field in model name '" + name + "'");
    }
    if (n < 1) throw KropinaError("model dimension must be positive");

    ResolvedModel out;
    if (head == "euclidean") {
      out.structure = euclidean_structure(n);
      return out;
    }
    if (head == "heisenberg") {
      out.structure = heisenberg_kropina(n);
      return out;
    }
    if (head == "burns-shnider") {
      CRModelSpec spec;
      spec.cr_dim = n;
      spec.upsilon = burns_shnider_upsilon(n);
      spec.label = "burns-shnider:" + std::to_string(n);
      out.cr = spec;
      out.structure = rescaled_kropina(spec);
      return out;
    }
    // rescaled:<n>:<id or expression>
    if (c2 == std::string::npos) {
      throw KropinaError("rescaled model needs an expression id: rescaled:<n>:<expr>");
    }
    const std::string id = name.substr(c2 + 1);
    CRModelSpec spec;
    spec.cr_dim = n;
    spec.label = name;
    if (id == "bs") {
      spec.upsilon = burns_shnider_upsilon(n);
    } else if (id == "zero") {
      spec.upsilon = constant(0);
    } else {
      spec.upsilon = parse_expression(id, cr_coord_names(n));
    }
    out.cr = spec;
    out.structure = rescaled_kropina(spec);
    return out;
  }

  // fall through: a model-config file path
  std::ifstream in(name);
  if (!in) {
    throw IOFailure("cannot open model '" + name +
                    "' (not a catalog name and not a readable file)");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  ResolvedModel out;
  ModelConfig cfg = parse_model_config(buf.str());
  if (cfg.label.empty()) cfg.label = name;
  out.structure = structure_from_config(cfg);
  return out;
}

}  // namespace kropina
