#include "nabk/registry.hpp"

#include <cmath>

namespace nabk {

namespace {

void reject_unknown(const std::map<std::string, double>& params, std::initializer_list<std::string_view> allowed,
                    std::string_view problem) {
  for (const auto& [key, value] : params) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == key;
    if (!ok) throw ArgumentError(std::string(problem) + ": unknown parameter '" + key + "'");
  }
}

// Well-conditioned dense matrix used by the affine debug problem.
Matrix<double> affine_matrix(Index n) {
  Matrix<double> A(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) A(i, j) = i == j ? 4.0 : 1.0 / (1.0 + double(std::abs(i - j)));
  return A;
}

}  // namespace

std::string canonical_problem_name(std::string_view name) {
  if (name == "h-equation" || name == "hequation" || name == "h") return "h-equation";
  if (name == "brown" || name == "brown-almost-linear") return "brown";
  if (name == "broyden" || name == "singular-broyden") return "broyden";
  if (name == "overdetermined" || name == "overdetermined-rational") return "overdetermined";
  if (name == "affine") return "affine";
  return {};
}

std::vector<std::string> problem_names() { return {"h-equation", "brown", "broyden", "overdetermined", "affine"}; }

ProblemInstance make_problem(std::string_view name, Index n, const std::map<std::string, double>& params) {
  const std::string key = canonical_problem_name(name);
  if (key.empty()) throw ArgumentError("unknown problem '" + std::string(name) + "'");
  if (n < 1) throw ArgumentError(key + ": n must be positive");

  ProblemInstance inst;
  ProblemSpec& spec = inst.spec;
  spec.name = key;
  spec.n = n;
  if (key == "h-equation") {
    reject_unknown(params, {"c"}, key);
    const double c = params.count("c") ? params.at("c") : 0.9;
    inst.system = std::make_shared<HEquation<double>>(n, c);
    spec.params["c"] = c;
    spec.x0 = Vector<double>::Zero(n);
    spec.sample_box = Box<double>::uniform(n, 0.0, 1.0);
  } else if (key == "brown") {
    reject_unknown(params, {}, key);
    inst.system = std::make_shared<BrownAlmostLinear<double>>(n);
    spec.x0 = Vector<double>::Constant(n, 0.5);
    spec.sample_box = Box<double>::uniform(n, 0.25, 1.5);
  } else if (key == "broyden") {
    reject_unknown(params, {}, key);
    inst.system = std::make_shared<SingularBroyden<double>>(n);
    spec.x0 = Vector<double>::Constant(n, -0.5);
    spec.sample_box = Box<double>::uniform(n, -1.0, 0.0);
  } else if (key == "overdetermined") {
    reject_unknown(params, {}, key);
    inst.system = std::make_shared<OverdeterminedRational<double>>(n);
    spec.x0 = Vector<double>::Zero(n);
    spec.sample_box = Box<double>::uniform(n, -0.5, 1.5);
  } else {
    reject_unknown(params, {}, key);
    Matrix<double> A = affine_matrix(n);
    Vector<double> ones = Vector<double>::Ones(n);
    Vector<double> b = A * ones;
    inst.system = std::make_shared<AffineSystem<double>>(std::move(A), std::move(b), ones);
    spec.x0 = Vector<double>::Zero(n);
    spec.sample_box = Box<double>::uniform(n, -1.0, 2.0);
  }
  spec.m = inst.system->rows();
  return inst;
}

}  // namespace nabk
