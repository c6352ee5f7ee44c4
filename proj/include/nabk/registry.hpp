#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "nabk/problems.hpp"
#include "nabk/system.hpp"

namespace nabk {

struct ProblemSpec {
  /// Canonical registry name.
  std::string name;
  Index n = 0;
  Index m = 0;
  std::map<std::string, double> params;
  /// Initial point used in the reference experiments.
  Vector<double> x0;
  /// Region used for finite-difference and cone sampling.
  Box<double> sample_box;
};

struct ProblemInstance {
  std::shared_ptr<const NonlinearSystem<double>> system;
  ProblemSpec spec;
};

/// Canonical name for a registry key or alias; empty if unknown.
std::string canonical_problem_name(std::string_view name);

/// Registered names: h-equation, brown, broyden, overdetermined, affine.
std::vector<std::string> problem_names();

/// Builds a registered problem. Throws ArgumentError for unknown names, bad sizes or unknown parameters.
ProblemInstance make_problem(std::string_view name, Index n, const std::map<std::string, double>& params = {});

}  // namespace nabk
