#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "json.hpp"
#include "nabk/solver.hpp"

namespace nabk {

struct DiagnoseOptions {
  std::string problem;
  Index n = 10;
  std::map<std::string, double> params;
  Method method = Method::NGABK;
  double rho = 0.1;
  /// Sampled pairs for the global cone estimate.
  std::size_t pairs = 100;
  /// Pair radius as a fraction of the sample-box diameter.
  double pair_radius = 0.05;
  std::uint64_t seed = 0;
  std::size_t max_iters = 2000;
  double tol_sq = 1e-6;
  /// "paper", "zeros" or "const:<v>".
  std::string x0 = "paper";
};

/**
 * Runs the method with iterate snapshots and checks the per-step theory:
 * cone constants, theorem contraction bounds against measured error ratios,
 * and the comparison with the NRK factor.
 *
 * Throws SizeGuardError when the Jacobian is too large for dense SVDs.
 */
nlohmann::json run_diagnose(const DiagnoseOptions& opts);

}  // namespace nabk
