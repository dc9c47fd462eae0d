#pragma once

#include <string>

#include "unconfined/netcore.hpp"
#include "unconfined/objective.hpp"

namespace unconfined {

enum class OracleMethod { OuterSolve, BruteForce };

std::string method_name(OracleMethod method);

struct OracleResult {
  Params params;
  double achieved_risk = 0.0;
  OracleMethod method = OracleMethod::OuterSolve;
  /// Normal-equation residual (squared loss), final subgradient norm (other losses),
  /// or grid spacing (brute force).
  double certificate = 0.0;
  /// Rank of the feature matrix; -1 for brute force.
  Index rank = -1;
  Index iterations = 0;
};

/// Keeps Θ^0..Θ^{l-1} of `inner` and chooses the outer layer minimizing the risk over
/// the features Z = f^l[Θ^{l-1} ... f^1[Θ^0 X]]. Squared loss: minimum-norm least squares
/// with singular values below 1e-10 of the largest treated as zero. Other losses:
/// subgradient descent with step 1/sqrt(k) along the normalized subgradient.
OracleResult outer_layer_solve(const Architecture& arch, const Params& inner, const Dataset& data,
                               LossKind loss);

struct BruteForceOptions {
  Index resolution = 5;  // grid points per entry, spanning [-bound, bound]
  double bound = 1.0;
  double max_points = 2e8;
};

/// Exhaustive grid search over all feasible parameters with at most 8 entries.
/// CapabilityError for larger nets or grids; PreconditionError if no grid point is feasible.
OracleResult brute_force_min(const Architecture& arch, const Dataset& data, LossKind loss,
                             const ConstraintSpec& spec, const BruteForceOptions& options = {});

}  // namespace unconfined
