#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unconfined/netcore.hpp"
#include "unconfined/objective.hpp"
#include "unconfined/paths.hpp"

namespace unconfined {

struct Tolerances {
  double constant = 1e-8;    // relative, constant segments
  double convex = 1e-9;      // absolute, midpoint checks on convex segments
  double monotone = 1e-7;    // relative, adjacent grid points over the whole path
  double constraint = 1e-9;  // absolute excess over 1
  double continuity = 1e-12;
};

struct SegmentStats {
  SegmentKind kind = SegmentKind::Constant;
  std::string label;
  double scale = 1.0;
  Index grid_size = 0;
  double loss_start = 0.0;
  double loss_end = 0.0;
  double max_loss_deviation = 0.0;         // max |L(t) - L(0)| / (1 + |L(0)|)
  double max_convexity_violation = 0.0;    // max L(mid) - (L(a) + L(b)) / 2
  double max_monotonicity_violation = 0.0; // max (L(t_{k+1}) - L(t_k)) / (1 + |L(t_k)|)
  double max_constraint_excess = 0.0;      // max r(h(t)) - 1, floored at 0
};

struct ReportFlags {
  bool constant = true;
  bool convex = true;
  bool monotone = true;
  bool feasible = true;
  bool continuous = true;

  bool all() const { return constant && convex && monotone && feasible && continuous; }
  friend bool operator==(const ReportFlags&, const ReportFlags&) = default;
};

struct VerificationReport {
  std::vector<SegmentStats> segments;
  Index grid_size = 0;
  std::uint64_t seed = 0;
  Tolerances tolerances;
  double max_discontinuity = 0.0;
  double max_monotonicity_violation = 0.0;  // includes the joints between segments
  double max_constraint_excess = 0.0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  ReportFlags flags;
  bool pass = true;

  /// (t, loss) over the concatenated grid, t rescaled to [0, 1]. Not serialized.
  std::vector<std::pair<double, double>> profile;
  /// Wall-clock seconds. Not serialized so report files stay byte-stable.
  double elapsed_seconds = 0.0;
};

/// Flags implied by the recorded maxima and tolerances.
ReportFlags recompute_flags(const VerificationReport& report);

VerificationReport verify_path(const CompositePath& path, const Architecture& arch,
                               const Dataset& data, LossKind loss, const ConstraintSpec& spec,
                               Index grid_size = 2001, const Tolerances& tols = {},
                               std::uint64_t seed = 0);

struct IdentityFragment {
  Index trials = 0;
  double max_deviation = 0.0;
  double tol = 0.0;
  bool pass = true;
};

/// Compares g_{[Θ',Γ']_{c1,c2}}(x) with c1 g_{Θ'}(x) + c2 g_{Γ'}(x) for random c1, c2, x.
/// When the original blocks are supplied, also compares against c1 g_Θ(x) + c2 g_Γ(x).
IdentityFragment verify_block_identity(const Params& upper_prime, const Params& lower_prime,
                                       const Architecture& arch, Index trials, std::uint64_t seed,
                                       double tol = 1e-9, const Params* upper = nullptr,
                                       const Params* lower = nullptr);

/// |L(Θ) - L(Γ)| for random hidden-unit permutations Γ of Θ.
IdentityFragment verify_symmetry(const Architecture& arch, const Params& params, const Dataset& data,
                                 LossKind loss, Index trials, std::uint64_t seed, double tol = 1e-10);

}  // namespace unconfined
