#pragma once

#include <functional>
#include <string>
#include <vector>

#include "unconfined/blocks.hpp"
#include "unconfined/netcore.hpp"
#include "unconfined/objective.hpp"

namespace unconfined {

enum class SegmentKind { Constant, Convex };

std::string kind_name(SegmentKind kind);
SegmentKind parse_kind(const std::string& name);

/// t -> (1 - c t) start + c t end, with c = scale in (0, 1].
struct PathSegment {
  Params start;
  Params end;
  SegmentKind kind = SegmentKind::Constant;
  double scale = 1.0;
  std::string label;

  Params at(double t) const;
  /// Parameter reached at t = 1.
  Params finish() const { return at(1.0); }
};

/// Same segment traversed backwards (scale must be 1).
PathSegment reversed(const PathSegment& seg);

struct CompositePath {
  std::vector<PathSegment> segments;

  /// Largest entrywise jump between consecutive segment endpoints.
  double max_discontinuity() const;
};

/// Loss at `grid` uniformly spaced times in [0, 1].
std::vector<double> loss_profile(const PathSegment& seg, const Architecture& arch,
                                 const Dataset& data, LossKind loss, Index grid);

/// max_k |L(t_k) - L(0)| <= tol (1 + |L(0)|).
bool is_path_constant(const PathSegment& seg, const Architecture& arch, const Dataset& data,
                      LossKind loss, Index grid, double tol);

/// Midpoint convexity on every grid pair with an on-grid midpoint.
bool is_path_convex(const PathSegment& seg, const Architecture& arch, const Dataset& data,
                    LossKind loss, Index grid, double tol);

/// Largest value of L(mid) - (L(a) + L(b)) / 2 over grid pairs with an on-grid midpoint.
double max_midpoint_violation(const std::vector<double>& profile);

/// Segment interpolating only the outer layer of an embedded pair.
PathSegment convex_outer_segment(const Params& upper_prime, const Params& lower_prime);

/// Minimizer c of a convex profile on [0, 1] by ternary search; c = 1 when h(1) <= h(c) + tol.
double restrict_profile(const std::function<double(double)>& profile, double tol = 1e-10);

/// Sets the segment's scale to the minimizer of its (convex) loss profile.
/// PreconditionError if the profile fails the convexity check at `grid` points.
PathSegment restrict_nonincreasing(const PathSegment& seg, const Architecture& arch,
                                   const Dataset& data, LossKind loss, double tol = 1e-10,
                                   Index grid = 2001, double convex_tol = 1e-9);

/// 2m(n+1)^l, or 2m(n+1) for identity activations.
Index required_width(Index m, Index n, Index l, bool linear);

struct EscapeOptions {
  bool linear = false;
  double restrict_tol = 1e-10;
  Index convexity_grid = 2001;
  double convex_tol = 1e-9;
};

/// Constant reparametrization to an upper block, constant embedding, restricted convex
/// outer-layer segment and, when the whole convex segment is used, the reversed
/// constant pieces down to the target.
CompositePath build_escape_path(const Architecture& arch, const Params& start, const Params& target,
                                const Dataset& data, LossKind loss, const ConstraintSpec& spec,
                                const EscapeOptions& options = {});

}  // namespace unconfined
