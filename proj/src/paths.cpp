#include "unconfined/paths.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace unconfined {

std::string kind_name(SegmentKind kind) { return kind == SegmentKind::Constant ? "constant" : "convex"; }

SegmentKind parse_kind(const std::string& name) {
  if (name == "constant") return SegmentKind::Constant;
  if (name == "convex") return SegmentKind::Convex;
  throw ParameterError("unknown segment kind '" + name + "'");
}

Params PathSegment::at(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw ParameterError("segment time must lie in [0, 1]");
  const double ct = scale * t;
  if (ct == 0.0) return start;
  if (ct == 1.0) return end;
  return lerp(start, end, ct);
}

PathSegment reversed(const PathSegment& seg) {
  if (seg.scale != 1.0) throw ParameterError("only unrestricted segments can be reversed");
  return {seg.end, seg.start, seg.kind, 1.0, seg.label.empty() ? "" : seg.label + " (reversed)"};
}

double CompositePath::max_discontinuity() const {
  double worst = 0.0;
  for (std::size_t i = 1; i < segments.size(); ++i) {
    worst = std::max(worst, max_abs_diff(segments[i - 1].finish(), segments[i].start));
  }
  return worst;
}

std::vector<double> loss_profile(const PathSegment& seg, const Architecture& arch,
                                 const Dataset& data, LossKind loss, Index grid) {
  if (grid < 2) throw ParameterError("grid needs at least 2 points");
  std::vector<double> out(static_cast<std::size_t>(grid));
  for (Index k = 0; k < grid; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(grid - 1);
    out[static_cast<std::size_t>(k)] = empirical_risk(arch, seg.at(t), data, loss);
  }
  return out;
}

bool is_path_constant(const PathSegment& seg, const Architecture& arch, const Dataset& data,
                      LossKind loss, Index grid, double tol) {
  const std::vector<double> profile = loss_profile(seg, arch, data, loss, grid);
  const double bound = tol * (1.0 + std::abs(profile.front()));
  for (double v : profile) {
    if (!(std::abs(v - profile.front()) <= bound)) return false;
  }
  return true;
}

double max_midpoint_violation(const std::vector<double>& profile) {
  const std::size_t n = profile.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; j += 2) {
      const double gap = profile[(i + j) / 2] - 0.5 * (profile[i] + profile[j]);
      if (std::isnan(gap)) return std::numeric_limits<double>::infinity();
      worst = std::max(worst, gap);
    }
  }
  return worst;
}

bool is_path_convex(const PathSegment& seg, const Architecture& arch, const Dataset& data,
                    LossKind loss, Index grid, double tol) {
  if (grid < 3) throw ParameterError("convexity check needs at least 3 grid points");
  return max_midpoint_violation(loss_profile(seg, arch, data, loss, grid)) <= tol;
}

PathSegment convex_outer_segment(const Params& upper_prime, const Params& lower_prime) {
  if (!upper_prime.same_shape(lower_prime)) throw StructuralError("parameter tuples differ in shape");
  for (Index j = 0; j < upper_prime.depth(); ++j) {
    if (upper_prime[j] != lower_prime[j]) throw StructuralError("hidden layers are not shared");
  }
  return {upper_prime, lower_prime, SegmentKind::Convex, 1.0, "convex outer layer"};
}

double restrict_profile(const std::function<double(double)>& profile, double tol) {
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-10) {
    const double a = lo + (hi - lo) / 3.0;
    const double b = hi - (hi - lo) / 3.0;
    if (profile(a) <= profile(b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  double c = 0.5 * (lo + hi);
  if (profile(1.0) <= profile(c) + tol) return 1.0;
  return std::max(c, 1e-10);
}

PathSegment restrict_nonincreasing(const PathSegment& seg, const Architecture& arch,
                                   const Dataset& data, LossKind loss, double tol, Index grid,
                                   double convex_tol) {
  if (seg.scale != 1.0) throw ParameterError("segment is already restricted");
  if (!is_path_convex(seg, arch, data, loss, grid, convex_tol)) {
    throw PreconditionError("loss along the segment is not convex");
  }
  PathSegment out = seg;
  out.scale = restrict_profile(
      [&](double t) { return empirical_risk(arch, seg.at(t), data, loss); }, tol);
  return out;
}

Index required_width(Index m, Index n, Index l, bool linear) {
  if (m < 1 || n < 1 || l < 1) throw ParameterError("required_width needs m, n, l >= 1");
  return 2 * block_factor(m, n, l, linear);
}

CompositePath build_escape_path(const Architecture& arch, const Params& start, const Params& target,
                                const Dataset& data, LossKind loss, const ConstraintSpec& spec,
                                const EscapeOptions& options) {
  check_shapes(arch, start);
  check_shapes(arch, target);
  data.validate(arch);
  if (options.linear && !arch.all_identity()) {
    throw PreconditionError("the linear construction needs identity activations throughout");
  }
  const Index n = data.samples();
  const Index need = required_width(arch.output_dim(), n, arch.depth(), options.linear);
  if (arch.min_width() < need) {
    std::ostringstream os;
    os << "minimal width " << arch.min_width() << " is below the required " << need;
    throw CapabilityError(os.str());
  }
  if (!is_feasible(start, spec)) throw PreconditionError("start parameter violates the constraint");
  if (!is_feasible(target, spec)) throw PreconditionError("target parameter violates the constraint");

  ToBlockOptions block_options;
  block_options.merge_linear = options.linear;
  const BlockResult up = to_block(arch, start, data, spec, BlockSide::Upper, block_options);
  const BlockResult down = to_block(arch, target, data, spec, BlockSide::Lower, block_options);
  const EmbeddedPair pair = embed_sum_hidden(arch, up.params, down.params, up.s);

  CompositePath path;
  for (const ReparamStep& step : up.steps) {
    path.segments.push_back({step.before, step.after, SegmentKind::Constant, 1.0, "start " + step.label});
  }
  path.segments.push_back({up.params, pair.upper, SegmentKind::Constant, 1.0, "embed upper block"});
  const PathSegment convex =
      restrict_nonincreasing(convex_outer_segment(pair.upper, pair.lower), arch, data, loss,
                             options.restrict_tol, options.convexity_grid, options.convex_tol);
  path.segments.push_back(convex);
  if (convex.scale == 1.0) {
    path.segments.push_back({pair.lower, down.params, SegmentKind::Constant, 1.0, "release lower block"});
    for (auto it = down.steps.rbegin(); it != down.steps.rend(); ++it) {
      path.segments.push_back({it->after, it->before, SegmentKind::Constant, 1.0, "target " + it->label + " (reversed)"});
    }
  }
  // Drop zero-length pieces so every segment moves.
  std::vector<PathSegment> kept;
  for (PathSegment& seg : path.segments) {
    if (seg.kind == SegmentKind::Constant && seg.start == seg.end) continue;
    kept.push_back(std::move(seg));
  }
  path.segments = std::move(kept);
  return path;
}

}  // namespace unconfined
