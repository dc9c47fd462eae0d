#include "unconfined/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace unconfined {

namespace {

constexpr double kBad = std::numeric_limits<double>::infinity();

double safe_risk(const Architecture& arch, const Params& p, const Dataset& data, LossKind loss) {
  try {
    return empirical_risk(arch, p, data, loss);
  } catch (const DomainError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

double rise(double from, double to) {
  if (std::isnan(from) || std::isnan(to)) return kBad;
  return std::max(0.0, (to - from) / (1.0 + std::abs(from)));
}

}  // namespace

ReportFlags recompute_flags(const VerificationReport& report) {
  const Tolerances& tol = report.tolerances;
  ReportFlags f;
  for (const SegmentStats& s : report.segments) {
    if (s.kind == SegmentKind::Constant && !(s.max_loss_deviation <= tol.constant)) f.constant = false;
    if (s.kind == SegmentKind::Convex && !(s.max_convexity_violation <= tol.convex)) f.convex = false;
  }
  f.monotone = report.max_monotonicity_violation <= tol.monotone;
  f.feasible = report.max_constraint_excess <= tol.constraint;
  f.continuous = report.max_discontinuity <= tol.continuity;
  return f;
}

VerificationReport verify_path(const CompositePath& path, const Architecture& arch,
                               const Dataset& data, LossKind loss, const ConstraintSpec& spec,
                               Index grid_size, const Tolerances& tols, std::uint64_t seed) {
  if (grid_size < 3) throw ParameterError("verification grid needs at least 3 points");
  const auto t0 = std::chrono::steady_clock::now();
  VerificationReport report;
  report.grid_size = grid_size;
  report.seed = seed;
  report.tolerances = tols;
  report.max_discontinuity = path.max_discontinuity();

  const std::size_t count = path.segments.size();
  double previous_last = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t s = 0; s < count; ++s) {
    const PathSegment& seg = path.segments[s];
    SegmentStats stats;
    stats.kind = seg.kind;
    stats.label = seg.label;
    stats.scale = seg.scale;
    stats.grid_size = grid_size;

    std::vector<double> losses(static_cast<std::size_t>(grid_size));
    for (Index k = 0; k < grid_size; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(grid_size - 1);
      const Params p = seg.at(t);
      const double L = safe_risk(arch, p, data, loss);
      losses[static_cast<std::size_t>(k)] = L;
      const double excess = std::max(0.0, constraint_value(p, spec) - 1.0);
      stats.max_constraint_excess = std::max(stats.max_constraint_excess, excess);
      report.profile.emplace_back((static_cast<double>(s) + t) / static_cast<double>(count), L);
    }
    const double L0 = losses.front();
    for (std::size_t k = 0; k < losses.size(); ++k) {
      const double dev = std::isnan(losses[k]) || std::isnan(L0)
                             ? kBad
                             : std::abs(losses[k] - L0) / (1.0 + std::abs(L0));
      stats.max_loss_deviation = std::max(stats.max_loss_deviation, dev);
      if (k > 0) {
        stats.max_monotonicity_violation =
            std::max(stats.max_monotonicity_violation, rise(losses[k - 1], losses[k]));
      }
    }
    if (seg.kind == SegmentKind::Convex) stats.max_convexity_violation = max_midpoint_violation(losses);
    stats.loss_start = losses.front();
    stats.loss_end = losses.back();

    report.max_monotonicity_violation =
        std::max(report.max_monotonicity_violation, stats.max_monotonicity_violation);
    if (s > 0) {
      report.max_monotonicity_violation =
          std::max(report.max_monotonicity_violation, rise(previous_last, losses.front()));
    } else {
      report.initial_loss = losses.front();
    }
    previous_last = losses.back();
    report.final_loss = losses.back();
    report.max_constraint_excess = std::max(report.max_constraint_excess, stats.max_constraint_excess);
    report.segments.push_back(std::move(stats));
  }
  report.flags = recompute_flags(report);
  report.pass = report.flags.all();
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

IdentityFragment verify_block_identity(const Params& upper_prime, const Params& lower_prime,
                                       const Architecture& arch, Index trials, std::uint64_t seed,
                                       double tol, const Params* upper, const Params* lower) {
  check_shapes(arch, upper_prime);
  check_shapes(arch, lower_prime);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  IdentityFragment out;
  out.trials = trials;
  out.tol = tol;
  for (Index k = 0; k < trials; ++k) {
    const double c1 = coef(rng);
    const double c2 = coef(rng);
    Vector x(arch.input_dim());
    for (Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
    const Vector mixed = forward(arch, mix_block(upper_prime, lower_prime, c1, c2), x);
    const Vector combo = c1 * forward(arch, upper_prime, x) + c2 * forward(arch, lower_prime, x);
    double dev = (mixed - combo).cwiseAbs().maxCoeff();
    if (upper != nullptr && lower != nullptr) {
      const Vector original = c1 * forward(arch, *upper, x) + c2 * forward(arch, *lower, x);
      dev = std::max(dev, (mixed - original).cwiseAbs().maxCoeff());
    }
    out.max_deviation = std::isnan(dev) ? kBad : std::max(out.max_deviation, dev);
  }
  out.pass = out.max_deviation <= tol;
  return out;
}

IdentityFragment verify_symmetry(const Architecture& arch, const Params& params, const Dataset& data,
                                 LossKind loss, Index trials, std::uint64_t seed, double tol) {
  std::mt19937_64 rng(seed);
  const double base = empirical_risk(arch, params, data, loss);
  IdentityFragment out;
  out.trials = trials;
  out.tol = tol;
  for (Index k = 0; k < trials; ++k) {
    std::vector<Permutation> perms;
    for (Index j = 1; j <= arch.depth(); ++j) {
      Permutation p = identity_permutation(arch.width(j));
      std::shuffle(p.begin(), p.end(), rng);
      perms.push_back(std::move(p));
    }
    const double L = empirical_risk(arch, permute_hidden(arch, params, perms), data, loss);
    const double dev = std::abs(L - base);
    out.max_deviation = std::isnan(dev) ? kBad : std::max(out.max_deviation, dev);
  }
  out.pass = out.max_deviation <= tol;
  return out;
}

}  // namespace unconfined
