#include "doctest.h"
#include "support.hpp"
#include "unconfined/globalmin.hpp"
#include "unconfined/paths.hpp"
#include "unconfined/verify.hpp"

using namespace unconfined;
using namespace testing_support;

namespace {

// One-unit identity net on x = 1 whose prediction along the segment is t.
struct Scalar {
  Architecture arch = make_arch(1, {1}, 1, Activation::identity());
  Dataset data{Matrix::Ones(1, 1), Matrix::Zero(1, 1)};
  PathSegment seg;

  explicit Scalar(double label) {
    data.Y(0, 0) = label;
    seg.start = Params({Matrix::Ones(1, 1), Matrix::Zero(1, 1)});
    seg.end = Params({Matrix::Ones(1, 1), Matrix::Ones(1, 1)});
    seg.kind = SegmentKind::Convex;
  }
};

PathSegment random_constant_segment(std::mt19937_64& rng, Architecture& arch, Dataset& data) {
  arch = make_arch(2, {uniform_int(rng, 6, 9)}, 1, pick_activation(rng));
  data = sample_data(arch, 3, rng);
  const Params p = random_params(arch, rng);
  const BlockResult res = to_block(arch, p, data, {}, BlockSide::Upper);
  REQUIRE_FALSE(res.steps.empty());
  const ReparamStep& step = res.steps.front();
  return {step.before, step.after, SegmentKind::Constant, 1.0, "step"};
}

}  // namespace

TEST_CASE("segment evaluation") {
  std::mt19937_64 rng(1);
  const Architecture a = make_arch(2, {3}, 1, Activation::relu());
  const Params theta = random_params(a, rng);
  const PathSegment seg{Params::zeros(a), theta, SegmentKind::Constant, 1.0, ""};
  CHECK(seg.at(0.0) == Params::zeros(a));
  CHECK(seg.at(1.0) == theta);
  CHECK(max_abs_diff(seg.at(0.5), 0.5 * theta) == 0.0);
  CHECK_THROWS_AS(seg.at(1.5), ParameterError);
  CHECK_THROWS_AS(seg.at(-0.1), ParameterError);
  PathSegment half = seg;
  half.scale = 0.5;
  CHECK(max_abs_diff(half.finish(), 0.5 * theta) == 0.0);
  CHECK_THROWS_AS(reversed(half), ParameterError);
  CHECK(reversed(seg).start == theta);
}

TEST_CASE("constant and convex predicates") {
  std::mt19937_64 rng(2);
  const Architecture a = make_arch(2, {5}, 1, Activation::sigmoid());
  const Dataset data = sample_data(a, 4, rng);
  const Params p = random_params(a, rng);
  const PathSegment still{p, p, SegmentKind::Constant, 1.0, ""};
  CHECK(is_path_constant(still, a, data, LossKind::Squared, 101, 1e-8));
  CHECK(is_path_convex(still, a, data, LossKind::Squared, 101, 1e-9));

  Params scaled = p;
  scaled.outer().setZero();
  const PathSegment shrink{p, scaled, SegmentKind::Constant, 1.0, ""};
  REQUIRE(empirical_risk(a, p, data, LossKind::Squared) > 0.0);
  CHECK_FALSE(is_path_constant(shrink, a, data, LossKind::Squared, 101, 1e-8));
  CHECK(is_path_convex(shrink, a, data, LossKind::Squared, 101, 1e-9));
  CHECK_THROWS_AS(is_path_convex(still, a, data, LossKind::Squared, 2, 1e-9), ParameterError);
}

TEST_CASE("two-hump profile is not convex") {
  // Prediction t^3 - t through a cubic activation, label 0: loss (t^3 - t)^2 has two humps.
  const Architecture a = make_arch(1, {2}, 1, Activation::polynomial(1.0, 3.0));
  const Dataset data{Matrix::Ones(1, 1), Matrix::Zero(1, 1)};
  Matrix inner_start(2, 1), inner_end(2, 1);
  inner_start << 0, 1;
  inner_end << 1, 1;
  Matrix outer(1, 2);
  outer << 1, -1;
  const PathSegment seg{Params({inner_start, outer}), Params({inner_end, outer}), SegmentKind::Convex, 1.0, ""};
  CHECK_FALSE(is_path_convex(seg, a, data, LossKind::Squared, 201, 1e-9));
  CHECK_THROWS_AS(restrict_nonincreasing(seg, a, data, LossKind::Squared), PreconditionError);
  CHECK(max_midpoint_violation({0.0, 1.0, 0.0}) == 1.0);
  CHECK(max_midpoint_violation({1.0, 0.0, 1.0}) == 0.0);
}

TEST_CASE("restriction on analytic profiles") {
  Scalar parabola(0.8);
  const PathSegment r = restrict_nonincreasing(parabola.seg, parabola.arch, parabola.data, LossKind::Squared);
  CHECK(std::abs(r.scale - 0.8) <= 1e-6);
  CHECK(empirical_risk(parabola.arch, r.finish(), parabola.data, LossKind::Squared) <= 1e-12);
  CHECK(empirical_risk(parabola.arch, r.at(0.0), parabola.data, LossKind::Squared) == doctest::Approx(0.64));

  Scalar falling(1.5);
  CHECK(restrict_nonincreasing(falling.seg, falling.arch, falling.data, LossKind::Squared).scale == 1.0);

  Scalar flat(0.3);
  flat.seg.end = flat.seg.start;
  CHECK(restrict_nonincreasing(flat.seg, flat.arch, flat.data, LossKind::Squared).scale == 1.0);

  CHECK(restrict_profile([](double t) { return (t - 0.25) * (t - 0.25); }) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(restrict_profile([](double t) { return t; }) >= 1e-10);
}

TEST_CASE("convex outer segment") {
  const Architecture a = make_arch(1, {2}, 1, Activation::identity());
  Matrix hidden(2, 1);
  hidden << 1, 1;
  Matrix up(1, 2), low(1, 2);
  up << 1, 0;
  low << 0, 1;
  const Params upper({hidden, up});
  const Params lower({hidden, low});
  const PathSegment seg = convex_outer_segment(upper, lower);
  CHECK(seg.kind == SegmentKind::Convex);
  const Dataset data{Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 1.0)};
  CHECK(is_path_constant(seg, a, data, LossKind::Squared, 101, 1e-12));

  Matrix low2(1, 2);
  low2 << 0, 3;
  const PathSegment quad = convex_outer_segment(upper, Params({hidden, low2}));
  const std::vector<double> prof = loss_profile(quad, a, data, LossKind::Squared, 11);
  for (std::size_t k = 0; k < prof.size(); ++k) {
    const double t = static_cast<double>(k) / 10.0;
    const double pred = 2.0 * (1.0 - t) + 6.0 * t;
    CHECK(prof[k] == doctest::Approx((pred - 1.0) * (pred - 1.0)).epsilon(1e-12));
  }
  const PathSegment back = convex_outer_segment(Params({hidden, low2}), upper);
  const std::vector<double> prof_back = loss_profile(back, a, data, LossKind::Squared, 11);
  for (std::size_t k = 0; k < prof.size(); ++k) CHECK(prof_back[k] == doctest::Approx(prof[10 - k]).epsilon(1e-12));

  CHECK_THROWS_AS(convex_outer_segment(upper, Params({2.0 * hidden, low})), StructuralError);
}

TEST_CASE("relation algebra on random constant segments") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    Architecture a;
    Dataset data;
    const PathSegment seg = random_constant_segment(rng, a, data);
    const PathSegment zero{seg.start, seg.start, SegmentKind::Constant, 1.0, ""};
    CHECK(is_path_constant(zero, a, data, LossKind::Squared, 101, 1e-8));
    CHECK(is_path_constant(seg, a, data, LossKind::Squared, 201, 1e-8));
    CHECK(is_path_constant(reversed(seg), a, data, LossKind::Squared, 201, 1e-8));
    CHECK(is_path_convex(seg, a, data, LossKind::Squared, 201, 1e-8));
  }
}

TEST_CASE("chained constant segments stay constant") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Architecture a = make_arch(2, {10 + uniform_int(rng, 0, 3), 4}, 1, pick_activation(rng));
    const Dataset data = sample_data(a, 2, rng);
    const BlockResult res = to_block(a, random_params(a, rng), data, {}, BlockSide::Lower);
    REQUIRE(res.steps.size() >= 2);
    CompositePath path;
    for (const ReparamStep& step : res.steps) {
      path.segments.push_back({step.before, step.after, SegmentKind::Constant, 1.0, step.label});
    }
    CHECK(path.max_discontinuity() == 0.0);
    const VerificationReport report = verify_path(path, a, data, LossKind::Squared, {}, 201);
    const double l0 = report.initial_loss;
    double worst = 0.0;
    for (const auto& [t, loss] : report.profile) worst = std::max(worst, std::abs(loss - l0));
    CHECK(worst <= 1e-8 * (1.0 + std::abs(l0)));
    CHECK(report.pass);
  }
}

TEST_CASE("escape path on the shallow identity instance") {
  std::mt19937_64 rng(7);
  const Architecture a = make_arch(2, {8}, 1, Activation::identity());
  const Dataset data = sample_data(a, 3, rng);
  const Params start = random_params(a, rng);
  const OracleResult target = outer_layer_solve(a, random_params(a, rng), data, LossKind::Squared);
  const CompositePath path = build_escape_path(a, start, target.params, data, LossKind::Squared, {});
  const VerificationReport report = verify_path(path, a, data, LossKind::Squared, {});
  CHECK(report.pass);
  CHECK(std::abs(report.final_loss - target.achieved_risk) <= 1e-6);
  CHECK(max_abs_diff(path.segments.back().finish(), target.params) == 0.0);
  CHECK(max_abs_diff(path.segments.front().start, start) == 0.0);
}

TEST_CASE("escape path through two relu layers") {
  std::mt19937_64 rng(8);
  const Architecture a = make_arch(2, {32, 32}, 1, Activation::relu());
  const Dataset data = sample_data(a, 3, rng);
  const Params start = random_params(a, rng, 0.3);
  const OracleResult target = outer_layer_solve(a, random_params(a, rng, 0.3), data, LossKind::Squared);
  const CompositePath path = build_escape_path(a, start, target.params, data, LossKind::Squared, {});
  const VerificationReport report = verify_path(path, a, data, LossKind::Squared, {}, 2001);
  CHECK(report.flags.monotone);
  CHECK(report.pass);
  CHECK(report.final_loss <= std::min(report.initial_loss, target.achieved_risk) + 1e-9);
}

TEST_CASE("escape paths on random instances end no higher than either endpoint") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 15; ++trial) {
    const Index n = uniform_int(rng, 1, 3);
    const Index w = 2 * (n + 1) + uniform_int(rng, 0, 2);
    const Architecture a = make_arch(uniform_int(rng, 1, 3), {w}, 1, pick_activation(rng));
    const Dataset data = sample_data(a, n, rng);
    const LossKind loss = trial % 2 ? LossKind::Squared : LossKind::Absolute;
    const ConstraintSpec spec{0.2, 0.2, 1.0};
    Params start = random_params(a, rng);
    Params target = random_params(a, rng);
    if (!is_feasible(start, spec)) start *= 1.0 / constraint_value(start, spec);
    if (!is_feasible(target, spec)) target *= 1.0 / constraint_value(target, spec);
    const CompositePath path = build_escape_path(a, start, target, data, loss, spec);
    const VerificationReport report = verify_path(path, a, data, loss, spec, 501);
    CHECK(report.pass);
    const double lt = empirical_risk(a, target, data, loss);
    CHECK(report.final_loss <= std::min(report.initial_loss, lt) + 1e-9 * (1 + lt));
  }
}

TEST_CASE("escape between equal global minima is flat") {
  std::mt19937_64 rng(10);
  const Architecture a = make_arch(2, {8}, 1, Activation::relu());
  const Dataset data = sample_data(a, 3, rng);
  const OracleResult m1 = outer_layer_solve(a, random_params(a, rng), data, LossKind::Squared);
  const CompositePath same = build_escape_path(a, m1.params, m1.params, data, LossKind::Squared, {});
  for (const PathSegment& seg : same.segments) {
    CHECK(is_path_constant(seg, a, data, LossKind::Squared, 201, 1e-8));
  }
  const OracleResult m2 = outer_layer_solve(a, random_params(a, rng), data, LossKind::Squared);
  REQUIRE(m1.rank == 3);
  REQUIRE(m2.rank == 3);
  const CompositePath between = build_escape_path(a, m1.params, m2.params, data, LossKind::Squared, {});
  const VerificationReport report = verify_path(between, a, data, LossKind::Squared, {}, 501);
  for (const auto& [t, loss] : report.profile) CHECK(loss <= 1e-9);
}

TEST_CASE("escape refusals") {
  std::mt19937_64 rng(11);
  const Architecture narrow = make_arch(2, {6}, 1, Activation::identity());
  const Dataset data = sample_data(narrow, 3, rng);
  const Params p = random_params(narrow, rng);
  CHECK_THROWS_AS(build_escape_path(narrow, p, p, data, LossKind::Squared, {}), CapabilityError);

  const Architecture a = make_arch(2, {8}, 1, Activation::relu());
  const Params q = 10.0 * random_params(a, rng);
  const Dataset d = sample_data(a, 3, rng);
  CHECK_THROWS_AS(build_escape_path(a, q, q, d, LossKind::Squared, {1.0, 1.0, 1.0}), PreconditionError);
  EscapeOptions linear;
  linear.linear = true;
  CHECK_THROWS_AS(build_escape_path(a, q, q, d, LossKind::Squared, {}, linear), PreconditionError);

  const Architecture deep = make_arch(2, {8, 8}, 1, Activation::identity());
  const Dataset dd = sample_data(deep, 3, rng);
  const Params r = random_params(deep, rng);
  CHECK_THROWS_AS(build_escape_path(deep, r, r, dd, LossKind::Squared, {}), CapabilityError);
  const CompositePath path = build_escape_path(deep, r, random_params(deep, rng), dd, LossKind::Squared, {}, linear);
  CHECK(verify_path(path, deep, dd, LossKind::Squared, {}).pass);
}

TEST_CASE("required width") {
  CHECK(required_width(1, 1, 1, false) == 4);
  for (Index n = 1; n < 6; ++n) CHECK(required_width(1, n, 1, false) == 2 * (n + 1));
  for (Index l = 1; l < 5; ++l) CHECK(required_width(2, 3, l, true) == 16);
  CHECK(required_width(1, 3, 2, false) == 32);
  CHECK_THROWS_AS(required_width(0, 3, 2, false), ParameterError);
}
