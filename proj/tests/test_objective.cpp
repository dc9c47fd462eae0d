#include "doctest.h"
#include "support.hpp"

using namespace unconfined;
using namespace testing_support;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("pointwise losses") {
  CHECK(pointwise_loss(LossKind::Squared, vec({1, 2}), vec({1, 2})) == 0.0);
  CHECK(pointwise_loss(LossKind::Squared, vec({1, 2}), vec({0, 0})) == 5.0);
  CHECK(pointwise_loss(LossKind::Hinge, vec({1}), vec({1})) == 0.0);
  CHECK(pointwise_loss(LossKind::Hinge, vec({-1}), vec({1})) == 2.0);
  CHECK(pointwise_loss(LossKind::Absolute, vec({1, -2}), vec({0, 0})) == 3.0);
  CHECK(pointwise_loss(LossKind::Logistic, vec({0}), vec({1})) == 0.0);
  CHECK(pointwise_loss(LossKind::Logistic, vec({0.5}), vec({1})) == doctest::Approx(-2.0 * std::log(1.5)));
}

TEST_CASE("loss domains") {
  CHECK_THROWS_AS(pointwise_loss(LossKind::Logistic, vec({1.0}), vec({1})), DomainError);
  CHECK_THROWS_AS(pointwise_loss(LossKind::Logistic, vec({-1.5}), vec({1})), DomainError);
  CHECK_THROWS_AS(pointwise_loss(LossKind::Logistic, vec({0.2}), vec({0.5})), DomainError);
  CHECK_THROWS_AS(pointwise_loss(LossKind::Hinge, vec({0.2}), vec({2})), DomainError);
  CHECK_THROWS_AS(pointwise_loss(LossKind::Hinge, vec({0.2, 0.1}), vec({1, 1})), StructuralError);
  CHECK_THROWS_AS(pointwise_loss(LossKind::Squared, vec({0.2, 0.1}), vec({1})), StructuralError);
  CHECK(parse_loss("hinge") == LossKind::Hinge);
  CHECK_THROWS_AS(parse_loss("huber"), ParameterError);
}

TEST_CASE("losses are convex in the prediction") {
  std::mt19937_64 rng(17);
  for (LossKind kind : {LossKind::Squared, LossKind::Absolute, LossKind::Logistic, LossKind::Hinge}) {
    const bool scalar = kind == LossKind::Logistic || kind == LossKind::Hinge;
    double worst = -1.0;
    for (int trial = 0; trial < 500; ++trial) {
      const Index m = scalar ? 1 : uniform_int(rng, 1, 4);
      Vector a1 = gaussian(m, 1, rng);
      Vector a2 = gaussian(m, 1, rng);
      Vector b = gaussian(m, 1, rng);
      if (scalar) {
        b(0) = uniform(rng, 0, 1) < 0.5 ? -1.0 : 1.0;
        a1(0) = uniform(rng, -0.99, 0.99);
        a2(0) = uniform(rng, -0.99, 0.99);
      }
      const double t = uniform(rng, 0, 1);
      const double lhs = pointwise_loss(kind, t * a1 + (1 - t) * a2, b);
      const double rhs = t * pointwise_loss(kind, a1, b) + (1 - t) * pointwise_loss(kind, a2, b);
      worst = std::max(worst, lhs - rhs);
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("subgradient inequality") {
  std::mt19937_64 rng(19);
  for (LossKind kind : {LossKind::Squared, LossKind::Absolute, LossKind::Logistic, LossKind::Hinge}) {
    const bool scalar = kind == LossKind::Logistic || kind == LossKind::Hinge;
    for (int trial = 0; trial < 200; ++trial) {
      const Index m = scalar ? 1 : 3;
      Vector a = gaussian(m, 1, rng);
      Vector c = gaussian(m, 1, rng);
      Vector b = gaussian(m, 1, rng);
      if (scalar) {
        b(0) = trial % 2 ? 1.0 : -1.0;
        a(0) = uniform(rng, -0.95, 0.95);
        c(0) = uniform(rng, -0.95, 0.95);
      }
      const Vector g = loss_subgradient(kind, a, b);
      CHECK(pointwise_loss(kind, c, b) >= pointwise_loss(kind, a, b) + g.dot(c - a) - 1e-12);
    }
  }
}

TEST_CASE("empirical risk") {
  const Architecture a = make_arch(1, {1}, 1, Activation::identity());
  Params p({Matrix::Ones(1, 1), Matrix::Ones(1, 1)});
  Matrix X(1, 2);
  X << 1, 2;
  CHECK(empirical_risk(a, p, {X, Matrix::Zero(1, 2)}, LossKind::Squared) == 5.0);
  CHECK(empirical_risk(a, Params::zeros(a), {X, Matrix::Zero(1, 2)}, LossKind::Squared) == 0.0);

  std::mt19937_64 rng(23);
  const Architecture b = make_arch(3, {4, 2}, 2, Activation::relu());
  const Params q = random_params(b, rng);
  const Dataset one = sample_data(b, 1, rng);
  Dataset twice{Matrix(3, 2), Matrix(2, 2)};
  twice.X << one.X, one.X;
  twice.Y << one.Y, one.Y;
  CHECK(empirical_risk(b, q, twice, LossKind::Squared) == 2.0 * empirical_risk(b, q, one, LossKind::Squared));

  for (int trial = 0; trial < 30; ++trial) {
    const Dataset d1 = sample_data(b, uniform_int(rng, 1, 5), rng);
    const Dataset d2 = sample_data(b, uniform_int(rng, 1, 5), rng);
    Dataset both{Matrix(3, d1.samples() + d2.samples()), Matrix(2, d1.samples() + d2.samples())};
    both.X << d1.X, d2.X;
    both.Y << d1.Y, d2.Y;
    const double sum = empirical_risk(b, q, d1, LossKind::Absolute) + empirical_risk(b, q, d2, LossKind::Absolute);
    CHECK(std::abs(empirical_risk(b, q, both, LossKind::Absolute) - sum) <= 1e-12 * (1 + sum));
  }
}

TEST_CASE("row-wise norms") {
  Matrix M(2, 2);
  M << 1, -2, 0, 3;
  CHECK(rowwise_lq_norm(M, 1.0) == 3.0);
  Matrix V(2, 1);
  V << 0.5, -0.5;
  CHECK(rowwise_lq_norm(V, kInf) == 0.5);
  for (double q : {0.5, 1.0, 2.0, kInf}) CHECK(rowwise_lq_norm(Matrix::Zero(3, 2), q) == 0.0);
  CHECK(rowwise_lq_norm(M, 2.0) == doctest::Approx(std::sqrt(9.0)));
  CHECK(rowwise_lq_norm(M, 0.5) == doctest::Approx(std::pow(1.0 + std::sqrt(2.0), 2.0)));
  CHECK_THROWS_AS(rowwise_lq_norm(M, 0.0), ParameterError);
  CHECK_THROWS_AS(rowwise_lq_norm(M, -1.0), ParameterError);
}

TEST_CASE("row-wise norms grow with entry magnitudes") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 300; ++trial) {
    Matrix M = gaussian(uniform_int(rng, 1, 4), uniform_int(rng, 1, 4), rng);
    const double q = std::vector<double>{0.5, 1.0, 2.0, kInf}[static_cast<std::size_t>(trial % 4)];
    const double before = rowwise_lq_norm(M, q);
    const Index i = uniform_int(rng, 0, M.rows() - 1);
    const Index j = uniform_int(rng, 0, M.cols() - 1);
    M(i, j) += M(i, j) >= 0 ? uniform(rng, 0, 1) : -uniform(rng, 0, 1);
    CHECK(rowwise_lq_norm(M, q) >= before);
  }
}

TEST_CASE("constraint value and feasibility") {
  Matrix outer(1, 2);
  outer << 1, -2;
  Params p({(Matrix(2, 1) << 0.5, -0.5).finished(), outer});
  CHECK(constraint_value(p, ConstraintSpec::unconstrained()) == 0.0);
  CHECK(is_feasible(p, ConstraintSpec::unconstrained()));

  Matrix outer2(2, 2);
  outer2 << 1, -2, 0, 3;
  Params q({(Matrix(2, 1) << 0.5, -0.5).finished(), outer2});
  const ConstraintSpec spec{1.0 / 3.0, 2.0, kInf};
  CHECK(constraint_value(q, spec) == doctest::Approx(1.0).epsilon(1e-15));

  const ConstraintSpec only_a{1.0, 0.0, 1.0};
  Params doubled = q;
  doubled[1] *= 2.0;
  CHECK(constraint_value(doubled, only_a) == 2.0 * constraint_value(q, only_a));

  CHECK(constraint_value(q, {1.0, 0.0, 1.0}) == 3.0);
  CHECK_FALSE(is_feasible(q, {0.5, 0.0, 1.0}));
  CHECK_THROWS_AS((ConstraintSpec{-1.0, 0.0, 1.0}.validate()), ParameterError);
  CHECK_THROWS_AS((ConstraintSpec{1.0, 0.0, 0.0}.validate()), ParameterError);
}

TEST_CASE("boundary is feasible at zero tolerance") {
  Params p({Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 2.0)});
  CHECK(is_feasible(p, {0.5, 1.0, 1.0}, 0.0));
  CHECK_FALSE(is_feasible(p, {0.75, 0.0, 1.0}, 1e-9));
}
