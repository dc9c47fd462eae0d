#include "unconfined/objective.hpp"

#include <algorithm>
#include <sstream>

namespace unconfined {

std::string loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::Squared:
      return "squared";
    case LossKind::Absolute:
      return "absolute";
    case LossKind::Logistic:
      return "logistic";
    case LossKind::Hinge:
      return "hinge";
  }
  return "unknown";
}

LossKind parse_loss(const std::string& name) {
  if (name == "squared") return LossKind::Squared;
  if (name == "absolute") return LossKind::Absolute;
  if (name == "logistic") return LossKind::Logistic;
  if (name == "hinge") return LossKind::Hinge;
  throw ParameterError("unknown loss '" + name + "'");
}

namespace {

void check_pair(LossKind kind, const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw StructuralError("prediction and label dimensions differ");
  if (kind == LossKind::Logistic || kind == LossKind::Hinge) {
    if (a.size() != 1) {
      throw StructuralError(loss_name(kind) + " loss needs a single output");
    }
    if (b(0) != 1.0 && b(0) != -1.0) {
      throw DomainError(loss_name(kind) + " loss needs labels in {-1, +1}");
    }
  }
  if (kind == LossKind::Logistic && !(std::abs(a(0)) < 1.0)) {
    std::ostringstream os;
    os << "logistic loss needs predictions in (-1, 1), got " << a(0);
    throw DomainError(os.str());
  }
}

}  // namespace

double pointwise_loss(LossKind kind, const Vector& a, const Vector& b) {
  check_pair(kind, a, b);
  switch (kind) {
    case LossKind::Squared:
      return (a - b).squaredNorm();
    case LossKind::Absolute:
      return (a - b).cwiseAbs().sum();
    case LossKind::Logistic:
      return -(1.0 + b(0)) * std::log1p(a(0)) - (1.0 - b(0)) * std::log1p(-a(0));
    case LossKind::Hinge:
      return std::max(0.0, 1.0 - a(0) * b(0));
  }
  return 0.0;
}

Vector loss_subgradient(LossKind kind, const Vector& a, const Vector& b) {
  check_pair(kind, a, b);
  switch (kind) {
    case LossKind::Squared:
      return 2.0 * (a - b);
    case LossKind::Absolute:
      return (a - b).unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
    case LossKind::Logistic: {
      Vector g(1);
      g(0) = -(1.0 + b(0)) / (1.0 + a(0)) + (1.0 - b(0)) / (1.0 - a(0));
      return g;
    }
    case LossKind::Hinge: {
      Vector g = Vector::Zero(1);
      if (1.0 - a(0) * b(0) > 0.0) g(0) = -b(0);
      return g;
    }
  }
  return Vector::Zero(a.size());
}

double risk_of_predictions(LossKind kind, const Matrix& predictions, const Matrix& Y) {
  if (predictions.rows() != Y.rows() || predictions.cols() != Y.cols()) {
    throw StructuralError("predictions and labels differ in shape");
  }
  double total = 0.0;
  for (Index i = 0; i < Y.cols(); ++i) {
    total += pointwise_loss(kind, predictions.col(i), Y.col(i));
  }
  return total;
}

double empirical_risk(const Architecture& arch, const Params& params, const Dataset& data,
                      LossKind kind) {
  data.validate(arch);
  return risk_of_predictions(kind, forward_batch(arch, params, data.X), data.Y);
}

void ConstraintSpec::validate() const {
  if (!(a_r >= 0.0) || !(b_r >= 0.0)) throw ParameterError("a_r and b_r must be nonnegative");
  if (!(q > 0.0)) throw ParameterError("constraint q must be positive");
}

double constraint_value(const Params& params, const ConstraintSpec& spec) {
  spec.validate();
  if (spec.is_unconstrained()) return 0.0;
  double hidden = 0.0;
  for (Index j = 1; j <= params.depth(); ++j) {
    hidden = std::max(hidden, rowwise_lq_norm(params[j], 1.0));
  }
  double first = spec.b_r == 0.0 ? 0.0 : spec.b_r * rowwise_lq_norm(params[0], spec.q);
  return std::max(spec.a_r == 0.0 ? 0.0 : spec.a_r * hidden, first);
}

bool is_feasible(const Params& params, const ConstraintSpec& spec, double tol) {
  if (!(tol >= 0.0)) throw ParameterError("feasibility tolerance must be nonnegative");
  return constraint_value(params, spec) <= 1.0 + tol;
}

}  // namespace unconfined
