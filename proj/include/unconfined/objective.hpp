#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "unconfined/netcore.hpp"

namespace unconfined {

enum class LossKind { Squared, Absolute, Logistic, Hinge };

std::string loss_name(LossKind kind);
/// Accepts "squared", "absolute", "logistic", "hinge"; ParameterError otherwise.
LossKind parse_loss(const std::string& name);

/// l(a, b) for one prediction/label pair.
double pointwise_loss(LossKind kind, const Vector& a, const Vector& b);

/// A subgradient of a -> l(a, b).
Vector loss_subgradient(LossKind kind, const Vector& a, const Vector& b);

/// Σ_i l(g_Θ[x_i], y_i).
double empirical_risk(const Architecture& arch, const Params& params, const Dataset& data,
                      LossKind kind);

/// Same sum, given the predictions directly (m x n).
double risk_of_predictions(LossKind kind, const Matrix& predictions, const Matrix& Y);

constexpr double kInf = std::numeric_limits<double>::infinity();

/// max over rows of (Σ_j |M_aj|^q)^{1/q}; q = ∞ gives the largest absolute entry.
template <typename Derived>
double rowwise_lq_norm(const Eigen::MatrixBase<Derived>& M, double q) {
  if (!(q > 0.0)) throw ParameterError("rowwise_lq_norm needs q > 0");
  if (M.size() == 0) return 0.0;
  if (std::isinf(q)) return M.cwiseAbs().maxCoeff();
  if (q == 1.0) return M.cwiseAbs().rowwise().sum().maxCoeff();
  double best = 0.0;
  for (Index a = 0; a < M.rows(); ++a) {
    double s = 0.0;
    for (Index j = 0; j < M.cols(); ++j) s += std::pow(std::abs(M(a, j)), q);
    best = std::max(best, std::pow(s, 1.0 / q));
  }
  return best;
}

/// ℓq quasi-norm of a vector (q = ∞ allowed).
template <typename Derived>
double lq_norm(const Eigen::MatrixBase<Derived>& v, double q) {
  if (!(q > 0.0)) throw ParameterError("lq_norm needs q > 0");
  if (v.size() == 0) return 0.0;
  if (std::isinf(q)) return v.cwiseAbs().maxCoeff();
  if (q == 1.0) return v.cwiseAbs().sum();
  double s = 0.0;
  for (Index i = 0; i < v.size(); ++i) s += std::pow(std::abs(v(i)), q);
  return std::pow(s, 1.0 / q);
}

/// r(Θ) = max{a_r max_{j>=1} ||Θ^j||_1, b_r ||Θ^0||_q}; a_r = b_r = 0 means unconstrained.
struct ConstraintSpec {
  double a_r = 0.0;
  double b_r = 0.0;
  double q = 1.0;

  static ConstraintSpec unconstrained() { return {}; }
  bool is_unconstrained() const { return a_r == 0.0 && b_r == 0.0; }
  void validate() const;
};

double constraint_value(const Params& params, const ConstraintSpec& spec);

/// constraint_value <= 1 + tol.
bool is_feasible(const Params& params, const ConstraintSpec& spec, double tol = 1e-9);

}  // namespace unconfined
