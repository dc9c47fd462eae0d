#include "unconfined/globalmin.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace unconfined {

std::string method_name(OracleMethod method) {
  return method == OracleMethod::OuterSolve ? "outer_solve" : "brute_force";
}

namespace {

Matrix least_squares_outer(const Matrix& Z, const Matrix& Y, Index& rank) {
  const Matrix Zt = Z.transpose();
  Eigen::JacobiSVD<Matrix> svd(Zt, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  rank = svd.rank();
  return svd.solve(Y.transpose()).transpose();
}

// Risk of predictions W Z, or NaN when W Z leaves the loss domain.
double risk_or_nan(LossKind loss, const Matrix& W, const Matrix& Z, const Matrix& Y) {
  const Matrix P = W * Z;
  if (loss == LossKind::Logistic && !(P.cwiseAbs().maxCoeff() < 1.0)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return risk_of_predictions(loss, P, Y);
}

Matrix risk_subgradient(LossKind loss, const Matrix& W, const Matrix& Z, const Matrix& Y) {
  const Matrix P = W * Z;
  Matrix G = Matrix::Zero(W.rows(), W.cols());
  for (Index i = 0; i < Z.cols(); ++i) {
    G += loss_subgradient(loss, P.col(i), Y.col(i)) * Z.col(i).transpose();
  }
  return G;
}

}  // namespace

OracleResult outer_layer_solve(const Architecture& arch, const Params& inner, const Dataset& data,
                               LossKind loss) {
  check_shapes(arch, inner);
  data.validate(arch);
  const Matrix Z = hidden_activations(arch, inner, data.X, arch.depth());

  OracleResult out;
  out.method = OracleMethod::OuterSolve;
  out.params = inner;
  Matrix W = least_squares_outer(Z, data.Y, out.rank);

  if (loss == LossKind::Squared) {
    out.params.outer() = W;
    out.certificate = (Z * (Z.transpose() * W.transpose() - data.Y.transpose())).cwiseAbs().maxCoeff();
    out.achieved_risk = empirical_risk(arch, out.params, data, loss);
    return out;
  }

  if (loss == LossKind::Logistic || std::isnan(risk_or_nan(loss, W, Z, data.Y))) {
    W.setZero();
  }
  Matrix best = W;
  double best_risk = risk_or_nan(loss, W, Z, data.Y);
  double best_grad = std::numeric_limits<double>::infinity();
  const Index max_iter = 100000;
  Index k = 1;
  for (; k <= max_iter; ++k) {
    const Matrix G = risk_subgradient(loss, W, Z, data.Y);
    const double gnorm = G.norm();
    if (gnorm <= 1e-8) {
      best = W;
      best_risk = risk_or_nan(loss, W, Z, data.Y);
      best_grad = gnorm;
      break;
    }
    double step = 1.0 / std::sqrt(static_cast<double>(k));
    Matrix candidate = W - (step / gnorm) * G;
    double risk = risk_or_nan(loss, candidate, Z, data.Y);
    for (int halving = 0; std::isnan(risk) && halving < 60; ++halving) {
      step *= 0.5;
      candidate = W - (step / gnorm) * G;
      risk = risk_or_nan(loss, candidate, Z, data.Y);
    }
    if (std::isnan(risk)) break;
    W = std::move(candidate);
    if (risk < best_risk) {
      best_risk = risk;
      best = W;
      best_grad = risk_subgradient(loss, W, Z, data.Y).norm();
    }
  }
  out.params.outer() = best;
  out.iterations = std::min(k, max_iter);
  out.certificate = std::isinf(best_grad) ? risk_subgradient(loss, best, Z, data.Y).norm() : best_grad;
  out.achieved_risk = empirical_risk(arch, out.params, data, loss);
  return out;
}

namespace {

// Allocation-free evaluation for the grid search.
class GridEvaluator {
 public:
  GridEvaluator(const Architecture& arch, const Dataset& data, LossKind loss)
      : arch_(arch), data_(data), loss_(loss) {
    for (Index j = 0; j <= arch.depth(); ++j) {
      buffers_.push_back(Matrix::Zero(arch.width(j + 1), data.samples()));
    }
  }

  double risk(const Params& p) {
    const Matrix* h = &data_.X;
    for (Index j = 0; j <= arch_.depth(); ++j) {
      Matrix& next = buffers_[static_cast<std::size_t>(j)];
      next.noalias() = p[j].lazyProduct(*h);
      if (j < arch_.depth()) {
        const Activation& act = arch_.activations[static_cast<std::size_t>(j)];
        if (!act.is_identity()) {
          for (Index c = 0; c < next.cols(); ++c) {
            for (Index r = 0; r < next.rows(); ++r) next(r, c) = act(next(r, c));
          }
        }
      }
      h = &next;
    }
    const Matrix& P = *h;
    const Matrix& Y = data_.Y;
    double total = 0.0;
    for (Index i = 0; i < P.cols(); ++i) {
      switch (loss_) {
        case LossKind::Squared:
          for (Index r = 0; r < P.rows(); ++r) total += (P(r, i) - Y(r, i)) * (P(r, i) - Y(r, i));
          break;
        case LossKind::Absolute:
          for (Index r = 0; r < P.rows(); ++r) total += std::abs(P(r, i) - Y(r, i));
          break;
        case LossKind::Logistic: {
          const double a = P(0, i);
          const double b = Y(0, i);
          if (!(std::abs(a) < 1.0)) throw DomainError("logistic prediction outside (-1, 1)");
          total += -(1.0 + b) * std::log1p(a) - (1.0 - b) * std::log1p(-a);
          break;
        }
        case LossKind::Hinge:
          total += std::max(0.0, 1.0 - P(0, i) * Y(0, i));
          break;
      }
    }
    return total;
  }

 private:
  const Architecture& arch_;
  const Dataset& data_;
  LossKind loss_;
  std::vector<Matrix> buffers_;
};

}  // namespace

OracleResult brute_force_min(const Architecture& arch, const Dataset& data, LossKind loss,
                             const ConstraintSpec& spec, const BruteForceOptions& options) {
  data.validate(arch);
  if (options.resolution < 1) throw ParameterError("brute-force resolution must be at least 1");
  if (!(options.bound >= 0.0)) throw ParameterError("brute-force bound must be nonnegative");
  Params p = Params::zeros(arch);
  const Index count = p.parameter_count();
  if (count > 8) {
    std::ostringstream os;
    os << "brute force is limited to 8 parameters, network has " << count;
    throw CapabilityError(os.str());
  }
  const double points = std::pow(static_cast<double>(options.resolution), static_cast<double>(count));
  if (points > options.max_points) {
    std::ostringstream os;
    os << "brute-force grid has " << points << " points, limit is " << options.max_points;
    throw CapabilityError(os.str());
  }
  if (loss == LossKind::Logistic || loss == LossKind::Hinge) {
    for (Index i = 0; i < data.samples(); ++i) {
      const double y = data.Y(0, i);
      if (y != 1.0 && y != -1.0) throw DomainError(loss_name(loss) + " loss needs labels in {-1, +1}");
    }
  }

  std::vector<double*> slots;
  for (Matrix& m : p.layers) {
    for (Index i = 0; i < m.size(); ++i) slots.push_back(m.data() + i);
  }
  std::vector<double> values(static_cast<std::size_t>(options.resolution));
  for (Index k = 0; k < options.resolution; ++k) {
    values[static_cast<std::size_t>(k)] =
        options.resolution == 1
            ? 0.0
            : -options.bound + 2.0 * options.bound * static_cast<double>(k) /
                                   static_cast<double>(options.resolution - 1);
  }

  GridEvaluator eval(arch, data, loss);
  std::vector<Index> digits(slots.size(), 0);
  for (double* s : slots) *s = values[0];
  bool found = false;
  double best_risk = std::numeric_limits<double>::infinity();
  Params best = p;
  for (;;) {
    if (is_feasible(p, spec)) {
      try {
        const double r = eval.risk(p);
        if (r < best_risk) {
          best_risk = r;
          best = p;
          found = true;
        }
      } catch (const DomainError&) {
      }
    }
    std::size_t pos = 0;
    while (pos < digits.size()) {
      if (++digits[pos] < options.resolution) {
        *slots[pos] = values[static_cast<std::size_t>(digits[pos])];
        break;
      }
      digits[pos] = 0;
      *slots[pos] = values[0];
      ++pos;
    }
    if (pos == digits.size()) break;
  }
  if (!found) throw PreconditionError("no feasible grid point");

  OracleResult out;
  out.method = OracleMethod::BruteForce;
  out.params = best;
  out.achieved_risk = empirical_risk(arch, best, data, loss);
  out.certificate = options.resolution > 1 ? 2.0 * options.bound / static_cast<double>(options.resolution - 1) : 0.0;
  out.rank = -1;
  return out;
}

}  // namespace unconfined
