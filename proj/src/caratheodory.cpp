#include "unconfined/caratheodory.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "unconfined/objective.hpp"

namespace unconfined {

Index support_size(const Vector& weights) { return (weights.array() != 0.0).count(); }

namespace {

double lq_sum(const Vector& w, double q) {
  double s = 0.0;
  for (Index i = 0; i < w.size(); ++i) s += q == 1.0 ? std::abs(w(i)) : std::pow(std::abs(w(i)), q);
  return s;
}

void zero_small(Vector& w) {
  const double cut = 1e-12 * std::max(1.0, w.cwiseAbs().maxCoeff());
  for (Index i = 0; i < w.size(); ++i) {
    if (std::abs(w(i)) <= cut) w(i) = 0.0;
  }
}

}  // namespace

Vector reduce_combination(const Matrix& generators, const Vector& weights, double q, double tol) {
  if (!(q > 0.0 && q <= 1.0)) throw ParameterError("reduce_combination needs q in (0, 1]");
  if (generators.cols() != weights.size()) {
    throw StructuralError("one weight per generator column required");
  }
  if (!generators.allFinite() || !weights.allFinite()) {
    throw DomainError("reduce_combination needs finite inputs");
  }
  const double norm_in = lq_norm(weights, q);
  if (norm_in > 1.0 + tol) {
    std::ostringstream os;
    os << "weight norm " << norm_in << " exceeds 1";
    throw PreconditionError(os.str());
  }

  const Index r = generators.rows();
  const Index keep = r + 1;
  if (support_size(weights) <= keep) return weights;

  Vector w = weights;
  zero_small(w);
  std::vector<Index> active;
  Matrix sub(r, keep);
  for (;;) {
    active.clear();
    for (Index i = 0; i < w.size(); ++i) {
      if (w(i) != 0.0) active.push_back(i);
    }
    if (static_cast<Index>(active.size()) <= keep) break;

    for (Index c = 0; c < keep; ++c) sub.col(c) = generators.col(active[static_cast<std::size_t>(c)]);
    Vector gamma;
    if (r == 0) {
      gamma = Vector::Unit(keep, 0);
    } else {
      Eigen::JacobiSVD<Matrix> svd(sub, Eigen::ComputeFullV);
      gamma = svd.matrixV().col(keep - 1);
    }

    // Largest steps in both directions that keep every active sign.
    double up = std::numeric_limits<double>::infinity();
    double down = -std::numeric_limits<double>::infinity();
    Index up_at = -1;
    Index down_at = -1;
    for (Index c = 0; c < keep; ++c) {
      const double g = gamma(c);
      if (g == 0.0) continue;
      const double wj = w(active[static_cast<std::size_t>(c)]);
      const double ratio = wj / g;
      if ((wj > 0.0) == (g > 0.0)) {
        if (ratio < up) {
          up = ratio;
          up_at = c;
        }
      } else if (ratio > down) {
        down = ratio;
        down_at = c;
      }
    }

    auto stepped = [&](double theta, Index block) {
      Vector out = w;
      for (Index c = 0; c < keep; ++c) {
        out(active[static_cast<std::size_t>(c)]) -= theta * gamma(c);
      }
      out(active[static_cast<std::size_t>(block)]) = 0.0;
      return out;
    };

    Vector next;
    if (up_at < 0) {
      next = stepped(down, down_at);
    } else if (down_at < 0) {
      next = stepped(up, up_at);
    } else {
      Vector a = stepped(up, up_at);
      Vector b = stepped(down, down_at);
      next = lq_sum(b, q) < lq_sum(a, q) ? b : a;
    }
    w = next;
    zero_small(w);
  }

  const double norm_out = lq_norm(w, q);
  if (norm_out > 1.0 + tol) {
    std::ostringstream os;
    os << "reduced weights have norm " << norm_out << " for q = " << q;
    throw ReductionError(os.str());
  }
  return w;
}

}  // namespace unconfined
