#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "unconfined/errors.hpp"

namespace unconfined {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Elementwise activation applied after every hidden layer.
struct Activation {
  enum class Kind { Identity, Relu, LeakyRelu, Polynomial, Sigmoid };

  Kind kind = Kind::Identity;
  double c = 0.0;  // slope (leaky) or coefficient (polynomial)
  double k = 1.0;  // polynomial exponent

  static Activation identity() { return {Kind::Identity, 0.0, 1.0}; }
  static Activation relu() { return {Kind::Relu, 0.0, 1.0}; }
  static Activation sigmoid() { return {Kind::Sigmoid, 0.0, 1.0}; }
  static Activation leaky_relu(double slope);
  static Activation polynomial(double coefficient, double exponent);

  bool is_identity() const { return kind == Kind::Identity; }
  std::string name() const;

  /// Scalar evaluation; throws DomainError for a fractional power of a negative number.
  double operator()(double b) const {
    switch (kind) {
      case Kind::Identity:
        return b;
      case Kind::Relu:
        return b > 0.0 ? b : 0.0;
      case Kind::LeakyRelu:
        return std::max(0.0, b) + std::min(0.0, c * b);
      case Kind::Polynomial:
        if (b < 0.0 && k != std::floor(k)) {
          throw DomainError("polynomial activation: fractional exponent of a negative input");
        }
        return c * std::pow(b, k);
      case Kind::Sigmoid:
        return 1.0 / (1.0 + std::exp(-b));
    }
    return b;
  }

  friend bool operator==(const Activation&, const Activation&) = default;
};

/// Applies `act` entrywise. Accepts any dense Eigen expression.
template <typename Derived>
Matrix apply_activation(const Activation& act, const Eigen::MatrixBase<Derived>& m) {
  Matrix out = m;
  if (act.is_identity()) return out;
  for (Index j = 0; j < out.cols(); ++j) {
    for (Index i = 0; i < out.rows(); ++i) out(i, j) = act(out(i, j));
  }
  return out;
}

/// Layer sizes p^0..p^{l+1} and the activations of the l hidden layers.
struct Architecture {
  std::vector<Index> dims;
  std::vector<Activation> activations;

  Architecture() = default;
  Architecture(std::vector<Index> dims, std::vector<Activation> activations);

  /// Number of hidden layers l.
  Index depth() const { return static_cast<Index>(activations.size()); }
  Index input_dim() const { return dims.front(); }
  Index output_dim() const { return dims.back(); }
  /// p^j for j in 0..l+1.
  Index width(Index j) const { return dims[static_cast<std::size_t>(j)]; }
  /// min{p^1, ..., p^l}.
  Index min_width() const;
  bool all_identity() const;

  /// Throws StructuralError / ParameterError when the invariants do not hold.
  void validate() const;
};

/// The weight tuple (Θ^0, ..., Θ^l); Θ^j has shape p^{j+1} x p^j.
struct Params {
  std::vector<Matrix> layers;

  Params() = default;
  explicit Params(std::vector<Matrix> layers) : layers(std::move(layers)) {}

  static Params zeros(const Architecture& arch);

  Index depth() const { return static_cast<Index>(layers.size()) - 1; }
  Matrix& operator[](Index j) { return layers[static_cast<std::size_t>(j)]; }
  const Matrix& operator[](Index j) const { return layers[static_cast<std::size_t>(j)]; }
  Matrix& outer() { return layers.back(); }
  const Matrix& outer() const { return layers.back(); }

  bool same_shape(const Params& other) const;
  bool all_finite() const;
  Index parameter_count() const;

  Params& operator+=(const Params& other);
  Params& operator*=(double s);
  friend Params operator+(Params a, const Params& b) { return a += b; }
  friend Params operator-(const Params& a, const Params& b);
  friend Params operator*(double s, Params a) { return a *= s; }
  friend bool operator==(const Params& a, const Params& b);
};

/// max_j max_{ab} |A^j_{ab} - B^j_{ab}|; StructuralError if shapes differ.
double max_abs_diff(const Params& a, const Params& b);

/// (1 - t) a + t b, computed per entry.
Params lerp(const Params& a, const Params& b, double t);

/// Checks shapes against the architecture; throws StructuralError on mismatch.
void check_shapes(const Architecture& arch, const Params& params);

/// Samples as columns: X is d x n, Y is m x n.
struct Dataset {
  Matrix X;
  Matrix Y;

  Index samples() const { return X.cols(); }
  /// Throws StructuralError unless X/Y are consistent with `arch` and n >= 1.
  void validate(const Architecture& arch) const;
};

/// Θ^l f^l[Θ^{l-1} ... f^1[Θ^0 x]].
Vector forward(const Architecture& arch, const Params& params, const Vector& x);

/// Column-wise forward evaluation of a d x n input.
Matrix forward_batch(const Architecture& arch, const Params& params, const Matrix& X);

/// Activations of hidden layer j (1 <= j <= l) for the whole batch; j = 0 returns X.
Matrix hidden_activations(const Architecture& arch, const Params& params, const Matrix& X, Index j);

/// Entry u names the source unit that lands at position u.
using Permutation = std::vector<Index>;

Permutation identity_permutation(Index n);
bool is_permutation(const Permutation& p);

/// (Γ^j)_{uv} = (Θ^j)_{π^{j+1}[u] π^j[v]}. `hidden_perms[j-1]` permutes hidden
/// layer j; input and output coordinates stay fixed.
Params permute_hidden(const Architecture& arch, const Params& params,
                      const std::vector<Permutation>& hidden_perms);

/// Entries drawn i.i.d. from N(0, scale^2).
Params random_params(const Architecture& arch, std::mt19937_64& rng, double scale = 1.0);

}  // namespace unconfined
