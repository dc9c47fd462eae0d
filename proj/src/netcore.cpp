#include "unconfined/netcore.hpp"

#include <algorithm>
#include <sstream>

namespace unconfined {

Activation Activation::leaky_relu(double slope) {
  if (!(slope > 0.0 && slope < 1.0)) {
    throw ParameterError("leaky_relu slope must lie in (0, 1)");
  }
  return {Kind::LeakyRelu, slope, 1.0};
}

Activation Activation::polynomial(double coefficient, double exponent) {
  if (!(coefficient > 0.0)) throw ParameterError("polynomial coefficient must be positive");
  if (!(exponent >= 1.0)) throw ParameterError("polynomial exponent must be at least 1");
  return {Kind::Polynomial, coefficient, exponent};
}

std::string Activation::name() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Identity:
      return "identity";
    case Kind::Relu:
      return "relu";
    case Kind::Sigmoid:
      return "sigmoid";
    case Kind::LeakyRelu:
      os << "leaky_relu(" << c << ")";
      return os.str();
    case Kind::Polynomial:
      os << "polynomial(" << c << ", " << k << ")";
      return os.str();
  }
  return "unknown";
}

Architecture::Architecture(std::vector<Index> d, std::vector<Activation> acts)
    : dims(std::move(d)), activations(std::move(acts)) {
  validate();
}

Index Architecture::min_width() const {
  Index w = dims[1];
  for (Index j = 1; j <= depth(); ++j) w = std::min(w, width(j));
  return w;
}

bool Architecture::all_identity() const {
  return std::all_of(activations.begin(), activations.end(),
                     [](const Activation& a) { return a.is_identity(); });
}

void Architecture::validate() const {
  if (dims.size() < 3) {
    throw StructuralError("architecture needs input, output and at least one hidden layer");
  }
  if (activations.size() + 2 != dims.size()) {
    throw StructuralError("architecture needs exactly one activation per hidden layer");
  }
  for (Index p : dims) {
    if (p < 1) throw StructuralError("every layer dimension must be at least 1");
  }
  for (const Activation& a : activations) {
    if (a.kind == Activation::Kind::LeakyRelu && !(a.c > 0.0 && a.c < 1.0)) {
      throw ParameterError("leaky_relu slope must lie in (0, 1)");
    }
    if (a.kind == Activation::Kind::Polynomial && (!(a.c > 0.0) || !(a.k >= 1.0))) {
      throw ParameterError("polynomial activation needs c > 0 and k >= 1");
    }
  }
}

Params Params::zeros(const Architecture& arch) {
  Params p;
  p.layers.reserve(static_cast<std::size_t>(arch.depth() + 1));
  for (Index j = 0; j <= arch.depth(); ++j) {
    p.layers.push_back(Matrix::Zero(arch.width(j + 1), arch.width(j)));
  }
  return p;
}

bool Params::same_shape(const Params& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t j = 0; j < layers.size(); ++j) {
    if (layers[j].rows() != other.layers[j].rows() || layers[j].cols() != other.layers[j].cols()) {
      return false;
    }
  }
  return true;
}

bool Params::all_finite() const {
  return std::all_of(layers.begin(), layers.end(), [](const Matrix& m) { return m.allFinite(); });
}

Index Params::parameter_count() const {
  Index n = 0;
  for (const Matrix& m : layers) n += m.size();
  return n;
}

Params& Params::operator+=(const Params& other) {
  if (!same_shape(other)) throw StructuralError("parameter tuples differ in shape");
  for (std::size_t j = 0; j < layers.size(); ++j) layers[j] += other.layers[j];
  return *this;
}

Params& Params::operator*=(double s) {
  for (Matrix& m : layers) m *= s;
  return *this;
}

Params operator-(const Params& a, const Params& b) {
  if (!a.same_shape(b)) throw StructuralError("parameter tuples differ in shape");
  Params out = a;
  for (std::size_t j = 0; j < out.layers.size(); ++j) out.layers[j] -= b.layers[j];
  return out;
}

bool operator==(const Params& a, const Params& b) {
  if (!a.same_shape(b)) return false;
  for (std::size_t j = 0; j < a.layers.size(); ++j) {
    if (a.layers[j] != b.layers[j]) return false;
  }
  return true;
}

double max_abs_diff(const Params& a, const Params& b) {
  if (!a.same_shape(b)) throw StructuralError("parameter tuples differ in shape");
  double d = 0.0;
  for (std::size_t j = 0; j < a.layers.size(); ++j) {
    if (a.layers[j].size() == 0) continue;
    d = std::max(d, (a.layers[j] - b.layers[j]).cwiseAbs().maxCoeff());
  }
  return d;
}

Params lerp(const Params& a, const Params& b, double t) {
  if (!a.same_shape(b)) throw StructuralError("parameter tuples differ in shape");
  Params out = a;
  for (std::size_t j = 0; j < out.layers.size(); ++j) {
    out.layers[j] = (1.0 - t) * a.layers[j] + t * b.layers[j];
  }
  return out;
}

void check_shapes(const Architecture& arch, const Params& params) {
  if (params.depth() != arch.depth()) {
    std::ostringstream os;
    os << "parameter tuple has " << params.layers.size() << " matrices, architecture needs "
       << arch.depth() + 1;
    throw StructuralError(os.str());
  }
  for (Index j = 0; j <= arch.depth(); ++j) {
    const Matrix& m = params[j];
    if (m.rows() != arch.width(j + 1) || m.cols() != arch.width(j)) {
      std::ostringstream os;
      os << "layer " << j << " has shape " << m.rows() << "x" << m.cols() << ", expected "
         << arch.width(j + 1) << "x" << arch.width(j);
      throw StructuralError(os.str());
    }
  }
}

void Dataset::validate(const Architecture& arch) const {
  if (X.cols() < 1) throw StructuralError("dataset needs at least one sample");
  if (X.cols() != Y.cols()) throw StructuralError("X and Y have different sample counts");
  if (X.rows() != arch.input_dim()) throw StructuralError("X row count differs from input dimension");
  if (Y.rows() != arch.output_dim()) throw StructuralError("Y row count differs from output dimension");
}

Matrix hidden_activations(const Architecture& arch, const Params& params, const Matrix& X, Index j) {
  check_shapes(arch, params);
  if (X.rows() != arch.input_dim()) throw StructuralError("input has the wrong dimension");
  if (j < 0 || j > arch.depth()) throw ParameterError("hidden layer index out of range");
  Matrix h = X;
  for (Index v = 1; v <= j; ++v) {
    h = apply_activation(arch.activations[static_cast<std::size_t>(v - 1)], params[v - 1] * h);
  }
  return h;
}

Matrix forward_batch(const Architecture& arch, const Params& params, const Matrix& X) {
  return params.outer() * hidden_activations(arch, params, X, arch.depth());
}

Vector forward(const Architecture& arch, const Params& params, const Vector& x) {
  return forward_batch(arch, params, x);
}

Permutation identity_permutation(Index n) {
  Permutation p(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
  return p;
}

bool is_permutation(const Permutation& p) {
  std::vector<bool> seen(p.size(), false);
  for (Index v : p) {
    if (v < 0 || static_cast<std::size_t>(v) >= p.size() || seen[static_cast<std::size_t>(v)]) {
      return false;
    }
    seen[static_cast<std::size_t>(v)] = true;
  }
  return true;
}

Params permute_hidden(const Architecture& arch, const Params& params,
                      const std::vector<Permutation>& hidden_perms) {
  check_shapes(arch, params);
  const Index l = arch.depth();
  if (static_cast<Index>(hidden_perms.size()) != l) {
    throw StructuralError("need one permutation per hidden layer");
  }
  std::vector<Permutation> perms;
  perms.push_back(identity_permutation(arch.input_dim()));
  for (Index j = 1; j <= l; ++j) {
    const Permutation& p = hidden_perms[static_cast<std::size_t>(j - 1)];
    if (static_cast<Index>(p.size()) != arch.width(j) || !is_permutation(p)) {
      std::ostringstream os;
      os << "permutation for hidden layer " << j << " must be a permutation of length "
         << arch.width(j);
      throw StructuralError(os.str());
    }
    perms.push_back(p);
  }
  perms.push_back(identity_permutation(arch.output_dim()));

  Params out = params;
  for (Index j = 0; j <= l; ++j) {
    const Permutation& rows = perms[static_cast<std::size_t>(j + 1)];
    const Permutation& cols = perms[static_cast<std::size_t>(j)];
    const Matrix& src = params[j];
    Matrix& dst = out[j];
    for (Index v = 0; v < src.cols(); ++v) {
      for (Index u = 0; u < src.rows(); ++u) {
        dst(u, v) = src(rows[static_cast<std::size_t>(u)], cols[static_cast<std::size_t>(v)]);
      }
    }
  }
  return out;
}

Params random_params(const Architecture& arch, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Params p = Params::zeros(arch);
  for (Matrix& m : p.layers) {
    for (Index j = 0; j < m.cols(); ++j) {
      for (Index i = 0; i < m.rows(); ++i) m(i, j) = normal(rng);
    }
  }
  return p;
}

}  // namespace unconfined
