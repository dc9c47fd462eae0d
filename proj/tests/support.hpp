#pragma once

#include <random>
#include <vector>

#include "unconfined/netcore.hpp"
#include "unconfined/objective.hpp"

namespace testing_support {

using namespace unconfined;

inline Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix M(rows, cols);
  for (Index i = 0; i < M.size(); ++i) M.data()[i] = normal(rng);
  return M;
}

inline Index uniform_int(std::mt19937_64& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Activation pick_activation(std::mt19937_64& rng) {
  switch (uniform_int(rng, 0, 3)) {
    case 0:
      return Activation::identity();
    case 1:
      return Activation::relu();
    case 2:
      return Activation::leaky_relu(0.1);
    default:
      return Activation::sigmoid();
  }
}

inline Dataset sample_data(const Architecture& arch, Index n, std::mt19937_64& rng) {
  return {gaussian(arch.input_dim(), n, rng), gaussian(arch.output_dim(), n, rng)};
}

inline Architecture make_arch(Index d, std::vector<Index> hidden, Index m, Activation act) {
  std::vector<Index> dims{d};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(m);
  return Architecture(dims, std::vector<Activation>(hidden.size(), act));
}

inline std::vector<Permutation> random_perms(const Architecture& arch, std::mt19937_64& rng) {
  std::vector<Permutation> perms;
  for (Index j = 1; j <= arch.depth(); ++j) {
    Permutation p = identity_permutation(arch.width(j));
    std::shuffle(p.begin(), p.end(), rng);
    perms.push_back(p);
  }
  return perms;
}

inline double max_abs(const Matrix& M) { return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff(); }

}  // namespace testing_support
