#pragma once

#include <string>
#include <vector>

#include "unconfined/netcore.hpp"
#include "unconfined/objective.hpp"

namespace unconfined {

enum class BlockSide { Upper, Lower };

std::string side_name(BlockSide side);
BlockSide parse_side(const std::string& name);

/// Zero-pattern test for s-upper / s-lower block parameters (exact comparison with 0).
bool is_block(const Params& params, Index s, BlockSide side);

/// Positions of the block of size `size` inside a layer of width `width`.
std::vector<Index> block_positions(Index width, Index size, BlockSide side);

struct LayerPairResult {
  Matrix A;          // u x v, columns outside the target block are zero
  Matrix B;          // v x o, rows outside the target block are zero
  Permutation perm;  // perm[j] is the original unit placed at position j
};

/// A f(BC) = A' f(B'C) with every row of A' supported on the first (upper) or last
/// (lower) u(r+1) columns, where r = C.cols(). Row norms of A' (q_A) and B' (q_B) do
/// not grow. Returns A, B unchanged when v <= u(r+1).
LayerPairResult sparsify_layer_pair(const Matrix& A, const Matrix& B, const Matrix& C,
                                    const Activation& activation, double q_A, double q_B,
                                    BlockSide side, double tol = 1e-9);

/// One affine piece of a reparametrization: loss and feasibility are constant along
/// (1 - t) before + t after.
struct ReparamStep {
  Params before;
  Params after;
  Index layer_index = 0;
  Permutation perm;
  std::string label;
};

struct ToBlockOptions {
  /// Merge consecutive identity layers so the block factor is m(n+1) instead of m(n+1)^l.
  bool merge_linear = false;
  double tol = 1e-9;
};

struct BlockResult {
  Params params;
  std::vector<ReparamStep> steps;
  Index s = 0;
};

/// Block factor m(n+1)^l, or m(n+1) when merging identity layers.
Index block_factor(Index m, Index n, Index l, bool linear);

/// Brings `params` to an s-block parameter of the given side through a chain of
/// loss-constant, feasibility-preserving affine steps.
/// CapabilityError when a hidden layer is too narrow; PreconditionError when params are
/// infeasible, n = 0, or merge_linear is requested for non-identity activations.
BlockResult to_block(const Architecture& arch, const Params& params, const Dataset& data,
                     const ConstraintSpec& spec, BlockSide side, const ToBlockOptions& options = {});

/// upper' = (Θ^l, Θ^{l-1}+Γ^{l-1}, ..., Θ^0+Γ^0), lower' = (Γ^l, same hidden layers).
struct EmbeddedPair {
  Params upper;
  Params lower;
};

EmbeddedPair embed_sum_hidden(const Architecture& arch, const Params& upper, const Params& lower,
                              Index s);

/// (c1 Θ^l + c2 Γ^l, shared hidden layers); StructuralError if the hidden layers differ.
Params mix_block(const Params& upper_prime, const Params& lower_prime, double c1, double c2);

}  // namespace unconfined
