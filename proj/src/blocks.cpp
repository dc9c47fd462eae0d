#include "unconfined/blocks.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "unconfined/caratheodory.hpp"

namespace unconfined {

std::string side_name(BlockSide side) { return side == BlockSide::Upper ? "upper" : "lower"; }

BlockSide parse_side(const std::string& name) {
  if (name == "upper") return BlockSide::Upper;
  if (name == "lower") return BlockSide::Lower;
  throw ParameterError("unknown block side '" + name + "'");
}

namespace {

bool zero_outside(const Matrix& M, Index row_keep, Index col_keep, BlockSide side) {
  // row_keep / col_keep: how many trailing (lower) or leading (upper) indices may be nonzero.
  const Index r0 = side == BlockSide::Upper ? row_keep : 0;
  const Index r1 = side == BlockSide::Upper ? M.rows() : M.rows() - row_keep;
  const Index c0 = side == BlockSide::Upper ? col_keep : 0;
  const Index c1 = side == BlockSide::Upper ? M.cols() : M.cols() - col_keep;
  for (Index j = 0; j < M.cols(); ++j) {
    for (Index i = 0; i < M.rows(); ++i) {
      const bool bad_row = i >= r0 && i < r1;
      const bool bad_col = j >= c0 && j < c1;
      if ((bad_row || bad_col) && M(i, j) != 0.0) return false;
    }
  }
  return true;
}

}  // namespace

bool is_block(const Params& params, Index s, BlockSide side) {
  if (s < 0) throw ParameterError("block factor must be nonnegative");
  const Index l = params.depth();
  for (Index j = 0; j <= l; ++j) {
    const Matrix& M = params[j];
    const Index rows = j == l ? M.rows() : std::min(s, M.rows());
    const Index cols = j == 0 ? M.cols() : std::min(s, M.cols());
    if (!zero_outside(M, rows, cols, side)) return false;
  }
  return true;
}

std::vector<Index> block_positions(Index width, Index size, BlockSide side) {
  size = std::min(size, width);
  std::vector<Index> out;
  const Index first = side == BlockSide::Upper ? 0 : width - size;
  for (Index i = 0; i < size; ++i) out.push_back(first + i);
  return out;
}

namespace {

struct SparsePlan {
  Matrix reduced;
  std::vector<std::pair<Index, Index>> moves;  // (source, destination)
  Permutation perm;
  std::vector<Index> target;
};

// Row-wise reduction of A against the unit responses F (v x r), followed by the choice
// of which units move into the target block.
SparsePlan plan_sparsify(const Matrix& A, const Matrix& F, double q_A, BlockSide side, double tol) {
  const Index v = A.cols();
  const Index size = A.rows() * (F.cols() + 1);
  SparsePlan plan;
  plan.reduced = A;
  for (Index k = 0; k < A.rows(); ++k) {
    const double norm = lq_norm(A.row(k), q_A);
    if (norm == 0.0) continue;
    const Matrix generators = (norm * F).transpose();
    const Vector weights = A.row(k).transpose() / norm;
    plan.reduced.row(k) = norm * reduce_combination(generators, weights, q_A, tol).transpose();
  }

  plan.target = block_positions(v, size, side);
  std::vector<bool> in_target(static_cast<std::size_t>(v), false);
  for (Index t : plan.target) in_target[static_cast<std::size_t>(t)] = true;
  std::vector<Index> sources;
  std::vector<Index> free_slots;
  for (Index j = 0; j < v; ++j) {
    const bool used = (plan.reduced.col(j).array() != 0.0).any();
    const bool inside = in_target[static_cast<std::size_t>(j)];
    if (used && !inside) sources.push_back(j);
    if (!used && inside) free_slots.push_back(j);
  }
  if (sources.size() > free_slots.size()) {
    throw ReductionError("reduced support does not fit into the target block");
  }
  plan.perm = identity_permutation(v);
  for (std::size_t i = 0; i < sources.size(); ++i) {
    plan.moves.emplace_back(sources[i], free_slots[i]);
    plan.perm[static_cast<std::size_t>(free_slots[i])] = sources[i];
    plan.perm[static_cast<std::size_t>(sources[i])] = free_slots[i];
  }
  return plan;
}

// Accumulates reparametrization steps, dropping the ones that change nothing.
class StepLog {
 public:
  explicit StepLog(Params start) : cur_(std::move(start)) {}

  const Params& current() const { return cur_; }

  void push(Params next, Index layer, const Permutation& perm, const std::string& label) {
    if (next == cur_) return;
    steps_.push_back({cur_, next, layer, perm, label});
    cur_ = std::move(next);
  }

  std::vector<ReparamStep> take_steps() { return std::move(steps_); }
  Params take_params() { return std::move(cur_); }

 private:
  Params cur_;
  std::vector<ReparamStep> steps_;
};

// Moves hidden units of layer v from source to destination positions. Every destination
// must have a zero outgoing column in Θ^v; sources end with zero incoming rows.
void relocate(StepLog& log, Index v, const std::vector<std::pair<Index, Index>>& moves,
              const Permutation& perm, const std::string& tag) {
  if (moves.empty()) return;
  Params next = log.current();
  for (const auto& [src, dst] : moves) next[v - 1].row(dst).setZero();
  log.push(next, v, perm, tag + ": clear destinations");

  next = log.current();
  for (const auto& [src, dst] : moves) next[v - 1].row(dst) = log.current()[v - 1].row(src);
  log.push(next, v, perm, tag + ": copy incoming weights");

  next = log.current();
  for (const auto& [src, dst] : moves) {
    next[v].col(dst) = log.current()[v].col(src);
    next[v].col(src).setZero();
  }
  log.push(next, v, perm, tag + ": transfer outgoing weights");
}

void truncate_rows(StepLog& log, Index v, const std::vector<Index>& keep, const Permutation& perm,
                   const std::string& tag) {
  Params next = log.current();
  Matrix& M = next[v - 1];
  std::vector<bool> kept(static_cast<std::size_t>(M.rows()), false);
  for (Index k : keep) kept[static_cast<std::size_t>(k)] = true;
  for (Index i = 0; i < M.rows(); ++i) {
    if (!kept[static_cast<std::size_t>(i)]) M.row(i).setZero();
  }
  log.push(next, v, perm, tag + ": truncate");
}

Matrix select_rows(const Matrix& M, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), M.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = M.row(rows[i]);
  return out;
}

std::vector<Index> all_positions(Index n) {
  std::vector<Index> out;
  for (Index i = 0; i < n; ++i) out.push_back(i);
  return out;
}

// Sparsifies Θ^j restricted to `rows` and moves its support into the target block.
std::vector<Index> nonlinear_round(StepLog& log, const Architecture& arch, const Dataset& data,
                                   Index j, const std::vector<Index>& rows, BlockSide side,
                                   double tol) {
  const Params& cur = log.current();
  const Index width = arch.width(j);
  const Index size = static_cast<Index>(rows.size()) * (data.samples() + 1);
  if (width <= size) return all_positions(width);

  const Matrix F = hidden_activations(arch, cur, data.X, j);
  const SparsePlan plan = plan_sparsify(select_rows(cur[j], rows), F, 1.0, side, tol);
  std::ostringstream tag;
  tag << "layer " << j;

  Params next = cur;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    next[j].row(rows[i]) = plan.reduced.row(static_cast<Index>(i));
  }
  log.push(next, j, plan.perm, tag.str() + ": sparsify");
  relocate(log, j, plan.moves, plan.perm, tag.str());
  truncate_rows(log, j, plan.target, plan.perm, tag.str());
  return plan.target;
}

// Units of hidden layer v whose outgoing column in Θ^v is zero, block positions first.
std::vector<Index> dead_units(const Params& p, Index v, const std::vector<Index>& block, Index count) {
  const Matrix& out = p[v];
  std::vector<bool> in_block(static_cast<std::size_t>(out.cols()), false);
  for (Index b : block) in_block[static_cast<std::size_t>(b)] = true;
  std::vector<Index> picked;
  auto scan = [&](bool want_inside) {
    for (Index u = 0; u < out.cols() && static_cast<Index>(picked.size()) < count; ++u) {
      if (in_block[static_cast<std::size_t>(u)] != want_inside) continue;
      if (out.col(u).isZero(0.0)) picked.push_back(u);
    }
  };
  scan(true);
  scan(false);
  if (static_cast<Index>(picked.size()) < count) {
    std::ostringstream os;
    os << "hidden layer " << v << " has no room for " << count << " scratch units";
    throw CapabilityError(os.str());
  }
  return picked;
}

// One merging round for identity activations: Θ^l ⋯ Θ^j is sparsified as a whole and
// realized by a scaled chain of m units per layer.
void linear_round(StepLog& log, const Architecture& arch, const Dataset& data, Index j, Index s,
                  BlockSide side, double tol) {
  const Index l = arch.depth();
  const Index m = arch.output_dim();
  if (arch.width(j) <= s) return;

  const Params& cur = log.current();
  Matrix effective = cur[l];
  for (Index v = l - 1; v >= j; --v) effective = effective * cur[v];
  const Matrix F = hidden_activations(arch, cur, data.X, j);
  const SparsePlan plan = plan_sparsify(effective, F, 1.0, side, tol);
  std::ostringstream os;
  os << "layer " << j;
  const std::string tag = os.str();

  // chain[v] holds the m units used at hidden layer v, for v = j+1..l.
  std::vector<std::vector<Index>> chain(static_cast<std::size_t>(l + 1));
  std::vector<std::vector<Index>> blocks(static_cast<std::size_t>(l + 1));
  for (Index v = j + 1; v <= l; ++v) {
    blocks[static_cast<std::size_t>(v)] = block_positions(arch.width(v), s, side);
    chain[static_cast<std::size_t>(v)] = dead_units(cur, v, blocks[static_cast<std::size_t>(v)], m);
  }
  auto unit = [&](Index v, Index k) { return chain[static_cast<std::size_t>(v)][static_cast<std::size_t>(k)]; };

  double largest = 0.0;
  for (Index k = 0; k < m; ++k) largest = std::max(largest, plan.reduced.row(k).cwiseAbs().sum());
  const double beta = std::pow(largest, 1.0 / static_cast<double>(l - j + 1));
  const double inner_scale = beta > 0.0 ? std::pow(beta, -static_cast<double>(l - j)) : 0.0;

  Params next = cur;
  for (Index v = l; v >= j + 2; --v) {
    for (Index k = 0; k < m; ++k) {
      next[v - 1].row(unit(v, k)).setZero();
      next[v - 1](unit(v, k), unit(v - 1, k)) = beta;
    }
  }
  for (Index k = 0; k < m; ++k) next[j].row(unit(j + 1, k)) = inner_scale * plan.reduced.row(k);
  log.push(next, j, plan.perm, tag + ": build chain");

  next = log.current();
  next[l].setZero();
  for (Index k = 0; k < m; ++k) next[l](k, unit(l, k)) = beta;
  log.push(next, l, plan.perm, tag + ": switch outer layer to chain");

  next = log.current();
  for (Index v = j; v <= l - 1; ++v) {
    std::vector<bool> keep(static_cast<std::size_t>(next[v].rows()), false);
    for (Index k = 0; k < m; ++k) keep[static_cast<std::size_t>(unit(v + 1, k))] = true;
    for (Index i = 0; i < next[v].rows(); ++i) {
      if (!keep[static_cast<std::size_t>(i)]) next[v].row(i).setZero();
    }
  }
  log.push(next, j, plan.perm, tag + ": prune");

  for (Index v = l; v >= j + 1; --v) {
    std::vector<Index>& units = chain[static_cast<std::size_t>(v)];
    const std::vector<Index>& block = blocks[static_cast<std::size_t>(v)];
    std::vector<bool> taken(static_cast<std::size_t>(arch.width(v)), false);
    for (Index u : units) taken[static_cast<std::size_t>(u)] = true;
    std::vector<bool> in_block(static_cast<std::size_t>(arch.width(v)), false);
    for (Index b : block) in_block[static_cast<std::size_t>(b)] = true;
    std::vector<Index> free_slots;
    for (Index b : block) {
      if (!taken[static_cast<std::size_t>(b)]) free_slots.push_back(b);
    }
    std::vector<std::pair<Index, Index>> moves;
    std::size_t next_free = 0;
    for (Index& u : units) {
      if (in_block[static_cast<std::size_t>(u)]) continue;
      const Index dst = free_slots.at(next_free++);
      moves.emplace_back(u, dst);
      u = dst;
    }
    std::ostringstream vt;
    vt << "layer " << v;
    relocate(log, v, moves, identity_permutation(arch.width(v)), vt.str() + " chain");
    truncate_rows(log, v, units, identity_permutation(arch.width(v)), vt.str() + " chain");
  }

  relocate(log, j, plan.moves, plan.perm, tag);
  truncate_rows(log, j, plan.target, plan.perm, tag);
}

void check_widths(const Architecture& arch, Index n, bool linear) {
  const Index l = arch.depth();
  const Index m = arch.output_dim();
  const Index s = block_factor(m, n, l, linear);
  for (Index j = 1; j <= l; ++j) {
    Index need = 0;
    if (linear) {
      need = (j == 1 || l == 1) ? s : s + m;
    } else {
      need = m;
      for (Index e = 0; e < l - j + 1; ++e) need *= (n + 1);
    }
    if (arch.width(j) < need) {
      std::ostringstream os;
      os << "hidden layer " << j << " has width p^" << j << " = " << arch.width(j)
         << ", needs at least " << need;
      throw CapabilityError(os.str());
    }
  }
}

}  // namespace

LayerPairResult sparsify_layer_pair(const Matrix& A, const Matrix& B, const Matrix& C,
                                    const Activation& activation, double q_A, double q_B,
                                    BlockSide side, double tol) {
  if (A.cols() != B.rows() || B.cols() != C.rows()) {
    throw StructuralError("sparsify_layer_pair: A, B, C shapes do not chain");
  }
  if (!(q_A > 0.0 && q_A <= 1.0)) throw ParameterError("q_A must lie in (0, 1]");
  if (!(q_B > 0.0)) throw ParameterError("q_B must be positive");
  const Index v = A.cols();
  if (v <= A.rows() * (C.cols() + 1)) return {A, B, identity_permutation(v)};

  const SparsePlan plan = plan_sparsify(A, apply_activation(activation, B * C), q_A, side, tol);
  LayerPairResult out{Matrix::Zero(A.rows(), v), Matrix::Zero(v, B.cols()), plan.perm};
  for (Index j = 0; j < v; ++j) out.A.col(j) = plan.reduced.col(plan.perm[static_cast<std::size_t>(j)]);
  for (Index t : plan.target) out.B.row(t) = B.row(plan.perm[static_cast<std::size_t>(t)]);
  return out;
}

Index block_factor(Index m, Index n, Index l, bool linear) {
  Index s = m;
  for (Index e = 0; e < (linear ? 1 : l); ++e) s *= (n + 1);
  return s;
}

BlockResult to_block(const Architecture& arch, const Params& params, const Dataset& data,
                     const ConstraintSpec& spec, BlockSide side, const ToBlockOptions& options) {
  check_shapes(arch, params);
  if (data.samples() == 0) throw PreconditionError("dataset has no samples");
  data.validate(arch);
  if (options.merge_linear && !arch.all_identity()) {
    throw PreconditionError("merging layers needs identity activations throughout");
  }
  if (!is_feasible(params, spec, options.tol)) {
    throw PreconditionError("parameter violates the constraint");
  }
  const Index l = arch.depth();
  const Index n = data.samples();
  const bool linear = options.merge_linear && l >= 2;
  const Index s = block_factor(arch.output_dim(), n, l, options.merge_linear);
  check_widths(arch, n, linear);

  if (is_block(params, s, side)) return {params, {}, s};

  StepLog log(params);
  std::vector<Index> rows = all_positions(arch.output_dim());
  if (linear) {
    nonlinear_round(log, arch, data, l, rows, side, options.tol);
    for (Index j = l - 1; j >= 1; --j) linear_round(log, arch, data, j, s, side, options.tol);
  } else {
    for (Index j = l; j >= 1; --j) rows = nonlinear_round(log, arch, data, j, rows, side, options.tol);
  }

  BlockResult out{log.take_params(), log.take_steps(), s};
  if (!is_block(out.params, s, side)) {
    throw ReductionError("reparametrization did not reach the block pattern");
  }
  return out;
}

EmbeddedPair embed_sum_hidden(const Architecture& arch, const Params& upper, const Params& lower,
                              Index s) {
  check_shapes(arch, upper);
  check_shapes(arch, lower);
  if (arch.min_width() < 2 * s) {
    std::ostringstream os;
    os << "minimal width " << arch.min_width() << " is below 2s = " << 2 * s;
    throw CapabilityError(os.str());
  }
  if (!is_block(upper, s, BlockSide::Upper)) throw PreconditionError("first argument is not an upper block");
  if (!is_block(lower, s, BlockSide::Lower)) throw PreconditionError("second argument is not a lower block");
  EmbeddedPair out{upper, lower};
  for (Index j = 0; j < arch.depth(); ++j) {
    out.upper[j] = upper[j] + lower[j];
    out.lower[j] = out.upper[j];
  }
  return out;
}

Params mix_block(const Params& upper_prime, const Params& lower_prime, double c1, double c2) {
  if (!upper_prime.same_shape(lower_prime)) throw StructuralError("parameter tuples differ in shape");
  for (Index j = 0; j < upper_prime.depth(); ++j) {
    if (upper_prime[j] != lower_prime[j]) throw StructuralError("hidden layers are not shared");
  }
  Params out = upper_prime;
  out.outer() = c1 * upper_prime.outer() + c2 * lower_prime.outer();
  return out;
}

}  // namespace unconfined
