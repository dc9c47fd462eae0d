#pragma once

#include "unconfined/netcore.hpp"

namespace unconfined {

/// Rewrites v = Σ_j w_j z_j (z_j the columns of `generators`, r x h) with at most r+1
/// nonzero weights. Signs are kept per weight, so the ℓ1 norm never grows and for
/// q < 1 the ℓq quasi-norm never grows either; the result is still checked against
/// 1 + tol and a ReductionError is thrown if the check fails.
/// Throws PreconditionError when ||w||_q > 1 + tol.
Vector reduce_combination(const Matrix& generators, const Vector& weights, double q,
                          double tol = 1e-9);

/// Number of entries with |w_j| > 0.
Index support_size(const Vector& weights);

}  // namespace unconfined
