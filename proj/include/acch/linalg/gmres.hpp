#pragma once

#include "acch/linalg/sparse.hpp"

#include <functional>
#include <span>

namespace acch {

/// y = Op(x).
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

struct GmresOptions {
    double rtol = 1e-8;
    double atol = 1e-14;
    int restart = 30;
    int max_iterations = 500;
};

struct GmresResult {
    bool converged = false;
    int iterations = 0;
    /// Explicitly recomputed ||b - A x||.
    double residual_norm = 0.0;
    double rhs_norm = 0.0;
};

/// Right-preconditioned restarted GMRES for A x = b. `x` holds the initial
/// guess on entry. Stops when ||b - A x|| <= max(rtol ||b||, atol), checked on
/// the true residual. `precond` may be empty (identity).
GmresResult gmres(const LinearOperator& a, const LinearOperator& precond, std::span<const double> b,
                  std::span<double> x, const GmresOptions& options = {});

}  // namespace acch
