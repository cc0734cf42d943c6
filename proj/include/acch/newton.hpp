#pragma once

#include "acch/linalg/gmres.hpp"
#include "acch/linalg/schwarz.hpp"
#include "acch/scheme.hpp"

#include <string>
#include <vector>

namespace acch {

struct NewtonConfig {
    double rtol = 1e-6;
    double atol = 1e-13;
    double linear_rtol = 1e-8;
    double linear_atol = 1e-14;
    int max_newton = 50;
    int restart = 30;
    int max_linear = 500;
    double backtrack = 0.5;
    double min_step = 1e-8;
    double sufficient_decrease = 1e-4;
    /// Freeze the preconditioner factors after the first iteration of a step.
    bool reuse = true;
    /// Remove the linear solver's error in total mass from each update.
    bool conserve_mass = true;
    /// Fraction-to-the-boundary rule: a trial step may shrink the slack of
    /// each admissibility constraint (u +- v > 0, 1 - u -+ v > 0) to no less
    /// than this fraction of its current value.
    double keep_slack = 0.1;
    /// When GMRES misses its tolerance, its iterate is still used as the
    /// search direction if ||J s + F|| <= fallback_forcing ||F|| (0: never).
    double fallback_forcing = 0.5;

    void validate() const;
};

enum class Divergence { None, MaxIterations, LineSearch, Linear };
std::string to_string(Divergence d);

struct SolveReport {
    bool converged = false;
    int newton_iterations = 0;
    int gmres_iterations = 0;
    int factorizations = 0;
    double initial_residual = 0.0;
    double final_residual = 0.0;
    Divergence reason = Divergence::None;
    std::string detail;
    /// ||F|| before every iteration and after the last one.
    std::vector<double> residual_history;
};

enum class ReuseDecision { Refactor, Reuse };

/// Refactor on the first iteration of a step, reuse afterwards (when enabled).
ReuseDecision reuse_policy(int iteration, bool reuse_enabled);

/// Solves F(X) = 0 for one step by inexact Newton with backtracking, GMRES and
/// the given Schwarz preconditioner. Never throws for solver failure; the
/// report says why it stopped.
std::pair<State, SolveReport> newton_solve(const StepProblem& prob, const State& x0, const NewtonConfig& cfg,
                                           SchwarzPreconditioner& precond);

}  // namespace acch
