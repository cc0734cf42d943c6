#include "acch/newton.hpp"

#include "acch/parallel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace acch {

void NewtonConfig::validate() const
{
    if (!(rtol > 0.0) || !(atol > 0.0) || !(linear_rtol > 0.0) || !(linear_atol > 0.0))
        throw std::invalid_argument("solver tolerances must be positive");
    if (max_newton < 1 || restart < 1 || max_linear < 1)
        throw std::invalid_argument("iteration limits must be at least 1");
    if (!(fallback_forcing >= 0.0 && fallback_forcing < 1.0))
        throw std::invalid_argument("fallback_forcing must lie in [0, 1)");
    if (!(keep_slack >= 0.0 && keep_slack < 1.0))
        throw std::invalid_argument("keep_slack must lie in [0, 1)");
    if (!(backtrack > 0.0 && backtrack < 1.0) || !(min_step > 0.0) || !(sufficient_decrease >= 0.0))
        throw std::invalid_argument("invalid line-search parameters");
}

std::string to_string(Divergence d)
{
    switch (d) {
    case Divergence::None: return "none";
    case Divergence::MaxIterations: return "max-newton";
    case Divergence::LineSearch: return "line-search";
    case Divergence::Linear: return "gmres";
    }
    return "?";
}

ReuseDecision reuse_policy(int iteration, bool reuse_enabled)
{
    return iteration == 0 || !reuse_enabled ? ReuseDecision::Refactor : ReuseDecision::Reuse;
}

namespace {

/// ||F(x)||, or +inf when x is inadmissible.
double merit(const StepProblem& prob, const Vector& x, Vector& f)
{
    const State s = unpack(prob.grid(), x);
    if (!is_admissible(s))
        return std::numeric_limits<double>::infinity();
    f = pack(residual(prob, s));
    return norm2(f);
}

/// Scales the update of each cell that would shrink a constraint slack
/// (u +- v > 0, 1 - u -+ v > 0) below keep * (its current value), so one
/// cell heading for the boundary does not stall the whole step. The u
/// increment removed this way is spread evenly to keep sum(du) unchanged.
void truncate_at_boundary(const Vector& x, Vector& s, double keep)
{
    const std::size_t cells = x.size() / 2;
    double removed = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
        const double u = x[2 * c], v = x[2 * c + 1], du = s[2 * c], dv = s[2 * c + 1];
        const double slack[4] = {u + v, u - v, 1.0 - u - v, 1.0 - u + v};
        const double rate[4] = {du + dv, du - dv, -du - dv, -du + dv};
        double mu = 1.0;
        for (int j = 0; j < 4; ++j)
            if (rate[j] < 0.0)
                mu = std::min(mu, (1.0 - keep) * slack[j] / -rate[j]);
        if (mu < 1.0) {
            removed += (1.0 - mu) * du;
            s[2 * c] = mu * du;
            s[2 * c + 1] = mu * dv;
        }
    }
    if (removed != 0.0)
        for (std::size_t c = 0; c < cells; ++c)
            s[2 * c] += removed / double(cells);
}

}  // namespace

std::pair<State, SolveReport> newton_solve(const StepProblem& prob, const State& x0, const NewtonConfig& cfg,
                                           SchwarzPreconditioner& precond)
{
    cfg.validate();
    check_admissible(x0);
    SolveReport rep;
    Vector x = pack(x0);
    Vector f;
    double fn = merit(prob, x, f);
    rep.initial_residual = rep.final_residual = fn;
    rep.residual_history.push_back(fn);
    const double target = std::max(cfg.rtol * fn, cfg.atol);
    const std::size_t n = x.size();
    const std::size_t cells = prob.grid().cells();
    const Vector prev = pack(prob.prev());

    StencilMatrix jac = prob.layout()->make_matrix();
    Vector step(n), rhs(n), trial(n), ftrial;
    const GmresOptions gopt{cfg.linear_rtol, cfg.linear_atol, cfg.restart, cfg.max_linear};

    while (fn > target) {
        if (rep.newton_iterations >= cfg.max_newton) {
            rep.reason = Divergence::MaxIterations;
            rep.detail = "no convergence after " + std::to_string(cfg.max_newton) + " iterations";
            break;
        }
        const State cur = unpack(prob.grid(), x);
        assemble_jacobian(prob, cur, jac);
        if (reuse_policy(rep.newton_iterations, cfg.reuse) == ReuseDecision::Refactor || !precond.ready()) {
            try {
                precond.factor(jac);
            } catch (const ZeroPivotError& e) {
                rep.reason = Divergence::Linear;
                rep.detail = e.what();
                break;
            }
            ++rep.factorizations;
        }
        for (std::size_t i = 0; i < n; ++i)
            rhs[i] = -f[i];
        std::fill(step.begin(), step.end(), 0.0);
        const GmresResult lin = gmres([&](std::span<const double> in, std::span<double> out) { jac.multiply(in, out); },
                                      [&](std::span<const double> in, std::span<double> out) { precond.apply(in, out); },
                                      rhs, step, gopt);
        rep.gmres_iterations += lin.iterations;
        ++rep.newton_iterations;
        if (!lin.converged && !(lin.residual_norm <= cfg.fallback_forcing * fn)) {
            rep.reason = Divergence::Linear;
            rep.detail = "GMRES stopped at residual " + std::to_string(lin.residual_norm) + " after " +
                         std::to_string(lin.iterations) + " iterations";
            break;
        }
        if (cfg.conserve_mass) {
            // The exact Newton step keeps sum(u) equal to sum(u^n) because the
            // divergence rows have zero column sums; remove the part of the
            // linear residual that would break this.
            const double drift = parallel_sum(cells, [&](std::size_t b, std::size_t e) {
                double s = 0.0;
                for (std::size_t c = b; c < e; ++c)
                    s += x[2 * c] + step[2 * c] - prev[2 * c];
                return s;
            }) / double(cells);
            for (std::size_t c = 0; c < cells; ++c)
                step[2 * c] -= drift;
        }

        // Backtracking on ||F||; inadmissible trials count as infinite merit.
        truncate_at_boundary(x, step, cfg.keep_slack);
        double lambda = 1.0;
        double ft = std::numeric_limits<double>::infinity();
        while (lambda >= cfg.min_step) {
            for (std::size_t i = 0; i < n; ++i)
                trial[i] = x[i] + lambda * step[i];
            ft = merit(prob, trial, ftrial);
            if (ft <= (1.0 - cfg.sufficient_decrease * lambda) * fn)
                break;
            lambda *= cfg.backtrack;
        }
        if (lambda < cfg.min_step) {
            rep.reason = Divergence::LineSearch;
            rep.detail = "line search stagnated at ||F|| = " + std::to_string(fn);
            break;
        }
        x.swap(trial);
        f.swap(ftrial);
        fn = ft;
        rep.final_residual = fn;
        rep.residual_history.push_back(fn);
    }
    rep.converged = rep.reason == Divergence::None && fn <= target;
    return {unpack(prob.grid(), x), std::move(rep)};
}

}  // namespace acch
