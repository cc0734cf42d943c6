#pragma once

#include <span>
#include <stdexcept>
#include <string>

namespace acch {

/// Raised when the solver keeps diverging at the smallest allowed step.
class StallError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ControllerConfig {
    bool adaptive = true;
    double dt_min = 1e-4;
    double dt_max = 10.0;
    double eta = 1e4;
    /// Step size in fixed mode.
    double dt_fixed = 1e-4;
    /// Consecutive divergent retries tolerated at dt_min.
    int max_retries = 5;
    /// Adaptive mode only: a step that diverges at dt_min is retried as up to
    /// this many equal sub-steps (2, 4, 8, ...) before counting toward a stall.
    /// 1 disables sub-stepping.
    int max_substeps = 64;

    void validate() const;
};

/// Root-mean-square change per unit time between two unknown vectors.
double change_rate(std::span<const double> xn, std::span<const double> xprev, double dt_prev);

/// dt_max / sqrt(1 + eta * rate^2), clamped to [dt_min, dt_max].
double predict_dt(double dt_min, double dt_max, double eta, double rate);

/// Adaptive step size controller. The first step uses dt_min; later steps
/// follow the change rate of the last accepted step.
class StepController {
public:
    explicit StepController(ControllerConfig cfg);

    const ControllerConfig& config() const noexcept { return cfg_; }
    double eta() const noexcept { return eta_; }
    int divergences() const noexcept { return divergences_; }

    /// Step size to try next.
    double propose() const noexcept { return proposed_; }

    /// Records an accepted step of size dt from xprev to xn.
    void accept(std::span<const double> xn, std::span<const double> xprev, double dt);

    /// Shrinks the failed step by sqrt(2) (not below dt_min) and doubles eta.
    /// Throws StallError after max_retries consecutive failures at dt_min, and
    /// at once in fixed mode.
    double on_divergence(double attempted);

private:
    ControllerConfig cfg_;
    double eta_;
    double proposed_;
    int divergences_ = 0;
    int stalled_ = 0;
};

}  // namespace acch
