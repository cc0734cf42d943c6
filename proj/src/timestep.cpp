#include "acch/timestep.hpp"

#include "acch/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace acch {

void ControllerConfig::validate() const
{
    if (adaptive) {
        if (!(dt_min > 0.0) || !(dt_max >= dt_min) || !std::isfinite(dt_max))
            throw std::invalid_argument("need 0 < dt_min <= dt_max");
        if (!(eta > 0.0))
            throw std::invalid_argument("eta must be positive");
    } else if (!(dt_fixed > 0.0) || !std::isfinite(dt_fixed)) {
        throw std::invalid_argument("fixed step must be positive");
    }
    if (max_substeps < 1)
        throw std::invalid_argument("max_substeps must be at least 1");
    if (max_retries < 1)
        throw std::invalid_argument("max_retries must be at least 1");
}

double change_rate(std::span<const double> xn, std::span<const double> xprev, double dt_prev)
{
    if (xn.size() != xprev.size() || xn.empty())
        throw std::invalid_argument("change_rate needs two vectors of equal nonzero size");
    const double ss = parallel_sum(xn.size(), [&](std::size_t b, std::size_t e) {
        double s = 0.0;
        for (std::size_t i = b; i < e; ++i) {
            const double d = xn[i] - xprev[i];
            s += d * d;
        }
        return s;
    });
    return std::sqrt(ss / double(xn.size())) / dt_prev;
}

double predict_dt(double dt_min, double dt_max, double eta, double rate)
{
    const double dt = dt_max / std::sqrt(1.0 + eta * rate * rate);
    return std::min(dt_max, std::max(dt_min, dt));
}

StepController::StepController(ControllerConfig cfg) : cfg_(cfg), eta_(cfg.eta)
{
    cfg_.validate();
    proposed_ = cfg_.adaptive ? cfg_.dt_min : cfg_.dt_fixed;
}

void StepController::accept(std::span<const double> xn, std::span<const double> xprev, double dt)
{
    stalled_ = 0;
    if (cfg_.adaptive)
        proposed_ = predict_dt(cfg_.dt_min, cfg_.dt_max, eta_, change_rate(xn, xprev, dt));
}

double StepController::on_divergence(double attempted)
{
    ++divergences_;
    if (!cfg_.adaptive)
        throw StallError("solver diverged at the fixed step " + std::to_string(cfg_.dt_fixed));
    if (attempted <= cfg_.dt_min && ++stalled_ >= cfg_.max_retries)
        throw StallError("solver diverged " + std::to_string(stalled_) + " times at dt_min");
    eta_ *= 2.0;
    proposed_ = std::max(cfg_.dt_min, attempted / std::sqrt(2.0));
    return proposed_;
}

}  // namespace acch
