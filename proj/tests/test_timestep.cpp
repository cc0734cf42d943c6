#include "doctest.h"

#include "acch/timestep.hpp"

#include <cmath>
#include <vector>

using namespace acch;

TEST_CASE("step-size predictor")
{
    CHECK(predict_dt(1e-4, 10.0, 1e4, 0.0) == 10.0);
    CHECK(predict_dt(1e-4, 10.0, 1e4, 1.0) == doctest::Approx(0.0999950).epsilon(1e-7));
    CHECK(predict_dt(1e-4, 10.0, 1e4, 1.0) == doctest::Approx(10.0 / std::sqrt(10001.0)).epsilon(1e-15));
    CHECK(predict_dt(1e-4, 10.0, 1e4, 1e12) == 1e-4);
    CHECK(predict_dt(1e-4, 10.0, 1e4, INFINITY) == 1e-4);
    // Monotone in the rate and in eta.
    double last = 10.0;
    for (double r = 1e-4; r < 1e4; r *= 3.0) {
        const double dt = predict_dt(1e-4, 10.0, 1e4, r);
        CHECK(dt <= last);
        CHECK(dt >= 1e-4);
        last = dt;
    }
    CHECK(predict_dt(1e-4, 10.0, 2e4, 0.5) < predict_dt(1e-4, 10.0, 1e4, 0.5));
}

TEST_CASE("change rate is the root-mean-square difference per unit time")
{
    const std::vector<double> a{1.0, 2.0, 3.0, 4.0}, b{1.0, 0.0, 3.0, 2.0};
    CHECK(change_rate(a, b, 0.5) == doctest::Approx(std::sqrt(8.0 / 4.0) / 0.5));
    CHECK(change_rate(a, a, 1.0) == 0.0);
    CHECK_THROWS_AS(change_rate(a, std::vector<double>{1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("controller starts at dt_min and follows the predictor")
{
    StepController c({});
    CHECK(c.propose() == 1e-4);
    const std::vector<double> x0(4, 0.5), x1{0.5, 0.5, 0.5, 0.5 + 2e-4};
    c.accept(x1, x0, 1e-4);
    // rate = sqrt(4e-8 / 4) / 1e-4 = 1
    CHECK(c.propose() == doctest::Approx(0.0999950).epsilon(1e-7));
    c.accept(x1, x1, c.propose());
    CHECK(c.propose() == 10.0);
}

TEST_CASE("divergence shrinks by sqrt(2) and doubles eta")
{
    StepController c({});
    CHECK(c.on_divergence(1.0) == doctest::Approx(0.7071068).epsilon(1e-7));
    CHECK(c.eta() == 2e4);
    CHECK(c.propose() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(c.on_divergence(1e-4) == 1e-4);
    CHECK(c.eta() == 4e4);
    CHECK(c.divergences() == 2);
}

TEST_CASE("persistent divergence at dt_min stalls after max_retries")
{
    ControllerConfig cfg;
    cfg.max_retries = 3;
    StepController c(cfg);
    c.on_divergence(1e-4);
    c.on_divergence(1e-4);
    CHECK_THROWS_AS(c.on_divergence(1e-4), StallError);

    // An accepted step resets the count; eta never resets.
    StepController d(cfg);
    d.on_divergence(1e-4);
    d.on_divergence(1e-4);
    const std::vector<double> x(2, 0.3);
    d.accept(x, x, 1e-4);
    d.on_divergence(1e-4);
    d.on_divergence(1e-4);
    CHECK(d.eta() == 1e4 * 16);
    CHECK_THROWS_AS(d.on_divergence(1e-4), StallError);
}

TEST_CASE("fixed mode never adapts and treats divergence as fatal")
{
    ControllerConfig cfg;
    cfg.adaptive = false;
    cfg.dt_fixed = 0.25;
    StepController c(cfg);
    CHECK(c.propose() == 0.25);
    const std::vector<double> a(3, 0.1), b(3, 0.9);
    c.accept(a, b, 0.25);
    CHECK(c.propose() == 0.25);
    CHECK_THROWS_AS(c.on_divergence(0.25), StallError);
}

TEST_CASE("controller configuration is validated")
{
    ControllerConfig cfg;
    cfg.dt_max = 1e-5;
    CHECK_THROWS_AS(StepController{cfg}, std::invalid_argument);
    cfg = {};
    cfg.eta = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.max_retries = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.max_substeps = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.adaptive = false;
    cfg.dt_fixed = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
