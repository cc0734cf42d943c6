#include "doctest.h"

#include "acch/physics.hpp"
#include "support.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <random>

using namespace acch;
using acch::testing::random_state;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

Big big_phi(const Big& z)
{
    return z * log(z) + (1 - z) * log(1 - z);
}

/// (Phi(a) - Phi(b)) / (a - b) with a and b given exactly as zeta +- sigma.
double oracle_quotient(double zeta, double sigma)
{
    const Big z(zeta), s(sigma);
    return static_cast<double>((big_phi(z + s) - big_phi(z - s)) / (2 * s));
}

double oracle_local_energy(double u, double v, double gu, double gv, const Params& p)
{
    const Big U(u), V(v);
    const Big e1 = Big(p.alpha) / 2 * U * (1 - U) - Big(p.beta) / 2 * V * V;
    const Big e2 = Big(p.theta) * (big_phi(U + V) + big_phi(U - V));
    return static_cast<double>(e1 + e2 + Big(p.gamma) / 2 * (Big(gu) + Big(gv)));
}

State axpy(const State& s, double eps, const State& d)
{
    State t = s;
    for (std::size_t c = 0; c < s.grid().cells(); ++c) {
        t.u[c] += eps * d.u[c];
        t.v[c] += eps * d.v[c];
    }
    return t;
}

}  // namespace

TEST_CASE("mobility values and derivatives")
{
    CHECK(mobility(0.0, 0.3) == 0.0);
    CHECK(mobility(1.0, -0.2) == 0.0);
    CHECK(mobility(0.3, 0.5) == 0.0);
    CHECK(mobility(0.3, -0.5) == 0.0);
    CHECK(mobility(0.5, 0.0) == doctest::Approx(0.0625));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(0.05, 0.95);
    for (int i = 0; i < 100; ++i) {
        const double u = d(rng), v = 0.4 * (d(rng) - 0.5), h = 1e-6;
        CHECK(mobility_du(u, v) == doctest::Approx((mobility(u + h, v) - mobility(u - h, v)) / (2 * h)).epsilon(1e-8));
        CHECK(mobility_dv(u, v) == doctest::Approx((mobility(u, v + h) - mobility(u, v - h)) / (2 * h)).epsilon(1e-8));
    }
}

TEST_CASE("entropy function")
{
    CHECK(phi(0.5) == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
    CHECK(phi_prime(0.5) == 0.0);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> d(1e-6, 1.0 - 1e-6);
    for (int i = 0; i < 200; ++i) {
        const double z = d(rng);
        CHECK(phi(z) == doctest::Approx(phi(1.0 - z)).epsilon(1e-12));
        CHECK(phi_prime(z) == doctest::Approx(std::log(z / (1.0 - z))).epsilon(1e-12));
        CHECK(phi_second(z) == doctest::Approx(1.0 / (z * (1.0 - z))).epsilon(1e-14));
    }
    for (double bad : {0.0, 1.0, -0.1, 1.2, std::nan("")}) {
        CHECK_THROWS_AS(phi(bad), DomainError);
        CHECK_THROWS_AS(phi_prime(bad), DomainError);
    }
}

TEST_CASE("local energy")
{
    const Params p;
    CHECK(local_energy(0.5, 0.0, 0.0, 0.0, p) == doctest::Approx(0.3613706).epsilon(1e-7));
    CHECK(local_energy(0.5, 0.0, 0.0, 0.0, p) == doctest::Approx(0.5 - 0.2 * std::log(2.0)).epsilon(1e-15));
    Params q = p;
    q.theta = 0.0;
    q.gamma = 0.0;
    CHECK(local_energy(0.3, 0.1, 5.0, 7.0, q) == doctest::Approx(2.0 * 0.3 * 0.7 - 0.01).epsilon(1e-15));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double u = 0.02 + 0.96 * d(rng);
        const double v = (2.0 * d(rng) - 1.0) * 0.98 * std::min(u, 1.0 - u);
        const double gu = 10.0 * d(rng), gv = 10.0 * d(rng);
        const double ref = oracle_local_energy(u, v, gu, gv, p);
        CHECK(std::abs(local_energy(u, v, gu, gv, p) - ref) <= 1e-14 * std::max(1.0, std::abs(ref)));
    }
    CHECK_THROWS_AS(local_energy(0.2, 0.3, 0.0, 0.0, p), DomainError);
}

TEST_CASE("parameter validation")
{
    Params p;
    CHECK_NOTHROW(p.validate());
    p.rho = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = Params{};
    p.series_order = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("admissibility")
{
    CHECK(admissible(0.5, 0.0));
    CHECK(admissible(0.3, 0.29));
    CHECK_FALSE(admissible(0.3, 0.3));
    CHECK_FALSE(admissible(0.8, -0.25));
    CHECK_FALSE(admissible(0.0, 0.0));
    CHECK_FALSE(admissible(std::nan(""), 0.0));
    const Grid g = Grid::square(4, 1.0, Boundary::Periodic);
    State s = uniform_state(g, 0.4, 0.1);
    CHECK(is_admissible(s));
    s.v[g.cell(2, 3)] = 0.45;
    CHECK_FALSE(is_admissible(s));
    try {
        check_admissible(s);
        FAIL("expected InadmissibleStateError");
    } catch (const InadmissibleStateError& e) {
        CHECK(e.cell() == g.cell(2, 3));
    }
}

TEST_CASE("total energy")
{
    const Params p;
    const Grid g(2, {6, 5, 1}, {1.2, 0.5, 1.0}, Boundary::Neumann);
    const State s = uniform_state(g, 0.4, 0.1);
    CHECK(total_energy(s, p) == doctest::Approx(g.domain_volume() * local_energy(0.4, 0.1, 0, 0, p)).epsilon(1e-14));

    // Same values on a mesh with doubled spacing: four times the energy in 2D
    // once the gradient part is switched off.
    Params flat = p;
    flat.gamma = 0.0;
    std::mt19937_64 rng(4);
    const State r = random_state(g, rng);
    State big{Field(Grid(2, {6, 5, 1}, {2.4, 1.0, 1.0}, Boundary::Neumann)),
              Field(Grid(2, {6, 5, 1}, {2.4, 1.0, 1.0}, Boundary::Neumann))};
    big.u.assign_interior(r.u.interior());
    big.v.assign_interior(r.v.interior());
    CHECK(total_energy(big, flat) == doctest::Approx(4.0 * total_energy(r, flat)).epsilon(1e-14));

    // Naive loop with clamped neighbours.
    for (Boundary bc : {Boundary::Neumann, Boundary::Periodic}) {
        const Grid h(2, {7, 6, 1}, {1.0, 0.9, 1.0}, bc);
        const State q = random_state(h, rng);
        auto nb = [&](int i, int n) { return bc == Boundary::Periodic ? (i + n) % n : std::clamp(i, 0, n - 1); };
        double e = 0.0;
        for (int j = 0; j < 6; ++j)
            for (int i = 0; i < 7; ++i) {
                double gsq[2] = {0.0, 0.0};
                const Field* f[2] = {&q.u, &q.v};
                for (int m = 0; m < 2; ++m) {
                    const Field& x = *f[m];
                    const double hx = h.spacing(0), hy = h.spacing(1);
                    const double a = (x.at(nb(i + 1, 7), j) - x.at(i, j)) / hx;
                    const double b = (x.at(i, j) - x.at(nb(i - 1, 7), j)) / hx;
                    const double c = (x.at(i, nb(j + 1, 6)) - x.at(i, j)) / hy;
                    const double d = (x.at(i, j) - x.at(i, nb(j - 1, 6))) / hy;
                    gsq[m] = 0.5 * (a * a + b * b) + 0.5 * (c * c + d * d);
                }
                e += local_energy(q.u.at(i, j), q.v.at(i, j), gsq[0], gsq[1], p) * h.cell_volume();
            }
        CHECK(total_energy(q, p) == doctest::Approx(e).epsilon(1e-13));
    }
}

TEST_CASE("continuous variational derivative")
{
    const Params p;
    const Grid g = Grid::square(6, 1.0, Boundary::Neumann);
    const auto [gu0, gv0] = continuous_var_deriv(uniform_state(g, 0.37, 0.0), p);
    for (std::size_t c = 0; c < g.cells(); ++c)
        CHECK(gv0[c] == 0.0);
    const auto [gu1, gv1] = continuous_var_deriv(uniform_state(g, 0.5, 0.0), p);
    for (std::size_t c = 0; c < g.cells(); ++c)
        CHECK(gu1[c] == 0.0);

    // Directional derivative of the discrete energy: error falls like eps^2.
    std::mt19937_64 rng(5);
    for (const Grid& h : {Grid::square(8, 1.0, Boundary::Neumann), Grid::cube(4, 1.0, Boundary::Periodic)}) {
        const State s = random_state(h, rng, 0.25);
        const State d = random_state(h, rng, 0.25);
        const auto [gu, gv] = continuous_var_deriv(s, p);
        const double exact = inner(gu, d.u) + inner(gv, d.v);
        double err[2];
        for (int k = 0; k < 2; ++k) {
            const double eps = 1e-3 / (1 << k);
            const double fd = (total_energy(axpy(s, eps, d), p) - total_energy(axpy(s, -eps, d), p)) / (2 * eps);
            err[k] = std::abs(fd - exact);
        }
        CHECK(err[0] < 1e-4 * std::abs(exact) + 1e-9);
        CHECK(err[1] < 0.3 * err[0]);
    }
}

TEST_CASE("series expansion of the divided difference")
{
    CHECK(f_series(0.5, 0.1, 10) == doctest::Approx(0.3001046).epsilon(1e-7));
    for (double x : {0.1, 0.37, 0.5, 0.93}) {
        CHECK(f_series(x, 0.0, 10) == doctest::Approx(std::log(x) + 1.0).epsilon(1e-15));
        CHECK(f_series(x, 0.3 * x, 10) == f_series(x, -0.3 * x, 10));
        // Exact f(x, sigma) = ((x+s)ln(x+s) - (x-s)ln(x-s)) / (2s).
        const Big X(x), S(0.4 * x);
        const double exact = static_cast<double>(((X + S) * log(X + S) - (X - S) * log(X - S)) / (2 * S));
        CHECK(std::abs(f_series(x, 0.4 * x, 10) - exact) < 1e-9);
    }
    CHECK_THROWS_AS(f_series(0.0, 0.0, 10), DomainError);
    CHECK_THROWS_AS(f_series(0.2, 0.11, 10), DomainError);

    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double x = 0.05 + 0.9 * d(rng), s = (d(rng) - 0.5) * 0.8 * x, h = 1e-6;
        const SeriesGrad gr = f_series_grad(x, s, 10);
        CHECK(gr.dx == doctest::Approx((f_series(x + h, s, 10) - f_series(x - h, s, 10)) / (2 * h)).epsilon(1e-7));
        CHECK(gr.dsigma ==
              doctest::Approx((f_series(x, s + h, 10) - f_series(x, s - h, 10)) / (2 * h)).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("divided-difference kernel: values")
{
    CHECK(dd_phi(0.7, 0.5, 10) == doctest::Approx(0.4114145).epsilon(1e-7));
    CHECK(std::abs(dd_phi(0.6, 0.4, 10)) < 1e-15);
    for (double a : {0.01, 0.3, 0.5, 0.77}) {
        CHECK(dd_phi(a, a, 10) == doctest::Approx(std::log(a / (1.0 - a))).epsilon(1e-15));
        CHECK(dd_phi(a, a, 10, KernelMode::ExactQuotient) == doctest::Approx(phi_prime(a)).epsilon(1e-15));
    }
    CHECK(dd_phi(0.3, 0.7, 10) == dd_phi(0.7, 0.3, 10));
    CHECK_THROWS_AS(dd_phi(0.0, 0.5, 10), DomainError);
    CHECK_THROWS_AS(dd_phi(0.5, 1.0, 10), DomainError);
}

TEST_CASE("divided-difference kernel: accuracy against an extended-precision quotient")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double zeta = 1e-3 + (1.0 - 2e-3) * d(rng);
        const double room = 0.5 * std::min(zeta, 1.0 - zeta);
        // Log-uniform |sigma| in [1e-6, room].
        const double mag = std::exp(std::log(1e-6) + d(rng) * (std::log(room) - std::log(1e-6)));
        const double sigma = d(rng) < 0.5 ? -mag : mag;
        const double a = zeta + sigma, b = zeta - sigma;
        // Use the rounded endpoints so oracle and kernel see the same pair.
        const double z2 = 0.5 * (a + b), s2 = 0.5 * (a - b);
        worst = std::max(worst, std::abs(dd_phi(a, b, 10) - oracle_quotient(z2, s2)));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("divided-difference kernel: near-equal arguments")
{
    for (double zeta : {0.02, 0.25, 0.5, 0.81, 0.99}) {
        for (double sigma : {1e-14, -1e-14, 1e-12, 1e-13}) {
            const double a = zeta + sigma, b = zeta - sigma;
            const double v = dd_phi(a, b, 10);
            CHECK(std::isfinite(v));
            CHECK(std::abs(v - phi_prime(zeta)) <= 1e-10);
            CHECK(std::abs(v - oracle_quotient(0.5 * (a + b), 0.5 * (a - b))) <= 1e-10);
        }
    }
}

TEST_CASE("divided-difference kernel: branch continuity and derivative")
{
    for (double zeta : {0.1, 0.4, 0.5, 0.7}) {
        const double edge = kSeriesRadius * std::min(zeta, 1.0 - zeta);
        const double in = edge * (1.0 - 1e-12), out = edge * (1.0 + 1e-12);
        CHECK(dd_phi_uses_series(zeta + in, zeta - in));
        CHECK_FALSE(dd_phi_uses_series(zeta + out, zeta - out));
        CHECK(std::abs(dd_phi(zeta + in, zeta - in, 10) - dd_phi(zeta + out, zeta - out, 10)) <= 1e-9);
    }
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> d(0.02, 0.98);
    for (int i = 0; i < 200; ++i) {
        const double a = d(rng), b = d(rng), h = 1e-7;
        for (KernelMode mode : {KernelMode::Series, KernelMode::ExactQuotient}) {
            const DividedDifference dd = dd_phi_with_derivative(a, b, 10, mode);
            CHECK(dd.value == dd_phi(a, b, 10, mode));
            const double fd = (dd_phi(a + h, b, 10, mode) - dd_phi(a - h, b, 10, mode)) / (2 * h);
            CHECK(std::abs(dd.d_a - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
        }
    }
}
