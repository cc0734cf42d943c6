#include "acch/physics.hpp"

#include "acch/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace acch {

void Params::validate() const
{
    auto positive = [](double x, const char* name) {
        if (!(x > 0.0) || !std::isfinite(x))
            throw std::invalid_argument(std::string("parameter ") + name + " must be positive");
    };
    positive(alpha, "alpha");
    positive(beta, "beta");
    positive(gamma, "gamma");
    positive(theta, "theta");
    positive(rho, "rho");
    if (series_order < 1)
        throw std::invalid_argument("series order must be at least 1");
}

bool admissible(double u, double v, double m) noexcept
{
    const double p = u + v, q = u - v;
    return u >= m && 1.0 - u >= m && p >= m && 1.0 - p >= m && q >= m && 1.0 - q >= m && 0.5 - v >= m &&
           0.5 + v >= m;
}

void check_admissible(const State& s, double margin)
{
    const std::size_t n = s.u.size();
    for (std::size_t c = 0; c < n; ++c)
        if (!admissible(s.u[c], s.v[c], margin))
            throw InadmissibleStateError("inadmissible state (u=" + std::to_string(s.u[c]) +
                                             ", v=" + std::to_string(s.v[c]) + ")",
                                         c);
}

bool is_admissible(const State& s, double margin)
{
    const std::size_t n = s.u.size();
    for (std::size_t c = 0; c < n; ++c)
        if (!admissible(s.u[c], s.v[c], margin))
            return false;
    return true;
}

State uniform_state(const Grid& grid, double u0, double v0)
{
    return State{Field(grid, u0), Field(grid, v0)};
}

namespace {

void require_unit_interval(double z, const char* who)
{
    if (!(z > 0.0 && z < 1.0))
        throw DomainError(std::string(who) + ": argument " + std::to_string(z) + " outside (0,1)");
}

}  // namespace

double phi(double z)
{
    require_unit_interval(z, "phi");
    return z * std::log(z) + (1.0 - z) * std::log1p(-z);
}

double phi_prime(double z)
{
    require_unit_interval(z, "phi_prime");
    return std::log(z) - std::log1p(-z);
}

double phi_second(double z)
{
    require_unit_interval(z, "phi_second");
    return 1.0 / (z * (1.0 - z));
}

double local_energy(double u, double v, double grad_sq_u, double grad_sq_v, const Params& p)
{
    const double e1 = 0.5 * p.alpha * u * (1.0 - u) - 0.5 * p.beta * v * v;
    const double e2 = p.theta * (phi(u + v) + phi(u - v));
    return e1 + e2 + 0.5 * p.gamma * (grad_sq_u + grad_sq_v);
}

double total_energy(const State& s, const Params& p)
{
    const Grid& g = s.grid();
    const Field u = with_ghosts(s.u);
    const Field v = with_ghosts(s.v);
    Field gu(g), gv(g);
    grad_sq_avg(u, gu);
    grad_sq_avg(v, gv);
    Field e(g);
    const int nx = g.count(0);
    for_each_row(g, [&](int j, int k) {
        for (int i = 0; i < nx; ++i)
            e.at(i, j, k) = local_energy(u.at(i, j, k), v.at(i, j, k), gu.at(i, j, k), gv.at(i, j, k), p);
    });
    return integrate(e);
}

Field cell_mobility(const State& s)
{
    const Grid& g = s.grid();
    Field c(g);
    const std::size_t n = g.cells();
    for (std::size_t i = 0; i < n; ++i)
        c[i] = mobility(s.u[i], s.v[i]);
    fill_ghosts(c);
    return c;
}

FaceFields mobility_faces(const Field& u, const Field& v)
{
    return face_average(cell_mobility(State{u, v}));
}

std::pair<Field, Field> continuous_var_deriv(const State& s, const Params& p)
{
    const Grid& g = s.grid();
    const Field u = with_ghosts(s.u);
    const Field v = with_ghosts(s.v);
    const Field lu = laplacian(u);
    const Field lv = laplacian(v);
    Field gu(g), gv(g);
    const std::size_t n = g.cells();
    // Written in the same algebraic form as the two-level derivative so the
    // two agree bitwise when both levels coincide.
    for (std::size_t c = 0; c < n; ++c) {
        const double uc = u[c], vc = v[c];
        const double dp = phi_prime(uc + vc);
        const double dq = phi_prime(uc - vc);
        gu[c] = -0.5 * p.alpha * (uc + uc - 1.0) + p.theta * (dp + dq) - 0.5 * p.gamma * (lu[c] + lu[c]);
        gv[c] = -0.5 * p.beta * (vc + vc) + p.theta * (dp - dq) - 0.5 * p.gamma * (lv[c] + lv[c]);
    }
    return {std::move(gu), std::move(gv)};
}

double f_series(double x, double sigma, int order)
{
    if (!(x > 0.0))
        throw DomainError("f_series: x must be positive");
    const double r = sigma / x;
    if (!(std::abs(r) <= 0.5))
        throw DomainError("f_series: |sigma/x| exceeds 1/2");
    const double t = r * r;
    double power = 1.0, tail = 0.0;
    for (int k = 1; k <= order; ++k) {
        power *= t;
        tail += power / ((2.0 * k + 1.0) * (2.0 * k));
    }
    return std::log(x) + 1.0 - tail;
}

SeriesGrad f_series_grad(double x, double sigma, int order)
{
    const double r = sigma / x;
    const double t = r * r;
    double even = 1.0;  // r^{2k}
    double dx = 1.0 / x, ds = 0.0;
    for (int k = 1; k <= order; ++k) {
        const double odd = even * r;  // r^{2k-1}
        even *= t;
        dx += even / (x * (2.0 * k + 1.0));
        ds -= odd / (x * (2.0 * k + 1.0));
    }
    return {dx, ds};
}

bool dd_phi_uses_series(double a, double b) noexcept
{
    const double zeta = 0.5 * (a + b);
    const double sigma = 0.5 * (a - b);
    return std::abs(sigma) <= kSeriesRadius * std::min(zeta, 1.0 - zeta);
}

DividedDifference dd_phi_with_derivative(double a, double b, int order, KernelMode mode)
{
    require_unit_interval(a, "dd_phi");
    require_unit_interval(b, "dd_phi");
    if (a == b)
        return {phi_prime(a), 0.5 * phi_second(a)};
    if (mode == KernelMode::Series && dd_phi_uses_series(a, b)) {
        const double zeta = 0.5 * (a + b);
        const double sigma = 0.5 * (a - b);
        const double value = f_series(zeta, sigma, order) - f_series(1.0 - zeta, sigma, order);
        const SeriesGrad lo = f_series_grad(zeta, sigma, order);
        const SeriesGrad hi = f_series_grad(1.0 - zeta, sigma, order);
        const double d_zeta = lo.dx + hi.dx;
        const double d_sigma = lo.dsigma - hi.dsigma;
        return {value, 0.5 * (d_zeta + d_sigma)};
    }
    const double q = (phi(a) - phi(b)) / (a - b);
    return {q, (phi_prime(a) - q) / (a - b)};
}

double dd_phi(double a, double b, int order, KernelMode mode)
{
    return dd_phi_with_derivative(a, b, order, mode).value;
}

}  // namespace acch
