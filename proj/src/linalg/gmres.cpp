#include "acch/linalg/gmres.hpp"

#include "acch/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace acch {

namespace {

void axpy(double a, std::span<const double> x, std::span<double> y)
{
    parallel_for(y.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            y[i] += a * x[i];
    });
}

void scale(double a, std::span<double> x)
{
    parallel_for(x.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            x[i] *= a;
    });
}

double true_residual(const LinearOperator& a, std::span<const double> b, std::span<const double> x, Vector& r)
{
    a(x, r);
    parallel_for(r.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
            r[i] = b[i] - r[i];
    });
    return norm2(r);
}

}  // namespace

GmresResult gmres(const LinearOperator& a, const LinearOperator& precond, std::span<const double> b,
                  std::span<double> x, const GmresOptions& options)
{
    if (options.restart < 1 || options.max_iterations < 0)
        throw std::invalid_argument("invalid GMRES options");
    const std::size_t n = b.size();
    if (x.size() != n)
        throw std::invalid_argument("GMRES vector size mismatch");
    const int m = options.restart;

    GmresResult res;
    res.rhs_norm = norm2(b);
    const double target = std::max(options.rtol * res.rhs_norm, options.atol);

    Vector r(n), w(n), z(n);
    std::vector<Vector> v(std::size_t(m) + 1, Vector(n));
    std::vector<Vector> h(std::size_t(m) + 1, Vector(std::size_t(m), 0.0));
    const std::size_t mm = std::size_t(m);
    Vector cs(mm), sn(mm), g(mm + 1);

    double beta = true_residual(a, b, x, r);
    res.residual_norm = beta;
    auto apply_m = [&](std::span<const double> in, std::span<double> out) {
        if (precond)
            precond(in, out);
        else
            std::copy(in.begin(), in.end(), out.begin());
    };

    while (beta > target && res.iterations < options.max_iterations) {
        std::copy(r.begin(), r.end(), v[0].begin());
        scale(1.0 / beta, v[0]);
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;
        int j = 0;
        bool breakdown = false;
        for (; j < m && res.iterations < options.max_iterations; ++j) {
            ++res.iterations;
            apply_m(v[std::size_t(j)], z);
            a(z, w);
            const double before = norm2(w);
            for (int i = 0; i <= j; ++i) {
                const double hij = dot(w, v[std::size_t(i)]);
                h[std::size_t(i)][std::size_t(j)] = hij;
                axpy(-hij, v[std::size_t(i)], w);
            }
            double hn = norm2(w);
            if (hn < 0.7 * before) {
                // Lost orthogonality: one more Gram-Schmidt pass.
                for (int i = 0; i <= j; ++i) {
                    const double c = dot(w, v[std::size_t(i)]);
                    h[std::size_t(i)][std::size_t(j)] += c;
                    axpy(-c, v[std::size_t(i)], w);
                }
                hn = norm2(w);
            }
            h[std::size_t(j) + 1][std::size_t(j)] = hn;
            if (hn > 0.0) {
                std::copy(w.begin(), w.end(), v[std::size_t(j) + 1].begin());
                scale(1.0 / hn, v[std::size_t(j) + 1]);
            } else {
                breakdown = true;
            }
            for (int i = 0; i < j; ++i) {
                const double t = cs[std::size_t(i)] * h[std::size_t(i)][std::size_t(j)] +
                                 sn[std::size_t(i)] * h[std::size_t(i) + 1][std::size_t(j)];
                h[std::size_t(i) + 1][std::size_t(j)] = -sn[std::size_t(i)] * h[std::size_t(i)][std::size_t(j)] +
                                                        cs[std::size_t(i)] * h[std::size_t(i) + 1][std::size_t(j)];
                h[std::size_t(i)][std::size_t(j)] = t;
            }
            const double hjj = h[std::size_t(j)][std::size_t(j)];
            const double den = std::hypot(hjj, hn);
            cs[std::size_t(j)] = den > 0.0 ? hjj / den : 1.0;
            sn[std::size_t(j)] = den > 0.0 ? hn / den : 0.0;
            h[std::size_t(j)][std::size_t(j)] = den;
            h[std::size_t(j) + 1][std::size_t(j)] = 0.0;
            g[std::size_t(j) + 1] = -sn[std::size_t(j)] * g[std::size_t(j)];
            g[std::size_t(j)] = cs[std::size_t(j)] * g[std::size_t(j)];
            if (std::abs(g[std::size_t(j) + 1]) <= target || breakdown) {
                ++j;
                break;
            }
        }
        // Back substitution for y, then x += M^{-1} V y.
        Vector y(std::size_t(j), 0.0);
        for (int i = j - 1; i >= 0; --i) {
            double s = g[std::size_t(i)];
            for (int k = i + 1; k < j; ++k)
                s -= h[std::size_t(i)][std::size_t(k)] * y[std::size_t(k)];
            const double d = h[std::size_t(i)][std::size_t(i)];
            y[std::size_t(i)] = d != 0.0 ? s / d : 0.0;
        }
        std::fill(w.begin(), w.end(), 0.0);
        for (int i = 0; i < j; ++i)
            axpy(y[std::size_t(i)], v[std::size_t(i)], w);
        apply_m(w, z);
        axpy(1.0, z, x);
        const double prev = beta;
        beta = true_residual(a, b, x, r);
        res.residual_norm = beta;
        if (breakdown && beta >= prev)
            break;
    }
    res.converged = beta <= target;
    return res;
}

}  // namespace acch
