#pragma once

#include "acch/grid.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace acch {

/// Raised when a logarithmic term is evaluated outside (0,1).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when a state leaves the admissible set.
class InadmissibleStateError : public std::runtime_error {
public:
    InadmissibleStateError(const std::string& what, std::size_t cell)
        : std::runtime_error(what + " at cell " + std::to_string(cell)), cell_(cell)
    {
    }
    std::size_t cell() const noexcept { return cell_; }

private:
    std::size_t cell_;
};

/// Model coefficients. gamma: gradient energy; theta: entropy; alpha, beta:
/// nearest and next-nearest neighbour interactions; rho: density of the
/// order-parameter relaxation; series_order: terms kept in the divided
/// difference expansion.
struct Params {
    double alpha = 4.0;
    double beta = 2.0;
    double gamma = 0.005;
    double theta = 0.1;
    double rho = 0.001;
    int series_order = 10;

    void validate() const;
};

/// Pair of cell fields: u (conserved concentration) and v (order parameter).
struct State {
    Field u;
    Field v;

    const Grid& grid() const noexcept { return u.grid(); }
};

/// Margin used when deciding admissibility.
inline constexpr double kAdmissibilityMargin = 1e-12;

/// True if u, v satisfy 0<u<1, |v|<1/2, 0<u+-v<1 with margin m.
bool admissible(double u, double v, double margin = kAdmissibilityMargin) noexcept;
/// Throws InadmissibleStateError naming the first offending cell.
void check_admissible(const State& s, double margin = kAdmissibilityMargin);
bool is_admissible(const State& s, double margin = kAdmissibilityMargin);

State uniform_state(const Grid& grid, double u0, double v0);

// Pointwise constitutive functions.

inline double mobility(double u, double v) noexcept { return u * (1.0 - u) * (0.25 - v * v); }
inline double mobility_du(double u, double v) noexcept { return (1.0 - 2.0 * u) * (0.25 - v * v); }
inline double mobility_dv(double u, double v) noexcept { return -2.0 * v * u * (1.0 - u); }

double phi(double z);
double phi_prime(double z);
/// Phi''(z) = 1/(z(1-z)).
double phi_second(double z);

double local_energy(double u, double v, double grad_sq_u, double grad_sq_v, const Params& p);

/// Discrete total free energy: sum of the local energy times the cell volume,
/// with the gradient parts from grad_sq_avg.
double total_energy(const State& s, const Params& p);

/// Per-cell mobility of a state (ghosts filled).
Field cell_mobility(const State& s);
/// Face mobilities: arithmetic mean of the two adjacent cell mobilities.
FaceFields mobility_faces(const Field& u, const Field& v);

/// Variational derivative with the discrete Laplacian substituted for the
/// continuous one.
std::pair<Field, Field> continuous_var_deriv(const State& s, const Params& p);

/// Truncated expansion of ((x+s)ln(x+s) - (x-s)ln(x-s))/(2s) about s = 0:
/// ln x + 1 - sum_{k=1..S} (s/x)^{2k} / ((2k+1)2k). Requires |s/x| <= 1/2.
double f_series(double x, double sigma, int order);

/// Partial derivatives of f_series with respect to x and sigma.
struct SeriesGrad {
    double dx;
    double dsigma;
};
SeriesGrad f_series_grad(double x, double sigma, int order);

/// How the divided difference of Phi is evaluated.
enum class KernelMode {
    /// Series near the diagonal, exact quotient elsewhere.
    Series,
    /// Always the exact quotient (Phi' on the diagonal). Used to check the
    /// discrete energy identity, which it satisfies to round-off.
    ExactQuotient,
};

/// Divided difference (Phi(a) - Phi(b)) / (a - b) and its derivative in a.
struct DividedDifference {
    double value;
    double d_a;
};

/// The series is used while |sigma| <= kSeriesRadius * min(zeta, 1 - zeta).
/// At ratio 1/4 the S = 10 tail is below 1e-16; at 1/2 it would reach 5e-10.
inline constexpr double kSeriesRadius = 0.25;

/// True if dd_phi uses the series for this pair.
bool dd_phi_uses_series(double a, double b) noexcept;

double dd_phi(double a, double b, int order, KernelMode mode = KernelMode::Series);
DividedDifference dd_phi_with_derivative(double a, double b, int order, KernelMode mode = KernelMode::Series);

}  // namespace acch
