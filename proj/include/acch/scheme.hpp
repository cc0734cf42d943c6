#pragma once

#include "acch/grid.hpp"
#include "acch/linalg/sparse.hpp"
#include "acch/physics.hpp"

#include <memory>
#include <utility>

namespace acch {

/// Time level at which the mobility inside the dissipation operator is taken.
enum class MobilityLevel {
    /// c(U^n), known before the step.
    Lagged,
    /// c((U^n + U^{n+1})/2); keeps the scheme second order in time.
    Midpoint,
};

std::string to_string(MobilityLevel level);
MobilityLevel parse_mobility_level(const std::string& name);

struct SchemeOptions {
    KernelMode kernel = KernelMode::Series;
    MobilityLevel mobility = MobilityLevel::Midpoint;
};

/// Cell and face mobilities of one state.
struct Mobility {
    Field cells;
    FaceFields faces;
};
Mobility mobility_of(const State& s);

/// Sparsity layout of the step Jacobian: every cell couples to the cells
/// within taxicab distance 2 (13 in 2D, 25 in 3D), folded through the
/// boundary rule. Built once per grid and shared between steps.
class JacobianLayout {
public:
    explicit JacobianLayout(const Grid& grid);

    const Grid& grid() const noexcept { return grid_; }
    int slots() const noexcept { return int(offsets_.size()); }
    const std::array<int, 3>& offset(int slot) const noexcept { return offsets_[std::size_t(slot)]; }
    /// Slot of an offset with |dx|+|dy|+|dz| <= 2, or -1.
    int slot_of(int dx, int dy, int dz) const noexcept;
    /// Block position in the matrix for (row, slot).
    std::size_t position(std::size_t row, int slot) const noexcept
    {
        return slot_pos_[row * offsets_.size() + std::size_t(slot)];
    }
    /// A zeroed matrix with this layout.
    StencilMatrix make_matrix() const { return StencilMatrix(row_ptr_, cols_); }

private:
    Grid grid_;
    std::vector<std::array<int, 3>> offsets_;
    std::array<int, 125> slot_table_{};
    std::vector<std::size_t> row_ptr_;
    std::vector<int> cols_;
    std::vector<std::size_t> slot_pos_;
};

/// Data of one implicit step from U^n with step size dt.
class StepProblem {
public:
    StepProblem(const Params& params, State prev, double dt, SchemeOptions options = {},
                std::shared_ptr<const JacobianLayout> layout = nullptr);

    const Grid& grid() const noexcept { return prev_.grid(); }
    const Params& params() const noexcept { return params_; }
    const SchemeOptions& options() const noexcept { return options_; }
    const State& prev() const noexcept { return prev_; }
    double dt() const noexcept { return dt_; }

    /// Laplacians of U^n.
    const Field& prev_lap_u() const noexcept { return lap_u_; }
    const Field& prev_lap_v() const noexcept { return lap_v_; }
    /// Mobility of U^n.
    const Mobility& lagged_mobility() const noexcept { return lagged_; }
    const std::shared_ptr<const JacobianLayout>& layout() const noexcept { return layout_; }

    /// Mobility used with U^{n+1} = next.
    Mobility mobility_for(const State& next) const;

private:
    Params params_;
    SchemeOptions options_;
    State prev_;
    double dt_;
    Field lap_u_;
    Field lap_v_;
    Mobility lagged_;
    std::shared_ptr<const JacobianLayout> layout_;
};

/// Two-level discrete variational derivative (G_u, G_v) between `next` and `prev`.
std::pair<Field, Field> dvd_g(const State& next, const State& prev, const Params& p,
                              KernelMode kernel = KernelMode::Series);

/// Dissipation operator: (-div(c grad G_u), (c/rho) G_v).
std::pair<Field, Field> apply_A(const Mobility& mob, double rho, const std::pair<Field, Field>& g);
std::pair<Field, Field> apply_A(const StepProblem& prob, const State& next, const std::pair<Field, Field>& g);

/// F(U^{n+1}) = (U^{n+1} - U^n)/dt + A G(U^{n+1}, U^n).
std::pair<Field, Field> residual(const StepProblem& prob, const State& next);

/// Interleaved unknown vector (u_0, v_0, u_1, v_1, ...).
Vector pack(const State& s);
State unpack(const Grid& grid, std::span<const double> x);
Vector pack(const std::pair<Field, Field>& f);

/// Residual as an interleaved vector. Throws InadmissibleStateError.
Vector residual_vector(const StepProblem& prob, std::span<const double> x);

/// Analytic Jacobian dF/dU^{n+1}.
StencilMatrix assemble_jacobian(const StepProblem& prob, const State& next);
void assemble_jacobian(const StepProblem& prob, const State& next, StencilMatrix& out);

}  // namespace acch
