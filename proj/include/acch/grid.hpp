#pragma once

#include <array>
#include <functional>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace acch {

enum class Boundary { Periodic, Neumann };

std::string to_string(Boundary bc);
Boundary parse_boundary(const std::string& name);

/// Structured uniform cell-centered mesh on [0,L_x] x [0,L_y] (x [0,L_z]).
///
/// Cell (i,j,k), 0-based, has its center at ((i+1/2)dx, (j+1/2)dy, (k+1/2)dz).
/// Unused axes in 2D have count 1 and are never differenced.
class Grid {
public:
    Grid() = default;
    Grid(int dim, std::array<int, 3> counts, std::array<double, 3> lengths, Boundary bc);

    static Grid square(int n, double length, Boundary bc) { return Grid(2, {n, n, 1}, {length, length, 1.0}, bc); }
    static Grid cube(int n, double length, Boundary bc) { return Grid(3, {n, n, n}, {length, length, length}, bc); }

    int dim() const noexcept { return dim_; }
    int count(int axis) const noexcept { return n_[axis]; }
    double length(int axis) const noexcept { return len_[axis]; }
    double spacing(int axis) const noexcept { return h_[axis]; }
    Boundary bc() const noexcept { return bc_; }

    std::size_t cells() const noexcept { return std::size_t(n_[0]) * n_[1] * n_[2]; }
    double cell_volume() const noexcept;
    double domain_volume() const noexcept;

    /// Linear interior index, x fastest.
    std::size_t cell(int i, int j, int k = 0) const noexcept
    {
        return std::size_t(i) + std::size_t(n_[0]) * (std::size_t(j) + std::size_t(n_[1]) * std::size_t(k));
    }
    std::array<int, 3> coords(std::size_t c) const noexcept
    {
        const int i = int(c % n_[0]);
        c /= n_[0];
        return {i, int(c % n_[1]), int(c / n_[1])};
    }

    /// Cell whose value is read after `steps` unit moves along `axis` through
    /// filled ghost layers. Periodic wraps; under Neumann every move out of the
    /// domain lands on a mirror of the boundary cell, so the index clamps.
    int shift(int index, int axis, int steps) const noexcept;
    std::size_t neighbor(std::size_t c, int axis, int steps) const noexcept;

    double center(int axis, int index) const noexcept { return (index + 0.5) * h_[axis]; }

    bool operator==(const Grid& o) const noexcept
    {
        return dim_ == o.dim_ && n_ == o.n_ && len_ == o.len_ && bc_ == o.bc_;
    }

private:
    int dim_ = 2;
    std::array<int, 3> n_{4, 4, 1};
    std::array<double, 3> len_{1.0, 1.0, 1.0};
    std::array<double, 3> h_{0.25, 0.25, 1.0};
    Boundary bc_ = Boundary::Periodic;
};

/// Scalar cell values with one ghost layer on each side of every active axis.
/// Storage is padded and contiguous with x fastest; ghost corners are unused.
class Field {
public:
    Field() = default;
    explicit Field(const Grid& grid, double value = 0.0);

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return grid_.cells(); }

    std::size_t stride(int axis) const noexcept { return stride_[axis]; }
    /// Padded offset of interior cell (i,j,k); ghosts sit at -1 and n.
    std::size_t offset(int i, int j, int k = 0) const noexcept
    {
        return std::size_t(i + 1) + stride_[1] * std::size_t(j + 1) + stride_[2] * std::size_t(k + pad_z_);
    }
    std::size_t offset(std::size_t c) const noexcept
    {
        const auto ijk = grid_.coords(c);
        return offset(ijk[0], ijk[1], ijk[2]);
    }

    double& at(int i, int j, int k = 0) noexcept { return data_[offset(i, j, k)]; }
    double at(int i, int j, int k = 0) const noexcept { return data_[offset(i, j, k)]; }
    double& operator[](std::size_t c) noexcept { return data_[offset(c)]; }
    double operator[](std::size_t c) const noexcept { return data_[offset(c)]; }

    double* raw() noexcept { return data_.data(); }
    const double* raw() const noexcept { return data_.data(); }

    /// Interior values in linear cell order.
    std::vector<double> interior() const;
    void assign_interior(const std::vector<double>& values);

    void fill(double value);

private:
    Grid grid_;
    std::array<std::size_t, 3> stride_{1, 0, 0};
    int pad_z_ = 0;
    std::vector<double> data_;
};

/// Values on the faces normal to one axis. Face f along that axis lies at the
/// half-integer position f - 1/2 between cells f-1 and f, for f = 0..n; under
/// periodic boundaries faces 0 and n coincide and carry the same value.
class FaceField {
public:
    FaceField() = default;
    FaceField(const Grid& grid, int axis, double value = 0.0);

    int axis() const noexcept { return axis_; }
    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::size_t index(int i, int j, int k = 0) const noexcept
    {
        return std::size_t(i) + std::size_t(ext_[0]) * (std::size_t(j) + std::size_t(ext_[1]) * std::size_t(k));
    }
    /// Face on the low side of interior cell c along this axis.
    std::size_t low_face(std::size_t c) const noexcept
    {
        const auto ijk = grid_.coords(c);
        return index(ijk[0], ijk[1], ijk[2]);
    }
    /// Face on the high side of interior cell c.
    std::size_t high_face(std::size_t c) const noexcept
    {
        auto ijk = grid_.coords(c);
        ++ijk[axis_];
        return index(ijk[0], ijk[1], ijk[2]);
    }

    double& operator[](std::size_t f) noexcept { return values_[f]; }
    double operator[](std::size_t f) const noexcept { return values_[f]; }
    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    Grid grid_;
    int axis_ = 0;
    std::array<int, 3> ext_{1, 1, 1};
    std::vector<double> values_;
};

/// One FaceField per active axis.
using FaceFields = std::vector<FaceField>;

/// Writes the ghost layer from the interior: periodic wraps, Neumann mirrors
/// the adjacent interior cell. Interior values are untouched.
void fill_ghosts(Field& f);
Field with_ghosts(Field f);

/// One-sided differences per cell, (f_{i+1}-f_i)/h and (f_i-f_{i-1})/h.
/// Ghosts of f must be filled.
Field diff_forward(const Field& f, int axis);
Field diff_backward(const Field& f, int axis);
/// Centered difference on faces: face f holds (f_f - f_{f-1})/h.
FaceField diff_half(const Field& f, int axis);

/// Sum over axes of ((D+ f)^2 + (D- f)^2)/2, the discrete |grad f|^2.
Field grad_sq_avg(const Field& f);
void grad_sq_avg(const Field& f, Field& out);

/// 5-point (2D) / 7-point (3D) Laplacian.
Field laplacian(const Field& f);
void laplacian(const Field& f, Field& out);

/// Flux-difference form of div(c grad g): per axis
/// (c_{i+1/2}(g_{i+1}-g_i) - c_{i-1/2}(g_i-g_{i-1})) / h^2.
Field div_c_grad(const FaceFields& c, const Field& g);
void div_c_grad(const FaceFields& c, const Field& g, Field& out);

/// Arithmetic face means of a per-cell coefficient (ghosts of `cell` filled).
FaceFields face_average(const Field& cell);

/// Sum of interior values times the cell volume, in fixed pairwise order.
double integrate(const Field& f);
/// Sum of interior values, in fixed pairwise order.
double sum_interior(const Field& f);
/// <f g> = sum f_i g_i times the cell volume.
double inner(const Field& f, const Field& g);

/// Calls row(j, k) for every x-row of interior cells, in parallel.
void for_each_row(const Grid& grid, const std::function<void(int, int)>& row);

}  // namespace acch
