#include "acch/grid.hpp"

#include "acch/parallel.hpp"

#include <cmath>

namespace acch {

std::string to_string(Boundary bc)
{
    return bc == Boundary::Periodic ? "periodic" : "neumann";
}

Boundary parse_boundary(const std::string& name)
{
    if (name == "periodic")
        return Boundary::Periodic;
    if (name == "neumann")
        return Boundary::Neumann;
    throw std::invalid_argument("unknown boundary condition '" + name + "'");
}

Grid::Grid(int dim, std::array<int, 3> counts, std::array<double, 3> lengths, Boundary bc)
    : dim_(dim), n_(counts), len_(lengths), bc_(bc)
{
    if (dim != 2 && dim != 3)
        throw std::invalid_argument("grid dimension must be 2 or 3");
    if (dim == 2) {
        n_[2] = 1;
        len_[2] = 1.0;
    }
    for (int a = 0; a < dim; ++a) {
        if (n_[a] < 4)
            throw std::invalid_argument("grid needs at least 4 cells per axis");
        if (!(len_[a] > 0.0) || !std::isfinite(len_[a]))
            throw std::invalid_argument("grid lengths must be positive");
    }
    for (int a = 0; a < 3; ++a)
        h_[a] = len_[a] / n_[a];
}

double Grid::cell_volume() const noexcept
{
    double v = 1.0;
    for (int a = 0; a < dim_; ++a)
        v *= h_[a];
    return v;
}

double Grid::domain_volume() const noexcept
{
    double v = 1.0;
    for (int a = 0; a < dim_; ++a)
        v *= len_[a];
    return v;
}

int Grid::shift(int index, int axis, int steps) const noexcept
{
    const int n = n_[axis];
    int r = index + steps;
    if (bc_ == Boundary::Periodic) {
        r %= n;
        return r < 0 ? r + n : r;
    }
    // Each unit step out of the domain lands on the mirrored ghost, which
    // aliases the boundary cell; repeated steps therefore clamp.
    return r < 0 ? 0 : (r >= n ? n - 1 : r);
}

std::size_t Grid::neighbor(std::size_t c, int axis, int steps) const noexcept
{
    auto ijk = coords(c);
    ijk[axis] = shift(ijk[axis], axis, steps);
    return cell(ijk[0], ijk[1], ijk[2]);
}

Field::Field(const Grid& grid, double value) : grid_(grid)
{
    const std::size_t px = std::size_t(grid.count(0)) + 2;
    const std::size_t py = std::size_t(grid.count(1)) + 2;
    const std::size_t pz = grid.dim() == 3 ? std::size_t(grid.count(2)) + 2 : 1;
    pad_z_ = grid.dim() == 3 ? 1 : 0;
    stride_ = {1, px, px * py};
    data_.assign(px * py * pz, value);
}

std::vector<double> Field::interior() const
{
    std::vector<double> out(size());
    for (std::size_t c = 0; c < out.size(); ++c)
        out[c] = (*this)[c];
    return out;
}

void Field::assign_interior(const std::vector<double>& values)
{
    if (values.size() != size())
        throw std::invalid_argument("interior size mismatch");
    for (std::size_t c = 0; c < values.size(); ++c)
        (*this)[c] = values[c];
}

void Field::fill(double value)
{
    std::fill(data_.begin(), data_.end(), value);
}

FaceField::FaceField(const Grid& grid, int axis, double value) : grid_(grid), axis_(axis)
{
    ext_ = {grid.count(0), grid.count(1), grid.count(2)};
    ext_[axis] += 1;
    values_.assign(std::size_t(ext_[0]) * ext_[1] * ext_[2], value);
}

void for_each_row(const Grid& grid, const std::function<void(int, int)>& row)
{
    const int ny = grid.count(1);
    const std::size_t rows = std::size_t(ny) * grid.count(2);
    // Chunk by cells so small grids stay serial.
    const std::size_t nx = std::size_t(grid.count(0));
    const std::size_t chunks = chunk_count(rows * nx);
    default_pool().run(chunks, [&](std::size_t ch) {
        const std::size_t b = ch * rows / chunks;
        const std::size_t e = (ch + 1) * rows / chunks;
        for (std::size_t r = b; r < e; ++r)
            row(int(r % ny), int(r / ny));
    });
}

void fill_ghosts(Field& f)
{
    const Grid& g = f.grid();
    const bool periodic = g.bc() == Boundary::Periodic;
    const int nx = g.count(0), ny = g.count(1), nz = g.count(2);
    double* d = f.raw();
    // x ghosts
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j) {
            d[f.offset(-1, j, k)] = d[f.offset(periodic ? nx - 1 : 0, j, k)];
            d[f.offset(nx, j, k)] = d[f.offset(periodic ? 0 : nx - 1, j, k)];
        }
    // y ghosts
    for (int k = 0; k < nz; ++k)
        for (int i = 0; i < nx; ++i) {
            d[f.offset(i, -1, k)] = d[f.offset(i, periodic ? ny - 1 : 0, k)];
            d[f.offset(i, ny, k)] = d[f.offset(i, periodic ? 0 : ny - 1, k)];
        }
    if (g.dim() == 3) {
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                d[f.offset(i, j, -1)] = d[f.offset(i, j, periodic ? nz - 1 : 0)];
                d[f.offset(i, j, nz)] = d[f.offset(i, j, periodic ? 0 : nz - 1)];
            }
    }
}

Field with_ghosts(Field f)
{
    fill_ghosts(f);
    return f;
}

namespace {

Field one_sided(const Field& f, int axis, bool forward)
{
    const Grid& g = f.grid();
    Field out(g);
    const std::size_t s = f.stride(axis);
    const double inv_h = 1.0 / g.spacing(axis);
    const int nx = g.count(0);
    for_each_row(g, [&](int j, int k) {
        const double* in = f.raw() + f.offset(0, j, k);
        double* o = out.raw() + out.offset(0, j, k);
        for (int i = 0; i < nx; ++i)
            o[i] = forward ? (in[i + s] - in[i]) * inv_h : (in[i] - in[i - s]) * inv_h;
    });
    return out;
}

}  // namespace

Field diff_forward(const Field& f, int axis) { return one_sided(f, axis, true); }
Field diff_backward(const Field& f, int axis) { return one_sided(f, axis, false); }

FaceField diff_half(const Field& f, int axis)
{
    const Grid& g = f.grid();
    FaceField out(g, axis);
    const double inv_h = 1.0 / g.spacing(axis);
    const int n0 = g.count(0) + (axis == 0), n1 = g.count(1) + (axis == 1), n2 = g.count(2) + (axis == 2);
    const std::size_t s = f.stride(axis);
    for (int k = 0; k < n2; ++k)
        for (int j = 0; j < n1; ++j)
            for (int i = 0; i < n0; ++i) {
                // Face (i,j,k) sits between the cell at (i,j,k) and its low neighbor.
                const std::size_t hi = f.offset(i, j, k);
                out[out.index(i, j, k)] = (f.raw()[hi] - f.raw()[hi - s]) * inv_h;
            }
    return out;
}

void grad_sq_avg(const Field& f, Field& out)
{
    const Grid& g = f.grid();
    const int nx = g.count(0);
    const int dim = g.dim();
    for_each_row(g, [&](int j, int k) {
        const double* in = f.raw() + f.offset(0, j, k);
        double* o = out.raw() + out.offset(0, j, k);
        for (int i = 0; i < nx; ++i) {
            double acc = 0.0;
            for (int a = 0; a < dim; ++a) {
                const std::size_t s = f.stride(a);
                const double inv_h = 1.0 / g.spacing(a);
                const double dp = (in[i + s] - in[i]) * inv_h;
                const double dm = (in[i] - in[i - s]) * inv_h;
                acc += 0.5 * (dp * dp + dm * dm);
            }
            o[i] = acc;
        }
    });
}

Field grad_sq_avg(const Field& f)
{
    Field out(f.grid());
    grad_sq_avg(f, out);
    return out;
}

void laplacian(const Field& f, Field& out)
{
    const Grid& g = f.grid();
    const int nx = g.count(0);
    const int dim = g.dim();
    std::array<double, 3> w{};
    for (int a = 0; a < dim; ++a)
        w[a] = 1.0 / (g.spacing(a) * g.spacing(a));
    for_each_row(g, [&](int j, int k) {
        const double* in = f.raw() + f.offset(0, j, k);
        double* o = out.raw() + out.offset(0, j, k);
        for (int i = 0; i < nx; ++i) {
            double acc = 0.0;
            for (int a = 0; a < dim; ++a) {
                const std::size_t s = f.stride(a);
                acc += w[a] * ((in[i + s] - in[i]) - (in[i] - in[i - s]));
            }
            o[i] = acc;
        }
    });
}

Field laplacian(const Field& f)
{
    Field out(f.grid());
    laplacian(f, out);
    return out;
}

void div_c_grad(const FaceFields& c, const Field& gfield, Field& out)
{
    const Grid& g = gfield.grid();
    const int nx = g.count(0);
    const int dim = g.dim();
    std::array<double, 3> w{};
    for (int a = 0; a < dim; ++a)
        w[a] = 1.0 / (g.spacing(a) * g.spacing(a));
    for_each_row(g, [&](int j, int k) {
        const double* in = gfield.raw() + gfield.offset(0, j, k);
        double* o = out.raw() + out.offset(0, j, k);
        for (int i = 0; i < nx; ++i) {
            double acc = 0.0;
            for (int a = 0; a < dim; ++a) {
                const std::size_t s = gfield.stride(a);
                std::array<int, 3> lo{i, j, k};
                const double cm = c[a][c[a].index(lo[0], lo[1], lo[2])];
                ++lo[a];
                const double cp = c[a][c[a].index(lo[0], lo[1], lo[2])];
                acc += w[a] * (cp * (in[i + s] - in[i]) - cm * (in[i] - in[i - s]));
            }
            o[i] = acc;
        }
    });
}

Field div_c_grad(const FaceFields& c, const Field& g)
{
    Field out(g.grid());
    div_c_grad(c, g, out);
    return out;
}

FaceFields face_average(const Field& cell)
{
    const Grid& g = cell.grid();
    FaceFields faces;
    for (int a = 0; a < g.dim(); ++a) {
        FaceField ff(g, a);
        const std::size_t s = cell.stride(a);
        const int n0 = g.count(0) + (a == 0), n1 = g.count(1) + (a == 1), n2 = g.count(2) + (a == 2);
        for (int k = 0; k < n2; ++k)
            for (int j = 0; j < n1; ++j)
                for (int i = 0; i < n0; ++i) {
                    const std::size_t hi = cell.offset(i, j, k);
                    ff[ff.index(i, j, k)] = 0.5 * (cell.raw()[hi] + cell.raw()[hi - s]);
                }
        faces.push_back(std::move(ff));
    }
    return faces;
}

namespace {

double row_reduce(const Grid& g, const std::function<double(int, int)>& row_sum)
{
    const int ny = g.count(1);
    const std::size_t rows = std::size_t(ny) * g.count(2);
    std::vector<double> sums(rows);
    for_each_row(g, [&](int j, int k) { sums[std::size_t(k) * ny + j] = row_sum(j, k); });
    return pairwise_sum(sums.data(), sums.size());
}

}  // namespace

double sum_interior(const Field& f)
{
    const int nx = f.grid().count(0);
    return row_reduce(f.grid(), [&](int j, int k) { return pairwise_sum(f.raw() + f.offset(0, j, k), nx); });
}

double integrate(const Field& f) { return sum_interior(f) * f.grid().cell_volume(); }

double inner(const Field& f, const Field& g)
{
    const int nx = f.grid().count(0);
    return row_reduce(f.grid(),
                      [&](int j, int k) {
                          const double* a = f.raw() + f.offset(0, j, k);
                          const double* b = g.raw() + g.offset(0, j, k);
                          std::vector<double> prod(nx);
                          for (int i = 0; i < nx; ++i)
                              prod[i] = a[i] * b[i];
                          return pairwise_sum(prod.data(), prod.size());
                      }) *
           f.grid().cell_volume();
}

}  // namespace acch
