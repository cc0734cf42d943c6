#include "acch/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace acch {

std::string to_string(MobilityLevel level)
{
    return level == MobilityLevel::Lagged ? "lagged" : "midpoint";
}

MobilityLevel parse_mobility_level(const std::string& name)
{
    if (name == "lagged")
        return MobilityLevel::Lagged;
    if (name == "midpoint")
        return MobilityLevel::Midpoint;
    throw std::invalid_argument("unknown mobility level '" + name + "'");
}

Mobility mobility_of(const State& s)
{
    Mobility m{cell_mobility(s), {}};
    m.faces = face_average(m.cells);
    return m;
}

JacobianLayout::JacobianLayout(const Grid& grid) : grid_(grid)
{
    slot_table_.fill(-1);
    const int zr = grid.dim() == 3 ? 2 : 0;
    for (int dz = -zr; dz <= zr; ++dz)
        for (int dy = -2; dy <= 2; ++dy)
            for (int dx = -2; dx <= 2; ++dx)
                if (std::abs(dx) + std::abs(dy) + std::abs(dz) <= 2) {
                    slot_table_[std::size_t((dx + 2) + 5 * (dy + 2) + 25 * (dz + 2))] = int(offsets_.size());
                    offsets_.push_back({dx, dy, dz});
                }

    const std::size_t n = grid.cells();
    const std::size_t ns = offsets_.size();
    row_ptr_.assign(n + 1, 0);
    slot_pos_.resize(n * ns);
    cols_.reserve(n * ns);
    std::vector<int> slot_col(ns), uniq;
    for (std::size_t c = 0; c < n; ++c) {
        const auto ijk = grid.coords(c);
        for (std::size_t s = 0; s < ns; ++s) {
            const auto& o = offsets_[s];
            slot_col[s] = int(grid.cell(grid.shift(ijk[0], 0, o[0]), grid.shift(ijk[1], 1, o[1]),
                                        grid.dim() == 3 ? grid.shift(ijk[2], 2, o[2]) : 0));
        }
        uniq = slot_col;
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        row_ptr_[c] = cols_.size();
        for (std::size_t s = 0; s < ns; ++s)
            slot_pos_[c * ns + s] =
                cols_.size() + std::size_t(std::lower_bound(uniq.begin(), uniq.end(), slot_col[s]) - uniq.begin());
        cols_.insert(cols_.end(), uniq.begin(), uniq.end());
    }
    row_ptr_[n] = cols_.size();
}

int JacobianLayout::slot_of(int dx, int dy, int dz) const noexcept
{
    if (std::abs(dx) + std::abs(dy) + std::abs(dz) > 2)
        return -1;
    return slot_table_[std::size_t((dx + 2) + 5 * (dy + 2) + 25 * (dz + 2))];
}

StepProblem::StepProblem(const Params& params, State prev, double dt, SchemeOptions options,
                         std::shared_ptr<const JacobianLayout> layout)
    : params_(params), options_(options), prev_(std::move(prev)), dt_(dt), layout_(std::move(layout))
{
    params_.validate();
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("time step must be positive");
    check_admissible(prev_);
    fill_ghosts(prev_.u);
    fill_ghosts(prev_.v);
    lap_u_ = laplacian(prev_.u);
    lap_v_ = laplacian(prev_.v);
    lagged_ = mobility_of(prev_);
    if (!layout_ || !(layout_->grid() == prev_.grid()))
        layout_ = std::make_shared<JacobianLayout>(prev_.grid());
}

Mobility StepProblem::mobility_for(const State& next) const
{
    if (options_.mobility == MobilityLevel::Lagged)
        return lagged_;
    const Grid& g = grid();
    State mid{Field(g), Field(g)};
    const std::size_t n = g.cells();
    for (std::size_t c = 0; c < n; ++c) {
        mid.u[c] = 0.5 * (next.u[c] + prev_.u[c]);
        mid.v[c] = 0.5 * (next.v[c] + prev_.v[c]);
    }
    return mobility_of(mid);
}

namespace {

/// Pointwise part of the two-level derivative (everything but the Laplacians)
/// and its partials with respect to the new level.
struct LocalDvd {
    double gu, gv;
    double duu, duv, dvv;
};

LocalDvd local_dvd(double u1, double v1, double u0, double v0, const Params& p, KernelMode kernel)
{
    const auto phi_p = dd_phi_with_derivative(u1 + v1, u0 + v0, p.series_order, kernel);
    const auto phi_q = dd_phi_with_derivative(u1 - v1, u0 - v0, p.series_order, kernel);
    LocalDvd d;
    d.gu = -0.5 * p.alpha * (u1 + u0 - 1.0) + p.theta * (phi_p.value + phi_q.value);
    d.gv = -0.5 * p.beta * (v1 + v0) + p.theta * (phi_p.value - phi_q.value);
    d.duu = -0.5 * p.alpha + p.theta * (phi_p.d_a + phi_q.d_a);
    d.duv = p.theta * (phi_p.d_a - phi_q.d_a);
    d.dvv = -0.5 * p.beta + p.theta * (phi_p.d_a + phi_q.d_a);
    return d;
}

struct DvdFields {
    Field gu, gv;
    Vector duu, duv, dvv;
};

/// Full two-level derivative; `next` must have ghosts filled.
DvdFields compute_dvd(const State& next, const State& prev, const Field& lap_u0, const Field& lap_v0,
                      const Params& p, KernelMode kernel, bool with_partials)
{
    const Grid& g = next.grid();
    const Field lap_u1 = laplacian(next.u);
    const Field lap_v1 = laplacian(next.v);
    DvdFields out{Field(g), Field(g), {}, {}, {}};
    if (with_partials) {
        out.duu.resize(g.cells());
        out.duv.resize(g.cells());
        out.dvv.resize(g.cells());
    }
    const int nx = g.count(0);
    for_each_row(g, [&](int j, int k) {
        for (int i = 0; i < nx; ++i) {
            const std::size_t o = next.u.offset(i, j, k);
            const LocalDvd d = local_dvd(next.u.raw()[o], next.v.raw()[o], prev.u.raw()[o], prev.v.raw()[o], p, kernel);
            out.gu.raw()[o] = d.gu - 0.5 * p.gamma * (lap_u1.raw()[o] + lap_u0.raw()[o]);
            out.gv.raw()[o] = d.gv - 0.5 * p.gamma * (lap_v1.raw()[o] + lap_v0.raw()[o]);
            if (with_partials) {
                const std::size_t c = g.cell(i, j, k);
                out.duu[c] = d.duu;
                out.duv[c] = d.duv;
                out.dvv[c] = d.dvv;
            }
        }
    });
    fill_ghosts(out.gu);
    fill_ghosts(out.gv);
    return out;
}

State ghosted(const State& s)
{
    return State{with_ghosts(s.u), with_ghosts(s.v)};
}

}  // namespace

std::pair<Field, Field> dvd_g(const State& next, const State& prev, const Params& p, KernelMode kernel)
{
    check_admissible(next);
    check_admissible(prev);
    const State n1 = ghosted(next);
    const State n0 = ghosted(prev);
    DvdFields d = compute_dvd(n1, n0, laplacian(n0.u), laplacian(n0.v), p, kernel, false);
    return {std::move(d.gu), std::move(d.gv)};
}

std::pair<Field, Field> apply_A(const Mobility& mob, double rho, const std::pair<Field, Field>& g)
{
    const Grid& grid = g.first.grid();
    const Field gu = with_ghosts(g.first);
    Field first = div_c_grad(mob.faces, gu);
    Field second(grid);
    const std::size_t n = grid.cells();
    for (std::size_t c = 0; c < n; ++c) {
        first[c] = -first[c];
        second[c] = mob.cells[c] / rho * g.second[c];
    }
    return {std::move(first), std::move(second)};
}

std::pair<Field, Field> apply_A(const StepProblem& prob, const State& next, const std::pair<Field, Field>& g)
{
    return apply_A(prob.mobility_for(next), prob.params().rho, g);
}

std::pair<Field, Field> residual(const StepProblem& prob, const State& next_in)
{
    check_admissible(next_in);
    const State next = ghosted(next_in);
    const Params& p = prob.params();
    const DvdFields d =
        compute_dvd(next, prob.prev(), prob.prev_lap_u(), prob.prev_lap_v(), p, prob.options().kernel, false);
    const Mobility mob = prob.mobility_for(next);
    const Grid& g = prob.grid();
    Field fu(g), fv(g);
    div_c_grad(mob.faces, d.gu, fu);
    const double inv_dt = 1.0 / prob.dt();
    const double inv_rho = 1.0 / p.rho;
    const int nx = g.count(0);
    for_each_row(g, [&](int j, int k) {
        for (int i = 0; i < nx; ++i) {
            const std::size_t o = fu.offset(i, j, k);
            fu.raw()[o] = (next.u.raw()[o] - prob.prev().u.raw()[o]) * inv_dt - fu.raw()[o];
            fv.raw()[o] = (next.v.raw()[o] - prob.prev().v.raw()[o]) * inv_dt +
                          mob.cells.raw()[o] * inv_rho * d.gv.raw()[o];
        }
    });
    return {std::move(fu), std::move(fv)};
}

Vector pack(const State& s)
{
    const std::size_t n = s.u.size();
    Vector x(2 * n);
    for (std::size_t c = 0; c < n; ++c) {
        x[2 * c] = s.u[c];
        x[2 * c + 1] = s.v[c];
    }
    return x;
}

Vector pack(const std::pair<Field, Field>& f)
{
    return pack(State{f.first, f.second});
}

State unpack(const Grid& grid, std::span<const double> x)
{
    if (x.size() != 2 * grid.cells())
        throw std::invalid_argument("unknown vector size mismatch");
    State s{Field(grid), Field(grid)};
    const std::size_t n = grid.cells();
    for (std::size_t c = 0; c < n; ++c) {
        s.u[c] = x[2 * c];
        s.v[c] = x[2 * c + 1];
    }
    return s;
}

Vector residual_vector(const StepProblem& prob, std::span<const double> x)
{
    return pack(residual(prob, unpack(prob.grid(), x)));
}

void assemble_jacobian(const StepProblem& prob, const State& next_in, StencilMatrix& out)
{
    check_admissible(next_in);
    const State next = ghosted(next_in);
    const Grid& g = prob.grid();
    const Params& p = prob.params();
    const JacobianLayout& layout = *prob.layout();
    const int dim = g.dim();
    const bool midpoint = prob.options().mobility == MobilityLevel::Midpoint;

    const DvdFields d =
        compute_dvd(next, prob.prev(), prob.prev_lap_u(), prob.prev_lap_v(), p, prob.options().kernel, true);
    const Mobility mob = prob.mobility_for(next);

    // Partials of the midpoint cell mobility with respect to the new level.
    Vector dc_du, dc_dv;
    if (midpoint) {
        dc_du.resize(g.cells());
        dc_dv.resize(g.cells());
        for (std::size_t c = 0; c < g.cells(); ++c) {
            const double um = 0.5 * (next.u[c] + prob.prev().u[c]);
            const double vm = 0.5 * (next.v[c] + prob.prev().v[c]);
            dc_du[c] = 0.5 * mobility_du(um, vm);
            dc_dv[c] = 0.5 * mobility_dv(um, vm);
        }
    }

    std::array<double, 3> w{};
    double wsum = 0.0;
    for (int a = 0; a < dim; ++a) {
        w[a] = 1.0 / (g.spacing(a) * g.spacing(a));
        wsum += w[a];
    }
    const double inv_dt = 1.0 / prob.dt();
    const double inv_rho = 1.0 / p.rho;
    const double half_gamma = 0.5 * p.gamma;
    const int centre = layout.slot_of(0, 0, 0);

    if (out.nonzero_blocks() == 0)
        out = layout.make_matrix();
    else
        out.set_zero();
    const auto& cols = out.cols();
    const int nx = g.count(0);

    for_each_row(g, [&](int j, int k) {
        for (int i = 0; i < nx; ++i) {
            const std::size_t c = g.cell(i, j, k);
            const std::size_t off = next.u.offset(i, j, k);

            // kappa * dG_u at the cell `o` away, into the u-row.
            auto add_dgu = [&](const std::array<int, 3>& o, double kappa) {
                const std::size_t pos = layout.position(c, layout.slot_of(o[0], o[1], o[2]));
                const std::size_t col = std::size_t(cols[pos]);
                auto& b = out.block(pos);
                b[0] += kappa * (d.duu[col] + p.gamma * wsum);
                b[1] += kappa * d.duv[col];
                // The Laplacian inside G_u at `col` reaches the true neighbors of
                // `col`; under mirroring these differ from offset composition.
                for (int a = 0; a < dim; ++a)
                    for (int s = -1; s <= 1; s += 2) {
                        const long pos2 = out.find(c, int(g.neighbor(col, a, s)));
                        if (pos2 < 0)
                            throw std::logic_error("jacobian layout misses a coupling");
                        out.block(std::size_t(pos2))[0] += kappa * (-half_gamma * w[a]);
                    }
            };
            // kappa * dc at the cell `o` away, into the u-row.
            auto add_dc = [&](const std::array<int, 3>& o, double kappa) {
                const std::size_t pos = layout.position(c, layout.slot_of(o[0], o[1], o[2]));
                const std::size_t col = std::size_t(cols[pos]);
                auto& b = out.block(pos);
                b[0] += kappa * dc_du[col];
                b[1] += kappa * dc_dv[col];
            };

            // u-row: 1/dt - d(div c grad G_u)
            auto& diag = out.block(layout.position(c, centre));
            diag[0] += inv_dt;
            double centre_coef = 0.0;
            for (int a = 0; a < dim; ++a) {
                const FaceField& faces = mob.faces[std::size_t(a)];
                const double cp = faces[faces.high_face(c)];
                const double cm = faces[faces.low_face(c)];
                std::array<int, 3> plus{0, 0, 0}, minus{0, 0, 0};
                plus[a] = 1;
                minus[a] = -1;
                add_dgu(plus, -w[a] * cp);
                add_dgu(minus, -w[a] * cm);
                centre_coef += w[a] * (cp + cm);
                if (midpoint) {
                    const std::size_t s = next.u.stride(a);
                    const double jump_p = d.gu.raw()[off + s] - d.gu.raw()[off];
                    const double jump_m = d.gu.raw()[off] - d.gu.raw()[off - s];
                    add_dc({0, 0, 0}, -w[a] * 0.5 * (jump_p - jump_m));
                    add_dc(plus, -w[a] * 0.5 * jump_p);
                    add_dc(minus, w[a] * 0.5 * jump_m);
                }
            }
            add_dgu({0, 0, 0}, centre_coef);

            // v-row: 1/dt + (c/rho) dG_v (+ G_v/rho dc)
            const double kv = mob.cells[c] * inv_rho;
            diag[3] += inv_dt + kv * (d.dvv[c] + p.gamma * wsum);
            diag[2] += kv * d.duv[c];
            for (int a = 0; a < dim; ++a)
                for (int s = -1; s <= 1; s += 2) {
                    std::array<int, 3> o{0, 0, 0};
                    o[a] = s;
                    out.block(layout.position(c, layout.slot_of(o[0], o[1], o[2])))[3] += kv * (-half_gamma * w[a]);
                }
            if (midpoint) {
                const double gv = d.gv.raw()[off] * inv_rho;
                diag[2] += gv * dc_du[c];
                diag[3] += gv * dc_dv[c];
            }
        }
    });
}

StencilMatrix assemble_jacobian(const StepProblem& prob, const State& next)
{
    StencilMatrix m;
    assemble_jacobian(prob, next, m);
    return m;
}

}  // namespace acch
