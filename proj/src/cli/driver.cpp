#include "acch/cli/driver.hpp"

#include "acch/newton.hpp"
#include "acch/parallel.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>

namespace acch::cli {

namespace fs = std::filesystem;

namespace {

/// Uniform double in [0, 1) from the top 53 bits, independent of the
/// standard library's distribution implementation.
double unit_uniform(std::mt19937_64& rng)
{
    return double(rng() >> 11) * 0x1.0p-53;
}

double max_abs(const Field& f)
{
    double m = 0.0;
    for (std::size_t c = 0; c < f.size(); ++c)
        m = std::max(m, std::abs(f[c]));
    return m;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

State initial_state(const Grid& grid, const InitialSpec& spec)
{
    State s{Field(grid), Field(grid)};
    switch (spec.kind) {
    case InitialKind::Uniform:
        s = uniform_state(grid, spec.u0, spec.v0);
        break;
    case InitialKind::RandomUniform: {
        std::mt19937_64 rng(spec.seed);
        for (std::size_t c = 0; c < grid.cells(); ++c) {
            const double du = (2.0 * unit_uniform(rng) - 1.0) * spec.amplitude_u;
            const double dv = (2.0 * unit_uniform(rng) - 1.0) * spec.amplitude_v;
            s.u[c] = spec.u0 + du;
            s.v[c] = dv;
        }
        break;
    }
    case InitialKind::Trigonometric: {
        const double two_pi = 2.0 * std::numbers::pi;
        for (int j = 0; j < grid.count(1); ++j)
            for (int i = 0; i < grid.count(0); ++i) {
                const double sx = std::sin(two_pi * grid.center(0, i));
                const double cy = std::cos(two_pi * grid.center(1, j));
                s.u.at(i, j) = 0.4 * (sx * sx + cy * cy) + 0.1;
                s.v.at(i, j) = 0.4 * (sx * sx - cy * cy);
            }
        break;
    }
    }
    check_admissible(s);
    return s;
}

HistoryRow describe(const State& s, const Params& p, long step, double time, double dt)
{
    HistoryRow r;
    r.step = step;
    r.time = time;
    r.dt = dt;
    r.energy = total_energy(s, p);
    r.mass_u = integrate(s.u);
    r.max_abs_v = max_abs(s.v);
    return r;
}

RunResult simulate(const RunConfig& cfg, const State& initial, const StepObserver& observer)
{
    const Grid& grid = initial.grid();
    const auto layout = std::make_shared<const JacobianLayout>(grid);
    SchwarzPreconditioner precond(grid, cfg.solver.schwarz);
    StepController ctrl(cfg.time);
    const auto t0 = Clock::now();

    RunResult res;
    State cur = initial;
    res.rows.push_back(describe(cur, cfg.params, 0, 0.0, 0.0));
    if (observer)
        observer(res.rows.back(), cur);

    double t = 0.0;
    while (t < cfg.horizon && (cfg.max_steps == 0 || res.steps < cfg.max_steps)) {
        double dt = ctrl.propose();
        const double remaining = cfg.horizon - t;
        // Land exactly on the horizon; absorb round-off in the last step.
        const bool last = dt >= remaining * (1.0 - 1e-9);
        if (last)
            dt = remaining;
        const StepProblem prob(cfg.params, cur, dt, cfg.solver.scheme, layout);
        auto [next, rep] = newton_solve(prob, cur, cfg.solver.newton, precond);
        res.newton_total += rep.newton_iterations;
        res.gmres_total += rep.gmres_iterations;
        res.factorizations += rep.factorizations;
        int newton = rep.newton_iterations, gmres = rep.gmres_iterations;
        if (!rep.converged) {
            ++res.divergences;
            try {
                ctrl.on_divergence(dt);
            } catch (const StallError& e) {
                res.stalled = true;
                res.stall_reason = std::string(e.what()) + " (" + to_string(rep.reason) + ": " + rep.detail + ")";
                break;
            }
            const bool at_floor = cfg.time.adaptive && dt <= cfg.time.dt_min * (1.0 + 1e-12);
            bool recovered = false;
            for (int m = 2; at_floor && !recovered && m <= cfg.time.max_substeps; m *= 2) {
                State sub = cur;
                int sub_newton = 0, sub_gmres = 0;
                bool ok = true;
                for (int k = 0; k < m && ok; ++k) {
                    const StepProblem sp(cfg.params, sub, dt / m, cfg.solver.scheme, layout);
                    auto [x, r] = newton_solve(sp, sub, cfg.solver.newton, precond);
                    res.newton_total += r.newton_iterations;
                    res.gmres_total += r.gmres_iterations;
                    res.factorizations += r.factorizations;
                    sub_newton += r.newton_iterations;
                    sub_gmres += r.gmres_iterations;
                    ok = r.converged;
                    sub = std::move(x);
                }
                if (ok) {
                    next = std::move(sub);
                    newton = sub_newton;
                    gmres = sub_gmres;
                    recovered = true;
                    ++res.substepped;
                }
            }
            if (!recovered)
                continue;
        }
        ctrl.accept(pack(next), pack(cur), dt);
        t = last ? cfg.horizon : t + dt;
        cur = std::move(next);
        ++res.steps;
        HistoryRow row = describe(cur, cfg.params, res.steps, t, dt);
        row.newton = newton;
        row.gmres = gmres;
        row.wall_s = seconds_since(t0);
        res.rows.push_back(row);
        if (observer)
            observer(row, cur);
    }
    res.time = t;
    res.final_state = std::move(cur);
    res.final_eta = ctrl.eta();
    return res;
}

int run_command(const RunConfig& cfg, std::ostream& log)
{
    const fs::path dir(cfg.output.directory);
    fs::create_directories(dir);
    {
        std::ofstream used(dir / "config_used.ini");
        used << format_config(cfg);
    }
    const State init = initial_state(cfg.grid.make(), cfg.initial);
    std::unique_ptr<HistoryWriter> history;
    if (cfg.output.history)
        history = std::make_unique<HistoryWriter>((dir / "history.csv").string());
    std::size_t next_time = 0;
    std::vector<double> times = cfg.output.snapshot_times;
    std::sort(times.begin(), times.end());
    auto snapshot = [&](const State& s, const std::string& tag) {
        write_vtk(s, (dir / ("state_" + tag + ".vtk")).string());
    };
    const RunResult res = simulate(cfg, init, [&](const HistoryRow& row, const State& s) {
        if (history)
            history->append(row);
        if (row.step == 0 || (cfg.output.snapshot_every > 0 && row.step % cfg.output.snapshot_every == 0))
            snapshot(s, "step" + std::to_string(row.step));
        bool hit = false;
        while (next_time < times.size() && row.time >= times[next_time] * (1.0 - 1e-12)) {
            ++next_time;
            hit = true;
        }
        if (hit)
            snapshot(s, "t" + format_double(row.time));
    });
    if (cfg.output.final_snapshot)
        snapshot(res.final_state, "final");
    const HistoryRow& last = res.rows.back();
    log << "steps " << res.steps << "  t " << format_double(res.time) << "  energy " << format_double(last.energy)
        << "  max|v| " << format_double(last.max_abs_v) << "  newton " << res.newton_total << "  gmres "
        << res.gmres_total << "  divergences " << res.divergences << "  substepped " << res.substepped
        << "  eta " << format_double(res.final_eta) << '\n';
    if (res.stalled) {
        log << "fatal stall: " << res.stall_reason << '\n';
        return 3;
    }
    return 0;
}

State restrict_average(const State& fine, const Grid& coarse)
{
    const Grid& fg = fine.grid();
    std::array<int, 3> r{1, 1, 1};
    for (int a = 0; a < coarse.dim(); ++a) {
        if (fg.count(a) % coarse.count(a) != 0)
            throw std::invalid_argument("meshes are not nested");
        r[a] = fg.count(a) / coarse.count(a);
        if (r[a] & (r[a] - 1))
            throw std::invalid_argument("mesh ratio must be a power of two");
    }
    if (fg.dim() != coarse.dim())
        throw std::invalid_argument("dimension mismatch");
    State out{Field(coarse), Field(coarse)};
    const double w = 1.0 / (double(r[0]) * r[1] * r[2]);
    for (int k = 0; k < coarse.count(2); ++k)
        for (int j = 0; j < coarse.count(1); ++j)
            for (int i = 0; i < coarse.count(0); ++i) {
                double su = 0.0, sv = 0.0;
                for (int kk = 0; kk < r[2]; ++kk)
                    for (int jj = 0; jj < r[1]; ++jj)
                        for (int ii = 0; ii < r[0]; ++ii) {
                            su += fine.u.at(i * r[0] + ii, j * r[1] + jj, k * r[2] + kk);
                            sv += fine.v.at(i * r[0] + ii, j * r[1] + jj, k * r[2] + kk);
                        }
                out.u.at(i, j, k) = su * w;
                out.v.at(i, j, k) = sv * w;
            }
    return out;
}

double relative_l2(const State& a, const State& ref)
{
    if (!(a.grid() == ref.grid()))
        throw std::invalid_argument("relative_l2 needs states on the same grid");
    double num = 0.0, den = 0.0;
    for (std::size_t c = 0; c < a.grid().cells(); ++c) {
        const double du = a.u[c] - ref.u[c], dv = a.v[c] - ref.v[c];
        num += du * du + dv * dv;
        den += ref.u[c] * ref.u[c] + ref.v[c] * ref.v[c];
    }
    return std::sqrt(num / den);
}

double fit_order(const std::vector<double>& sizes, const std::vector<double>& errors)
{
    if (sizes.size() != errors.size() || sizes.size() < 2)
        throw std::invalid_argument("fit_order needs at least two points");
    const std::size_t n = sizes.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(sizes[i]);
        my += std::log(errors[i]);
    }
    mx /= double(n);
    my /= double(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(sizes[i]) - mx;
        sxy += dx * (std::log(errors[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

namespace {

RunConfig fixed_run(const RunConfig& base, double dt)
{
    RunConfig c = base;
    c.time.adaptive = false;
    c.time.dt_fixed = dt;
    c.max_steps = 0;
    return c;
}

RunResult run_or_throw(const RunConfig& cfg, const Grid& grid)
{
    RunResult r = simulate(cfg, initial_state(grid, cfg.initial));
    if (r.stalled)
        throw StallError(r.stall_reason);
    return r;
}

Grid with_mesh(const RunConfig& cfg, int n)
{
    GridSpec g = cfg.grid;
    g.counts = {n, n, g.dim == 3 ? n : 1};
    return g.make();
}

}  // namespace

ConvergenceReport converge_space(const RunConfig& cfg, const std::vector<int>& meshes, int reference_mesh, double dt,
                                 std::ostream* log)
{
    for (int n : meshes)
        if (n >= reference_mesh || reference_mesh % n != 0 || ((reference_mesh / n) & (reference_mesh / n - 1)))
            throw std::invalid_argument("mesh " + std::to_string(n) + " is not nested in the reference mesh " +
                                        std::to_string(reference_mesh));
    const RunConfig run = fixed_run(cfg, dt);
    const RunResult ref = run_or_throw(run, with_mesh(cfg, reference_mesh));
    if (log)
        *log << "reference " << reference_mesh << ": " << ref.steps << " steps, " << ref.newton_total << " newton\n";
    ConvergenceReport rep;
    std::vector<double> hs, errs;
    for (int n : meshes) {
        const Grid g = with_mesh(cfg, n);
        const RunResult r = run_or_throw(run, g);
        const double err = relative_l2(r.final_state, restrict_average(ref.final_state, g));
        rep.rows.push_back({g.spacing(0), err, r.steps, r.newton_total});
        hs.push_back(g.spacing(0));
        errs.push_back(err);
        if (log)
            *log << "mesh " << n << ": error " << format_double(err) << '\n';
    }
    rep.order = fit_order(hs, errs);
    return rep;
}

ConvergenceReport converge_time(const RunConfig& cfg, int mesh, const std::vector<double>& dts, double reference_dt,
                                std::ostream* log)
{
    for (double dt : dts)
        if (!(reference_dt < dt))
            throw std::invalid_argument("reference step must be smaller than every tested step");
    const Grid g = with_mesh(cfg, mesh);
    const RunResult ref = run_or_throw(fixed_run(cfg, reference_dt), g);
    if (log)
        *log << "reference dt " << format_double(reference_dt) << ": " << ref.steps << " steps\n";
    ConvergenceReport rep;
    std::vector<double> sizes, errs;
    for (double dt : dts) {
        const RunResult r = run_or_throw(fixed_run(cfg, dt), g);
        const double err = relative_l2(r.final_state, ref.final_state);
        rep.rows.push_back({dt, err, r.steps, r.newton_total});
        sizes.push_back(dt);
        errs.push_back(err);
        if (log)
            *log << "dt " << format_double(dt) << ": error " << format_double(err) << '\n';
    }
    rep.order = fit_order(sizes, errs);
    return rep;
}

namespace {

BenchRow bench_one(const RunConfig& base, const Grid& grid, SchwarzOptions sw, bool reuse, int threads)
{
    BenchRow row{};
    row.variant = sw.variant;
    row.overlap = sw.overlap;
    row.solver = sw.solver;
    row.reuse = reuse;
    row.threads = threads;
    row.cells = long(grid.cells());
    RunConfig c = fixed_run(base, base.bench.dt);
    c.horizon = base.bench.dt * base.bench.steps;
    c.max_steps = base.bench.steps;
    c.solver.schwarz = sw;
    c.solver.newton.reuse = reuse;
    row.label = to_string(sw.variant) + "/d" + std::to_string(sw.overlap) + "/" + to_string(sw.solver) +
                (reuse ? "-reuse" : "");
    const std::size_t saved = num_threads();
    set_num_threads(std::size_t(threads));
    try {
        row.subdomains = SchwarzPreconditioner(grid, sw).decomposition().parts();
        const auto t0 = Clock::now();
        const RunResult r = simulate(c, initial_state(grid, c.initial));
        row.wall_s = seconds_since(t0);
        row.newton = r.newton_total;
        row.gmres = r.gmres_total;
        row.factorizations = r.factorizations;
        for (std::size_t i = 1; i < r.rows.size(); ++i) {
            row.newton_per_step.push_back(r.rows[i].newton);
            row.gmres_per_step.push_back(r.rows[i].gmres);
        }
        row.ok = !r.stalled && r.steps == base.bench.steps && r.divergences == 0;
        if (!row.ok)
            row.error = r.stalled ? r.stall_reason : "diverged " + std::to_string(r.divergences) + " times";
    } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
    }
    set_num_threads(saved);
    return row;
}

void log_row(std::ostream* log, const BenchRow& r)
{
    if (!log)
        return;
    *log << r.label << "  threads " << r.threads << "  np " << r.subdomains << "  newton " << r.newton << "  gmres "
         << r.gmres << "  gmres/newton " << (r.newton ? double(r.gmres) / double(r.newton) : 0.0) << "  wall "
         << r.wall_s << (r.ok ? "" : "  FAILED: " + r.error) << '\n';
}

}  // namespace

std::vector<BenchRow> bench_precond(const RunConfig& cfg, bool both_reuse, std::ostream* log)
{
    const Grid grid = cfg.grid.make();
    std::vector<BenchRow> rows;
    for (SchwarzVariant v : cfg.bench.variants)
        for (int d : cfg.bench.overlaps)
            for (SubdomainSolver s : cfg.bench.solvers)
                for (int pass = 0; pass < (both_reuse ? 2 : 1); ++pass) {
                    SchwarzOptions sw = cfg.solver.schwarz;
                    sw.variant = v;
                    sw.overlap = d;
                    sw.solver = s;
                    const bool reuse = both_reuse ? pass == 1 : cfg.solver.newton.reuse;
                    rows.push_back(bench_one(cfg, grid, sw, reuse, cfg.threads));
                    log_row(log, rows.back());
                }
    return rows;
}

std::vector<BenchRow> bench_scale(const RunConfig& cfg, std::ostream* log)
{
    std::vector<BenchRow> rows;
    const Grid strong = cfg.grid.make();
    for (int t : cfg.bench.threads) {
        SchwarzOptions sw = cfg.solver.schwarz;
        sw.subdomains = t;
        BenchRow r = bench_one(cfg, strong, sw, cfg.solver.newton.reuse, t);
        r.label = "strong/" + r.label;
        rows.push_back(r);
        log_row(log, rows.back());
    }
    for (int t : cfg.bench.threads) {
        GridSpec gs = cfg.grid;
        const Grid big = GridSpec{gs.dim, {1 << 20, 1 << 20, gs.dim == 3 ? 1 << 20 : 1}, gs.lengths, gs.bc}.make();
        const auto p = choose_layout(big, t);
        for (int a = 0; a < gs.dim; ++a)
            gs.counts[a] = cfg.bench.weak_cells * p[a];
        // Keep the cell size fixed as the domain grows.
        for (int a = 0; a < gs.dim; ++a)
            gs.lengths[a] = cfg.grid.lengths[a] * double(gs.counts[a]) / double(cfg.bench.weak_cells);
        SchwarzOptions sw = cfg.solver.schwarz;
        sw.subdomains = t;
        RunConfig c = cfg;
        c.grid = gs;
        BenchRow r = bench_one(c, gs.make(), sw, cfg.solver.newton.reuse, t);
        r.label = "weak/" + r.label;
        rows.push_back(r);
        log_row(log, rows.back());
    }
    return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows)
{
    std::ostringstream o;
    o << "label,variant,overlap,subsolver,reuse,threads,subdomains,cells,newton,gmres,gmres_per_newton,"
         "factorizations,wall_s,ok,error\n";
    for (const auto& r : rows)
        o << r.label << ',' << to_string(r.variant) << ',' << r.overlap << ',' << to_string(r.solver) << ','
          << (r.reuse ? 1 : 0) << ',' << r.threads << ',' << r.subdomains << ',' << r.cells << ',' << r.newton << ','
          << r.gmres << ',' << format_double(r.newton ? double(r.gmres) / double(r.newton) : 0.0) << ','
          << r.factorizations << ',' << format_double(r.wall_s) << ',' << (r.ok ? 1 : 0) << ",\"" << r.error
          << "\"\n";
    return o.str();
}

void write_plot_data(const std::vector<HistoryRow>& rows, const std::string& directory)
{
    const fs::path dir(directory);
    fs::create_directories(dir);
    std::ofstream e(dir / "energy.dat"), d(dir / "dt.dat");
    if (!e || !d)
        throw IoError("cannot write plot data under '" + directory + "'");
    e << "# time energy\n";
    d << "# time dt\n";
    for (const auto& r : rows) {
        e << format_double(r.time) << ' ' << format_double(r.energy) << '\n';
        if (r.step > 0)
            d << format_double(r.time) << ' ' << format_double(r.dt) << '\n';
    }
    std::ofstream gp(dir / "plot.gp");
    gp << "set terminal pngcairo size 1200,500\nset output 'history.png'\nset multiplot layout 1,2\n"
          "set logscale x\nset xlabel 't'\nset ylabel 'energy'\nplot 'energy.dat' using 1:2 with lines title 'E'\n"
          "set logscale y\nset ylabel 'dt'\nplot 'dt.dat' using 1:2 with lines title 'dt'\nunset multiplot\n";
}

}  // namespace acch::cli
