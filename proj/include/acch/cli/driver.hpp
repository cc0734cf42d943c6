#pragma once

#include "acch/cli/config.hpp"
#include "acch/cli/io.hpp"

#include <functional>
#include <string>
#include <vector>

namespace acch::cli {

/// Initial state from the spec. Random states use a 64-bit Mersenne twister
/// seeded with `seed` and are identical for every thread count.
State initial_state(const Grid& grid, const InitialSpec& spec);

struct RunResult {
    std::vector<HistoryRow> rows;
    State final_state;
    double time = 0.0;
    long steps = 0;
    int divergences = 0;
    /// Steps at dt_min that were completed by sub-stepping.
    int substepped = 0;
    long factorizations = 0;
    long newton_total = 0;
    long gmres_total = 0;
    double final_eta = 0.0;
    bool stalled = false;
    std::string stall_reason;
};

/// Called after every accepted step (and once for the initial state).
using StepObserver = std::function<void(const HistoryRow&, const State&)>;

/// Advances `initial` to cfg.horizon with the configured controller and
/// solver. A fatal stall ends the run early with `stalled` set.
RunResult simulate(const RunConfig& cfg, const State& initial, const StepObserver& observer = {});

/// History row for a state.
HistoryRow describe(const State& s, const Params& p, long step, double time, double dt);

/// Full `run` command: history CSV and snapshots under cfg.output.directory.
/// Returns the process exit code (0 or 3).
int run_command(const RunConfig& cfg, std::ostream& log);

/// Averages a fine state onto a coarser grid whose counts divide the fine
/// counts by a power of two.
State restrict_average(const State& fine, const Grid& coarse);

/// Relative l2 distance over (u, v) jointly.
double relative_l2(const State& approx, const State& reference);

/// Least-squares slope of log(error) against log(size).
double fit_order(const std::vector<double>& sizes, const std::vector<double>& errors);

struct ConvergenceRow {
    double size;  // mesh spacing or step size
    double error;
    long steps;
    long newton;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    double order = 0.0;
};

ConvergenceReport converge_space(const RunConfig& cfg, const std::vector<int>& meshes, int reference_mesh, double dt,
                                 std::ostream* log = nullptr);
ConvergenceReport converge_time(const RunConfig& cfg, int mesh, const std::vector<double>& dts, double reference_dt,
                                std::ostream* log = nullptr);

struct BenchRow {
    std::string label;
    SchwarzVariant variant;
    int overlap;
    SubdomainSolver solver;
    bool reuse;
    int threads;
    int subdomains;
    long cells;
    long newton;
    long gmres;
    long factorizations;
    double wall_s;
    bool ok;
    std::string error;
    /// Per-step Newton counts.
    std::vector<int> newton_per_step;
    std::vector<int> gmres_per_step;
};

/// Runs cfg.bench.steps fixed steps of size cfg.bench.dt for every
/// variant x overlap x subdomain-solver combination (with and without reuse
/// when `both_reuse`).
std::vector<BenchRow> bench_precond(const RunConfig& cfg, bool both_reuse = true, std::ostream* log = nullptr);

/// Strong scaling (cfg grid, one subdomain per thread) and weak scaling
/// (cfg.bench.weak_cells^d cells per thread).
std::vector<BenchRow> bench_scale(const RunConfig& cfg, std::ostream* log = nullptr);

std::string bench_csv(const std::vector<BenchRow>& rows);

/// Two-column data files and a gnuplot script for energy and step size.
void write_plot_data(const std::vector<HistoryRow>& rows, const std::string& directory);

}  // namespace acch::cli
