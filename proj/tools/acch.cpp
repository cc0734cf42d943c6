// Command-line driver for the Allen-Cahn/Cahn-Hilliard solver.

#include "acch/cli/driver.hpp"
#include "acch/parallel.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kStall = 3;

struct Overrides {
    std::string config;
    std::optional<int> threads;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> snapshot_every;
};

acch::cli::RunConfig load(const Overrides& o)
{
    acch::cli::RunConfig cfg;
    if (!o.config.empty())
        cfg = acch::cli::load_config(o.config);
    if (o.threads)
        cfg.threads = *o.threads;
    if (o.out)
        cfg.output.directory = *o.out;
    if (o.seed)
        cfg.initial.seed = *o.seed;
    if (o.snapshot_every)
        cfg.output.snapshot_every = *o.snapshot_every;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw acch::cli::ConfigError(e.what());
    }
    acch::set_num_threads(std::size_t(cfg.threads));
    return cfg;
}

void write_text(const std::string& dir, const std::string& name, const std::string& text)
{
    std::filesystem::create_directories(dir);
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream f(path);
    if (!(f << text))
        throw acch::cli::IoError("cannot write '" + path.string() + "'");
}

std::string convergence_csv(const acch::cli::ConvergenceReport& r, const char* size_name)
{
    std::string s = std::string(size_name) + ",error,steps,newton\n";
    for (const auto& row : r.rows)
        s += acch::cli::format_double(row.size) + ',' + acch::cli::format_double(row.error) + ',' +
             std::to_string(row.steps) + ',' + std::to_string(row.newton) + '\n';
    s += "# order " + acch::cli::format_double(r.order) + '\n';
    return s;
}

}  // namespace

int main(int argc, char** argv)
{
    using namespace acch::cli;
    CLI::App app{"Allen-Cahn/Cahn-Hilliard solver with a Newton-Krylov-Schwarz time stepper"};
    app.require_subcommand(1);
    Overrides o;
    app.add_option("--config", o.config, "configuration file (INI)")->check(CLI::ExistingFile);
    app.add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", o.out, "output directory");
    app.add_option("--seed", o.seed, "seed of the random initial state");
    app.add_option("--snapshot-every", o.snapshot_every, "write fields every N steps (0: off)")
        ->check(CLI::NonNegativeNumber);

    auto* run = app.add_subcommand("run", "integrate to the configured horizon");
    auto* space = app.add_subcommand("converge-space", "spatial convergence study");
    auto* time = app.add_subcommand("converge-time", "temporal convergence study");
    auto* precond = app.add_subcommand("bench-precond", "preconditioner comparison table");
    bool single_reuse = false;
    precond->add_flag("--no-reuse-pass", single_reuse, "only run the configured reuse setting");
    auto* scale = app.add_subcommand("bench-scale", "strong and weak scaling tables");
    auto* plot = app.add_subcommand("plot", "gnuplot data for energy and step size from a history file");
    std::string history_path;
    plot->add_option("history", history_path, "history CSV")->required()->check(CLI::ExistingFile);
    for (auto* s : {run, space, time, precond, scale, plot})
        s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (plot->parsed()) {
            const std::string dir = o.out.value_or(std::filesystem::path(history_path).parent_path().string());
            write_plot_data(read_history(history_path), dir.empty() ? "." : dir);
            std::cout << "wrote energy.dat, dt.dat and plot.gp to " << (dir.empty() ? "." : dir) << '\n';
            return kOk;
        }
        const RunConfig cfg = load(o);
        if (run->parsed())
            return run_command(cfg, std::cout);
        if (space->parsed()) {
            const auto r = converge_space(cfg, cfg.converge.meshes, cfg.converge.reference_mesh,
                                          cfg.converge.space_dt, &std::cout);
            std::cout << "spatial order " << format_double(r.order) << '\n';
            write_text(cfg.output.directory, "converge_space.csv", convergence_csv(r, "h"));
            return kOk;
        }
        if (time->parsed()) {
            const auto r = converge_time(cfg, cfg.converge.time_mesh, cfg.converge.dts, cfg.converge.reference_dt,
                                         &std::cout);
            std::cout << "temporal order " << format_double(r.order) << '\n';
            write_text(cfg.output.directory, "converge_time.csv", convergence_csv(r, "dt"));
            return kOk;
        }
        if (precond->parsed()) {
            const auto rows = bench_precond(cfg, !single_reuse, &std::cout);
            write_text(cfg.output.directory, "bench_precond.csv", bench_csv(rows));
            return kOk;
        }
        if (scale->parsed()) {
            const auto rows = bench_scale(cfg, &std::cout);
            write_text(cfg.output.directory, "bench_scale.csv", bench_csv(rows));
            return kOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const acch::StallError& e) {
        std::cerr << "fatal stall: " << e.what() << '\n';
        return kStall;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kOk;
}
