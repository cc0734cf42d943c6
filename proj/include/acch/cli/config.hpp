#pragma once

#include "acch/grid.hpp"
#include "acch/newton.hpp"
#include "acch/physics.hpp"
#include "acch/scheme.hpp"
#include "acch/timestep.hpp"

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace acch::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GridSpec {
    int dim = 2;
    std::array<int, 3> counts{128, 128, 1};
    std::array<double, 3> lengths{1.0, 1.0, 1.0};
    Boundary bc = Boundary::Neumann;

    Grid make() const { return Grid(dim, counts, lengths, bc); }
};

enum class InitialKind { Trigonometric, RandomUniform, Uniform };

struct InitialSpec {
    InitialKind kind = InitialKind::RandomUniform;
    /// Mean of u for the random and uniform states.
    double u0 = 0.55;
    /// Mean of v for the uniform state.
    double v0 = 0.0;
    /// Half-widths of the uniform perturbations of u and v.
    double amplitude_u = 0.05;
    double amplitude_v = 0.05;
    std::uint64_t seed = 1;
};

struct SolverSpec {
    SchwarzOptions schwarz;
    NewtonConfig newton;
    SchemeOptions scheme;
};

struct OutputSpec {
    std::string directory = "out";
    bool history = true;
    /// Write fields every this many steps (0: never).
    int snapshot_every = 0;
    /// Write fields at the first step reaching each of these times.
    std::vector<double> snapshot_times;
    bool final_snapshot = true;
};

struct ConvergeSpec {
    std::vector<int> meshes{32, 64, 128, 256};
    int reference_mesh = 512;
    /// Mesh and step sizes of the temporal study.
    int time_mesh = 256;
    std::vector<double> dts{8e-3, 4e-3, 2e-3, 1e-3};
    double reference_dt = 5e-5;
    /// Step size used in the spatial study.
    double space_dt = 5e-5;
};

struct BenchSpec {
    int steps = 10;
    double dt = 1e-4;
    std::vector<SchwarzVariant> variants{SchwarzVariant::ClassicalAS, SchwarzVariant::LeftRAS,
                                         SchwarzVariant::RightRAS};
    std::vector<int> overlaps{0, 1, 2};
    std::vector<SubdomainSolver> solvers{SubdomainSolver::Ilu0, SubdomainSolver::Ilu1, SubdomainSolver::Ilu2,
                                         SubdomainSolver::Lu};
    std::vector<int> threads{1, 2, 4, 8};
    /// Cells per axis per thread for the weak-scaling table.
    int weak_cells = 64;
};

struct RunConfig {
    GridSpec grid;
    Params params;
    InitialSpec initial;
    double horizon = 1.0;
    /// Safety cap on accepted steps (0: none).
    long max_steps = 0;
    ControllerConfig time;
    SolverSpec solver;
    OutputSpec output;
    ConvergeSpec converge;
    BenchSpec bench;
    int threads = 1;

    /// Throws ConfigError describing the first invalid value.
    void validate() const;
};

/// Parses the sectioned key = value format. Unknown sections or keys, bad
/// values and duplicates are errors.
RunConfig parse_config(std::istream& in, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

/// The file format, for documentation and round trips.
std::string format_config(const RunConfig& cfg);

}  // namespace acch::cli
