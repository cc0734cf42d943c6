#pragma once

#include "acch/physics.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace acch::cli {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Legacy ASCII VTK, STRUCTURED_POINTS with one point per cell center
/// (origin at half a cell) carrying the scalars "u" and "v".
void write_vtk(const State& s, const std::string& path);
/// Reads a file written by write_vtk. The boundary condition is not stored
/// and must be supplied.
State read_vtk(const std::string& path, Boundary bc = Boundary::Periodic);

struct HistoryRow {
    long step = 0;
    double time = 0.0;
    double dt = 0.0;
    double energy = 0.0;
    double mass_u = 0.0;
    double max_abs_v = 0.0;
    int newton = 0;
    int gmres = 0;
    double wall_s = 0.0;
};

inline constexpr const char* kHistoryHeader = "step,time,dt,energy,mass_u,max_abs_v,newton,gmres,wall_s";

std::string format_history_row(const HistoryRow& r);
void write_history(const std::vector<HistoryRow>& rows, const std::string& path);
std::vector<HistoryRow> read_history(const std::string& path);

/// Appends rows as they are produced; every row is flushed.
class HistoryWriter {
public:
    explicit HistoryWriter(const std::string& path);
    void append(const HistoryRow& r);

private:
    std::string path_;
    std::ofstream out_;
};

/// Decimal with 17 significant digits (round-trips exactly).
std::string format_double(double x);

}  // namespace acch::cli
