#include "acch/cli/io.hpp"

#include <cstdio>
#include <sstream>

namespace acch::cli {

std::string format_double(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_vtk(const State& s, const std::string& path)
{
    const Grid& g = s.grid();
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    const int nz = g.dim() == 3 ? g.count(2) : 1;
    const double hz = g.dim() == 3 ? g.spacing(2) : 1.0;
    const double oz = g.dim() == 3 ? 0.5 * g.spacing(2) : 0.0;
    out << "# vtk DataFile Version 3.0\n"
        << "acch state bc=" << to_string(g.bc()) << " lengths=" << format_double(g.length(0)) << ','
        << format_double(g.length(1)) << ',' << format_double(g.dim() == 3 ? g.length(2) : 1.0) << "\n"
        << "ASCII\nDATASET STRUCTURED_POINTS\n"
        << "DIMENSIONS " << g.count(0) << ' ' << g.count(1) << ' ' << nz << '\n'
        << "ORIGIN " << format_double(0.5 * g.spacing(0)) << ' ' << format_double(0.5 * g.spacing(1)) << ' '
        << format_double(oz) << '\n'
        << "SPACING " << format_double(g.spacing(0)) << ' ' << format_double(g.spacing(1)) << ' '
        << format_double(hz) << '\n'
        << "POINT_DATA " << g.cells() << '\n';
    for (const auto& [name, f] : {std::pair<const char*, const Field*>{"u", &s.u}, {"v", &s.v}}) {
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (std::size_t c = 0; c < g.cells(); ++c)
            out << format_double((*f)[c]) << '\n';
    }
    if (!out)
        throw IoError("write failed for '" + path + "'");
}

State read_vtk(const std::string& path, Boundary bc)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path + "'");
    std::string line;
    std::getline(in, line);  // version
    std::getline(in, line);  // title
    std::array<double, 3> lengths{1.0, 1.0, 1.0};
    bool have_lengths = false;
    if (const auto p = line.find("lengths="); p != std::string::npos) {
        have_lengths = true;
        std::stringstream ls(line.substr(p + 8));
        char comma;
        ls >> lengths[0] >> comma >> lengths[1] >> comma >> lengths[2];
    }
    std::string word;
    std::array<int, 3> dims{1, 1, 1};
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    std::size_t points = 0;
    bool have_spacing = false;
    while (in >> word) {
        if (word == "DIMENSIONS")
            in >> dims[0] >> dims[1] >> dims[2];
        else if (word == "SPACING") {
            in >> spacing[0] >> spacing[1] >> spacing[2];
            have_spacing = true;
        } else if (word == "POINT_DATA") {
            in >> points;
            break;
        }
    }
    if (!in || points != std::size_t(dims[0]) * dims[1] * dims[2])
        throw IoError("'" + path + "' is not a state file written by this program");
    const int dim = dims[2] > 1 ? 3 : 2;
    if (have_spacing && !have_lengths)
        for (int a = 0; a < dim; ++a)
            lengths[a] = spacing[a] * dims[a];
    const Grid g(dim, dims, lengths, bc);
    State s{Field(g), Field(g)};
    for (int arr = 0; arr < 2; ++arr) {
        std::string name, type;
        int comps = 0;
        in >> word >> name >> type >> comps;
        if (word != "SCALARS")
            throw IoError("'" + path + "': expected SCALARS");
        in >> word >> word;  // LOOKUP_TABLE default
        Field& f = name == "u" ? s.u : s.v;
        for (std::size_t c = 0; c < g.cells(); ++c) {
            in >> word;
            f[c] = std::strtod(word.c_str(), nullptr);
        }
    }
    if (!in)
        throw IoError("'" + path + "': truncated data");
    return s;
}

std::string format_history_row(const HistoryRow& r)
{
    return std::to_string(r.step) + ',' + format_double(r.time) + ',' + format_double(r.dt) + ',' +
           format_double(r.energy) + ',' + format_double(r.mass_u) + ',' + format_double(r.max_abs_v) + ',' +
           std::to_string(r.newton) + ',' + std::to_string(r.gmres) + ',' + format_double(r.wall_s);
}

void write_history(const std::vector<HistoryRow>& rows, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    out << kHistoryHeader << '\n';
    for (const auto& r : rows)
        out << format_history_row(r) << '\n';
    if (!out)
        throw IoError("write failed for '" + path + "'");
}

std::vector<HistoryRow> read_history(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path + "'");
    std::string line;
    std::getline(in, line);
    if (line != kHistoryHeader)
        throw IoError("'" + path + "': unexpected header");
    std::vector<HistoryRow> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (cells.size() != 9)
            throw IoError("'" + path + "': malformed row '" + line + "'");
        HistoryRow r;
        r.step = std::stol(cells[0]);
        r.time = std::strtod(cells[1].c_str(), nullptr);
        r.dt = std::strtod(cells[2].c_str(), nullptr);
        r.energy = std::strtod(cells[3].c_str(), nullptr);
        r.mass_u = std::strtod(cells[4].c_str(), nullptr);
        r.max_abs_v = std::strtod(cells[5].c_str(), nullptr);
        r.newton = std::stoi(cells[6]);
        r.gmres = std::stoi(cells[7]);
        r.wall_s = std::strtod(cells[8].c_str(), nullptr);
        rows.push_back(r);
    }
    return rows;
}

HistoryWriter::HistoryWriter(const std::string& path) : path_(path), out_(path)
{
    if (!out_)
        throw IoError("cannot open '" + path + "' for writing");
    out_ << kHistoryHeader << '\n' << std::flush;
}

void HistoryWriter::append(const HistoryRow& r)
{
    out_ << format_history_row(r) << '\n' << std::flush;
    if (!out_)
        throw IoError("write failed for '" + path_ + "'");
}

}  // namespace acch::cli
