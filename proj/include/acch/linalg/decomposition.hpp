#pragma once

#include "acch/grid.hpp"

#include <array>
#include <vector>

namespace acch {

/// Half-open cell box [lo, hi) per axis. Extended boxes under periodic
/// boundaries may run past the grid and are read modulo the count.
struct Box {
    std::array<int, 3> lo{0, 0, 0};
    std::array<int, 3> hi{1, 1, 1};

    int extent(int axis) const noexcept { return hi[axis] - lo[axis]; }
    std::size_t volume() const noexcept { return std::size_t(extent(0)) * extent(1) * extent(2); }
};

/// One subdomain: its owned box and the overlapping extension, with the
/// global cell of every local cell (x fastest over the extended box).
struct Subdomain {
    Box core;
    Box extended;
    std::vector<int> cells;
    std::vector<char> owned;

    std::size_t size() const noexcept { return cells.size(); }
};

/// Overlapping Cartesian decomposition of a grid.
class Decomposition {
public:
    Decomposition(const Grid& grid, int parts, int overlap);

    const Grid& grid() const noexcept { return grid_; }
    int parts() const noexcept { return int(subs_.size()); }
    int overlap() const noexcept { return overlap_; }
    /// Subdomains per axis.
    const std::array<int, 3>& layout() const noexcept { return layout_; }
    const Subdomain& operator[](std::size_t k) const noexcept { return subs_[k]; }
    const std::vector<Subdomain>& subdomains() const noexcept { return subs_; }

    /// Local index of a global cell in subdomain k, or -1 if outside its
    /// extended box.
    int local_index(std::size_t k, std::size_t cell) const noexcept;

private:
    Grid grid_;
    int overlap_;
    std::array<int, 3> layout_{1, 1, 1};
    std::vector<Subdomain> subs_;
};

/// Splits `parts` into per-axis counts that keep boxes as close to cubes as
/// possible. Throws if no split fits the grid.
std::array<int, 3> choose_layout(const Grid& grid, int parts);

inline Decomposition partition(const Grid& grid, int parts, int overlap)
{
    return Decomposition(grid, parts, overlap);
}

}  // namespace acch
