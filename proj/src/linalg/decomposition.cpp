#include "acch/linalg/decomposition.hpp"

#include <cstdint>
#include <limits>
#include <stdexcept>

namespace acch {

std::array<int, 3> choose_layout(const Grid& grid, int parts)
{
    if (parts < 1)
        throw std::invalid_argument("subdomain count must be at least 1");
    const int dim = grid.dim();
    std::array<int, 3> best{0, 0, 0};
    double best_cost = std::numeric_limits<double>::infinity();
    // Interface measure: every cut along an axis costs one cross-section.
    for (int px = 1; px <= parts; ++px) {
        if (parts % px)
            continue;
        const int rest = parts / px;
        for (int py = 1; py <= rest; ++py) {
            if (rest % py)
                continue;
            const int pz = rest / py;
            if (dim == 2 && pz != 1)
                continue;
            const std::array<int, 3> p{px, py, pz};
            bool fits = true;
            double cost = 0.0;
            for (int a = 0; a < dim; ++a) {
                if (p[a] > grid.count(a))
                    fits = false;
                double section = 1.0;
                for (int b = 0; b < dim; ++b)
                    if (b != a)
                        section *= grid.length(b);
                cost += (p[a] - 1) * section;
            }
            if (fits && cost < best_cost - 1e-12) {
                best_cost = cost;
                best = p;
            }
        }
    }
    if (best[0] == 0)
        throw std::invalid_argument("cannot split the grid into " + std::to_string(parts) +
                                    " subdomains with at least one cell each");
    return best;
}

Decomposition::Decomposition(const Grid& grid, int parts, int overlap) : grid_(grid), overlap_(overlap)
{
    if (overlap < 0)
        throw std::invalid_argument("overlap must be non-negative");
    layout_ = choose_layout(grid, parts);
    const bool periodic = grid.bc() == Boundary::Periodic;
    const int dim = grid.dim();
    for (int bz = 0; bz < layout_[2]; ++bz)
        for (int by = 0; by < layout_[1]; ++by)
            for (int bx = 0; bx < layout_[0]; ++bx) {
                Subdomain s;
                const std::array<int, 3> b{bx, by, bz};
                for (int a = 0; a < 3; ++a) {
                    const int n = grid.count(a);
                    s.core.lo[a] = int(std::int64_t(b[a]) * n / layout_[a]);
                    s.core.hi[a] = int(std::int64_t(b[a] + 1) * n / layout_[a]);
                    if (s.core.extent(a) < 1)
                        throw std::invalid_argument("subdomain box thinner than one cell");
                    if (a >= dim) {
                        s.extended.lo[a] = s.core.lo[a];
                        s.extended.hi[a] = s.core.hi[a];
                    } else if (periodic) {
                        if (s.core.extent(a) + 2 * overlap >= n) {
                            s.extended.lo[a] = 0;
                            s.extended.hi[a] = n;
                        } else {
                            s.extended.lo[a] = s.core.lo[a] - overlap;
                            s.extended.hi[a] = s.core.hi[a] + overlap;
                        }
                    } else {
                        s.extended.lo[a] = std::max(0, s.core.lo[a] - overlap);
                        s.extended.hi[a] = std::min(n, s.core.hi[a] + overlap);
                    }
                }
                s.cells.reserve(s.extended.volume());
                s.owned.reserve(s.extended.volume());
                for (int k = s.extended.lo[2]; k < s.extended.hi[2]; ++k)
                    for (int j = s.extended.lo[1]; j < s.extended.hi[1]; ++j)
                        for (int i = s.extended.lo[0]; i < s.extended.hi[0]; ++i) {
                            const std::array<int, 3> g{i, j, k};
                            std::array<int, 3> w{};
                            bool own = true;
                            for (int a = 0; a < 3; ++a) {
                                const int n = grid.count(a);
                                w[a] = ((g[a] % n) + n) % n;
                                own = own && w[a] >= s.core.lo[a] && w[a] < s.core.hi[a];
                            }
                            s.cells.push_back(int(grid.cell(w[0], w[1], w[2])));
                            s.owned.push_back(own ? 1 : 0);
                        }
                subs_.push_back(std::move(s));
            }
}

int Decomposition::local_index(std::size_t k, std::size_t cell) const noexcept
{
    const Subdomain& s = subs_[k];
    const auto ijk = grid_.coords(cell);
    int idx = 0;
    int stride = 1;
    for (int a = 0; a < 3; ++a) {
        const int n = grid_.count(a);
        int d = ijk[a] - s.extended.lo[a];
        d = ((d % n) + n) % n;
        if (d >= s.extended.extent(a))
            return -1;
        idx += d * stride;
        stride *= s.extended.extent(a);
    }
    return idx;
}

}  // namespace acch
