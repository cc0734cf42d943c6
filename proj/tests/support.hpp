#pragma once

#include "acch/physics.hpp"

#include <random>

namespace acch::testing {

/// Random admissible state well inside the admissible set.
inline State random_state(const Grid& g, std::mt19937_64& rng, double spread = 0.3)
{
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    State s{Field(g), Field(g)};
    for (std::size_t c = 0; c < g.cells(); ++c) {
        const double u = 0.5 + spread * unit(rng);
        const double room = 0.9 * std::min(u, 1.0 - u);
        s.u[c] = u;
        s.v[c] = room * unit(rng);
    }
    return s;
}

inline Field random_field(const Grid& g, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0)
{
    std::uniform_real_distribution<double> d(lo, hi);
    Field f(g);
    for (std::size_t c = 0; c < g.cells(); ++c)
        f[c] = d(rng);
    return f;
}

/// Small perturbation of `s` that stays admissible.
inline State perturbed(const State& s, std::mt19937_64& rng, double amount)
{
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    State t = s;
    for (std::size_t c = 0; c < s.grid().cells(); ++c) {
        t.u[c] += amount * unit(rng);
        t.v[c] += amount * unit(rng);
    }
    return t;
}

}  // namespace acch::testing
