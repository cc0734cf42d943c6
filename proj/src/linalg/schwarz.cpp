#include "acch/linalg/schwarz.hpp"

#include "acch/parallel.hpp"

#include <algorithm>
#include <stdexcept>

namespace acch {

std::string to_string(SchwarzVariant v)
{
    switch (v) {
    case SchwarzVariant::ClassicalAS: return "as";
    case SchwarzVariant::LeftRAS: return "left-ras";
    case SchwarzVariant::RightRAS: return "right-ras";
    }
    return "?";
}

SchwarzVariant parse_schwarz_variant(const std::string& name)
{
    if (name == "as" || name == "classical-as")
        return SchwarzVariant::ClassicalAS;
    if (name == "left-ras" || name == "ras")
        return SchwarzVariant::LeftRAS;
    if (name == "right-ras")
        return SchwarzVariant::RightRAS;
    throw std::invalid_argument("unknown Schwarz variant '" + name + "'");
}

std::string to_string(SubdomainSolver s)
{
    switch (s) {
    case SubdomainSolver::Ilu0: return "ilu0";
    case SubdomainSolver::Ilu1: return "ilu1";
    case SubdomainSolver::Ilu2: return "ilu2";
    case SubdomainSolver::Lu: return "lu";
    }
    return "?";
}

SubdomainSolver parse_subdomain_solver(const std::string& name)
{
    if (name == "ilu0")
        return SubdomainSolver::Ilu0;
    if (name == "ilu1")
        return SubdomainSolver::Ilu1;
    if (name == "ilu2")
        return SubdomainSolver::Ilu2;
    if (name == "lu")
        return SubdomainSolver::Lu;
    throw std::invalid_argument("unknown subdomain solver '" + name + "'");
}

/// Restricted matrix and factors of one subdomain.
struct SchwarzPreconditioner::Local {
    CsrMatrix a;
    /// For every scalar entry of `a`: global block position * 4 + block slot.
    std::vector<std::size_t> source;
    std::vector<int> cell_of_row;
    std::unique_ptr<Factorization> factors;
    bool pattern_ready = false;
    mutable Vector rhs;
    mutable Vector sol;
};

namespace {

std::unique_ptr<Factorization> make_factorization(SubdomainSolver s)
{
    switch (s) {
    case SubdomainSolver::Ilu0: return std::make_unique<IluFactorization>(0);
    case SubdomainSolver::Ilu1: return std::make_unique<IluFactorization>(1);
    case SubdomainSolver::Ilu2: return std::make_unique<IluFactorization>(2);
    case SubdomainSolver::Lu: return std::make_unique<LuFactorization>();
    }
    throw std::logic_error("bad subdomain solver");
}

int resolve_parts(const SchwarzOptions& o)
{
    if (o.subdomains < 0)
        throw std::invalid_argument("subdomain count must be non-negative");
    return o.subdomains > 0 ? o.subdomains : int(num_threads());
}

}  // namespace

SchwarzPreconditioner::SchwarzPreconditioner(const Grid& grid, SchwarzOptions options)
    : options_(options), decomp_(grid, resolve_parts(options), options.overlap)
{
    for (int k = 0; k < decomp_.parts(); ++k) {
        auto l = std::make_unique<Local>();
        l->factors = make_factorization(options.solver);
        locals_.push_back(std::move(l));
    }
}

SchwarzPreconditioner::~SchwarzPreconditioner() = default;
SchwarzPreconditioner::SchwarzPreconditioner(SchwarzPreconditioner&&) noexcept = default;
SchwarzPreconditioner& SchwarzPreconditioner::operator=(SchwarzPreconditioner&&) noexcept = default;

void SchwarzPreconditioner::factor(const StencilMatrix& a)
{
    if (a.block_rows() != decomp_.grid().cells())
        throw std::invalid_argument("matrix does not match the decomposition grid");
    default_pool().run(locals_.size(), [&](std::size_t k) {
        Local& l = *locals_[k];
        const Subdomain& sd = decomp_[k];
        if (!l.pattern_ready) {
            // Symbolic restriction: keep couplings whose column lies inside
            // the extended box, in local scalar order.
            const std::size_t m = sd.size();
            l.a.n = 2 * m;
            l.a.row_ptr.assign(1, 0);
            l.a.cols.clear();
            l.source.clear();
            l.cell_of_row.resize(2 * m);
            std::vector<std::pair<int, std::size_t>> row;
            for (std::size_t li = 0; li < m; ++li) {
                const std::size_t g = std::size_t(sd.cells[li]);
                row.clear();
                for (std::size_t p = a.row_ptr()[g]; p < a.row_ptr()[g + 1]; ++p) {
                    const int lj = decomp_.local_index(k, std::size_t(a.cols()[p]));
                    if (lj >= 0)
                        row.emplace_back(lj, p);
                }
                std::sort(row.begin(), row.end());
                for (int comp = 0; comp < 2; ++comp) {
                    for (const auto& [lj, p] : row)
                        for (int b = 0; b < 2; ++b) {
                            l.a.cols.push_back(2 * lj + b);
                            l.source.push_back(4 * p + std::size_t(2 * comp + b));
                        }
                    l.a.row_ptr.push_back(l.a.cols.size());
                    l.cell_of_row[2 * li + std::size_t(comp)] = int(g);
                }
            }
            l.a.vals.assign(l.a.cols.size(), 0.0);
            l.rhs.assign(2 * m, 0.0);
            l.sol.assign(2 * m, 0.0);
            l.pattern_ready = true;
        }
        for (std::size_t q = 0; q < l.source.size(); ++q)
            l.a.vals[q] = a.block(l.source[q] / 4)[l.source[q] % 4];
        l.factors->factor(l.a, l.cell_of_row);
    });
    factored_ = true;
    ++factorizations_;
}

void SchwarzPreconditioner::apply(std::span<const double> r, std::span<double> z) const
{
    if (!factored_)
        throw std::logic_error("preconditioner applied before factorization");
    const SchwarzVariant variant = options_.variant;
    default_pool().run(locals_.size(), [&](std::size_t k) {
        const Local& l = *locals_[k];
        const Subdomain& sd = decomp_[k];
        for (std::size_t li = 0; li < sd.size(); ++li) {
            const bool take = variant != SchwarzVariant::RightRAS || sd.owned[li];
            const std::size_t g = std::size_t(sd.cells[li]);
            l.rhs[2 * li] = take ? r[2 * g] : 0.0;
            l.rhs[2 * li + 1] = take ? r[2 * g + 1] : 0.0;
        }
        l.factors->solve(l.rhs, l.sol);
    });
    // Combine in subdomain order so the result does not depend on scheduling.
    std::fill(z.begin(), z.end(), 0.0);
    for (std::size_t k = 0; k < locals_.size(); ++k) {
        const Local& l = *locals_[k];
        const Subdomain& sd = decomp_[k];
        for (std::size_t li = 0; li < sd.size(); ++li) {
            if (variant == SchwarzVariant::LeftRAS && !sd.owned[li])
                continue;
            const std::size_t g = std::size_t(sd.cells[li]);
            z[2 * g] += l.sol[2 * li];
            z[2 * g + 1] += l.sol[2 * li + 1];
        }
    }
}

}  // namespace acch
