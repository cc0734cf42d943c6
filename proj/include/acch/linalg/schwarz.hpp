#pragma once

#include "acch/linalg/decomposition.hpp"
#include "acch/linalg/factor.hpp"
#include "acch/linalg/sparse.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace acch {

enum class SchwarzVariant { ClassicalAS, LeftRAS, RightRAS };
std::string to_string(SchwarzVariant v);
SchwarzVariant parse_schwarz_variant(const std::string& name);

/// Subdomain solver: ILU(0), ILU(1), ILU(2) or sparse LU.
enum class SubdomainSolver { Ilu0, Ilu1, Ilu2, Lu };
std::string to_string(SubdomainSolver s);
SubdomainSolver parse_subdomain_solver(const std::string& name);

struct SchwarzOptions {
    SchwarzVariant variant = SchwarzVariant::LeftRAS;
    int overlap = 1;
    SubdomainSolver solver = SubdomainSolver::Ilu0;
    /// Number of subdomains; 0 means one per worker thread.
    int subdomains = 0;
};

/// One-level overlapping Schwarz preconditioner for a StencilMatrix.
///
/// ClassicalAS sums extended subdomain solves. LeftRAS keeps only the owned
/// part of each solve. RightRAS feeds each solve with the owned part of the
/// input and sums the extended results.
class SchwarzPreconditioner {
public:
    SchwarzPreconditioner(const Grid& grid, SchwarzOptions options);
    ~SchwarzPreconditioner();
    SchwarzPreconditioner(SchwarzPreconditioner&&) noexcept;
    SchwarzPreconditioner& operator=(SchwarzPreconditioner&&) noexcept;

    const SchwarzOptions& options() const noexcept { return options_; }
    const Decomposition& decomposition() const noexcept { return decomp_; }

    /// Extracts the subdomain blocks of `a` and factors them.
    void factor(const StencilMatrix& a);
    bool ready() const noexcept { return factored_; }
    /// Number of factor() calls so far.
    long factorizations() const noexcept { return factorizations_; }

    /// z = H^{-1} r.
    void apply(std::span<const double> r, std::span<double> z) const;

private:
    struct Local;

    SchwarzOptions options_;
    Decomposition decomp_;
    std::vector<std::unique_ptr<Local>> locals_;
    bool factored_ = false;
    long factorizations_ = 0;
};

}  // namespace acch
