#pragma once

#include "acch/linalg/sparse.hpp"

#include <memory>
#include <span>
#include <stdexcept>
#include <string>

namespace acch {

/// A pivot vanished during factorization. `row` is the scalar row of the
/// factored matrix; `cell` the grid cell it belongs to when known.
class ZeroPivotError : public std::runtime_error {
public:
    ZeroPivotError(std::size_t row, long cell)
        : std::runtime_error("zero pivot at row " + std::to_string(row) +
                             (cell >= 0 ? " (cell " + std::to_string(cell) + ")" : std::string())),
          row_(row), cell_(cell)
    {
    }
    std::size_t row() const noexcept { return row_; }
    long cell() const noexcept { return cell_; }

private:
    std::size_t row_;
    long cell_;
};

/// Exact or incomplete factorization of a square CSR matrix. The symbolic
/// phase runs on the first call to factor() and is reused while the pattern
/// is unchanged.
class Factorization {
public:
    virtual ~Factorization() = default;
    /// Numeric factorization. `cell_of_row` maps scalar rows to grid cells
    /// for error reports (may be empty).
    virtual void factor(const CsrMatrix& a, std::span<const int> cell_of_row = {}) = 0;
    /// Solves (LU) x = b. b and x may alias.
    virtual void solve(std::span<const double> b, std::span<double> x) const = 0;
};

/// ILU(k) by level of fill, IKJ ordering, no pivoting.
///
/// The factors are checked on two probe vectors z (constant and
/// pseudo-random) through ||(LU)^{-1} A z - z|| / ||z||. When that misfit
/// exceeds kAcceptableError or a pivot falls below kMinPivotRatio times its
/// diagonal entry, the matrix is refactored with its diagonal scaled by
/// 1 + s for s = 0.01, 0.02, 0.04, ... and the best s is kept.
class IluFactorization final : public Factorization {
public:
    explicit IluFactorization(int level);

    void factor(const CsrMatrix& a, std::span<const int> cell_of_row = {}) override;
    void solve(std::span<const double> b, std::span<double> x) const override;

    int level() const noexcept { return level_; }
    /// Diagonal shift used by the last factor() call (0 when unshifted).
    double shift() const noexcept { return shift_; }

    static constexpr double kMinPivotRatio = 0.1;
    static constexpr double kAcceptableError = 0.3;
    static constexpr double kFirstShift = 0.01;
    static constexpr double kMaxShift = 1.0;
    /// Pattern and values of the combined factors (unit-diagonal L below the
    /// diagonal, U on and above).
    const CsrMatrix& factors() const noexcept { return lu_; }

private:
    void symbolic(const CsrMatrix& a);
    bool numeric(const CsrMatrix& a, double shift, std::size_t& bad);
    double probe_error(const CsrMatrix& a) const;
    static constexpr double kUnstable = 1e300;

    int level_;
    double shift_ = 0.0;
    std::vector<std::size_t> a_row_ptr_;
    std::vector<int> a_cols_;
    CsrMatrix lu_;
    std::vector<std::size_t> diag_;
    /// Position in lu_ of every entry of a.
    std::vector<std::size_t> a_to_lu_;
};

/// Sparse LU with partial pivoting (column-approximate-minimum-degree
/// ordering).
class LuFactorization final : public Factorization {
public:
    LuFactorization();
    ~LuFactorization() override;

    void factor(const CsrMatrix& a, std::span<const int> cell_of_row = {}) override;
    void solve(std::span<const double> b, std::span<double> x) const override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace acch
