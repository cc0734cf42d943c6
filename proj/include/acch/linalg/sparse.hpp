#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace acch {

using Vector = std::vector<double>;

/// Block-sparse matrix with 2x2 blocks in compressed row form. Block rows and
/// columns are cells; unknown 2c is u and 2c+1 is v of cell c.
class StencilMatrix {
public:
    /// Row-major {uu, uv, vu, vv}.
    using Block = std::array<double, 4>;

    StencilMatrix() = default;
    StencilMatrix(std::vector<std::size_t> row_ptr, std::vector<int> cols);

    std::size_t block_rows() const noexcept { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
    std::size_t rows() const noexcept { return 2 * block_rows(); }
    std::size_t nonzero_blocks() const noexcept { return cols_.size(); }

    const std::vector<std::size_t>& row_ptr() const noexcept { return row_ptr_; }
    const std::vector<int>& cols() const noexcept { return cols_; }
    Block& block(std::size_t pos) noexcept { return blocks_[pos]; }
    const Block& block(std::size_t pos) const noexcept { return blocks_[pos]; }

    /// Position of block (row, col) or -1.
    long find(std::size_t row, int col) const noexcept;

    void set_zero();

    /// y = A x.
    void multiply(std::span<const double> x, std::span<double> y) const;

    /// Dense scalar copy, for tests on small matrices.
    std::vector<std::vector<double>> to_dense() const;

    bool has_symmetric_pattern() const;

private:
    std::vector<std::size_t> row_ptr_;
    std::vector<int> cols_;
    std::vector<Block> blocks_;
};

/// Scalar compressed-row matrix with sorted columns, used for subdomain
/// factorizations.
struct CsrMatrix {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<int> cols;
    std::vector<double> vals;

    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<std::vector<double>> to_dense() const;
    static CsrMatrix from_dense(const std::vector<std::vector<double>>& a, double drop = 0.0);
};

/// Scalar expansion of a block matrix.
CsrMatrix to_csr(const StencilMatrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace acch
