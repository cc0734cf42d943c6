#include "acch/linalg/sparse.hpp"

#include "acch/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace acch {

StencilMatrix::StencilMatrix(std::vector<std::size_t> row_ptr, std::vector<int> cols)
    : row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), blocks_(cols_.size(), Block{})
{
    if (row_ptr_.empty() || row_ptr_.back() != cols_.size())
        throw std::invalid_argument("inconsistent block row pointers");
    for (std::size_t r = 0; r + 1 < row_ptr_.size(); ++r)
        for (std::size_t p = row_ptr_[r] + 1; p < row_ptr_[r + 1]; ++p)
            if (cols_[p - 1] >= cols_[p])
                throw std::invalid_argument("block columns must be sorted and unique");
}

long StencilMatrix::find(std::size_t row, int col) const noexcept
{
    const auto b = cols_.begin() + long(row_ptr_[row]);
    const auto e = cols_.begin() + long(row_ptr_[row + 1]);
    const auto it = std::lower_bound(b, e, col);
    return it != e && *it == col ? long(it - cols_.begin()) : -1;
}

void StencilMatrix::set_zero()
{
    std::fill(blocks_.begin(), blocks_.end(), Block{});
}

void StencilMatrix::multiply(std::span<const double> x, std::span<double> y) const
{
    parallel_for(block_rows(), [&](std::size_t b, std::size_t e) {
        for (std::size_t r = b; r < e; ++r) {
            double yu = 0.0, yv = 0.0;
            for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
                const Block& a = blocks_[p];
                const double xu = x[2 * std::size_t(cols_[p])];
                const double xv = x[2 * std::size_t(cols_[p]) + 1];
                yu += a[0] * xu + a[1] * xv;
                yv += a[2] * xu + a[3] * xv;
            }
            y[2 * r] = yu;
            y[2 * r + 1] = yv;
        }
    });
}

std::vector<std::vector<double>> StencilMatrix::to_dense() const
{
    std::vector<std::vector<double>> d(rows(), std::vector<double>(rows(), 0.0));
    for (std::size_t r = 0; r < block_rows(); ++r)
        for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
            const std::size_t c = std::size_t(cols_[p]);
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    d[2 * r + a][2 * c + b] += blocks_[p][2 * a + b];
        }
    return d;
}

bool StencilMatrix::has_symmetric_pattern() const
{
    for (std::size_t r = 0; r < block_rows(); ++r)
        for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
            if (find(std::size_t(cols_[p]), int(r)) < 0)
                return false;
    return true;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const
{
    for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p)
            s += vals[p] * x[std::size_t(cols[p])];
        y[r] = s;
    }
}

std::vector<std::vector<double>> CsrMatrix::to_dense() const
{
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p)
            d[r][std::size_t(cols[p])] += vals[p];
    return d;
}

CsrMatrix CsrMatrix::from_dense(const std::vector<std::vector<double>>& a, double drop)
{
    CsrMatrix m;
    m.n = a.size();
    m.row_ptr.push_back(0);
    for (std::size_t r = 0; r < m.n; ++r) {
        for (std::size_t c = 0; c < m.n; ++c)
            if (std::abs(a[r][c]) > drop || r == c) {
                m.cols.push_back(int(c));
                m.vals.push_back(a[r][c]);
            }
        m.row_ptr.push_back(m.cols.size());
    }
    return m;
}

CsrMatrix to_csr(const StencilMatrix& a)
{
    CsrMatrix m;
    m.n = a.rows();
    m.row_ptr.reserve(m.n + 1);
    m.row_ptr.push_back(0);
    for (std::size_t r = 0; r < a.block_rows(); ++r)
        for (int comp = 0; comp < 2; ++comp) {
            for (std::size_t p = a.row_ptr()[r]; p < a.row_ptr()[r + 1]; ++p)
                for (int b = 0; b < 2; ++b) {
                    m.cols.push_back(2 * a.cols()[p] + b);
                    m.vals.push_back(a.block(p)[2 * comp + b]);
                }
            m.row_ptr.push_back(m.cols.size());
        }
    return m;
}

double dot(std::span<const double> a, std::span<const double> b)
{
    return parallel_sum(a.size(), [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i)
            s += a[i] * b[i];
        return s;
    });
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace acch
