#include "acch/linalg/factor.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdint>

namespace acch {

namespace {

bool same_pattern(const CsrMatrix& a, const std::vector<std::size_t>& row_ptr, const std::vector<int>& cols)
{
    return a.row_ptr == row_ptr && a.cols == cols;
}

long cell_for(std::span<const int> cell_of_row, std::size_t row)
{
    return row < cell_of_row.size() ? long(cell_of_row[row]) : -1;
}

}  // namespace

IluFactorization::IluFactorization(int level) : level_(level)
{
    if (level < 0)
        throw std::invalid_argument("ILU level must be non-negative");
}

void IluFactorization::symbolic(const CsrMatrix& a)
{
    const std::size_t n = a.n;
    a_row_ptr_ = a.row_ptr;
    a_cols_ = a.cols;

    // Row-by-row level-of-fill: lev(i,j) = min over k of lev(i,k)+lev(k,j)+1,
    // keeping entries with level <= k. Upper parts of finished rows are kept
    // with their levels for later rows.
    std::vector<std::vector<int>> up_cols(n);
    std::vector<std::vector<int>> up_lev(n);
    std::vector<int> lev(n, INT_MAX);
    std::vector<int> touched;
    lu_.n = n;
    lu_.row_ptr.assign(1, 0);
    lu_.cols.clear();
    diag_.assign(n, 0);

    for (std::size_t i = 0; i < n; ++i) {
        touched.clear();
        for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
            lev[std::size_t(a.cols[p])] = 0;
            touched.push_back(a.cols[p]);
        }
        if (lev[i] != 0) {
            lev[i] = 0;
            touched.push_back(int(i));
        }
        // Eliminate lower columns in increasing order; fill may add new ones.
        std::sort(touched.begin(), touched.end());
        std::vector<int> lower(touched.begin(), std::lower_bound(touched.begin(), touched.end(), int(i)));
        std::make_heap(lower.begin(), lower.end(), std::greater<>());
        while (!lower.empty()) {
            std::pop_heap(lower.begin(), lower.end(), std::greater<>());
            const int k = lower.back();
            lower.pop_back();
            const int lik = lev[std::size_t(k)];
            for (std::size_t q = 0; q < up_cols[std::size_t(k)].size(); ++q) {
                const int j = up_cols[std::size_t(k)][q];
                const int l = lik + up_lev[std::size_t(k)][q] + 1;
                if (l > level_)
                    continue;
                int& cur = lev[std::size_t(j)];
                if (cur == INT_MAX) {
                    touched.push_back(j);
                    if (j < int(i)) {
                        lower.push_back(j);
                        std::push_heap(lower.begin(), lower.end(), std::greater<>());
                    }
                }
                cur = std::min(cur, l);
            }
        }
        std::sort(touched.begin(), touched.end());
        for (int j : touched) {
            if (std::size_t(j) == i)
                diag_[i] = lu_.cols.size();
            lu_.cols.push_back(j);
            if (j > int(i)) {
                up_cols[i].push_back(j);
                up_lev[i].push_back(lev[std::size_t(j)]);
            }
            lev[std::size_t(j)] = INT_MAX;
        }
        lu_.row_ptr.push_back(lu_.cols.size());
    }
    lu_.vals.assign(lu_.cols.size(), 0.0);

    a_to_lu_.resize(a.cols.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto b = lu_.cols.begin() + long(lu_.row_ptr[i]);
        const auto e = lu_.cols.begin() + long(lu_.row_ptr[i + 1]);
        for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
            a_to_lu_[p] = std::size_t(std::lower_bound(b, e, a.cols[p]) - lu_.cols.begin());
    }
}

void IluFactorization::factor(const CsrMatrix& a, std::span<const int> cell_of_row)
{
    if (lu_.n != a.n || !same_pattern(a, a_row_ptr_, a_cols_))
        symbolic(a);
    std::size_t bad = 0;
    shift_ = 0.0;
    double best_error = numeric(a, 0.0, bad) ? probe_error(a) : kUnstable;
    if (best_error <= kAcceptableError)
        return;
    // Incomplete factors of the fourth-order operator lose accuracy (or their
    // pivots) near walls and subdomain edges. Factor (1 + s) diag(A) + offdiag(A)
    // instead, with the s that best reproduces A on the probe vectors.
    double best_shift = best_error < kUnstable ? 0.0 : -1.0;
    for (double s = kFirstShift; s <= kMaxShift; s *= 2.0) {
        const double e = numeric(a, s, bad) ? probe_error(a) : kUnstable;
        if (e < best_error) {
            best_error = e;
            best_shift = s;
        } else if (best_shift > 0.0) {
            break;
        }
    }
    if (best_shift < 0.0)
        throw ZeroPivotError(bad, cell_for(cell_of_row, bad));
    shift_ = best_shift;
    if (!numeric(a, shift_, bad))
        throw ZeroPivotError(bad, cell_for(cell_of_row, bad));
}

double IluFactorization::probe_error(const CsrMatrix& a) const
{
    // A constant vector (the slowest mode of the differential part) and a
    // fixed pseudo-random one; the error is the larger relative misfit.
    const std::size_t n = a.n;
    std::vector<double> z(n), az(n), w(n);
    double worst = 0.0;
    for (int probe = 0; probe < 2; ++probe) {
        std::uint64_t state = 0x9E3779B97F4A7C15ull;
        for (std::size_t i = 0; i < n; ++i) {
            if (probe == 0) {
                z[i] = 1.0;
            } else {
                state = state * 6364136223846793005ull + 1442695040888963407ull;
                z[i] = double(state >> 11) * 0x1.0p-52 - 1.0;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
                acc += a.vals[p] * z[std::size_t(a.cols[p])];
            az[i] = acc;
        }
        solve(az, w);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            num += (w[i] - z[i]) * (w[i] - z[i]);
            den += z[i] * z[i];
        }
        const double e = std::sqrt(num / den);
        worst = std::isfinite(e) ? std::max(worst, e) : kUnstable;
    }
    return worst;
}

bool IluFactorization::numeric(const CsrMatrix& a, double shift, std::size_t& bad)
{
    std::fill(lu_.vals.begin(), lu_.vals.end(), 0.0);
    for (std::size_t p = 0; p < a.vals.size(); ++p)
        lu_.vals[a_to_lu_[p]] += a.vals[p];
    const std::size_t n = a.n;
    std::vector<double> a_diag(n);
    for (std::size_t i = 0; i < n; ++i) {
        lu_.vals[diag_[i]] *= 1.0 + shift;
        a_diag[i] = lu_.vals[diag_[i]];
    }

    std::vector<long> pos(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t rb = lu_.row_ptr[i], re = lu_.row_ptr[i + 1];
        for (std::size_t p = rb; p < re; ++p)
            pos[std::size_t(lu_.cols[p])] = long(p);
        for (std::size_t p = rb; p < diag_[i]; ++p) {
            const std::size_t k = std::size_t(lu_.cols[p]);
            const double lik = lu_.vals[p] / lu_.vals[diag_[k]];
            lu_.vals[p] = lik;
            for (std::size_t q = diag_[k] + 1; q < lu_.row_ptr[k + 1]; ++q) {
                const long t = pos[std::size_t(lu_.cols[q])];
                if (t >= 0)
                    lu_.vals[std::size_t(t)] -= lik * lu_.vals[q];
            }
        }
        for (std::size_t p = rb; p < re; ++p)
            pos[std::size_t(lu_.cols[p])] = -1;
        const double d = lu_.vals[diag_[i]];
        const bool collapsed = a_diag[i] != 0.0 ? !(d / a_diag[i] >= kMinPivotRatio) : d == 0.0;
        if (collapsed || !std::isfinite(d)) {
            bad = i;
            return false;
        }
    }
    return true;
}

void IluFactorization::solve(std::span<const double> b, std::span<double> x) const
{
    const std::size_t n = lu_.n;
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t p = lu_.row_ptr[i]; p < diag_[i]; ++p)
            s -= lu_.vals[p] * x[std::size_t(lu_.cols[p])];
        x[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = x[i];
        for (std::size_t p = diag_[i] + 1; p < lu_.row_ptr[i + 1]; ++p)
            s -= lu_.vals[p] * x[std::size_t(lu_.cols[p])];
        x[i] = s / lu_.vals[diag_[i]];
    }
}

struct LuFactorization::Impl {
    using Matrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
    Matrix a;
    Eigen::SparseLU<Matrix, Eigen::COLAMDOrdering<int>> lu;
    std::vector<std::size_t> row_ptr;
    std::vector<int> cols;
    /// Position in a.valuePtr() of every CSR entry.
    std::vector<int> value_pos;
    bool analyzed = false;
};

LuFactorization::LuFactorization() : impl_(std::make_unique<Impl>()) {}
LuFactorization::~LuFactorization() = default;

void LuFactorization::factor(const CsrMatrix& m, std::span<const int> cell_of_row)
{
    Impl& s = *impl_;
    if (!s.analyzed || !same_pattern(m, s.row_ptr, s.cols)) {
        std::vector<Eigen::Triplet<double, int>> trips;
        trips.reserve(m.cols.size());
        for (std::size_t r = 0; r < m.n; ++r)
            for (std::size_t p = m.row_ptr[r]; p < m.row_ptr[r + 1]; ++p)
                trips.emplace_back(int(r), m.cols[p], 1.0);
        s.a.resize(long(m.n), long(m.n));
        s.a.setFromTriplets(trips.begin(), trips.end());
        s.a.makeCompressed();
        s.value_pos.resize(m.cols.size());
        for (std::size_t r = 0; r < m.n; ++r)
            for (std::size_t p = m.row_ptr[r]; p < m.row_ptr[r + 1]; ++p) {
                const int c = m.cols[p];
                const int* b = s.a.innerIndexPtr() + s.a.outerIndexPtr()[c];
                const int* e = s.a.innerIndexPtr() + s.a.outerIndexPtr()[c + 1];
                s.value_pos[p] = int(std::lower_bound(b, e, int(r)) - s.a.innerIndexPtr());
            }
        s.lu.analyzePattern(s.a);
        s.row_ptr = m.row_ptr;
        s.cols = m.cols;
        s.analyzed = true;
    }
    double* v = s.a.valuePtr();
    std::fill(v, v + s.a.nonZeros(), 0.0);
    for (std::size_t p = 0; p < m.vals.size(); ++p)
        v[s.value_pos[p]] += m.vals[p];
    s.lu.factorize(s.a);
    if (s.lu.info() != Eigen::Success) {
        // SparseLU reports the failing column as info-1 in its message only;
        // fall back to the first structurally weak row.
        std::size_t row = 0;
        for (std::size_t r = 0; r < m.n; ++r) {
            bool has_diag = false;
            for (std::size_t p = m.row_ptr[r]; p < m.row_ptr[r + 1]; ++p)
                has_diag = has_diag || (std::size_t(m.cols[p]) == r && m.vals[p] != 0.0);
            if (!has_diag) {
                row = r;
                break;
            }
        }
        throw ZeroPivotError(row, cell_for(cell_of_row, row));
    }
}

void LuFactorization::solve(std::span<const double> b, std::span<double> x) const
{
    const Eigen::Map<const Eigen::VectorXd> bv(b.data(), long(b.size()));
    Eigen::VectorXd r = impl_->lu.solve(bv);
    std::copy(r.data(), r.data() + r.size(), x.begin());
}

}  // namespace acch
