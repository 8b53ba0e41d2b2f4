#include "atg/sparse.hpp"

#include "atg/fespace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace atg {

SparseMatrix::SparseMatrix(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<Index> cols,
                           std::vector<double> values)
    : n_(n), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), values_(std::move(values)) {
    if (row_ptr_.size() != n_ + 1 || row_ptr_.front() != 0 || row_ptr_.back() != cols_.size() ||
        values_.size() != cols_.size()) {
        throw std::invalid_argument("SparseMatrix: inconsistent compressed-row arrays");
    }
    for (std::size_t i = 0; i < n_; ++i) {
        if (row_ptr_[i] > row_ptr_[i + 1]) throw std::invalid_argument("SparseMatrix: row offsets decrease");
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            if (cols_[k] >= n_) throw std::invalid_argument("SparseMatrix: column index out of range");
            if (k > row_ptr_[i] && cols_[k] <= cols_[k - 1]) {
                throw std::invalid_argument("SparseMatrix: columns of row " + std::to_string(i) +
                                            " are not sorted and unique");
            }
        }
    }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t n, std::vector<Triplet> triplets) {
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<std::size_t> row_ptr(n + 1, 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    for (std::size_t k = 0; k < triplets.size(); ++k) {
        const auto& t = triplets[k];
        if (t.row >= n || t.col >= n) throw std::invalid_argument("from_triplets: index out of range");
        if (k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
            vals.back() += t.value;
            continue;
        }
        cols.push_back(t.col);
        vals.push_back(t.value);
        ++row_ptr[t.row + 1];
    }
    for (std::size_t i = 0; i < n; ++i) row_ptr[i + 1] += row_ptr[i];
    return SparseMatrix(n, std::move(row_ptr), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
    std::vector<std::size_t> rp(n + 1);
    std::vector<Index> c(n);
    for (std::size_t i = 0; i <= n; ++i) rp[i] = i;
    for (std::size_t i = 0; i < n; ++i) c[i] = static_cast<Index>(i);
    return SparseMatrix(n, std::move(rp), std::move(c), std::vector<double>(n, 1.0));
}

double SparseMatrix::coeff(Index i, Index j) const {
    const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - cols_.begin())];
}

double& SparseMatrix::at(Index i, Index j) {
    const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) {
        throw std::out_of_range("SparseMatrix::at: (" + std::to_string(i) + "," + std::to_string(j) +
                                ") is outside the pattern");
    }
    return values_[static_cast<std::size_t>(it - cols_.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y, Exec exec) const {
    kernels::for_each_index(exec, n_, [&](std::size_t i) {
        double s = 0.0;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[cols_[k]];
        y[i] = s;
    });
}

std::vector<double> SparseMatrix::operator*(std::span<const double> x) const {
    std::vector<double> y(n_);
    multiply(x, y);
    return y;
}

std::vector<double> SparseMatrix::diagonal() const {
    std::vector<double> d(n_);
    for (std::size_t i = 0; i < n_; ++i) d[i] = coeff(static_cast<Index>(i), static_cast<Index>(i));
    return d;
}

double SparseMatrix::max_asymmetry() const {
    double m = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            const double aij = values_[k];
            const double aji = coeff(cols_[k], static_cast<Index>(i));
            m = std::max(m, std::abs(aij - aji));
        }
    }
    return m;
}

SparseMatrix& SparseMatrix::operator*=(double s) {
    for (auto& v : values_) v *= s;
    return *this;
}

namespace {

SparseMatrix merge(const SparseMatrix& a, const SparseMatrix& b, double sign) {
    if (a.n() != b.n()) throw std::invalid_argument("SparseMatrix: dimension mismatch");
    const auto n = a.n();
    std::vector<std::size_t> rp(n + 1, 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    cols.reserve(std::max(a.nnz(), b.nnz()));
    vals.reserve(cols.capacity());
    for (std::size_t i = 0; i < n; ++i) {
        auto ka = a.row_ptr()[i], ea = a.row_ptr()[i + 1];
        auto kb = b.row_ptr()[i], eb = b.row_ptr()[i + 1];
        while (ka < ea || kb < eb) {
            const Index ca = ka < ea ? a.cols()[ka] : kNone;
            const Index cb = kb < eb ? b.cols()[kb] : kNone;
            if (ca == cb) {
                cols.push_back(ca);
                vals.push_back(a.values()[ka++] + sign * b.values()[kb++]);
            } else if (ca < cb) {
                cols.push_back(ca);
                vals.push_back(a.values()[ka++]);
            } else {
                cols.push_back(cb);
                vals.push_back(sign * b.values()[kb++]);
            }
        }
        rp[i + 1] = cols.size();
    }
    return SparseMatrix(n, std::move(rp), std::move(cols), std::move(vals));
}

}  // namespace

SparseMatrix operator+(const SparseMatrix& a, const SparseMatrix& b) { return merge(a, b, 1.0); }
SparseMatrix operator-(const SparseMatrix& a, const SparseMatrix& b) { return merge(a, b, -1.0); }

SparseMatrix fe_pattern(const FeSpace& space) {
    const auto& mesh = space.mesh();
    const auto n = space.n_dofs();
    std::vector<std::vector<Index>> rows(n);
    for (Index d = 0; d < n; ++d) rows[d].push_back(d);
    for (const auto& e : mesh.edges()) {
        const Index a = space.dof_of_vertex(e.v[0]);
        const Index b = space.dof_of_vertex(e.v[1]);
        if (a == kNone || b == kNone) continue;
        rows[a].push_back(b);
        rows[b].push_back(a);
    }
    std::vector<std::size_t> rp(n + 1, 0);
    std::vector<Index> cols;
    for (Index d = 0; d < n; ++d) {
        auto& r = rows[d];
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
        cols.insert(cols.end(), r.begin(), r.end());
        rp[d + 1] = cols.size();
    }
    std::vector<double> vals(cols.size(), 0.0);
    return SparseMatrix(n, std::move(rp), std::move(cols), std::move(vals));
}

}  // namespace atg
