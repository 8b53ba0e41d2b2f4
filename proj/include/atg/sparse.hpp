#pragma once

#include "atg/kernels.hpp"
#include "atg/mesh.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace atg {

class FeSpace;

struct Triplet {
    Index row;
    Index col;
    double value;
};

/// Square matrix in compressed-row storage with sorted, unique column indices.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<Index> cols,
                 std::vector<double> values);

    /// Duplicate entries are summed.
    static SparseMatrix from_triplets(std::size_t n, std::vector<Triplet> triplets);
    static SparseMatrix identity(std::size_t n);

    std::size_t n() const { return n_; }
    std::size_t nnz() const { return cols_.size(); }
    std::span<const std::size_t> row_ptr() const { return row_ptr_; }
    std::span<const Index> cols() const { return cols_; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    /// Entry (i, j); zero when outside the pattern.
    double coeff(Index i, Index j) const;
    /// Reference to an entry that must exist in the pattern.
    double& at(Index i, Index j);

    void multiply(std::span<const double> x, std::span<double> y, Exec exec = Exec::Parallel) const;
    std::vector<double> operator*(std::span<const double> x) const;
    std::vector<double> diagonal() const;

    /// max |a_ij - a_ji| over the pattern union.
    double max_asymmetry() const;

    SparseMatrix& operator*=(double s);
    friend SparseMatrix operator+(const SparseMatrix& a, const SparseMatrix& b);
    friend SparseMatrix operator-(const SparseMatrix& a, const SparseMatrix& b);

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<Index> cols_;
    std::vector<double> values_;
};

/// Zero matrix whose pattern couples dofs sharing a triangle.
SparseMatrix fe_pattern(const FeSpace& space);

}  // namespace atg
