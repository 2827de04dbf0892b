#ifndef GRANTNOV_SPARSE_HPP
#define GRANTNOV_SPARSE_HPP

#include <cstddef>
#include <vector>

#include "grantnov/error.hpp"

namespace grantnov {

// Sparse row vector with strictly increasing column indices.
struct SparseVector {
    std::size_t dim = 0;
    std::vector<std::size_t> idx;
    std::vector<double> val;

    std::size_t nnz() const { return idx.size(); }

    double norm2_squared() const {
        double s = 0.0;
        for (double v : val) s += v * v;
        return s;
    }

    void scale(double c) {
        for (double& v : val) v *= c;
    }
};

// Compressed sparse row matrix.
struct CsrMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col_idx;
    std::vector<double> vals;

    std::size_t nnz() const { return col_idx.size(); }

    void append_row(const SparseVector& v) {
        if (rows == 0 && cols == 0) cols = v.dim;
        if (v.dim != cols) raise(ErrorCode::dimension, "sparse row dimension mismatch");
        col_idx.insert(col_idx.end(), v.idx.begin(), v.idx.end());
        vals.insert(vals.end(), v.val.begin(), v.val.end());
        row_ptr.push_back(col_idx.size());
        ++rows;
    }

    SparseVector row(std::size_t r) const {
        SparseVector v;
        v.dim = cols;
        v.idx.assign(col_idx.begin() + row_ptr[r], col_idx.begin() + row_ptr[r + 1]);
        v.val.assign(vals.begin() + row_ptr[r], vals.begin() + row_ptr[r + 1]);
        return v;
    }

    double frobenius_squared() const {
        double s = 0.0;
        for (double v : vals) s += v * v;
        return s;
    }
};

// Dense row-major matrix, used for the NMF factors and topic loads.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row_ptr(std::size_t r) { return data.data() + r * cols; }
    const double* row_ptr(std::size_t r) const { return data.data() + r * cols; }

    std::vector<double> row(std::size_t r) const {
        return std::vector<double>(data.begin() + r * cols, data.begin() + (r + 1) * cols);
    }
};

} // namespace grantnov

#endif
