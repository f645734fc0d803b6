#pragma once

// Small dense complex matrix kernel. Sizes in this project never exceed a few
// hundred rows, so everything is row-major std::vector storage and naive
// triple loops.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "cwcu/errors.hpp"

namespace cwcu {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

class CMatrix {
public:
    CMatrix() = default;
    CMatrix(std::size_t rows, std::size_t cols);
    CMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries);
    CMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

    static CMatrix identity(std::size_t n);
    static CMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
    static CMatrix diagonal(std::span<const cplx> diag);
    /// Column vector (n x 1).
    static CMatrix column(std::span<const cplx> v);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }
    bool is_square() const noexcept { return rows_ == cols_; }

    cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<cplx> data() noexcept { return data_; }
    std::span<const cplx> data() const noexcept { return data_; }
    std::span<const cplx> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<cplx> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    CVector col(std::size_t c) const;

    CMatrix& operator+=(const CMatrix& o);
    CMatrix& operator-=(const CMatrix& o);
    CMatrix& operator*=(cplx s);

    friend bool operator==(const CMatrix&, const CMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

CMatrix operator+(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a, const CMatrix& b);
CMatrix operator*(const CMatrix& a, const CMatrix& b);
CMatrix operator*(cplx s, CMatrix a);
CVector operator*(const CMatrix& a, std::span<const cplx> x);

CMatrix hermitian(const CMatrix& a);
CMatrix transpose(const CMatrix& a);
CMatrix conj(const CMatrix& a);

double frobenius_norm(const CMatrix& a);
double max_abs_diff(const CMatrix& a, const CMatrix& b);
bool all_finite(const CMatrix& a);
bool is_hermitian(const CMatrix& a, double tol);

/// Lower Cholesky factor L with A = L L^H. Only the lower triangle of A is read.
CMatrix cholesky(const CMatrix& a);
/// Solves A X = B for Hermitian positive definite A.
CMatrix solve_hpd(const CMatrix& a, const CMatrix& b);

cplx det2(const CMatrix& a);
CMatrix inv2(const CMatrix& a);
/// Scale-aware singularity threshold for 2x2 blocks.
double singularity_threshold(const CMatrix& a);

/// [[A, B], [C, D]]
CMatrix block2x2(const CMatrix& a, const CMatrix& b, const CMatrix& c, const CMatrix& d);
CMatrix blkdiag(const CMatrix& a, const CMatrix& b);
/// Permutation [[0, I_n], [I_n, 0]] that swaps the halves of an augmented vector.
CMatrix swap_permutation(std::size_t n);

CMatrix select(const CMatrix& a, std::span<const std::size_t> rows, std::span<const std::size_t> cols);
CMatrix select_rows(const CMatrix& a, std::span<const std::size_t> rows);
CMatrix select_cols(const CMatrix& a, std::span<const std::size_t> cols);
/// Indices 0..n-1 with the entries of `drop` removed (order preserved).
std::vector<std::size_t> complement_indices(std::size_t n, std::span<const std::size_t> drop);

}  // namespace cwcu
