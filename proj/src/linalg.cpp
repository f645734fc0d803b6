#include "cwcu/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cwcu {

namespace {

std::string dims(const CMatrix& a) {
    return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

void require_same_shape(const CMatrix& a, const CMatrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatch(std::string(op) + ": " + dims(a) + " vs " + dims(b));
}

void require_2x2(const CMatrix& a, const char* op) {
    if (a.rows() != 2 || a.cols() != 2)
        throw DimensionMismatch(std::string(op) + " expects 2x2, got " + dims(a));
}

}  // namespace

CMatrix::CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

CMatrix::CMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_)
        throw DimensionMismatch("CMatrix: " + std::to_string(data_.size()) + " entries for " +
                                std::to_string(rows) + "x" + std::to_string(cols));
}

CMatrix::CMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw DimensionMismatch("CMatrix: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

CMatrix CMatrix::identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CMatrix CMatrix::diagonal(std::span<const cplx> diag) {
    CMatrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

CMatrix CMatrix::column(std::span<const cplx> v) {
    return {v.size(), 1, std::vector<cplx>(v.begin(), v.end())};
}

CVector CMatrix::col(std::size_t c) const {
    CVector v(rows_);
    for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
    return v;
}

CMatrix& CMatrix::operator+=(const CMatrix& o) {
    require_same_shape(*this, o, "operator+");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& o) {
    require_same_shape(*this, o, "operator-");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
}

CMatrix& CMatrix::operator*=(cplx s) {
    for (auto& v : data_) v *= s;
    return *this;
}

CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
CMatrix operator*(cplx s, CMatrix a) { return a *= s; }

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("operator*: " + dims(a) + " * " + dims(b));
    CMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto crow = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cplx aik = a(i, k);
            if (aik == cplx{}) continue;
            auto brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

CVector operator*(const CMatrix& a, std::span<const cplx> x) {
    if (a.cols() != x.size())
        throw DimensionMismatch("matvec: " + dims(a) + " * vector of " + std::to_string(x.size()));
    CVector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        cplx acc{};
        auto r = a.row(i);
        for (std::size_t k = 0; k < r.size(); ++k) acc += r[k] * x[k];
        y[i] = acc;
    }
    return y;
}

CMatrix hermitian(const CMatrix& a) {
    CMatrix h(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) h(j, i) = std::conj(a(i, j));
    return h;
}

CMatrix transpose(const CMatrix& a) {
    CMatrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

CMatrix conj(const CMatrix& a) {
    CMatrix c = a;
    for (auto& v : c.data()) v = std::conj(v);
    return c;
}

double frobenius_norm(const CMatrix& a) {
    double s = 0.0;
    for (const auto& v : a.data()) s += std::norm(v);
    return std::sqrt(s);
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
    return m;
}

bool all_finite(const CMatrix& a) {
    return std::all_of(a.data().begin(), a.data().end(),
                       [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

bool is_hermitian(const CMatrix& a, double tol) {
    if (!a.is_square()) return false;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i; j < a.cols(); ++j)
            if (std::abs(a(i, j) - std::conj(a(j, i))) > tol) return false;
    return true;
}

CMatrix cholesky(const CMatrix& a) {
    if (!a.is_square()) throw DimensionMismatch("cholesky: " + dims(a) + " is not square");
    const std::size_t n = a.rows();
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, i).real()));
    const double floor = std::numeric_limits<double>::epsilon() * scale;

    CMatrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j).real();
        for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
        if (!(d > floor)) throw NotHPD("cholesky: non-positive pivot " + std::to_string(d) + " at " + std::to_string(j));
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            cplx s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
            l(i, j) = s / ljj;
        }
    }
    return l;
}

CMatrix solve_hpd(const CMatrix& a, const CMatrix& b) {
    if (a.rows() != b.rows()) throw DimensionMismatch("solve_hpd: " + dims(a) + " vs rhs " + dims(b));
    const CMatrix l = cholesky(a);
    const std::size_t n = a.rows();
    CMatrix x = b;
    for (std::size_t c = 0; c < x.cols(); ++c) {
        // L z = b
        for (std::size_t i = 0; i < n; ++i) {
            cplx s = x(i, c);
            for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, c);
            x(i, c) = s / l(i, i).real();
        }
        // L^H x = z
        for (std::size_t i = n; i-- > 0;) {
            cplx s = x(i, c);
            for (std::size_t k = i + 1; k < n; ++k) s -= std::conj(l(k, i)) * x(k, c);
            x(i, c) = s / l(i, i).real();
        }
    }
    return x;
}

cplx det2(const CMatrix& a) {
    require_2x2(a, "det2");
    return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
}

double singularity_threshold(const CMatrix& a) { return 1e-12 * std::max(1.0, frobenius_norm(a)); }

CMatrix inv2(const CMatrix& a) {
    const cplx d = det2(a);
    if (std::abs(d) <= singularity_threshold(a))
        throw Singular("inv2: |det| = " + std::to_string(std::abs(d)));
    return {{a(1, 1) / d, -a(0, 1) / d}, {-a(1, 0) / d, a(0, 0) / d}};
}

CMatrix block2x2(const CMatrix& a, const CMatrix& b, const CMatrix& c, const CMatrix& d) {
    if (a.rows() != b.rows() || c.rows() != d.rows() || a.cols() != c.cols() || b.cols() != d.cols())
        throw DimensionMismatch("block2x2: blocks " + dims(a) + ", " + dims(b) + ", " + dims(c) + ", " + dims(d));
    const std::size_t r0 = a.rows(), c0 = a.cols();
    CMatrix m(r0 + c.rows(), c0 + b.cols());
    auto put = [&m](const CMatrix& blk, std::size_t ro, std::size_t co) {
        for (std::size_t i = 0; i < blk.rows(); ++i)
            for (std::size_t j = 0; j < blk.cols(); ++j) m(ro + i, co + j) = blk(i, j);
    };
    put(a, 0, 0);
    put(b, 0, c0);
    put(c, r0, 0);
    put(d, r0, c0);
    return m;
}

CMatrix blkdiag(const CMatrix& a, const CMatrix& b) {
    return block2x2(a, CMatrix(a.rows(), b.cols()), CMatrix(b.rows(), a.cols()), b);
}

CMatrix swap_permutation(std::size_t n) {
    const CMatrix eye = CMatrix::identity(n);
    return block2x2(CMatrix(n, n), eye, eye, CMatrix(n, n));
}

CMatrix select(const CMatrix& a, std::span<const std::size_t> rows, std::span<const std::size_t> cols) {
    CMatrix s(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= a.rows()) throw IndexOutOfRange("select: row " + std::to_string(rows[i]));
        for (std::size_t j = 0; j < cols.size(); ++j) {
            if (cols[j] >= a.cols()) throw IndexOutOfRange("select: col " + std::to_string(cols[j]));
            s(i, j) = a(rows[i], cols[j]);
        }
    }
    return s;
}

CMatrix select_rows(const CMatrix& a, std::span<const std::size_t> rows) {
    return select(a, rows, complement_indices(a.cols(), {}));
}

CMatrix select_cols(const CMatrix& a, std::span<const std::size_t> cols) {
    return select(a, complement_indices(a.rows(), {}), cols);
}

std::vector<std::size_t> complement_indices(std::size_t n, std::span<const std::size_t> drop) {
    std::vector<std::size_t> keep;
    keep.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        if (std::find(drop.begin(), drop.end(), i) == drop.end()) keep.push_back(i);
    return keep;
}

}  // namespace cwcu
