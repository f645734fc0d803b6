#include "cwcu/widely_estimators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace cwcu {

namespace {

// Projects M onto the set of matrices with conj(M) = Pi_r M Pi_c, i.e. the
// [[E, F], [F*, E*]] layout. Removes rounding-level asymmetry of the solve.
CMatrix enforce_augmented_structure(const CMatrix& M) {
    const std::size_t hr = M.rows() / 2, hc = M.cols() / 2;
    CMatrix out(M.rows(), M.cols());
    for (std::size_t r = 0; r < M.rows(); ++r) {
        const std::size_t rs = r < hr ? r + hr : r - hr;
        for (std::size_t c = 0; c < M.cols(); ++c) {
            const std::size_t cs = c < hc ? c + hc : c - hc;
            out(r, c) = 0.5 * (M(r, c) + std::conj(M(rs, cs)));
        }
    }
    return out;
}

CMatrix symmetrize(const CMatrix& C) { return 0.5 * (C + hermitian(C)); }

void fill_stats(WidelyEstimatorBank& bank, const AugmentedModel& am) {
    const std::size_t n = am.n();
    bank.alpha.resize(n);
    bank.cond_cov.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto s = widely_conditional_stats(bank.component_rows(i), am, i);
        bank.alpha[i] = std::move(s.alpha);
        bank.cond_cov[i] = std::move(s.cond_cov);
    }
}

}  // namespace

std::string_view to_string(WidelyKind k) {
    switch (k) {
        case WidelyKind::wlmmse: return "wlmmse";
        case WidelyKind::cwcu_wlmmse: return "cwcu-wlmmse";
    }
    return "?";
}

CMatrix WidelyEstimatorBank::component_rows(std::size_t i) const {
    if (i >= n()) throw IndexOutOfRange("component " + std::to_string(i));
    const std::array<std::size_t, 2> rows{i, i + n()};
    return select_rows(E_aug, rows);
}

CVector WidelyEstimatorBank::estimate_augmented(std::span<const cplx> y) const {
    if (y.size() != m()) throw DimensionMismatch("estimate: observation length " + std::to_string(y.size()));
    CVector y_aug(2 * y.size());
    for (std::size_t k = 0; k < y.size(); ++k) {
        y_aug[k] = y[k];
        y_aug[k + y.size()] = std::conj(y[k]);
    }
    return E_aug * y_aug;
}

CVector WidelyEstimatorBank::estimate(std::span<const cplx> y) const {
    CVector x = estimate_augmented(y);
    const std::size_t nn = n();
    for (std::size_t i = 0; i < nn; ++i) {
        if (std::abs(x[i + nn] - std::conj(x[i])) > 1e-9 * (1.0 + std::abs(x[i])))
            throw Error("augmented estimate lost its conjugate structure at component " + std::to_string(i));
    }
    x.resize(nn);
    return x;
}

WidelyConditionalStats widely_conditional_stats(const CMatrix& rows, const AugmentedModel& am, std::size_t i) {
    if (rows.rows() != 2 || rows.cols() != 2 * am.m())
        throw DimensionMismatch("widely_conditional_stats: rows must be 2 x 2m");
    const AugmentedComponentView v = component_view(am, i);
    const CMatrix G = rows * v.Hbar;
    CMatrix C = G * v.Cxbar * hermitian(G) + rows * am.Cnn_aug * hermitian(rows);
    if (!is_hermitian(C, 1e-9 * std::max(1e-300, frobenius_norm(C))))
        throw Error("conditional covariance of component " + std::to_string(i) + " is not Hermitian");
    return {rows * v.H_i, symmetrize(C)};
}

WidelyEstimatorBank wlmmse(const AugmentedModel& am) {
    // E_aug^H = Cyy^-1 Cxy^H = Cyy^-1 H_aug Cxx_aug
    WidelyEstimatorBank bank;
    bank.kind = WidelyKind::wlmmse;
    bank.E_aug = enforce_augmented_structure(hermitian(solve_hpd(am.Cyy_aug, hermitian(am.Cxy_aug))));
    fill_stats(bank, am);
    return bank;
}

WidelyEstimatorBank cwcu_wlmmse(const AugmentedModel& am) { return cwcu_wlmmse(am, wlmmse(am)); }

WidelyEstimatorBank cwcu_wlmmse(const AugmentedModel& am, const WidelyEstimatorBank& wl) {
    const std::size_t n = am.n();
    WidelyEstimatorBank bank;
    bank.kind = WidelyKind::cwcu_wlmmse;
    bank.E_aug = wl.E_aug;
    bank.alpha.resize(n);
    bank.cond_cov.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const CMatrix& a = wl.alpha[i];
        CMatrix a_inv;
        try {
            a_inv = inv2(a);
        } catch (const Singular& e) {
            throw DegenerateComponent(i, std::string("WLMMSE alpha is singular: ") + e.what());
        }
        const CMatrix rows = a_inv * wl.component_rows(i);
        for (std::size_t c = 0; c < rows.cols(); ++c) {
            bank.E_aug(i, c) = rows(0, c);
            bank.E_aug(i + n, c) = rows(1, c);
        }
        bank.alpha[i] = rows * component_view(am, i).H_i;
        bank.cond_cov[i] = symmetrize(a_inv * wl.cond_cov[i] * hermitian(a_inv));
    }
    return bank;
}

std::vector<double> bmse(const CMatrix& E_aug, const AugmentedModel& am) {
    CMatrix B = E_aug * am.H_aug;
    for (std::size_t i = 0; i < B.rows(); ++i) B(i, i) -= 1.0;
    const CMatrix M = B * am.Cxx_aug * hermitian(B) + E_aug * am.Cnn_aug * hermitian(E_aug);
    std::vector<double> out(am.n());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(0.0, M(i, i).real());
    return out;
}

CMatrix embed_linear(const CMatrix& E) { return blkdiag(E, conj(E)); }

}  // namespace cwcu
