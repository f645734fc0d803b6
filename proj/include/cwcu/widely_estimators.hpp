#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "cwcu/linalg.hpp"
#include "cwcu/model.hpp"

namespace cwcu {

enum class WidelyKind { wlmmse, cwcu_wlmmse };

std::string_view to_string(WidelyKind k);

/// Augmented estimator [[E, F], [F*, E*]] with per-component 2x2 statistics:
/// E[xhat_aug_i | x_i] = alpha_i (x_i, x_i*) and the augmented conditional
/// covariance cond_cov_i (off-diagonal = conditional pseudo-variance).
struct WidelyEstimatorBank {
    WidelyKind kind = WidelyKind::wlmmse;
    CMatrix E_aug;                 // 2n x 2m
    std::vector<CMatrix> alpha;    // 2x2 each
    std::vector<CMatrix> cond_cov; // 2x2 each, Hermitian PD

    std::size_t n() const noexcept { return E_aug.rows() / 2; }
    std::size_t m() const noexcept { return E_aug.cols() / 2; }
    /// Rows i and i + n of E_aug (2 x 2m).
    CMatrix component_rows(std::size_t i) const;
    /// Applies E_aug to (y, y*) and returns the n unconjugated estimates.
    CVector estimate(std::span<const cplx> y) const;
    /// Full 2n-vector (xhat, xhat*).
    CVector estimate_augmented(std::span<const cplx> y) const;
};

struct WidelyConditionalStats {
    CMatrix alpha;     // E_i^H H_i
    CMatrix cond_cov;  // E_i^H (Hbar Cxbar Hbar^H + Cnn) E_i, symmetrized
};

/// `rows` holds E_i^H (2 x 2m).
WidelyConditionalStats widely_conditional_stats(const CMatrix& rows, const AugmentedModel& am, std::size_t i);

/// E_aug = Cxy Cyy^-1
WidelyEstimatorBank wlmmse(const AugmentedModel& am);

/// Per component: rows alpha_i^-1 E_WL,i^H; covariance alpha_i^-1 C_WL,i alpha_i^-H.
WidelyEstimatorBank cwcu_wlmmse(const AugmentedModel& am);
WidelyEstimatorBank cwcu_wlmmse(const AugmentedModel& am, const WidelyEstimatorBank& wl);

/// Per-component E|xhat_i - x_i|^2 of an augmented estimator.
std::vector<double> bmse(const CMatrix& E_aug, const AugmentedModel& am);

/// Embeds an ordinary linear estimator E (n x m) as blkdiag(E, E*).
CMatrix embed_linear(const CMatrix& E);

}  // namespace cwcu
