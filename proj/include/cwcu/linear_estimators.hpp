#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "cwcu/linalg.hpp"
#include "cwcu/model.hpp"

namespace cwcu {

enum class LinearKind { lmmse, cwcu_lmmse };

std::string_view to_string(LinearKind k);

/// Below this, 1/alpha would blow the noise up without bound.
inline constexpr double kAlphaFloor = 1e-10;

/// Estimator matrix plus the per-component conditional statistics
/// E[xhat_i | x_i] = alpha_i x_i and var(xhat_i | x_i) = cond_var_i.
struct LinearEstimatorBank {
    LinearKind kind = LinearKind::lmmse;
    CMatrix E;                     // n x m
    std::vector<double> alpha;     // e_i^H h_i, validated real
    std::vector<double> cond_var;

    std::size_t n() const noexcept { return E.rows(); }
    CVector estimate(std::span<const cplx> y) const { return E * y; }
};

struct ConditionalStats {
    cplx alpha;
    double cond_var = 0.0;
};

/// alpha_i = e_i^H h_i and var(xhat_i|x_i) = e_i^H (Hbar Cxbar Hbar^H + Cnn) e_i,
/// where e_i^H is row i of E. Independent of x_i.
ConditionalStats conditional_stats(const CMatrix& E, const LinearModel& model, std::size_t i);

/// E = Cxx H^H (H Cxx H^H + Cnn)^-1
LinearEstimatorBank lmmse(const LinearModel& model);

/// Rows of the LMMSE matrix divided by alpha_i, making every component
/// conditionally unbiased. Throws DegenerateComponent when alpha_i <= kAlphaFloor.
LinearEstimatorBank cwcu_lmmse(const LinearModel& model);
LinearEstimatorBank cwcu_lmmse(const LinearModel& model, const LinearEstimatorBank& lmmse_bank);

/// Per-component Bayesian MSE: diag[(EH - I) Cxx (EH - I)^H + E Cnn E^H].
std::vector<double> bmse(const CMatrix& E, const LinearModel& model);

}  // namespace cwcu
