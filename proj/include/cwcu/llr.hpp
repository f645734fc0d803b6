#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "cwcu/constellation.hpp"
#include "cwcu/linear_estimators.hpp"
#include "cwcu/widely_estimators.hpp"

namespace cwcu {

/// LLRs are clamped to +-kLlrClamp after computation.
inline constexpr double kLlrClamp = 50.0;

/// Conditional law of a scalar estimate given each symbol: circular complex
/// Gaussian with mean means[q] and variance `variance` (= E|xhat - mean|^2).
struct ProperLaw {
    std::vector<cplx> means;
    double variance = 0.0;
};

/// Conditional law of an augmented estimate (xhat, xhat*) given each symbol:
/// general complex Gaussian with augmented mean means[q] and 2x2 augmented
/// covariance. Construct through make_augmented_law.
class AugmentedLaw {
public:
    const std::vector<std::array<cplx, 2>>& means() const noexcept { return means_; }
    const CMatrix& covariance() const noexcept { return cov_; }
    /// log p(xhat_aug | symbol q).
    double log_density(const std::array<cplx, 2>& xhat_aug, std::size_t q) const;

    friend AugmentedLaw make_augmented_law(std::vector<std::array<cplx, 2>> means, const CMatrix& covariance);

private:
    std::vector<std::array<cplx, 2>> means_;
    CMatrix cov_;
    // lower Cholesky factor of cov_
    double l00_ = 0.0;
    cplx l10_{};
    double l11_ = 0.0;
    double log_norm_ = 0.0;
};

/// Throws NotHPD if `covariance` is not a 2x2 Hermitian PD matrix.
AugmentedLaw make_augmented_law(std::vector<std::array<cplx, 2>> means, const CMatrix& covariance);

/// Throws DegenerateComponent(0) when variance <= 0.
ProperLaw make_proper_law(std::vector<cplx> means, double variance);
double log_density(const ProperLaw& law, cplx xhat, std::size_t q);

struct LlrVector {
    std::vector<double> values;        // clamped, label-bit order
    std::vector<double> raw;           // before clamping
    std::vector<double> log_densities; // per symbol
};

LlrVector llr_proper(cplx xhat, const ProperLaw& law, const BitSets& bits);
/// `xhat_aug[1]` must equal conj(xhat_aug[0]).
LlrVector llr_general(const std::array<cplx, 2>& xhat_aug, const AugmentedLaw& law, const BitSets& bits);
LlrVector llr_general(cplx xhat, const AugmentedLaw& law, const BitSets& bits);

/// mean_q = alpha_i s_q, variance = cond_var_i.
ProperLaw build_law_linear(const LinearEstimatorBank& bank, const Constellation& c, std::size_t i);
/// mean_q = alpha_i (s_q, s_q*), covariance = cond_cov_i.
AugmentedLaw build_law_widely(const WidelyEstimatorBank& bank, const Constellation& c, std::size_t i);
/// Widely law with the conditional pseudo-variance rounded to zero, evaluated
/// with the proper density (variance = top-left augmented entry).
ProperLaw build_proper_law_from_widely(const WidelyEstimatorBank& bank, const Constellation& c, std::size_t i);

/// Per component, max over bits of |raw_a - raw_b|.
std::vector<double> llr_equality_report(std::span<const LlrVector> a, std::span<const LlrVector> b);

/// Bit decisions from LLR signs (positive -> 1), packed as a label.
std::uint32_t decide_label(const LlrVector& llr);
/// argmax_q p(xhat | s_q); ties go to the lowest index.
std::size_t ml_symbol(const LlrVector& llr);

/// CSV columns: trial,component,bit,llr_A,llr_B,abs_diff
void write_llr_dump_header(std::ostream& os);
void write_llr_dump_rows(std::ostream& os, std::size_t trial, std::size_t component, const LlrVector& a,
                         const LlrVector& b);

}  // namespace cwcu
