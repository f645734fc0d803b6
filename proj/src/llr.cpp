#include "cwcu/llr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "cwcu/format.hpp"

namespace cwcu {

namespace {

double log_sum_exp(std::span<const double> logs, std::span<const std::size_t> idx) {
    double peak = -std::numeric_limits<double>::infinity();
    for (auto q : idx) peak = std::max(peak, logs[q]);
    if (!std::isfinite(peak)) return peak;
    double s = 0.0;
    for (auto q : idx) s += std::exp(logs[q] - peak);
    return peak + std::log(s);
}

LlrVector finish(std::vector<double> logs, const BitSets& bits) {
    LlrVector out;
    out.raw.resize(bits.bits());
    out.values.resize(bits.bits());
    for (unsigned b = 0; b < bits.bits(); ++b) {
        out.raw[b] = log_sum_exp(logs, bits.ones[b]) - log_sum_exp(logs, bits.zeros[b]);
        out.values[b] = std::clamp(out.raw[b], -kLlrClamp, kLlrClamp);
    }
    out.log_densities = std::move(logs);
    return out;
}

void require_component(std::size_t i, std::size_t n) {
    if (i >= n) throw IndexOutOfRange("component " + std::to_string(i) + " out of range for n = " + std::to_string(n));
}

}  // namespace

AugmentedLaw make_augmented_law(std::vector<std::array<cplx, 2>> means, const CMatrix& covariance) {
    if (covariance.rows() != 2 || covariance.cols() != 2) throw DimensionMismatch("augmented law needs a 2x2 covariance");
    if (!is_hermitian(covariance, 1e-9 * std::max(1e-300, frobenius_norm(covariance))))
        throw NotHPD("augmented covariance is not Hermitian");
    const CMatrix l = cholesky(covariance);
    AugmentedLaw law;
    law.means_ = std::move(means);
    law.cov_ = covariance;
    law.l00_ = l(0, 0).real();
    law.l10_ = l(1, 0);
    law.l11_ = l(1, 1).real();
    // -1/2 log(pi^2 det C) with det C = (l00 l11)^2
    law.log_norm_ = -std::log(std::numbers::pi) - std::log(law.l00_) - std::log(law.l11_);
    return law;
}

double AugmentedLaw::log_density(const std::array<cplx, 2>& xhat_aug, std::size_t q) const {
    const cplx d0 = xhat_aug[0] - means_[q][0];
    const cplx d1 = xhat_aug[1] - means_[q][1];
    // d^H C^-1 d = |L^-1 d|^2
    const cplx z0 = d0 / l00_;
    const cplx z1 = (d1 - l10_ * z0) / l11_;
    return log_norm_ - 0.5 * (std::norm(z0) + std::norm(z1));
}

ProperLaw make_proper_law(std::vector<cplx> means, double variance) {
    if (!(variance > 0.0) || !std::isfinite(variance))
        throw DegenerateComponent(0, "conditional variance " + std::to_string(variance) + " is not positive");
    return {std::move(means), variance};
}

double log_density(const ProperLaw& law, cplx xhat, std::size_t q) {
    return -std::log(std::numbers::pi * law.variance) - std::norm(xhat - law.means[q]) / law.variance;
}

LlrVector llr_proper(cplx xhat, const ProperLaw& law, const BitSets& bits) {
    std::vector<double> logs(law.means.size());
    for (std::size_t q = 0; q < logs.size(); ++q) logs[q] = log_density(law, xhat, q);
    return finish(std::move(logs), bits);
}

LlrVector llr_general(const std::array<cplx, 2>& xhat_aug, const AugmentedLaw& law, const BitSets& bits) {
    if (std::abs(xhat_aug[1] - std::conj(xhat_aug[0])) > 1e-9 * (1.0 + std::abs(xhat_aug[0])))
        throw Error("augmented estimate is not of the form (x, x*)");
    std::vector<double> logs(law.means().size());
    for (std::size_t q = 0; q < logs.size(); ++q) logs[q] = law.log_density(xhat_aug, q);
    return finish(std::move(logs), bits);
}

LlrVector llr_general(cplx xhat, const AugmentedLaw& law, const BitSets& bits) {
    return llr_general({xhat, std::conj(xhat)}, law, bits);
}

ProperLaw build_law_linear(const LinearEstimatorBank& bank, const Constellation& c, std::size_t i) {
    require_component(i, bank.n());
    std::vector<cplx> means(c.order());
    for (std::size_t q = 0; q < means.size(); ++q) means[q] = bank.alpha[i] * c.symbols[q];
    try {
        return make_proper_law(std::move(means), bank.cond_var[i]);
    } catch (const DegenerateComponent&) {
        throw DegenerateComponent(i, "conditional variance " + std::to_string(bank.cond_var[i]) + " is not positive");
    }
}

AugmentedLaw build_law_widely(const WidelyEstimatorBank& bank, const Constellation& c, std::size_t i) {
    require_component(i, bank.n());
    const CMatrix& a = bank.alpha[i];
    std::vector<std::array<cplx, 2>> means(c.order());
    for (std::size_t q = 0; q < means.size(); ++q) {
        const cplx s = c.symbols[q];
        means[q] = {a(0, 0) * s + a(0, 1) * std::conj(s), a(1, 0) * s + a(1, 1) * std::conj(s)};
    }
    return make_augmented_law(std::move(means), bank.cond_cov[i]);
}

ProperLaw build_proper_law_from_widely(const WidelyEstimatorBank& bank, const Constellation& c, std::size_t i) {
    require_component(i, bank.n());
    const CMatrix& a = bank.alpha[i];
    std::vector<cplx> means(c.order());
    for (std::size_t q = 0; q < means.size(); ++q)
        means[q] = a(0, 0) * c.symbols[q] + a(0, 1) * std::conj(c.symbols[q]);
    try {
        return make_proper_law(std::move(means), bank.cond_cov[i](0, 0).real());
    } catch (const DegenerateComponent&) {
        throw DegenerateComponent(i, "conditional variance is not positive");
    }
}

std::vector<double> llr_equality_report(std::span<const LlrVector> a, std::span<const LlrVector> b) {
    if (a.size() != b.size()) throw DimensionMismatch("llr_equality_report: component counts differ");
    std::vector<double> out(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].raw.size() != b[i].raw.size()) throw DimensionMismatch("llr_equality_report: bit counts differ");
        for (std::size_t k = 0; k < a[i].raw.size(); ++k) out[i] = std::max(out[i], std::abs(a[i].raw[k] - b[i].raw[k]));
    }
    return out;
}

std::uint32_t decide_label(const LlrVector& llr) {
    std::uint32_t label = 0;
    for (double v : llr.raw) label = (label << 1) | (v > 0.0 ? 1u : 0u);
    return label;
}

std::size_t ml_symbol(const LlrVector& llr) {
    const auto it = std::max_element(llr.log_densities.begin(), llr.log_densities.end());
    return static_cast<std::size_t>(it - llr.log_densities.begin());
}

void write_llr_dump_header(std::ostream& os) { os << "trial,component,bit,llr_A,llr_B,abs_diff\n"; }

void write_llr_dump_rows(std::ostream& os, std::size_t trial, std::size_t component, const LlrVector& a,
                         const LlrVector& b) {
    for (std::size_t k = 0; k < a.raw.size(); ++k) {
        os << trial << ',' << component << ',' << k << ',' << fmt_num(a.raw[k]) << ',' << fmt_num(b.raw[k]) << ','
           << fmt_num(std::abs(a.raw[k] - b.raw[k])) << '\n';
    }
}

}  // namespace cwcu
