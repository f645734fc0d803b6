#include "cwcu/linear_estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cwcu {

namespace {

constexpr double kRealTol = 1e-10;

// Quadratic form r M r^H for a row vector r.
cplx row_quadratic(std::span<const cplx> r, const CMatrix& M) {
    cplx acc{};
    for (std::size_t a = 0; a < r.size(); ++a) {
        cplx inner{};
        auto mrow = M.row(a);
        for (std::size_t b = 0; b < r.size(); ++b) inner += mrow[b] * std::conj(r[b]);
        acc += r[a] * inner;
    }
    return acc;
}

void fill_stats(LinearEstimatorBank& bank, const LinearModel& model) {
    const std::size_t n = model.n();
    bank.alpha.resize(n);
    bank.cond_var.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto s = conditional_stats(bank.E, model, i);
        if (std::abs(s.alpha.imag()) > kRealTol * std::max(1.0, std::abs(s.alpha)))
            throw DegenerateComponent(i, "alpha is not real (imag " + std::to_string(s.alpha.imag()) + ")");
        bank.alpha[i] = s.alpha.real();
        bank.cond_var[i] = s.cond_var;
    }
}

}  // namespace

std::string_view to_string(LinearKind k) {
    switch (k) {
        case LinearKind::lmmse: return "lmmse";
        case LinearKind::cwcu_lmmse: return "cwcu-lmmse";
    }
    return "?";
}

ConditionalStats conditional_stats(const CMatrix& E, const LinearModel& model, std::size_t i) {
    if (E.rows() != model.n() || E.cols() != model.m())
        throw DimensionMismatch("conditional_stats: estimator is not n x m");
    const ComponentView v = component_view(model, i);
    const auto e = E.row(i);

    cplx alpha{};
    for (std::size_t k = 0; k < e.size(); ++k) alpha += e[k] * v.h[k];

    // e^H Hbar Cxbar Hbar^H e + e^H Cnn e, with e^H Hbar formed first (1 x (n-1)).
    CVector g(v.Hbar.cols());
    for (std::size_t j = 0; j < g.size(); ++j)
        for (std::size_t k = 0; k < e.size(); ++k) g[j] += e[k] * v.Hbar(k, j);
    const cplx q = row_quadratic(g, v.Cxbar) + row_quadratic(e, model.Cnn);

    const double scale = std::max(1e-300, std::abs(q));
    if (std::abs(q.imag()) > 1e-9 * scale || q.real() < -1e-12 * scale)
        throw Error("conditional variance of component " + std::to_string(i) + " is not real nonnegative");
    return {alpha, std::max(0.0, q.real())};
}

LinearEstimatorBank lmmse(const LinearModel& model) {
    const CMatrix HC = model.H * model.Cxx;
    const CMatrix Cyy = HC * hermitian(model.H) + model.Cnn;
    // E^H = Cyy^-1 H Cxx since Cyy and Cxx are Hermitian
    LinearEstimatorBank bank;
    bank.kind = LinearKind::lmmse;
    bank.E = hermitian(solve_hpd(Cyy, HC));
    fill_stats(bank, model);
    return bank;
}

LinearEstimatorBank cwcu_lmmse(const LinearModel& model) { return cwcu_lmmse(model, lmmse(model)); }

LinearEstimatorBank cwcu_lmmse(const LinearModel& model, const LinearEstimatorBank& lmmse_bank) {
    LinearEstimatorBank bank;
    bank.kind = LinearKind::cwcu_lmmse;
    bank.E = lmmse_bank.E;
    for (std::size_t i = 0; i < model.n(); ++i) {
        const double a = lmmse_bank.alpha[i];
        if (!(a > kAlphaFloor)) throw DegenerateComponent(i, "LMMSE alpha " + std::to_string(a) + " too small to de-bias");
        for (auto& v : bank.E.row(i)) v /= a;
    }
    fill_stats(bank, model);
    return bank;
}

std::vector<double> bmse(const CMatrix& E, const LinearModel& model) {
    CMatrix B = E * model.H;
    for (std::size_t i = 0; i < B.rows(); ++i) B(i, i) -= 1.0;
    const CMatrix M = B * model.Cxx * hermitian(B) + E * model.Cnn * hermitian(E);
    std::vector<double> out(M.rows());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(0.0, M(i, i).real());
    return out;
}

}  // namespace cwcu
