#include "cwcu/model.hpp"

#include <algorithm>
#include <array>
#include <string>

namespace cwcu {

namespace {

constexpr double kHermitianTol = 1e-12;

void require_index(std::size_t i, std::size_t n) {
    if (i >= n) throw IndexOutOfRange("component " + std::to_string(i) + " out of range for n = " + std::to_string(n));
}

}  // namespace

CMatrix augmented_covariance(const CMatrix& cov, const CMatrix& pseudo) {
    return block2x2(cov, pseudo, conj(pseudo), conj(cov));
}

LinearModel build_model(const CMatrix& H, const Constellation& c, const CMatrix& Cnn) {
    return build_model(H, c, Cnn, CMatrix(Cnn.rows(), Cnn.cols()));
}

LinearModel build_model(const CMatrix& H, const Constellation& c, const CMatrix& Cnn, const CMatrix& Cnn_pseudo) {
    const std::size_t m = H.rows(), n = H.cols();
    if (n == 0 || m < n)
        throw DimensionMismatch("observation matrix must be m x n with m >= n >= 1, got " + std::to_string(m) + "x" +
                                std::to_string(n));
    if (Cnn.rows() != m || Cnn.cols() != m) throw DimensionMismatch("noise covariance must be m x m");
    if (Cnn_pseudo.rows() != m || Cnn_pseudo.cols() != m)
        throw DimensionMismatch("noise pseudo-covariance must be m x m");
    if (!all_finite(H) || !all_finite(Cnn)) throw ModelError("model matrices contain non-finite entries");
    if (!is_hermitian(Cnn, kHermitianTol * std::max(1.0, frobenius_norm(Cnn))))
        throw NotHPD("noise covariance is not Hermitian");
    if (frobenius_norm(Cnn_pseudo) != 0.0) throw ModelError("noise must be proper (zero pseudo-covariance)");
    cholesky(Cnn);

    LinearModel model;
    model.H = H;
    model.Cxx = c.variance * CMatrix::identity(n);
    model.Cxx_pseudo = c.pseudo_variance * CMatrix::identity(n);
    model.Cnn = Cnn;
    model.Cnn_pseudo = Cnn_pseudo;
    return model;
}

AugmentedModel augment(const LinearModel& model) {
    AugmentedModel am;
    am.base = model;
    am.H_aug = blkdiag(model.H, conj(model.H));
    am.Cxx_aug = augmented_covariance(model.Cxx, model.Cxx_pseudo);
    am.Cnn_aug = augmented_covariance(model.Cnn, model.Cnn_pseudo);
    am.Cxy_aug = am.Cxx_aug * hermitian(am.H_aug);
    am.Cyy_aug = am.H_aug * am.Cxy_aug + am.Cnn_aug;
    cholesky(am.Cyy_aug);
    return am;
}

ComponentView component_view(const LinearModel& model, std::size_t i) {
    require_index(i, model.n());
    const std::array<std::size_t, 1> drop{i};
    const auto keep = complement_indices(model.n(), drop);
    ComponentView v;
    v.i = i;
    v.h = model.H.col(i);
    v.Hbar = select_cols(model.H, keep);
    v.Cxbar = select(model.Cxx, keep, keep);
    return v;
}

AugmentedComponentView component_view(const AugmentedModel& am, std::size_t i) {
    const std::size_t n = am.n();
    require_index(i, n);
    const std::array<std::size_t, 2> pair{i, i + n};
    const auto keep = complement_indices(2 * n, pair);
    AugmentedComponentView v;
    v.i = i;
    v.H_i = select_cols(am.H_aug, pair);
    v.Hbar = select_cols(am.H_aug, keep);
    v.Cxbar = select(am.Cxx_aug, keep, keep);
    v.Cxixi = select(am.Cxx_aug, pair, pair);
    return v;
}

}  // namespace cwcu
