#pragma once

#include <cstddef>

#include "cwcu/constellation.hpp"
#include "cwcu/linalg.hpp"

namespace cwcu {

/// y = H x + n with zero-mean, independent symbols and proper noise.
struct LinearModel {
    CMatrix H;           // m x n
    CMatrix Cxx;         // n x n
    CMatrix Cxx_pseudo;  // n x n, E[x x^T]
    CMatrix Cnn;         // m x m, Hermitian PD
    CMatrix Cnn_pseudo;  // m x m, always zero

    std::size_t m() const noexcept { return H.rows(); }
    std::size_t n() const noexcept { return H.cols(); }
};

/// Augmented (x, x*) form of a LinearModel. Component i of the augmented
/// parameter vector sits at rows i and i + n.
struct AugmentedModel {
    LinearModel base;
    CMatrix H_aug;    // 2m x 2n, blkdiag(H, H*)
    CMatrix Cxx_aug;  // 2n x 2n
    CMatrix Cnn_aug;  // 2m x 2m
    CMatrix Cyy_aug;  // 2m x 2m
    CMatrix Cxy_aug;  // 2n x 2m

    std::size_t m() const noexcept { return base.m(); }
    std::size_t n() const noexcept { return base.n(); }
};

/// Column i split off from the rest of the model (y = h_i x_i + Hbar_i xbar_i + n).
struct ComponentView {
    std::size_t i = 0;
    CVector h;     // column i of H
    CMatrix Hbar;  // m x (n-1)
    CMatrix Cxbar; // (n-1) x (n-1)
};

struct AugmentedComponentView {
    std::size_t i = 0;
    CMatrix H_i;      // 2m x 2, blkdiag(h_i, h_i*)
    CMatrix Hbar;     // 2m x 2(n-1)
    CMatrix Cxbar;    // 2(n-1) x 2(n-1)
    CMatrix Cxixi;    // 2 x 2
};

/// Cxx = variance * I, Cxx_pseudo = pseudo_variance * I (i.i.d. symbols from c).
LinearModel build_model(const CMatrix& H, const Constellation& c, const CMatrix& Cnn);
/// Same, with an explicit noise pseudo-covariance that must be zero.
LinearModel build_model(const CMatrix& H, const Constellation& c, const CMatrix& Cnn, const CMatrix& Cnn_pseudo);

AugmentedModel augment(const LinearModel& model);

ComponentView component_view(const LinearModel& model, std::size_t i);
AugmentedComponentView component_view(const AugmentedModel& am, std::size_t i);

/// Augmented covariance [[C, P], [P*, C*]].
CMatrix augmented_covariance(const CMatrix& cov, const CMatrix& pseudo);

}  // namespace cwcu
