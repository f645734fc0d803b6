#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "cwcu/constellation.hpp"
#include "cwcu/linalg.hpp"
#include "cwcu/model.hpp"

namespace cwcu::testing {

inline cplx cnormal(std::mt19937_64& rng, double variance = 1.0) {
    std::normal_distribution<double> nd(0.0, std::sqrt(variance / 2.0));
    const double re = nd(rng);
    return {re, nd(rng)};
}

inline CMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double variance = 1.0) {
    CMatrix a(rows, cols);
    for (auto& v : a.data()) v = cnormal(rng, variance);
    return a;
}

/// M M^H / cols + shift * I
inline CMatrix random_hpd(std::mt19937_64& rng, std::size_t n, double shift = 1.0) {
    const CMatrix m = random_matrix(rng, n, n);
    CMatrix a = m * hermitian(m);
    a *= 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) a(i, i) += shift;
    return a;
}

/// Random (m x n) observation matrix with m in [n, max_m], random HPD noise scaled to
/// an SNR drawn from [0, 20] dB.
inline LinearModel random_model(std::mt19937_64& rng, const Constellation& c, std::size_t max_m, std::size_t max_n) {
    std::uniform_int_distribution<std::size_t> pick_n(1, max_n);
    const std::size_t n = pick_n(rng);
    std::uniform_int_distribution<std::size_t> pick_m(n, std::max(n, max_m));
    const std::size_t m = pick_m(rng);
    std::uniform_real_distribution<double> snr_db(0.0, 20.0);
    const double noise_scale = std::pow(10.0, -snr_db(rng) / 10.0);
    CMatrix cnn = random_hpd(rng, m, 0.5);
    cnn *= noise_scale;
    return build_model(random_matrix(rng, m, n), c, cnn);
}

inline CVector draw_symbols(std::mt19937_64& rng, const Constellation& c, std::size_t n, std::vector<std::size_t>* idx = nullptr) {
    std::uniform_int_distribution<std::size_t> pick(0, c.order() - 1);
    CVector x(n);
    if (idx) idx->resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t q = pick(rng);
        x[j] = c.symbols[q];
        if (idx) (*idx)[j] = q;
    }
    return x;
}

/// Correlated proper Gaussian noise with covariance cnn.
inline CVector draw_noise(std::mt19937_64& rng, const CMatrix& cnn) {
    const CMatrix l = cholesky(cnn);
    CVector w(cnn.rows());
    for (auto& v : w) v = cnormal(rng);
    return l * w;
}

inline CVector observe(std::mt19937_64& rng, const LinearModel& model, const CVector& x) {
    CVector y = model.H * x;
    const CVector v = draw_noise(rng, model.Cnn);
    for (std::size_t k = 0; k < y.size(); ++k) y[k] += v[k];
    return y;
}

}  // namespace cwcu::testing
