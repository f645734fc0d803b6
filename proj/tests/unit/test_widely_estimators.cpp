#include <doctest.h>

#include <random>

#include "cwcu/linear_estimators.hpp"
#include "cwcu/widely_estimators.hpp"
#include "support/oracles.hpp"
#include "support/test_support.hpp"

using namespace cwcu;
namespace t = cwcu::testing;

namespace {

AugmentedModel scalar_8qam() { return augment(build_model(CMatrix{{1.0}}, make_8qam_rect(), CMatrix{{1.0}})); }

bool has_augmented_structure(const CMatrix& e, double tol) {
    const std::size_t n = e.rows() / 2, m = e.cols() / 2;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < m; ++c) {
            if (std::abs(e(r + n, c + m) - std::conj(e(r, c))) > tol) return false;
            if (std::abs(e(r + n, c) - std::conj(e(r, c + m))) > tol) return false;
        }
    return true;
}

}  // namespace

TEST_CASE("wlmmse scalar 8-QAM example") {
    const AugmentedModel am = scalar_8qam();
    const WidelyEstimatorBank wl = wlmmse(am);
    const CMatrix expected = (1.0 / 16.0) * CMatrix{{7, 3}, {3, 7}};
    CHECK(max_abs_diff(wl.E_aug, expected) < 1e-15);
    CHECK(max_abs_diff(wl.alpha[0], expected) < 1e-15);
    CHECK(max_abs_diff(wl.cond_cov[0], (1.0 / 256.0) * CMatrix{{58, 42}, {42, 58}}) < 1e-15);
    CHECK(bmse(wl.E_aug, am)[0] == doctest::Approx(7.0 / 16.0).epsilon(1e-14));
    // the linear estimator on the same data is worse
    CHECK(bmse(wl.E_aug, am)[0] < 0.5);
}

TEST_CASE("cwcu_wlmmse scalar 8-QAM example") {
    const AugmentedModel am = scalar_8qam();
    const WidelyEstimatorBank cw = cwcu_wlmmse(am);
    CHECK(max_abs_diff(cw.E_aug, CMatrix::identity(2)) < 1e-14);
    CHECK(max_abs_diff(cw.alpha[0], CMatrix::identity(2)) < 1e-14);
    CHECK(max_abs_diff(cw.cond_cov[0], CMatrix::identity(2)) < 1e-14);
    CHECK(bmse(cw.E_aug, am)[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("proper data reduces to the linear estimators") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Constellation c = trial % 2 ? make_16qam() : make_qpsk();
        const LinearModel m = t::random_model(rng, c, 7, 5);
        const AugmentedModel am = augment(m);
        const LinearEstimatorBank l = lmmse(m);
        const LinearEstimatorBank cl = cwcu_lmmse(m, l);
        const WidelyEstimatorBank wl = wlmmse(am);
        const WidelyEstimatorBank cw = cwcu_wlmmse(am, wl);
        CHECK(max_abs_diff(wl.E_aug, embed_linear(l.E)) < 1e-10);
        CHECK(max_abs_diff(cw.E_aug, embed_linear(cl.E)) < 1e-9);
        for (std::size_t i = 0; i < m.n(); ++i) {
            CHECK(std::abs(wl.alpha[i](0, 0) - l.alpha[i]) < 1e-10);
            CHECK(std::abs(wl.alpha[i](0, 1)) < 1e-10);
            CHECK(std::abs(wl.cond_cov[i](0, 0) - l.cond_var[i]) < 1e-10);
            CHECK(std::abs(cw.cond_cov[i](0, 0) - cl.cond_var[i]) < 1e-9 * (1 + cl.cond_var[i]));
        }
    }
}

TEST_CASE("improper data: structure, alpha and bmse ordering") {
    std::mt19937_64 rng(12);
    const Constellation c = make_8qam_rect();
    for (int trial = 0; trial < 200; ++trial) {
        const LinearModel m = t::random_model(rng, c, 8, 6);
        const AugmentedModel am = augment(m);
        const WidelyEstimatorBank wl = wlmmse(am);
        const WidelyEstimatorBank cw = cwcu_wlmmse(am, wl);
        CHECK(has_augmented_structure(wl.E_aug, 0.0));
        CHECK(has_augmented_structure(cw.E_aug, 1e-12));
        const auto b_wl = bmse(wl.E_aug, am);
        const auto b_cw = bmse(cw.E_aug, am);
        const auto b_l = bmse(lmmse(m).E, m);
        for (std::size_t i = 0; i < m.n(); ++i) {
            CHECK(max_abs_diff(cw.alpha[i], CMatrix::identity(2)) < 1e-9);
            CHECK(max_abs_diff(wl.alpha[i], CMatrix::identity(2)) > 1e-6);
            CHECK(is_hermitian(cw.cond_cov[i], 0.0));
            CHECK(cw.cond_cov[i](0, 0).real() > 0.0);
            CHECK(b_wl[i] <= b_cw[i] + 1e-12);
            CHECK(b_wl[i] <= b_l[i] + 1e-12);
        }
    }
}

TEST_CASE("alpha-inverse rows agree with the triple-product form") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        const AugmentedModel am = augment(t::random_model(rng, make_8qam_rect(), 7, 5));
        const WidelyEstimatorBank cw = cwcu_wlmmse(am);
        for (std::size_t i = 0; i < am.n(); ++i) {
            const CMatrix ref = oracle::cwcu_wlmmse_rows_triple_product(am, i);
            CHECK(max_abs_diff(cw.component_rows(i), ref) < 1e-9 * (1 + frobenius_norm(ref)));
        }
    }
}

TEST_CASE("estimates: cwcu equals alpha^-1 applied to wlmmse") {
    std::mt19937_64 rng(14);
    const Constellation c = make_8qam_rect();
    const LinearModel m = t::random_model(rng, c, 8, 5);
    const AugmentedModel am = augment(m);
    const WidelyEstimatorBank wl = wlmmse(am);
    const WidelyEstimatorBank cw = cwcu_wlmmse(am, wl);
    for (int k = 0; k < 100; ++k) {
        const CVector y = t::observe(rng, m, t::draw_symbols(rng, c, m.n()));
        const CVector a = wl.estimate_augmented(y);
        const CVector b = cw.estimate(y);
        REQUIRE(a.size() == 2 * m.n());
        for (std::size_t i = 0; i < m.n(); ++i) {
            const CMatrix ainv = inv2(wl.alpha[i]);
            const cplx expected = ainv(0, 0) * a[i] + ainv(0, 1) * a[i + m.n()];
            CHECK(std::abs(b[i] - expected) < 1e-10 * (1 + std::abs(expected)));
            CHECK(std::abs(a[i + m.n()] - std::conj(a[i])) < 1e-12 * (1 + std::abs(a[i])));
        }
    }
}

TEST_CASE("conditional covariance against Monte Carlo on a 5x3 model") {
    std::mt19937_64 rng(15);
    const Constellation c = make_8qam_rect();
    const LinearModel m = build_model(t::random_matrix(rng, 5, 3), c, 0.4 * t::random_hpd(rng, 5));
    const AugmentedModel am = augment(m);
    const WidelyEstimatorBank cw = cwcu_wlmmse(am);
    const std::size_t i = 0;
    const int draws = 100'000;
    for (std::size_t q : {std::size_t{1}, std::size_t{6}}) {
        const cplx s = c.symbols[q];
        double v = 0.0, v2 = 0.0;
        cplx p{}, mean{};
        double p_re2 = 0.0, p_im2 = 0.0;
        for (int k = 0; k < draws; ++k) {
            CVector x = t::draw_symbols(rng, c, m.n());
            x[i] = s;
            const cplx d = cw.estimate(t::observe(rng, m, x))[i] - s;
            mean += d;
            v += std::norm(d);
            v2 += std::norm(d) * std::norm(d);
            const cplx dd = d * d;
            p += dd;
            p_re2 += dd.real() * dd.real();
            p_im2 += dd.imag() * dd.imag();
        }
        const double nv = v / draws;
        const cplx np = p / double(draws);
        const double se_v = std::sqrt((v2 / draws - nv * nv) / draws);
        const double se_pr = std::sqrt((p_re2 / draws - np.real() * np.real()) / draws);
        const double se_pi = std::sqrt((p_im2 / draws - np.imag() * np.imag()) / draws);
        CHECK(std::abs(nv - cw.cond_cov[i](0, 0).real()) < 5 * se_v);
        CHECK(std::abs(np.real() - cw.cond_cov[i](0, 1).real()) < 5 * se_pr);
        CHECK(std::abs(np.imag() - cw.cond_cov[i](0, 1).imag()) < 5 * se_pi);
        CHECK(std::abs(mean / double(draws)) < 5 * std::sqrt(nv / draws));
    }
}

TEST_CASE("orthonormal columns with white noise give proper conditional errors") {
    std::mt19937_64 rng(16);
    // Q from a unitary rotation of [I; 0]
    CMatrix a = t::random_matrix(rng, 6, 4);
    for (std::size_t col = 0; col < 4; ++col) {
        for (std::size_t prev = 0; prev < col; ++prev) {
            cplx dot{};
            for (std::size_t r = 0; r < 6; ++r) dot += std::conj(a(r, prev)) * a(r, col);
            for (std::size_t r = 0; r < 6; ++r) a(r, col) -= dot * a(r, prev);
        }
        double nrm = 0.0;
        for (std::size_t r = 0; r < 6; ++r) nrm += std::norm(a(r, col));
        for (std::size_t r = 0; r < 6; ++r) a(r, col) /= std::sqrt(nrm);
    }
    const AugmentedModel am = augment(build_model(a, make_8qam_rect(), 0.2 * CMatrix::identity(6)));
    const WidelyEstimatorBank cw = cwcu_wlmmse(am);
    for (const CMatrix& cov : cw.cond_cov) CHECK(std::abs(cov(0, 1)) < 1e-10 * cov(0, 0).real());
    for (const CMatrix& cov : wlmmse(am).cond_cov) CHECK(std::abs(cov(0, 1)) > 1e-3 * cov(0, 0).real());
}

TEST_CASE("widely_conditional_stats of the zero rows") {
    const AugmentedModel am = scalar_8qam();
    const auto s = widely_conditional_stats(CMatrix(2, 2), am, 0);
    CHECK(frobenius_norm(s.alpha) == 0.0);
    CHECK(frobenius_norm(s.cond_cov) == 0.0);
    CHECK_THROWS_AS(widely_conditional_stats(CMatrix(2, 2), am, 1), IndexOutOfRange);
}

TEST_CASE("degenerate component") {
    const AugmentedModel am = augment(build_model(CMatrix{{1.0, 0.0}, {0.0, 0.0}, {0.5, 0.0}}, make_8qam_rect(), CMatrix::identity(3)));
    try {
        (void)cwcu_wlmmse(am);
        FAIL("expected DegenerateComponent");
    } catch (const DegenerateComponent& e) {
        CHECK(e.component() == 1);
    }
}
