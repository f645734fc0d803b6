#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cwcu/linear_estimators.hpp"
#include "cwcu/llr.hpp"
#include "cwcu/widely_estimators.hpp"
#include "support/oracles.hpp"
#include "support/test_support.hpp"

using namespace cwcu;
namespace t = cwcu::testing;

namespace {

std::vector<std::array<cplx, 2>> augmented_means(const Constellation& c, const CMatrix& alpha) {
    std::vector<std::array<cplx, 2>> out;
    for (cplx s : c.symbols) {
        const cplx mu = alpha(0, 0) * s + alpha(0, 1) * std::conj(s);
        out.push_back({mu, std::conj(mu)});
    }
    return out;
}

}  // namespace

TEST_CASE("qpsk llr signs follow the transmitted label") {
    const Constellation c = make_qpsk();
    const BitSets bits = bit_sets(c);
    const ProperLaw law = make_proper_law(c.symbols, 0.1);
    for (std::size_t q = 0; q < c.order(); ++q) {
        const LlrVector l = llr_proper(c.symbols[q], law, bits);
        for (unsigned b = 0; b < c.bits_per_symbol; ++b) CHECK((l.values[b] > 0) == c.bit(q, b));
        CHECK(decide_label(l) == c.labels[q]);
        CHECK(ml_symbol(l) == q);
    }
    const LlrVector zero = llr_proper(cplx{}, law, bits);
    for (double v : zero.raw) CHECK(std::abs(v) < 1e-15);
}

TEST_CASE("llr_proper matches direct long-double summation") {
    std::mt19937_64 rng(31);
    for (const Constellation& c : {make_qpsk(), make_16qam(), make_8qam_rect()}) {
        const BitSets bits = bit_sets(c);
        for (int k = 0; k < 200; ++k) {
            const double var = std::uniform_real_distribution<double>(0.05, 2.0)(rng);
            const double a = std::uniform_real_distribution<double>(0.3, 1.0)(rng);
            std::vector<cplx> means;
            for (cplx s : c.symbols) means.push_back(a * s);
            const ProperLaw law = make_proper_law(means, var);
            const cplx xhat = t::cnormal(rng, 1.5);
            const LlrVector l = llr_proper(xhat, law, bits);
            for (unsigned b = 0; b < c.bits_per_symbol; ++b) {
                const long double ref = oracle::llr_direct_proper(xhat, means, var, c, b);
                CHECK(std::abs(l.raw[b] - static_cast<double>(ref)) < 1e-10 * (1 + std::abs(static_cast<double>(ref))));
            }
        }
    }
}

TEST_CASE("general engine with zero pseudo-covariance equals the proper engine") {
    std::mt19937_64 rng(32);
    const Constellation c = make_16qam();
    const BitSets bits = bit_sets(c);
    for (int k = 0; k < 300; ++k) {
        const double var = std::uniform_real_distribution<double>(0.01, 3.0)(rng);
        const ProperLaw pl = make_proper_law(c.symbols, var);
        const AugmentedLaw gl = make_augmented_law(augmented_means(c, CMatrix::identity(2)), var * CMatrix::identity(2));
        const cplx xhat = t::cnormal(rng, 2.0);
        const LlrVector a = llr_proper(xhat, pl, bits);
        const LlrVector b = llr_general(xhat, gl, bits);
        for (std::size_t j = 0; j < a.raw.size(); ++j) CHECK(std::abs(a.raw[j] - b.raw[j]) < 1e-9);
        for (std::size_t q = 0; q < c.order(); ++q)
            CHECK(std::abs(a.log_densities[q] - b.log_densities[q]) < 1e-9 * (1 + std::abs(a.log_densities[q])));
    }
}

TEST_CASE("densities integrate to one and match the bivariate form") {
    std::mt19937_64 rng(33);
    const Constellation c = make_8qam_rect();
    for (int k = 0; k < 5; ++k) {
        const double v = std::uniform_real_distribution<double>(0.2, 1.0)(rng);
        const double rho = std::uniform_real_distribution<double>(0.0, 0.8)(rng);
        const cplx p = std::polar(rho * v, std::uniform_real_distribution<double>(-3.0, 3.0)(rng));
        const CMatrix cov{{v, p}, {std::conj(p), v}};
        const AugmentedLaw law = make_augmented_law(augmented_means(c, CMatrix::identity(2)), cov);
        const ProperLaw pl = make_proper_law(c.symbols, v);
        const cplx mu = c.symbols[3];
        const int grid = 400;
        const double half = 7.0 * std::sqrt(v), h = 2.0 * half / grid;
        double mass = 0.0, mass_p = 0.0, worst = 0.0;
        for (int a = 0; a < grid; ++a)
            for (int b = 0; b < grid; ++b) {
                const cplx z = mu + cplx(-half + (a + 0.5) * h, -half + (b + 0.5) * h);
                const double d = std::exp(law.log_density({z, std::conj(z)}, 3));
                mass += d * h * h;
                mass_p += std::exp(log_density(pl, z, 3)) * h * h;
                worst = std::max(worst, std::abs(d - oracle::bivariate_density(z.real(), z.imag(), mu, v, p)));
            }
        CHECK(std::abs(mass - 1.0) < 1e-4);
        CHECK(std::abs(mass_p - 1.0) < 1e-4);
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("llr is invariant to scaling the estimate by alpha") {
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 50; ++trial) {
        const Constellation c = trial % 2 ? make_16qam() : make_qpsk();
        const BitSets bits = bit_sets(c);
        const LinearModel m = t::random_model(rng, c, 8, 6);
        const LinearEstimatorBank l = lmmse(m);
        const LinearEstimatorBank cl = cwcu_lmmse(m, l);
        const CVector y = t::observe(rng, m, t::draw_symbols(rng, c, m.n()));
        const CVector a = l.estimate(y), b = cl.estimate(y);
        for (std::size_t i = 0; i < m.n(); ++i) {
            const LlrVector la = llr_proper(a[i], build_law_linear(l, c, i), bits);
            const LlrVector lb = llr_proper(b[i], build_law_linear(cl, c, i), bits);
            for (std::size_t j = 0; j < la.raw.size(); ++j) CHECK(std::abs(la.raw[j] - lb.raw[j]) < 1e-9);
        }
    }
    std::mt19937_64 rng2(35);
    const Constellation c = make_8qam_rect();
    const BitSets bits = bit_sets(c);
    for (int trial = 0; trial < 50; ++trial) {
        const LinearModel m = t::random_model(rng2, c, 8, 6);
        const AugmentedModel am = augment(m);
        const WidelyEstimatorBank wl = wlmmse(am);
        const WidelyEstimatorBank cw = cwcu_wlmmse(am, wl);
        const CVector y = t::observe(rng2, m, t::draw_symbols(rng2, c, m.n()));
        const CVector a = wl.estimate(y), b = cw.estimate(y);
        std::vector<LlrVector> va, vb;
        for (std::size_t i = 0; i < m.n(); ++i) {
            va.push_back(llr_general(a[i], build_law_widely(wl, c, i), bits));
            vb.push_back(llr_general(b[i], build_law_widely(cw, c, i), bits));
        }
        for (double d : llr_equality_report(va, vb)) CHECK(d < 1e-9);
    }
}

TEST_CASE("qpsk llr is monotone in the matching axis") {
    const Constellation c = make_qpsk();
    const BitSets bits = bit_sets(c);
    const ProperLaw law = make_proper_law(c.symbols, 0.5);
    double prev0 = INFINITY, prev1 = INFINITY;
    for (double u = -2.0; u <= 2.0; u += 0.05) {
        const LlrVector l = llr_proper(cplx(u, u), law, bits);
        // bit value 1 sits on the negative side of each axis
        CHECK(l.raw[0] < prev0);
        CHECK(l.raw[1] < prev1);
        prev0 = l.raw[0];
        prev1 = l.raw[1];
    }
}

TEST_CASE("llr clamping") {
    const Constellation c = make_qpsk();
    const BitSets bits = bit_sets(c);
    const ProperLaw law = make_proper_law(c.symbols, 1e-3);
    const LlrVector l = llr_proper(c.symbols[3] * 3.0, law, bits);
    for (std::size_t j = 0; j < l.raw.size(); ++j) {
        CHECK(std::abs(l.raw[j]) > kLlrClamp);
        CHECK(std::abs(l.values[j]) == kLlrClamp);
        CHECK((l.values[j] > 0) == (l.raw[j] > 0));
        CHECK(std::isfinite(l.raw[j]));
    }
}

TEST_CASE("law construction errors") {
    const Constellation c = make_qpsk();
    CHECK_THROWS_AS(make_proper_law(c.symbols, 0.0), DegenerateComponent);
    CHECK_THROWS_AS(make_augmented_law(augmented_means(c, CMatrix::identity(2)), CMatrix{{1, 1}, {1, 1}}), NotHPD);
    CHECK_THROWS_AS(make_augmented_law(augmented_means(c, CMatrix::identity(2)), CMatrix{{1, 2}, {2, 1}}), NotHPD);
}

TEST_CASE("proper shortcut law from a widely bank") {
    std::mt19937_64 rng(36);
    const Constellation c = make_8qam_rect();
    const AugmentedModel am = augment(t::random_model(rng, c, 6, 4));
    const WidelyEstimatorBank cw = cwcu_wlmmse(am);
    for (std::size_t i = 0; i < am.n(); ++i) {
        const ProperLaw pl = build_proper_law_from_widely(cw, c, i);
        CHECK(pl.variance == doctest::Approx(cw.cond_cov[i](0, 0).real()).epsilon(1e-14));
        for (std::size_t q = 0; q < c.order(); ++q) CHECK(std::abs(pl.means[q] - c.symbols[q]) < 1e-9);
    }
}

TEST_CASE("llr dump csv") {
    const Constellation c = make_qpsk();
    const BitSets bits = bit_sets(c);
    const LlrVector a = llr_proper(cplx(0.3, -0.2), make_proper_law(c.symbols, 0.5), bits);
    std::ostringstream os;
    write_llr_dump_header(os);
    write_llr_dump_rows(os, 7, 2, a, a);
    const std::string s = os.str();
    CHECK(s.rfind("trial,component,bit,llr_A,llr_B,abs_diff\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 3);
    CHECK(s.find("7,2,1,") != std::string::npos);
}
