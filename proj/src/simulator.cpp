#include "cwcu/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include "cwcu/io.hpp"

namespace cwcu {

namespace {

// Trials per deterministic accumulation block.
constexpr std::size_t kChunk = 64;

std::mt19937_64 make_rng(std::initializer_list<std::uint64_t> words) {
    std::vector<std::uint32_t> seq;
    for (auto w : words) {
        seq.push_back(static_cast<std::uint32_t>(w));
        seq.push_back(static_cast<std::uint32_t>(w >> 32));
    }
    std::seed_seq ss(seq.begin(), seq.end());
    return std::mt19937_64(ss);
}

cplx proper_normal(std::mt19937_64& rng, double variance) {
    std::normal_distribution<double> nd(0.0, std::sqrt(variance / 2.0));
    const double re = nd(rng);
    return {re, nd(rng)};
}

template <class Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    if (jobs == 1) {
        for (std::size_t k = 0; k < count; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t t = 0; t < jobs; ++t) {
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < count; k = next++) {
                try {
                    fn(k);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

void accumulate_llr_diff(std::span<const double> a, std::span<const double> b, double& max_diff) {
    for (std::size_t k = 0; k < a.size(); ++k) max_diff = std::max(max_diff, std::abs(a[k] - b[k]));
}

void tally_decision(EstimatorTally& t, std::size_t component, std::uint32_t decided, std::uint32_t truth, cplx xhat,
                    cplx x) {
    const unsigned bits = static_cast<unsigned>(std::popcount(decided ^ truth));
    t.bit_errors += bits;
    t.symbol_errors += bits ? 1 : 0;
    t.sq_err[component] += std::norm(xhat - x);
}

}  // namespace

std::string_view estimator_name(std::size_t id) {
    switch (id) {
        case kLmmse: return "lmmse";
        case kCwcuLmmse: return "cwcu-lmmse";
        case kWlmmse: return "wlmmse";
        case kCwcuWlmmse: return "cwcu-wlmmse";
        case kCwcuWlmmseProper: return "cwcu-wlmmse-proper-pdf";
        default: return "?";
    }
}

CMatrix channel_from_taps(std::span<const cplx> taps, std::size_t size) {
    if (taps.empty() || taps.size() > size) throw BadSpec("channel needs 1..size taps");
    std::vector<cplx> diag(size);
    for (std::size_t k = 0; k < size; ++k) {
        cplx acc{};
        for (std::size_t l = 0; l < taps.size(); ++l) {
            const double phase = -2.0 * std::numbers::pi * static_cast<double>((k * l) % size) / static_cast<double>(size);
            acc += taps[l] * std::polar(1.0, phase);
        }
        diag[k] = acc;
    }
    return CMatrix::diagonal(diag);
}

CMatrix gen_channel(const ChannelSpec& spec, std::size_t realization) {
    if (spec.size == 0) throw BadSpec("channel size must be positive");
    switch (spec.kind) {
        case ChannelKind::awgn_identity: return CMatrix::identity(spec.size);
        case ChannelKind::from_file: {
            CMatrix h = load_matrix(spec.path);
            if (h.rows() != spec.size || h.cols() != spec.size)
                throw BadSpec("channel file '" + spec.path.string() + "' is not " + std::to_string(spec.size) + "x" +
                              std::to_string(spec.size));
            return h;
        }
        case ChannelKind::frequency_selective: {
            if (!spec.tap_values.empty()) return channel_from_taps(spec.tap_values, spec.size);
            if (spec.taps == 0 || spec.taps > spec.size) throw BadSpec("tap count must be in 1..size");
            std::vector<double> pdp(spec.taps);
            double total = 0.0;
            for (std::size_t l = 0; l < spec.taps; ++l) {
                pdp[l] = std::pow(10.0, -spec.decay_db_per_tap * static_cast<double>(l) / 10.0);
                total += pdp[l];
            }
            auto rng = make_rng({spec.seed, realization, 0x6368616eULL});
            std::vector<cplx> taps(spec.taps);
            for (std::size_t l = 0; l < spec.taps; ++l) taps[l] = proper_normal(rng, pdp[l] / total);
            return channel_from_taps(taps, spec.size);
        }
    }
    throw BadSpec("unknown channel kind");
}

CMatrix gen_generator(const GeneratorSpec& spec) {
    if (spec.kind == GeneratorKind::from_file) {
        CMatrix g = load_matrix(spec.path);
        if (g.rows() < g.cols() || g.cols() == 0)
            throw BadSpec("generator file '" + spec.path.string() + "' must be tall (m >= n)");
        return g;
    }
    if (spec.cols == 0 || spec.rows < spec.cols) throw BadSpec("generator must be m x n with m >= n >= 1");
    CMatrix g(spec.rows, spec.cols);
    if (spec.kind == GeneratorKind::identity) {
        for (std::size_t i = 0; i < spec.cols; ++i) g(i, i) = 1.0;
        return g;
    }
    auto rng = make_rng({spec.seed, 0x67656e00ULL});
    for (auto& v : g.data()) v = proper_normal(rng, 1.0);
    // modified Gram-Schmidt, two passes
    for (std::size_t j = 0; j < spec.cols; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t p = 0; p < j; ++p) {
                cplx dot{};
                for (std::size_t r = 0; r < spec.rows; ++r) dot += std::conj(g(r, p)) * g(r, j);
                for (std::size_t r = 0; r < spec.rows; ++r) g(r, j) -= dot * g(r, p);
            }
        }
        double norm = 0.0;
        for (std::size_t r = 0; r < spec.rows; ++r) norm += std::norm(g(r, j));
        norm = std::sqrt(norm);
        if (!(norm > 1e-12)) throw BadSpec("random generator draw is rank deficient");
        for (std::size_t r = 0; r < spec.rows; ++r) g(r, j) /= norm;
    }
    return g;
}

double noise_variance(const CMatrix& G, const Constellation& c, double ebn0_db) {
    const double energy_per_bit = std::pow(frobenius_norm(G), 2) * c.variance /
                                  (static_cast<double>(G.cols()) * static_cast<double>(c.bits_per_symbol));
    return energy_per_bit / std::pow(10.0, ebn0_db / 10.0);
}

double propriety_ratio(const CMatrix& cov) {
    if (cov.rows() != 2 || cov.cols() != 2) throw DimensionMismatch("propriety_ratio expects 2x2");
    const double off = std::max(std::abs(cov(0, 1)), std::abs(cov(1, 0)));
    const double diag = std::min(cov(0, 0).real(), cov(1, 1).real());
    if (off == 0.0) return 0.0;
    return off / diag;
}

EstimatorSet build_estimators(const CMatrix& A, const Constellation& c, double noise_var) {
    EstimatorSet s;
    const std::size_t m = A.rows(), n = A.cols();
    s.model = build_model(A, c, noise_var * CMatrix::identity(m));
    s.augmented = augment(s.model);
    s.lmmse = lmmse(s.model);
    s.cwcu_lmmse = cwcu_lmmse(s.model, s.lmmse);
    s.wlmmse = wlmmse(s.augmented);
    s.cwcu_wlmmse = cwcu_wlmmse(s.augmented, s.wlmmse);

    for (std::size_t i = 0; i < n; ++i) {
        s.laws_lmmse.push_back(build_law_linear(s.lmmse, c, i));
        s.laws_cwcu_lmmse.push_back(build_law_linear(s.cwcu_lmmse, c, i));
        s.laws_wlmmse.push_back(build_law_widely(s.wlmmse, c, i));
        s.laws_cwcu_wlmmse.push_back(build_law_widely(s.cwcu_wlmmse, c, i));
        s.laws_cwcu_wlmmse_proper.push_back(build_proper_law_from_widely(s.cwcu_wlmmse, c, i));
        s.propriety_cwcu_wlmmse.push_back(propriety_ratio(s.cwcu_wlmmse.cond_cov[i]));
        s.propriety_wlmmse.push_back(propriety_ratio(s.wlmmse.cond_cov[i]));
    }
    s.bmse[kLmmse] = bmse(s.lmmse.E, s.model);
    s.bmse[kCwcuLmmse] = bmse(s.cwcu_lmmse.E, s.model);
    s.bmse[kWlmmse] = bmse(s.wlmmse.E_aug, s.augmented);
    s.bmse[kCwcuWlmmse] = bmse(s.cwcu_wlmmse.E_aug, s.augmented);
    s.bmse[kCwcuWlmmseProper] = s.bmse[kCwcuWlmmse];
    return s;
}

void EstimatorTally::merge(const EstimatorTally& o) {
    bits += o.bits;
    bit_errors += o.bit_errors;
    symbols += o.symbols;
    symbol_errors += o.symbol_errors;
    if (sq_err.size() < o.sq_err.size()) sq_err.resize(o.sq_err.size(), 0.0);
    for (std::size_t i = 0; i < o.sq_err.size(); ++i) sq_err[i] += o.sq_err[i];
}

void ConditionalMoments::init(std::size_t order, const HistogramSpec& spec) {
    count.assign(order, 0);
    sum.assign(order, {});
    sum_sq_re.assign(order, 0.0);
    sum_sq_im.assign(order, 0.0);
    predicted_sum.assign(order, {});
    bins = spec.bins;
    range = spec.range;
    hist.assign(order, std::vector<std::uint64_t>(bins * bins, 0));
}

void ConditionalMoments::add(std::size_t q, cplx xhat, cplx predicted) {
    ++count[q];
    sum[q] += xhat;
    sum_sq_re[q] += xhat.real() * xhat.real();
    sum_sq_im[q] += xhat.imag() * xhat.imag();
    predicted_sum[q] += predicted;
    if (bins == 0) return;
    const double scale = static_cast<double>(bins) / (2.0 * range);
    const double fr = std::floor((xhat.real() + range) * scale);
    const double fi = std::floor((xhat.imag() + range) * scale);
    const double limit = static_cast<double>(bins);
    if (fr < 0.0 || fi < 0.0 || fr >= limit || fi >= limit) return;
    ++hist[q][static_cast<std::size_t>(fr) * bins + static_cast<std::size_t>(fi)];
}

void ConditionalMoments::merge(const ConditionalMoments& o) {
    for (std::size_t q = 0; q < count.size(); ++q) {
        count[q] += o.count[q];
        sum[q] += o.sum[q];
        sum_sq_re[q] += o.sum_sq_re[q];
        sum_sq_im[q] += o.sum_sq_im[q];
        predicted_sum[q] += o.predicted_sum[q];
        for (std::size_t b = 0; b < hist[q].size(); ++b) hist[q][b] += o.hist[q][b];
    }
}

cplx ConditionalMoments::mean(std::size_t q) const {
    return count[q] ? sum[q] / static_cast<double>(count[q]) : cplx{};
}

cplx ConditionalMoments::predicted_mean(std::size_t q) const {
    return count[q] ? predicted_sum[q] / static_cast<double>(count[q]) : cplx{};
}

cplx ConditionalMoments::standard_error(std::size_t q) const {
    if (count[q] < 2) return {};
    const double nq = static_cast<double>(count[q]);
    const cplx mu = mean(q);
    const double var_re = std::max(0.0, (sum_sq_re[q] - nq * mu.real() * mu.real()) / (nq - 1.0));
    const double var_im = std::max(0.0, (sum_sq_im[q] - nq * mu.imag() * mu.imag()) / (nq - 1.0));
    return {std::sqrt(var_re / nq), std::sqrt(var_im / nq)};
}

double ConditionalMoments::rel_freq(std::size_t q, std::size_t bin_re, std::size_t bin_im) const {
    if (count[q] == 0) return 0.0;
    return static_cast<double>(hist[q][bin_re * bins + bin_im]) / static_cast<double>(count[q]);
}

double ConditionalMoments::bin_center(std::size_t b) const {
    return -range + (static_cast<double>(b) + 0.5) * 2.0 * range / static_cast<double>(bins);
}

void TrialReport::init(std::size_t n, std::size_t order, const HistogramSpec& spec) {
    for (auto& t : tally) t.sq_err.assign(n, 0.0);
    moments_wlmmse.init(order, spec);
    moments_cwcu_wlmmse.init(order, spec);
}

void TrialReport::merge(const TrialReport& o) {
    for (std::size_t e = 0; e < kEstimatorCount; ++e) tally[e].merge(o.tally[e]);
    trials += o.trials;
    max_llr_diff_linear = std::max(max_llr_diff_linear, o.max_llr_diff_linear);
    max_llr_diff_widely = std::max(max_llr_diff_widely, o.max_llr_diff_widely);
    max_llr_diff_shortcut = std::max(max_llr_diff_shortcut, o.max_llr_diff_shortcut);
    sum_llr_diff_linear += o.sum_llr_diff_linear;
    sum_llr_diff_widely += o.sum_llr_diff_widely;
    ml_mismatch_linear += o.ml_mismatch_linear;
    ml_mismatch_widely += o.ml_mismatch_widely;
    moments_wlmmse.merge(o.moments_wlmmse);
    moments_cwcu_wlmmse.merge(o.moments_cwcu_wlmmse);
}

void run_single_trial(const EstimatorSet& set, const Constellation& c, const BitSets& bits, double noise_var,
                      std::uint64_t seed, std::size_t snr_index, std::uint64_t trial_index, TrialReport& out) {
    auto rng = make_rng({seed, snr_index, trial_index});
    const CMatrix& A = set.model.H;
    const std::size_t m = A.rows(), n = A.cols();
    const unsigned k = c.bits_per_symbol;

    std::uniform_int_distribution<std::size_t> pick(0, c.order() - 1);
    std::vector<std::size_t> sent(n);
    CVector x(n);
    for (std::size_t j = 0; j < n; ++j) {
        sent[j] = pick(rng);
        x[j] = c.symbols[sent[j]];
    }
    CVector y = A * x;
    for (std::size_t r = 0; r < m; ++r) y[r] += proper_normal(rng, noise_var);

    const CVector x_l = set.lmmse.estimate(y);
    const CVector x_cl = set.cwcu_lmmse.estimate(y);
    const CVector x_wl = set.wlmmse.estimate(y);
    const CVector x_cwl = set.cwcu_wlmmse.estimate(y);

    double trial_diff_linear = 0.0, trial_diff_widely = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const std::uint32_t truth = c.labels[sent[j]];
        const LlrVector l_l = llr_proper(x_l[j], set.laws_lmmse[j], bits);
        const LlrVector l_cl = llr_proper(x_cl[j], set.laws_cwcu_lmmse[j], bits);
        const LlrVector l_wl = llr_general(x_wl[j], set.laws_wlmmse[j], bits);
        const LlrVector l_cwl = llr_general(x_cwl[j], set.laws_cwcu_wlmmse[j], bits);
        const LlrVector l_cwp = llr_proper(x_cwl[j], set.laws_cwcu_wlmmse_proper[j], bits);

        tally_decision(out.tally[kLmmse], j, decide_label(l_l), truth, x_l[j], x[j]);
        tally_decision(out.tally[kCwcuLmmse], j, decide_label(l_cl), truth, x_cl[j], x[j]);
        tally_decision(out.tally[kWlmmse], j, decide_label(l_wl), truth, x_wl[j], x[j]);
        tally_decision(out.tally[kCwcuWlmmse], j, decide_label(l_cwl), truth, x_cwl[j], x[j]);
        tally_decision(out.tally[kCwcuWlmmseProper], j, decide_label(l_cwp), truth, x_cwl[j], x[j]);

        accumulate_llr_diff(l_l.raw, l_cl.raw, trial_diff_linear);
        accumulate_llr_diff(l_wl.raw, l_cwl.raw, trial_diff_widely);
        accumulate_llr_diff(l_cwl.raw, l_cwp.raw, out.max_llr_diff_shortcut);
        if (ml_symbol(l_l) != ml_symbol(l_cl)) ++out.ml_mismatch_linear;
        if (ml_symbol(l_wl) != ml_symbol(l_cwl)) ++out.ml_mismatch_widely;

        out.moments_wlmmse.add(sent[j], x_wl[j], set.laws_wlmmse[j].means()[sent[j]][0]);
        out.moments_cwcu_wlmmse.add(sent[j], x_cwl[j], set.laws_cwcu_wlmmse[j].means()[sent[j]][0]);
    }
    for (auto& t : out.tally) {
        t.bits += static_cast<std::uint64_t>(n) * k;
        t.symbols += n;
    }
    ++out.trials;
    out.max_llr_diff_linear = std::max(out.max_llr_diff_linear, trial_diff_linear);
    out.max_llr_diff_widely = std::max(out.max_llr_diff_widely, trial_diff_widely);
    out.sum_llr_diff_linear += trial_diff_linear;
    out.sum_llr_diff_widely += trial_diff_widely;
}

RunReport run_trials(const SimConfig& cfg, const RunOptions& opts) {
    RunReport report;
    report.config = cfg;
    report.constellation = resolve_constellation(cfg);
    const Constellation& c = report.constellation;
    const BitSets bits = bit_sets(c);

    const CMatrix G = gen_generator(cfg.generator);
    if (cfg.channel.size != G.rows())
        throw BadSpec("channel size " + std::to_string(cfg.channel.size) + " does not match generator rows " +
                      std::to_string(G.rows()));
    const std::size_t realizations = std::max<std::size_t>(1, cfg.channel.realizations);
    std::vector<CMatrix> combined(realizations);
    for (std::size_t r = 0; r < realizations; ++r) combined[r] = gen_channel(cfg.channel, r) * G;
    report.m = G.rows();
    report.n = G.cols();
    const std::size_t n = report.n;

    for (std::size_t s = 0; s < cfg.ebn0_db.size(); ++s) {
        SnrPointReport point;
        point.ebn0_db = cfg.ebn0_db[s];
        point.noise_variance = noise_variance(G, c, point.ebn0_db);
        point.totals.init(n, c.order(), cfg.histogram);

        std::vector<EstimatorSet> sets(realizations);
        parallel_for(realizations, opts.jobs, [&](std::size_t r) {
            try {
                sets[r] = build_estimators(combined[r], c, point.noise_variance);
            } catch (const DegenerateComponent& e) {
                throw DegenerateComponent(e.component(), "Eb/N0 " + std::to_string(point.ebn0_db) + " dB, realization " +
                                                             std::to_string(r) + ": " + e.what());
            }
        });

        for (std::size_t e = 0; e < kEstimatorCount; ++e) point.bmse_analytic[e].assign(n, 0.0);
        for (const auto& set : sets) {
            for (std::size_t e = 0; e < kEstimatorCount; ++e)
                for (std::size_t i = 0; i < n; ++i) point.bmse_analytic[e][i] += set.bmse[e][i] / static_cast<double>(realizations);
            point.propriety_cwcu_wlmmse.insert(point.propriety_cwcu_wlmmse.end(), set.propriety_cwcu_wlmmse.begin(),
                                               set.propriety_cwcu_wlmmse.end());
            point.propriety_wlmmse.insert(point.propriety_wlmmse.end(), set.propriety_wlmmse.begin(),
                                          set.propriety_wlmmse.end());
        }

        if (!opts.dry_run && cfg.trials > 0) {
            const std::size_t chunks_per_realization = (cfg.trials + kChunk - 1) / kChunk;
            const std::size_t units = realizations * chunks_per_realization;
            std::vector<TrialReport> partial(units);
            parallel_for(units, opts.jobs, [&](std::size_t u) {
                const std::size_t r = u / chunks_per_realization;
                const std::size_t first = (u % chunks_per_realization) * kChunk;
                const std::size_t last = std::min(cfg.trials, first + kChunk);
                TrialReport& part = partial[u];
                part.init(n, c.order(), cfg.histogram);
                for (std::size_t t = first; t < last; ++t)
                    run_single_trial(sets[r], c, bits, point.noise_variance, cfg.seed, s, r * cfg.trials + t, part);
            });
            for (const auto& part : partial) point.totals.merge(part);
        }
        report.points.push_back(std::move(point));
    }
    return report;
}

std::vector<std::array<ConditionalMoments, 2>> histogram_estimates(const SimConfig& cfg, std::size_t bins,
                                                                   const RunOptions& opts) {
    SimConfig with_bins = cfg;
    with_bins.histogram.bins = bins;
    const RunReport r = run_trials(with_bins, opts);
    std::vector<std::array<ConditionalMoments, 2>> out;
    for (const auto& p : r.points) out.push_back({p.totals.moments_wlmmse, p.totals.moments_cwcu_wlmmse});
    return out;
}

}  // namespace cwcu
