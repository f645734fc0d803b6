#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cwcu/constellation.hpp"
#include "cwcu/linalg.hpp"
#include "cwcu/linear_estimators.hpp"
#include "cwcu/llr.hpp"
#include "cwcu/model.hpp"
#include "cwcu/widely_estimators.hpp"

namespace cwcu {

enum class ChannelKind { awgn_identity, frequency_selective, from_file };
enum class GeneratorKind { identity, random_semi_unitary, from_file };

struct ChannelSpec {
    ChannelKind kind = ChannelKind::awgn_identity;
    std::size_t size = 52;
    std::size_t taps = 16;
    double decay_db_per_tap = 3.0;
    std::uint64_t seed = 1;
    /// Fixed time-domain taps; replaces the random draw when non-empty.
    std::vector<cplx> tap_values;
    std::filesystem::path path;
    /// Independent channel draws per SNR point (seed, realization).
    std::size_t realizations = 1;
};

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::random_semi_unitary;
    std::size_t rows = 52;
    std::size_t cols = 36;
    std::uint64_t seed = 1;
    std::filesystem::path path;
};

struct HistogramSpec {
    std::size_t bins = 0;  // 0 disables binning; conditional moments are always kept
    double range = 2.0;    // bins span [-range, range] on both axes
};

struct SimConfig {
    std::string constellation = "8qam-rect";
    std::filesystem::path constellation_file;  // overrides `constellation` when set
    ChannelSpec channel;
    GeneratorSpec generator;
    std::vector<double> ebn0_db{10.0};
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    HistogramSpec histogram;
    std::filesystem::path output_dir = "out";
};

/// Throws ConfigError with a field path on invalid input. Relative file paths
/// resolve against `base_dir`.
SimConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json config_to_json(const SimConfig& cfg);
Constellation resolve_constellation(const SimConfig& cfg);

/// Diagonal channel; frequency-selective entries are the m-point DFT of
/// exponentially decaying i.i.d. proper Gaussian taps with unit total power.
CMatrix gen_channel(const ChannelSpec& spec, std::size_t realization = 0);
CMatrix channel_from_taps(std::span<const cplx> taps, std::size_t size);
/// identity -> [I; 0]; random-semi-unitary -> orthonormalized Gaussian columns.
CMatrix gen_generator(const GeneratorSpec& spec);

/// sigma^2 = ||G||_F^2 variance / (n k) / 10^(EbN0/10)
double noise_variance(const CMatrix& G, const Constellation& c, double ebn0_db);

/// |offdiag| / min(diag) of a 2x2 augmented covariance.
double propriety_ratio(const CMatrix& cov);
inline constexpr double kPracticallyProper = 1e-3;

enum EstimatorId : std::size_t { kLmmse = 0, kCwcuLmmse, kWlmmse, kCwcuWlmmse, kCwcuWlmmseProper, kEstimatorCount };
std::string_view estimator_name(std::size_t id);

/// Everything built once per channel realization and SNR point.
struct EstimatorSet {
    LinearModel model;
    AugmentedModel augmented;
    LinearEstimatorBank lmmse;
    LinearEstimatorBank cwcu_lmmse;
    WidelyEstimatorBank wlmmse;
    WidelyEstimatorBank cwcu_wlmmse;
    std::vector<ProperLaw> laws_lmmse, laws_cwcu_lmmse, laws_cwcu_wlmmse_proper;
    std::vector<AugmentedLaw> laws_wlmmse, laws_cwcu_wlmmse;
    std::array<std::vector<double>, kEstimatorCount> bmse;
    std::vector<double> propriety_cwcu_wlmmse, propriety_wlmmse;
};

EstimatorSet build_estimators(const CMatrix& A, const Constellation& c, double noise_var);

struct EstimatorTally {
    std::uint64_t bits = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t symbols = 0;
    std::uint64_t symbol_errors = 0;
    std::vector<double> sq_err;  // per component

    void merge(const EstimatorTally& o);
};

/// Estimates of one estimator conditioned on each transmit symbol.
struct ConditionalMoments {
    std::vector<std::uint64_t> count;
    std::vector<cplx> sum;
    std::vector<double> sum_sq_re, sum_sq_im;
    std::vector<cplx> predicted_sum;  // sum of alpha-mapped means
    std::size_t bins = 0;
    double range = 0.0;
    std::vector<std::vector<std::uint64_t>> hist;  // per symbol, bins*bins, index re*bins + im

    void init(std::size_t order, const HistogramSpec& spec);
    void add(std::size_t q, cplx xhat, cplx predicted);
    void merge(const ConditionalMoments& o);
    cplx mean(std::size_t q) const;
    cplx predicted_mean(std::size_t q) const;
    /// Standard error of the mean, per axis.
    cplx standard_error(std::size_t q) const;
    double rel_freq(std::size_t q, std::size_t bin_re, std::size_t bin_im) const;
    double bin_center(std::size_t b) const;
};

/// Sums over a block of trials. Merging is order-sensitive only through
/// floating-point addition, so blocks are always merged in index order.
struct TrialReport {
    std::array<EstimatorTally, kEstimatorCount> tally;
    std::uint64_t trials = 0;
    double max_llr_diff_linear = 0.0;    // lmmse vs cwcu-lmmse
    double max_llr_diff_widely = 0.0;    // wlmmse vs cwcu-wlmmse
    double max_llr_diff_shortcut = 0.0;  // cwcu-wlmmse proper vs general engine
    double sum_llr_diff_linear = 0.0;
    double sum_llr_diff_widely = 0.0;
    std::uint64_t ml_mismatch_linear = 0;
    std::uint64_t ml_mismatch_widely = 0;
    ConditionalMoments moments_wlmmse, moments_cwcu_wlmmse;

    void init(std::size_t n, std::size_t order, const HistogramSpec& spec);
    void merge(const TrialReport& o);
};

struct SnrPointReport {
    double ebn0_db = 0.0;
    double noise_variance = 0.0;
    TrialReport totals;
    std::array<std::vector<double>, kEstimatorCount> bmse_analytic;  // mean over realizations
    std::vector<double> propriety_cwcu_wlmmse;  // realization-major, n per realization
    std::vector<double> propriety_wlmmse;
};

struct RunReport {
    SimConfig config;
    Constellation constellation;
    std::size_t n = 0, m = 0;
    std::vector<SnrPointReport> points;
};

struct RunOptions {
    std::size_t jobs = 1;
    bool dry_run = false;  // build estimators for every SNR point, run no trials
};

/// One trial: symbols, noise, all estimators, LLRs, accumulation into `out`.
void run_single_trial(const EstimatorSet& set, const Constellation& c, const BitSets& bits, double noise_var,
                      std::uint64_t seed, std::size_t snr_index, std::uint64_t trial_index, TrialReport& out);

RunReport run_trials(const SimConfig& cfg, const RunOptions& opts = {});

/// Per SNR point: per-symbol conditional histograms of the
/// (wlmmse, cwcu-wlmmse) estimates over a bins x bins grid.
std::vector<std::array<ConditionalMoments, 2>> histogram_estimates(const SimConfig& cfg, std::size_t bins,
                                                                   const RunOptions& opts = {});

nlohmann::json report_to_json(const RunReport& r, std::string_view timestamp);
void write_report(const RunReport& r, const std::filesystem::path& dir, std::string_view timestamp);
/// CSV writers; `os` receives a '#' comment line, a header row and data rows.
void write_ber_csv(std::ostream& os, const RunReport& r);
void write_bmse_csv(std::ostream& os, const RunReport& r);
void write_propriety_csv(std::ostream& os, const RunReport& r);
void write_histogram_csv(std::ostream& os, const RunReport& r);

}  // namespace cwcu
