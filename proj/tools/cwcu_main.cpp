#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cwcu/io.hpp"
#include "cwcu/simulator.hpp"

namespace {

using namespace cwcu;
using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitDiscrepancy = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr double kLlrTripwire = 1e-6;

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

int fail(int code, std::string_view kind, const std::string& message, std::optional<std::size_t> component = {}) {
    json err = {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
    if (component) err["error"]["component"] = *component;
    std::cerr << err.dump() << '\n';
    return code;
}

SimConfig load_config(const fs::path& path) {
    return config_from_json(read_json_file(path), path.parent_path());
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string config;
    std::string out;
    std::size_t jobs = 1;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    bool dry_run = false;
};

void print_summary(const RunReport& r) {
    std::printf("%-10s %-22s %12s %14s %14s\n", "ebn0_db", "estimator", "bit_errors", "ber", "bmse");
    for (const auto& p : r.points) {
        for (std::size_t e = 0; e < kEstimatorCount; ++e) {
            const auto& t = p.totals.tally[e];
            const double ber = t.bits ? static_cast<double>(t.bit_errors) / static_cast<double>(t.bits) : 0.0;
            double bmse = 0.0;
            for (double v : p.bmse_analytic[e]) bmse += v;
            bmse /= std::max<std::size_t>(1, p.bmse_analytic[e].size());
            std::printf("%-10g %-22s %12llu %14.6e %14.6e\n", p.ebn0_db, std::string(estimator_name(e)).c_str(),
                        static_cast<unsigned long long>(t.bit_errors), ber, bmse);
        }
        std::printf("%-10g llr max diff: linear %.3e, widely %.3e, proper shortcut %.3e\n", p.ebn0_db,
                    p.totals.max_llr_diff_linear, p.totals.max_llr_diff_widely, p.totals.max_llr_diff_shortcut);
    }
}

int run_simulate(const SimulateArgs& a) {
    SimConfig cfg = load_config(a.config);
    if (a.seed) cfg.seed = *a.seed;
    if (a.trials) cfg.trials = *a.trials;
    if (!a.out.empty()) cfg.output_dir = a.out;
    const RunReport r = run_trials(cfg, {std::max<std::size_t>(1, a.jobs), a.dry_run});
    write_report(r, cfg.output_dir, utc_timestamp());
    print_summary(r);
    std::printf("wrote %s\n", cfg.output_dir.string().c_str());
    return 0;
}

// ---- llr-check --------------------------------------------------------------

struct LlrCheckArgs {
    std::size_t models = 200;
    std::size_t observations = 100;
    std::uint64_t seed = 1;
    std::string constellation = "qpsk";
    std::size_t max_m = 8;
    std::size_t max_n = 6;
    std::string dump;
};

cplx draw_normal(std::mt19937_64& rng, double variance) {
    std::normal_distribution<double> nd(0.0, std::sqrt(variance / 2.0));
    const double re = nd(rng);
    return {re, nd(rng)};
}

LinearModel random_model(std::mt19937_64& rng, const Constellation& c, std::size_t max_m, std::size_t max_n) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, max_n)(rng);
    const std::size_t m = std::uniform_int_distribution<std::size_t>(n, std::max(n, max_m))(rng);
    const double scale = std::pow(10.0, -std::uniform_real_distribution<double>(0.0, 20.0)(rng) / 10.0);
    CMatrix H(m, n), M(m, m);
    for (auto& v : H.data()) v = draw_normal(rng, 1.0);
    for (auto& v : M.data()) v = draw_normal(rng, 1.0);
    CMatrix cnn = M * hermitian(M);
    cnn *= 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < m; ++k) cnn(k, k) += 0.5;
    cnn *= scale;
    return build_model(H, c, cnn);
}

int run_llr_check(const LlrCheckArgs& a) {
    if (a.max_n == 0 || a.max_m < a.max_n) throw ConfigError("llr-check: need max-m >= max-n >= 1");
    const Constellation c = make_constellation(a.constellation);
    const BitSets bits = bit_sets(c);
    std::seed_seq seq{static_cast<std::uint32_t>(a.seed), static_cast<std::uint32_t>(a.seed >> 32)};
    std::mt19937_64 rng(seq);

    std::ofstream dump;
    if (!a.dump.empty()) {
        dump.open(a.dump);
        if (!dump) throw ConfigError("cannot write '" + a.dump + "'");
        write_llr_dump_header(dump);
    }

    double max_linear = 0.0, max_widely = 0.0;
    const bool dump_linear = c.is_proper();
    for (std::size_t k = 0; k < a.models; ++k) {
        const LinearModel model = random_model(rng, c, a.max_m, a.max_n);
        const AugmentedModel am = augment(model);
        const LinearEstimatorBank l = lmmse(model);
        const LinearEstimatorBank cl = cwcu_lmmse(model, l);
        const WidelyEstimatorBank wl = wlmmse(am);
        const WidelyEstimatorBank cw = cwcu_wlmmse(am, wl);
        std::vector<ProperLaw> law_l, law_cl;
        std::vector<AugmentedLaw> law_wl, law_cw;
        for (std::size_t i = 0; i < model.n(); ++i) {
            law_l.push_back(build_law_linear(l, c, i));
            law_cl.push_back(build_law_linear(cl, c, i));
            law_wl.push_back(build_law_widely(wl, c, i));
            law_cw.push_back(build_law_widely(cw, c, i));
        }
        const CMatrix chol = cholesky(model.Cnn);
        std::uniform_int_distribution<std::size_t> pick(0, c.order() - 1);
        for (std::size_t t = 0; t < a.observations; ++t) {
            CVector x(model.n());
            for (auto& v : x) v = c.symbols[pick(rng)];
            CVector y = model.H * x;
            CVector w(model.m());
            for (auto& v : w) v = draw_normal(rng, 1.0);
            const CVector noise = chol * w;
            for (std::size_t r = 0; r < y.size(); ++r) y[r] += noise[r];

            const CVector xl = l.estimate(y), xcl = cl.estimate(y), xwl = wl.estimate(y), xcw = cw.estimate(y);
            std::vector<LlrVector> a_l, b_l, a_w, b_w;
            for (std::size_t i = 0; i < model.n(); ++i) {
                a_l.push_back(llr_proper(xl[i], law_l[i], bits));
                b_l.push_back(llr_proper(xcl[i], law_cl[i], bits));
                a_w.push_back(llr_general(xwl[i], law_wl[i], bits));
                b_w.push_back(llr_general(xcw[i], law_cw[i], bits));
            }
            for (double d : llr_equality_report(a_l, b_l)) max_linear = std::max(max_linear, d);
            for (double d : llr_equality_report(a_w, b_w)) max_widely = std::max(max_widely, d);
            if (dump.is_open())
                for (std::size_t i = 0; i < model.n(); ++i)
                    write_llr_dump_rows(dump, k * a.observations + t, i, dump_linear ? a_l[i] : a_w[i],
                                        dump_linear ? b_l[i] : b_w[i]);
        }
    }

    // The linear pair is only an equality claim when the alphabet is proper.
    const double worst = dump_linear ? std::max(max_linear, max_widely) : max_widely;
    const json out = {{"constellation", c.name},
                      {"models", a.models},
                      {"observations", a.observations},
                      {"seed", a.seed},
                      {"max_llr_diff_linear", max_linear},
                      {"max_llr_diff_widely", max_widely},
                      {"linear_pair_checked", dump_linear},
                      {"threshold", kLlrTripwire},
                      {"pass", worst <= kLlrTripwire}};
    std::cout << out.dump(2) << '\n';
    return worst <= kLlrTripwire ? 0 : kExitDiscrepancy;
}

// ---- histogram --------------------------------------------------------------

struct HistogramArgs {
    std::string config;
    std::size_t bins = 41;
    std::optional<double> range;
    std::string out;
    std::size_t jobs = 1;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
};

int run_histogram(const HistogramArgs& a) {
    if (a.bins == 0) throw ConfigError("histogram: --bins must be positive");
    SimConfig cfg = load_config(a.config);
    cfg.histogram.bins = a.bins;
    if (a.range) {
        if (!(*a.range > 0.0)) throw ConfigError("histogram: --range must be positive");
        cfg.histogram.range = *a.range;
    }
    if (a.seed) cfg.seed = *a.seed;
    if (a.trials) cfg.trials = *a.trials;
    const RunReport r = run_trials(cfg, {std::max<std::size_t>(1, a.jobs), false});
    if (a.out.empty() || a.out == "-") {
        write_histogram_csv(std::cout, r);
        return 0;
    }
    std::ofstream os(a.out);
    if (!os) throw ConfigError("cannot write '" + a.out + "'");
    write_histogram_csv(os, r);
    return 0;
}

// ---- inspect ----------------------------------------------------------------

json describe(const std::string& path, const json& j) {
    json out;
    if (j.is_object() && j.contains("symbols")) {
        const Constellation c = constellation_from_json(j);
        const double ratio = std::abs(c.pseudo_variance) / c.variance;
        out = {{"file", path},
               {"type", "constellation"},
               {"name", c.name},
               {"order", c.order()},
               {"bits_per_symbol", c.bits_per_symbol},
               {"variance", c.variance},
               {"pseudo_variance_re", c.pseudo_variance.real()},
               {"pseudo_variance_im", c.pseudo_variance.imag()},
               {"propriety_ratio", ratio},
               {"proper", c.is_proper()}};
    } else {
        const CMatrix m = matrix_from_json(j);
        out = {{"file", path},
               {"type", "matrix"},
               {"rows", m.rows()},
               {"cols", m.cols()},
               {"finite", all_finite(m)},
               {"frobenius_norm", frobenius_norm(m)}};
        if (m.is_square()) {
            const bool herm = is_hermitian(m, 1e-12 * std::max(1.0, frobenius_norm(m)));
            bool pd = false;
            if (herm && m.rows() > 0) {
                try {
                    (void)cholesky(m);
                    pd = true;
                } catch (const NotHPD&) {
                }
            }
            out["hermitian"] = herm;
            out["positive_definite"] = pd;
        }
        if (m.rows() >= m.cols() && m.cols() > 0)
            out["orthonormal_columns"] = max_abs_diff(hermitian(m) * m, CMatrix::identity(m.cols())) < 1e-10;
    }
    return out;
}

int run_inspect(const std::string& path) {
    const json j = read_json_file(path);
    json out;
    try {
        out = describe(path, j);
    } catch (const ConfigError& e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
    std::cout << out.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Linear and widely linear MMSE / CWCU estimation, LLRs and Monte Carlo simulation"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo simulation from a JSON config");
    simulate->add_option("-c,--config", sim.config, "Config file")->required();
    simulate->add_option("-o,--out", sim.out, "Output directory (overrides the config)");
    simulate->add_option("-j,--jobs", sim.jobs, "Worker threads; results do not depend on it")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", sim.seed, "Master seed for symbols and noise (overrides the config)");
    simulate->add_option("--trials", sim.trials, "Trials per SNR point and realization (overrides the config)");
    simulate->add_flag("--dry-run", sim.dry_run, "Validate the config and build estimators, run no trials");

    LlrCheckArgs chk;
    auto* llr_check = app.add_subcommand("llr-check", "Compare LLRs of each estimator pair on random models");
    llr_check->add_option("--models", chk.models, "Number of random models");
    llr_check->add_option("--observations", chk.observations, "Observations per model");
    llr_check->add_option("--seed", chk.seed, "Seed");
    llr_check->add_option("--constellation", chk.constellation, "qpsk, 16qam or 8qam-rect")
        ->check(CLI::IsMember({"qpsk", "16qam", "8qam-rect"}));
    llr_check->add_option("--max-m", chk.max_m, "Largest observation dimension");
    llr_check->add_option("--max-n", chk.max_n, "Largest parameter dimension");
    llr_check->add_option("--dump", chk.dump, "Write per-bit LLR pairs to this CSV file");

    HistogramArgs hist;
    auto* histogram = app.add_subcommand("histogram", "Per-symbol 2-D histograms of WLMMSE and CWCU WLMMSE estimates");
    histogram->add_option("-c,--config", hist.config, "Config file")->required();
    histogram->add_option("--bins", hist.bins, "Bins per axis");
    histogram->add_option("--range", hist.range, "Bins cover [-range, range] on each axis");
    histogram->add_option("-o,--out", hist.out, "CSV output file (default stdout)");
    histogram->add_option("-j,--jobs", hist.jobs, "Worker threads")->check(CLI::PositiveNumber);
    histogram->add_option("--seed", hist.seed, "Master seed (overrides the config)");
    histogram->add_option("--trials", hist.trials, "Trials (overrides the config)");

    std::string inspect_path;
    auto* inspect = app.add_subcommand("inspect", "Describe a matrix or constellation JSON file");
    inspect->add_option("file", inspect_path, "JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(kExitConfig, "usage", e.what());
    }

    try {
        if (*simulate) return run_simulate(sim);
        if (*llr_check) return run_llr_check(chk);
        if (*histogram) return run_histogram(hist);
        if (*inspect) return run_inspect(inspect_path);
    } catch (const DegenerateComponent& e) {
        return fail(kExitNumerical, "degenerate_component", e.what(), e.component());
    } catch (const NotHPD& e) {
        return fail(kExitNumerical, "not_hpd", e.what());
    } catch (const Singular& e) {
        return fail(kExitNumerical, "singular", e.what());
    } catch (const ConfigError& e) {
        return fail(kExitConfig, "config", e.what());
    } catch (const BadSpec& e) {
        return fail(kExitConfig, "config", e.what());
    } catch (const ModelError& e) {
        return fail(kExitConfig, "model", e.what());
    } catch (const DimensionMismatch& e) {
        return fail(kExitConfig, "dimension", e.what());
    } catch (const Error& e) {
        return fail(kExitNumerical, "numerical", e.what());
    } catch (const std::exception& e) {
        return fail(1, "internal", e.what());
    }
    return 0;
}
