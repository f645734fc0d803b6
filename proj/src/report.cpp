#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>

#include "cwcu/format.hpp"
#include "cwcu/io.hpp"
#include "cwcu/simulator.hpp"

namespace cwcu {

using nlohmann::json;

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
    return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> empirical_bmse(const EstimatorTally& t, std::uint64_t trials) {
    std::vector<double> out(t.sq_err.size(), 0.0);
    if (trials == 0) return out;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = t.sq_err[i] / static_cast<double>(trials);
    return out;
}

json propriety_summary(const std::vector<double>& ratios) {
    const double mx = ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
    const auto proper = std::count_if(ratios.begin(), ratios.end(), [](double r) { return r < kPracticallyProper; });
    return {{"max", mx}, {"mean", mean_of(ratios)}, {"count", ratios.size()}, {"practically_proper", proper}};
}

json moments_json(const ConditionalMoments& mo, const Constellation& c) {
    json arr = json::array();
    for (std::size_t q = 0; q < mo.count.size(); ++q) {
        const cplx mu = mo.mean(q), se = mo.standard_error(q), pred = mo.predicted_mean(q);
        arr.push_back({{"symbol", q},
                       {"label", c.label_string(q)},
                       {"count", mo.count[q]},
                       {"mean_re", mu.real()},
                       {"mean_im", mu.imag()},
                       {"se_re", se.real()},
                       {"se_im", se.imag()},
                       {"predicted_re", pred.real()},
                       {"predicted_im", pred.imag()}});
    }
    return arr;
}

void write_file(const std::filesystem::path& path, void (*writer)(std::ostream&, const RunReport&), const RunReport& r) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    writer(out, r);
}

}  // namespace

json report_to_json(const RunReport& r, std::string_view timestamp) {
    json constellation = constellation_to_json(r.constellation);
    constellation["variance"] = r.constellation.variance;
    constellation["pseudo_variance_re"] = r.constellation.pseudo_variance.real();
    constellation["pseudo_variance_im"] = r.constellation.pseudo_variance.imag();

    json points = json::array();
    for (const auto& p : r.points) {
        const TrialReport& t = p.totals;
        json estimators = json::object();
        for (std::size_t e = 0; e < kEstimatorCount; ++e) {
            const EstimatorTally& et = t.tally[e];
            estimators[std::string(estimator_name(e))] = {
                {"bits", et.bits},
                {"bit_errors", et.bit_errors},
                {"ber", ratio(et.bit_errors, et.bits)},
                {"symbols", et.symbols},
                {"symbol_errors", et.symbol_errors},
                {"ser", ratio(et.symbol_errors, et.symbols)},
                {"bmse_analytic_mean", mean_of(p.bmse_analytic[e])},
                {"bmse_empirical_mean", mean_of(empirical_bmse(et, t.trials))}};
        }
        const double trials = std::max<double>(1.0, static_cast<double>(t.trials));
        points.push_back(
            {{"ebn0_db", p.ebn0_db},
             {"noise_variance", p.noise_variance},
             {"trials", t.trials},
             {"estimators", std::move(estimators)},
             {"llr_discrepancy",
              {{"lmmse_vs_cwcu_lmmse_max", t.max_llr_diff_linear},
               {"lmmse_vs_cwcu_lmmse_mean", t.sum_llr_diff_linear / trials},
               {"wlmmse_vs_cwcu_wlmmse_max", t.max_llr_diff_widely},
               {"wlmmse_vs_cwcu_wlmmse_mean", t.sum_llr_diff_widely / trials},
               {"cwcu_wlmmse_proper_vs_general_max", t.max_llr_diff_shortcut}}},
             {"ml_decision_mismatches", {{"linear", t.ml_mismatch_linear}, {"widely", t.ml_mismatch_widely}}},
             {"propriety",
              {{"cwcu-wlmmse", propriety_summary(p.propriety_cwcu_wlmmse)},
               {"wlmmse", propriety_summary(p.propriety_wlmmse)}}},
             {"conditional_moments",
              {{"wlmmse", moments_json(t.moments_wlmmse, r.constellation)},
               {"cwcu-wlmmse", moments_json(t.moments_cwcu_wlmmse, r.constellation)}}}});
    }

    return {{"generated_at", std::string(timestamp)},
            {"config", config_to_json(r.config)},
            {"constellation", std::move(constellation)},
            {"dimensions", {{"m", r.m}, {"n", r.n}}},
            {"conventions",
             {{"noise_variance", "sigma^2 = ||G||_F^2 * variance / (n * bits_per_symbol) / 10^(EbN0_dB/10)"},
              {"llr_clamp", kLlrClamp},
              {"llr_discrepancy", "max |LLR_A - LLR_B| over bits and components, before clamping"},
              {"bit_decision", "bit = 1 when LLR > 0"},
              {"propriety_ratio", "|offdiag| / min(diag) of the augmented conditional covariance"},
              {"practically_proper_threshold", kPracticallyProper}}},
            {"points", std::move(points)}};
}

void write_ber_csv(std::ostream& os, const RunReport& r) {
    os << "# bit/symbol error counts from LLR-sign decisions; bmse_* are means over components\n";
    os << "ebn0_db,estimator,bits,bit_errors,ber,symbols,symbol_errors,ser,bmse_analytic,bmse_empirical\n";
    for (const auto& p : r.points) {
        for (std::size_t e = 0; e < kEstimatorCount; ++e) {
            const EstimatorTally& t = p.totals.tally[e];
            os << fmt_num(p.ebn0_db) << ',' << estimator_name(e) << ',' << t.bits << ',' << t.bit_errors << ','
               << fmt_num(ratio(t.bit_errors, t.bits)) << ',' << t.symbols << ',' << t.symbol_errors << ','
               << fmt_num(ratio(t.symbol_errors, t.symbols)) << ',' << fmt_num(mean_of(p.bmse_analytic[e])) << ','
               << fmt_num(mean_of(empirical_bmse(t, p.totals.trials))) << '\n';
        }
    }
}

void write_bmse_csv(std::ostream& os, const RunReport& r) {
    os << "# per-component Bayesian MSE: closed form (mean over channel realizations) and Monte Carlo estimate\n";
    os << "ebn0_db,estimator,component,bmse_analytic,bmse_empirical\n";
    for (const auto& p : r.points) {
        for (std::size_t e = 0; e < kEstimatorCount; ++e) {
            const auto emp = empirical_bmse(p.totals.tally[e], p.totals.trials);
            for (std::size_t i = 0; i < p.bmse_analytic[e].size(); ++i)
                os << fmt_num(p.ebn0_db) << ',' << estimator_name(e) << ',' << i << ','
                   << fmt_num(p.bmse_analytic[e][i]) << ',' << fmt_num(emp[i]) << '\n';
        }
    }
}

void write_propriety_csv(std::ostream& os, const RunReport& r) {
    os << "# |offdiag|/min(diag) of the augmented conditional covariance per component\n";
    os << "ebn0_db,realization,component,ratio_cwcu_wlmmse,ratio_wlmmse\n";
    for (const auto& p : r.points) {
        for (std::size_t k = 0; k < p.propriety_cwcu_wlmmse.size(); ++k)
            os << fmt_num(p.ebn0_db) << ',' << k / r.n << ',' << k % r.n << ',' << fmt_num(p.propriety_cwcu_wlmmse[k])
               << ',' << fmt_num(p.propriety_wlmmse[k]) << '\n';
    }
}

void write_histogram_csv(std::ostream& os, const RunReport& r) {
    os << "# relative frequency of estimates per transmit symbol; bins index [-range, range] on each axis\n";
    os << "ebn0_db,estimator,symbol,label,bin_re,bin_im,center_re,center_im,rel_freq\n";
    for (const auto& p : r.points) {
        const std::array<std::pair<const char*, const ConditionalMoments*>, 2> sets{
            {{"wlmmse", &p.totals.moments_wlmmse}, {"cwcu-wlmmse", &p.totals.moments_cwcu_wlmmse}}};
        for (const auto& [name, mo] : sets) {
            for (std::size_t q = 0; q < mo->count.size(); ++q)
                for (std::size_t br = 0; br < mo->bins; ++br)
                    for (std::size_t bi = 0; bi < mo->bins; ++bi)
                        os << fmt_num(p.ebn0_db) << ',' << name << ',' << q << ',' << r.constellation.label_string(q)
                           << ',' << br << ',' << bi << ',' << fmt_num(mo->bin_center(br)) << ','
                           << fmt_num(mo->bin_center(bi)) << ',' << fmt_num(mo->rel_freq(q, br, bi)) << '\n';
        }
    }
}

void write_report(const RunReport& r, const std::filesystem::path& dir, std::string_view timestamp) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
    write_json_file(dir / "report.json", report_to_json(r, timestamp));
    write_file(dir / "ber.csv", write_ber_csv, r);
    write_file(dir / "bmse.csv", write_bmse_csv, r);
    write_file(dir / "propriety.csv", write_propriety_csv, r);
    if (r.config.histogram.bins > 0) write_file(dir / "histogram.csv", write_histogram_csv, r);
}

}  // namespace cwcu
