#include <set>
#include <string>

#include "cwcu/io.hpp"
#include "cwcu/simulator.hpp"

namespace cwcu {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <class T>
T field(const json& obj, const std::string& where, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

ChannelKind channel_kind(const std::string& s) {
    if (s == "awgn-identity") return ChannelKind::awgn_identity;
    if (s == "frequency-selective") return ChannelKind::frequency_selective;
    if (s == "from-file") return ChannelKind::from_file;
    throw ConfigError("channel.kind: unknown kind '" + s + "'");
}

GeneratorKind generator_kind(const std::string& s) {
    if (s == "identity") return GeneratorKind::identity;
    if (s == "random-semi-unitary") return GeneratorKind::random_semi_unitary;
    if (s == "from-file") return GeneratorKind::from_file;
    throw ConfigError("generator.kind: unknown kind '" + s + "'");
}

const char* to_string(ChannelKind k) {
    switch (k) {
        case ChannelKind::awgn_identity: return "awgn-identity";
        case ChannelKind::frequency_selective: return "frequency-selective";
        case ChannelKind::from_file: return "from-file";
    }
    return "?";
}

const char* to_string(GeneratorKind k) {
    switch (k) {
        case GeneratorKind::identity: return "identity";
        case GeneratorKind::random_semi_unitary: return "random-semi-unitary";
        case GeneratorKind::from_file: return "from-file";
    }
    return "?";
}

}  // namespace

SimConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    reject_unknown(j, "config",
                   {"constellation", "constellation_file", "channel", "generator", "ebn0_db", "trials", "seed",
                    "histogram", "output_dir"});
    SimConfig cfg;
    cfg.constellation = field<std::string>(j, "config", "constellation", cfg.constellation);
    cfg.constellation_file = resolve(base_dir, field<std::string>(j, "config", "constellation_file", ""));
    if (cfg.constellation_file.empty()) make_constellation(cfg.constellation);

    if (j.contains("generator")) {
        const json& g = j.at("generator");
        if (!g.is_object()) throw ConfigError("generator: expected an object");
        reject_unknown(g, "generator", {"kind", "rows", "cols", "seed", "path"});
        cfg.generator.kind = generator_kind(field<std::string>(g, "generator", "kind", "random-semi-unitary"));
        cfg.generator.rows = field<std::size_t>(g, "generator", "rows", cfg.generator.rows);
        cfg.generator.cols = field<std::size_t>(g, "generator", "cols", cfg.generator.cols);
        cfg.generator.seed = field<std::uint64_t>(g, "generator", "seed", cfg.generator.seed);
        cfg.generator.path = resolve(base_dir, field<std::string>(g, "generator", "path", ""));
        if (cfg.generator.kind == GeneratorKind::from_file) {
            if (cfg.generator.path.empty()) throw ConfigError("generator.path: required for from-file");
            const CMatrix g_file = load_matrix(cfg.generator.path);
            cfg.generator.rows = g_file.rows();
            cfg.generator.cols = g_file.cols();
        }
    }
    if (cfg.generator.cols == 0 || cfg.generator.rows < cfg.generator.cols)
        throw ConfigError("generator: need rows >= cols >= 1");

    cfg.channel.size = cfg.generator.rows;
    if (j.contains("channel")) {
        const json& c = j.at("channel");
        if (!c.is_object()) throw ConfigError("channel: expected an object");
        reject_unknown(c, "channel", {"kind", "size", "taps", "decay_db_per_tap", "seed", "tap_values", "path", "realizations"});
        cfg.channel.kind = channel_kind(field<std::string>(c, "channel", "kind", "awgn-identity"));
        cfg.channel.size = field<std::size_t>(c, "channel", "size", cfg.channel.size);
        cfg.channel.taps = field<std::size_t>(c, "channel", "taps", cfg.channel.taps);
        cfg.channel.decay_db_per_tap = field<double>(c, "channel", "decay_db_per_tap", cfg.channel.decay_db_per_tap);
        cfg.channel.seed = field<std::uint64_t>(c, "channel", "seed", cfg.channel.seed);
        cfg.channel.path = resolve(base_dir, field<std::string>(c, "channel", "path", ""));
        cfg.channel.realizations = field<std::size_t>(c, "channel", "realizations", cfg.channel.realizations);
        if (c.contains("tap_values")) {
            const CMatrix taps = matrix_from_json(c.at("tap_values"));
            cfg.channel.tap_values.assign(taps.data().begin(), taps.data().end());
        }
        if (cfg.channel.kind == ChannelKind::from_file && cfg.channel.path.empty())
            throw ConfigError("channel.path: required for from-file");
        if (cfg.channel.kind == ChannelKind::frequency_selective && cfg.channel.tap_values.empty() &&
            (cfg.channel.taps == 0 || cfg.channel.taps > cfg.channel.size))
            throw ConfigError("channel.taps: must be in 1..size");
        if (cfg.channel.realizations == 0) throw ConfigError("channel.realizations: must be >= 1");
    }
    if (cfg.channel.size != cfg.generator.rows) throw ConfigError("channel.size: must equal generator rows");

    if (j.contains("ebn0_db")) {
        const json& e = j.at("ebn0_db");
        try {
            cfg.ebn0_db = e.is_array() ? e.get<std::vector<double>>() : std::vector<double>{e.get<double>()};
        } catch (const json::exception&) {
            throw ConfigError("config.ebn0_db: expected a number or an array of numbers");
        }
        if (cfg.ebn0_db.empty()) throw ConfigError("config.ebn0_db: empty");
    }
    cfg.trials = field<std::size_t>(j, "config", "trials", cfg.trials);
    cfg.seed = field<std::uint64_t>(j, "config", "seed", cfg.seed);
    if (j.contains("histogram")) {
        const json& h = j.at("histogram");
        reject_unknown(h, "histogram", {"bins", "range"});
        cfg.histogram.bins = field<std::size_t>(h, "histogram", "bins", cfg.histogram.bins);
        cfg.histogram.range = field<double>(h, "histogram", "range", cfg.histogram.range);
        if (!(cfg.histogram.range > 0.0)) throw ConfigError("histogram.range: must be positive");
    }
    cfg.output_dir = resolve(base_dir, field<std::string>(j, "config", "output_dir", "out"));
    return cfg;
}

json config_to_json(const SimConfig& cfg) {
    json channel = {{"kind", to_string(cfg.channel.kind)},
                    {"size", cfg.channel.size},
                    {"taps", cfg.channel.taps},
                    {"decay_db_per_tap", cfg.channel.decay_db_per_tap},
                    {"seed", cfg.channel.seed},
                    {"realizations", cfg.channel.realizations}};
    if (!cfg.channel.path.empty()) channel["path"] = cfg.channel.path.string();
    if (!cfg.channel.tap_values.empty())
        channel["tap_values"] = matrix_to_json(CMatrix(1, cfg.channel.tap_values.size(), cfg.channel.tap_values));
    json generator = {{"kind", to_string(cfg.generator.kind)},
                      {"rows", cfg.generator.rows},
                      {"cols", cfg.generator.cols},
                      {"seed", cfg.generator.seed}};
    if (!cfg.generator.path.empty()) generator["path"] = cfg.generator.path.string();
    json j = {{"constellation", cfg.constellation},
              {"channel", std::move(channel)},
              {"generator", std::move(generator)},
              {"ebn0_db", cfg.ebn0_db},
              {"trials", cfg.trials},
              {"seed", cfg.seed},
              {"histogram", {{"bins", cfg.histogram.bins}, {"range", cfg.histogram.range}}},
              {"output_dir", cfg.output_dir.string()}};
    if (!cfg.constellation_file.empty()) j["constellation_file"] = cfg.constellation_file.string();
    return j;
}

Constellation resolve_constellation(const SimConfig& cfg) {
    if (!cfg.constellation_file.empty()) return load_constellation(cfg.constellation_file);
    return make_constellation(cfg.constellation);
}

}  // namespace cwcu
