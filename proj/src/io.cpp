#include "cwcu/io.hpp"

#include <fstream>
#include <string>

namespace cwcu {

using nlohmann::json;

json matrix_to_json(const CMatrix& m) {
    json re = json::array(), im = json::array();
    for (const auto& v : m.data()) {
        re.push_back(v.real());
        im.push_back(v.imag());
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

CMatrix matrix_from_json(const json& j) {
    try {
        const auto rows = j.at("rows").get<std::size_t>();
        const auto cols = j.at("cols").get<std::size_t>();
        const auto& re = j.at("re");
        const auto& im = j.at("im");
        if (!re.is_array() || !im.is_array() || re.size() != rows * cols || im.size() != rows * cols)
            throw ConfigError("matrix object: re/im must hold rows*cols = " + std::to_string(rows * cols) + " numbers");
        std::vector<cplx> entries(rows * cols);
        for (std::size_t k = 0; k < entries.size(); ++k) entries[k] = {re[k].get<double>(), im[k].get<double>()};
        return {rows, cols, std::move(entries)};
    } catch (const json::exception& e) {
        throw ConfigError(std::string("matrix object: ") + e.what());
    }
}

json constellation_to_json(const Constellation& c) {
    json labels = json::array();
    for (std::size_t q = 0; q < c.order(); ++q) labels.push_back(c.label_string(q));
    return {{"name", c.name},
            {"symbols", matrix_to_json(CMatrix(1, c.order(), c.symbols))},
            {"labels", std::move(labels)}};
}

Constellation constellation_from_json(const json& j) {
    try {
        const CMatrix row = matrix_from_json(j.at("symbols"));
        if (row.rows() != 1) throw ConfigError("constellation symbols must be a 1 x 2^k row");
        std::vector<std::uint32_t> labels;
        for (const auto& l : j.at("labels")) {
            if (l.is_string()) {
                const auto s = l.get<std::string>();
                if (s.empty() || s.find_first_not_of("01") != std::string::npos)
                    throw ConfigError("constellation label '" + s + "' is not a bit string");
                labels.push_back(static_cast<std::uint32_t>(std::stoul(s, nullptr, 2)));
            } else {
                labels.push_back(l.get<std::uint32_t>());
            }
        }
        const std::string name = j.value("name", std::string("custom"));
        return make_custom(name, {row.data().begin(), row.data().end()}, std::move(labels));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("constellation object: ") + e.what());
    } catch (const ModelError& e) {
        throw ConfigError(std::string("constellation object: ") + e.what());
    }
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("'" + path.string() + "': " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

CMatrix load_matrix(const std::filesystem::path& path) {
    try {
        return matrix_from_json(read_json_file(path));
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        if (msg.find(path.string()) != std::string::npos) throw;
        throw ConfigError("'" + path.string() + "': " + msg);
    }
}

void save_matrix(const std::filesystem::path& path, const CMatrix& m) { write_json_file(path, matrix_to_json(m)); }

Constellation load_constellation(const std::filesystem::path& path) {
    try {
        return constellation_from_json(read_json_file(path));
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        if (msg.find(path.string()) != std::string::npos) throw;
        throw ConfigError("'" + path.string() + "': " + msg);
    }
}

}  // namespace cwcu
