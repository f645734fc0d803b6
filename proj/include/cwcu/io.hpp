#pragma once

#include <filesystem>

#include <json.hpp>

#include "cwcu/constellation.hpp"
#include "cwcu/linalg.hpp"

namespace cwcu {

/// {"rows": r, "cols": c, "re": [row-major], "im": [row-major]}
nlohmann::json matrix_to_json(const CMatrix& m);
/// Throws ConfigError on a malformed object.
CMatrix matrix_from_json(const nlohmann::json& j);

/// {"name": ..., "symbols": <1 x 2^k matrix object>, "labels": [int | "0101", ...]}
nlohmann::json constellation_to_json(const Constellation& c);
Constellation constellation_from_json(const nlohmann::json& j);

/// Reads and parses a JSON file; ConfigError names the path on failure.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

CMatrix load_matrix(const std::filesystem::path& path);
void save_matrix(const std::filesystem::path& path, const CMatrix& m);
Constellation load_constellation(const std::filesystem::path& path);

}  // namespace cwcu
