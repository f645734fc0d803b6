#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cwcu/io.hpp"
#include "cwcu/linalg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code = -1;
    std::string output;
};

Result run(const std::string& args) {
    const std::string cmd = std::string(CWCU_CLI_PATH) + " " + args + " 2>&1";
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, got);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("cwcu_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_config(const fs::path& dir, const json& j) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << j.dump(2);
    return p;
}

json small_config() {
    return {{"constellation", "8qam-rect"},
            {"generator", {{"kind", "random-semi-unitary"}, {"rows", 12}, {"cols", 8}, {"seed", 2}}},
            {"channel", {{"kind", "awgn-identity"}}},
            {"ebn0_db", {2, 8}},
            {"trials", 400},
            {"seed", 5},
            {"output_dir", "out"}};
}

}  // namespace

TEST_CASE("simulate writes reports and pairs agree") {
    const fs::path dir = scratch_dir("simulate");
    const fs::path cfg = write_config(dir, small_config());
    const Result r = run("simulate --config " + cfg.string());
    REQUIRE(r.code == 0);
    for (const char* f : {"report.json", "ber.csv", "bmse.csv", "propriety.csv"}) CHECK(fs::exists(dir / "out" / f));

    const json report = cwcu::read_json_file(dir / "out" / "report.json");
    for (const auto& p : report.at("points")) {
        const auto& e = p.at("estimators");
        CHECK(e.at("lmmse").at("bit_errors") == e.at("cwcu-lmmse").at("bit_errors"));
        CHECK(e.at("wlmmse").at("bit_errors") == e.at("cwcu-wlmmse").at("bit_errors"));
        CHECK(p.at("trials") == 400);
    }
}

TEST_CASE("csv outputs are byte-identical across job counts") {
    const fs::path dir = scratch_dir("jobs");
    const fs::path cfg = write_config(dir, small_config());
    REQUIRE(run("simulate -c " + cfg.string() + " --out " + (dir / "a").string() + " --jobs 1").code == 0);
    REQUIRE(run("simulate -c " + cfg.string() + " --out " + (dir / "b").string() + " --jobs 4").code == 0);
    for (const char* f : {"ber.csv", "bmse.csv", "propriety.csv"}) CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));

    REQUIRE(run("simulate -c " + cfg.string() + " --out " + (dir / "c").string() + " --seed 6").code == 0);
    CHECK(slurp(dir / "a" / "ber.csv") != slurp(dir / "c" / "ber.csv"));
}

TEST_CASE("dry run computes no trials") {
    const fs::path dir = scratch_dir("dry");
    const fs::path cfg = write_config(dir, small_config());
    REQUIRE(run("simulate -c " + cfg.string() + " --dry-run").code == 0);
    const json report = cwcu::read_json_file(dir / "out" / "report.json");
    CHECK(report.at("points")[0].at("trials") == 0);
    CHECK(report.at("points")[0].at("estimators").at("wlmmse").at("bmse_analytic_mean").get<double>() > 0.0);
}

TEST_CASE("configuration errors exit with 2 and name the problem") {
    const Result missing = run("simulate -c /nonexistent/cfg.json");
    CHECK(missing.code == 2);
    CHECK(missing.output.find("/nonexistent/cfg.json") != std::string::npos);
    const json err = json::parse(missing.output);
    CHECK(err.at("error").at("kind") == "config");

    const fs::path dir = scratch_dir("badcfg");
    json bad = small_config();
    bad["trails"] = 3;
    const Result typo = run("simulate -c " + write_config(dir, bad).string());
    CHECK(typo.code == 2);
    CHECK(typo.output.find("trails") != std::string::npos);

    CHECK(run("").code == 2);
    CHECK(run("simulate").code == 2);
    CHECK(run("llr-check --constellation 64qam").code == 2);
}

TEST_CASE("numerical degeneracy exits with 3") {
    const fs::path dir = scratch_dir("degenerate");
    cwcu::CMatrix h = cwcu::CMatrix::identity(6);
    h(2, 2) = 0.0;
    cwcu::save_matrix(dir / "h.json", h);
    json cfg = {{"generator", {{"kind", "identity"}, {"rows", 6}, {"cols", 4}}},
                {"channel", {{"kind", "from-file"}, {"path", "h.json"}}},
                {"trials", 10}};
    const Result r = run("simulate -c " + write_config(dir, cfg).string());
    CHECK(r.code == 3);
    const json err = json::parse(r.output);
    CHECK(err.at("error").at("kind") == "degenerate_component");
    CHECK(err.at("error").at("component") == 2);
}

TEST_CASE("llr-check") {
    for (const char* c : {"qpsk", "16qam", "8qam-rect"}) {
        const Result r = run(std::string("llr-check --models 20 --observations 20 --constellation ") + c);
        CHECK(r.code == 0);
        const json j = json::parse(r.output);
        CHECK(j.at("pass") == true);
        CHECK(j.at("max_llr_diff_widely").get<double>() < 1e-9);
    }
    const fs::path dir = scratch_dir("llr");
    REQUIRE(run("llr-check --models 3 --observations 4 --dump " + (dir / "d.csv").string()).code == 0);
    const std::string dump = slurp(dir / "d.csv");
    CHECK(dump.rfind("trial,component,bit,llr_A,llr_B,abs_diff\n", 0) == 0);
}

TEST_CASE("histogram") {
    const fs::path dir = scratch_dir("hist");
    const fs::path cfg = write_config(dir, small_config());
    REQUIRE(run("histogram -c " + cfg.string() + " --bins 8 --trials 50 --out " + (dir / "h.csv").string()).code == 0);
    const std::string csv = slurp(dir / "h.csv");
    // 2 SNR points x 2 estimators x 8 symbols x 64 bins, plus two header lines
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 + 2 * 2 * 8 * 64);
    CHECK(run("histogram -c " + cfg.string() + " --bins 0").code == 2);
}

TEST_CASE("inspect") {
    const fs::path dir = scratch_dir("inspect");
    cwcu::save_matrix(dir / "m.json", cwcu::CMatrix{{2.0, cwcu::cplx(0, 1)}, {cwcu::cplx(0, -1), 2.0}});
    Result r = run("inspect " + (dir / "m.json").string());
    REQUIRE(r.code == 0);
    json j = json::parse(r.output);
    CHECK(j.at("hermitian") == true);
    CHECK(j.at("positive_definite") == true);

    cwcu::save_matrix(dir / "n.json", cwcu::CMatrix{{1.0, 2.0}, {2.0, 1.0}});
    j = json::parse(run("inspect " + (dir / "n.json").string()).output);
    CHECK(j.at("hermitian") == true);
    CHECK(j.at("positive_definite") == false);

    std::ofstream(dir / "c.json") << R"({"name":"bpsk-ish","symbols":{"rows":1,"cols":2,"re":[1,-1],"im":[0,0]},"labels":["0","1"]})";
    r = run("inspect " + (dir / "c.json").string());
    REQUIRE(r.code == 0);
    j = json::parse(r.output);
    CHECK(j.at("type") == "constellation");
    CHECK(j.at("proper") == false);
    CHECK(j.at("propriety_ratio").get<double>() == doctest::Approx(1.0));

    std::ofstream(dir / "junk.json") << "{not json";
    CHECK(run("inspect " + (dir / "junk.json").string()).code == 2);
}
