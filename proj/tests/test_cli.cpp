#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aniso_tools/commands.hpp"
#include "aniso_tools/config.hpp"
#include "aniso_tools/report_io.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using aniso::tools::run_cli;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "aniso");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    Run r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

class TempDir {
public:
    explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("aniso_cli_" + name)) {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    [[nodiscard]] std::string str() const { return path_.string(); }
    [[nodiscard]] std::string file(const std::string& name, const std::string& content) const {
        const fs::path p = path_ / name;
        std::ofstream(p) << content;
        return p.string();
    }
    [[nodiscard]] std::string sub(const std::string& name) const {
        fs::create_directories(path_ / name);
        return (path_ / name).string();
    }

private:
    fs::path path_;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

bool empty_dir(const std::string& dir) { return fs::is_empty(dir); }

const char* kSquareStudy = R"({"schema_version": 1, "body": {"shape": "cube", "dim": 2}, "p": 1,
 "field": {"family": "indicator", "region": {"box": {"lo": [0, 0], "hi": [1, 1]}}},
 "potential": {"type": "zero"},
 "functional": {"kind": "bbm", "family": "shrinking_uniform"},
 "schedule": {"kind": "n_values", "values": [4, 8, 16, 32, 64]}, "tolerance": 0.03})";

}  // namespace

TEST_CASE("norms: gauge and moment norm of the cube") {
    TempDir dir("norms");
    const std::string cfg = dir.file("c.json", R"({"schema_version": 1, "body": {"shape": "cube", "dim": 2}, "p": 1,
        "vectors": [[3, 4], [[1, 0], [0, 0]]]})");
    const Run r = cli({"norms", "--config", cfg, "--out", dir.str()});
    CHECK(r.code == 0);
    const auto rows = read_csv(dir.str() + "/norms.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"index", "gauge", "moment_norm", "error"});
    CHECK(std::stod(rows[1][1]) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(std::stod(rows[2][1]) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::stod(rows[2][2]) == doctest::Approx(6.0).epsilon(1e-10));

    const std::string ball = dir.file("b.json", R"({"schema_version": 1, "body": {"shape": "ball", "dim": 2}, "p": 2,
        "vectors": [[1, 0]]})");
    const std::string out2 = dir.sub("b");
    CHECK(cli({"norms", "--config", ball, "--out", out2}).code == 0);
    const auto brows = read_csv(out2 + "/norms.csv");
    CHECK(std::stod(brows[1][2]) == doctest::Approx(std::sqrt(3.14159265358979323846 / 2.0)).epsilon(1e-10));
}

TEST_CASE("configuration errors exit 2 and write nothing") {
    TempDir dir("errors");
    const std::string out = dir.sub("out");

    const std::string malformed = dir.file("bad.json", "{\"schema_version\": 1,\n \"body\": {\"shape\": \"ball\",,}}");
    Run r = cli({"norms", "--config", malformed, "--out", out});
    CHECK(r.code == 2);
    CHECK(r.err.find("malformed JSON") != std::string::npos);
    CHECK(empty_dir(out));

    const std::string unknown =
        dir.file("unknown.json", "{\"schema_version\": 1,\n \"body\": {\"shape\": \"ball\", \"dim\": 2},\n \"bogus\": 3}");
    r = cli({"norms", "--config", unknown, "--out", out});
    CHECK(r.code == 2);
    CHECK(r.err.find("unknown.json:3:") != std::string::npos);
    CHECK(empty_dir(out));

    const std::string low_p = dir.file("p.json", R"({"schema_version": 1, "body": {"shape": "ball", "dim": 2}, "p": 0.5})");
    CHECK(cli({"check-id2", "--config", low_p}).code == 2);

    const std::string version = dir.file("v.json", R"({"schema_version": 2})");
    CHECK(cli({"norms", "--config", version}).code == 2);

    const std::string mismatch = dir.file("m.json", R"({"schema_version": 1, "body": {"shape": "ball", "dim": 2},
        "p": 1, "vectors": [[1, 0, 0]]})");
    CHECK(cli({"norms", "--config", mismatch}).code == 2);

    CHECK(cli({"norms", "--config", dir.str() + "/missing.json"}).code == 2);
    CHECK(cli({"norms"}).code == 2);
    CHECK(cli({"no-such-command"}).code == 2);
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("check-id2") {
    TempDir dir("id2");
    const std::string ok = dir.file("ok.json", R"({"schema_version": 1, "body": {"shape": "ellipsoid", "axes": [2, 1]},
        "p": 2, "seed": 5, "check_id2": {"count": 20, "samples": 20000, "sigmas": 3}})");
    CHECK(cli({"check-id2", "--config", ok, "--out", dir.str()}).code == 0);
    const auto rows = read_csv(dir.str() + "/id2.csv");
    CHECK(rows.size() == 21);
    // zero allowed deviation cannot hold for a Monte Carlo estimate
    const std::string strict = dir.file("strict.json", R"({"schema_version": 1, "body": {"shape": "cube", "dim": 2},
        "p": 1, "check_id2": {"count": 5, "samples": 2000, "sigmas": 0}})");
    CHECK(cli({"check-id2", "--config", strict}).code == 1);
}

TEST_CASE("limit-study") {
    TempDir dir("study");
    const std::string cfg = dir.file("s.json", kSquareStudy);

    SUBCASE("missing output directory") {
        const Run r = cli({"limit-study", "--config", cfg, "--out", dir.str() + "/absent"});
        CHECK(r.code == 2);
        CHECK_FALSE(fs::exists(dir.str() + "/absent"));
    }
    SUBCASE("indicator perimeter study passes and round-trips") {
        const std::string out = dir.sub("one");
        const Run r = cli({"limit-study", "--config", cfg, "--out", out});
        CHECK(r.code == 0);
        for (const char* f : {"report.json", "points.csv", "plot.dat"}) CHECK(fs::exists(out + "/" + f));
        const std::string text = slurp(out + "/report.json");
        const aniso::ConvergenceReport rep = aniso::tools::report_from_json(text);
        CHECK(rep.pass);
        CHECK(rep.target == doctest::Approx(24.0).epsilon(1e-12));
        CHECK(rep.points.size() == 5);
        CHECK(aniso::tools::report_to_json(rep) == text);
        const auto parsed = nlohmann::json::parse(text);
        CHECK(parsed.at("schema_version") == 1);
        CHECK(parsed.contains("study"));
        CHECK(parsed.contains("extrapolation"));

        // same seed, different thread count: byte-identical outputs
        const std::string out3 = dir.sub("three");
        CHECK(cli({"limit-study", "--config", cfg, "--out", out3, "--threads", "3"}).code == 0);
        CHECK(slurp(out + "/points.csv") == slurp(out3 + "/points.csv"));
        CHECK(slurp(out + "/report.json") == slurp(out3 + "/report.json"));
    }
    SUBCASE("zero field passes") {
        const std::string zero = dir.file("z.json", R"({"schema_version": 1, "body": {"shape": "ball", "dim": 2}, "p": 2,
            "field": {"family": "zero", "dim": 2}, "potential": {"type": "rotational", "b": 1},
            "functional": {"kind": "nguyen"}, "schedule": {"kind": "delta_values", "values": [0.1, 0.05, 0.02, 0.01]}})");
        const std::string out = dir.sub("zero");
        CHECK(cli({"limit-study", "--config", zero, "--out", out}).code == 0);
        const aniso::ConvergenceReport rep = aniso::tools::report_from_json(slurp(out + "/report.json"));
        CHECK(rep.extrapolation.limit == 0.0);
        CHECK(rep.target == 0.0);
    }
    SUBCASE("incompatible combinations") {
        const std::string out = dir.sub("bad");
        const std::string ng = dir.file("ng.json", R"({"schema_version": 1, "body": {"shape": "ball", "dim": 2}, "p": 2,
            "field": {"family": "indicator", "region": {"box": {"lo": [0, 0], "hi": [1, 1]}}},
            "potential": {"type": "zero"}, "functional": {"kind": "nguyen"},
            "schedule": {"kind": "delta_values", "values": [0.1, 0.05, 0.02, 0.01]}})");
        CHECK(cli({"limit-study", "--config", ng, "--out", out}).code == 2);
        const std::string gag = dir.file("gag.json", R"({"schema_version": 1, "body": {"shape": "ball", "dim": 2}, "p": 2,
            "field": {"family": "gaussian", "dim": 2}, "potential": {"type": "rotational", "b": 1},
            "functional": {"kind": "gagliardo"}, "schedule": {"kind": "s_values", "values": [0.8, 0.9, 0.95, 0.99]}})");
        CHECK(cli({"limit-study", "--config", gag, "--out", out}).code == 2);
        const std::string sched = dir.file("sched.json", R"({"schema_version": 1, "body": {"shape": "ball", "dim": 2}, "p": 2,
            "field": {"family": "gaussian", "dim": 2}, "potential": {"type": "zero"},
            "functional": {"kind": "gagliardo"}, "schedule": {"kind": "n_values", "values": [4, 8, 16, 32]}})");
        CHECK(cli({"limit-study", "--config", sched, "--out", out}).code == 2);
        const std::string dims = dir.file("dims.json", R"({"schema_version": 1, "body": {"shape": "ball", "dim": 3}, "p": 2,
            "field": {"family": "gaussian", "dim": 2}, "potential": {"type": "zero"},
            "functional": {"kind": "gagliardo"}, "schedule": {"kind": "s_values", "values": [0.8, 0.9, 0.95, 0.99]}})");
        CHECK(cli({"limit-study", "--config", dims, "--out", out}).code == 2);
        CHECK(empty_dir(out));
    }
}

TEST_CASE("perimeter") {
    TempDir dir("perimeter");
    const std::string cfg = dir.file("p.json", R"({"schema_version": 1, "body": {"shape": "cube", "dim": 2},
        "region": {"box": {"lo": [0, 0], "hi": [1, 1]}}})");
    const Run r = cli({"perimeter", "--config", cfg, "--out", dir.str()});
    CHECK(r.code == 0);
    CHECK(r.out.find("anisotropic perimeter 24") != std::string::npos);
}

TEST_CASE("acceptance subcommand") {
    TempDir dir("acceptance");
    const Run r = cli({"acceptance", "--only", "2", "--json"});
    CHECK(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc.dump().find("\"pass\":true") != std::string::npos);
    CHECK(cli({"acceptance", "--only", "42"}).code == 2);
    const std::string cfg = dir.file("c.json", R"({"schema_version": 1})");
    CHECK(cli({"acceptance", "--config", cfg}).code == 2);
}

TEST_CASE("parse_config reports locations") {
    try {
        (void)aniso::tools::parse_config("{\"schema_version\": 1,\n\"body\": {\"shape\": \"ball\", \"dim\": 9}}", "x.json");
        FAIL("expected a ConfigError");
    } catch (const aniso::tools::ConfigError& e) {
        CHECK(std::string(e.what()).find("x.json:2:") != std::string::npos);
    }
    const aniso::tools::Config c = aniso::tools::parse_config(kSquareStudy, "s.json");
    CHECK(c.body->dimension() == 2);
    CHECK(c.p == 1.0);
    CHECK(c.tolerance == doctest::Approx(0.03));
    const aniso::StudyDefinition st = aniso::tools::study_from_config(c);
    CHECK(st.spec.kind == aniso::FunctionalKind::bbm);
}
