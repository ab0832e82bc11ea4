#include "fixtures.hpp"

#include "lumpkit/cli.hpp"
#include "lumpkit/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using lumpkit::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result lumpkit_run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = lumpkit::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string &name) {
    const fs::path dir = fs::temp_directory_path() / ("lumpkit_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string model(const std::string &name) { return fixtures::models_dir() + "/" + name + ".model"; }

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t line_count(const std::string &text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

const char *kPerturbedPoints = "1,0,0;0,1,0;0,0,1;1,5,2;3,3,2;5,2,3";

std::map<std::string, std::string> snapshot(const fs::path &dir) {
    std::map<std::string, std::string> files;
    for (const auto &entry : fs::directory_iterator(dir)) {
        std::string content = slurp(entry.path());
        if (entry.path().filename() == "manifest.json") {
            json j = json::parse(content);
            j.erase("timings_seconds");
            content = j.dump();
        }
        files[entry.path().filename().string()] = content;
    }
    return files;
}

} // namespace

TEST_CASE("lump reproduces the reference reduction") {
    const fs::path dir = scratch("lump");
    const Result r = lumpkit_run({"lump", "--model", model("rational_perturbed"), "--points", kPerturbedPoints,
                                  "--epsilon", "0.2", "--out", dir.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("reduced size: 2") != std::string::npos);

    const json l = lumpkit::read_json(dir / "L.json");
    CHECK(l["size"] == 2);
    CHECK(l["epsilon"] == 0.2);
    CHECK(std::abs(l["matrix"][1][2].get<double>() - 0.897) < 1e-3);
    REQUIRE(l["provenance"].size() == 2);
    CHECK(l["provenance"][1]["parent_row"] == 0);
    CHECK(l["provenance"][1]["jacobian"] == 1);
    CHECK(l["epsilon_max"].get<double>() == doctest::Approx(20.2588).epsilon(1e-5));

    const json basis = lumpkit::read_json(dir / "basis.json");
    CHECK(basis["size"] == 6);
    const json manifest = lumpkit::read_json(dir / "manifest.json");
    CHECK(manifest["command"] == "lump");
    CHECK(manifest["seed"] == 0);
    CHECK(manifest["timings_seconds"].contains("lump"));
}

TEST_CASE("lump with random sampling finds the exact reduction") {
    const fs::path dir = scratch("lump_exact");
    const Result r =
        lumpkit_run({"lump", "--model", model("rational_exact"), "--epsilon", "0", "--seed", "3", "--out", dir.string()});
    REQUIRE(r.code == 0);
    CHECK(lumpkit::read_json(dir / "L.json")["size"] == 2);
}

TEST_CASE("usage, parse and i/o failures map to exit codes") {
    const fs::path dir = scratch("errors");
    CHECK(lumpkit_run({"lump", "--model", model("rational_exact"), "--epsilon", "-1", "--out", dir.string()}).code == 1);
    CHECK(lumpkit_run({"lump", "--model", model("rational_exact"), "--out", dir.string()}).code == 1);
    CHECK(lumpkit_run({"lump", "--epsilon", "0"}).code == 1);
    CHECK(lumpkit_run({"frobnicate"}).code == 1);
    CHECK(lumpkit_run({"lump", "--model", (dir / "missing.model").string(), "--epsilon", "0"}).code == 3);
    CHECK(lumpkit_run({"lump", "--model", model("rational_exact"), "--epsilon", "0", "--points", "1,2"}).code == 1);

    lumpkit::write_text(dir / "broken.model", "model b\nvar a\neq a = a +\n");
    const Result broken = lumpkit_run({"lump", "--model", (dir / "broken.model").string(), "--epsilon", "0"});
    CHECK(broken.code == 1);
    CHECK(broken.err.find("line 3") != std::string::npos);
}

TEST_CASE("find-epsilon") {
    const fs::path dir = scratch("search");
    SUBCASE("bisects to two variables") {
        const Result r = lumpkit_run({"find-epsilon", "--model", model("rational_perturbed"), "--points",
                                      kPerturbedPoints, "--ratio", "0.66", "--d-min", "1e-4", "--out", dir.string()});
        REQUIRE(r.code == 0);
        const json s = lumpkit::read_json(dir / "search.json");
        CHECK(s["cutoff_size"] == 2);
        CHECK(s["size"] == 2);
        CHECK(s["outcome"] == "bisected");
        CHECK(s["iterations"].get<std::size_t>() == s["history"].size() + 1);
        CHECK(lumpkit::read_json(dir / "L.json")["size"] == 2);
    }
    SUBCASE("full ratio on an exact model needs one run") {
        const Result r = lumpkit_run({"find-epsilon", "--model", model("rational_exact"), "--ratio", "1.0", "--out",
                                      dir.string()});
        REQUIRE(r.code == 0);
        const json s = lumpkit::read_json(dir / "search.json");
        CHECK(s["epsilon"] == 0.0);
        CHECK(s["iterations"] == 1);
        CHECK(r.out.find("iterations: 1") != std::string::npos);
    }
    SUBCASE("cutoff below the observables warns") {
        lumpkit::write_text(dir / "two_obs.model", "model two\nvar a, b, c, d\neq a = -a*b\neq b = a - b\n"
                                                   "eq c = b*b - c\neq d = c\ninit a = 1\ninit b = 1\ninit c = 1\n"
                                                   "init d = 1\nobs a\nobs b\nhorizon 1\n");
        const Result r = lumpkit_run(
            {"find-epsilon", "--model", (dir / "two_obs.model").string(), "--ratio", "0.25", "--out", dir.string()});
        REQUIRE(r.code == 0);
        CHECK(r.err.find("warning:") != std::string::npos);
        const json s = lumpkit::read_json(dir / "search.json");
        CHECK(s["outcome"] == "cutoff_below_observables");
        CHECK(s["epsilon"] == s["epsilon_max"]);
    }
    SUBCASE("ratio out of range") {
        CHECK(lumpkit_run({"find-epsilon", "--model", model("rational_exact"), "--ratio", "0"}).code == 1);
        CHECK(lumpkit_run({"find-epsilon", "--model", model("rational_exact"), "--ratio", "1.5"}).code == 1);
    }
}

TEST_CASE("simulate") {
    const fs::path dir = scratch("simulate");
    SUBCASE("original only") {
        const Result r = lumpkit_run({"simulate", "--model", model("enzyme_chain"), "--out", dir.string()});
        REQUIRE(r.code == 0);
        const std::string csv = slurp(dir / "original.csv");
        CHECK(csv.rfind("t,s,e,c,p,q\n", 0) == 0);
        CHECK(line_count(csv) == 201);
        CHECK(csv.find('\r') == std::string::npos);
        CHECK_FALSE(fs::exists(dir / "report.json"));
    }
    SUBCASE("with a lumping") {
        REQUIRE(lumpkit_run({"lump", "--model", model("linear_branches"), "--epsilon", "0", "--out", dir.string()})
                    .code == 0);
        const Result r = lumpkit_run({"simulate", "--model", model("linear_branches"), "--lumping",
                                      (dir / "L.json").string(), "--report-points", "51", "--out", dir.string()});
        REQUIRE(r.code == 0);
        for (const char *f : {"original.csv", "reduced.csv", "error.csv", "deviation.csv", "report.json"})
            CHECK(fs::exists(dir / f));
        CHECK(line_count(slurp(dir / "error.csv")) == 52);
        CHECK(slurp(dir / "reduced.csv").rfind("t,y1,", 0) == 0);
        const json rep = lumpkit::read_json(dir / "report.json");
        CHECK(rep["e_max"].get<double>() <= 1e-6);
        CHECK(rep["bound_violations"] == 0);
        CHECK(rep["grid_points"] == 51);
    }
    SUBCASE("dimension mismatch is a numeric failure") {
        REQUIRE(lumpkit_run({"lump", "--model", model("linear_branches"), "--epsilon", "0", "--out", dir.string()})
                    .code == 0);
        const Result r = lumpkit_run(
            {"simulate", "--model", model("rational_exact"), "--lumping", (dir / "L.json").string(), "--out", dir.string()});
        CHECK(r.code == 2);
        CHECK(r.err.find("columns") != std::string::npos);
    }
    SUBCASE("unreadable lumping file") {
        lumpkit::write_text(dir / "bad.json", "{ not json");
        CHECK(lumpkit_run({"simulate", "--model", model("rational_exact"), "--lumping", (dir / "bad.json").string(),
                           "--out", dir.string()})
                  .code == 3);
    }
}

TEST_CASE("sweep") {
    const fs::path dir = scratch("sweep");
    const Result r = lumpkit_run({"sweep", "--model", model("rational_perturbed"), "--points", kPerturbedPoints,
                                  "--grid", "2", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const std::string csv = slurp(dir / "staircase.csv");
    std::istringstream lines(csv);
    std::string header, first, last;
    std::getline(lines, header);
    std::getline(lines, first);
    std::getline(lines, last);
    CHECK(header == "epsilon,epsilon_over_epsilon_max,reduced_size");
    CHECK(first == "0,0,3");
    CHECK(last.substr(last.rfind(',')) == ",1");
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(lumpkit_run({"sweep", "--model", model("rational_perturbed"), "--grid", "1", "--out", dir.string()}).code == 1);
}

TEST_CASE("identical invocations write identical artifacts") {
    const fs::path dir = scratch("determinism");
    const auto invoke = [&] {
        return lumpkit_run({"lump", "--model", model("enzyme_chain"), "--epsilon", "0.05", "--seed", "42", "--out",
                            dir.string()});
    };
    REQUIRE(invoke().code == 0);
    const auto first = snapshot(dir);
    REQUIRE(invoke().code == 0);
    CHECK(snapshot(dir) == first);
}
