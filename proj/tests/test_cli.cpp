#include "nmchain/cli.hpp"
#include "nmchain/io.hpp"
#include "nmchain/matcore.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nmchain;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<json> json_lines(const std::string& text) {
    std::vector<json> v;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) v.push_back(json::parse(line));
    return v;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "nmchain_cli_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("simulate: Markov XOR coherence decays by sin 2 phi") {
    const double phi = 0.5236;
    const Run r = run({"simulate", "--model", "markov-xor", "--phi", "0.5236", "--steps", "5"});
    REQUIRE(r.code == 0);
    const auto lines = json_lines(r.out);
    REQUIRE(lines.size() == 6);
    const double a0 = std::abs(Complex(lines[0]["rho_system"][0][1][0], lines[0]["rho_system"][0][1][1]));
    for (int t = 0; t <= 5; ++t) {
        CHECK(lines[t]["t"] == t);
        const auto& e = lines[t]["rho_system"][0][1];
        CHECK(std::abs(std::abs(Complex(e[0], e[1])) - a0 * std::pow(std::sin(2 * phi), t)) < 1e-14);
        CHECK_FALSE(lines[t].contains("rho_compound"));
    }
}

TEST_CASE("simulate: repeated XOR is stationary from t = 1") {
    const Run r = run({"simulate", "--model", "repeated-xor", "--phi", "0.5236", "--steps", "3"});
    REQUIRE(r.code == 0);
    const auto lines = json_lines(r.out);
    REQUIRE(lines.size() == 4);
    const ComplexMatrix s1 = matrix_from_json(lines[1]["rho_compound"].dump());
    for (int t = 2; t <= 3; ++t) CHECK(max_abs(matrix_from_json(lines[t]["rho_compound"].dump()) - s1) < 1e-14);
}

TEST_CASE("simulate: sqrt-XOR Delta column, CSV") {
    const Run r = run({"simulate", "--model", "sqrt-xor", "--phi", "0.3", "--steps", "50", "--format", "csv"});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 52);
    CHECK(rows[0] == std::vector<std::string>{"t", "rho00", "rho11", "re01", "im01", "abs01", "delta_re", "delta_im",
                                              "abs_delta"});
    // the default initial state gives Delta_0 = -i/2 with memory |0>
    for (int t = 1; t < 50; ++t) {
        const double a = std::stod(rows[t + 1][8]), b = std::stod(rows[t + 2][8]);
        CHECK(std::abs(b / a - std::sin(0.6)) < 1e-12);
    }
    CHECK(r.out.find(';') == std::string::npos);
}

TEST_CASE("JSON output round-trips into valid states") {
    for (const std::string model : {"markov-xor", "repeated-xor", "sqrt-xor"}) {
        const Run r = run({"simulate", "--model", model, "--phi", "0.41", "--steps", "4", "--initial", "0.2,0.8,0.1,0.3"});
        REQUIRE(r.code == 0);
        for (const auto& line : json_lines(r.out)) {
            CHECK_NOTHROW(DensityMatrix(matrix_from_json(line["rho_system"].dump()), {"sys"}));
            if (line.contains("rho_compound"))
                CHECK_NOTHROW(DensityMatrix(matrix_from_json(line["rho_compound"].dump()), {"mem", "sys"}));
        }
    }
    // 17 significant digits make the round trip exact
    const Run r = run({"simulate", "--model", "sqrt-xor", "--phi", "0.3", "--steps", "1"});
    const ComplexMatrix m = matrix_from_json(json_lines(r.out)[1]["rho_compound"].dump());
    CHECK(matrix_from_json(matrix_json(m)) == m);
}

TEST_CASE("measures") {
    const Run r = run({"measures", "--model", "repeated-xor", "--phi", "0.5235987755982988", "--initial", "0.3,0.7,0,0"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["count_qubits"] == 1);
    CHECK(j["classification"] == "quantum-nm");
    CHECK(j["discord"].get<double>() > 1e-6);

    const json z = json::parse(run({"measures", "--model", "repeated-xor", "--phi", "0", "--initial", "0.3,0.7,0,0"}).out);
    CHECK(z["classification"] == "classical-nm");
    const json m = json::parse(run({"measures", "--model", "markov-xor"}).out);
    CHECK(m["count_qubits"] == 0);
    CHECK(m["classification"] == "markovian");

    const Run csv = run({"measures", "--model", "sqrt-xor", "--phi", "0.3", "--format", "csv"});
    REQUIRE(csv.code == 0);
    const auto rows = csv_rows(csv.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].size() == rows[1].size());
    CHECK(rows[1][6] == "quantum-nm");
}

TEST_CASE("divisibility") {
    const Run r = run({"divisibility", "--model", "markov-xor", "--phi", "0.3", "--steps", "10"});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 11);
    CHECK(rows[0] == std::vector<std::string>{"t", "exists", "min_choi_eig"});
    for (int t = 1; t <= 10; ++t) {
        CHECK(rows[t][0] == std::to_string(t));
        CHECK(rows[t][1] == "true");
        CHECK(std::stod(rows[t][2]) >= -1e-9);
    }
    const Run j = run({"divisibility", "--model", "repeated-xor", "--steps", "3", "--format", "json"});
    REQUIRE(j.code == 0);
    const auto lines = json_lines(j.out);
    REQUIRE(lines.size() == 3);
    CHECK(lines[2]["exists"] == "indeterminate");
    CHECK(lines[2]["min_choi_eig"].is_null());
}

TEST_CASE("schedule command") {
    const json five = json::parse(run({"schedule", "--figure", "5", "--horizon", "12"}).out);
    CHECK(five["satellite_count"] == 2);
    CHECK(json::parse(run({"schedule", "--figure", "1a"}).out)["satellite_count"] == 0);
    CHECK(json::parse(run({"schedule", "--figure", "1b"}).out)["satellite_count"] == 1);
    CHECK(json::parse(run({"schedule", "--figure", "1d"}).out)["persistent"] == json::array({1}));
    CHECK(run({"schedule"}).code == 2);
    CHECK(run({"schedule", "--figure", "2"}).code == 2);

    SUBCASE("the generated file feeds a custom simulation") {
        const auto path = scratch("fig5.json").string();
        REQUIRE(run({"schedule", "--figure", "5", "--horizon", "6", "--out", path}).code == 0);
        const Run from_file = run({"simulate", "--model", "custom", "--gate", "sqrt-xor", "--schedule", path, "--phi",
                                   "0.3", "--steps", "6"});
        const Run from_figure = run({"simulate", "--model", "custom", "--gate", "sqrt-xor", "--figure", "5", "--phi",
                                     "0.3", "--steps", "6"});
        REQUIRE(from_file.code == 0);
        CHECK(from_file.out == from_figure.out);
        CHECK(json_lines(from_file.out).size() == 7);
    }
    SUBCASE("a custom 1b schedule reproduces the repeated-XOR chain") {
        const Run a = run({"simulate", "--model", "custom", "--figure", "1b", "--phi", "0.4", "--steps", "5"});
        const Run b = run({"simulate", "--model", "repeated-xor", "--phi", "0.4", "--steps", "5"});
        const auto la = json_lines(a.out), lb = json_lines(b.out);
        REQUIRE(la.size() == lb.size());
        for (std::size_t t = 0; t < la.size(); ++t)
            CHECK(max_abs(matrix_from_json(la[t]["rho_system"].dump()) - matrix_from_json(lb[t]["rho_system"].dump())) < 1e-12);
    }
}

TEST_CASE("trajectories") {
    const Run exact = run({"trajectories", "--model", "sqrt-xor", "--phi", "0.3", "--steps", "8", "--exact"});
    REQUIRE(exact.code == 0);
    const auto lines = json_lines(exact.out);
    REQUIRE(lines.size() == 257);
    CHECK(lines.front()["outcomes"].size() == 8);
    CHECK(lines.front().contains("log_p"));
    const json& summary = lines.back()["summary"];
    CHECK(summary["mode"] == "exact");
    CHECK(summary["trace_distance"].get<double>() < 1e-11);

    const std::vector<std::string> base{"trajectories", "--model", "repeated-xor", "--steps", "6", "--samples",
                                        "300", "--seed", "11"};
    auto with = [&](std::vector<std::string> extra) {
        auto a = base;
        a.insert(a.end(), extra.begin(), extra.end());
        return run(a);
    };
    const Run one = with({"--threads", "1"});
    REQUIRE(one.code == 0);
    CHECK(with({"--threads", "1"}).out == one.out);
    CHECK(with({"--threads", "3"}).out == one.out);
    CHECK(with({"--engine", "sliding"}).out != "");
    CHECK(with({"--seed", "12"}).out != one.out);

    SUBCASE("NMCHAIN_THREADS is the fallback") {
        ::setenv("NMCHAIN_THREADS", "4", 1);
        const Run env = run(base);
        ::unsetenv("NMCHAIN_THREADS");
        CHECK(env.code == 0);
        CHECK(env.out == one.out);
    }
    SUBCASE("records can go to a file") {
        const auto path = scratch("records.jsonl").string();
        const Run r = with({"--dump", path});
        REQUIRE(r.code == 0);
        CHECK(json_lines(r.out).size() == 1);
        std::ifstream f(path);
        std::stringstream ss;
        ss << f.rdbuf();
        CHECK(json_lines(ss.str()).size() == 300);
    }
    CHECK(run({"trajectories", "--model", "custom", "--figure", "1d", "--steps", "3"}).code == 4);
    CHECK(run({"trajectories", "--format", "csv"}).code == 2);
    CHECK(run({"trajectories", "--exact", "--steps", "17"}).code == 2);
}

TEST_CASE("configuration errors") {
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"simulate", "--initial", "0.5,0.5,0.6,0"},
             {"simulate", "--initial", "0.5,0.5"},
             {"simulate", "--initial", "a,b,c,d"},
             {"simulate", "--memory", "1,0,0"},
             {"simulate", "--steps", "-1"},
             {"simulate", "--bogus"},
             {"simulate", "--model", "nope"},
             {"simulate", "--model", "custom"},
             {"simulate", "--model", "custom", "--figure", "1b", "--gate", "toffoli"},
             {"simulate", "--model", "custom", "--schedule", "/nonexistent/file.json"},
             {"simulate", "--phi", "nan"},
             {"measures", "--format", "xml"},
             {"divisibility", "--tol-cp", "x"},
             {},
         }) {
        const Run r = run(args);
        CHECK(r.code == 2);
    }
    const Run diag = run({"simulate", "--initial", "a,b,c,d"});
    CHECK(diag.err.find("field 1") != std::string::npos);
}

TEST_CASE("help documents every flag") {
    const Run r = run({"simulate", "--help"});
    CHECK(r.code == 0);
    for (const char* flag : {"--model", "--phi", "--steps", "--initial", "--memory", "--schedule", "--format"})
        CHECK(r.out.find(flag) != std::string::npos);
    const Run t = run({"trajectories", "--help"});
    for (const char* flag : {"--seed", "--samples", "--threads", "--exact", "--dump"})
        CHECK(t.out.find(flag) != std::string::npos);
    CHECK(run({"divisibility", "--help"}).out.find("--tol-cp") != std::string::npos);
}

TEST_CASE("the installed binary behaves like the in-process entry point") {
    const char* tool = std::getenv("NMCHAIN_TOOL");
    if (!tool) return;
    const auto out = scratch("tool_out.txt").string();
    const std::string cmd = std::string(tool) + " schedule --figure 5 --horizon 12 > " + out;
    REQUIRE(std::system(cmd.c_str()) == 0);
    std::ifstream f(out);
    std::stringstream ss;
    ss << f.rdbuf();
    CHECK(ss.str() == run({"schedule", "--figure", "5", "--horizon", "12"}).out);
    const int status = std::system((std::string(tool) + " trajectories --model custom --figure 1d 2>/dev/null").c_str());
    CHECK(WEXITSTATUS(status) == 4);
}
