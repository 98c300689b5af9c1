#include "test_support.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("kbi_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(KBI_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

const char* kGridConfig = R"({
  "population": {"grid": {"side": 3, "spins_per_cell": 6}},
  "params": {"beta": 0.4, "J": 1.5, "h": {"x": 1, "y": -1},
             "theta0": 2.5, "theta": {"x": 1, "y": 0.5}},
  "sweeps": 60
})";

} // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate twice with the same seed produces identical bytes") {
    TempDir dir;
    write_file(dir.path / "cfg.json", kGridConfig);
    const auto out1 = dir.path / "a";
    const auto out2 = dir.path / "b";
    REQUIRE(run_cli("simulate --config " + (dir.path / "cfg.json").string() + " --seed 5 --out " +
                    out1.string()) == 0);
    REQUIRE(run_cli("simulate --config " + (dir.path / "cfg.json").string() + " --seed 5 --out " +
                    out2.string()) == 0);
    CHECK(slurp(out1 / "summary.csv") == slurp(out2 / "summary.csv"));
    CHECK(slurp(out1 / "population.csv") == slurp(out2 / "population.csv"));
    CHECK(slurp(out1 / "manifest.json") == slurp(out2 / "manifest.json"));

    const auto out3 = dir.path / "c";
    REQUIRE(run_cli("simulate --config " + (dir.path / "cfg.json").string() + " --seed 6 --out " +
                    out3.string()) == 0);
    CHECK(slurp(out1 / "summary.csv") != slurp(out3 / "summary.csv"));
}

TEST_CASE("exit codes distinguish config, data, and parse errors") {
    TempDir dir;
    SUBCASE("invalid priors exit 2") {
        write_file(dir.path / "bad.json", R"({
          "population": {"grid": {"side": 3, "spins_per_cell": 4}},
          "priors": {"beta": [2.0, 1.0]},
          "pins": {"J": 0, "h_x": 1, "h_y": 0, "theta0": 2, "theta_x": 1, "theta_y": 1},
          "budget": 10, "keep": 2, "sweeps": 10
        })");
        CHECK(run_cli("infer --config " + (dir.path / "bad.json").string() + " --out " +
                      (dir.path / "o").string()) == 2);
    }
    SUBCASE("missing population file exits 3") {
        write_file(dir.path / "cfg.json", R"({
          "population": "/nonexistent/pop.csv",
          "dims": ["age"]
        })");
        CHECK(run_cli("calibrate --config " + (dir.path / "cfg.json").string() + " --out " +
                      (dir.path / "o").string()) == 3);
    }
    SUBCASE("missing config field exits 2") {
        write_file(dir.path / "cfg.json", R"({"population": {"grid": {"side": 2, "spins_per_cell": 2}}})");
        CHECK(run_cli("simulate --config " + (dir.path / "cfg.json").string() + " --out " +
                      (dir.path / "o").string()) == 2);
    }
    SUBCASE("unknown scenario type exits 2") {
        write_file(dir.path / "cfg.json", R"({
          "population": {"grid": {"side": 2, "spins_per_cell": 2}},
          "gaussian": "g.json",
          "scenario": {"type": "teleport"}
        })");
        CHECK(run_cli("intervene --config " + (dir.path / "cfg.json").string() + " --out " +
                      (dir.path / "o").string()) == 2);
    }
    SUBCASE("unparseable arguments exit 2") {
        CHECK(run_cli("infer --nonsense") == 2);
    }
}

TEST_CASE("infer pipeline: posterior, marginals, gaussian, manifest") {
    TempDir dir;
    // simulate a snapshot, then infer with one free parameter
    write_file(dir.path / "sim.json", kGridConfig);
    REQUIRE(run_cli("simulate --config " + (dir.path / "sim.json").string() + " --seed 3 --out " +
                    (dir.path / "sim").string()) == 0);

    write_file(dir.path / "infer.json", R"({
      "population": ")" + (dir.path / "sim" / "population.csv").string() + R"(",
      "observed": ")" + (dir.path / "sim" / "summary.csv").string() + R"(",
      "priors": {"beta": [0, 2], "h_y": [-1.5, 0.5]},
      "pins": {"J": 1.5, "h_x": 1, "theta0": 2.5, "theta_x": 1, "theta_y": 0.5},
      "budget": 60, "keep": 20, "sweeps": 60, "bins": 8
    })");
    REQUIRE(run_cli("infer --config " + (dir.path / "infer.json").string() +
                    " --seed 4 --workers 2 --out " + (dir.path / "inf").string()) == 0);
    for (const char* f : {"posterior.csv", "marginals_hist.csv", "marginals_kde.csv",
                          "gaussian.json", "manifest.json"})
        CHECK(fs::exists(dir.path / "inf" / f));

    const auto posterior = slurp(dir.path / "inf" / "posterior.csv");
    CHECK(posterior.find("draw_index,eta,beta,J,h0,h_x,h_y,theta0,theta_x,theta_y") == 0);

    // worker count must not change any primary output
    REQUIRE(run_cli("infer --config " + (dir.path / "infer.json").string() +
                    " --seed 4 --workers 1 --out " + (dir.path / "inf1").string()) == 0);
    CHECK(slurp(dir.path / "inf" / "posterior.csv") == slurp(dir.path / "inf1" / "posterior.csv"));
    CHECK(slurp(dir.path / "inf" / "gaussian.json") == slurp(dir.path / "inf1" / "gaussian.json"));
    CHECK(slurp(dir.path / "inf" / "manifest.json") == slurp(dir.path / "inf1" / "manifest.json"));
}

TEST_CASE("predict pipeline on a split") {
    TempDir dir;
    write_file(dir.path / "sim.json", kGridConfig);
    REQUIRE(run_cli("simulate --config " + (dir.path / "sim.json").string() + " --seed 9 --out " +
                    (dir.path / "sim").string()) == 0);
    // train on 6 cells, test 3
    std::string split = "id,role\n";
    int i = 0;
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y, ++i)
            split += "g" + std::to_string(x) + "_" + std::to_string(y) + "," +
                     (i % 3 == 2 ? "test" : "train") + "\n";
    write_file(dir.path / "split.csv", split);

    write_file(dir.path / "pred.json", R"({
      "population": ")" + (dir.path / "sim" / "population.csv").string() + R"(",
      "observed": ")" + (dir.path / "sim" / "summary.csv").string() + R"(",
      "split": ")" + (dir.path / "split.csv").string() + R"(",
      "priors": {"beta": [0, 2]},
      "pins": {"J": 1.5, "h_x": 1, "h_y": -1, "theta0": 2.5, "theta_x": 1, "theta_y": 0.5},
      "budget": 40, "keep": 10, "T": 5, "sweeps": 60
    })");
    REQUIRE(run_cli("predict --config " + (dir.path / "pred.json").string() +
                    " --seed 2 --out " + (dir.path / "out").string()) == 0);
    CHECK(fs::exists(dir.path / "out" / "predictions.csv"));
    const auto metrics = slurp(dir.path / "out" / "metrics.json");
    CHECK(metrics.find("mean_test_distance") != std::string::npos);
    CHECK(metrics.find("null_distance") != std::string::npos);
}

TEST_CASE("intervene pipeline consumes the gaussian fit") {
    TempDir dir;
    write_file(dir.path / "sim.json", kGridConfig);
    REQUIRE(run_cli("simulate --config " + (dir.path / "sim.json").string() + " --seed 3 --out " +
                    (dir.path / "sim").string()) == 0);
    write_file(dir.path / "infer.json", R"({
      "population": ")" + (dir.path / "sim" / "population.csv").string() + R"(",
      "observed": ")" + (dir.path / "sim" / "summary.csv").string() + R"(",
      "priors": {"beta": [0, 2], "h_y": [-1.5, 0.5]},
      "pins": {"J": 1.5, "h_x": 1, "theta0": 2.5, "theta_x": 1, "theta_y": 0.5},
      "budget": 40, "keep": 10, "sweeps": 60
    })");
    REQUIRE(run_cli("infer --config " + (dir.path / "infer.json").string() +
                    " --seed 4 --out " + (dir.path / "inf").string()) == 0);

    write_file(dir.path / "int.json", R"({
      "population": ")" + (dir.path / "sim" / "population.csv").string() + R"(",
      "gaussian": ")" + (dir.path / "inf" / "gaussian.json").string() + R"(",
      "scenario": {"type": "remove_homophily", "dimensions": ["x"]},
      "reps": 4, "sweeps": 60
    })");
    REQUIRE(run_cli("intervene --config " + (dir.path / "int.json").string() +
                    " --seed 5 --workers 2 --out " + (dir.path / "out").string()) == 0);
    for (const char* f : {"outcomes.csv", "outcome_hist.csv", "summary.json", "manifest.json"})
        CHECK(fs::exists(dir.path / "out" / f));
    const auto summary = slurp(dir.path / "out" / "summary.json");
    CHECK(summary.find("polarisation_base") != std::string::npos);
    CHECK(summary.find("polarisation_scenario") != std::string::npos);
}

TEST_CASE("calibrate and sweep emit their CSV outputs") {
    TempDir dir;
    write_file(dir.path / "pop.csv",
               "id,age,income,n,S\nw1,1,5,10,0.30\nw2,2,4,10,0.36\nw3,3,3,10,0.42\n"
               "w4,4,2,10,0.48\nw5,5,1,10,0.54\nw6,6,1,10,0.60\n");
    write_file(dir.path / "cal.json", R"({
      "population": ")" + (dir.path / "pop.csv").string() + R"(",
      "dims": ["age"]
    })");
    REQUIRE(run_cli("calibrate --config " + (dir.path / "cal.json").string() + " --out " +
                    (dir.path / "out").string()) == 0);
    const auto ols_csv = slurp(dir.path / "out" / "ols.csv");
    CHECK(ols_csv.find("dimension,coefficient") == 0);
    CHECK(ols_csv.find("age,0.06") != std::string::npos); // exact linear fixture

    write_file(dir.path / "sweep.json", R"({
      "population": {"grid": {"side": 3, "spins_per_cell": 5}},
      "params": {"beta": 0, "J": 2, "h": {"x": 0, "y": 0},
                 "theta0": 2, "theta": {"x": 1, "y": 1}},
      "betas": {"from": 0, "to": 1, "steps": 3},
      "reps": 2, "sweeps": 30
    })");
    REQUIRE(run_cli("sweep --config " + (dir.path / "sweep.json").string() + " --seed 1 --out " +
                    (dir.path / "sw").string()) == 0);
    const auto mag = slurp(dir.path / "sw" / "magnetisation.csv");
    CHECK(mag.find("beta,mean_abs_m") == 0);
    CHECK(std::count(mag.begin(), mag.end(), '\n') == 4);
}

} // TEST_SUITE
