#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "perfhom/cli.hpp"

using namespace perfhom;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "perfhom_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const char* MINI_SWEEP = R"({
  "name": "mini-sweep",
  "outer": {"kind": "box", "lo": [0, 0], "hi": [2, 2]},
  "generator": {"kind": "periodic"},
  "shape": {"kind": "disk", "radius": 1.0},
  "bc": {"kind": "all_dirichlet"},
  "eps_list": [0.25, 0.125],
  "eta": {"kind": "fixed", "value": 0.5},
  "f": {"kind": "constant", "value": 1.0},
  "theorem": "T2",
  "mesh": {"h_target": 0.15},
  "tolerances": {"slope_l2": 1.0, "slope_w12": 1.0}
})";

std::string strip_wall_ms(const std::string& csv) {
    std::istringstream is(csv);
    std::string line, out;
    while (std::getline(is, line)) {
        auto pos = line.rfind(',');
        out += line.substr(0, pos) + "\n";
    }
    return out;
}

} // namespace

TEST_CASE("cli: check-geometry on the packaged audit scenario") {
    fs::path dir = scratch_dir("geom");
    RunConfig cfg;
    cfg.command = "check-geometry";
    cfg.scenario_path = std::string(PERFHOM_SOURCE_DIR) + "/scenarios/geometry_audit.json";
    cfg.out_dir = (dir / "out").string();
    std::string before = read_text_file(cfg.scenario_path);
    CHECK(run(cfg) == 0);
    CHECK(fs::exists(dir / "out" / "geometry_report.json"));
    CHECK(fs::exists(dir / "out" / "manifest_check-geometry.json"));
    CHECK(read_text_file(cfg.scenario_path) == before);  // input never mutated

    auto j = nlohmann::json::parse(read_text_file(dir / "out" / "geometry_report.json"));
    CHECK(j["pass"] == true);
    CHECK(j["reports"][0]["a1_separation"] == true);
    CHECK(j["reports"][0]["a3_covering"]["pass"] == true);
}

TEST_CASE("cli: malformed scenario exits 2 naming the field") {
    fs::path dir = scratch_dir("bad");
    std::string bad = MINI_SWEEP;
    bad.replace(bad.find("\"fixed\""), 7, "\"fuzzy\"");
    write_text_file(dir / "bad.json", bad);
    RunConfig cfg;
    cfg.command = "sweep";
    cfg.scenario_path = (dir / "bad.json").string();
    cfg.out_dir = (dir / "out").string();
    CHECK(run(cfg) == 2);
    CHECK_THROWS_WITH_AS(load_scenario((dir / "bad.json").string()),
                         doctest::Contains("eta"), ConfigError);
}

TEST_CASE("cli: sweep artifacts, determinism, report reproduction") {
    fs::path dir = scratch_dir("sweep");
    write_text_file(dir / "scenario.json", MINI_SWEEP);
    RunConfig cfg;
    cfg.command = "sweep";
    cfg.scenario_path = (dir / "scenario.json").string();
    cfg.out_dir = (dir / "out1").string();
    cfg.plot = true;
    CHECK(run(cfg) == 0);
    REQUIRE(fs::exists(dir / "out1" / "sweep.csv"));
    REQUIRE(fs::exists(dir / "out1" / "sweep_verdicts.json"));
    CHECK(fs::exists(dir / "out1" / "sweep_L2.svg"));
    CHECK(fs::exists(dir / "out1" / "manifest_sweep.json"));

    cfg.out_dir = (dir / "out2").string();
    CHECK(run(cfg) == 0);
    // identical config reproduces identical CSV bytes (wall-clock column aside)
    std::string csv1 = read_text_file(dir / "out1" / "sweep.csv");
    std::string csv2 = read_text_file(dir / "out2" / "sweep.csv");
    CHECK(strip_wall_ms(csv1) == strip_wall_ms(csv2));

    std::string verdicts1 = read_text_file(dir / "out1" / "sweep_verdicts.json");
    RunConfig rep;
    rep.command = "report";
    rep.scenario_path = cfg.scenario_path;
    rep.out_dir = (dir / "out1").string();
    CHECK(run(rep) == 0);
    CHECK(read_text_file(dir / "out1" / "sweep_verdicts.json") == verdicts1);
}

TEST_CASE("cli: cell command writes the sidecar report") {
    fs::path dir = scratch_dir("cell");
    RunConfig cfg;
    cfg.command = "cell";
    cfg.scenario_path = std::string(PERFHOM_SOURCE_DIR) + "/scenarios/cell_expansion.json";
    cfg.out_dir = (dir / "out").string();
    CHECK(run(cfg) == 0);
    auto j = nlohmann::json::parse(read_text_file(dir / "out" / "cell_report.json"));
    CHECK(j["eta"] == 1.0);
    double c4d = j["c4_discrete"], c4a = j["c4_analytic"];
    CHECK(std::abs(c4d - c4a) / c4a < 0.005);
    CHECK(fs::exists(dir / "out" / "cell_mesh.txt"));
}

TEST_CASE("cli: mesh, solve and sharpness commands write their artifacts") {
    fs::path dir = scratch_dir("cmds");
    write_text_file(dir / "scenario.json", MINI_SWEEP);
    RunConfig cfg;
    cfg.scenario_path = (dir / "scenario.json").string();

    cfg.command = "mesh";
    cfg.out_dir = (dir / "mesh").string();
    CHECK(run(cfg) == 0);
    CHECK(fs::exists(dir / "mesh" / "mesh_eps_0.25.txt"));
    CHECK(fs::exists(dir / "mesh" / "mesh_eps_0.25.json"));
    // the written mesh file parses back
    std::ifstream ms(dir / "mesh" / "mesh_eps_0.25.txt");
    Mesh m = read_mesh(ms);
    check_conforming(m);

    cfg.command = "solve";
    cfg.out_dir = (dir / "solve").string();
    CHECK(run(cfg) == 0);
    CHECK(fs::exists(dir / "solve" / "solution_values_eps_0.125.txt"));
    auto j = nlohmann::json::parse(read_text_file(dir / "solve" / "solve_report.json"));
    CHECK(j["solves"].size() == 2);
    CHECK(double(j["solves"][0]["residual"]) <= 1e-10);

    const char* SHARP = R"({
      "name": "mini-sharpness",
      "outer": {"kind": "box", "lo": [-10, -10], "hi": [10, 10]},
      "generator": {"kind": "periodic", "offset": [0.0, 0.0]},
      "shape": {"kind": "disk", "radius": 1.0},
      "bc": {"kind": "halfspace", "axis": 1, "threshold": 0.0},
      "eps_list": [0.125],
      "eta": {"kind": "fixed", "value": 0.5},
      "theorem": "T2",
      "cell": {"h_target": 0.12},
      "sharpness": {"kind": "dirichlet", "center": [0, 6], "radius": 2.5}
    })";
    write_text_file(dir / "sharp.json", SHARP);
    cfg.command = "sharpness";
    cfg.scenario_path = (dir / "sharp.json").string();
    cfg.out_dir = (dir / "sharp").string();
    CHECK(run(cfg) == 0);
    auto sj = nlohmann::json::parse(read_text_file(dir / "sharp" / "sharpness.json"));
    CHECK(sj["rows"].size() == 1);
    CHECK(double(sj["rows"][0]["dev_l2"]) < 0.2);

    // scenario without a sharpness block is a config error (exit 2)
    cfg.scenario_path = (dir / "scenario.json").string();
    cfg.out_dir = (dir / "sharp2").string();
    CHECK(run(cfg) == 2);
}
