#include "anipf/config.hpp"
#include "anipf/io.hpp"

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace anipf;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("anipf_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kCustom = R"(
# two circles, Neumann
[domain]
dim = 2
H = 0.5
N = 48

[anisotropy]
spec = l1reg:0.05:rot=30

[scheme]
scheme = cahn_hilliard_neumann
eps_inv = 16pi
theta = 0.25
mobility = degenerate
tau = 1e-6
t_end = 1e-5
tol = 1e-10

[geometry]
type = circles
circles = -0.15,-0.15,0.2; 0.2,0.2,0.15

[output]
dir = out
snapshot_every = 5
)";

StepRecord record(int step) {
    StepRecord r;
    r.step = step;
    r.t = step * 1e-4;
    r.energy.e_gamma_h = 3.0 - 0.1 * step;
    r.energy.mass = -0.4;
    r.energy.gradient_energy = 1.0;
    r.energy.potential_energy = 2.0 - 0.1 * step;
    r.energy.stability_residual = -1e-3;
    r.stats.iterations = 4;
    r.stats.residual = 1e-12;
    return r;
}

}  // namespace

TEST_CASE("config parses all sections") {
    const RunConfig c = parse_config(kCustom);
    CHECK(c.domain.subdivisions == 48);
    CHECK(c.anisotropy == "l1reg:0.05:rot=30");
    CHECK(c.scheme.scheme == SchemeKind::cahn_hilliard_neumann);
    CHECK(c.scheme.eps_inv == doctest::Approx(16 * std::numbers::pi).epsilon(1e-15));
    CHECK(c.scheme.theta == 0.25);
    CHECK(c.scheme.mobility.is_degenerate());
    CHECK(c.scheme.solver.tol == 1e-10);
    CHECK(c.scheme.snapshot_every == 5);
    CHECK(c.output_dir == "out");
    const auto* u = std::get_if<BallUnion>(&c.geometry);
    REQUIRE(u != nullptr);
    REQUIRE(u->balls.size() == 2);
    CHECK(u->balls[1].radius == 0.15);
}

TEST_CASE("emit then parse is the identity") {
    std::vector<RunConfig> configs{parse_config(kCustom)};
    for (const char* preset : {"fig1", "fig4", "fig5", "fig8"})
        configs.push_back(parse_config(std::string("preset = ") + preset + "\n"));
    for (const auto& c : configs) {
        const std::string text = emit_config(c);
        const RunConfig back = parse_config(text);
        CHECK(emit_config(back) == text);
        CHECK(run_id(back) == run_id(c));
    }
}

TEST_CASE("presets") {
    const RunConfig f1 = parse_config("preset = fig1\n");
    CHECK(f1.scheme.scheme == SchemeKind::allen_cahn);
    CHECK(f1.anisotropy == "l1reg:0.01");
    CHECK(f1.scheme.tau == 1e-4);
    CHECK(f1.scheme.t_end == 0.05);
    CHECK(f1.domain.subdivisions == 128);
    CHECK(std::get<Ball>(f1.geometry).radius == 0.3);

    const RunConfig f4 = parse_config("preset = fig4\n[scheme]\nw_bdry = -64\n");
    CHECK(f4.scheme.scheme == SchemeKind::cahn_hilliard_dirichlet);
    CHECK(f4.scheme.w_bdry == -64.0);
    CHECK(std::get<Uniform>(f4.geometry).value == 1.0);

    CHECK(parse_config("preset = fig8\n").domain.dim == 3);
    for (const char* p : {"fig2", "fig3", "fig6", "fig7", "fig9"})
        CHECK_THROWS_AS(parse_config(std::string("preset = ") + p + "\n"), ConfigError);
    try {
        parse_config("preset = fig3\n");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("ani3") != std::string::npos);
        CHECK(what.find("matrices:") != std::string::npos);
    }
}

TEST_CASE("scheme section with only the required keys resolves defaults") {
    const RunConfig c = parse_config("[scheme]\nscheme = allen_cahn\ntau = 1e-4\nt_end = 0.05\n");
    CHECK(c.scheme.eps_inv == doctest::Approx(16 * std::numbers::pi));
    CHECK(c.scheme.theta == 1.0);
    CHECK(c.scheme.alpha == 1.0);
    CHECK(c.scheme.mobility.b0() == 2.0);
    CHECK(c.domain.half_width == 0.5);
    CHECK(c.domain.subdivisions == 128);
}

TEST_CASE("config errors") {
    const std::string base = "[scheme]\nscheme = allen_cahn\ntau = 1e-4\nt_end = 1e-3\n";
    CHECK_NOTHROW(parse_config(base));
    CHECK_THROWS_AS(parse_config(base + "colour = red\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "tau = 2e-4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "w_bdry = -2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "[nowhere]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[scheme]\nscheme = allen_cahn\ntau = 1e-4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "[domain]\ndim = 4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "mobility = sticky\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "[geometry]\ntype = circle\ncenter = 0,0\nradius = -1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "[geometry]\ntype = circle\nradius = 0.2\nvalue = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "[geometry]\ntype = uniform\nvalue = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "[anisotropy]\nspec = ani3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[scheme]\nscheme = allen_cahn\ntau = x\nt_end = 1\n"), ConfigError);
}

TEST_CASE("anisotropy specs") {
    CHECK(parse_anisotropy("iso", 3).size() == 1);
    CHECK(parse_anisotropy("l1reg:0.01", 2).gamma(testutil::vec2(1, 0)) == doctest::Approx(1.01));
    const auto rot = parse_anisotropy("l1reg:0.01:rot=45", 2);
    CHECK(rot.gamma(testutil::vec2(1, 1) / std::sqrt(2.0)) == doctest::Approx(1.01).epsilon(1e-12));
    const auto rot3 = parse_anisotropy("l1reg:0.01:rot=z,45", 3);
    CHECK(rot3.gamma(testutil::vec3(1, 1, 0) / std::sqrt(2.0)) == doctest::Approx(1.02).epsilon(1e-12));
    const auto mats = parse_anisotropy("matrices:1,0,0,4;2,1,1,2", 2);
    CHECK(mats.size() == 2);
    CHECK(mats.gamma(testutil::vec2(1, 0)) == doctest::Approx(1.0 + std::sqrt(2.0)));
    CHECK_THROWS_AS(parse_anisotropy("matrices:1,0,0", 2), ConfigError);
    CHECK_THROWS_AS(parse_anisotropy("matrices:1,2,0,1", 2), ConfigError);
    CHECK_THROWS_AS(parse_anisotropy("l1reg:-1", 2), ConfigError);
    CHECK_THROWS_AS(parse_anisotropy("l1reg:0.1:rot=45", 3), ConfigError);
    for (const char* s : {"ani2", "ani3", "ani4", "hex"}) CHECK_THROWS_AS(parse_anisotropy(s, 2), ConfigError);
}

TEST_CASE("run ids") {
    const RunConfig a = parse_config(kCustom);
    RunConfig b = a;
    b.scheme.tau *= 2;
    const std::string id = run_id(a);
    CHECK(id.size() == 16);
    CHECK(id.find_first_not_of("0123456789abcdef") == std::string::npos);
    CHECK(id == run_id(parse_config(kCustom)));
    CHECK(id != run_id(b));
}

TEST_CASE("energy csv round trip and resume") {
    const fs::path dir = temp_dir("csv");
    const fs::path csv = dir / "energy.csv";
    {
        EnergyCsvWriter w(csv);
        for (int s = 0; s < 3; ++s) CHECK(w.append(record(s)));
        CHECK(w.last_step() == 2);
    }
    {
        // A restarted run replays steps 1..4; only 3 and 4 are new.
        EnergyCsvWriter w(csv);
        CHECK(w.last_step() == 2);
        CHECK_FALSE(w.append(record(1)));
        CHECK_FALSE(w.append(record(2)));
        CHECK(w.append(record(3)));
        CHECK(w.append(record(4)));
    }
    const std::string text = slurp(csv);
    CHECK(text.rfind(std::string(kEnergyCsvHeader) + "\n", 0) == 0);
    const auto rows = read_energy_csv(csv);
    REQUIRE(rows.size() == 5);
    for (int s = 0; s < 5; ++s) {
        CHECK(rows[s].step == s);
        CHECK(rows[s].t == record(s).t);
        CHECK(rows[s].e_gamma_h == record(s).energy.e_gamma_h);
        CHECK_FALSE(rows[s].f_gamma_h.has_value());
        CHECK(rows[s].solver_iters == 4);
    }

    std::ofstream(dir / "bad.csv") << "step,t\n0,0\n";
    CHECK_THROWS_AS(EnergyCsvWriter(dir / "bad.csv"), std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("vtk snapshot layout") {
    const fs::path dir = temp_dir("vtk");
    const auto m = SimplicialMesh::uniform(2, 0.5, 2);
    const NodalField u = NodalField::LinSpaced(m.num_vertices(), -1, 1);
    write_vtk_snapshot(dir / "s.vtk", m, {{"U", &u}}, "test");
    std::istringstream in(slurp(dir / "s.vtk"));
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    CHECK(lines[0] == "# vtk DataFile Version 3.0");
    CHECK(lines[1] == "test");
    CHECK(lines[2] == "ASCII");
    CHECK(lines[3] == "DATASET UNSTRUCTURED_GRID");
    CHECK(lines[4] == "POINTS 9 double");
    CHECK(lines[14] == "CELLS 8 32");
    CHECK(lines[23] == "CELL_TYPES 8");
    CHECK(lines[24] == "5");
    CHECK(lines[32] == "POINT_DATA 9");
    CHECK(lines[33] == "SCALARS U double 1");
    CHECK(lines[35] == "-1");
    CHECK(lines.size() == 44);

    const NodalField short_field = NodalField::Zero(3);
    CHECK_THROWS_AS(write_vtk_snapshot(dir / "x.vtk", m, {{"U", &short_field}}), std::invalid_argument);
    fs::remove_all(dir);
}

TEST_CASE("manifest is valid json") {
    const fs::path dir = temp_dir("manifest");
    RunManifest man;
    man.run_id = "0123456789abcdef";
    man.config_text = "[domain]\ndim = 2\n";
    man.files = {"energy.csv"};
    man.wall_seconds = {0.5, 0.25};
    man.steps = 2;
    man.final_energy = 1.5;
    write_manifest(dir / "manifest.json", man);
    const auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(j["run_id"] == man.run_id);
    CHECK(j["config"] == man.config_text);
    CHECK(j["wall_seconds_per_step"].size() == 2);
    CHECK(j["steps"] == 2);
    fs::remove_all(dir);
}
