// anipf: command line driver for the anisotropic Allen-Cahn / Cahn-Hilliard
// obstacle-potential solvers.

#include "anipf/anisotropy.hpp"
#include "anipf/config.hpp"
#include "anipf/diagnostics.hpp"
#include "anipf/io.hpp"
#include "anipf/schemes.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace anipf;

namespace {

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string snapshot_name(int step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%06d.vtk", step);
    return buf;
}

int cmd_run(const std::string& config_path, const std::string& out_override, bool quiet) {
    RunConfig cfg = load_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    const std::string id = run_id(cfg);
    const fs::path dir = fs::path(cfg.output_dir) / id;
    fs::create_directories(dir);

    const SimplicialMesh mesh = build_mesh(cfg);
    const AnisotropyDensity aniso = parse_anisotropy(cfg.anisotropy, cfg.domain.dim);
    const std::string config_text = emit_config(cfg);
    {
        std::ofstream(dir / "config.txt") << config_text;
    }

    RunManifest manifest;
    manifest.run_id = id;
    manifest.config_text = config_text;
    manifest.files = {"config.txt", "energy.csv"};

    EnergyCsvWriter csv(dir / "energy.csv");
    const int every = cfg.scheme.snapshot_every;
    auto observer = [&](const SchemeState& s, const StepRecord& r) {
        csv.append(r);
        if (r.step > 0) manifest.wall_seconds.push_back(r.wall_seconds);
        if (every > 0 && s.step % every == 0) {
            const std::string name = snapshot_name(s.step);
            write_vtk_snapshot(dir / name, mesh, {{"U", &s.u}, {"W", &s.w}},
                               "anipf t=" + format_real(s.t));
            manifest.files.push_back(name);
        }
        if (!quiet) {
            std::cout << "step " << r.step << "  t=" << r.t << "  E=" << r.energy.e_gamma_h
                      << "  mass=" << r.energy.mass << "  iters=" << r.stats.iterations
                      << (s.energy_increase ? "  [energy increase]" : "") << '\n';
        }
    };

    int status = 0;
    try {
        const RunSummary summary = run_simulation(cfg.scheme, mesh, aniso, cfg.geometry, observer);
        manifest.steps = summary.final_state.step;
        manifest.energy_increases = summary.energy_increases;
        manifest.unconverged_steps = summary.unconverged_steps;
        manifest.final_energy = summary.final_state.energy.e_gamma_h;
        std::cout << "run " << id << ": " << manifest.steps << " steps, final E = "
                  << format_real(manifest.final_energy)
                  << ", energy increases = " << summary.energy_increases << '\n';
    } catch (const SimulationError& e) {
        std::cerr << "error: " << e.what() << "; dumping states\n";
        write_vtk_snapshot(dir / "failed_last_good.vtk", mesh,
                           {{"U", &e.last_good.u}, {"W", &e.last_good.w}});
        write_vtk_snapshot(dir / "failed_step.vtk", mesh, {{"U", &e.failed.u}, {"W", &e.failed.w}});
        manifest.files.push_back("failed_last_good.vtk");
        manifest.files.push_back("failed_step.vtk");
        manifest.steps = e.last_good.step;
        manifest.unconverged_steps = 1;
        status = 2;
    }
    write_manifest(dir / "manifest.json", manifest);
    std::cout << "output: " << dir.string() << '\n';
    return status;
}

int cmd_verify(const std::string& spec, int dim, std::size_t samples, std::uint64_t seed) {
    const AnisotropyDensity aniso = parse_anisotropy(spec, dim);
    const InequalityReport r = check_inequalities(aniso, samples, seed);
    auto line = [](const char* name, double v) {
        std::printf("  %-26s max normalized violation % .3e  %s\n", name, v,
                    v <= 1e-10 ? "ok" : "VIOLATED");
    };
    std::printf("anisotropy %s (d=%d, L=%zu), %zu samples, seed %llu\n", spec.c_str(), dim,
                aniso.size(), samples, static_cast<unsigned long long>(seed));
    line("dual estimate", r.dual_estimate);
    line("monotonicity", r.monotonicity);
    line("cauchy-schwarz bound", r.cauchy_schwarz);
    line("linearized monotonicity", r.linearized_monotonicity);
    line("stability inequality", r.stability);
    std::printf("failing pairs: %zu\n", r.failures);
    return r.failures == 0 ? 0 : 1;
}

int cmd_sweep(const std::string& config_path, const std::vector<double>& factors, int steps) {
    const RunConfig cfg = load_config(config_path);
    const SimplicialMesh mesh = build_mesh(cfg);
    const AnisotropyDensity aniso = parse_anisotropy(cfg.anisotropy, cfg.domain.dim);
    const double bound = implicit_step_bound(cfg.scheme);
    std::printf("scheme %s, implicit-variant step bound %.6e\n",
                std::string(to_string(cfg.scheme.scheme)).c_str(), bound);
    std::printf("%12s %12s %10s %14s %10s %12s\n", "factor", "tau", "variant", "max_stab_res",
                "increases", "unconverged");
    for (double f : factors) {
        for (bool implicit : {false, true}) {
            SchemeConfig sc = cfg.scheme;
            sc.tau = f * bound;
            sc.t_end = steps * sc.tau;
            sc.implicit = implicit;
            const RunSummary s = run_simulation(sc, mesh, aniso, cfg.geometry, {}, false);
            std::printf("%12.4g %12.4e %10s %14.4e %10d %12d\n", f, sc.tau,
                        implicit ? "implicit" : "semi", s.max_stability_residual,
                        s.energy_increases, s.unconverged_steps);
        }
    }
    return 0;
}

int cmd_circle(const std::string& config_path, std::vector<double> times) {
    RunConfig cfg = load_config(config_path);
    const auto* ball = std::get_if<Ball>(&cfg.geometry);
    if (cfg.scheme.scheme != SchemeKind::allen_cahn || ball == nullptr || cfg.domain.dim != 2) {
        std::cerr << "benchmark-circle needs a 2d allen_cahn run with a circle geometry\n";
        return 1;
    }
    const SimplicialMesh mesh = build_mesh(cfg);
    const AnisotropyDensity aniso = parse_anisotropy(cfg.anisotropy, cfg.domain.dim);
    const double r0 = ball->radius;
    const double tol = std::max(2.0 * mesh.mesh_size(), cfg.scheme.eps());
    cfg.scheme.t_end = *std::max_element(times.begin(), times.end());

    std::vector<std::pair<int, double>> targets;
    for (double t : times) targets.emplace_back(static_cast<int>(std::lround(t / cfg.scheme.tau)), t);
    int failures = 0;
    std::printf("%10s %12s %12s %12s\n", "t", "radius", "oracle", "error");
    run_simulation(cfg.scheme, mesh, aniso, cfg.geometry, [&](const SchemeState& s, const StepRecord&) {
        for (const auto& [step, t] : targets) {
            if (s.step != step) continue;
            const LevelSet ls = zero_level_set(mesh, s.u, ball->center);
            const double oracle = std::sqrt(std::max(0.0, r0 * r0 - 2.0 * t));
            const double radius = ls.empty() ? 0.0 : ls.mean_radius;
            const double err = std::abs(radius - oracle);
            if (err > tol) ++failures;
            std::printf("%10.4g %12.6f %12.6f %12.3e\n", t, radius, oracle, err);
        }
    });
    std::printf("tolerance max(2h, eps) = %.4e: %s\n", tol, failures == 0 ? "pass" : "FAIL");
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anisotropic Allen-Cahn / Cahn-Hilliard obstacle-potential solver"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run a simulation from a config file");
    std::string config_path, out_dir;
    bool quiet = false;
    run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Override the output directory");
    run->add_flag("-q,--quiet", quiet, "Only print the summary");

    auto* verify = app.add_subcommand("verify-anisotropy", "Check the anisotropy inequality suite");
    std::string spec;
    int dim = 2;
    std::size_t samples = 100000;
    std::uint64_t seed = 42;
    verify->add_option("spec", spec, "Anisotropy spec, e.g. l1reg:0.01")->required();
    verify->add_option("--dim", dim, "Spatial dimension")->check(CLI::IsMember({2, 3}));
    verify->add_option("--samples", samples, "Number of random (p, q) pairs");
    verify->add_option("--seed", seed, "Random seed");

    auto* sweep = app.add_subcommand("stability-sweep",
                                     "Compare semi-implicit and implicit steps over step sizes");
    std::vector<double> factors{1.0, 100.0, 10000.0};
    int steps = 10;
    sweep->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--tau-factors", factors, "Multiples of the implicit step bound")->delimiter(',');
    sweep->add_option("--steps", steps, "Steps per run");

    auto* circle = app.add_subcommand("benchmark-circle",
                                      "Compare a shrinking circle with r(t) = sqrt(r0^2 - 2t)");
    std::vector<double> times{0.01, 0.02, 0.03};
    circle->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    circle->add_option("--times", times, "Comparison times")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir, quiet);
        if (verify->parsed()) return cmd_verify(spec, dim, samples, seed);
        if (sweep->parsed()) return cmd_sweep(config_path, factors, steps);
        if (circle->parsed()) return cmd_circle(config_path, times);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
