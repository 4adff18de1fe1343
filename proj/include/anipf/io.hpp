#pragma once

#include "anipf/config.hpp"
#include "anipf/mesh.hpp"
#include "anipf/schemes.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace anipf {

inline constexpr std::string_view kEnergyCsvHeader =
    "step,t,E_gamma_h,F_gamma_h,mass,grad_energy,pot_energy,stab_residual,solver_iters,"
    "solver_residual,mobility_regularized";

/// Appends per-step rows to an energy CSV. Opening an existing file resumes
/// after its last step: rows whose step index is not larger are dropped, so
/// a restarted run never duplicates a step.
class EnergyCsvWriter {
public:
    /// Throws std::runtime_error if the file cannot be opened or has a
    /// different header.
    explicit EnergyCsvWriter(const std::filesystem::path& path);

    /// Returns false if the row was skipped as already present.
    bool append(const StepRecord& record);

    int last_step() const { return last_step_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    int last_step_ = -1;
};

/// Writes (or resumes) `path` with all `records`.
void write_energy_csv(const std::filesystem::path& path, const std::vector<StepRecord>& records);

/// One CSV row back as numbers (F empty -> nullopt).
struct EnergyCsvRow {
    int step = 0;
    double t = 0.0;
    double e_gamma_h = 0.0;
    std::optional<double> f_gamma_h;
    double mass = 0.0;
    double grad_energy = 0.0;
    double pot_energy = 0.0;
    double stab_residual = 0.0;
    int solver_iters = 0;
    double solver_residual = 0.0;
    bool mobility_regularized = false;
};

std::vector<EnergyCsvRow> read_energy_csv(const std::filesystem::path& path);

using NamedField = std::pair<std::string, const NodalField*>;

/// Legacy ASCII VTK unstructured grid (triangles / tetrahedra) with one
/// SCALARS block per field. Throws std::invalid_argument on a field length
/// mismatch, std::runtime_error on IO failure.
void write_vtk_snapshot(const std::filesystem::path& path, const SimplicialMesh& mesh,
                        const std::vector<NamedField>& fields, std::string_view title = "anipf");

struct RunManifest {
    std::string run_id;
    std::string config_text;
    std::vector<std::string> files;
    std::vector<double> wall_seconds;  ///< per step
    int steps = 0;
    int energy_increases = 0;
    int unconverged_steps = 0;
    double final_energy = 0.0;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

}  // namespace anipf
