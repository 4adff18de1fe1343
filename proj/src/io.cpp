#include "anipf/io.hpp"

#include "json.hpp"

#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace anipf {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

EnergyCsvWriter::EnergyCsvWriter(const std::filesystem::path& path) : path_(path) {
    bool fresh = true;
    if (std::filesystem::exists(path) && std::filesystem::file_size(path) > 0) {
        std::ifstream in(path);
        std::string line;
        std::getline(in, line);
        if (line != kEnergyCsvHeader) {
            throw std::runtime_error("energy csv " + path.string() + " has an unexpected header");
        }
        fresh = false;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            last_step_ = std::atoi(line.substr(0, line.find(',')).c_str());
        }
    }
    out_.open(path, std::ios::app);
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    if (fresh) out_ << kEnergyCsvHeader << '\n';
}

bool EnergyCsvWriter::append(const StepRecord& r) {
    if (r.step <= last_step_) return false;
    out_ << r.step << ',' << format_real(r.t) << ',' << format_real(r.energy.e_gamma_h) << ','
         << (r.energy.f_gamma_h ? format_real(*r.energy.f_gamma_h) : std::string()) << ','
         << format_real(r.energy.mass) << ',' << format_real(r.energy.gradient_energy) << ','
         << format_real(r.energy.potential_energy) << ','
         << format_real(r.energy.stability_residual) << ',' << r.stats.iterations << ','
         << format_real(r.stats.residual) << ',' << (r.mobility_regularized ? 1 : 0) << '\n';
    out_.flush();
    if (!out_) throw std::runtime_error("write to " + path_.string() + " failed");
    last_step_ = r.step;
    return true;
}

void write_energy_csv(const std::filesystem::path& path, const std::vector<StepRecord>& records) {
    EnergyCsvWriter writer(path);
    for (const auto& r : records) writer.append(r);
}

std::vector<EnergyCsvRow> read_energy_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != kEnergyCsvHeader) throw std::runtime_error("unexpected energy csv header");
    std::vector<EnergyCsvRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = split_csv(line);
        if (c.size() != 11) throw std::runtime_error("malformed energy csv row: " + line);
        EnergyCsvRow r;
        r.step = std::stoi(c[0]);
        r.t = std::stod(c[1]);
        r.e_gamma_h = std::stod(c[2]);
        if (!c[3].empty()) r.f_gamma_h = std::stod(c[3]);
        r.mass = std::stod(c[4]);
        r.grad_energy = std::stod(c[5]);
        r.pot_energy = std::stod(c[6]);
        r.stab_residual = std::stod(c[7]);
        r.solver_iters = std::stoi(c[8]);
        r.solver_residual = std::stod(c[9]);
        r.mobility_regularized = c[10] == "1";
        rows.push_back(r);
    }
    return rows;
}

void write_vtk_snapshot(const std::filesystem::path& path, const SimplicialMesh& mesh,
                        const std::vector<NamedField>& fields, std::string_view title) {
    for (const auto& [name, f] : fields) {
        if (f == nullptr || static_cast<std::size_t>(f->size()) != mesh.num_vertices()) {
            throw std::invalid_argument("write_vtk_snapshot: field '" + name +
                                        "' does not match the vertex count");
        }
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");

    const std::size_t nv = mesh.num_vertices();
    const std::size_t ne = mesh.num_elements();
    const int per = mesh.vertices_per_element();

    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << nv << " double\n";
    for (std::size_t i = 0; i < nv; ++i) {
        const Vec& x = mesh.vertex(i);
        out << format_real(x[0]) << ' ' << format_real(x[1]) << ' '
            << (mesh.dim() == 3 ? format_real(x[2]) : std::string("0")) << '\n';
    }
    out << "CELLS " << ne << ' ' << ne * (per + 1) << '\n';
    for (std::size_t e = 0; e < ne; ++e) {
        out << per;
        for (int v : mesh.element(e)) out << ' ' << v;
        out << '\n';
    }
    out << "CELL_TYPES " << ne << '\n';
    const int cell_type = mesh.dim() == 2 ? 5 : 10;  // VTK_TRIANGLE / VTK_TETRA
    for (std::size_t e = 0; e < ne; ++e) out << cell_type << '\n';

    if (!fields.empty()) out << "POINT_DATA " << nv << '\n';
    for (const auto& [name, f] : fields) {
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (Eigen::Index i = 0; i < f->size(); ++i) out << format_real((*f)[i]) << '\n';
    }
    if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
    nlohmann::json j;
    j["run_id"] = m.run_id;
    j["config"] = m.config_text;
    j["files"] = m.files;
    j["wall_seconds_per_step"] = m.wall_seconds;
    j["steps"] = m.steps;
    j["energy_increases"] = m.energy_increases;
    j["unconverged_steps"] = m.unconverged_steps;
    j["final_energy"] = m.final_energy;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

}  // namespace anipf
