#pragma once

#include "anipf/anisotropy.hpp"
#include "anipf/mesh.hpp"
#include "anipf/schemes.hpp"

#include <stdexcept>
#include <string>
#include <string_view>

namespace anipf {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct DomainParams {
    int dim = 2;
    double half_width = 0.5;
    int subdivisions = 128;
};

/// Fully resolved run configuration.
///
/// Text form: `key = value` lines grouped in sections [domain], [anisotropy],
/// [scheme], [geometry], [output]; `#` starts a comment. An optional
/// `preset = <name>` line before the first section loads a named experiment
/// whose values later keys override. Unknown keys are errors.
struct RunConfig {
    std::string preset;
    DomainParams domain;
    std::string anisotropy = "iso";
    SchemeConfig scheme;
    Geometry geometry = Ball{Vec::Zero(2), 0.3};
    std::string output_dir = "run";
};

/// Throws ConfigError.
RunConfig parse_config(std::string_view text);

/// Inverse of parse_config on resolved configurations (no preset line; all
/// values written explicitly, reals with 17 significant digits).
std::string emit_config(const RunConfig& config);

/// Anisotropy grammar:
///   iso
///   l1reg:<delta>
///   l1reg:<delta>:rot=<deg>              (d = 2)
///   l1reg:<delta>:rot=<axis>,<deg>       (d = 3, axis x|y|z)
///   matrices:<g11,g12,...>;<...>         (row-major entries per G_l)
/// Throws ConfigError.
AnisotropyDensity parse_anisotropy(std::string_view spec, int dim);

SimplicialMesh build_mesh(const RunConfig& config);

/// 16 hex digits identifying a resolved configuration (FNV-1a of its text form).
std::string run_id(const RunConfig& config);

/// Formats a real with 17 significant digits.
std::string format_real(double v);

}  // namespace anipf
