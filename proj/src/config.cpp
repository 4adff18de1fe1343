#include "anipf/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace anipf {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

/// Reals, optionally with a trailing `pi` factor: "0.5", "16pi", "pi".
double parse_real(std::string_view text, std::string_view what) {
    std::string s(trim(text));
    double factor = 1.0;
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
        factor = std::numbers::pi;
        s.resize(s.size() - 2);
        while (!s.empty() && (s.back() == '*' || std::isspace(static_cast<unsigned char>(s.back())))) {
            s.pop_back();
        }
        if (s.empty()) return factor;
    }
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
        throw ConfigError("invalid number for " + std::string(what) + ": '" + std::string(text) + "'");
    }
    return v * factor;
}

int parse_int(std::string_view text, std::string_view what) {
    const double v = parse_real(text, what);
    if (v != std::floor(v) || std::abs(v) > 1e9) {
        throw ConfigError("expected an integer for " + std::string(what));
    }
    return static_cast<int>(v);
}

bool parse_bool(std::string_view text, std::string_view what) {
    const auto t = trim(text);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError("expected true/false for " + std::string(what));
}

Vec parse_vec(std::string_view text, std::string_view what) {
    const auto parts = split(text, ',');
    if (parts.size() < 2 || parts.size() > 3) {
        throw ConfigError("expected 2 or 3 comma-separated values for " + std::string(what));
    }
    Vec v(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Eigen::Index>(i)] = parse_real(parts[i], what);
    return v;
}

std::string format_vec(const Vec& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += format_real(v[i]);
    }
    return s;
}

Mobility parse_mobility(std::string_view text) {
    const auto t = trim(text);
    if (t == "degenerate") return Mobility::degenerate();
    if (t.starts_with("constant:")) {
        const double b0 = parse_real(t.substr(9), "mobility");
        if (!(b0 > 0.0)) throw ConfigError("mobility constant must be positive");
        return Mobility::constant(b0);
    }
    throw ConfigError("mobility must be 'degenerate' or 'constant:<b0>'");
}

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"", {"preset"}},
        {"domain", {"dim", "H", "N"}},
        {"anisotropy", {"spec"}},
        {"scheme",
         {"scheme", "eps_inv", "theta", "alpha", "mobility", "w_bdry", "tau", "t_end", "implicit",
          "tol", "max_iter", "max_active_set_updates", "obstacle_method", "mobility_floor"}},
        {"geometry", {"type", "center", "radius", "circles", "spheres", "half_extents", "value"}},
        {"output", {"dir", "snapshot_every"}},
    };
    return keys;
}

void apply_preset(RunConfig& c, std::string_view name) {
    auto unavailable = [&](std::string_view ani) {
        throw ConfigError("preset " + std::string(name) + " uses anisotropy " + std::string(ani) +
                          ", whose matrices are not available; write the experiment out with "
                          "an explicit [anisotropy] spec, e.g. a matrices:... list or the "
                          "substitute l1reg:0.01");
    };
    SchemeConfig& s = c.scheme;
    if (name == "fig1") {
        c.anisotropy = "l1reg:0.01";
        s.scheme = SchemeKind::allen_cahn;
        s.tau = 1e-4;
        s.t_end = 0.05;
        c.geometry = Ball{Vec::Zero(2), 0.3};
    } else if (name == "fig2" || name == "fig3") {
        unavailable("ani3");
    } else if (name == "fig4") {
        c.anisotropy = "l1reg:0.01";
        s.scheme = SchemeKind::cahn_hilliard_dirichlet;
        s.w_bdry = -65.0;
        s.tau = 1e-5;
        s.t_end = 1e-3;
        c.geometry = Uniform{1.0};
    } else if (name == "fig5") {
        c.domain.half_width = 8.0;
        c.domain.subdivisions = 4096;
        c.anisotropy = "l1reg:0.3";
        s.scheme = SchemeKind::cahn_hilliard_dirichlet;
        s.eps_inv = 32.0 * std::numbers::pi;
        s.alpha = 0.03;
        s.w_bdry = -2.0;
        s.tau = 1e-4;
        s.t_end = 7.5;
        c.geometry = Ball{Vec::Zero(2), 0.1};
    } else if (name == "fig6") {
        unavailable("ani2");
    } else if (name == "fig7") {
        unavailable("ani4");
    } else if (name == "fig8") {
        c.domain.dim = 3;
        c.anisotropy = "l1reg:0.01:rot=z,45";
        s.scheme = SchemeKind::cahn_hilliard_neumann;
        s.tau = 1e-5;
        s.t_end = 5e-3;
        Vec half(3);
        half << 0.4, 0.05, 0.05;
        c.geometry = Cuboid{Vec::Zero(3), half};
    } else {
        throw ConfigError("unknown preset '" + std::string(name) + "'");
    }
}

Geometry parse_geometry(const std::map<std::string, std::string>& g, int dim) {
    auto get = [&](const std::string& k) -> const std::string* {
        auto it = g.find(k);
        return it == g.end() ? nullptr : &it->second;
    };
    auto require = [&](const std::string& k) -> const std::string& {
        const std::string* v = get(k);
        if (!v) throw ConfigError("[geometry] missing key '" + k + "'");
        return *v;
    };
    auto center = [&]() {
        const std::string* v = get("center");
        Vec c = v ? parse_vec(*v, "center") : Vec::Zero(dim);
        if (c.size() != dim) throw ConfigError("[geometry] center dimension mismatch");
        return c;
    };
    const std::string& type = require("type");
    std::set<std::string> allowed{"type"};
    Geometry out;
    if (type == "circle" || type == "sphere") {
        if ((type == "circle") != (dim == 2)) {
            throw ConfigError("[geometry] " + type + " does not match dim = " + std::to_string(dim));
        }
        allowed.insert({"center", "radius"});
        const double r = parse_real(require("radius"), "radius");
        if (!(r > 0.0)) throw ConfigError("[geometry] radius must be positive");
        out = Ball{center(), r};
    } else if (type == "circles" || type == "spheres") {
        allowed.insert(type);
        BallUnion u;
        for (auto item : split(require(type), ';')) {
            if (item.empty()) continue;
            const Vec v = parse_vec(item, type);
            if (v.size() != dim + 1) {
                throw ConfigError("[geometry] each entry needs " + std::to_string(dim) +
                                  " center coordinates and a radius");
            }
            Ball b{v.head(dim), v[dim]};
            if (!(b.radius > 0.0)) throw ConfigError("[geometry] radius must be positive");
            u.balls.push_back(b);
        }
        if (u.balls.empty()) throw ConfigError("[geometry] empty union");
        out = u;
    } else if (type == "cuboid") {
        allowed.insert({"center", "half_extents"});
        Vec h = parse_vec(require("half_extents"), "half_extents");
        if (h.size() != dim || !(h.minCoeff() > 0.0)) {
            throw ConfigError("[geometry] half_extents must have dim positive entries");
        }
        out = Cuboid{center(), h};
    } else if (type == "uniform") {
        allowed.insert("value");
        const double v = parse_real(require("value"), "value");
        if (!(std::abs(v) <= 1.0)) throw ConfigError("[geometry] uniform value must lie in [-1, 1]");
        out = Uniform{v};
    } else {
        throw ConfigError("[geometry] unknown type '" + type + "'");
    }
    for (const auto& [k, v] : g) {
        if (!allowed.count(k)) throw ConfigError("[geometry] key '" + k + "' does not apply to " + type);
    }
    return out;
}

int geometry_dim(const Geometry& g) {
    return std::visit(
        [](const auto& x) -> int {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Ball>) return static_cast<int>(x.center.size());
            else if constexpr (std::is_same_v<T, BallUnion>) return static_cast<int>(x.balls.front().center.size());
            else if constexpr (std::is_same_v<T, Cuboid>) return static_cast<int>(x.center.size());
            else return -1;
        },
        g);
}

}  // namespace

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

AnisotropyDensity parse_anisotropy(std::string_view spec_text, int dim) {
    const auto spec = trim(spec_text);
    try {
        if (spec == "iso") return AnisotropyDensity::isotropic(dim);
        if (spec == "ani2" || spec == "ani3" || spec == "ani4") {
            throw ConfigError("anisotropy " + std::string(spec) +
                              " is not available; give its matrices explicitly (matrices:...)");
        }
        if (spec.starts_with("l1reg:")) {
            const auto parts = split(spec.substr(6), ':');
            const double delta = parse_real(parts[0], "delta");
            if (!(delta > 0.0)) throw ConfigError("l1reg: delta must be positive");
            AnisotropyDensity a = make_regularized_l1(dim, delta);
            if (parts.size() == 1) return a;
            if (parts.size() != 2 || !parts[1].starts_with("rot=")) {
                throw ConfigError("l1reg: expected ':rot=...' after delta");
            }
            const auto rot = split(parts[1].substr(4), ',');
            const double deg_to_rad = std::numbers::pi / 180.0;
            if (dim == 2) {
                if (rot.size() != 1) throw ConfigError("l1reg: 2d rotation is rot=<angle_deg>");
                return a.rotated(rotation_2d(parse_real(rot[0], "angle") * deg_to_rad));
            }
            if (rot.size() != 2 || rot[0].size() != 1 || rot[0][0] < 'x' || rot[0][0] > 'z') {
                throw ConfigError("l1reg: 3d rotation is rot=<x|y|z>,<angle_deg>");
            }
            return a.rotated(rotation_3d(rot[0][0] - 'x', parse_real(rot[1], "angle") * deg_to_rad));
        }
        if (spec.starts_with("matrices:")) {
            std::vector<Mat> mats;
            for (auto m : split(spec.substr(9), ';')) {
                if (m.empty()) continue;
                const auto entries = split(m, ',');
                if (entries.size() != static_cast<std::size_t>(dim * dim)) {
                    throw ConfigError("matrices: each matrix needs " + std::to_string(dim * dim) +
                                      " entries");
                }
                Mat g(dim, dim);
                for (int i = 0; i < dim * dim; ++i) g(i / dim, i % dim) = parse_real(entries[i], "matrix entry");
                mats.push_back(g);
            }
            return AnisotropyDensity(dim, std::move(mats));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("anisotropy '") + std::string(spec) + "': " + e.what());
    }
    throw ConfigError("unknown anisotropy spec '" + std::string(spec) + "'");
}

RunConfig parse_config(std::string_view text) {
    // section -> key -> (value, line)
    std::map<std::string, std::map<std::string, std::pair<std::string, int>>> entries;
    std::string section;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + "malformed section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (!known_keys().count(section) || section.empty()) {
                throw ConfigError(where + "unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (!known_keys().at(section).count(key)) {
            throw ConfigError(where + "unknown key '" + key + "'" +
                              (section.empty() ? std::string() : " in [" + section + "]"));
        }
        if (!entries[section].emplace(key, std::make_pair(value, line_no)).second) {
            throw ConfigError(where + "duplicate key '" + key + "'");
        }
    }

    auto get = [&](const std::string& sec, const std::string& key) -> const std::string* {
        auto s = entries.find(sec);
        if (s == entries.end()) return nullptr;
        auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second.first;
    };

    RunConfig c;
    const std::string* preset = get("", "preset");
    if (preset) {
        c.preset = *preset;
        apply_preset(c, *preset);
    } else {
        for (const char* key : {"scheme", "tau", "t_end"}) {
            if (!get("scheme", key)) throw ConfigError(std::string("[scheme] missing required key '") + key + "'");
        }
    }

    if (auto v = get("domain", "dim")) c.domain.dim = parse_int(*v, "dim");
    if (c.domain.dim != 2 && c.domain.dim != 3) throw ConfigError("[domain] dim must be 2 or 3");
    if (auto v = get("domain", "H")) c.domain.half_width = parse_real(*v, "H");
    if (auto v = get("domain", "N")) c.domain.subdivisions = parse_int(*v, "N");
    if (!(c.domain.half_width > 0.0)) throw ConfigError("[domain] H must be positive");
    if (c.domain.subdivisions < 1) throw ConfigError("[domain] N must be at least 1");

    if (auto v = get("anisotropy", "spec")) c.anisotropy = *v;
    parse_anisotropy(c.anisotropy, c.domain.dim);  // validate now

    SchemeConfig& s = c.scheme;
    if (auto v = get("scheme", "scheme")) {
        auto k = scheme_from_string(*v);
        if (!k) throw ConfigError("[scheme] unknown scheme '" + *v + "'");
        s.scheme = *k;
    }
    if (auto v = get("scheme", "eps_inv")) s.eps_inv = parse_real(*v, "eps_inv");
    if (auto v = get("scheme", "theta")) s.theta = parse_real(*v, "theta");
    if (auto v = get("scheme", "alpha")) s.alpha = parse_real(*v, "alpha");
    if (auto v = get("scheme", "mobility")) s.mobility = parse_mobility(*v);
    if (auto v = get("scheme", "w_bdry")) {
        if (s.scheme != SchemeKind::cahn_hilliard_dirichlet) {
            throw ConfigError("[scheme] w_bdry requires scheme = cahn_hilliard_dirichlet");
        }
        s.w_bdry = parse_real(*v, "w_bdry");
    }
    if (auto v = get("scheme", "tau")) s.tau = parse_real(*v, "tau");
    if (auto v = get("scheme", "t_end")) s.t_end = parse_real(*v, "t_end");
    if (auto v = get("scheme", "implicit")) s.implicit = parse_bool(*v, "implicit");
    if (auto v = get("scheme", "tol")) s.solver.tol = parse_real(*v, "tol");
    if (auto v = get("scheme", "max_iter")) s.solver.max_iter = parse_int(*v, "max_iter");
    if (auto v = get("scheme", "max_active_set_updates")) {
        s.solver.max_active_set_updates = parse_int(*v, "max_active_set_updates");
    }
    if (auto v = get("scheme", "obstacle_method")) {
        if (*v == "hybrid") s.solver.method = ObstacleMethod::hybrid;
        else if (*v == "pgs") s.solver.method = ObstacleMethod::projected_gauss_seidel;
        else throw ConfigError("[scheme] obstacle_method must be 'hybrid' or 'pgs'");
    }
    if (auto v = get("scheme", "mobility_floor")) s.mobility_floor = parse_real(*v, "mobility_floor");

    if (entries.count("geometry")) {
        std::map<std::string, std::string> g;
        for (const auto& [k, v] : entries["geometry"]) g[k] = v.first;
        c.geometry = parse_geometry(g, c.domain.dim);
    } else if (const int gd = geometry_dim(c.geometry); gd != -1 && gd != c.domain.dim) {
        if (std::holds_alternative<Ball>(c.geometry)) {
            std::get<Ball>(c.geometry).center = Vec::Zero(c.domain.dim);
        } else {
            throw ConfigError("[geometry] preset geometry does not match dim");
        }
    }

    if (auto v = get("output", "dir")) c.output_dir = *v;
    if (auto v = get("output", "snapshot_every")) s.snapshot_every = parse_int(*v, "snapshot_every");

    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return c;
}

std::string emit_config(const RunConfig& c) {
    std::ostringstream o;
    const SchemeConfig& s = c.scheme;
    o << "[domain]\n"
      << "dim = " << c.domain.dim << "\n"
      << "H = " << format_real(c.domain.half_width) << "\n"
      << "N = " << c.domain.subdivisions << "\n\n"
      << "[anisotropy]\n"
      << "spec = " << c.anisotropy << "\n\n"
      << "[scheme]\n"
      << "scheme = " << to_string(s.scheme) << "\n"
      << "eps_inv = " << format_real(s.eps_inv) << "\n"
      << "theta = " << format_real(s.theta) << "\n"
      << "alpha = " << format_real(s.alpha) << "\n"
      << "mobility = "
      << (s.mobility.is_degenerate() ? std::string("degenerate")
                                     : "constant:" + format_real(s.mobility.b0()))
      << "\n";
    if (s.scheme == SchemeKind::cahn_hilliard_dirichlet) o << "w_bdry = " << format_real(s.w_bdry) << "\n";
    o << "tau = " << format_real(s.tau) << "\n"
      << "t_end = " << format_real(s.t_end) << "\n"
      << "implicit = " << (s.implicit ? "true" : "false") << "\n"
      << "tol = " << format_real(s.solver.tol) << "\n"
      << "max_iter = " << s.solver.max_iter << "\n"
      << "max_active_set_updates = " << s.solver.max_active_set_updates << "\n"
      << "obstacle_method = " << (s.solver.method == ObstacleMethod::hybrid ? "hybrid" : "pgs") << "\n"
      << "mobility_floor = " << format_real(s.mobility_floor) << "\n\n"
      << "[geometry]\n";
    std::visit(
        [&](const auto& g) {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, Ball>) {
                o << "type = " << (g.center.size() == 2 ? "circle" : "sphere") << "\n"
                  << "center = " << format_vec(g.center) << "\n"
                  << "radius = " << format_real(g.radius) << "\n";
            } else if constexpr (std::is_same_v<T, BallUnion>) {
                const char* key = g.balls.front().center.size() == 2 ? "circles" : "spheres";
                o << "type = " << key << "\n" << key << " = ";
                for (std::size_t i = 0; i < g.balls.size(); ++i) {
                    if (i) o << "; ";
                    o << format_vec(g.balls[i].center) << ", " << format_real(g.balls[i].radius);
                }
                o << "\n";
            } else if constexpr (std::is_same_v<T, Cuboid>) {
                o << "type = cuboid\n"
                  << "center = " << format_vec(g.center) << "\n"
                  << "half_extents = " << format_vec(g.half_extents) << "\n";
            } else {
                o << "type = uniform\n"
                  << "value = " << format_real(g.value) << "\n";
            }
        },
        c.geometry);
    o << "\n[output]\n"
      << "dir = " << c.output_dir << "\n"
      << "snapshot_every = " << s.snapshot_every << "\n";
    return o.str();
}

SimplicialMesh build_mesh(const RunConfig& config) {
    return SimplicialMesh::uniform(config.domain.dim, config.domain.half_width,
                                   config.domain.subdivisions);
}

std::string run_id(const RunConfig& config) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : emit_config(config)) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace anipf
