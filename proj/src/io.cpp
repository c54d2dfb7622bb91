#include "polyscat/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include "polyscat/errors.hpp"

namespace polyscat::io {

namespace fs = std::filesystem;

std::string read_text(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("cannot read " + path.string());
    return ss.str();
}

void atomic_write(const fs::path &path, std::string_view contents) {
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("output directory does not exist: " + dir.string());
    const fs::path tmp = dir / ("." + path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + path.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            fs::remove(tmp, ec);
            throw IoError("short write to " + path.string());
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move output into place at " + path.string());
    }
}

Json parse_json(std::string_view text, const std::string &what) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error &e) {
        throw ValidationError(what + ": malformed JSON at byte " + std::to_string(e.byte));
    }
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t h) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = digits[h & 0xf];
    return s;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

// ---- field readers ----------------------------------------------------------

namespace {

double number(const Json &j, const std::string &field) {
    if (!j.is_number()) throw ValidationError(field + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ValidationError(field + ": must be finite");
    return v;
}

Vec2 point(const Json &j, const std::string &field) {
    if (!j.is_array() || j.size() != 2) throw ValidationError(field + ": expected [x, y]");
    return {number(j[0], field + "[0]"), number(j[1], field + "[1]")};
}

int integer(const Json &j, const std::string &field) {
    if (!j.is_number_integer()) throw ValidationError(field + ": expected an integer");
    return j.get<int>();
}

const Json &member(const Json &obj, const char *key, const std::string &prefix) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError(prefix + key + ": missing");
    return *it;
}

void reject_unknown(const Json &obj, const std::set<std::string> &known, const std::string &prefix) {
    for (const auto &[key, value] : obj.items())
        if (!known.contains(key)) throw ValidationError(prefix + key + ": unknown field");
}

Json point_json(Vec2 p) { return Json::array({p.x, p.y}); }

}  // namespace

// ---- scenes -----------------------------------------------------------------

Scatterer2D scene_from_json(const Json &j) {
    if (!j.is_object()) throw ValidationError("scene: expected an object");
    reject_unknown(j, {"polygons", "bc", "class"}, "scene.");
    const Json &polys = member(j, "polygons", "scene.");
    if (!polys.is_array()) throw ValidationError("scene.polygons: expected an array of polygons");
    std::vector<Polygon> polygons;
    for (std::size_t p = 0; p < polys.size(); ++p) {
        const std::string field = "scene.polygons[" + std::to_string(p) + "]";
        if (!polys[p].is_array() || polys[p].size() < 3)
            throw ValidationError(field + ": expected at least 3 vertices");
        std::vector<Vec2> vs;
        for (std::size_t v = 0; v < polys[p].size(); ++v)
            vs.push_back(point(polys[p][v], field + "[" + std::to_string(v) + "]"));
        polygons.emplace_back(std::move(vs));
    }
    BoundaryCondition bc = BoundaryCondition::hard;
    if (const auto it = j.find("bc"); it != j.end()) {
        if (!it->is_string()) throw ValidationError("scene.bc: expected \"hard\" or \"soft\"");
        try {
            bc = boundary_condition_from_string(it->get<std::string>());
        } catch (const ValidationError &e) {
            throw ValidationError(std::string("scene.") + e.what());
        }
    }
    ClassParams params;
    if (const auto it = j.find("class"); it != j.end()) {
        if (!it->is_object()) throw ValidationError("scene.class: expected an object");
        reject_unknown(*it, {"h", "L", "R"}, "scene.class.");
        if (it->contains("h")) params.h = number(it->at("h"), "scene.class.h");
        if (it->contains("L")) params.L = number(it->at("L"), "scene.class.L");
        if (it->contains("R")) params.R = number(it->at("R"), "scene.class.R");
        if (params.h <= 0.0) throw ValidationError("scene.class.h: must be positive");
        if (params.L <= 0.0) throw ValidationError("scene.class.L: must be positive");
        if (params.R <= 0.0) throw ValidationError("scene.class.R: must be positive");
    }
    return Scatterer2D(std::move(polygons), bc, params);
}

Json scene_to_json(const Scatterer2D &s) {
    Json polys = Json::array();
    for (const Polygon &p : s.polygons()) {
        Json vs = Json::array();
        for (Vec2 v : p.vertices()) vs.push_back(point_json(v));
        polys.push_back(std::move(vs));
    }
    const ClassParams &c = s.class_params();
    return Json{{"polygons", std::move(polys)}, {"bc", to_string(s.bc())}, {"class", {{"h", c.h}, {"L", c.L}, {"R", c.R}}}};
}

Scatterer2D load_scene(const fs::path &path) { return scene_from_json(parse_json(read_text(path), "scene")); }

void save_scene(const fs::path &path, const Scatterer2D &s) { atomic_write(path, scene_to_json(s).dump(2) + "\n"); }

// ---- configs ----------------------------------------------------------------

ScatterConfig config_from_json(const Json &j) {
    if (!j.is_object()) throw ValidationError("config: expected an object");
    reject_unknown(j,
                   {"k", "k_low", "k_high", "directions", "R", "R1", "rho_tilde", "x0", "R2", "quad_order", "grading",
                    "n_far", "chief_points", "three_spheres_cap", "rho0", "chain", "tolerances"},
                   "config.");
    ScatterConfig c;
    auto num = [&](const char *key, double &dst) {
        if (j.contains(key)) dst = number(j.at(key), std::string("config.") + key);
    };
    num("k", c.k);
    num("k_low", c.k_low);
    num("k_high", c.k_high);
    num("R", c.R);
    num("R1", c.R1);
    num("rho_tilde", c.rho_tilde);
    num("R2", c.R2);
    num("grading", c.grading);
    num("three_spheres_cap", c.three_spheres_cap);
    num("rho0", c.rho0);
    if (j.contains("x0")) c.x0 = point(j.at("x0"), "config.x0");
    if (j.contains("quad_order")) c.quad_order = integer(j.at("quad_order"), "config.quad_order");
    if (j.contains("n_far")) c.n_far = integer(j.at("n_far"), "config.n_far");
    if (j.contains("chief_points")) c.chief_points = integer(j.at("chief_points"), "config.chief_points");
    if (j.contains("directions")) {
        const Json &d = j.at("directions");
        if (!d.is_array() || d.empty()) throw ValidationError("config.directions: expected a non-empty array of [x, y]");
        c.directions.clear();
        for (std::size_t i = 0; i < d.size(); ++i)
            c.directions.push_back(point(d[i], "config.directions[" + std::to_string(i) + "]"));
    }
    if (j.contains("chain")) {
        const Json &a = j.at("chain");
        if (!a.is_object()) throw ValidationError("config.chain: expected an object");
        reject_unknown(a, {"a1", "a2", "a3", "a4"}, "config.chain.");
        if (a.contains("a1")) c.chain.a1 = number(a.at("a1"), "config.chain.a1");
        if (a.contains("a2")) c.chain.a2 = number(a.at("a2"), "config.chain.a2");
        if (a.contains("a3")) c.chain.a3 = number(a.at("a3"), "config.chain.a3");
        if (a.contains("a4")) c.chain.a4 = number(a.at("a4"), "config.chain.a4");
    }
    if (j.contains("tolerances")) {
        const Json &t = j.at("tolerances");
        if (!t.is_object()) throw ValidationError("config.tolerances: expected an object");
        reject_unknown(t, {"solver", "bc", "condition_max"}, "config.tolerances.");
        if (t.contains("solver")) c.tol.solver = number(t.at("solver"), "config.tolerances.solver");
        if (t.contains("bc")) c.tol.bc = number(t.at("bc"), "config.tolerances.bc");
        if (t.contains("condition_max"))
            c.tol.condition_max = number(t.at("condition_max"), "config.tolerances.condition_max");
    }
    try {
        c.validate();
    } catch (const ParameterError &e) {
        throw ValidationError(e.what());
    }
    return c;
}

Json config_to_json(const ScatterConfig &c) {
    Json dirs = Json::array();
    for (Vec2 v : c.directions) dirs.push_back(point_json(v));
    return Json{{"k", c.k},
                {"k_low", c.k_low},
                {"k_high", c.k_high},
                {"directions", std::move(dirs)},
                {"R", c.R},
                {"R1", c.R1},
                {"rho_tilde", c.rho_tilde},
                {"x0", point_json(c.x0)},
                {"R2", c.R2},
                {"quad_order", c.quad_order},
                {"grading", c.grading},
                {"n_far", c.n_far},
                {"chief_points", c.chief_points},
                {"three_spheres_cap", c.three_spheres_cap},
                {"rho0", c.rho0},
                {"chain", {{"a1", c.chain.a1}, {"a2", c.chain.a2}, {"a3", c.chain.a3}, {"a4", c.chain.a4}}},
                {"tolerances",
                 {{"solver", c.tol.solver}, {"bc", c.tol.bc}, {"condition_max", c.tol.condition_max}}}};
}

ScatterConfig load_config(const fs::path &path) { return config_from_json(parse_json(read_text(path), "config")); }

// ---- far field --------------------------------------------------------------

std::string far_field_csv(const FarFieldPattern &f) {
    std::string out = "theta,re,im\n";
    for (std::size_t m = 0; m < f.size(); ++m) {
        out += format_double(f.theta[m]);
        out += ',';
        out += format_double(f.values[m].real());
        out += ',';
        out += format_double(f.values[m].imag());
        out += '\n';
    }
    return out;
}

void write_far_field_csv(const fs::path &path, const FarFieldPattern &f) { atomic_write(path, far_field_csv(f)); }

}  // namespace polyscat::io
