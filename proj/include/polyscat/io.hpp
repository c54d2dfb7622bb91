#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "polyscat/config.hpp"
#include "polyscat/helmholtz.hpp"
#include "polyscat/scene.hpp"

namespace polyscat::io {

using Json = nlohmann::json;

/// Reads a whole file; IoError when it cannot be opened.
std::string read_text(const std::filesystem::path &path);
/// Writes to a sibling temporary and renames it into place, so readers never
/// observe partial output. IoError on any failure.
void atomic_write(const std::filesystem::path &path, std::string_view contents);

/// Parses JSON text; syntax errors become ValidationError tagged with `what`.
Json parse_json(std::string_view text, const std::string &what);

/// 64-bit FNV-1a, used for manifest and content hashes.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 14695981039346656037ull);
std::string hex64(std::uint64_t h);

/// Shortest decimal form that reads back to the same double (at most 17 significant digits).
std::string format_double(double x);

// Scene files: {"polygons": [[[x,y],...],...], "bc": "hard"|"soft", "class": {"h","L","R"}}.
Scatterer2D scene_from_json(const Json &j);
Json scene_to_json(const Scatterer2D &s);
Scatterer2D load_scene(const std::filesystem::path &path);
void save_scene(const std::filesystem::path &path, const Scatterer2D &s);

// Config files: {k, directions, R, R1, rho_tilde, x0, R2, quad_order, grading, tolerances} plus optional extras.
// Unknown keys are rejected so that typos surface; the result is validated.
ScatterConfig config_from_json(const Json &j);
Json config_to_json(const ScatterConfig &cfg);
ScatterConfig load_config(const std::filesystem::path &path);

/// CSV with header theta,re,im and one row per direction.
std::string far_field_csv(const FarFieldPattern &f);
void write_far_field_csv(const std::filesystem::path &path, const FarFieldPattern &f);

}  // namespace polyscat::io
