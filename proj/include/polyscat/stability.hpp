#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyscat/config.hpp"
#include "polyscat/helmholtz.hpp"
#include "polyscat/scene.hpp"

namespace polyscat {

/// One scatterer pair: distances, per-direction errors and flatness values.
struct StabilityRecord {
    std::string pair_id;
    std::string mode;
    double magnitude = 0.0;
    std::uint64_t seed = 0;
    DistanceTriple distances;
    double h = 0.0;                 // minimal cell size of the perturbed scatterer
    std::vector<double> eps;        // sup error on the probe ball, per direction
    std::vector<double> eps1;       // sup error on the probe annulus, per direction
    std::vector<double> eps0;       // L2 far-field error, per direction
    std::vector<double> A;          // flatness per (cell line of the base, direction), line-major
    std::vector<double> condition;  // condition estimates, base then perturbed, per direction
    bool failed = false;
    std::string reason;

    /// max_j eps_j, the error the stability estimates are stated in.
    double eps_max() const;
    /// Above the 1/(2e) cap the moduli are undefined; such records are kept but not fitted.
    bool above_cap() const;
};

/// Base solves shared by every record of a sweep.
struct BaseSolution {
    Scatterer2D scatterer;
    std::vector<WaveField> fields;       // one per direction
    std::vector<FarFieldPattern> far;
};

BaseSolution solve_base(const Scatterer2D &s, const ScatterConfig &cfg,
                        kernels::Execution exec = kernels::Execution::parallel);

/// Boundary sampling pitch used for the one-sided distance d.
inline constexpr double distance_resolution = 1e-3;

/// Solver and validation failures mark the record failed; they are not rethrown.
StabilityRecord run_pair(const Scatterer2D &s, const Scatterer2D &sp, const ScatterConfig &cfg,
                         const std::string &pair_id = "pair", kernels::Execution exec = kernels::Execution::parallel);
StabilityRecord run_pair(const BaseSolution &base, const Scatterer2D &sp, const ScatterConfig &cfg,
                         const std::string &pair_id, kernels::Execution exec = kernels::Execution::parallel);

/// One record per (magnitude, seed), magnitude-major. `emit` sees each record as it completes.
std::vector<StabilityRecord> sweep(const Scatterer2D &base, std::span<const double> magnitudes, PerturbMode mode,
                                   std::span<const std::uint64_t> seeds, const ScatterConfig &cfg,
                                   const std::function<void(const StabilityRecord &)> &emit = {},
                                   kernels::Execution exec = kernels::Execution::parallel);

// ---- modulus fits --------------------------------------------------------------

struct MajorantFit {
    double A = 0.0;
    double C = 0.0;            // exponent: eta(eps)^C or eps^C
    double spread = 0.0;       // max minus min log slack
    double mean_slack = 0.0;   // mean log slack, the quantity minimised over C
    std::vector<double> slack; // log(A f(eps_i) / d_i) >= 0
};

/// d <= A eta(eps)^C fitted as a majorant, with a power-law comparison d <= A' eps^C'.
struct ModulusFit {
    MajorantFit eta;
    MajorantFit power;
    std::string method = "log-grid C in [0.01, 10] + golden refinement; A = max d/f";
    std::string preferred;     // "eta" or "power": smaller spread
    std::vector<std::string> pair_ids;
    std::vector<double> d, eps;
    std::size_t violations = 0;

    double bound(double e) const;
};

struct ModulusPoint {
    double d = 0.0;
    double eps = 0.0;
};

ModulusFit fit_modulus(std::span<const StabilityRecord> records);
ModulusFit fit_modulus_points(std::span<const ModulusPoint> points);

// ---- distance audit ------------------------------------------------------------

struct DistanceViolation {
    std::string pair_id;
    std::string inequality;  // "C1*dhat <= dtilde" or "dtilde <= C2*d"
    double lhs = 0.0;
    double rhs = 0.0;
};

struct DistanceAudit {
    double C1 = 0.0;
    double C2 = 0.0;
    bool fitted = false;
    std::size_t audited = 0;
    std::size_t degenerate = 0;
    std::vector<DistanceViolation> violations;
};

/// Supplied constants are used as given; missing ones are fitted as fleet extremes.
DistanceAudit audit_distances(std::span<const StabilityRecord> records, std::optional<double> C1 = {},
                              std::optional<double> C2 = {});

// ---- symmetry --------------------------------------------------------------------

struct SymmetryReport {
    HyperplaneLine line;          // symmetry line parallel to v
    HyperplaneLine rotated;       // same line turned by 5 degrees
    Vec2 v, v2;
    double k = 0.0;
    double A_sym = 0.0;           // A(line) for v
    double A_rot = 0.0;           // A(rotated) for v
    double A2_sym = 0.0;          // A(line) for v2
    double cell_alignment = 0.0;  // max over cells |nu_cell . v|
    double a0 = 0.0;              // direction independence of {v, v2}
};

/// v is cfg.direction(0); v2 is cfg.direction(1) when present, otherwise v turned by 90 degrees.
SymmetryReport symmetry_experiment(const Scatterer2D &s, const ScatterConfig &cfg,
                                   kernels::Execution exec = kernels::Execution::parallel);

// ---- reports ---------------------------------------------------------------------

struct StageStatus {
    std::string name;
    std::string status;
};

/// Provenance of one run; the hash covers everything except the wall-clock fields.
struct RunManifest {
    std::string tool_version;
    std::string command;
    std::string config_hash;
    std::vector<std::string> scene_hashes;
    std::vector<std::uint64_t> seeds;
    std::vector<StageStatus> stages;
    std::string started;      // ISO-8601 UTC
    double wall_seconds = 0.0;

    std::string hash() const;
    nlohmann::json to_json(bool with_clock = true) const;
};

std::string version_string();

nlohmann::json record_to_json(const StabilityRecord &r);
StabilityRecord record_from_json(const nlohmann::json &j);
nlohmann::json fit_to_json(const ModulusFit &f);
nlohmann::json audit_to_json(const DistanceAudit &a);
nlohmann::json symmetry_to_json(const SymmetryReport &r);

/// Schema "polyscat-report/1": manifest (without clock), records, optional fit.
nlohmann::json report_json(std::span<const StabilityRecord> records, const ModulusFit *fit, const RunManifest &m);
std::vector<StabilityRecord> records_from_report(const nlohmann::json &j);

/// "# manifest=<hash>" line, header, one row per record.
std::string records_csv(std::span<const StabilityRecord> records, const std::string &manifest_hash);

/// Log-log scatter of d against eps with the fitted majorant.
std::string modulus_svg(std::span<const StabilityRecord> records, const ModulusFit *fit);

}  // namespace polyscat
