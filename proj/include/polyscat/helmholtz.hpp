#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyscat/config.hpp"
#include "polyscat/kernels.hpp"
#include "polyscat/scene.hpp"

namespace polyscat {

/// Plane wave u^i(x) = exp(i k x.v).
struct IncidentWave {
    double k = 1.0;
    Vec2 direction{1.0, 0.0};

    Complex value(Vec2 x) const { return std::polar(1.0, k * dot(x, direction)); }
    CVec2 grad(Vec2 x) const {
        const Complex c = Complex(0.0, k) * value(x);
        return {c * direction.x, c * direction.y};
    }
};

IncidentWave incident_field(const ScatterConfig &cfg, std::size_t j);

/// How the scattered field is represented. Implementations are immutable after
/// construction and may be evaluated concurrently.
class FieldRepresentation {
public:
    virtual ~FieldRepresentation() = default;

    virtual std::string kind() const = 0;
    virtual Complex scattered(Vec2 x) const = 0;
    virtual CVec2 scattered_grad(Vec2 x) const = 0;
    virtual Complex far_field(Vec2 xhat) const = 0;
    /// True strictly inside the obstacle, where the exterior field is undefined.
    virtual bool inside(Vec2 x) const = 0;
    virtual double boundary_distance(Vec2 x) const = 0;
    /// Distance below which plain quadrature loses accuracy.
    virtual double panel_size() const = 0;

    /// Evaluation that stays accurate arbitrarily close to the boundary.
    virtual Complex scattered_near(Vec2 x) const { return scattered(x); }
    virtual CVec2 scattered_grad_near(Vec2 x) const { return scattered_grad(x); }

    /// Points and outward normals where boundary conditions are audited.
    struct BoundaryProbe {
        Vec2 point;
        Vec2 normal;
        double length = 1.0;  // local geometric scale, bounds the extrapolation step
    };
    virtual std::vector<BoundaryProbe> boundary_probes(std::size_t per_edge) const = 0;
    /// True when scattered_near may be evaluated on the boundary itself.
    virtual bool exact_on_boundary() const { return false; }

    virtual std::vector<Complex> scattered_batch(std::span<const Vec2> xs) const;
    virtual std::vector<Complex> far_field_batch(std::span<const Vec2> dirs) const;

    /// Boundary density of Nystrom representations, null otherwise.
    virtual const Eigen::VectorXcd *density() const { return nullptr; }
};

struct SolveDiagnostics {
    std::size_t unknowns = 0;
    std::size_t chief_rows = 0;
    double condition_estimate = 1.0;
};

struct FieldValue {
    Complex value;
    bool near_boundary = false;
};

struct FieldGradient {
    CVec2 value;
    bool near_boundary = false;
};

/// Total field u = u^i + u^s of one scattering problem. Cheap to copy; the
/// representation is shared and immutable.
class WaveField {
public:
    WaveField(std::shared_ptr<const FieldRepresentation> rep, Scatterer2D scatterer, ScatterConfig cfg,
              std::size_t direction_index, SolveDiagnostics diag = {});

    const Scatterer2D &scatterer() const { return scatterer_; }
    const ScatterConfig &config() const { return cfg_; }
    const FieldRepresentation &representation() const { return *rep_; }
    const SolveDiagnostics &diagnostics() const { return diag_; }
    std::size_t direction_index() const { return j_; }
    const IncidentWave &incident() const { return incident_; }
    double k() const { return incident_.k; }

    /// Total field with a near-boundary flag; throws DomainError inside the obstacle.
    FieldValue eval(Vec2 x) const;
    FieldGradient eval_grad(Vec2 x) const;

    /// Unchecked evaluators used by sampling loops that have already cleared the points.
    Complex total(Vec2 x) const { return incident_.value(x) + rep_->scattered(x); }
    CVec2 total_grad(Vec2 x) const { return incident_.grad(x) + rep_->scattered_grad(x); }
    Complex scattered(Vec2 x) const { return rep_->scattered(x); }
    std::vector<Complex> total_batch(std::span<const Vec2> xs) const;

    Complex far_field(Vec2 xhat) const { return rep_->far_field(xhat); }
    bool in_domain(Vec2 x) const { return !rep_->inside(x); }

private:
    std::shared_ptr<const FieldRepresentation> rep_;
    Scatterer2D scatterer_;
    ScatterConfig cfg_;
    std::size_t j_ = 0;
    IncidentWave incident_;
    SolveDiagnostics diag_;
};

FieldValue eval(const WaveField &u, Vec2 x);
FieldGradient eval_grad(const WaveField &u, Vec2 x);

/// Value and gradient callbacks over a domain; the common currency of the
/// propagation tools.
struct FieldEvaluator {
    std::function<Complex(Vec2)> value;
    std::function<CVec2(Vec2)> grad;
    std::function<bool(Vec2)> in_domain;
};

FieldEvaluator evaluator(const WaveField &u);

/// Nystrom solve of the exterior problem for direction j.
WaveField solve(const Scatterer2D &s, const ScatterConfig &cfg, std::size_t j,
                kernels::Execution exec = kernels::Execution::parallel);

// ---- far field ----------------------------------------------------------------

/// u^s(x) = e^{ik|x|} |x|^{-1/2} (u_inf(x/|x|) + O(1/|x|)), sampled at theta_m = 2 pi m / n.
struct FarFieldPattern {
    std::vector<double> theta;
    std::vector<Complex> values;

    std::size_t size() const { return values.size(); }
    double l2_norm() const;
};

FarFieldPattern far_field(const WaveField &u, std::size_t n_dirs);

// ---- error metrics ---------------------------------------------------------------

struct SampledError {
    double value = 0.0;
    double pitch = 0.0;
    std::size_t samples = 0;
};

/// Deterministic polar sample set of a closed disc: the centre plus 32 x 32 rings.
std::vector<Vec2> disc_samples(Vec2 center, double radius);

SampledError near_field_error(const WaveField &u, const WaveField &v, Vec2 center, double radius);
SampledError annulus_error(const WaveField &u, const WaveField &v, const ScatterConfig &cfg);
double far_field_error(const FarFieldPattern &f, const FarFieldPattern &g);

/// Lossless identity int |u_inf|^2 = sqrt(8 pi / k) Im(e^{-i pi/4} u_inf(v)).
struct OpticalTheorem {
    double defect = 0.0;
    double extinction = 0.0;  // right-hand side
    double scattered = 0.0;   // left-hand side
    bool degenerate = false;
};

inline double optical_constant(double k) { return std::sqrt(8.0 * pi / k); }
inline Complex optical_phase() { return std::polar(1.0, -pi / 4.0); }

OpticalTheorem optical_theorem_defect(const WaveField &u, std::size_t n_dirs = 512);

// ---- invariant checks ----------------------------------------------------------

/// Boundary-condition residual on the middle halves of all edges, measured by
/// extrapolating accurate near-boundary evaluations to the boundary.
struct BoundaryResidual {
    double max_residual = 0.0;
    double field_scale = 0.0;  // max of |u|, |u^i|, |u^s| over the same samples
    double relative = 0.0;     // max_residual / (k * field_scale) for sound-hard, / field_scale for sound-soft
    std::size_t samples = 0;
};

BoundaryResidual boundary_residual(const WaveField &u, std::size_t samples_per_edge = 8);

/// max |Delta u + k^2 u| at the probe points, fourth-order finite differences.
double helmholtz_residual(const WaveField &u, std::span<const Vec2> probes, double step);

/// E = sup |u| on a probe grid in R+2 <= |x| <= 8R; E1 = sup |u^s| |x|^{1/2} on the same grid.
struct FieldBounds {
    double E = 0.0;
    double E1 = 0.0;
};

FieldBounds field_bounds(const WaveField &u);

// ---- oracles ---------------------------------------------------------------------

/// Exact scattering by the disc |x| <= a via cylindrical harmonics.
WaveField disc_series(double a, const ScatterConfig &cfg, BoundaryCondition bc, std::size_t j = 0);
/// Same series cut after order max_order.
WaveField disc_series_truncated(double a, const ScatterConfig &cfg, BoundaryCondition bc, std::size_t j,
                                int max_order);

struct MfsOptions {
    std::size_t collocation = 0;     // 0 selects 2 * quad_order
    double depth = 0.4;              // source depth relative to the distance to the nearest corner
    std::size_t corner_sources = 24; // clustered monopole + dipole triples per sharp convex corner
    double sharp_turn = pi / 6.0;    // turning angle from which a corner counts as sharp
    double svd_threshold = 1e-13;    // relative singular-value cutoff
    double max_residual = 0.25;      // relative weighted residual triggering an oracle error
};

/// Method-of-fundamental-solutions oracle with sources inside the obstacle.
WaveField mfs_solve(const Scatterer2D &s, const ScatterConfig &cfg, std::size_t j, const MfsOptions &opt = {});

}  // namespace polyscat
