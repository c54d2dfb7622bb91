#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "polyscat/mesh.hpp"

/// Outgoing 2D Helmholtz kernels and their Nystrom discretisation.
///
/// Phi(x, y) = (i/4) H0(k|x-y|). The double-layer kernel is dPhi/dnu_y.
/// Every routine comes in a serial form and an OpenMP row-parallel form that
/// performs the same floating-point operations per entry, so the two agree bit
/// for bit.
namespace polyscat::kernels {

enum class Execution { serial, parallel };

Complex single_layer(double k, Vec2 x, Vec2 y);
CVec2 single_layer_grad(double k, Vec2 x, Vec2 y);
Complex double_layer(double k, Vec2 x, Vec2 y, Vec2 ny);
CVec2 double_layer_grad(double k, Vec2 x, Vec2 y, Vec2 ny);

/// e^{i pi/4} / sqrt(8 pi k): far-field amplitude of Phi.
Complex far_field_constant(double k);

/// Logarithmic quadrature weights R_m, m = 0..n-1, for equispaced periodic nodes.
std::vector<double> log_weights(std::size_t n);

/// Layer potential on a mesh: hard uses the double layer only (direct
/// formulation, density = total field on the boundary); soft uses D - i eta S.
struct Layer {
    const BoundaryMesh *mesh = nullptr;
    double k = 1.0;
    double eta = 0.0;  // coupling of the single layer, zero for the pure double layer
};

/// Boundary operator matrix of (1/2) I + sign * D - i eta S at the nodes.
/// sign = -1 for the sound-hard direct equation, +1 for the sound-soft one.
Eigen::MatrixXcd assemble(const Layer &layer, double sign, Execution exec = Execution::parallel);
Eigen::MatrixXcd assemble_serial(const Layer &layer, double sign);

/// Rows of the layer potential evaluated at off-boundary points.
Eigen::MatrixXcd potential_rows(const Layer &layer, std::span<const Vec2> points,
                                Execution exec = Execution::parallel);

/// Plain trapezoid evaluation of the layer potential and its gradient.
Complex potential(const Layer &layer, const Eigen::VectorXcd &density, Vec2 x);
CVec2 potential_grad(const Layer &layer, const Eigen::VectorXcd &density, Vec2 x);
Complex far_field(const Layer &layer, const Eigen::VectorXcd &density, Vec2 xhat);

std::vector<Complex> potential_batch(const Layer &layer, const Eigen::VectorXcd &density,
                                     std::span<const Vec2> points, Execution exec = Execution::parallel);
std::vector<Complex> far_field_batch(const Layer &layer, const Eigen::VectorXcd &density,
                                     std::span<const Vec2> directions, Execution exec = Execution::parallel);

/// Accurate evaluation close to the boundary: polygons within a few panels of x
/// are integrated adaptively against a local interpolant of the density.
Complex potential_near(const Layer &layer, const Eigen::VectorXcd &density, Vec2 x);
CVec2 potential_grad_near(const Layer &layer, const Eigen::VectorXcd &density, Vec2 x);

}  // namespace polyscat::kernels
