#pragma once

#include <array>

#include "fiberfield/meanfield/kinetic_field.hpp"

namespace fiberfield {

/// Values on a 4x4x4 neighbourhood, nodes -1, 0, 1, 2 relative to the anchor
/// along each axis, index [a * 16 + b * 4 + c].
using BezierStencil = std::array<double, 64>;

/// Bernstein control values on [0, 1] of the cubic through nodes -1, 0, 1, 2.
std::array<double, 4> bezier_controls(const std::array<double, 4>& p);

/// Tensor-product cubic Bezier interpolation at xi in [0, 1]^3.
///
/// The cubic Newton interpolant of each axis is rewritten in Bernstein form;
/// with `limiting` every control value is clamped into [min, max] of the
/// stencil before evaluation, so the result lies in that range.
double bezier_interpolate(const BezierStencil& stencil, const Vec3& xi, bool limiting);

struct TransportOptions {
    bool limiting = true;
    /// Fraction of the mass sitting on the boundary layer above which a warning is raised.
    double leakage_tolerance = 1e-6;
};

struct TransportReport {
    double mass_before = 0.0;
    double mass_after_interpolation = 0.0;
    double repair_factor = 1.0;
    double boundary_fraction = 0.0;
    bool leakage_warning = false;
};

/// Semi-Lagrangian step f(x, tau_c) <- f(x - dt tau_c, tau_c) with limited
/// Bezier interpolation, zero extension outside the box, then global
/// conservation repair.
TransportReport transport_step(KineticField& f, double dt, const TransportOptions& options = {});

/// Rescales f so its mass equals mass_before. Returns the factor applied.
/// Throws InvalidStateError when f has no mass but mass_before is positive.
double conservation_repair(KineticField& f, double mass_before);

}  // namespace fiberfield
