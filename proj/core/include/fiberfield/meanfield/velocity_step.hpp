#pragma once

#include <span>

#include "fiberfield/meanfield/kinetic_field.hpp"

namespace fiberfield {

struct VelocityStepOptions {
    /// Split a point's step into equal sub-steps when a stability ratio exceeds
    /// `substep_limit`; otherwise a ratio above 1 raises CflError.
    bool subcycle = false;
    double substep_limit = 0.5;
};

struct VelocityStepReport {
    double max_diffusion_ratio = 0.0;
    double max_advection_ratio = 0.0;
    int max_substeps = 1;
};

/// Largest diffusion number per unit step and A: max_i sum_j |T_ij| / (h_ij |T_i|).
double diffusion_factor(const GeodesicGrid& grid);

/// Advances f by dt/2 under the velocity operator
///   d_t f = div_tau(F f) + (A^2 / 2) Laplace_tau f,   F = (1/2) P_tau g,
/// where g[p] = grad V + retarded interaction at spatial point p. This is the
/// half-step of the symmetric split.
///
/// Edge values use the Lax-Wendroff interpolation along the midpoint arc
/// (weights (h_j - s/2 F.e) / h_ij on f_i and (h_i + s/2 F.e) / h_ij on f_j
/// with s = dt/2). Where these coefficients would make the update non-monotone
/// (cell Peclet number too large) the edge uses the exponentially fitted flux
///   (D / h_ij) [B(z) f_j - B(-z) f_i],   z = -F.e h_ij / D,   B(z) = z / (e^z - 1),
/// or the upwind value when D = 0. Edge fluxes are antisymmetric so sum_i |T_i| f_i is
/// conserved per point. Stability ratios for the half-step s:
///   diffusion  s (A^2/2) max_i sum_j |T_ij| / (h_ij |T_i|) <= 1
///   advection  s max_edges |F.e| / min(h_1, h_2) <= 1
/// A violation throws CflError naming the constraint unless sub-cycling is on.
VelocityStepReport velocity_halfstep(KineticField& f, std::span<const Vec3> g, double A, double dt,
                                     const VelocityStepOptions& options = {});

}  // namespace fiberfield
