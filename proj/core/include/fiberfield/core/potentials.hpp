#pragma once

#include <optional>
#include <string>

#include "fiberfield/core/vec3.hpp"

namespace fiberfield {

enum class CoilingKind { quadratic, none };

/// Confining potential V: quadratic V(x) = |x|^2 / 2, or none (V = 0, for tests).
struct CoilingPotential {
    CoilingKind kind = CoilingKind::quadratic;

    double value(const Vec3& x) const;
    Vec3 gradient(const Vec3& x) const;

    friend bool operator==(const CoilingPotential&, const CoilingPotential&) = default;
};

enum class InteractionKind { mollifier, smooth_heaviside };

/// Radially symmetric, repulsive pair potential U.
///
/// mollifier:        U(r) = C exp(-(2R)^2 / ((2R)^2 - r^2)) for r < 2R, else 0
/// smooth_heaviside: U(r) = C / (1 + exp(-k (1 - r^2 / (2R)^2)))
struct InteractionPotential {
    InteractionKind kind = InteractionKind::smooth_heaviside;
    double strength = 10.0;        // C
    double radius = 1.4;           // R
    double regularization = 10.0;  // k, smooth_heaviside only

    static InteractionPotential mollifier(double strength, double radius);
    static InteractionPotential smooth_heaviside(double strength, double radius, double regularization);

    /// Throws ConfigError when parameters are not positive and finite.
    void validate() const;

    double value(double r) const;
    double value(const Vec3& x) const { return value(norm(x)); }
    /// dU/dr
    double radial_derivative(double r) const;
    Vec3 gradient(const Vec3& x) const;

    friend bool operator==(const InteractionPotential&, const InteractionPotential&) = default;
};

std::string to_string(InteractionKind kind);
std::string to_string(CoilingKind kind);
CoilingKind coiling_kind_from_string(const std::string& name);
InteractionKind interaction_kind_from_string(const std::string& name);

/// Analytic gradients. Throw InvalidStateError on non-finite input.
Vec3 eval_potential_grad(const CoilingPotential& pot, const Vec3& x);
Vec3 eval_potential_grad(const InteractionPotential& pot, const Vec3& x);

}  // namespace fiberfield
