#include "fiberfield/core/potentials.hpp"

#include <cmath>

#include "fiberfield/core/error.hpp"

namespace fiberfield {

double CoilingPotential::value(const Vec3& x) const { return kind == CoilingKind::quadratic ? 0.5 * norm2(x) : 0.0; }

Vec3 CoilingPotential::gradient(const Vec3& x) const { return kind == CoilingKind::quadratic ? x : Vec3{}; }

InteractionPotential InteractionPotential::mollifier(double strength, double radius) {
    InteractionPotential u{InteractionKind::mollifier, strength, radius, 0.0};
    u.validate();
    return u;
}

InteractionPotential InteractionPotential::smooth_heaviside(double strength, double radius, double regularization) {
    InteractionPotential u{InteractionKind::smooth_heaviside, strength, radius, regularization};
    u.validate();
    return u;
}

void InteractionPotential::validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(strength)) throw ConfigError("interaction potential: C must be positive");
    if (!positive(radius)) throw ConfigError("interaction potential: R must be positive");
    if (kind == InteractionKind::smooth_heaviside && !positive(regularization))
        throw ConfigError("interaction potential: k must be positive");
}

namespace {

// Logistic function evaluated without overflow for large |z|.
double logistic(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

double InteractionPotential::value(double r) const {
    const double a = 4.0 * radius * radius;
    const double r2 = r * r;
    switch (kind) {
    case InteractionKind::mollifier:
        return r2 < a ? strength * std::exp(-a / (a - r2)) : 0.0;
    case InteractionKind::smooth_heaviside:
        return strength * logistic(regularization * (1.0 - r2 / a));
    }
    return 0.0;
}

double InteractionPotential::radial_derivative(double r) const {
    const double a = 4.0 * radius * radius;
    const double r2 = r * r;
    switch (kind) {
    case InteractionKind::mollifier: {
        if (r2 >= a) return 0.0;
        const double gap = a - r2;
        return -2.0 * a * r * strength * std::exp(-a / gap) / (gap * gap);
    }
    case InteractionKind::smooth_heaviside: {
        const double s = logistic(regularization * (1.0 - r2 / a));
        return -strength * s * (1.0 - s) * regularization * 2.0 * r / a;
    }
    }
    return 0.0;
}

Vec3 InteractionPotential::gradient(const Vec3& x) const {
    // U'(r) x / r with the 1/r folded into the closed forms, so x = 0 is regular.
    const double a = 4.0 * radius * radius;
    const double r2 = norm2(x);
    switch (kind) {
    case InteractionKind::mollifier: {
        if (r2 >= a) return {};
        const double gap = a - r2;
        return x * (-2.0 * a * strength * std::exp(-a / gap) / (gap * gap));
    }
    case InteractionKind::smooth_heaviside: {
        const double s = logistic(regularization * (1.0 - r2 / a));
        return x * (-strength * s * (1.0 - s) * regularization * 2.0 / a);
    }
    }
    return {};
}

std::string to_string(InteractionKind kind) {
    return kind == InteractionKind::mollifier ? "mollifier" : "smooth_heaviside";
}

InteractionKind interaction_kind_from_string(const std::string& name) {
    if (name == "mollifier") return InteractionKind::mollifier;
    if (name == "smooth_heaviside") return InteractionKind::smooth_heaviside;
    throw ConfigError("unknown interaction potential kind '" + name + "'");
}

std::string to_string(CoilingKind kind) { return kind == CoilingKind::quadratic ? "quadratic" : "none"; }

CoilingKind coiling_kind_from_string(const std::string& name) {
    if (name == "quadratic") return CoilingKind::quadratic;
    if (name == "none") return CoilingKind::none;
    throw ConfigError("unknown coiling potential kind '" + name + "'");
}

Vec3 eval_potential_grad(const CoilingPotential& pot, const Vec3& x) {
    if (!is_finite(x)) throw InvalidStateError("coiling potential gradient: non-finite position");
    return pot.gradient(x);
}

Vec3 eval_potential_grad(const InteractionPotential& pot, const Vec3& x) {
    if (!is_finite(x)) throw InvalidStateError("interaction potential gradient: non-finite position");
    return pot.gradient(x);
}

}  // namespace fiberfield
