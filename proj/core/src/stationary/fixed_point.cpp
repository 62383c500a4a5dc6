#include "fiberfield/stationary/fixed_point.hpp"

#include <algorithm>
#include <cmath>

#include "fiberfield/core/error.hpp"

namespace fiberfield {

namespace {

// exp(-745) underflows to a denormal; larger shifted exponents are clamped.
constexpr double kMaxExponent = 700.0;

}  // namespace

void StationaryProblem::validate() const {
    grid.validate();
    if (U) U->validate();
    if (!(tol > 0.0)) throw ConfigError("stationary: tol must be positive");
    if (max_iter < 1) throw ConfigError("stationary: max_iter must be >= 1");
    if (!(relaxation > 0.0 && relaxation <= 1.0)) throw ConfigError("stationary: relaxation must lie in (0, 1]");
    if (!(threshold_frac >= 0.0 && threshold_frac < 1.0)) throw ConfigError("stationary: threshold_frac must lie in [0, 1)");
}

PotentialConvolution::PotentialConvolution(const StationaryProblem& prob) : size_(prob.grid.size()) {
    if (prob.U) stencil_ = build_convolution_stencil(prob.grid, *prob.U, prob.threshold_frac, ConvolutionKind::value);
}

std::vector<double> PotentialConvolution::operator()(const DensityField& rho) const {
    if (rho.values.size() != size_) throw MismatchError("potential convolution: grid mismatch");
    if (!stencil_) return std::vector<double>(size_, 0.0);
    return convolve(*stencil_, rho.values);
}

FixedPointStep fixed_point_step(const DensityField& rho, const StationaryProblem& prob,
                                const PotentialConvolution& conv) {
    if (!(rho.grid == prob.grid)) throw MismatchError("fixed_point_step: grid mismatch");
    const auto u = conv(rho);
    std::vector<double> phi(rho.values.size());
    for (std::size_t p = 0; p < phi.size(); ++p) {
        phi[p] = prob.V.value(prob.grid.point(p)) + u[p];
        if (!std::isfinite(phi[p])) throw InvalidStateError("fixed_point_step: non-finite potential");
    }
    const double lowest = *std::min_element(phi.begin(), phi.end());
    FixedPointStep out{DensityField(prob.grid), 0};
    double sum = 0.0;
    for (std::size_t p = 0; p < phi.size(); ++p) {
        double e = phi[p] - lowest;
        if (e > kMaxExponent) {
            e = kMaxExponent;
            ++out.clamped;
        }
        out.rho.values[p] = std::exp(-e);
        sum += out.rho.values[p];
    }
    const double norm = 1.0 / (sum * prob.grid.cell_volume());
    for (double& v : out.rho.values) v *= norm;
    return out;
}

DensityField fixed_point_step(const DensityField& rho, const StationaryProblem& prob) {
    return fixed_point_step(rho, prob, PotentialConvolution(prob)).rho;
}

double energy(const DensityField& rho, const StationaryProblem& prob, const PotentialConvolution& conv) {
    const auto u = conv(rho);
    double s = 0.0;
    for (std::size_t p = 0; p < rho.values.size(); ++p) {
        const double r = rho.values[p];
        if (r <= 0.0) continue;
        s += (std::log(r) - 1.0) * r + prob.V.value(prob.grid.point(p)) * r + prob.interaction_weight * u[p] * r;
    }
    return s * prob.grid.cell_volume();
}

double energy(const DensityField& rho, const StationaryProblem& prob) {
    return energy(rho, prob, PotentialConvolution(prob));
}

IntegralResidual integral_residual(const DensityField& rho, const StationaryProblem& prob,
                                   const PotentialConvolution& conv) {
    const auto u = conv(rho);
    std::vector<double> mu(rho.values.size(), 0.0);
    double mass = 0.0, mean = 0.0;
    for (std::size_t p = 0; p < mu.size(); ++p) {
        const double r = rho.values[p];
        if (r <= 0.0) continue;
        mu[p] = std::log(r) + prob.V.value(prob.grid.point(p)) + u[p];
        mean += r * mu[p];
        mass += r;
    }
    IntegralResidual res;
    res.c = mass > 0.0 ? mean / mass : 0.0;
    double s = 0.0;
    for (std::size_t p = 0; p < mu.size(); ++p) {
        const double r = rho.values[p];
        if (r <= 0.0) continue;
        const double d = mu[p] - res.c;
        s += r * d * d;
        res.max_abs = std::max(res.max_abs, std::abs(d));
        res.density_scaled_max = std::max(res.density_scaled_max, r * std::abs(d));
    }
    res.weighted_l2 = std::sqrt(s * prob.grid.cell_volume());
    return res;
}

StationaryResult solve_stationary(const StationaryProblem& prob) {
    prob.validate();
    const PotentialConvolution conv(prob);
    StationaryResult res;
    StationaryProblem free = prob;
    free.U.reset();
    res.initial = fixed_point_step(DensityField(prob.grid), free, PotentialConvolution(free)).rho;
    res.rho = res.initial;
    double previous_energy = energy(res.rho, prob, conv);
    for (int it = 0;; ++it) {
        auto step = fixed_point_step(res.rho, prob, conv);
        res.clamped = std::max(res.clamped, step.clamped);
        // Fixed-point defect |T(rho) - rho|; equals the successive change when relaxation = 1.
        double defect = 0.0;
        for (std::size_t p = 0; p < step.rho.values.size(); ++p)
            defect = std::max(defect, std::abs(step.rho.values[p] - res.rho.values[p]));
        const double e = it == 0 ? previous_energy : energy(res.rho, prob, conv);
        if (e > previous_energy) ++res.energy_increases;
        previous_energy = e;
        res.history.push_back({it, defect, e, *std::min_element(res.rho.values.begin(), res.rho.values.end()),
                               res.rho.mass()});
        res.iterations = it;
        if (defect <= prob.tol) {
            res.converged = true;
            break;
        }
        if (it == prob.max_iter) break;
        for (std::size_t p = 0; p < step.rho.values.size(); ++p)
            step.rho.values[p] = (1.0 - prob.relaxation) * res.rho.values[p] + prob.relaxation * step.rho.values[p];
        res.rho = std::move(step.rho);
    }
    res.residual = integral_residual(res.rho, prob, conv);
    return res;
}

}  // namespace fiberfield
