#pragma once

#include <optional>
#include <vector>

#include "fiberfield/core/potentials.hpp"
#include "fiberfield/core/spatial_grid.hpp"
#include "fiberfield/meanfield/convolution.hpp"

namespace fiberfield {

struct StationaryProblem {
    SpatialGrid grid;
    CoilingPotential V;
    std::optional<InteractionPotential> U;
    double tol = 1e-8;
    int max_iter = 500;
    /// rho_{n+1} = (1 - w) rho_n + w T(rho_n); w = 1 is the plain iteration.
    double relaxation = 1.0;
    /// Relative cut for the potential convolution stencil (tiny: effectively the full sum).
    double threshold_frac = 1e-12;
    /// Weight of the interaction term in the energy functional.
    double interaction_weight = 1.0;

    void validate() const;
};

/// Potential convolution U * rho; zero field when U is absent.
class PotentialConvolution {
public:
    explicit PotentialConvolution(const StationaryProblem& prob);
    std::vector<double> operator()(const DensityField& rho) const;

private:
    std::optional<ConvolutionStencil> stencil_;
    std::size_t size_ = 0;
};

struct FixedPointStep {
    DensityField rho;
    std::size_t clamped = 0;  // points whose exponent was clamped to avoid underflow
};

/// rho <- e^{-(V + U * rho)} / sum(...) dx^d, computed with a shifted exponent.
FixedPointStep fixed_point_step(const DensityField& rho, const StationaryProblem& prob,
                                const PotentialConvolution& conv);
DensityField fixed_point_step(const DensityField& rho, const StationaryProblem& prob);

/// F(rho) = int (ln rho - 1) rho + V rho + w (U * rho) rho dx, with 0 ln 0 = 0.
double energy(const DensityField& rho, const StationaryProblem& prob, const PotentialConvolution& conv);
double energy(const DensityField& rho, const StationaryProblem& prob);

/// Residual of ln rho + V + U * rho = c, with c the mass-weighted mean.
struct IntegralResidual {
    /// max rho |ln rho + V + U * rho - c|: density units, comparable with the iteration tolerance.
    double density_scaled_max = 0.0;
    double weighted_l2 = 0.0;  // sqrt(int rho (ln rho + V + U * rho - c)^2 dx)
    double max_abs = 0.0;      // max over grid points with rho > 0
    double c = 0.0;
};

IntegralResidual integral_residual(const DensityField& rho, const StationaryProblem& prob,
                                   const PotentialConvolution& conv);

/// Iterate `iter` with its fixed-point defect max |T(rho) - rho| (the
/// successive change for relaxation 1) and energy.
struct StationaryIteration {
    int iter = 0;
    double linf_diff = 0.0;
    double energy = 0.0;
    double min_value = 0.0;
    double mass = 0.0;
};

struct StationaryResult {
    DensityField rho;
    DensityField initial;
    bool converged = false;
    int iterations = 0;  // relaxed updates applied
    std::vector<StationaryIteration> history;
    IntegralResidual residual;
    std::size_t energy_increases = 0;  // iterations where F went up
    std::size_t clamped = 0;
};

/// Iterates from rho_0 = e^{-V} / int e^{-V} until max |T(rho_n) - rho_n| <= tol
/// or max_iter updates were applied; returns the last rho_n.
StationaryResult solve_stationary(const StationaryProblem& prob);

}  // namespace fiberfield
