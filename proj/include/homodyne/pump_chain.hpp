#pragma once

#include <cmath>
#include <stdexcept>

#include "homodyne/gaussian.hpp"
#include "homodyne/units.hpp"

namespace homodyne {

/// Pump path parameters: IR power into the SHG stage, effective quadratic
/// SHG conversion (losses folded in), nonlinear strength mu, and an optional
/// dimensionless phase-matching detuning.
struct PumpChainSpec {
    double p_ir_dbm = 20.0;
    double shg_eff_per_w = 6.30957344480193e-3;
    double mu_per_sqrt_w = 44.49;
    double detuning_rad = 0.0;

    void validate() const {
        if (!std::isfinite(p_ir_dbm)) throw std::domain_error("pump_chain.p_ir_dbm: non-finite");
        if (!(shg_eff_per_w >= 0.0)) throw std::domain_error("pump_chain.shg_eff_per_w: must be >= 0");
        if (!(mu_per_sqrt_w >= 0.0)) throw std::domain_error("pump_chain.mu_per_sqrt_w: must be >= 0");
        if (!std::isfinite(detuning_rad)) throw std::domain_error("pump_chain.detuning_rad: non-finite");
    }
};

inline double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

/// Undepleted-pump SHG: p_775 = eff * p_ir^2 * sinc^2(detuning).
inline double shg_output(double p_ir_w, double shg_eff_per_w, double detuning = 0.0) {
    if (!(p_ir_w >= 0.0) || !(shg_eff_per_w >= 0.0))
        throw std::domain_error("shg_output: powers and efficiency must be >= 0");
    const double s = sinc(detuning);
    return shg_eff_per_w * p_ir_w * p_ir_w * s * s;
}

/// Squeezing parameter from pump power: r = mu * sqrt(p_in).
inline SqueezeParameter r_from_pump(double mu_per_sqrt_w, double p_in_w) {
    if (!(mu_per_sqrt_w >= 0.0) || !(p_in_w >= 0.0))
        throw std::domain_error("r_from_pump: inputs must be >= 0");
    return SqueezeParameter{mu_per_sqrt_w * std::sqrt(p_in_w)};
}

/// Full chain: IR power -> SHG pump -> squeezing parameter -> pure state.
inline QuadratureVariances squeezed_state_from(const PumpChainSpec& spec) {
    spec.validate();
    const double p_pump =
        shg_output(dbm_to_watts(spec.p_ir_dbm), spec.shg_eff_per_w, spec.detuning_rad);
    return pure_state_from_r(r_from_pump(spec.mu_per_sqrt_w, p_pump));
}

}  // namespace homodyne
