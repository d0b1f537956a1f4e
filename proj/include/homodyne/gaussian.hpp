#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "homodyne/units.hpp"

namespace homodyne {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Dimensionless squeezing parameter, r >= 0. Positive r squeezes the
/// quadrature at LO phase theta = pi/2.
class SqueezeParameter {
public:
    explicit SqueezeParameter(double r) : r_(r) {
        if (!std::isfinite(r) || r < 0.0)
            throw std::domain_error("SqueezeParameter: r must be finite and >= 0, got " +
                                    std::to_string(r));
    }
    double value() const { return r_; }

private:
    double r_;
};

/// Overall or per-component detection efficiency, in (0, 1].
class Efficiency {
public:
    explicit Efficiency(double eta) : eta_(eta) {
        if (!std::isfinite(eta) || eta <= 0.0 || eta > 1.0)
            throw std::domain_error("Efficiency: eta must be in (0, 1], got " +
                                    std::to_string(eta));
    }
    double value() const { return eta_; }

private:
    double eta_;
};

/// Local-oscillator phase in radians. Quadrature variance is pi-periodic in
/// the phase, so comparisons and reductions work modulo pi.
class LoPhase {
public:
    explicit LoPhase(double theta) : theta_(theta) {
        if (!std::isfinite(theta))
            throw std::domain_error("LoPhase: non-finite phase");
    }
    double value() const { return theta_; }

    /// Equivalent phase in [0, pi).
    double reduced() const {
        double m = std::fmod(theta_, kPi);
        if (m < 0.0) m += kPi;
        return m;
    }

private:
    double theta_;
};

/// Min/max quadrature variances of a single-mode Gaussian state, in
/// shot-noise units (vacuum = 1). Mixed (lossy) states are representable
/// directly; a squeezing parameter r is recoverable only when the state is
/// pure (v_min * v_max = 1).
class QuadratureVariances {
public:
    QuadratureVariances(double v_min, double v_max) : v_min_(v_min), v_max_(v_max) {
        if (!std::isfinite(v_min) || !std::isfinite(v_max) || v_min <= 0.0)
            throw std::domain_error("QuadratureVariances: variances must be finite, v_min > 0");
        if (v_max < v_min)
            throw std::domain_error("QuadratureVariances: v_max < v_min");
        if (v_min * v_max < 1.0 - 1e-12)
            throw std::domain_error(
                "QuadratureVariances: uncertainty bound violated, v_min*v_max = " +
                std::to_string(v_min * v_max));
    }

    double v_min() const { return v_min_; }
    double v_max() const { return v_max_; }

    static QuadratureVariances vacuum() { return {1.0, 1.0}; }

private:
    double v_min_;
    double v_max_;
};

/// Pure squeezed vacuum: v_min = e^{-2r}, v_max = e^{2r}.
inline QuadratureVariances pure_state_from_r(SqueezeParameter r) {
    return {std::exp(-2.0 * r.value()), std::exp(2.0 * r.value())};
}

/// Loss channel of transmissivity eta: each variance v -> eta*v + (1 - eta).
/// Vacuum is a fixed point; chained losses compose multiplicatively.
inline QuadratureVariances apply_loss(const QuadratureVariances& s, Efficiency eta) {
    const double e = eta.value();
    return {e * s.v_min() + (1.0 - e), e * s.v_max() + (1.0 - e)};
}

/// Quadrature variance at LO phase theta:
/// v_max*cos^2(theta) + v_min*sin^2(theta). The maximum sits at theta = 0
/// (mod pi), the minimum at theta = pi/2 (mod pi).
inline double variance_at_phase(const QuadratureVariances& s, LoPhase theta) {
    const double c = std::cos(theta.value());
    const double sn = std::sin(theta.value());
    return s.v_max() * c * c + s.v_min() * sn * sn;
}

}  // namespace homodyne
