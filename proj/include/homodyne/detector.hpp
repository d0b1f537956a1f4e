#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "homodyne/gaussian.hpp"

namespace homodyne {

/// Measured receiver clearance (total noise over electronic noise, dB)
/// against frequency, as an ordered anchor list. Queries interpolate
/// linearly in (log10 f, dB) coordinates and clamp outside the anchor range.
class ClearanceCurve {
public:
    explicit ClearanceCurve(std::vector<std::pair<double, double>> anchors)
        : anchors_(std::move(anchors)) {
        if (anchors_.size() < 2)
            throw std::domain_error("ClearanceCurve: need at least 2 anchors");
        for (std::size_t i = 0; i < anchors_.size(); ++i) {
            const auto& [f, db] = anchors_[i];
            if (!(f > 0.0) || !std::isfinite(f) || !std::isfinite(db) || db < 0.0)
                throw std::domain_error(
                    "ClearanceCurve: anchor " + std::to_string(i) +
                    " needs frequency > 0 and clearance >= 0 dB");
            if (i > 0 && f <= anchors_[i - 1].first)
                throw std::domain_error("ClearanceCurve: frequencies must be strictly increasing");
        }
    }

    const std::vector<std::pair<double, double>>& anchors() const { return anchors_; }

    double clearance_at(double f_hz) const {
        if (!(f_hz > 0.0) || !std::isfinite(f_hz))
            throw std::domain_error("clearance_at: frequency must be > 0");
        if (f_hz <= anchors_.front().first) return anchors_.front().second;
        if (f_hz >= anchors_.back().first) return anchors_.back().second;
        auto hi = std::upper_bound(anchors_.begin(), anchors_.end(), f_hz,
                                   [](double f, const auto& a) { return f < a.first; });
        auto lo = hi - 1;
        const double x0 = std::log10(lo->first), x1 = std::log10(hi->first);
        const double t = (std::log10(f_hz) - x0) / (x1 - x0);
        return lo->second + t * (hi->second - lo->second);
    }

private:
    std::vector<std::pair<double, double>> anchors_;
};

/// Die-level balanced receiver characterization. Defaults describe the
/// receiver this toolkit models: 1.1 A/W, NEP 2 pW/rtHz, CMRR 35 dB,
/// 750 MHz bandwidth, clearance falling from 25 dB to a 0.2 dB plateau.
/// The 10 MHz and 3.5 GHz anchors are interpolation choices, overridable
/// per scenario.
struct DetectorSpec {
    double responsivity_a_per_w = 1.1;
    double nep_w_sqrthz = 2e-12;
    double cmrr_db = 35.0;
    double bandwidth_3db_hz = 750e6;
    ClearanceCurve clearance{
        {{10e6, 25.0}, {750e6, 16.0}, {3.5e9, 0.8}, {4e9, 0.2}}};

    void validate() const {
        if (!(responsivity_a_per_w > 0.0)) throw std::domain_error("detector.responsivity_a_per_w: must be > 0");
        if (!(nep_w_sqrthz > 0.0)) throw std::domain_error("detector.nep_w_sqrthz: must be > 0");
        if (!(cmrr_db >= 0.0)) throw std::domain_error("detector.cmrr_db: must be >= 0");
        if (!(bandwidth_3db_hz > 0.0)) throw std::domain_error("detector.bandwidth_3db_hz: must be > 0");
    }
};

/// Electrical efficiency eta_el = (cl - 1)/cl with cl the linear clearance
/// ratio. At cl = 0 dB the electronic floor equals the total measured power
/// and no shot noise is visible: that case returns nullopt rather than a
/// (zero) Efficiency.
inline std::optional<Efficiency> eta_el_from_clearance(double cl_db) {
    if (!std::isfinite(cl_db) || cl_db < 0.0)
        throw std::domain_error("eta_el_from_clearance: clearance must be >= 0 dB, got " +
                                std::to_string(cl_db));
    const double cl = std::pow(10.0, cl_db / 10.0);
    const double eta = (cl - 1.0) / cl;
    if (eta <= 0.0) return std::nullopt;
    return Efficiency{eta};
}

/// Photodiode quantum efficiency from responsivity,
/// eta_pd = R * (1239.842 eV nm) / lambda. Values above 1 indicate an
/// inconsistent spec sheet and are rejected.
inline Efficiency qe_from_responsivity(double responsivity_a_per_w, double wavelength_nm) {
    if (!(responsivity_a_per_w > 0.0))
        throw std::domain_error("qe_from_responsivity: responsivity must be > 0");
    if (!(wavelength_nm > 0.0))
        throw std::domain_error("qe_from_responsivity: wavelength must be > 0");
    constexpr double kPhotonEnergyEvNm = 1239.842;
    const double eta = responsivity_a_per_w * kPhotonEnergyEvNm / wavelength_nm;
    if (eta > 1.0)
        throw std::domain_error(
            "qe_from_responsivity: inconsistent spec, computed quantum efficiency " +
            std::to_string(eta) + " > 1");
    return Efficiency{eta};
}

/// Predicted clearance from detector figures:
///   S_shot = 2 q_e R P_LO   (A^2/Hz, total LO power across the pair)
///   S_elec = (R * NEP)^2    (A^2/Hz)
///   cl     = 10 log10((S_shot + S_elec)/S_elec)
inline double clearance_from_specs(double p_lo_w, const DetectorSpec& spec) {
    if (!(p_lo_w > 0.0)) throw std::domain_error("clearance_from_specs: LO power must be > 0");
    spec.validate();
    constexpr double kElementaryCharge = 1.602176634e-19;
    const double s_shot = 2.0 * kElementaryCharge * spec.responsivity_a_per_w * p_lo_w;
    const double i_elec = spec.responsivity_a_per_w * spec.nep_w_sqrthz;
    const double s_elec = i_elec * i_elec;
    return 10.0 * std::log10((s_shot + s_elec) / s_elec);
}

/// Linear power suppression factor applied to common-mode LO intensity noise.
inline double cmrr_suppression(double cmrr_db) {
    if (!std::isfinite(cmrr_db) || cmrr_db < 0.0)
        throw std::domain_error("cmrr_suppression: CMRR must be >= 0 dB");
    return std::pow(10.0, -cmrr_db / 10.0);
}

/// Multiplicative efficiency chain. The electrical term is frequency
/// dependent and comes from the detector's clearance curve at evaluation
/// time; the three optical terms are fixed per scenario.
struct LossBudget {
    Efficiency eta_escape;  // crystal output coupling
    Efficiency eta_path;    // connection losses
    Efficiency eta_pd;      // photodiode

    double optical_product() const {
        return eta_escape.value() * eta_path.value() * eta_pd.value();
    }
};

/// Total detection efficiency at frequency f. Returns nullopt when the
/// receiver has no shot-noise visibility there (clearance 0 dB).
inline std::optional<Efficiency> total_eta(const LossBudget& budget, double f_hz,
                                           const DetectorSpec& spec) {
    const auto eta_el = eta_el_from_clearance(spec.clearance.clearance_at(f_hz));
    if (!eta_el) return std::nullopt;
    return Efficiency{budget.optical_product() * eta_el->value()};
}

}  // namespace homodyne
