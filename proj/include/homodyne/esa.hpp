#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "homodyne/detector.hpp"
#include "homodyne/errors.hpp"
#include "homodyne/gaussian.hpp"
#include "homodyne/rng.hpp"

namespace homodyne {

enum class SweepWaveform { sinusoidal, triangular };

/// LO phase modulation applied by the phase shifter.
struct SweepConfig {
    double f_mod_hz = 200.0;
    SweepWaveform waveform = SweepWaveform::sinusoidal;
    double amplitude_rad = kPi;
    double offset_rad = 0.0;

    void validate() const {
        if (!(f_mod_hz > 0.0)) throw std::domain_error("sweep.f_mod_hz: must be > 0");
        if (!(amplitude_rad >= 0.0) || !std::isfinite(amplitude_rad))
            throw std::domain_error("sweep.amplitude_rad: must be >= 0 and finite");
        if (!std::isfinite(offset_rad)) throw std::domain_error("sweep.offset_rad: non-finite");
    }
};

/// Zero-span acquisition settings.
struct EsaConfig {
    double f_center_hz = 50e6;
    double rbw_hz = 20e6;
    double vbw_hz = 1e3;
    double duration_s = 0.05;
    int n_points = 2001;

    void validate() const {
        if (!(rbw_hz > 0.0)) throw std::domain_error("esa.rbw: must be > 0");
        if (!(vbw_hz > 0.0) || vbw_hz > rbw_hz)
            throw std::domain_error("esa.vbw: must satisfy 0 < vbw <= rbw");
        if (!(duration_s > 0.0)) throw std::domain_error("esa.duration: must be > 0");
        if (n_points < 2) throw std::domain_error("esa.n_points: must be >= 2");
        if (!(f_center_hz > rbw_hz / 2.0))
            throw std::domain_error("esa.f_center: must exceed rbw/2");
    }

    bool same_acquisition(const EsaConfig& o) const {
        return f_center_hz == o.f_center_hz && rbw_hz == o.rbw_hz && vbw_hz == o.vbw_hz &&
               duration_s == o.duration_s && n_points == o.n_points;
    }

    /// Relative std of a power estimate after video averaging,
    /// sigma = 1/sqrt(rbw/(2 vbw)), the Gaussian power-averaging result.
    double estimation_noise_rel_sigma() const { return std::sqrt(2.0 * vbw_hz / rbw_hz); }

    /// Same figure expressed in dB of trace wobble.
    double estimation_noise_db_sigma() const {
        return 10.0 / std::log(10.0) * estimation_noise_rel_sigma();
    }
};

enum class TraceKind { signal, shot_reference, electronic_floor };

inline const char* to_string(TraceKind k) {
    switch (k) {
        case TraceKind::signal: return "signal";
        case TraceKind::shot_reference: return "shot_reference";
        case TraceKind::electronic_floor: return "electronic_floor";
    }
    return "?";
}

/// Zero-span trace: power vs time in dB relative to the shot-noise
/// reference, plus the acquisition settings it was taken with.
struct EsaTrace {
    EsaConfig meta;
    TraceKind kind = TraceKind::signal;
    std::vector<double> t_s;
    std::vector<double> power_db;

    void validate() const {
        if (t_s.size() != power_db.size() || t_s.size() < 2)
            throw std::domain_error("trace: need >= 2 samples with matching columns");
        for (std::size_t i = 0; i < t_s.size(); ++i) {
            if (!std::isfinite(t_s[i]) || !std::isfinite(power_db[i]))
                throw std::domain_error("trace: non-finite sample at row " + std::to_string(i));
            if (i > 0 && t_s[i] <= t_s[i - 1])
                throw std::domain_error("trace: timestamps must be strictly increasing (row " +
                                        std::to_string(i) + ")");
        }
        if (t_s.front() != 0.0 || std::abs(t_s.back() - meta.duration_s) > 1e-9 * meta.duration_s)
            throw std::domain_error("trace: timestamps must span [0, duration]");
    }

    double dt() const { return meta.duration_s / (meta.n_points - 1); }
};

/// Simulation switches used by tests; defaults reproduce the measurement.
struct TraceOptions {
    bool estimation_noise = true;
    bool video_filter = true;
    std::size_t max_mc_samples = 200'000'000;  // Monte Carlo budget guard
};

/// Instantaneous LO phase under the sweep.
inline LoPhase phase_at(double t_s, const SweepConfig& sweep) {
    if (!(t_s >= 0.0)) throw std::domain_error("phase_at: t must be >= 0");
    const double u = sweep.f_mod_hz * t_s;
    double unit;
    if (sweep.waveform == SweepWaveform::sinusoidal) {
        unit = std::sin(2.0 * kPi * u);
    } else {
        // Sine-like unit triangle: 0 at u=0, +1 at u=1/4, -1 at u=3/4.
        const double frac = u - std::floor(u);
        unit = frac < 0.25   ? 4.0 * frac
               : frac < 0.75 ? 2.0 - 4.0 * frac
                             : 4.0 * frac - 4.0;
    }
    return LoPhase{sweep.offset_rad + sweep.amplitude_rad * unit};
}

/// Noise power at LO phase theta, normalized to the (shot + electronic)
/// reference: N = 1 + eta_opt*eta_el*(V(theta) - 1).
inline double normalized_power(LoPhase theta, const QuadratureVariances& state,
                               Efficiency eta_opt, Efficiency eta_el) {
    return 1.0 + eta_opt.value() * eta_el.value() * (variance_at_phase(state, theta) - 1.0);
}

namespace detail {

// Seed stream tags, one per independent noise stream.
inline constexpr std::uint64_t kTagSignal = 1;
inline constexpr std::uint64_t kTagShotReference = 2;
inline constexpr std::uint64_t kTagElectronicFloor = 3;
inline constexpr std::uint64_t kTagMcReference = 0x524546;  // MC self-normalization run

inline std::uint64_t stream_tag(TraceKind k) {
    switch (k) {
        case TraceKind::signal: return kTagSignal;
        case TraceKind::shot_reference: return kTagShotReference;
        case TraceKind::electronic_floor: return kTagElectronicFloor;
    }
    return 0;
}

// Normalized level a trace kind sits at, given the instantaneous phase.
inline double level_at(TraceKind kind, LoPhase theta, const QuadratureVariances& state,
                       Efficiency eta_opt, Efficiency eta_el) {
    switch (kind) {
        case TraceKind::signal: return normalized_power(theta, state, eta_opt, eta_el);
        case TraceKind::shot_reference: return 1.0;
        case TraceKind::electronic_floor: return 1.0 - eta_el.value();
    }
    return 1.0;
}

// Single-pole RC low-pass, the video filter model.
class OnePoleLowPass {
public:
    OnePoleLowPass(double cutoff_hz, double dt_s)
        : alpha_(1.0 - std::exp(-2.0 * kPi * cutoff_hz * dt_s)) {}
    void prime(double x0) {
        y_ = x0;
        primed_ = true;
    }
    double step(double x) {
        if (!primed_) prime(x);
        y_ += alpha_ * (x - y_);
        return y_;
    }

private:
    double alpha_;
    double y_ = 0.0;
    bool primed_ = false;
};

// RBJ constant-0dB-peak-gain bandpass biquad; bw_hz is the -3 dB width.
class BandPassBiquad {
public:
    BandPassBiquad(double f0_hz, double bw_hz, double fs_hz) {
        const double w0 = 2.0 * kPi * f0_hz / fs_hz;
        const double q = f0_hz / bw_hz;
        const double alpha = std::sin(w0) / (2.0 * q);
        const double a0 = 1.0 + alpha;
        b0_ = alpha / a0;
        b2_ = -alpha / a0;
        a1_ = -2.0 * std::cos(w0) / a0;
        a2_ = (1.0 - alpha) / a0;
    }
    double step(double x) {
        const double y = b0_ * x + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
        x2_ = x1_;
        x1_ = x;
        y2_ = y1_;
        y1_ = y;
        return y;
    }

private:
    double b0_, b2_, a1_, a2_;
    double x1_ = 0.0, x2_ = 0.0, y1_ = 0.0, y2_ = 0.0;
};

struct McChainResult {
    double mean_band_power = 0.0;  // record average of the squared bandpass output
};

}  // namespace detail

/// Fast analytic zero-span trace: the normalized level N(t) under the phase
/// sweep, passed through the single-pole video filter, with per-point
/// multiplicative estimation noise. Output is dB relative to the shot
/// reference. When the receiver clearance at f_center is 0 dB (no
/// shot-noise visibility) the returned trace is the pure electronic floor,
/// flagged by its kind.
inline EsaTrace simulate_trace_analytic(const QuadratureVariances& state, const LossBudget& budget,
                                        const DetectorSpec& spec, const SweepConfig& sweep,
                                        const EsaConfig& esa, RngSeed seed,
                                        TraceKind kind = TraceKind::signal,
                                        const TraceOptions& options = {}) {
    sweep.validate();
    esa.validate();
    spec.validate();

    const auto eta_el = eta_el_from_clearance(spec.clearance.clearance_at(esa.f_center_hz));
    TraceKind effective_kind = kind;
    if (!eta_el) effective_kind = TraceKind::electronic_floor;
    const Efficiency eta_opt{budget.optical_product()};

    const int n = esa.n_points;
    const double dt_out = esa.duration_s / (n - 1);
    // Internal rate resolving both the video pole and the sweep harmonics.
    const double min_rate = std::max(20.0 * esa.vbw_hz, 40.0 * sweep.f_mod_hz);
    const int upsample = std::clamp(static_cast<int>(std::ceil(dt_out * min_rate)), 1, 100000);
    const double dt_fine = dt_out / upsample;

    detail::OnePoleLowPass video(esa.vbw_hz, dt_fine);
    GaussianRng rng(derive_seed(seed, detail::stream_tag(effective_kind)));
    const double sigma = esa.estimation_noise_rel_sigma();

    auto level = [&](double t) {
        if (!eta_el) return 1.0;  // electronic floor equals the whole reference at cl = 0 dB
        return detail::level_at(effective_kind, phase_at(t, sweep), state, eta_opt, *eta_el);
    };

    EsaTrace trace;
    trace.meta = esa;
    trace.kind = effective_kind;
    trace.t_s.resize(n);
    trace.power_db.resize(n);

    video.prime(level(0.0));
    for (int i = 0; i < n; ++i) {
        const double t_i = i * dt_out;
        double y = level(t_i);
        if (options.video_filter && i > 0) {
            for (int k = 1; k <= upsample; ++k)
                y = video.step(level((i - 1 + static_cast<double>(k) / upsample) * dt_out));
        }
        if (options.estimation_noise) y *= std::max(1e-12, 1.0 + sigma * rng.gaussian());
        trace.t_s[i] = t_i;
        trace.power_db[i] = 10.0 * std::log10(y);
    }
    trace.t_s.back() = esa.duration_s;  // exact span end, no accumulation error
    return trace;
}

namespace detail {

// One pass of the explicit ESA chain over a freshly generated noise record.
// `level_fn(t)` sets the one-sided PSD (in shot units) of the white source
// at time t; the chain is bandpass -> square -> video low-pass. Returns the
// record-mean band power; optionally captures the video output on the
// display grid.
template <typename LevelFn>
McChainResult mc_chain(LevelFn&& level_fn, const EsaConfig& esa, double fs, double prepad_s,
                       std::size_t n_prepad, std::size_t n_total, RngSeed stream_seed,
                       std::vector<double>* display_out) {
    GaussianRng rng(stream_seed);
    BandPassBiquad bandpass(esa.f_center_hz, esa.rbw_hz, fs);
    OnePoleLowPass video(esa.vbw_hz, 1.0 / fs);
    const int n = esa.n_points;
    const double dt_out = esa.duration_s / (n - 1);

    double power_acc = 0.0;
    std::size_t power_count = 0;
    int out_idx = 0;
    for (std::size_t i = 0; i < n_total; ++i) {
        const double t = static_cast<double>(i) / fs - prepad_s;
        const double level = level_fn(std::max(t, 0.0));
        // White noise with one-sided PSD `level`: sample variance level*fs/2.
        const double amplitude = std::sqrt(level * fs / 2.0) * rng.gaussian();
        const double banded = bandpass.step(amplitude);
        const double smoothed = video.step(banded * banded);
        if (i >= n_prepad) {
            power_acc += banded * banded;
            ++power_count;
            if (display_out && out_idx < n && t >= out_idx * dt_out - 0.5 / fs) {
                (*display_out)[out_idx] = smoothed;
                ++out_idx;
            }
        }
    }
    if (display_out)
        for (; out_idx < n; ++out_idx) (*display_out)[out_idx] = (*display_out)[out_idx - 1];
    return {power_acc / static_cast<double>(power_count)};
}

struct McSetup {
    double fs;
    double prepad_s;
    std::size_t n_prepad;
    std::size_t n_total;
};

inline McSetup mc_setup(const EsaConfig& esa, const TraceOptions& options) {
    const double fs = 4.0 * (esa.f_center_hz + esa.rbw_hz);
    const double prepad_s = 10.0 / esa.rbw_hz + 4.0 / esa.vbw_hz;
    const std::size_t n_prepad = static_cast<std::size_t>(std::ceil(prepad_s * fs));
    const std::size_t n_total =
        n_prepad + static_cast<std::size_t>(std::ceil(esa.duration_s * fs)) + 1;
    if (n_total > options.max_mc_samples)
        throw validation_error(
            "esa", "Monte Carlo run needs " + std::to_string(n_total) + " samples at " +
                       std::to_string(fs) + " Hz, over the budget of " +
                       std::to_string(options.max_mc_samples) +
                       "; scale f_center/rbw down or shorten the record");
    return {fs, prepad_s, n_prepad, n_total};
}

}  // namespace detail

/// Monte Carlo oracle for the analytic path. Generates a band-limited
/// Gaussian noise record whose one-sided PSD tracks the normalized level
/// N(t) times the shot reference, then runs it through an explicit ESA
/// chain: RBW bandpass at f_center, square-law detector, VBW video filter.
/// The trace is normalized to an identically filtered reference run at
/// level 1, so filter gains cancel. Intended for desk-scale settings; the
/// sample rate is 4*(f_center + rbw) and a budget guard rejects configs
/// that would need more than options.max_mc_samples samples.
inline EsaTrace simulate_trace_montecarlo(const QuadratureVariances& state,
                                          const LossBudget& budget, const DetectorSpec& spec,
                                          const SweepConfig& sweep, const EsaConfig& esa,
                                          RngSeed seed, TraceKind kind = TraceKind::signal,
                                          const TraceOptions& options = {}) {
    sweep.validate();
    esa.validate();
    spec.validate();

    const auto eta_el = eta_el_from_clearance(spec.clearance.clearance_at(esa.f_center_hz));
    TraceKind effective_kind = kind;
    if (!eta_el) effective_kind = TraceKind::electronic_floor;
    const Efficiency eta_opt{budget.optical_product()};
    const auto setup = detail::mc_setup(esa, options);

    const auto ref = detail::mc_chain([](double) { return 1.0; }, esa, setup.fs, setup.prepad_s,
                                      setup.n_prepad, setup.n_total,
                                      derive_seed(seed, detail::kTagMcReference), nullptr);

    auto level_fn = [&](double t) {
        if (!eta_el) return 1.0;
        return detail::level_at(effective_kind, phase_at(t, sweep), state, eta_opt, *eta_el);
    };
    std::vector<double> display(esa.n_points, 0.0);
    detail::mc_chain(level_fn, esa, setup.fs, setup.prepad_s, setup.n_prepad, setup.n_total,
                     derive_seed(seed, detail::stream_tag(effective_kind)), &display);

    EsaTrace trace;
    trace.meta = esa;
    trace.kind = effective_kind;
    trace.t_s.resize(esa.n_points);
    trace.power_db.resize(esa.n_points);
    const double dt_out = esa.duration_s / (esa.n_points - 1);
    for (int i = 0; i < esa.n_points; ++i) {
        trace.t_s[i] = i * dt_out;
        trace.power_db[i] =
            10.0 * std::log10(std::max(display[i], 1e-300) / ref.mean_band_power);
    }
    trace.t_s.back() = esa.duration_s;
    return trace;
}

/// Record-mean Monte Carlo band power at a static LO phase, in dB relative
/// to the reference run. Uses the full-rate squared bandpass output, so the
/// statistical error scales as 1/sqrt(rbw * duration).
inline double montecarlo_band_power_db(const QuadratureVariances& state, const LossBudget& budget,
                                       const DetectorSpec& spec, LoPhase theta,
                                       const EsaConfig& esa, RngSeed seed,
                                       const TraceOptions& options = {}) {
    spec.validate();
    esa.validate();
    const auto eta_el = eta_el_from_clearance(spec.clearance.clearance_at(esa.f_center_hz));
    const Efficiency eta_opt{budget.optical_product()};
    const auto setup = detail::mc_setup(esa, options);

    const auto ref = detail::mc_chain([](double) { return 1.0; }, esa, setup.fs, setup.prepad_s,
                                      setup.n_prepad, setup.n_total,
                                      derive_seed(seed, detail::kTagMcReference), nullptr);
    const double level = eta_el ? normalized_power(theta, state, eta_opt, *eta_el) : 1.0;
    const auto sig = detail::mc_chain([level](double) { return level; }, esa, setup.fs,
                                      setup.prepad_s, setup.n_prepad, setup.n_total,
                                      derive_seed(seed, detail::kTagSignal), nullptr);
    return 10.0 * std::log10(sig.mean_band_power / ref.mean_band_power);
}

}  // namespace homodyne
