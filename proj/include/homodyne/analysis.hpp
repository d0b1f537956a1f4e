#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "homodyne/detector.hpp"
#include "homodyne/errors.hpp"
#include "homodyne/esa.hpp"
#include "homodyne/gaussian.hpp"
#include "homodyne/units.hpp"

namespace homodyne {

/// Peak-picking settings for the extrema-averaging estimator.
/// expected_period is the nominal spacing scale of the sweep's extrema,
/// 1/(2 f_mod); it sets the minimum credible feature width (period/10) and
/// the parabolic-refinement window (period/20 half-width).
struct ExtremaConfig {
    double min_prominence_db = 0.05;
    double edge_exclusion = 0.02;
    double expected_period_s = 2.5e-3;

    void validate() const {
        if (!(min_prominence_db > 0.0)) throw std::domain_error("extrema.min_prominence_db: must be > 0");
        if (!(edge_exclusion >= 0.0) || edge_exclusion >= 0.5)
            throw std::domain_error("extrema.edge_exclusion: must be in [0, 0.5)");
        if (!(expected_period_s > 0.0)) throw std::domain_error("extrema.expected_period_s: must be > 0");
    }
};

/// Extrema-averaging result. m_sq/m_asq are NaN when no extremum of that
/// polarity qualified.
struct ExtremaEstimate {
    double m_sq_db = std::numeric_limits<double>::quiet_NaN();
    double m_asq_db = std::numeric_limits<double>::quiet_NaN();
    int n_minima = 0;
    int n_maxima = 0;
    bool detectable = false;
};

/// Per-frequency squeezing estimate, with the efficiency assumptions used
/// and the loss-inverted at-crystal values. NaN fields mean "not available"
/// (no extrema, or inversion outside the physical domain).
struct SqueezingReport {
    double f_center_hz = 0.0;
    double m_sq_db = std::numeric_limits<double>::quiet_NaN();
    double m_asq_db = std::numeric_limits<double>::quiet_NaN();
    int n_minima = 0;
    int n_maxima = 0;
    double eta_assumed = std::numeric_limits<double>::quiet_NaN();
    double crystal_sq_db = std::numeric_limits<double>::quiet_NaN();
    double crystal_asq_db = std::numeric_limits<double>::quiet_NaN();
    bool detectable = false;
    double clearance_db = std::numeric_limits<double>::quiet_NaN();
    double eta_el = std::numeric_limits<double>::quiet_NaN();
    std::string note;
};

/// Re-reference a signal trace to the measured shot-noise level: subtract
/// the shot trace's mean level (linear-power mean, expressed in dB) from
/// every sample. Acquisition settings must match.
inline EsaTrace normalize_to_shot(const EsaTrace& signal, const EsaTrace& shot_ref) {
    signal.validate();
    shot_ref.validate();
    if (!signal.meta.same_acquisition(shot_ref.meta))
        throw validation_error("traces",
                               "signal and shot reference acquisition settings differ");
    double acc = 0.0;
    for (double db : shot_ref.power_db) acc += std::pow(10.0, db / 10.0);
    const double ref_db = 10.0 * std::log10(acc / static_cast<double>(shot_ref.power_db.size()));

    EsaTrace out = signal;
    for (double& p : out.power_db) p -= ref_db;
    return out;
}

/// Inverse of the loss channel: recover the pre-loss variance from a
/// measured one, v_crystal = (v_measured - (1 - eta)) / eta. Measured
/// variances at or below the loss floor 1 - eta are unphysical.
inline double invert_loss(double measured_v, Efficiency eta) {
    const double floor = 1.0 - eta.value();
    if (!(measured_v > floor))
        throw std::domain_error("invert_loss: measured variance " + std::to_string(measured_v) +
                                " is at or below the loss floor 1 - eta = " +
                                std::to_string(floor) + ", unphysical under eta = " +
                                std::to_string(eta.value()));
    return (measured_v - floor) / eta.value();
}

namespace detail {

struct Extremum {
    int index;
    double value_db;  // refined
};

// Least-squares parabola through samples in [lo, hi]; returns the vertex
// value when the vertex lies inside the window and curvature has the
// expected sign, the raw center sample otherwise.
inline double refine_parabolic(const std::vector<double>& y, int center, int lo, int hi,
                               bool is_minimum) {
    const int m = hi - lo + 1;
    if (m < 5) return y[center];
    // Fit y = a + b*x + c*x^2 with x = index - center (normal equations;
    // odd-power sums cancel only for symmetric windows, so compute all).
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, t0 = 0, t1 = 0, t2 = 0;
    for (int i = lo; i <= hi; ++i) {
        const double x = i - center;
        const double x2 = x * x;
        s0 += 1;
        s1 += x;
        s2 += x2;
        s3 += x2 * x;
        s4 += x2 * x2;
        t0 += y[i];
        t1 += x * y[i];
        t2 += x2 * y[i];
    }
    const double det = s0 * (s2 * s4 - s3 * s3) - s1 * (s1 * s4 - s2 * s3) +
                       s2 * (s1 * s3 - s2 * s2);
    if (std::abs(det) < 1e-30) return y[center];
    const double a = (t0 * (s2 * s4 - s3 * s3) - s1 * (t1 * s4 - t2 * s3) +
                      s2 * (t1 * s3 - t2 * s2)) / det;
    const double b = (s0 * (t1 * s4 - t2 * s3) - t0 * (s1 * s4 - s2 * s3) +
                      s2 * (s1 * t2 - s2 * t1)) / det;
    const double c = (s0 * (s2 * t2 - s3 * t1) - s1 * (s1 * t2 - s3 * t0) +
                      t0 * (s1 * s3 - s2 * s2)) / det;
    if ((is_minimum && c <= 0.0) || (!is_minimum && c >= 0.0)) return y[center];
    const double xv = -b / (2.0 * c);
    if (xv < lo - center || xv > hi - center) return y[center];
    return a + b * xv + c * xv * xv;
}

// Prominence-and-width qualified local extrema of one polarity.
// `sign` is +1 to search maxima, -1 to search minima (the trace is
// sign-flipped so the maxima machinery covers both).
inline std::vector<Extremum> find_extrema(const EsaTrace& trace, const ExtremaConfig& cfg,
                                          int sign) {
    const auto& p = trace.power_db;
    const int n = static_cast<int>(p.size());
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) y[i] = sign * p[i];

    const int margin = static_cast<int>(std::floor(cfg.edge_exclusion * n));
    const int lo = std::max(1, margin);
    const int hi = std::min(n - 2, n - 1 - margin);
    const double dt = trace.dt();
    const double min_width_s = cfg.expected_period_s / 10.0;
    const int fit_half = std::max(2, static_cast<int>(std::lround(cfg.expected_period_s / 20.0 / dt)));

    std::vector<Extremum> out;
    for (int i = lo; i <= hi; ++i) {
        if (!(y[i] > y[i - 1] && y[i] > y[i + 1])) continue;

        // Prominence: lowest saddle between this peak and higher terrain.
        double left_min = y[i], right_min = y[i];
        for (int j = i - 1; j >= margin; --j) {
            if (y[j] > y[i]) break;
            left_min = std::min(left_min, y[j]);
        }
        for (int j = i + 1; j <= n - 1 - margin; ++j) {
            if (y[j] > y[i]) break;
            right_min = std::min(right_min, y[j]);
        }
        const double prominence = y[i] - std::max(left_min, right_min);
        if (prominence < cfg.min_prominence_db) continue;

        // Width at half prominence; narrow spikes are noise, not sweep extrema.
        const double half_level = y[i] - prominence / 2.0;
        int wl = i, wr = i;
        while (wl > 0 && y[wl - 1] > half_level) --wl;
        while (wr < n - 1 && y[wr + 1] > half_level) ++wr;
        if ((wr - wl) * dt < min_width_s) continue;

        const int flo = std::max(0, i - fit_half);
        const int fhi = std::min(n - 1, i + fit_half);
        const double refined =
            sign * refine_parabolic(y, i, flo, fhi, /*is_minimum=*/false);
        out.push_back({i, refined});
    }
    return out;
}

inline double median_spacing_s(const std::vector<Extremum>& ex, double dt) {
    std::vector<double> gaps;
    for (std::size_t i = 1; i < ex.size(); ++i)
        gaps.push_back((ex[i].index - ex[i - 1].index) * dt);
    if (gaps.empty()) return 0.0;
    std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
    return gaps[gaps.size() / 2];
}

}  // namespace detail

/// Estimate squeezing/anti-squeezing by averaging qualified local
/// minima/maxima of a shot-normalized trace. A minimum or maximum
/// qualifies when its prominence reaches min_prominence_db and its width at
/// half prominence is at least expected_period/10 (narrower features cannot
/// come from the phase sweep). Extremum values are refined by a local
/// least-squares parabola to remove single-sample noise bias.
///
/// The trace counts as detectable only when minima exist at plausible
/// spacings and their mean depth exceeds twice the trace-noise sigma of the
/// acquisition (the "vanishes into trace noise" regime otherwise).
inline ExtremaEstimate estimate_extrema(const EsaTrace& trace, const ExtremaConfig& cfg) {
    trace.validate();
    cfg.validate();
    if (trace.meta.duration_s < 2.0 * cfg.expected_period_s)
        throw std::domain_error("estimate_extrema: trace must span >= 2 expected periods");

    const auto minima = detail::find_extrema(trace, cfg, -1);
    const auto maxima = detail::find_extrema(trace, cfg, +1);

    ExtremaEstimate est;
    est.n_minima = static_cast<int>(minima.size());
    est.n_maxima = static_cast<int>(maxima.size());
    if (!minima.empty()) {
        double acc = 0.0;
        for (const auto& e : minima) acc += e.value_db;
        est.m_sq_db = acc / static_cast<double>(minima.size());
    }
    if (!maxima.empty()) {
        double acc = 0.0;
        for (const auto& e : maxima) acc += e.value_db;
        est.m_asq_db = acc / static_cast<double>(maxima.size());
    }

    bool spacing_ok = true;
    if (minima.size() >= 2) {
        const double med = detail::median_spacing_s(minima, trace.dt());
        // The sweep can visit the squeezed quadrature up to four times per
        // modulation period, so genuine spacings cluster well below the
        // nominal half-period; only order-of-magnitude outliers are noise.
        spacing_ok = med >= cfg.expected_period_s / 8.0 && med <= 2.0 * cfg.expected_period_s;
    }

    const double sigma_db = trace.meta.estimation_noise_db_sigma();
    est.detectable = !minima.empty() && !maxima.empty() && spacing_ok &&
                     (-est.m_sq_db > 2.0 * sigma_db);
    return est;
}

/// Scenario inputs needed to simulate and analyze one acquisition.
struct SweepScenario {
    QuadratureVariances state{1.0, 1.0};
    LossBudget budget;
    DetectorSpec detector;
    SweepConfig sweep;
    EsaConfig esa;
    RngSeed seed;
    ExtremaConfig extrema;
};

/// Simulate signal + shot traces at one center frequency, normalize,
/// estimate extrema, and invert the loss channel.
inline SqueezingReport analyze_at_frequency(const SweepScenario& sc, double f_hz, RngSeed seed,
                                            const TraceOptions& options = {}) {
    SqueezingReport rep;
    rep.f_center_hz = f_hz;
    rep.clearance_db = sc.detector.clearance.clearance_at(f_hz);

    const auto eta_el = eta_el_from_clearance(rep.clearance_db);
    if (!eta_el) {
        rep.note = "no shot-noise visibility (clearance 0 dB)";
        return rep;
    }
    rep.eta_el = eta_el->value();
    const Efficiency eta_total{sc.budget.optical_product() * eta_el->value()};
    rep.eta_assumed = eta_total.value();

    EsaConfig esa = sc.esa;
    esa.f_center_hz = f_hz;
    const EsaTrace signal = simulate_trace_analytic(sc.state, sc.budget, sc.detector, sc.sweep,
                                                    esa, seed, TraceKind::signal, options);
    const EsaTrace shot = simulate_trace_analytic(sc.state, sc.budget, sc.detector, sc.sweep,
                                                  esa, seed, TraceKind::shot_reference, options);
    const EsaTrace normalized = normalize_to_shot(signal, shot);

    ExtremaConfig ecfg = sc.extrema;
    const auto est = estimate_extrema(normalized, ecfg);
    rep.m_sq_db = est.m_sq_db;
    rep.m_asq_db = est.m_asq_db;
    rep.n_minima = est.n_minima;
    rep.n_maxima = est.n_maxima;
    rep.detectable = est.detectable;

    auto invert_db = [&](double measured_db) -> double {
        const double v = variance_from_db(measured_db);
        if (!(v > 1.0 - eta_total.value())) return std::numeric_limits<double>::quiet_NaN();
        return db_from_variance(invert_loss(v, eta_total));
    };
    if (std::isfinite(rep.m_sq_db)) rep.crystal_sq_db = invert_db(rep.m_sq_db);
    if (std::isfinite(rep.m_asq_db)) rep.crystal_asq_db = invert_db(rep.m_asq_db);
    return rep;
}

/// Run analyze_at_frequency across a frequency list. Per-frequency failures
/// become per-entry notes instead of aborting the sweep. Work is spread
/// over up to max_threads threads (0 = hardware concurrency); per-frequency
/// seeds are derived from the scenario seed and the list index, so results
/// do not depend on the schedule.
inline std::vector<SqueezingReport> frequency_sweep(const SweepScenario& sc,
                                                    const std::vector<double>& frequencies,
                                                    unsigned max_threads = 0,
                                                    const TraceOptions& options = {}) {
    if (frequencies.empty()) throw validation_error("frequencies", "list must be non-empty");
    std::vector<SqueezingReport> reports(frequencies.size());

    unsigned n_threads = max_threads ? max_threads : std::thread::hardware_concurrency();
    n_threads = std::max(1u, std::min<unsigned>(n_threads, frequencies.size()));

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= frequencies.size()) return;
            const RngSeed seed_i = derive_seed(sc.seed, 1000 + i);
            try {
                reports[i] = analyze_at_frequency(sc, frequencies[i], seed_i, options);
            } catch (const std::exception& e) {
                reports[i] = SqueezingReport{};
                reports[i].f_center_hz = frequencies[i];
                reports[i].detectable = false;
                reports[i].note = e.what();
            }
        }
    };

    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return reports;
}

}  // namespace homodyne
