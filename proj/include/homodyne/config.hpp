#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "homodyne/analysis.hpp"
#include "homodyne/detector.hpp"
#include "homodyne/errors.hpp"
#include "homodyne/esa.hpp"
#include "homodyne/pump_chain.hpp"
#include "homodyne/rng.hpp"

namespace homodyne {

using json = nlohmann::ordered_json;

/// Complete scenario description, JSON round-trippable. The default-built
/// value is the bundled reference scenario (50 MHz acquisition with the
/// default receiver and pump chain); configs/paper-default.json carries the
/// same numbers. The budget split between escape/path efficiencies is an
/// assumption: only the total detection efficiency at 50 MHz (0.51) is
/// constrained, and eta_path is chosen to pin that product exactly.
struct ScenarioConfig {
    PumpChainSpec pump_chain;
    DetectorSpec detector;
    LossBudget budget{Efficiency{0.8}, Efficiency{0.7295190883617999},
                      Efficiency{0.8798878709677419}};
    SweepConfig sweep;
    EsaConfig esa;
    RngSeed seed{424242};
    double extrema_min_prominence_db = 0.05;
    double extrema_edge_exclusion = 0.02;
    std::optional<double> extrema_expected_period_s;  // default: 1/(2 f_mod)

    ExtremaConfig extrema() const {
        ExtremaConfig cfg;
        cfg.min_prominence_db = extrema_min_prominence_db;
        cfg.edge_exclusion = extrema_edge_exclusion;
        cfg.expected_period_s =
            extrema_expected_period_s.value_or(1.0 / (2.0 * sweep.f_mod_hz));
        return cfg;
    }

    void validate() const {
        pump_chain.validate();
        detector.validate();
        sweep.validate();
        esa.validate();
        extrema().validate();
    }

    SweepScenario scenario() const {
        validate();
        return SweepScenario{squeezed_state_from(pump_chain), budget,   detector, sweep,
                             esa,                             seed,     extrema()};
    }
};

namespace detail {

inline void reject_unknown_keys(const json& obj, const std::string& path,
                                std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw validation_error(path + "." + key, "unknown key");
    }
}

inline const json& require(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw validation_error(path + "." + key, "missing required key");
    return *it;
}

inline double require_number(const json& obj, const std::string& path, const char* key) {
    const json& v = require(obj, path, key);
    if (!v.is_number()) throw validation_error(path + "." + key, "expected a number");
    return v.get<double>();
}

inline json require_object(const json& obj, const std::string& path, const char* key) {
    const json& v = require(obj, path, key);
    if (!v.is_object()) throw validation_error(path + "." + key, "expected an object");
    return v;
}

}  // namespace detail

inline json to_json(const ScenarioConfig& c) {
    json j;
    j["pump_chain"] = {{"p_ir_dbm", c.pump_chain.p_ir_dbm},
                       {"shg_eff_per_w", c.pump_chain.shg_eff_per_w},
                       {"mu_per_sqrt_w", c.pump_chain.mu_per_sqrt_w},
                       {"detuning_rad", c.pump_chain.detuning_rad}};
    json anchors = json::array();
    for (const auto& [f, db] : c.detector.clearance.anchors()) anchors.push_back({f, db});
    j["detector"] = {{"responsivity_a_per_w", c.detector.responsivity_a_per_w},
                     {"nep_w_sqrthz", c.detector.nep_w_sqrthz},
                     {"cmrr_db", c.detector.cmrr_db},
                     {"bandwidth_3db_hz", c.detector.bandwidth_3db_hz},
                     {"clearance_anchors", anchors}};
    j["budget"] = {{"eta_escape", c.budget.eta_escape.value()},
                   {"eta_path", c.budget.eta_path.value()},
                   {"eta_pd", c.budget.eta_pd.value()}};
    j["sweep"] = {{"f_mod_hz", c.sweep.f_mod_hz},
                  {"waveform", c.sweep.waveform == SweepWaveform::sinusoidal ? "sinusoidal"
                                                                             : "triangular"},
                  {"amplitude_rad", c.sweep.amplitude_rad},
                  {"offset_rad", c.sweep.offset_rad}};
    j["esa"] = {{"f_center_hz", c.esa.f_center_hz},
                {"rbw_hz", c.esa.rbw_hz},
                {"vbw_hz", c.esa.vbw_hz},
                {"duration_s", c.esa.duration_s},
                {"n_points", c.esa.n_points}};
    j["seed"] = c.seed.value;
    json extrema = {{"min_prominence_db", c.extrema_min_prominence_db},
                    {"edge_exclusion", c.extrema_edge_exclusion}};
    if (c.extrema_expected_period_s) extrema["expected_period_s"] = *c.extrema_expected_period_s;
    j["extrema"] = extrema;
    return j;
}

/// Strict parse: every scenario key is required (except
/// extrema.expected_period_s), unknown keys are rejected, and every domain
/// invariant is checked. Errors name the offending field path.
inline ScenarioConfig scenario_from_json(const json& root) {
    if (!root.is_object()) throw validation_error("config", "top level must be an object");
    detail::reject_unknown_keys(
        root, "config", {"pump_chain", "detector", "budget", "sweep", "esa", "seed", "extrema"});

    ScenarioConfig c;

    const json pump = detail::require_object(root, "config", "pump_chain");
    detail::reject_unknown_keys(pump, "pump_chain",
                                {"p_ir_dbm", "shg_eff_per_w", "mu_per_sqrt_w", "detuning_rad"});
    c.pump_chain.p_ir_dbm = detail::require_number(pump, "pump_chain", "p_ir_dbm");
    c.pump_chain.shg_eff_per_w = detail::require_number(pump, "pump_chain", "shg_eff_per_w");
    c.pump_chain.mu_per_sqrt_w = detail::require_number(pump, "pump_chain", "mu_per_sqrt_w");
    c.pump_chain.detuning_rad = detail::require_number(pump, "pump_chain", "detuning_rad");

    const json det = detail::require_object(root, "config", "detector");
    detail::reject_unknown_keys(det, "detector",
                                {"responsivity_a_per_w", "nep_w_sqrthz", "cmrr_db",
                                 "bandwidth_3db_hz", "clearance_anchors"});
    c.detector.responsivity_a_per_w = detail::require_number(det, "detector", "responsivity_a_per_w");
    c.detector.nep_w_sqrthz = detail::require_number(det, "detector", "nep_w_sqrthz");
    c.detector.cmrr_db = detail::require_number(det, "detector", "cmrr_db");
    c.detector.bandwidth_3db_hz = detail::require_number(det, "detector", "bandwidth_3db_hz");
    const json& anchors = detail::require(det, "detector", "clearance_anchors");
    if (!anchors.is_array())
        throw validation_error("detector.clearance_anchors", "expected an array of [hz, db]");
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        const json& a = anchors[i];
        if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
            throw validation_error("detector.clearance_anchors[" + std::to_string(i) + "]",
                                   "expected [hz, db]");
        pairs.emplace_back(a[0].get<double>(), a[1].get<double>());
    }
    try {
        c.detector.clearance = ClearanceCurve{pairs};
    } catch (const std::domain_error& e) {
        throw validation_error("detector.clearance_anchors", e.what());
    }

    const json budget = detail::require_object(root, "config", "budget");
    detail::reject_unknown_keys(budget, "budget", {"eta_escape", "eta_path", "eta_pd"});
    auto eff = [&](const char* key) {
        const double v = detail::require_number(budget, "budget", key);
        try {
            return Efficiency{v};
        } catch (const std::domain_error& e) {
            throw validation_error(std::string("budget.") + key, e.what());
        }
    };
    c.budget = LossBudget{eff("eta_escape"), eff("eta_path"), eff("eta_pd")};

    const json sweep = detail::require_object(root, "config", "sweep");
    detail::reject_unknown_keys(sweep, "sweep",
                                {"f_mod_hz", "waveform", "amplitude_rad", "offset_rad"});
    c.sweep.f_mod_hz = detail::require_number(sweep, "sweep", "f_mod_hz");
    const json& wf = detail::require(sweep, "sweep", "waveform");
    if (!wf.is_string() || (wf != "sinusoidal" && wf != "triangular"))
        throw validation_error("sweep.waveform", "expected \"sinusoidal\" or \"triangular\"");
    c.sweep.waveform =
        wf == "sinusoidal" ? SweepWaveform::sinusoidal : SweepWaveform::triangular;
    c.sweep.amplitude_rad = detail::require_number(sweep, "sweep", "amplitude_rad");
    c.sweep.offset_rad = detail::require_number(sweep, "sweep", "offset_rad");

    const json esa = detail::require_object(root, "config", "esa");
    detail::reject_unknown_keys(esa, "esa",
                                {"f_center_hz", "rbw_hz", "vbw_hz", "duration_s", "n_points"});
    c.esa.f_center_hz = detail::require_number(esa, "esa", "f_center_hz");
    c.esa.rbw_hz = detail::require_number(esa, "esa", "rbw_hz");
    c.esa.vbw_hz = detail::require_number(esa, "esa", "vbw_hz");
    c.esa.duration_s = detail::require_number(esa, "esa", "duration_s");
    const json& np = detail::require(esa, "esa", "n_points");
    if (!np.is_number_integer()) throw validation_error("esa.n_points", "expected an integer");
    c.esa.n_points = np.get<int>();

    const json& seed = detail::require(root, "config", "seed");
    if (!seed.is_number_unsigned() && !seed.is_number_integer())
        throw validation_error("config.seed", "expected an unsigned integer");
    c.seed = RngSeed{seed.get<std::uint64_t>()};

    const json extrema = detail::require_object(root, "config", "extrema");
    detail::reject_unknown_keys(extrema, "extrema",
                                {"min_prominence_db", "edge_exclusion", "expected_period_s"});
    c.extrema_min_prominence_db =
        detail::require_number(extrema, "extrema", "min_prominence_db");
    c.extrema_edge_exclusion = detail::require_number(extrema, "extrema", "edge_exclusion");
    if (auto it = extrema.find("expected_period_s"); it != extrema.end() && !it->is_null())
        c.extrema_expected_period_s = it->get<double>();

    try {
        c.validate();
    } catch (const std::domain_error& e) {
        throw validation_error(e.what());
    }
    return c;
}

inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config: " + path);
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw validation_error(path, std::string("JSON parse error: ") + e.what());
    }
    return scenario_from_json(root);
}

}  // namespace homodyne
