// homodyne-lab: scenario simulation and analysis front end.
//
// Subcommands:
//   simulate  write signal/shot/electronic zero-span traces + run manifest
//   analyze   estimate squeezing from a signal + shot trace pair
//   sweep     repeat simulate+analyze across acquisition frequencies
//   invert    undo the loss channel on a measured variance (dB)
//
// Exit codes: 0 ok, 2 validation/config error, 3 I/O error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "homodyne/homodyne.hpp"

namespace fs = std::filesystem;
using homodyne::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

json report_to_json(const homodyne::SqueezingReport& r) {
    json j;
    j["f_center_hz"] = r.f_center_hz;
    j["m_sq_db"] = r.m_sq_db;
    j["m_asq_db"] = r.m_asq_db;
    j["n_minima"] = r.n_minima;
    j["n_maxima"] = r.n_maxima;
    j["eta_assumed"] = r.eta_assumed;
    j["crystal_sq_db"] = r.crystal_sq_db;
    j["crystal_asq_db"] = r.crystal_asq_db;
    j["detectable"] = r.detectable;
    return j;
}

std::string report_to_csv(const homodyne::SqueezingReport& r) {
    std::vector<homodyne::SqueezingReport> one{r};
    return homodyne::sweep_to_csv(one);
}

unsigned thread_cap_from_env() {
    if (const char* env = std::getenv("HOMODYNE_LAB_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return 0;  // auto
}

std::vector<double> parse_frequencies(const std::string& list) {
    std::vector<double> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        double f = 0.0;
        try {
            f = std::stod(item, &pos);
        } catch (const std::exception&) {
            throw homodyne::validation_error("frequencies", "not a number: '" + item + "'");
        }
        if (pos != item.size() || !(f > 0.0))
            throw homodyne::validation_error("frequencies",
                                             "expected a positive frequency, got '" + item + "'");
        out.push_back(f);
    }
    if (out.empty()) throw homodyne::validation_error("frequencies", "list must be non-empty");
    return out;
}

homodyne::ScenarioConfig load_config(const std::string& path,
                                     const std::optional<std::uint64_t>& seed_override) {
    homodyne::ScenarioConfig cfg = homodyne::load_scenario(path);
    if (seed_override) cfg.seed = homodyne::RngSeed{*seed_override};
    return cfg;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 const std::optional<std::uint64_t>& seed_override) {
    const auto cfg = load_config(config_path, seed_override);
    const auto sc = cfg.scenario();

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw homodyne::io_error("cannot create output directory " + out_dir + ": " +
                                     ec.message());

    using homodyne::TraceKind;
    const auto signal = homodyne::simulate_trace_analytic(sc.state, sc.budget, sc.detector,
                                                          sc.sweep, sc.esa, sc.seed,
                                                          TraceKind::signal);
    const auto shot = homodyne::simulate_trace_analytic(sc.state, sc.budget, sc.detector,
                                                        sc.sweep, sc.esa, sc.seed,
                                                        TraceKind::shot_reference);
    const auto electronic = homodyne::simulate_trace_analytic(sc.state, sc.budget, sc.detector,
                                                              sc.sweep, sc.esa, sc.seed,
                                                              TraceKind::electronic_floor);
    const fs::path dir(out_dir);
    homodyne::write_trace_csv(dir / "signal.csv", signal);
    homodyne::write_trace_csv(dir / "shot_ref.csv", shot);
    homodyne::write_trace_csv(dir / "electronic.csv", electronic);

    json manifest;
    manifest["artifact"] = "homodyne-lab";
    manifest["version"] = homodyne::kVersion;
    manifest["command"] = "simulate";
    manifest["config"] = homodyne::to_json(cfg);
    manifest["outputs"] = {{"signal", "signal.csv"},
                           {"shot_reference", "shot_ref.csv"},
                           {"electronic_floor", "electronic.csv"}};
    homodyne::atomic_write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    return 0;
}

int cmd_analyze(const std::string& signal_path, const std::string& shot_path,
                const std::string& config_path, const std::string& out_path,
                const std::string& format) {
    const auto cfg = load_config(config_path, std::nullopt);
    const auto sc = cfg.scenario();

    const auto signal =
        homodyne::read_trace_csv(signal_path, sc.esa, homodyne::TraceKind::signal);
    const auto shot =
        homodyne::read_trace_csv(shot_path, sc.esa, homodyne::TraceKind::shot_reference);
    const auto normalized = homodyne::normalize_to_shot(signal, shot);
    const auto est = homodyne::estimate_extrema(normalized, sc.extrema);

    homodyne::SqueezingReport rep;
    rep.f_center_hz = sc.esa.f_center_hz;
    rep.clearance_db = sc.detector.clearance.clearance_at(sc.esa.f_center_hz);
    rep.m_sq_db = est.m_sq_db;
    rep.m_asq_db = est.m_asq_db;
    rep.n_minima = est.n_minima;
    rep.n_maxima = est.n_maxima;
    rep.detectable = est.detectable;
    if (const auto eta_el = homodyne::eta_el_from_clearance(rep.clearance_db)) {
        rep.eta_el = eta_el->value();
        const homodyne::Efficiency eta_total{sc.budget.optical_product() * eta_el->value()};
        rep.eta_assumed = eta_total.value();
        auto invert_db = [&](double measured_db) {
            const double v = homodyne::variance_from_db(measured_db);
            if (!(v > 1.0 - eta_total.value()))
                return std::numeric_limits<double>::quiet_NaN();
            return homodyne::db_from_variance(homodyne::invert_loss(v, eta_total));
        };
        if (std::isfinite(rep.m_sq_db)) rep.crystal_sq_db = invert_db(rep.m_sq_db);
        if (std::isfinite(rep.m_asq_db)) rep.crystal_asq_db = invert_db(rep.m_asq_db);
    }

    const std::string text =
        format == "csv" ? report_to_csv(rep) : report_to_json(rep).dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        homodyne::atomic_write_text(out_path, text);
    }
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& freq_list,
              const std::string& out_path, const std::string& format,
              const std::optional<std::uint64_t>& seed_override) {
    const auto cfg = load_config(config_path, seed_override);
    const auto sc = cfg.scenario();
    const auto frequencies = parse_frequencies(freq_list);

    const auto reports = homodyne::frequency_sweep(sc, frequencies, thread_cap_from_env());

    std::string text;
    if (format == "json") {
        json arr = json::array();
        for (const auto& r : reports) {
            json j = report_to_json(r);
            j["clearance_db"] = r.clearance_db;
            j["eta_el"] = r.eta_el;
            j["note"] = r.note;
            arr.push_back(j);
        }
        text = arr.dump(2) + "\n";
    } else {
        text = homodyne::sweep_to_csv(reports);
    }
    if (out_path.empty()) {
        std::cout << text;
    } else {
        homodyne::atomic_write_text(out_path, text);
    }

    bool any_ok = false;
    for (const auto& r : reports)
        if (r.note.empty()) any_ok = true;
    return any_ok ? 0 : kExitValidation;
}

int cmd_invert(double measured_db, double eta) {
    homodyne::Efficiency efficiency{eta};
    const double v = homodyne::variance_from_db(measured_db);
    const double crystal = homodyne::invert_loss(v, efficiency);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f\n", homodyne::db_from_variance(crystal));
    std::cout << buf;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Squeezed-light homodyne detection simulator and analysis toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_path, format = "json", freq_list;
    std::string signal_path, shot_path;
    std::optional<std::uint64_t> seed_override;
    double measured_db = 0.0, eta = 1.0;

    auto* simulate = app.add_subcommand("simulate", "Write trace CSVs and a run manifest");
    simulate->add_option("--config", config_path, "Scenario config (JSON)")->required();
    simulate->add_option("--out", out_path, "Output directory")->default_val(".");
    simulate->add_option("--seed", seed_override, "Override the config seed");

    auto* analyze = app.add_subcommand("analyze", "Estimate squeezing from trace CSVs");
    analyze->add_option("signal_csv", signal_path, "Signal trace")->required();
    analyze->add_option("shot_csv", shot_path, "Shot reference trace")->required();
    analyze->add_option("--config", config_path, "Scenario config (JSON)")->required();
    analyze->add_option("--out", out_path, "Report file (default: stdout)");
    analyze->add_option("--format", format, "Report format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->default_val("json");

    auto* sweep = app.add_subcommand("sweep", "Analyze across acquisition frequencies");
    sweep->add_option("--config", config_path, "Scenario config (JSON)")->required();
    sweep->add_option("--frequencies", freq_list, "Comma-separated list in Hz")->required();
    sweep->add_option("--out", out_path, "Output file (default: stdout)");
    sweep->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->default_val("csv");
    sweep->add_option("--seed", seed_override, "Override the config seed");

    auto* invert = app.add_subcommand("invert", "Invert the loss channel on a measured dB value");
    invert->add_option("measured_db", measured_db, "Measured variance, dB rel. shot")->required();
    invert->add_option("eta", eta, "Total detection efficiency in (0, 1]")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(config_path, out_path, seed_override);
        if (analyze->parsed())
            return cmd_analyze(signal_path, shot_path, config_path, out_path, format);
        if (sweep->parsed())
            return cmd_sweep(config_path, freq_list, out_path, format, seed_override);
        if (invert->parsed()) return cmd_invert(measured_db, eta);
    } catch (const homodyne::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const homodyne::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return 0;
}
