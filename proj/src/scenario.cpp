#include "apfsim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace apfsim {

using nlohmann::json;

double ScenarioConfig::nominal_peak_volts() const {
    return std::sqrt(2.0) * source.voltage_rms;
}

double ScenarioConfig::nominal_voltage_norm() const {
    // Balanced set: v_r^2 + v_s^2 + v_t^2 = 3 * Vrms^2 at every instant.
    return std::sqrt(3.0) * source.voltage_rms;
}

double ScenarioConfig::resolved_disturbance_amplitude() const {
    if (disturbance.amplitude >= 0.0) return disturbance.amplitude;
    double r_min = loads[0].resistance;
    for (const auto& l : loads) r_min = std::min(r_min, l.resistance);
    return disturbance.amplitude_scale * nominal_peak_volts() / r_min;
}

namespace {

bool divides(double whole, double part) {
    if (part <= 0.0) return false;
    const double k = whole / part;
    return std::abs(k - std::llround(k)) < 1e-6;
}

}  // namespace

void validate(const ScenarioConfig& cfg) {
    if (!(cfg.source.voltage_rms > 0.0)) throw ConfigInvalid("source.voltage_rms", "must be > 0");
    if (!(cfg.source.frequency > 0.0)) throw ConfigInvalid("source.frequency", "must be > 0");
    if (cfg.line.resistance < 0.0) throw ConfigInvalid("line.resistance", "must be >= 0");
    if (cfg.line.inductance < 0.0) throw ConfigInvalid("line.inductance", "must be >= 0");
    if (cfg.line.resistance == 0.0 && cfg.line.inductance == 0.0) {
        throw ConfigInvalid("line", "resistance and inductance cannot both be zero");
    }
    for (std::size_t k = 0; k < 3; ++k) {
        const auto& l = cfg.loads[k];
        const std::string base = "loads[" + std::to_string(k) + "].";
        if (!(l.resistance > 0.0)) throw ConfigInvalid(base + "resistance", "must be > 0");
        if (l.inductance < 0.0) throw ConfigInvalid(base + "inductance", "must be >= 0");
        if (!(l.clip_fraction > 0.0) || l.clip_fraction > 1.0) {
            throw ConfigInvalid(base + "clip_fraction", "must lie in (0, 1]");
        }
    }
    if (cfg.disturbance.target_line < 1 || cfg.disturbance.target_line > 3) {
        throw ConfigInvalid("disturbance.target_line", "must be 1, 2 or 3");
    }
    if (cfg.disturbance.start > cfg.disturbance.end) {
        throw ConfigInvalid("disturbance.start", "must not exceed disturbance.end");
    }
    if (cfg.disturbance.amplitude < 0.0 && cfg.disturbance.amplitude != -1.0) {
        throw ConfigInvalid("disturbance.amplitude", "must be >= 0 (or -1 for scaled default)");
    }
    if (cfg.disturbance.amplitude_scale < 0.0) {
        throw ConfigInvalid("disturbance.amplitude_scale", "must be >= 0");
    }
    if (!(cfg.disturbance.bandwidth > 0.0) ||
        cfg.disturbance.center - cfg.disturbance.bandwidth / 2.0 <= 0.0) {
        throw ConfigInvalid("disturbance.bandwidth", "band must stay above 0 Hz");
    }
    if (!(cfg.converter.vdc / 2.0 > cfg.nominal_peak_volts())) {
        throw ConfigInvalid("converter.vdc", "Vdc/2 must exceed the nominal peak voltage");
    }
    if (!(cfg.converter.filter_inductance > 0.0)) {
        throw ConfigInvalid("converter.filter_inductance", "must be > 0");
    }
    if (!(cfg.converter.hysteresis_band > 0.0)) {
        throw ConfigInvalid("converter.hysteresis_band", "must be > 0");
    }
    if (!(cfg.emd.sd_threshold > 0.0)) throw ConfigInvalid("emd.sd_threshold", "must be > 0");
    if (cfg.emd.max_sift_iterations < 1) {
        throw ConfigInvalid("emd.max_sift_iterations", "must be >= 1");
    }
    if (cfg.emd.max_imfs < 1) throw ConfigInvalid("emd.max_imfs", "must be >= 1");
    if (!(cfg.dt > 0.0)) throw ConfigInvalid("sim.dt", "must be > 0");
    if (!(cfg.duration > 0.0)) throw ConfigInvalid("sim.duration", "must be > 0");
    if (!(cfg.duration > cfg.converter.apf_on_time)) {
        throw ConfigInvalid("sim.duration", "must exceed converter.apf_on_time");
    }
    if (!divides(cfg.control_window, cfg.dt)) {
        throw ConfigInvalid("control.window", "must be an integer multiple of dt");
    }
    if (!divides(cfg.control_hop, cfg.dt)) {
        throw ConfigInvalid("control.hop", "must be an integer multiple of dt");
    }
    const double quarter = 0.25 / cfg.source.frequency;
    if (cfg.control_window < 2.0 * quarter) {
        throw ConfigInvalid("control.window", "must span at least two fundamental quarter-periods");
    }
    if (cfg.control_hop > cfg.control_window) {
        throw ConfigInvalid("control.hop", "must not exceed control.window");
    }
    if (!(cfg.voltage_floor_fraction > 0.0) || cfg.voltage_floor_fraction >= 1.0) {
        throw ConfigInvalid("control.voltage_floor_fraction", "must lie in (0, 1)");
    }
    if (!(cfg.metrics_window > 0.0)) throw ConfigInvalid("sim.metrics_window", "must be > 0");
    if (cfg.settling_time < 0.0) throw ConfigInvalid("sim.settling_time", "must be >= 0");
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> keys,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) throw ConfigInvalid(where + "." + it.key(), "unknown field");
    }
}

template <typename T>
void get_to(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        j.at(key).get_to(out);
    } catch (const json::exception&) {
        throw ConfigInvalid(where + "." + key, "wrong type");
    }
}

plant::LoadKind load_kind_from(const std::string& s, const std::string& where) {
    if (s == "linear") return plant::LoadKind::Linear;
    if (s == "half_wave_rectified") return plant::LoadKind::HalfWaveRectified;
    if (s == "clipped_resistive") return plant::LoadKind::ClippedResistive;
    throw ConfigInvalid(where, "unknown load kind '" + s + "'");
}

std::string load_kind_name(plant::LoadKind k) {
    switch (k) {
        case plant::LoadKind::Linear: return "linear";
        case plant::LoadKind::HalfWaveRectified: return "half_wave_rectified";
        case plant::LoadKind::ClippedResistive: return "clipped_resistive";
    }
    return "linear";
}

}  // namespace

ScenarioConfig scenario_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigInvalid("(root)", std::string("not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigInvalid("(root)", "must be a JSON object");

    ScenarioConfig cfg;
    reject_unknown(j, {"source", "line", "loads", "disturbance", "converter", "emd", "control",
                       "sim"},
                   "(root)");

    if (j.contains("source")) {
        const auto& s = j.at("source");
        reject_unknown(s, {"voltage_rms", "frequency", "amplitude_offsets", "phase_offsets"},
                       "source");
        get_to(s, "voltage_rms", cfg.source.voltage_rms, "source");
        get_to(s, "frequency", cfg.source.frequency, "source");
        get_to(s, "amplitude_offsets", cfg.source.amplitude_offsets, "source");
        get_to(s, "phase_offsets", cfg.source.phase_offsets, "source");
    }
    if (j.contains("line")) {
        const auto& s = j.at("line");
        reject_unknown(s, {"resistance", "inductance"}, "line");
        get_to(s, "resistance", cfg.line.resistance, "line");
        get_to(s, "inductance", cfg.line.inductance, "line");
    }
    if (j.contains("loads")) {
        const auto& arr = j.at("loads");
        if (!arr.is_array() || arr.size() != 3) {
            throw ConfigInvalid("loads", "must be an array of exactly 3 per-phase loads");
        }
        for (std::size_t k = 0; k < 3; ++k) {
            const auto& s = arr.at(k);
            const std::string where = "loads[" + std::to_string(k) + "]";
            reject_unknown(s, {"kind", "resistance", "inductance", "clip_fraction"}, where);
            std::string kind = load_kind_name(cfg.loads[k].kind);
            get_to(s, "kind", kind, where);
            cfg.loads[k].kind = load_kind_from(kind, where + ".kind");
            get_to(s, "resistance", cfg.loads[k].resistance, where);
            get_to(s, "inductance", cfg.loads[k].inductance, where);
            get_to(s, "clip_fraction", cfg.loads[k].clip_fraction, where);
        }
    }
    if (j.contains("disturbance")) {
        const auto& s = j.at("disturbance");
        reject_unknown(s, {"target_line", "start", "end", "amplitude_scale", "amplitude",
                           "center", "bandwidth"},
                       "disturbance");
        get_to(s, "target_line", cfg.disturbance.target_line, "disturbance");
        get_to(s, "start", cfg.disturbance.start, "disturbance");
        get_to(s, "end", cfg.disturbance.end, "disturbance");
        get_to(s, "amplitude_scale", cfg.disturbance.amplitude_scale, "disturbance");
        get_to(s, "amplitude", cfg.disturbance.amplitude, "disturbance");
        get_to(s, "center", cfg.disturbance.center, "disturbance");
        get_to(s, "bandwidth", cfg.disturbance.bandwidth, "disturbance");
    }
    if (j.contains("converter")) {
        const auto& s = j.at("converter");
        reject_unknown(s, {"mode", "vdc", "filter_inductance", "filter_resistance",
                           "hysteresis_band", "apf_on_time"},
                       "converter");
        std::string mode = cfg.converter.mode == plant::ConverterMode::Ideal ? "ideal" : "switched";
        get_to(s, "mode", mode, "converter");
        if (mode == "ideal") cfg.converter.mode = plant::ConverterMode::Ideal;
        else if (mode == "switched") cfg.converter.mode = plant::ConverterMode::Switched;
        else throw ConfigInvalid("converter.mode", "must be 'ideal' or 'switched'");
        get_to(s, "vdc", cfg.converter.vdc, "converter");
        get_to(s, "filter_inductance", cfg.converter.filter_inductance, "converter");
        get_to(s, "filter_resistance", cfg.converter.filter_resistance, "converter");
        get_to(s, "hysteresis_band", cfg.converter.hysteresis_band, "converter");
        get_to(s, "apf_on_time", cfg.converter.apf_on_time, "converter");
    }
    if (j.contains("emd")) {
        const auto& s = j.at("emd");
        reject_unknown(s, {"sd_threshold", "max_sift_iterations", "max_imfs",
                           "boundary_extension"},
                       "emd");
        get_to(s, "sd_threshold", cfg.emd.sd_threshold, "emd");
        get_to(s, "max_sift_iterations", cfg.emd.max_sift_iterations, "emd");
        get_to(s, "max_imfs", cfg.emd.max_imfs, "emd");
        get_to(s, "boundary_extension", cfg.emd.boundary_extension, "emd");
    }
    if (j.contains("control")) {
        const auto& s = j.at("control");
        reject_unknown(s, {"strategy", "window", "hop", "residual_sign", "hysteresis_polarity",
                           "voltage_floor_fraction", "force_zero_residual"},
                       "control");
        std::string strat =
            cfg.strategy == control::StrategyKind::EmdHybrid ? "emd_hybrid" : "plain_modified_pq";
        get_to(s, "strategy", strat, "control");
        if (strat == "emd_hybrid") cfg.strategy = control::StrategyKind::EmdHybrid;
        else if (strat == "plain_modified_pq") cfg.strategy = control::StrategyKind::PlainModifiedPq;
        else throw ConfigInvalid("control.strategy", "must be 'emd_hybrid' or 'plain_modified_pq'");
        get_to(s, "window", cfg.control_window, "control");
        get_to(s, "hop", cfg.control_hop, "control");
        std::string sign =
            cfg.residual_sign == control::ResidualSign::Physical ? "physical" : "paper_printed";
        get_to(s, "residual_sign", sign, "control");
        if (sign == "physical") cfg.residual_sign = control::ResidualSign::Physical;
        else if (sign == "paper_printed") cfg.residual_sign = control::ResidualSign::PaperPrinted;
        else throw ConfigInvalid("control.residual_sign", "must be 'physical' or 'paper_printed'");
        std::string pol = cfg.hysteresis_polarity == control::HysteresisPolarity::Physical
                              ? "physical"
                              : "paper_printed";
        get_to(s, "hysteresis_polarity", pol, "control");
        if (pol == "physical") cfg.hysteresis_polarity = control::HysteresisPolarity::Physical;
        else if (pol == "paper_printed")
            cfg.hysteresis_polarity = control::HysteresisPolarity::PaperPrinted;
        else
            throw ConfigInvalid("control.hysteresis_polarity",
                                "must be 'physical' or 'paper_printed'");
        get_to(s, "voltage_floor_fraction", cfg.voltage_floor_fraction, "control");
        get_to(s, "force_zero_residual", cfg.force_zero_residual, "control");
    }
    if (j.contains("sim")) {
        const auto& s = j.at("sim");
        reject_unknown(s, {"dt", "duration", "seed", "settling_time", "metrics_window"}, "sim");
        get_to(s, "dt", cfg.dt, "sim");
        get_to(s, "duration", cfg.duration, "sim");
        get_to(s, "seed", cfg.seed, "sim");
        get_to(s, "settling_time", cfg.settling_time, "sim");
        get_to(s, "metrics_window", cfg.metrics_window, "sim");
    }

    validate(cfg);
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("(file)", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_from_json_text(ss.str());
}

std::string scenario_to_json_text(const ScenarioConfig& cfg) {
    json j;
    j["source"] = {{"voltage_rms", cfg.source.voltage_rms},
                   {"frequency", cfg.source.frequency},
                   {"amplitude_offsets", cfg.source.amplitude_offsets},
                   {"phase_offsets", cfg.source.phase_offsets}};
    j["line"] = {{"resistance", cfg.line.resistance}, {"inductance", cfg.line.inductance}};
    j["loads"] = json::array();
    for (const auto& l : cfg.loads) {
        json e = {{"kind", load_kind_name(l.kind)}, {"resistance", l.resistance}};
        if (l.kind == plant::LoadKind::Linear) e["inductance"] = l.inductance;
        if (l.kind == plant::LoadKind::ClippedResistive) e["clip_fraction"] = l.clip_fraction;
        j["loads"].push_back(e);
    }
    j["disturbance"] = {{"target_line", cfg.disturbance.target_line},
                        {"start", cfg.disturbance.start},
                        {"end", cfg.disturbance.end},
                        {"amplitude_scale", cfg.disturbance.amplitude_scale},
                        {"amplitude", cfg.disturbance.amplitude},
                        {"center", cfg.disturbance.center},
                        {"bandwidth", cfg.disturbance.bandwidth}};
    j["converter"] = {{"mode", cfg.converter.mode == plant::ConverterMode::Ideal ? "ideal"
                                                                                 : "switched"},
                      {"vdc", cfg.converter.vdc},
                      {"filter_inductance", cfg.converter.filter_inductance},
                      {"filter_resistance", cfg.converter.filter_resistance},
                      {"hysteresis_band", cfg.converter.hysteresis_band},
                      {"apf_on_time", cfg.converter.apf_on_time}};
    j["emd"] = {{"sd_threshold", cfg.emd.sd_threshold},
                {"max_sift_iterations", cfg.emd.max_sift_iterations},
                {"max_imfs", cfg.emd.max_imfs},
                {"boundary_extension", cfg.emd.boundary_extension}};
    j["control"] = {{"strategy", cfg.strategy == control::StrategyKind::EmdHybrid
                                     ? "emd_hybrid"
                                     : "plain_modified_pq"},
                    {"window", cfg.control_window},
                    {"hop", cfg.control_hop},
                    {"residual_sign", cfg.residual_sign == control::ResidualSign::Physical
                                          ? "physical"
                                          : "paper_printed"},
                    {"hysteresis_polarity",
                     cfg.hysteresis_polarity == control::HysteresisPolarity::Physical
                         ? "physical"
                         : "paper_printed"},
                    {"voltage_floor_fraction", cfg.voltage_floor_fraction},
                    {"force_zero_residual", cfg.force_zero_residual}};
    j["sim"] = {{"dt", cfg.dt},
                {"duration", cfg.duration},
                {"seed", cfg.seed},
                {"settling_time", cfg.settling_time},
                {"metrics_window", cfg.metrics_window}};
    return j.dump(2) + "\n";
}

}  // namespace apfsim
