#ifndef APFSIM_SCENARIO_HPP
#define APFSIM_SCENARIO_HPP

#include <array>
#include <cstdint>
#include <string>

#include "apfsim/control.hpp"
#include "apfsim/emd.hpp"
#include "apfsim/plant.hpp"

namespace apfsim {

/// Full description of one simulation run. Default-constructed values are
/// the bundled reference scenario, so an empty JSON object runs it as-is.
struct ScenarioConfig {
    plant::SourceSpec source;
    plant::LineSpec line;
    std::array<plant::LoadSpec, 3> loads{
        plant::LoadSpec{plant::LoadKind::HalfWaveRectified, 100.0, 0.0, 1.0},
        plant::LoadSpec{plant::LoadKind::Linear, 600.0, 1.0, 1.0},
        plant::LoadSpec{plant::LoadKind::ClippedResistive, 500.0, 0.0, 0.7},
    };
    plant::DisturbanceSpec disturbance;
    plant::ConverterSpec converter;
    emd::EmdConfig emd;

    control::StrategyKind strategy = control::StrategyKind::EmdHybrid;
    double control_window = 0.020;  // s, one fundamental period
    double control_hop = 0.005;     // s
    control::ResidualSign residual_sign = control::ResidualSign::Physical;
    control::HysteresisPolarity hysteresis_polarity = control::HysteresisPolarity::Physical;
    double voltage_floor_fraction = 0.01;
    bool force_zero_residual = false;

    double dt = 2e-5;
    double duration = 0.2;
    std::uint64_t seed = 12345;
    double settling_time = 0.06;    // metrics evaluation start
    double metrics_window = 0.02;   // PF / THD window

    double nominal_peak_volts() const;
    double nominal_voltage_norm() const;  // |v| of the balanced set in ab0
    double resolved_disturbance_amplitude() const;
};

/// Throws ConfigInvalid naming the offending field.
void validate(const ScenarioConfig& cfg);

ScenarioConfig scenario_from_json_text(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);
std::string scenario_to_json_text(const ScenarioConfig& cfg);

/// Fixed-step closed-loop run of the configured system.
plant::SimulationTrace simulate(const ScenarioConfig& cfg);

}  // namespace apfsim

#endif
