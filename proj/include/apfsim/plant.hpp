#ifndef APFSIM_PLANT_HPP
#define APFSIM_PLANT_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "apfsim/control.hpp"
#include "apfsim/power.hpp"
#include "apfsim/transform.hpp"

namespace apfsim::plant {

struct SourceSpec {
    double voltage_rms = 110.0;  // line-to-neutral
    double frequency = 50.0;
    std::array<double, 3> amplitude_offsets{0.0, 0.0, 0.0};  // volts, added to RMS
    std::array<double, 3> phase_offsets{0.0, 0.0, 0.0};      // radians
};

struct LineSpec {
    double resistance = 0.07;   // ohms
    double inductance = 0.045;  // henries
};

enum class LoadKind { Linear, HalfWaveRectified, ClippedResistive };

struct LoadSpec {
    LoadKind kind = LoadKind::Linear;
    double resistance = 100.0;
    double inductance = 0.0;     // Linear only
    double clip_fraction = 1.0;  // ClippedResistive only
};

struct DisturbanceSpec {
    int target_line = 1;     // 1-based phase index (1 = R)
    double start = 0.088;    // s
    double end = 0.094;      // s
    double amplitude_scale = 0.3;  // of the nominal load peak
    double amplitude = -1.0;       // amperes; >= 0 overrides the scale
    double center = 750.0;         // Hz
    double bandwidth = 500.0;      // Hz
};

enum class ConverterMode { Ideal, Switched };

struct ConverterSpec {
    ConverterMode mode = ConverterMode::Ideal;
    double vdc = 400.0;
    double filter_inductance = 3e-3;
    double filter_resistance = 0.05;
    double hysteresis_band = 0.5;  // amperes
    double apf_on_time = 0.04;     // s
};

/// v_R = sqrt(2) V sin(wt), S and T shifted by -/+ 2pi/3, offsets applied.
ThreePhaseSample source_voltages(double t, const SourceSpec& spec);

struct LoadState {
    double current = 0.0;  // RL branch state
    double v_prev = 0.0;
};

/// One per-phase load law. Linear RL integrates trapezoidally; the
/// rectified and clipped kinds are memoryless.
class LoadModel {
  public:
    LoadModel() = default;
    LoadModel(const LoadSpec& spec, double nominal_peak_volts);

    /// Current at the terminal voltage; advances internal state.
    double step(double v, double dt);

    const LoadState& state() const { return state_; }
    void set_state(const LoadState& s) { state_ = s; }
    double clip_volts() const { return clip_volts_; }

  private:
    LoadSpec spec_;
    double clip_volts_ = 0.0;
    LoadState state_;
};

/// Spec-level convenience wrapper over LoadModel.
double load_current(double v, LoadState& state, const LoadSpec& spec, double dt,
                    double nominal_peak_volts);

/// Seeded multitone burst, crest-reduced, peak-normalized to the amplitude,
/// raised-cosine ramps at both ends. Zero outside [start, end].
class DisturbanceGenerator {
  public:
    DisturbanceGenerator() = default;
    DisturbanceGenerator(const DisturbanceSpec& spec, double amplitude, std::uint64_t seed,
                         double dt);

    double value(double t) const;
    double amplitude() const { return amplitude_; }

  private:
    double raw(double t) const;

    DisturbanceSpec spec_;
    double amplitude_ = 0.0;
    double scale_ = 0.0;
    double ramp_ = 0.5e-3;
    std::vector<double> tone_freqs_;
    std::vector<double> tone_phases_;
};

/// One converter leg behind the interface inductor, switched against the
/// stiff bus voltage at its terminal. The DC-link drive is constant over
/// each step; only the continuous terminal voltage is endpoint-averaged.
struct SwitchedLeg {
    control::LegState state = control::LegState::LowerOn;
    double current = 0.0;
    double v_prev = 0.0;  // terminal voltage at the previous step

    /// Hysteresis decision + one integration step.
    double step(double i_ref, double v_terminal, const ConverterSpec& spec, double dt,
                control::HysteresisPolarity polarity);
};

/// Per-step simulation record, column-wise.
struct SimulationTrace {
    double dt = 0.0;
    double sample_rate = 0.0;
    control::StrategyKind strategy = control::StrategyKind::EmdHybrid;

    std::vector<double> time;
    std::vector<ThreePhaseSample> v_src;   // stiff bus EMF
    std::vector<ThreePhaseSample> v_pcc;   // sending-end voltage: EMF - line RL drop
    std::vector<ThreePhaseSample> i_load;  // load branches
    std::vector<ThreePhaseSample> i_meas;  // CT view: load + disturbance
    std::vector<ThreePhaseSample> i_apf;   // converter leg currents
    std::vector<ThreePhaseSample> i_src;   // line currents (KCL: i_meas - i_apf)
    std::vector<ThreePhaseSample> ref;     // per-phase reference, this tick
    std::vector<double> i_dist;
    std::vector<double> i_apf_n;
    std::vector<double> ref_n;
    std::vector<double> i_neutral_src;
    std::vector<double> i_neutral_load;
    std::vector<power::PowerSample> source_power;  // from (v_pcc, i_src)
    std::vector<std::array<int, 4>> switch_states; // +1 upper, -1 lower, 0 off

    std::size_t size() const { return time.size(); }
};

}  // namespace apfsim::plant

#endif
