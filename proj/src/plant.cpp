#include "apfsim/plant.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include "apfsim/scenario.hpp"
#include "apfsim/transform.hpp"

namespace apfsim::plant {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;
// Measurement bandwidth of the line-drop derivative (one-pole lag).
constexpr double kDerivativeLagTau = 1e-4;
}  // namespace

ThreePhaseSample source_voltages(double t, const SourceSpec& spec) {
    const double w = kTwoPi * spec.frequency;
    ThreePhaseSample v;
    v.r = std::sqrt(2.0) * (spec.voltage_rms + spec.amplitude_offsets[0]) *
          std::sin(w * t + spec.phase_offsets[0]);
    v.s = std::sqrt(2.0) * (spec.voltage_rms + spec.amplitude_offsets[1]) *
          std::sin(w * t - 2.0 * M_PI / 3.0 + spec.phase_offsets[1]);
    v.t = std::sqrt(2.0) * (spec.voltage_rms + spec.amplitude_offsets[2]) *
          std::sin(w * t + 2.0 * M_PI / 3.0 + spec.phase_offsets[2]);
    return v;
}

LoadModel::LoadModel(const LoadSpec& spec, double nominal_peak_volts)
    : spec_(spec), clip_volts_(spec.clip_fraction * nominal_peak_volts) {}

double LoadModel::step(double v, double dt) {
    double i = 0.0;
    switch (spec_.kind) {
        case LoadKind::Linear:
            if (spec_.inductance > 0.0) {
                const double a = dt / (2.0 * spec_.inductance);
                const double den = 1.0 + a * spec_.resistance;
                i = (state_.current * (1.0 - a * spec_.resistance) +
                     a * (state_.v_prev + v)) /
                    den;
            } else {
                i = v / spec_.resistance;
            }
            break;
        case LoadKind::HalfWaveRectified:
            i = v > 0.0 ? v / spec_.resistance : 0.0;
            break;
        case LoadKind::ClippedResistive:
            i = std::clamp(v, -clip_volts_, clip_volts_) / spec_.resistance;
            break;
    }
    state_.current = i;
    state_.v_prev = v;
    return i;
}

double load_current(double v, LoadState& state, const LoadSpec& spec, double dt,
                    double nominal_peak_volts) {
    LoadModel model(spec, nominal_peak_volts);
    model.set_state(state);
    const double i = model.step(v, dt);
    state = model.state();
    return i;
}

DisturbanceGenerator::DisturbanceGenerator(const DisturbanceSpec& spec, double amplitude,
                                           std::uint64_t seed, double dt)
    : spec_(spec), amplitude_(amplitude) {
    if (spec_.end <= spec_.start || amplitude_ <= 0.0) return;

    // Tones spaced so they decorrelate over the burst; too fine a grid and
    // the burst degenerates into a single beating carrier.
    const double span = spec_.end - spec_.start;
    const int max_by_span = std::max(3, static_cast<int>(spec_.bandwidth * span));
    const int tones = std::min(13, max_by_span);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    const double lo = spec_.center - spec_.bandwidth / 2.0;
    for (int j = 0; j < tones; ++j) {
        tone_freqs_.push_back(lo + spec_.bandwidth * (j + 0.5) / tones);
        tone_phases_.push_back(0.0);
    }
    ramp_ = std::min(0.5e-3, span / 2.0);

    const std::size_t n = static_cast<std::size_t>(span / dt) + 1;
    const auto crest_of = [&](const std::vector<double>& ph) {
        double peak = 0.0, acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double t = static_cast<double>(k) * dt;
            double v = 0.0;
            for (std::size_t j = 0; j < tone_freqs_.size(); ++j) {
                v += std::cos(kTwoPi * tone_freqs_[j] * t + ph[j]);
            }
            peak = std::max(peak, std::abs(v));
            acc += v * v;
        }
        return peak / std::sqrt(acc / static_cast<double>(n));
    };

    // Seeded phase search keeps the burst noise-like; the amplitude bound
    // should carry real energy, so favor low peak/rms sets.
    std::vector<double> best = tone_phases_;
    double best_crest = 1e9;
    for (int trial = 0; trial < 96; ++trial) {
        std::vector<double> ph(tone_freqs_.size());
        for (auto& p : ph) p = phase(rng);
        const double c = crest_of(ph);
        if (c < best_crest) {
            best_crest = c;
            best = ph;
        }
    }

    // Clip-and-rephase passes: clip the waveform, least-squares refit the
    // tone phases (the short grid makes the basis non-orthogonal), keep
    // amplitudes equal. Deterministic.
    std::vector<double> x(n);
    const std::size_t kk = tone_freqs_.size();
    for (int pass = 0; pass < 25 && best_crest > 1.5; ++pass) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double t = static_cast<double>(k) * dt;
            double v = 0.0;
            for (std::size_t j = 0; j < kk; ++j) {
                v += std::cos(kTwoPi * tone_freqs_[j] * t + best[j]);
            }
            x[k] = v;
            acc += v * v;
        }
        const double lim = 1.4 * std::sqrt(acc / static_cast<double>(n));
        for (auto& v : x) v = std::clamp(v, -lim, lim);

        // Normal equations for complex tone coefficients.
        std::vector<std::complex<double>> basis(kk * n);
        for (std::size_t j = 0; j < kk; ++j) {
            for (std::size_t k = 0; k < n; ++k) {
                const double ang = kTwoPi * tone_freqs_[j] * static_cast<double>(k) * dt;
                basis[j * n + k] = {std::cos(ang), std::sin(ang)};
            }
        }
        std::vector<std::complex<double>> a(kk * (kk + 1));
        for (std::size_t r = 0; r < kk; ++r) {
            for (std::size_t c2 = 0; c2 < kk; ++c2) {
                std::complex<double> sum{0.0, 0.0};
                for (std::size_t k = 0; k < n; ++k) {
                    sum += std::conj(basis[r * n + k]) * basis[c2 * n + k];
                }
                a[r * (kk + 1) + c2] = sum;
            }
            std::complex<double> rhs{0.0, 0.0};
            for (std::size_t k = 0; k < n; ++k) rhs += std::conj(basis[r * n + k]) * x[k];
            a[r * (kk + 1) + kk] = rhs;
        }
        for (std::size_t c2 = 0; c2 < kk; ++c2) {
            std::size_t piv = c2;
            for (std::size_t r = c2 + 1; r < kk; ++r) {
                if (std::abs(a[r * (kk + 1) + c2]) > std::abs(a[piv * (kk + 1) + c2])) piv = r;
            }
            for (std::size_t c3 = 0; c3 <= kk; ++c3) std::swap(a[c2 * (kk + 1) + c3], a[piv * (kk + 1) + c3]);
            if (std::abs(a[c2 * (kk + 1) + c2]) < 1e-12) continue;
            for (std::size_t r = 0; r < kk; ++r) {
                if (r == c2) continue;
                const std::complex<double> q = a[r * (kk + 1) + c2] / a[c2 * (kk + 1) + c2];
                for (std::size_t c3 = c2; c3 <= kk; ++c3) a[r * (kk + 1) + c3] -= q * a[c2 * (kk + 1) + c3];
            }
        }
        std::vector<double> ph(kk);
        for (std::size_t j = 0; j < kk; ++j) {
            const std::complex<double> coef = a[j * (kk + 1) + kk] / a[j * (kk + 1) + j];
            ph[j] = std::atan2(coef.imag(), coef.real());
        }
        const double c = crest_of(ph);
        if (c < best_crest) {
            best_crest = c;
            best = ph;
        }
    }
    tone_phases_ = best;

    double peak = 0.0;
    for (double t = spec_.start; t <= spec_.end; t += dt) {
        peak = std::max(peak, std::abs(raw(t)));
    }
    scale_ = peak > 0.0 ? amplitude_ / peak : 0.0;
}

double DisturbanceGenerator::raw(double t) const {
    double v = 0.0;
    for (std::size_t j = 0; j < tone_freqs_.size(); ++j) {
        v += std::cos(kTwoPi * tone_freqs_[j] * (t - spec_.start) + tone_phases_[j]);
    }
    return v;
}

double DisturbanceGenerator::value(double t) const {
    if (scale_ == 0.0 || t < spec_.start || t > spec_.end) return 0.0;
    double env = 1.0;
    if (t < spec_.start + ramp_) {
        env = 0.5 * (1.0 - std::cos(M_PI * (t - spec_.start) / ramp_));
    } else if (t > spec_.end - ramp_) {
        env = 0.5 * (1.0 - std::cos(M_PI * (spec_.end - t) / ramp_));
    }
    return scale_ * env * raw(t);
}

double SwitchedLeg::step(double i_ref, double v_terminal, const ConverterSpec& spec, double dt,
                         control::HysteresisPolarity polarity) {
    state = control::hysteresis_step(current, i_ref, state, spec.hysteresis_band, polarity);
    const double u = state == control::LegState::UpperOn ? 1.0 : -1.0;
    const double a = dt / (2.0 * spec.filter_inductance);
    const double den = 1.0 + a * spec.filter_resistance;
    current = (current * (1.0 - a * spec.filter_resistance) + 2.0 * a * u * spec.vdc / 2.0 -
               a * (v_prev + v_terminal)) /
              den;
    v_prev = v_terminal;
    return current;
}

}  // namespace apfsim::plant

namespace apfsim {

using namespace apfsim::plant;

plant::SimulationTrace simulate(const ScenarioConfig& cfg) {
    validate(cfg);

    const double dt = cfg.dt;
    const double fs = 1.0 / dt;
    const std::size_t steps = static_cast<std::size_t>(std::llround(cfg.duration / dt));
    const double vpk = cfg.nominal_peak_volts();

    DisturbanceGenerator burst(cfg.disturbance, cfg.resolved_disturbance_amplitude(), cfg.seed,
                               dt);

    control::StrategyConfig scfg;
    scfg.kind = cfg.strategy;
    scfg.sample_rate = fs;
    scfg.fundamental_hz = cfg.source.frequency;
    scfg.window_samples = static_cast<std::size_t>(std::llround(cfg.control_window / dt));
    scfg.hop_samples = static_cast<std::size_t>(std::llround(cfg.control_hop / dt));
    scfg.emd = cfg.emd;
    scfg.nominal_voltage_norm = cfg.nominal_voltage_norm();
    scfg.voltage_floor_fraction = cfg.voltage_floor_fraction;
    scfg.residual_sign = cfg.residual_sign;
    scfg.force_zero_residual = cfg.force_zero_residual;
    control::Strategy strategy(scfg);

    std::array<LoadModel, 3> loads;
    for (std::size_t k = 0; k < 3; ++k) loads[k] = LoadModel(cfg.loads[k], vpk);
    std::array<SwitchedLeg, 3> legs;
    SwitchedLeg leg_n;

    power::PowerSplitter observer(power::kPbarCutoffHz, fs);
    bool observer_primed = false;
    double observer_accum = 0.0;

    ThreePhaseSample ref_prev{};
    double ref_n_prev = 0.0;
    ThreePhaseSample i_src_prev{};
    ThreePhaseSample didt_filt{};
    const double alpha = std::exp(-dt / kDerivativeLagTau);
    const bool switched = cfg.converter.mode == ConverterMode::Switched;

    SimulationTrace tr;
    tr.dt = dt;
    tr.sample_rate = fs;
    tr.strategy = cfg.strategy;
    tr.time.reserve(steps);

    for (std::size_t n = 0; n < steps; ++n) {
        const double t = static_cast<double>(n) * dt;
        const ThreePhaseSample e = source_voltages(t, cfg.source);
        const double d = burst.value(t);
        const bool apf_on = t >= cfg.converter.apf_on_time;

        ThreePhaseSample i_load{}, i_meas{}, i_apf{}, i_src{}, v_pcc{};
        std::array<int, 4> sw{0, 0, 0, 0};

        for (int k = 0; k < 3; ++k) {
            const auto ks = static_cast<std::size_t>(k);
            const double ek = k == 0 ? e.r : (k == 1 ? e.s : e.t);
            const double refk = k == 0 ? ref_prev.r : (k == 1 ? ref_prev.s : ref_prev.t);
            const double dk = (k + 1 == cfg.disturbance.target_line) ? d : 0.0;

            const double il = loads[ks].step(ek, dt);
            const double meas = il + dk;

            double inj = 0.0;
            if (apf_on) {
                if (switched) {
                    inj = legs[ks].step(refk, ek, cfg.converter, dt, cfg.hysteresis_polarity);
                    sw[ks] = legs[ks].state == control::LegState::UpperOn ? 1 : -1;
                } else {
                    inj = refk;
                }
            } else if (switched) {
                legs[ks].v_prev = ek;  // idle leg remembers its terminal voltage
            }

            const double src = meas - inj;

            // Sending-end voltage: EMF minus the line RL drop; the inductive
            // term uses a bandwidth-limited derivative of the line current.
            double* prev = k == 0 ? &i_src_prev.r : (k == 1 ? &i_src_prev.s : &i_src_prev.t);
            double* filt = k == 0 ? &didt_filt.r : (k == 1 ? &didt_filt.s : &didt_filt.t);
            const double raw_didt = (src - *prev) / dt;
            *filt = alpha * *filt + (1.0 - alpha) * raw_didt;
            *prev = src;
            const double v_send =
                ek - cfg.line.resistance * src - cfg.line.inductance * *filt;

            auto set = [k](ThreePhaseSample& s3, double val) {
                if (k == 0) s3.r = val;
                else if (k == 1) s3.s = val;
                else s3.t = val;
            };
            set(i_load, il);
            set(i_meas, meas);
            set(i_apf, inj);
            set(i_src, src);
            set(v_pcc, v_send);
        }

        double i_apf_neutral = 0.0;
        if (apf_on) {
            if (switched) {
                i_apf_neutral =
                    leg_n.step(ref_n_prev, 0.0, cfg.converter, dt, cfg.hysteresis_polarity);
                sw[3] = leg_n.state == control::LegState::UpperOn ? 1 : -1;
            } else {
                i_apf_neutral = ref_n_prev;
            }
        }

        const double i_neutral_load = i_meas.sum();
        const double i_neutral_src = -(i_src.sum());

        // Control measures at the converter bus; its outputs drive the next step.
        const auto out = strategy.step(e, i_meas, i_neutral_load);
        ref_prev = out.reference;
        ref_n_prev = out.neutral_ref;

        const AlphaBeta0Sample vab = transform::abc_to_ab0(v_pcc);
        const AlphaBeta0Sample iab = transform::abc_to_ab0(i_src);
        power::PowerSample ps;
        ps.p = power::instantaneous_real_power(vab, iab);
        if (!observer_primed) {
            observer_accum += ps.p;
            if (n + 1 == scfg.window_samples) {
                observer.prime(observer_accum / static_cast<double>(scfg.window_samples));
                observer_primed = true;
            }
        }
        const auto [pb, pt] = observer.step(ps.p);
        ps.p_bar = pb;
        ps.p_tilde = pt;
        ps.q = power::instantaneous_imaginary_power(vab, iab);

        tr.time.push_back(t);
        tr.v_src.push_back(e);
        tr.v_pcc.push_back(v_pcc);
        tr.i_load.push_back(i_load);
        tr.i_meas.push_back(i_meas);
        tr.i_apf.push_back(i_apf);
        tr.i_src.push_back(i_src);
        tr.ref.push_back(out.reference);
        tr.i_dist.push_back(d);
        tr.i_apf_n.push_back(i_apf_neutral);
        tr.ref_n.push_back(out.neutral_ref);
        tr.i_neutral_src.push_back(i_neutral_src);
        tr.i_neutral_load.push_back(i_neutral_load);
        tr.source_power.push_back(ps);
        tr.switch_states.push_back(sw);
    }
    return tr;
}

}  // namespace apfsim
