#include "apfsim/control.hpp"

#include <cmath>
#include <stdexcept>

namespace apfsim::control {

namespace {

// Fraction of the signal's energy captured by the fundamental Fourier pair.
double fundamental_energy_fraction(const Signal& x, double fundamental_hz) {
    const std::size_t n = x.size();
    if (n == 0 || x.sample_rate <= 0.0) return 0.0;
    double c = 0.0, s = 0.0, e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ang = 2.0 * M_PI * fundamental_hz * static_cast<double>(i) / x.sample_rate;
        c += x.samples[i] * std::cos(ang);
        s += x.samples[i] * std::sin(ang);
        e += x.samples[i] * x.samples[i];
    }
    if (e == 0.0) return 0.0;
    return 2.0 * (c * c + s * s) / (static_cast<double>(n) * e);
}

}  // namespace

ComponentSplit classify_components(const emd::ImfSet& imfs, double fundamental_hz) {
    ComponentSplit out;
    out.fundamental_part = imfs.residue;
    out.residual_part.sample_rate = imfs.residue.sample_rate;
    out.residual_part.samples.assign(imfs.residue.size(), 0.0);

    for (const auto& imf : imfs.imfs) {
        const double rate = emd::zero_crossing_rate(imf);
        bool is_fundamental = std::abs(rate - fundamental_hz) <= 0.3 * fundamental_hz;
        // Riding fragments inflate the crossing rate of an otherwise
        // fundamental mode; a dominant fundamental projection keeps it on
        // the fundamental side.
        if (!is_fundamental && fundamental_energy_fraction(imf, fundamental_hz) >= 0.6) {
            is_fundamental = true;
        }
        auto& bucket = is_fundamental ? out.fundamental_part : out.residual_part;
        for (std::size_t i = 0; i < imf.size(); ++i) bucket.samples[i] += imf.samples[i];
    }

    // The residual contains harmonics and non-stationary content only; any
    // fundamental-frequency component in it is sifting leakage (transients
    // locally bite into the fundamental). Move that projection back.
    {
        Signal& r = out.residual_part;
        const std::size_t n = r.size();
        if (n > 0 && r.sample_rate > 0.0) {
            double c = 0.0, s = 0.0, cc = 0.0, ss = 0.0, cs = 0.0;
            std::vector<double> cosv(n), sinv(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double ang =
                    2.0 * M_PI * fundamental_hz * static_cast<double>(i) / r.sample_rate;
                cosv[i] = std::cos(ang);
                sinv[i] = std::sin(ang);
                c += r.samples[i] * cosv[i];
                s += r.samples[i] * sinv[i];
                cc += cosv[i] * cosv[i];
                ss += sinv[i] * sinv[i];
                cs += cosv[i] * sinv[i];
            }
            // Least-squares coefficients; the basis is near-orthogonal for
            // whole-period windows but not exactly, so solve the 2x2 system.
            const double det = cc * ss - cs * cs;
            if (det > 1e-12 * static_cast<double>(n * n)) {
                const double a = (c * ss - s * cs) / det;
                const double b = (s * cc - c * cs) / det;
                for (std::size_t i = 0; i < n; ++i) {
                    const double f = a * cosv[i] + b * sinv[i];
                    r.samples[i] -= f;
                    out.fundamental_part.samples[i] += f;
                }
            }
        }
    }
    return out;
}

CurrentSplit split_current(const ReferenceFrameWindow& window, const emd::EmdConfig& cfg,
                           double fundamental_hz, bool parallel) {
    const std::size_t n = window.currents.size();
    std::vector<Signal> phases(3);
    for (auto& p : phases) {
        p.sample_rate = window.sample_rate;
        p.samples.resize(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        phases[0].samples[i] = window.currents[i].r;
        phases[1].samples[i] = window.currents[i].s;
        phases[2].samples[i] = window.currents[i].t;
    }

    const auto sets = emd::decompose_many(phases, cfg, parallel);

    CurrentSplit split;
    split.i_m.resize(n);
    split.i_n.resize(n);
    for (int ph = 0; ph < 3; ++ph) {
        const auto parts = classify_components(sets[static_cast<std::size_t>(ph)], fundamental_hz);
        for (std::size_t i = 0; i < n; ++i) {
            const double total = phases[static_cast<std::size_t>(ph)].samples[i];
            const double residual = parts.residual_part.samples[i];
            double* m = ph == 0 ? &split.i_m[i].r : (ph == 1 ? &split.i_m[i].s : &split.i_m[i].t);
            double* r = ph == 0 ? &split.i_n[i].r : (ph == 1 ? &split.i_n[i].s : &split.i_n[i].t);
            *r = residual;
            *m = total - residual;
        }
    }
    return split;
}

AlphaBeta0Sample compensating_current_m(const AlphaBeta0Sample& v, double p_tilde,
                                        const power::QVector& q, double min_norm2) {
    const double norm2 = v.alpha * v.alpha + v.beta * v.beta + v.zero * v.zero;
    if (norm2 < min_norm2 || norm2 == 0.0) {
        throw VoltageCollapse("compensating_current_m: |v|^2 below floor");
    }
    // q x v, with q and v both in (alpha, beta, 0) ordering.
    const double cx = q[1] * v.zero - q[2] * v.beta;
    const double cy = q[2] * v.alpha - q[0] * v.zero;
    const double cz = q[0] * v.beta - q[1] * v.alpha;
    AlphaBeta0Sample i;
    i.alpha = (p_tilde * v.alpha + cx) / norm2;
    i.beta = (p_tilde * v.beta + cy) / norm2;
    i.zero = (p_tilde * v.zero + cz) / norm2;
    return i;
}

ThreePhaseSample compose_reference(const ThreePhaseSample& i_cm, const ThreePhaseSample& i_cn,
                                   ResidualSign sign) {
    return sign == ResidualSign::Physical ? i_cm + i_cn : i_cm - i_cn;
}

LegState hysteresis_step(double i_actual, double i_ref, LegState state, double hb,
                         HysteresisPolarity polarity) {
    if (!(hb > 0.0)) throw std::invalid_argument("hysteresis_step: hb must be positive");
    const bool force_decrease = i_actual > i_ref + hb;
    const bool force_increase = i_actual < i_ref - hb;
    if (!force_decrease && !force_increase) return state;
    if (polarity == HysteresisPolarity::Physical) {
        return force_decrease ? LegState::LowerOn : LegState::UpperOn;
    }
    return force_decrease ? LegState::UpperOn : LegState::LowerOn;
}

Strategy::Strategy(const StrategyConfig& cfg)
    : cfg_(cfg), splitter_(power::kPbarCutoffHz, cfg.sample_rate) {
    if (cfg_.window_samples < 2 || cfg_.hop_samples == 0 ||
        cfg_.hop_samples > cfg_.window_samples) {
        throw std::invalid_argument("Strategy: bad window/hop");
    }
    history_.reserve(cfg_.window_samples);
    const double floor = cfg_.voltage_floor_fraction * cfg_.nominal_voltage_norm;
    floor_norm2_ = floor * floor;
}

void Strategy::refresh_window_estimates() {
    const std::size_t w = cfg_.window_samples;
    // history_ holds the last w samples; oldest first.
    std::vector<ThreePhaseSample> window(w);
    const std::size_t head = ticks_ % w;  // position one past the newest sample
    for (std::size_t i = 0; i < w; ++i) window[i] = history_[(head + i) % w];

    if (cfg_.kind == StrategyKind::PlainModifiedPq) {
        aligned_ = std::move(window);  // no separation: the raw window itself
    } else {
        ReferenceFrameWindow frame;
        frame.currents = std::move(window);
        frame.sample_rate = cfg_.sample_rate;
        frame.hop = cfg_.hop_samples;
        const auto split = split_current(frame, cfg_.emd, cfg_.fundamental_hz, cfg_.parallel_emd);
        aligned_ = split.i_n;  // the residual estimate, reused sample-aligned
    }
    window_end_ = ticks_;
    window_ready_ = true;
}

StrategyOutput Strategy::step(const ThreePhaseSample& v_pcc, const ThreePhaseSample& i_line,
                              double i_neutral) {
    const std::size_t w = cfg_.window_samples;
    if (history_.size() < w) {
        history_.push_back(i_line);
    } else {
        history_[ticks_ % w] = i_line;
    }
    ++ticks_;
    if (!cfg_.force_zero_residual && ticks_ >= w && (ticks_ - w) % cfg_.hop_samples == 0) {
        refresh_window_estimates();
    }

    // Period-aligned reuse: the window entry for sample n - window_samples
    // carries the same fundamental phase as sample n.
    StrategyOutput out;
    ThreePhaseSample i_cn{};
    if (cfg_.force_zero_residual || !window_ready_) {
        out.i_m = i_line;  // stubbed or not yet primed: raw pass-through
    } else {
        const std::size_t n = ticks_ - 1;
        const std::size_t idx = (n - (window_end_ - w)) % w;
        if (cfg_.kind == StrategyKind::PlainModifiedPq) {
            out.i_m = aligned_[idx];
        } else {
            out.i_m = i_line - aligned_[idx];  // I_m = I_L - I_n, live
            i_cn = aligned_[idx];
        }
    }
    out.i_n = i_line - out.i_m;

    const AlphaBeta0Sample v = transform::abc_to_ab0(v_pcc);
    const AlphaBeta0Sample im = transform::abc_to_ab0(out.i_m);
    const double p = power::instantaneous_real_power(v, im);
    // Warm-start the p-bar filter with the first full cycle's mean; an
    // 8 Hz filter from zero state would otherwise still be settling when
    // the compensator engages.
    if (!splitter_primed_) {
        p_accum_ += p;
        if (ticks_ == w) {
            splitter_.prime(p_accum_ / static_cast<double>(w));
            splitter_primed_ = true;
        }
    }
    const auto [p_bar, p_tilde] = splitter_.step(p);
    const power::QVector q = power::instantaneous_imaginary_power(v, im);

    AlphaBeta0Sample icm;
    try {
        icm = compensating_current_m(v, p_tilde, q, floor_norm2_);
        held_icm_ = icm;
    } catch (const VoltageCollapse&) {
        icm = held_icm_;  // hold the last valid output through the collapse
    }
    const ThreePhaseSample i_cm = transform::ab0_to_abc(icm);

    out.reference = compose_reference(i_cm, i_cn, cfg_.residual_sign);
    out.neutral_ref = neutral_reference(i_neutral);
    return out;
}

}  // namespace apfsim::control
