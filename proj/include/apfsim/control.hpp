#ifndef APFSIM_CONTROL_HPP
#define APFSIM_CONTROL_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include "apfsim/emd.hpp"
#include "apfsim/power.hpp"
#include "apfsim/signal.hpp"
#include "apfsim/transform.hpp"

namespace apfsim::control {

enum class StrategyKind { EmdHybrid, PlainModifiedPq };

/// Sign convention for composing the residual channel into the total
/// reference. Physical adds I_Cn so the injected current cancels the
/// residual at the source; PaperPrinted subtracts it.
enum class ResidualSign { Physical, PaperPrinted };

/// Mapping of the band comparator to the leg switches. Physical turns the
/// lower switch on when the current must decrease; PaperPrinted replicates
/// the printed table, which is the opposite.
enum class HysteresisPolarity { Physical, PaperPrinted };

/// Per-leg switch state. Exactly one switch of a leg conducts, so
/// shoot-through is excluded by construction.
enum class LegState { LowerOn, UpperOn };

/// One window of measurements feeding the current split.
struct ReferenceFrameWindow {
    std::vector<ThreePhaseSample> currents;
    std::vector<ThreePhaseSample> voltages;
    double sample_rate = 0.0;
    std::size_t hop = 0;
};

struct ComponentSplit {
    Signal fundamental_part;
    Signal residual_part;
};

/// Windowed split of a three-phase current into fundamental and residual
/// streams; i_m + i_n reproduces the window exactly at every sample.
struct CurrentSplit {
    std::vector<ThreePhaseSample> i_m;
    std::vector<ThreePhaseSample> i_n;
};

/// Partition an ImfSet: IMFs whose zero-crossing rate lies within +-30% of
/// the fundamental join the residue as the fundamental part; everything
/// else sums into the residual part.
ComponentSplit classify_components(const emd::ImfSet& imfs, double fundamental_hz);

/// Per phase: decompose + classify; I_n = residual, I_m = I_L - I_n.
CurrentSplit split_current(const ReferenceFrameWindow& window, const emd::EmdConfig& cfg,
                           double fundamental_hz = kNominalFundamentalHz,
                           bool parallel = true);

/// i_C = (p_tilde * v + q x v) / |v|^2: the unique current carrying real
/// power p_tilde and the realizable part of q for the given v. Throws
/// VoltageCollapse when |v|^2 falls below min_norm2.
AlphaBeta0Sample compensating_current_m(const AlphaBeta0Sample& v, double p_tilde,
                                        const power::QVector& q, double min_norm2 = 0.0);

ThreePhaseSample compose_reference(const ThreePhaseSample& i_cm, const ThreePhaseSample& i_cn,
                                   ResidualSign sign = ResidualSign::Physical);

inline double neutral_reference(double i_neutral) { return -i_neutral; }

/// Three-level hysteresis: trip above/below the band, hold inside it.
LegState hysteresis_step(double i_actual, double i_ref, LegState state, double hb,
                         HysteresisPolarity polarity = HysteresisPolarity::Physical);

struct StrategyConfig {
    StrategyKind kind = StrategyKind::EmdHybrid;
    double sample_rate = 50000.0;
    double fundamental_hz = kNominalFundamentalHz;
    std::size_t window_samples = 1000;
    std::size_t hop_samples = 250;
    emd::EmdConfig emd;
    // |v| of the nominal balanced set, used for the 1% collapse floor.
    double nominal_voltage_norm = 0.0;
    double voltage_floor_fraction = 0.01;
    ResidualSign residual_sign = ResidualSign::Physical;
    // Stubs the decomposition: the fundamental estimate becomes the raw
    // window and the residual channel emits zero.
    bool force_zero_residual = false;
    bool parallel_emd = true;
};

struct StrategyOutput {
    ThreePhaseSample reference;   // I_Cref per phase
    double neutral_ref = 0.0;     // fourth-leg reference
    ThreePhaseSample i_m;         // fundamental estimate used by the p-q branch
    ThreePhaseSample i_n;         // residual estimate (live complement)
};

/// One control channel: sliding one-period window, hop-cadence estimation,
/// per-sample p-q synthesis.
///
/// EmdHybrid: the latest window's classified residual is reused
/// sample-aligned (one period back, the same fundamental phase);
/// I_m = I_L - I_n is formed live, so non-periodic content lands in I_n
/// without delay and is compensated through the residual channel.
/// PlainModifiedPq has no separation: the p-q branch runs on the raw
/// window, sample-aligned, and the residual channel is absent, which
/// reproduces the baseline's periodic-only compensation.
class Strategy {
  public:
    explicit Strategy(const StrategyConfig& cfg);

    StrategyOutput step(const ThreePhaseSample& v_pcc, const ThreePhaseSample& i_line,
                        double i_neutral);

    const StrategyConfig& config() const { return cfg_; }

  private:
    void refresh_window_estimates();

    StrategyConfig cfg_;
    std::vector<ThreePhaseSample> history_;   // ring buffer of measured currents
    std::vector<ThreePhaseSample> aligned_;   // hybrid: residual window; plain: raw window
    std::size_t ticks_ = 0;
    std::size_t window_end_ = 0;   // absolute sample index one past the window
    bool window_ready_ = false;
    power::PowerSplitter splitter_;
    bool splitter_primed_ = false;
    double p_accum_ = 0.0;
    AlphaBeta0Sample held_icm_{};
    double floor_norm2_ = 0.0;
};

}  // namespace apfsim::control

#endif
