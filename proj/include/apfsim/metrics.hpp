#ifndef APFSIM_METRICS_HPP
#define APFSIM_METRICS_HPP

#include <string>
#include <vector>

#include "apfsim/plant.hpp"
#include "apfsim/signal.hpp"

namespace apfsim::metrics {

/// Trailing RMS; the first window is filled with the RMS of the prefix.
Signal windowed_rms(const Signal& x, double window_s);

/// Collective power factor over a trailing window:
/// PF = mean(sum v_k i_k) / (sqrt(sum Vrms^2) * sqrt(sum Irms^2)), clamped
/// to [0, 1]; zero current gives 0.
std::vector<double> power_factor(const std::vector<ThreePhaseSample>& v,
                                 const std::vector<ThreePhaseSample>& i, double window_s,
                                 double sample_rate);

/// THD in percent over the trailing window, DFT bins at exact harmonics.
/// The window must span an integer number of fundamental periods.
double thd(const Signal& x, double fundamental_hz, double window_s, int max_harmonic = 40);

struct ThdPoint {
    double t_end = 0.0;  // time of the window's last sample
    double thd = 0.0;    // percent
};

/// THD over consecutive non-overlapping windows; windows are independent
/// and evaluated in parallel when OpenMP is available.
std::vector<ThdPoint> thd_profile(const Signal& x, double fundamental_hz, double window_s,
                                  int max_harmonic = 40, bool parallel = true);

/// Smoothed |q| trace with the sign of the dominant component; smoothing
/// matches the p-bar filter so P and Q comparisons are like for like.
std::vector<double> smoothed_q_norm(const plant::SimulationTrace& trace);

struct MetricsSeries {
    std::vector<double> time;       // window end times
    std::vector<double> pf;
    std::vector<double> p_avg;      // mean three-phase power over the window
    std::vector<double> q_smoothed; // sampled smoothed |q|
    std::vector<double> thd_r, thd_s, thd_t;
    std::vector<double> neutral_rms;
};

/// Per-window summary series over a whole trace (one row per metrics window).
MetricsSeries metrics_series(const plant::SimulationTrace& trace, double fundamental_hz,
                             double window_s);

struct EvalWindows {
    double settle_start = 0.06;  // post-APF steady evaluation begins here
    // The smoothed |Q| trace needs extra time after the converter engages
    // (8 Hz second-order step response); its baseline starts here.
    double q_settle_start = 0.06;
    double dist_start = 0.088;
    double dist_end = 0.094;
    double dist_pad = 0.0;       // extra exclusion after dist_end for steady metrics
    double pre_start = 0.0;      // pre-APF reference interval
    double pre_end = 0.04;
    double window_s = 0.02;
    double fundamental_hz = 50.0;
};

struct CompareRow {
    std::string strategy;
    double min_pf_disturbance = 1.0;  // min PF inside the disturbance window
    double pf_steady = 1.0;           // min PF over the steady post-APF region
    double q_excursion = 0.0;         // peak |Q - Q_base| inside the disturbance window
    double q_steady_ripple = 0.0;     // peak |Q - Q_base| over the steady region
    double mean_thd = 0.0;            // mean per-phase THD over steady windows, percent
    double max_thd = 0.0;
    double neutral_rms_post = 0.0;
    double neutral_rms_pre = 0.0;
};

struct CompareReport {
    CompareRow a, b;
    std::string to_text() const;
    std::string to_csv() const;
};

CompareRow evaluate_trace(const plant::SimulationTrace& trace, const EvalWindows& eval,
                          const std::string& name);

/// Two traces of the same scenario under different strategies, side by side.
CompareReport compare_report(const plant::SimulationTrace& a, const plant::SimulationTrace& b,
                             const EvalWindows& eval);

}  // namespace apfsim::metrics

#endif
