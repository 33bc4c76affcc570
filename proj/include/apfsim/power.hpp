#ifndef APFSIM_POWER_HPP
#define APFSIM_POWER_HPP

#include <array>

#include "apfsim/signal.hpp"
#include "apfsim/transform.hpp"

namespace apfsim::power {

/// Imaginary-power vector in (alpha, beta, 0) ordering.
using QVector = std::array<double, 3>;

/// Instantaneous p, its average/oscillating split, and the q vector.
struct PowerSample {
    double p = 0.0;
    double p_bar = 0.0;
    double p_tilde = 0.0;
    QVector q{0.0, 0.0, 0.0};
};

/// p = i_alpha v_alpha + i_beta v_beta + i_0 v_0.
double instantaneous_real_power(const AlphaBeta0Sample& v, const AlphaBeta0Sample& i);

/// q = v x i in (alpha, beta, 0) ordering.
QVector instantaneous_imaginary_power(const AlphaBeta0Sample& v, const AlphaBeta0Sample& i);

/// Second-order Butterworth low pass, bilinear transform with pre-warping,
/// direct form II transposed.
class LowPass {
  public:
    LowPass() = default;
    LowPass(double cutoff_hz, double sample_rate_hz);

    double step(double x);
    void reset() { z1_ = z2_ = 0.0; }

    /// Seed the delay line with the DC steady state for input x0, so the
    /// output starts at x0 instead of ramping from zero.
    void prime(double x0) {
        z1_ = x0 * (1.0 - b0_);
        z2_ = x0 * (1.0 - b0_ - b1_ + a1_);
    }

    double b0() const { return b0_; }
    double b1() const { return b1_; }
    double b2() const { return b2_; }
    double a1() const { return a1_; }
    double a2() const { return a2_; }

  private:
    double b0_ = 1.0, b1_ = 0.0, b2_ = 0.0;
    double a1_ = 0.0, a2_ = 0.0;
    double z1_ = 0.0, z2_ = 0.0;
};

inline LowPass lowpass_design(double cutoff_hz, double sample_rate_hz) {
    return LowPass(cutoff_hz, sample_rate_hz);
}

/// Splits a power stream into its filtered average and the remainder.
/// p_bar + p_tilde reproduces the input exactly at every step.
class PowerSplitter {
  public:
    PowerSplitter() = default;
    PowerSplitter(double cutoff_hz, double sample_rate_hz) : lp_(cutoff_hz, sample_rate_hz) {}

    std::pair<double, double> step(double p) {
        const double bar = lp_.step(p);
        return {bar, p - bar};
    }

    /// Warm-start the average at p0 (e.g. a first-cycle mean).
    void prime(double p0) { lp_.prime(p0); }

  private:
    LowPass lp_;
};

/// Paper's p-bar extraction cutoff.
inline constexpr double kPbarCutoffHz = 8.0;

}  // namespace apfsim::power

#endif
