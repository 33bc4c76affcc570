#include "apfsim/power.hpp"

#include <cmath>

namespace apfsim::power {

double instantaneous_real_power(const AlphaBeta0Sample& v, const AlphaBeta0Sample& i) {
    return i.alpha * v.alpha + i.beta * v.beta + i.zero * v.zero;
}

QVector instantaneous_imaginary_power(const AlphaBeta0Sample& v, const AlphaBeta0Sample& i) {
    return {v.beta * i.zero - v.zero * i.beta,
            v.zero * i.alpha - v.alpha * i.zero,
            v.alpha * i.beta - v.beta * i.alpha};
}

LowPass::LowPass(double cutoff_hz, double sample_rate_hz) {
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate_hz / 2.0)) {
        throw InvalidCutoff("lowpass cutoff must lie in (0, sample_rate/2)");
    }
    const double k = std::tan(M_PI * cutoff_hz / sample_rate_hz);
    const double sqrt2 = std::sqrt(2.0);
    const double norm = 1.0 + sqrt2 * k + k * k;
    b0_ = k * k / norm;
    b1_ = 2.0 * b0_;
    b2_ = b0_;
    a1_ = 2.0 * (k * k - 1.0) / norm;
    a2_ = (1.0 - sqrt2 * k + k * k) / norm;
}

double LowPass::step(double x) {
    const double y = b0_ * x + z1_;
    z1_ = b1_ * x - a1_ * y + z2_;
    z2_ = b2_ * x - a2_ * y;
    return y;
}

}  // namespace apfsim::power
