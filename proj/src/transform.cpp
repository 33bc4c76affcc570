#include "apfsim/transform.hpp"

#include <cmath>

namespace apfsim::transform {

namespace {
const double kScale = std::sqrt(2.0 / 3.0);
const double kHalfSqrt3 = std::sqrt(3.0) / 2.0;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}  // namespace

AlphaBeta0Sample abc_to_ab0(const ThreePhaseSample& x) {
    AlphaBeta0Sample y;
    y.alpha = kScale * (x.r - 0.5 * x.s - 0.5 * x.t);
    y.beta = kScale * (kHalfSqrt3 * x.s - kHalfSqrt3 * x.t);
    y.zero = kScale * kInvSqrt2 * (x.r + x.s + x.t);
    return y;
}

ThreePhaseSample ab0_to_abc(const AlphaBeta0Sample& x) {
    ThreePhaseSample y;
    y.r = kScale * (x.alpha + kInvSqrt2 * x.zero);
    y.s = kScale * (-0.5 * x.alpha + kHalfSqrt3 * x.beta + kInvSqrt2 * x.zero);
    y.t = kScale * (-0.5 * x.alpha - kHalfSqrt3 * x.beta + kInvSqrt2 * x.zero);
    return y;
}

}  // namespace apfsim::transform
