#ifndef APFSIM_TRANSFORM_HPP
#define APFSIM_TRANSFORM_HPP

namespace apfsim {

/// One time-step of per-phase (R, S, T) values, volts or amperes.
struct ThreePhaseSample {
    double r = 0.0;
    double s = 0.0;
    double t = 0.0;

    ThreePhaseSample operator+(const ThreePhaseSample& o) const { return {r + o.r, s + o.s, t + o.t}; }
    ThreePhaseSample operator-(const ThreePhaseSample& o) const { return {r - o.r, s - o.s, t - o.t}; }
    ThreePhaseSample operator*(double k) const { return {r * k, s * k, t * k}; }
    double sum() const { return r + s + t; }
};

/// The same quantity in power-invariant alpha-beta-0 coordinates.
struct AlphaBeta0Sample {
    double alpha = 0.0;
    double beta = 0.0;
    double zero = 0.0;
};

namespace transform {

/// Power-invariant Clarke transform (sqrt(2/3)-scaled orthonormal matrix).
AlphaBeta0Sample abc_to_ab0(const ThreePhaseSample& x);

/// Inverse transform; the transpose, exact because the matrix is orthonormal.
ThreePhaseSample ab0_to_abc(const AlphaBeta0Sample& x);

}  // namespace transform
}  // namespace apfsim

#endif
