#ifndef APFSIM_SIGNAL_HPP
#define APFSIM_SIGNAL_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace apfsim {

/// Nominal grid fundamental used when a config leaves a frequency-derived
/// parameter on "auto".
inline constexpr double kNominalFundamentalHz = 50.0;

/// A uniformly sampled single-channel waveform.
struct Signal {
    std::vector<double> samples;
    double sample_rate = 0.0;  // Hz

    std::size_t size() const { return samples.size(); }
    double duration() const {
        return sample_rate > 0.0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
    double operator[](std::size_t i) const { return samples[i]; }
    double& operator[](std::size_t i) { return samples[i]; }
};

inline double mean(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

inline double rms(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s / static_cast<double>(x.size()));
}

/// Pearson correlation of two equal-length sequences.
inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw std::invalid_argument("correlation: size mismatch");
    }
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

bool all_finite(const std::vector<double>& x);

// Error types shared across modules.

struct TooFewKnots : std::runtime_error {
    explicit TooFewKnots(const std::string& what) : std::runtime_error(what) {}
};

struct NotSiftable : std::runtime_error {
    explicit NotSiftable(const std::string& what) : std::runtime_error(what) {}
};

struct ExtensionTooLong : std::runtime_error {
    explicit ExtensionTooLong(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidCutoff : std::runtime_error {
    explicit InvalidCutoff(const std::string& what) : std::runtime_error(what) {}
};

struct VoltageCollapse : std::runtime_error {
    explicit VoltageCollapse(const std::string& what) : std::runtime_error(what) {}
};

struct FundamentalAbsent : std::runtime_error {
    explicit FundamentalAbsent(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigInvalid : std::runtime_error {
    ConfigInvalid(const std::string& field, const std::string& why)
        : std::runtime_error("config field '" + field + "': " + why), field_name(field) {}
    std::string field_name;
};

struct MismatchedScenarios : std::runtime_error {
    explicit MismatchedScenarios(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace apfsim

#endif
