// Timing comparison of the serial kernels against their OpenMP-batch
// counterparts. The parallel paths must be bit-identical to the serial
// ones; this binary checks that too.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "apfsim/emd.hpp"
#include "apfsim/metrics.hpp"

using namespace apfsim;

namespace {

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::vector<Signal> make_batch(std::size_t count, std::size_t length, double fs) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> freq(30.0, 900.0);
    std::uniform_real_distribution<double> amp(0.3, 3.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    std::vector<Signal> batch(count);
    for (auto& s : batch) {
        s.sample_rate = fs;
        s.samples.assign(length, 0.0);
        const int tones = 3;
        for (int j = 0; j < tones; ++j) {
            const double f = freq(rng), a = amp(rng), ph = phase(rng);
            for (std::size_t i = 0; i < length; ++i) {
                s.samples[i] += a * std::sin(2.0 * M_PI * f * static_cast<double>(i) / fs + ph);
            }
        }
    }
    return batch;
}

bool identical(const std::vector<emd::ImfSet>& a, const std::vector<emd::ImfSet>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].imfs.size() != b[i].imfs.size()) return false;
        for (std::size_t k = 0; k < a[i].imfs.size(); ++k) {
            if (a[i].imfs[k].samples != b[i].imfs[k].samples) return false;
        }
        if (a[i].residue.samples != b[i].residue.samples) return false;
    }
    return true;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; parallel paths run serially\n");
#endif

    const auto batch = make_batch(48, 2000, 10000.0);

    double t0 = now_s();
    const auto serial = emd::decompose_many(batch, {}, false);
    const double t_serial = now_s() - t0;

    t0 = now_s();
    const auto parallel = emd::decompose_many(batch, {}, true);
    const double t_parallel = now_s() - t0;

    std::printf("%-28s %10s %10s %8s %s\n", "kernel", "serial[s]", "omp[s]", "speedup",
                "bit-identical");
    std::printf("%-28s %10.3f %10.3f %8.2f %s\n", "emd batch decompose (48x2k)", t_serial,
                t_parallel, t_serial / t_parallel, identical(serial, parallel) ? "yes" : "NO");

    Signal long_sig;
    long_sig.sample_rate = 50000.0;
    long_sig.samples.resize(50000 * 4);
    for (std::size_t i = 0; i < long_sig.samples.size(); ++i) {
        const double t = static_cast<double>(i) / long_sig.sample_rate;
        long_sig.samples[i] = std::sin(2.0 * M_PI * 50.0 * t) +
                              0.2 * std::sin(2.0 * M_PI * 250.0 * t) +
                              0.1 * std::sin(2.0 * M_PI * 550.0 * t);
    }

    t0 = now_s();
    const auto prof_serial = metrics::thd_profile(long_sig, 50.0, 0.02, 40, false);
    const double p_serial = now_s() - t0;
    t0 = now_s();
    const auto prof_parallel = metrics::thd_profile(long_sig, 50.0, 0.02, 40, true);
    const double p_parallel = now_s() - t0;

    bool same = prof_serial.size() == prof_parallel.size();
    for (std::size_t i = 0; same && i < prof_serial.size(); ++i) {
        same = prof_serial[i].thd == prof_parallel[i].thd;
    }
    std::printf("%-28s %10.3f %10.3f %8.2f %s\n", "thd profile (200 windows)", p_serial,
                p_parallel, p_serial / p_parallel, same ? "yes" : "NO");
    return 0;
}
