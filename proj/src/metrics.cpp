#include "apfsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <iomanip>

#include "apfsim/power.hpp"
#include "apfsim/transform.hpp"

namespace apfsim::metrics {

Signal windowed_rms(const Signal& x, double window_s) {
    const std::size_t n = x.size();
    const std::size_t w =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(window_s * x.sample_rate)));
    Signal out;
    out.sample_rate = x.sample_rate;
    out.samples.resize(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += x.samples[i] * x.samples[i];
        if (i >= w) acc -= x.samples[i - w] * x.samples[i - w];
        const std::size_t len = std::min(i + 1, w);
        out.samples[i] = std::sqrt(std::max(0.0, acc) / static_cast<double>(len));
    }
    return out;
}

std::vector<double> power_factor(const std::vector<ThreePhaseSample>& v,
                                 const std::vector<ThreePhaseSample>& i, double window_s,
                                 double sample_rate) {
    if (v.size() != i.size()) throw std::invalid_argument("power_factor: stream size mismatch");
    const std::size_t n = v.size();
    const std::size_t w =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(window_s * sample_rate)));
    std::vector<double> out(n, 0.0);

    double sp = 0.0;
    double sv2 = 0.0, si2 = 0.0;
    auto add = [&](std::size_t k, double sign) {
        const auto& vk = v[k];
        const auto& ik = i[k];
        sp += sign * (vk.r * ik.r + vk.s * ik.s + vk.t * ik.t);
        sv2 += sign * (vk.r * vk.r + vk.s * vk.s + vk.t * vk.t);
        si2 += sign * (ik.r * ik.r + ik.s * ik.s + ik.t * ik.t);
    };
    for (std::size_t k = 0; k < n; ++k) {
        add(k, 1.0);
        if (k >= w) add(k - w, -1.0);
        const double len = static_cast<double>(std::min(k + 1, w));
        const double p_mean = sp / len;
        const double s_app = std::sqrt(std::max(0.0, sv2) / len) *
                             std::sqrt(std::max(0.0, si2) / len);
        double pf = s_app > 1e-12 ? p_mean / s_app : 0.0;
        out[k] = std::clamp(pf, 0.0, 1.0);
    }
    return out;
}

namespace {

// Goertzel magnitude of bin k over x[first, first+len).
double goertzel_mag(const std::vector<double>& x, std::size_t first, std::size_t len,
                    std::size_t k) {
    const double w = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(len);
    const double c = 2.0 * std::cos(w);
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        s0 = x[first + i] + c * s1 - s2;
        s2 = s1;
        s1 = s0;
    }
    const double re = s1 - s2 * std::cos(w);
    const double im = s2 * std::sin(w);
    return std::sqrt(re * re + im * im);
}

double thd_over(const std::vector<double>& x, std::size_t first, std::size_t len,
                double sample_rate, double fundamental_hz, int max_harmonic) {
    const double periods = fundamental_hz * static_cast<double>(len) / sample_rate;
    const long p = std::llround(periods);
    if (p < 1 || std::abs(periods - static_cast<double>(p)) > 1e-6) {
        throw std::invalid_argument("thd: window must span an integer number of periods");
    }
    double energy = 0.0;
    for (std::size_t i = 0; i < len; ++i) energy += x[first + i] * x[first + i];

    const double fund = goertzel_mag(x, first, len, static_cast<std::size_t>(p));
    if (fund < 1e-9 * std::sqrt(energy) || fund == 0.0) {
        throw FundamentalAbsent("thd: fundamental bin is empty");
    }
    double harm2 = 0.0;
    const std::size_t top = std::min<std::size_t>(
        static_cast<std::size_t>(max_harmonic), len / (2 * static_cast<std::size_t>(p)));
    for (std::size_t h = 2; h <= top; ++h) {
        const double m = goertzel_mag(x, first, len, static_cast<std::size_t>(p) * h);
        harm2 += m * m;
    }
    return 100.0 * std::sqrt(harm2) / fund;
}

}  // namespace

double thd(const Signal& x, double fundamental_hz, double window_s, int max_harmonic) {
    const std::size_t w = static_cast<std::size_t>(std::llround(window_s * x.sample_rate));
    if (w == 0 || w > x.size()) throw std::invalid_argument("thd: bad window");
    return thd_over(x.samples, x.size() - w, w, x.sample_rate, fundamental_hz, max_harmonic);
}

std::vector<ThdPoint> thd_profile(const Signal& x, double fundamental_hz, double window_s,
                                  int max_harmonic, bool parallel) {
    const std::size_t w = static_cast<std::size_t>(std::llround(window_s * x.sample_rate));
    if (w == 0 || w > x.size()) return {};
    const std::size_t count = x.size() / w;
    std::vector<ThdPoint> out(count);
    const long nwin = static_cast<long>(count);
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (long j = 0; j < nwin; ++j) {
            const std::size_t first = static_cast<std::size_t>(j) * w;
            out[static_cast<std::size_t>(j)].t_end =
                static_cast<double>(first + w - 1) / x.sample_rate;
            out[static_cast<std::size_t>(j)].thd =
                thd_over(x.samples, first, w, x.sample_rate, fundamental_hz, max_harmonic);
        }
    } else {
        for (long j = 0; j < nwin; ++j) {
            const std::size_t first = static_cast<std::size_t>(j) * w;
            out[static_cast<std::size_t>(j)].t_end =
                static_cast<double>(first + w - 1) / x.sample_rate;
            out[static_cast<std::size_t>(j)].thd =
                thd_over(x.samples, first, w, x.sample_rate, fundamental_hz, max_harmonic);
        }
    }
    return out;
}

std::vector<double> smoothed_q_norm(const plant::SimulationTrace& trace) {
    // Norm first, then the p-bar smoothing: fast oscillations of |q| carry a
    // rectified envelope the filter can report. The sign tracks the dominant
    // smoothed component.
    power::LowPass fn(power::kPbarCutoffHz, trace.sample_rate);
    power::LowPass fa(power::kPbarCutoffHz, trace.sample_rate);
    power::LowPass fb(power::kPbarCutoffHz, trace.sample_rate);
    power::LowPass fz(power::kPbarCutoffHz, trace.sample_rate);
    std::vector<double> out(trace.size());
    if (!trace.source_power.empty()) {
        const auto& q0 = trace.source_power.front().q;
        fn.prime(std::sqrt(q0[0] * q0[0] + q0[1] * q0[1] + q0[2] * q0[2]));
        fa.prime(q0[0]);
        fb.prime(q0[1]);
        fz.prime(q0[2]);
    }
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const auto& q = trace.source_power[k].q;
        const double norm =
            fn.step(std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2]));
        const double qa = fa.step(q[0]);
        const double qb = fb.step(q[1]);
        const double qz = fz.step(q[2]);
        double dom = qa;
        if (std::abs(qb) > std::abs(dom)) dom = qb;
        if (std::abs(qz) > std::abs(dom)) dom = qz;
        out[k] = std::copysign(norm, dom == 0.0 ? 1.0 : dom);
    }
    return out;
}

namespace {

Signal phase_signal(const std::vector<ThreePhaseSample>& s, int phase, double fs) {
    Signal x;
    x.sample_rate = fs;
    x.samples.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        x.samples[i] = phase == 0 ? s[i].r : (phase == 1 ? s[i].s : s[i].t);
    }
    return x;
}

double rms_over(const std::vector<double>& x, std::size_t a, std::size_t b) {
    if (b <= a) return 0.0;
    double acc = 0.0;
    for (std::size_t i = a; i < b; ++i) acc += x[i] * x[i];
    return std::sqrt(acc / static_cast<double>(b - a));
}

}  // namespace

MetricsSeries metrics_series(const plant::SimulationTrace& trace, double fundamental_hz,
                             double window_s) {
    MetricsSeries out;
    const double fs = trace.sample_rate;
    const std::size_t w = static_cast<std::size_t>(std::llround(window_s * fs));
    if (w == 0 || trace.size() < w) return out;

    const auto pf = power_factor(trace.v_pcc, trace.i_src, window_s, fs);
    const auto qs = smoothed_q_norm(trace);

    Signal xr = phase_signal(trace.i_src, 0, fs);
    Signal xs = phase_signal(trace.i_src, 1, fs);
    Signal xt = phase_signal(trace.i_src, 2, fs);

    const std::size_t count = trace.size() / w;
    for (std::size_t j = 0; j < count; ++j) {
        const std::size_t first = j * w;
        const std::size_t last = first + w;  // exclusive
        out.time.push_back(trace.time[last - 1]);
        out.pf.push_back(pf[last - 1]);
        double p_acc = 0.0;
        for (std::size_t i = first; i < last; ++i) p_acc += trace.source_power[i].p;
        out.p_avg.push_back(p_acc / static_cast<double>(w));
        out.q_smoothed.push_back(qs[last - 1]);
        auto safe_thd = [&](const Signal& x) {
            try {
                return thd_over(x.samples, first, w, fs, fundamental_hz, 40);
            } catch (const FundamentalAbsent&) {
                return 0.0;
            }
        };
        out.thd_r.push_back(safe_thd(xr));
        out.thd_s.push_back(safe_thd(xs));
        out.thd_t.push_back(safe_thd(xt));
        out.neutral_rms.push_back(rms_over(trace.i_neutral_src, first, last));
    }
    return out;
}

CompareRow evaluate_trace(const plant::SimulationTrace& trace, const EvalWindows& eval,
                          const std::string& name) {
    CompareRow row;
    row.strategy = name;
    const double fs = trace.sample_rate;
    const std::size_t n = trace.size();
    auto idx = [&](double t) -> std::size_t {
        const long k = std::lround(t * fs);
        if (k < 0) return 0;
        return std::min<std::size_t>(n, static_cast<std::size_t>(k));
    };

    const auto pf = power_factor(trace.v_pcc, trace.i_src, eval.window_s, fs);
    const auto qs = smoothed_q_norm(trace);

    // The trailing PF window smears an event across one extra window length.
    const std::size_t dist_a = idx(eval.dist_start);
    const std::size_t dist_b = idx(eval.dist_end + eval.window_s);
    const std::size_t settle = idx(eval.settle_start);
    const std::size_t steady_pad_b = idx(eval.dist_end + eval.window_s + eval.dist_pad);

    for (std::size_t k = dist_a; k < std::min(dist_b, n); ++k) {
        row.min_pf_disturbance = std::min(row.min_pf_disturbance, pf[k]);
    }

    auto in_steady = [&](std::size_t k) {
        return k >= settle && (k < dist_a || k >= steady_pad_b);
    };

    const std::size_t q_settle = std::max(settle, idx(eval.q_settle_start));
    double q_base_acc = 0.0;
    std::size_t q_base_count = 0;
    for (std::size_t k = q_settle; k < n; ++k) {
        if (in_steady(k)) {
            q_base_acc += qs[k];
            ++q_base_count;
        }
    }
    const double q_base = q_base_count > 0 ? q_base_acc / static_cast<double>(q_base_count) : 0.0;

    for (std::size_t k = settle; k < n; ++k) {
        const double dev = std::abs(qs[k] - q_base);
        if (k >= dist_a && k < std::min(dist_b, n)) {
            row.q_excursion = std::max(row.q_excursion, dev);
        } else if (k >= q_settle && in_steady(k)) {
            row.q_steady_ripple = std::max(row.q_steady_ripple, dev);
        }
        if (in_steady(k)) row.pf_steady = std::min(row.pf_steady, pf[k]);
    }

    // THD over tiled one-window spans fully inside the steady region.
    const std::size_t w = static_cast<std::size_t>(std::llround(eval.window_s * fs));
    double thd_acc = 0.0;
    std::size_t thd_count = 0;
    for (int phase = 0; phase < 3; ++phase) {
        Signal x = phase_signal(trace.i_src, phase, fs);
        for (std::size_t first = settle; first + w <= n; first += w) {
            bool steady = true;
            const std::size_t probe = std::max<std::size_t>(1, w / 4);
            for (std::size_t k = first; k < first + w; k += probe) {
                if (!in_steady(k)) steady = false;
            }
            if (!in_steady(first + w - 1)) steady = false;
            if (!steady) continue;
            try {
                const double v = thd_over(x.samples, first, w, fs, eval.fundamental_hz, 40);
                thd_acc += v;
                row.max_thd = std::max(row.max_thd, v);
                ++thd_count;
            } catch (const FundamentalAbsent&) {
            }
        }
    }
    row.mean_thd = thd_count > 0 ? thd_acc / static_cast<double>(thd_count) : 0.0;

    // Neutral RMS: steady post-APF region vs the pre-APF interval.
    {
        double acc = 0.0;
        std::size_t cnt = 0;
        for (std::size_t k = settle; k < n; ++k) {
            if (in_steady(k)) {
                acc += trace.i_neutral_src[k] * trace.i_neutral_src[k];
                ++cnt;
            }
        }
        row.neutral_rms_post = cnt ? std::sqrt(acc / static_cast<double>(cnt)) : 0.0;
        row.neutral_rms_pre =
            rms_over(trace.i_neutral_src, idx(eval.pre_start), std::min(idx(eval.pre_end), n));
    }
    return row;
}

CompareReport compare_report(const plant::SimulationTrace& a, const plant::SimulationTrace& b,
                             const EvalWindows& eval) {
    if (a.size() != b.size() || a.dt != b.dt) {
        throw MismatchedScenarios("compare_report: traces differ in length or time step");
    }
    if (a.strategy == b.strategy) {
        throw MismatchedScenarios("compare_report: traces ran the same strategy");
    }
    CompareReport rep;
    rep.a = evaluate_trace(a, eval,
                           a.strategy == control::StrategyKind::EmdHybrid ? "emd_hybrid"
                                                                          : "plain_modified_pq");
    rep.b = evaluate_trace(b, eval,
                           b.strategy == control::StrategyKind::EmdHybrid ? "emd_hybrid"
                                                                          : "plain_modified_pq");
    return rep;
}

namespace {

void row_text(std::ostringstream& os, const CompareRow& r) {
    os << std::left << std::setw(18) << r.strategy << std::right << std::fixed
       << std::setprecision(4) << std::setw(12) << r.min_pf_disturbance << std::setw(12)
       << r.pf_steady << std::setprecision(2) << std::setw(12) << r.q_excursion << std::setw(12)
       << r.q_steady_ripple << std::setw(10) << r.mean_thd << std::setw(10) << r.max_thd
       << std::setprecision(4) << std::setw(12) << r.neutral_rms_post << std::setw(12)
       << r.neutral_rms_pre << "\n";
}

}  // namespace

std::string CompareReport::to_text() const {
    std::ostringstream os;
    os << std::left << std::setw(18) << "strategy" << std::right << std::setw(12) << "minPF_dist"
       << std::setw(12) << "minPF_stdy" << std::setw(12) << "Q_exc[VA]" << std::setw(12)
       << "Q_rip[VA]" << std::setw(10) << "THD%" << std::setw(10) << "THDmax%" << std::setw(12)
       << "In_post[A]" << std::setw(12) << "In_pre[A]" << "\n";
    row_text(os, a);
    row_text(os, b);
    return os.str();
}

std::string CompareReport::to_csv() const {
    std::ostringstream os;
    os << "strategy,min_pf_disturbance,min_pf_steady,q_excursion,q_steady_ripple,mean_thd,"
          "max_thd,neutral_rms_post,neutral_rms_pre\n";
    for (const CompareRow* r : {&a, &b}) {
        os << r->strategy << ',' << r->min_pf_disturbance << ',' << r->pf_steady << ','
           << r->q_excursion << ',' << r->q_steady_ripple << ',' << r->mean_thd << ','
           << r->max_thd << ',' << r->neutral_rms_post << ',' << r->neutral_rms_pre << "\n";
    }
    return os.str();
}

}  // namespace apfsim::metrics
