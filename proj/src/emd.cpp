#include "apfsim/emd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace apfsim {

bool all_finite(const std::vector<double>& x) {
    for (double v : x) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace apfsim

namespace apfsim::emd {

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
find_extrema(const Signal& s) {
    std::vector<std::size_t> maxima;
    std::vector<std::size_t> minima;
    const auto& x = s.samples;
    const std::size_t n = x.size();
    if (n < 3) return {maxima, minima};

    for (std::size_t i = 1; i + 1 < n;) {
        if (x[i] == x[i - 1]) {  // plateau continuation; only its first sample may count
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && x[j + 1] == x[i]) ++j;
        if (j + 1 >= n) break;  // plateau runs into the right edge
        const bool rose = x[i - 1] < x[i];
        const bool falls = x[j + 1] < x[i];
        if (rose && falls) {
            maxima.push_back(i);
        } else if (!rose && !falls) {
            minima.push_back(i);
        }
        i = j + 1;
    }
    return {maxima, minima};
}

Signal spline_envelope(const std::vector<std::size_t>& knot_indices, const Signal& s) {
    const std::size_t k = knot_indices.size();
    if (k < 2) throw TooFewKnots("spline_envelope: need at least 2 knots");

    std::vector<double> xs(k), ys(k);
    for (std::size_t i = 0; i < k; ++i) {
        xs[i] = static_cast<double>(knot_indices[i]);
        ys[i] = s.samples[knot_indices[i]];
    }

    // Natural spline: second derivatives at the ends are zero; interior ones
    // come from the standard tridiagonal system.
    std::vector<double> m(k, 0.0);
    if (k > 2) {
        const std::size_t ni = k - 2;  // interior unknowns
        std::vector<double> diag(ni), off(ni > 1 ? ni - 1 : 0), rhs(ni);
        for (std::size_t i = 1; i + 1 < k; ++i) {
            const double hm = xs[i] - xs[i - 1];
            const double hp = xs[i + 1] - xs[i];
            diag[i - 1] = (hm + hp) / 3.0;
            rhs[i - 1] = (ys[i + 1] - ys[i]) / hp - (ys[i] - ys[i - 1]) / hm;
            if (i + 2 < k) off[i - 1] = hp / 6.0;
        }
        for (std::size_t i = 1; i < ni; ++i) {
            const double q = off[i - 1] / diag[i - 1];
            diag[i] -= q * off[i - 1];
            rhs[i] -= q * rhs[i - 1];
        }
        m[ni] = rhs[ni - 1] / diag[ni - 1];
        for (std::size_t i = ni - 1; i >= 1; --i) {
            m[i] = (rhs[i - 1] - off[i - 1] * m[i + 1]) / diag[i - 1];
            if (i == 1) break;
        }
    }

    Signal env;
    env.sample_rate = s.sample_rate;
    env.samples.resize(s.size());

    const double h0 = xs[1] - xs[0];
    const double hn = xs[k - 1] - xs[k - 2];
    const double slope_begin = (ys[1] - ys[0]) / h0 - h0 * (2.0 * m[0] + m[1]) / 6.0;
    const double slope_end = (ys[k - 1] - ys[k - 2]) / hn + hn * (m[k - 2] + 2.0 * m[k - 1]) / 6.0;

    std::size_t seg = 0;
    for (std::size_t p = 0; p < s.size(); ++p) {
        const double xp = static_cast<double>(p);
        if (xp <= xs.front()) {
            env.samples[p] = ys.front() + slope_begin * (xp - xs.front());
            continue;
        }
        if (xp >= xs.back()) {
            env.samples[p] = ys.back() + slope_end * (xp - xs.back());
            continue;
        }
        while (seg + 2 < k && xs[seg + 1] < xp) ++seg;
        const double h = xs[seg + 1] - xs[seg];
        const double a = (xs[seg + 1] - xp) / h;
        const double b = (xp - xs[seg]) / h;
        env.samples[p] = a * ys[seg] + b * ys[seg + 1] +
                         ((a * a * a - a) * m[seg] + (b * b * b - b) * m[seg + 1]) * h * h / 6.0;
    }
    return env;
}

Signal mirror_extend(const Signal& s, std::size_t ext) {
    const std::size_t n = s.size();
    if (ext >= n) {
        throw ExtensionTooLong("mirror_extend: extension must be shorter than the signal");
    }
    Signal out;
    out.sample_rate = s.sample_rate;
    out.samples.resize(n + 2 * ext);
    for (std::size_t i = 0; i < ext; ++i) out.samples[i] = s.samples[ext - i];
    std::copy(s.samples.begin(), s.samples.end(), out.samples.begin() + static_cast<long>(ext));
    for (std::size_t i = 0; i < ext; ++i) out.samples[ext + n + i] = s.samples[n - 2 - i];
    return out;
}

double sd_criterion(const Signal& h_prev, const Signal& h_cur) {
    const auto& a = h_prev.samples;
    const auto& b = h_cur.samples;
    if (a.size() != b.size()) {
        throw std::invalid_argument("sd_criterion: length mismatch");
    }
    double peak = 0.0;
    for (double v : a) peak = std::max(peak, v * v);
    const double floor = 1e-12 * peak;
    double sd = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = a[i] * a[i];
        if (denom < floor || denom == 0.0) continue;
        const double d = a[i] - b[i];
        sd += d * d / denom;
    }
    return sd;
}

std::size_t resolve_boundary_extension(const EmdConfig& cfg, const Signal& s) {
    const std::size_t n = s.size();
    if (n == 0) return 0;
    if (cfg.boundary_extension > 0) return cfg.boundary_extension;
    // One nominal fundamental period, but never less than a third of the
    // window: the mirror must reach past one period of the slowest mode the
    // window can hold, or the envelopes have no knots near the edges.
    std::size_t period = 2;
    if (s.sample_rate > 0.0) {
        period = std::max<std::size_t>(
            2, static_cast<std::size_t>(std::llround(s.sample_rate / kNominalFundamentalHz)));
    }
    return std::min(std::max(period, n / 3), n - 1);
}

namespace {

// Even reflection folds the signal at each junction, which shows up as a
// spurious extremum pinned to the boundary sample value. Those knots would
// drag the envelopes toward the signal itself, so they are not used.
void drop_junction_knots(std::vector<std::size_t>& knots, std::size_t ext, std::size_t n) {
    if (ext == 0) return;
    std::erase_if(knots, [&](std::size_t k) { return k == ext || k == ext + n - 1; });
}

}  // namespace

Signal sift_once(const Signal& s, const EmdConfig& cfg) {
    const std::size_t n = s.size();
    const std::size_t ext = resolve_boundary_extension(cfg, s);
    const Signal extended = mirror_extend(s, ext);
    auto [maxima, minima] = find_extrema(extended);
    drop_junction_knots(maxima, ext, n);
    drop_junction_knots(minima, ext, n);
    if (maxima.size() < 2 || minima.size() < 2) {
        throw TooFewKnots("sift_once: fewer than two extrema of a kind after extension");
    }
    const Signal upper = spline_envelope(maxima, extended);
    const Signal lower = spline_envelope(minima, extended);

    Signal h;
    h.sample_rate = s.sample_rate;
    h.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + ext;
        h.samples[i] = extended.samples[j] - 0.5 * (upper.samples[j] + lower.samples[j]);
    }
    return h;
}

std::pair<Signal, int> extract_imf(const Signal& s, const EmdConfig& cfg) {
    Signal prev = s;
    int iterations = 0;
    for (int k = 1; k <= cfg.max_sift_iterations; ++k) {
        Signal h;
        try {
            h = sift_once(prev, cfg);
        } catch (const TooFewKnots&) {
            if (k == 1) throw NotSiftable("extract_imf: input admits no sift");
            return {std::move(prev), iterations};
        }
        iterations = k;
        const double sd = sd_criterion(prev, h);
        prev = std::move(h);
        // Stop on converged sifting, but only once h also meets the
        // zero-mean side of the IMF definition. The mean is taken over the
        // central 80%, where boundary extension artifacts cannot hide it.
        const std::size_t skip = prev.size() / 10;
        const std::vector<double> core(prev.samples.begin() + static_cast<long>(skip),
                                       prev.samples.end() - static_cast<long>(skip));
        if (sd < cfg.sd_threshold && std::abs(mean(core)) <= 0.01 * rms(core)) break;
    }
    return {std::move(prev), iterations};
}

ImfSet decompose(const Signal& s, const EmdConfig& cfg) {
    ImfSet out;
    out.residue = s;
    if (s.size() < 4) return out;

    // Candidate acceptance is judged away from the boundary extensions:
    // debris modes concentrate their energy at the edges.
    const auto core_of = [](const Signal& x) {
        Signal c;
        c.sample_rate = x.sample_rate;
        const std::size_t skip = x.size() / 10;
        c.samples.assign(x.samples.begin() + static_cast<long>(skip),
                         x.samples.end() - static_cast<long>(skip));
        return c;
    };
    // Below this the component never meets the IMF shape conditions; it is
    // numerical debris of the sifting and stays in the residue.
    const double significance_floor = 0.02 * rms(core_of(s).samples);

    for (int k = 0; k < cfg.max_imfs; ++k) {
        auto [maxima, minima] = find_extrema(out.residue);
        if (maxima.size() < 2 || minima.size() < 2) break;
        Signal imf;
        int iters = 0;
        try {
            std::tie(imf, iters) = extract_imf(out.residue, cfg);
        } catch (const NotSiftable&) {
            break;
        }
        const Signal core = core_of(imf);
        if (rms(core.samples) < significance_floor) break;
        // A mode slower than the window cannot have its envelopes resolved;
        // it belongs to the trend.
        auto [core_max, core_min] = find_extrema(core);
        if (core_max.size() < 2 || core_min.size() < 2) break;
        for (std::size_t i = 0; i < out.residue.size(); ++i) {
            out.residue.samples[i] -= imf.samples[i];
        }
        out.imfs.push_back(std::move(imf));
        out.sift_counts.push_back(iters);
    }
    return out;
}

std::vector<ImfSet> decompose_many(const std::vector<Signal>& signals,
                                   const EmdConfig& cfg, bool parallel) {
    std::vector<ImfSet> out(signals.size());
    if (parallel) {
        const long count = static_cast<long>(signals.size());
#pragma omp parallel for schedule(dynamic)
        for (long i = 0; i < count; ++i) {
            out[static_cast<std::size_t>(i)] = decompose(signals[static_cast<std::size_t>(i)], cfg);
        }
    } else {
        for (std::size_t i = 0; i < signals.size(); ++i) {
            out[i] = decompose(signals[i], cfg);
        }
    }
    return out;
}

double zero_crossing_rate(const Signal& s) {
    const auto& x = s.samples;
    if (x.size() < 2 || s.sample_rate <= 0.0) return 0.0;
    int last_sign = 0;
    std::size_t crossings = 0;
    for (double v : x) {
        const int sg = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
        if (sg == 0) continue;
        if (last_sign != 0 && sg != last_sign) ++crossings;
        last_sign = sg;
    }
    const double duration = static_cast<double>(x.size()) / s.sample_rate;
    return static_cast<double>(crossings) / (2.0 * duration);
}

}  // namespace apfsim::emd
