#ifndef APFSIM_EMD_HPP
#define APFSIM_EMD_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include "apfsim/signal.hpp"

namespace apfsim::emd {

struct EmdConfig {
    double sd_threshold = 0.25;        // sift stop when SD drops below this
    int max_sift_iterations = 50;
    int max_imfs = 10;
    // Mirror extension applied before envelope fitting, in samples.
    // 0 = auto: one nominal fundamental period, capped at length-1.
    std::size_t boundary_extension = 0;
};

/// Ordered IMFs plus the final residue of one decomposition.
struct ImfSet {
    std::vector<Signal> imfs;
    Signal residue;
    std::vector<int> sift_counts;  // sift iterations spent per IMF
};

/// Strict local extrema with a first-of-plateau tie break. Endpoints are
/// never extrema; indices come out sorted and maxima/minima interleave.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
find_extrema(const Signal& s);

/// Natural cubic spline through (knot index, sample value) pairs, evaluated
/// at every sample position of `s`. Outside the knot span the boundary
/// slope is continued linearly.
Signal spline_envelope(const std::vector<std::size_t>& knot_indices, const Signal& s);

/// Even reflection of `s` about both endpoints; output length is n + 2*ext.
Signal mirror_extend(const Signal& s, std::size_t ext);

/// Sift-convergence measure: sum of |h_prev - h_cur|^2 / h_prev^2 over
/// samples where h_prev^2 is above 1e-12 * max(h_prev^2).
double sd_criterion(const Signal& h_prev, const Signal& h_cur);

/// One sifting pass: subtract the mean of the mirror-extended upper/lower
/// envelopes, trimmed back to the input length.
Signal sift_once(const Signal& s, const EmdConfig& cfg = {});

/// Repeat sift_once until sd_criterion < threshold or the iteration cap is
/// reached. Returns the final sift component and the iteration count.
std::pair<Signal, int> extract_imf(const Signal& s, const EmdConfig& cfg = {});

/// Full decomposition: peel IMFs off successive residues until the residue
/// has fewer than two extrema of a kind or max_imfs is reached.
ImfSet decompose(const Signal& s, const EmdConfig& cfg = {});

/// Decompose several signals; iterations are independent and run in
/// parallel when OpenMP is enabled. Output order matches input order and is
/// bit-identical to calling decompose() serially.
std::vector<ImfSet> decompose_many(const std::vector<Signal>& signals,
                                   const EmdConfig& cfg = {},
                                   bool parallel = true);

/// Dominant-frequency estimate: sign changes / (2 * window duration).
double zero_crossing_rate(const Signal& s);

std::size_t resolve_boundary_extension(const EmdConfig& cfg, const Signal& s);

}  // namespace apfsim::emd

#endif
