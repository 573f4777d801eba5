#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "neurocount/errors.hpp"
#include "neurocount/spikes.hpp"

namespace neurocount {

struct DetectorConfig {
    double threshold_sigmas = 2.25;
    std::size_t window_d = 45;
    std::size_t peak_index = 15;
    std::size_t refractory_samples = 0;  // 0 means window_d
    std::size_t noise_count_m = 2000;

    std::size_t refractory() const { return refractory_samples ? refractory_samples : window_d; }

    void validate() const {
        if (!(threshold_sigmas > 0.0))
            throw ConfigError("DetectorConfig: threshold_sigmas must be positive");
        if (window_d == 0) throw ConfigError("DetectorConfig: window_d must be positive");
        if (peak_index >= window_d)
            throw ConfigError("DetectorConfig: peak_index must lie inside the window");
        if (noise_count_m == 0)
            throw ConfigError("DetectorConfig: noise_count_m must be positive");
    }
};

namespace detail {

inline double mad_scale(std::span<const double> xs) {
    std::vector<double> work(xs.begin(), xs.end());
    const std::size_t mid = work.size() / 2;
    std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(mid), work.end());
    const double median = work[mid];
    for (auto& v : work) v = std::abs(v - median);
    std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(mid), work.end());
    return 1.4826 * work[mid];
}

}  // namespace detail

// Robust noise scale: median absolute deviation times the normal consistency
// constant. A zero MAD on a nonconstant trace (e.g. a noiseless synthetic
// recording) falls back to the plain deviation; a constant trace is an error.
inline double estimate_sigma(std::span<const double> trace) {
    if (trace.size() < 1000) throw ConfigError("estimate_sigma: trace shorter than 1000 samples");
    const double mad = detail::mad_scale(trace);
    if (mad > 0.0) return mad;
    const double sd = sample_stddev(trace);
    if (!(sd > 0.0)) throw ConfigError("estimate_sigma: constant trace");
    return sd;
}

// Detected event peaks: threshold crossings of |trace| at threshold_sigmas
// times the robust scale, each aligned on the local maximum within half a
// window, then keep-largest suppression inside the refractory span.
inline std::vector<std::size_t> detect_events(std::span<const double> trace,
                                              const DetectorConfig& cfg) {
    cfg.validate();
    const std::size_t len = trace.size();
    if (len < cfg.window_d) throw ConfigError("detect_events: trace shorter than one window");
    const double sigma_hat = estimate_sigma(trace);
    const double thr = cfg.threshold_sigmas * sigma_hat;
    const std::size_t half = cfg.window_d / 2;

    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < len; ++i) {
        if (std::abs(trace[i]) <= thr) continue;
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(len, i + half + 1);
        std::size_t peak = lo;
        for (std::size_t j = lo; j < hi; ++j)
            if (trace[j] > trace[peak]) peak = j;
        peaks.push_back(peak);
    }
    std::sort(peaks.begin(), peaks.end());
    peaks.erase(std::unique(peaks.begin(), peaks.end()), peaks.end());

    // strongest-first acceptance with a refractory exclusion zone
    std::sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) {
        if (trace[a] != trace[b]) return trace[a] > trace[b];
        return a < b;
    });
    std::set<std::size_t> accepted;
    const std::size_t refractory = cfg.refractory();
    for (std::size_t peak : peaks) {
        auto next = accepted.lower_bound(peak);
        bool clear = true;
        if (next != accepted.end() && *next - peak < refractory) clear = false;
        if (next != accepted.begin()) {
            const std::size_t prev = *std::prev(next);
            if (peak - prev < refractory) clear = false;
        }
        if (clear) accepted.insert(peak);
    }
    return std::vector<std::size_t>(accepted.begin(), accepted.end());
}

// Full detection pass: aligned sweeps of length window_d with the peak at
// peak_index, a noise sample of noise_count_m windows from stretches with no
// threshold crossing within window_d on either side, everything rescaled so
// the noise standard deviation is 1. The detection threshold uses the
// trace-wide robust scale; the output normalization re-estimates the scale on
// the silent samples, where spike occupancy cannot inflate it.
inline SpikeMatrix detect(std::span<const double> trace, const DetectorConfig& cfg) {
    cfg.validate();
    const std::size_t len = trace.size();
    const std::size_t d = cfg.window_d;
    const double sigma_hat = estimate_sigma(trace);
    const double thr = cfg.threshold_sigmas * sigma_hat;

    const std::vector<std::size_t> events = detect_events(trace, cfg);
    std::vector<std::size_t> starts;
    for (std::size_t peak : events) {
        if (peak < cfg.peak_index) continue;
        const std::size_t start = peak - cfg.peak_index;
        if (start + d > len) continue;
        starts.push_back(start);
    }
    if (starts.empty()) throw InsufficientDataError("detect: zero detections");

    // silent samples: no crossing within window_d on either side
    std::vector<char> crossing(len, 0);
    for (std::size_t i = 0; i < len; ++i) crossing[i] = std::abs(trace[i]) > thr;
    std::vector<std::size_t> prefix(len + 1, 0);
    for (std::size_t i = 0; i < len; ++i)
        prefix[i + 1] = prefix[i] + static_cast<std::size_t>(crossing[i]);
    auto crossings_in = [&](std::size_t lo, std::size_t hi) {  // [lo, hi)
        return prefix[std::min(hi, len)] - prefix[std::min(lo, len)];
    };

    std::vector<double> silent;
    std::vector<std::size_t> eligible;
    std::size_t run = 0;
    for (std::size_t i = 0; i < len; ++i) {
        const std::size_t lo = i >= d ? i - d : 0;
        const bool is_silent = crossings_in(lo, i + d + 1) == 0;
        if (is_silent) silent.push_back(trace[i]);
        run = is_silent ? run + 1 : 0;
        if (run >= d) eligible.push_back(i + 1 - d);
    }
    if (eligible.size() < cfg.noise_count_m)
        throw InsufficientDataError("detect: silent region supplies only " +
                                    std::to_string(eligible.size()) + " windows, requested " +
                                    std::to_string(cfg.noise_count_m));

    double sigma_out = silent.size() >= 100 ? detail::mad_scale(silent) : sigma_hat;
    if (!(sigma_out > 0.0)) sigma_out = sigma_hat;

    SpikeMatrix out;
    out.spikes = RealMatrix(starts.size(), d);
    for (std::size_t i = 0; i < starts.size(); ++i)
        for (std::size_t j = 0; j < d; ++j)
            out.spikes(i, j) = trace[starts[i] + j] / sigma_out;
    out.noise_windows = RealMatrix(cfg.noise_count_m, d);
    for (std::size_t k = 0; k < cfg.noise_count_m; ++k) {
        const std::size_t pick = eligible[k * eligible.size() / cfg.noise_count_m];
        for (std::size_t j = 0; j < d; ++j)
            out.noise_windows(k, j) = trace[pick + j] / sigma_out;
    }
    out.sigma = 1.0;
    return out;
}

}  // namespace neurocount
