#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "neurocount/errors.hpp"
#include "neurocount/rng.hpp"
#include "neurocount/spikes.hpp"

namespace neurocount {

struct SpikeTemplate {
    std::vector<double> waveform;  // volts on the sigma = 1 scale
    std::size_t peak_index = 0;

    void validate() const {
        if (waveform.empty()) throw ConfigError("SpikeTemplate: empty waveform");
        if (peak_index >= waveform.size())
            throw ConfigError("SpikeTemplate: peak_index out of range");
        double mx = waveform[0];
        for (double v : waveform) mx = std::max(mx, v);
        if (waveform[peak_index] != mx)
            throw ConfigError("SpikeTemplate: peak_index is not the waveform maximum");
        if (mx < 0.0) throw ConfigError("SpikeTemplate: peak must be nonnegative");
    }
};

enum class NoiseKind { gaussian, t5_scaled };
enum class OverlapPolicy { natural, forbid_overlap };

struct SimulationSpec {
    std::vector<SpikeTemplate> templates;
    double firing_rate = 1.0 / 400.0;  // collective events per sample
    std::size_t duration_samples = 400000;
    NoiseKind noise_kind = NoiseKind::gaussian;
    std::uint64_t seed = 0;
    OverlapPolicy overlap_policy = OverlapPolicy::natural;
    double sampling_rate_hz = 15000.0;

    void validate() const {
        if (templates.empty()) throw ConfigError("SimulationSpec: needs at least one template");
        const std::size_t d = templates[0].waveform.size();
        for (const auto& t : templates) {
            t.validate();
            if (t.waveform.size() != d)
                throw ConfigError("SimulationSpec: templates must share one length");
        }
        if (!(firing_rate > 0.0 && firing_rate < 1.0))
            throw ConfigError("SimulationSpec: firing_rate must lie in (0, 1)");
        if (duration_samples < d)
            throw ConfigError("SimulationSpec: duration shorter than one spike window");
        if (!(sampling_rate_hz > 0.0))
            throw ConfigError("SimulationSpec: sampling rate must be positive");
    }
};

struct GroundTruthEvent {
    std::size_t sample = 0;  // onset of the template window
    int neuron_id = 0;

    bool operator==(const GroundTruthEvent&) const = default;
};

struct Recording {
    std::vector<double> trace;
    std::vector<double> signal;  // noiseless superposition (ground truth)
    double sampling_rate_hz = 15000.0;
    std::vector<GroundTruthEvent> ground_truth;
    double sigma_true = 1.0;
};

// i.i.d. Student-t(5) draws scaled by sqrt(3/5) so the variance is 1.
inline std::vector<double> t5_noise(std::size_t count, Rng& rng) {
    if (count == 0) throw ConfigError("t5_noise: count must be positive");
    const double scale = std::sqrt(3.0 / 5.0);
    std::vector<double> out(count);
    for (auto& v : out) v = scale * rng.student_t5();
    return out;
}

// Bernoulli-per-sample event train at the collective firing rate, a uniformly
// chosen template added at each event onset, unit-variance noise on top.
// Under forbid_overlap, events landing within one window of the previous kept
// event are dropped and the process keeps sampling.
inline Recording generate(const SimulationSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const std::size_t d = spec.templates[0].waveform.size();
    const std::size_t nu = spec.templates.size();

    Recording rec;
    rec.sampling_rate_hz = spec.sampling_rate_hz;
    rec.sigma_true = 1.0;
    rec.signal.assign(spec.duration_samples, 0.0);

    for (std::size_t s = 0; s + d <= spec.duration_samples; ++s) {
        if (rng.uniform01() >= spec.firing_rate) continue;
        if (spec.overlap_policy == OverlapPolicy::forbid_overlap &&
            !rec.ground_truth.empty() && s - rec.ground_truth.back().sample < d)
            continue;
        const int id = std::min<int>(static_cast<int>(rng.uniform01() * static_cast<double>(nu)),
                                     static_cast<int>(nu) - 1);
        rec.ground_truth.push_back(GroundTruthEvent{s, id});
        const auto& w = spec.templates[static_cast<std::size_t>(id)].waveform;
        for (std::size_t j = 0; j < d; ++j) rec.signal[s + j] += w[j];
    }

    const double t5_scale = std::sqrt(3.0 / 5.0);
    rec.trace.resize(spec.duration_samples);
    for (std::size_t i = 0; i < spec.duration_samples; ++i)
        rec.trace[i] = rec.signal[i] + (spec.noise_kind == NoiseKind::gaussian
                                            ? rng.normal()
                                            : t5_scale * rng.student_t5());
    return rec;
}

namespace detail {

// Group events whose windows intersect into clusters: [first, last] index
// ranges into the (time-ordered) ground truth.
inline std::vector<std::pair<std::size_t, std::size_t>> cluster_events(
    const std::vector<GroundTruthEvent>& events, std::size_t d) {
    std::vector<std::pair<std::size_t, std::size_t>> clusters;
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (!clusters.empty() &&
            events[i].sample - events[clusters.back().second].sample < d)
            clusters.back().second = i;
        else
            clusters.emplace_back(i, i);
    }
    return clusters;
}

}  // namespace detail

// Fraction of extracted spikes (event clusters) that superpose two or more
// events; the paper's proportion of overlapping spikes.
inline double overlap_participation(const Recording& rec, std::size_t d) {
    const auto clusters = detail::cluster_events(rec.ground_truth, d);
    if (clusters.empty())
        throw InsufficientDataError("overlap_participation: recording has no events");
    std::size_t multi = 0;
    for (const auto& [first, last] : clusters)
        if (last > first) ++multi;
    return static_cast<double>(multi) / static_cast<double>(clusters.size());
}

// Error-free extraction from ground truth: one window per event cluster,
// aligned so the peak of the noiseless superposed signal (searched over the
// cluster's span) sits at peak_index; the window itself carries signal plus
// noise. The noise sample is noise_count silent windows placed at even
// strides across every position at least one window away from all events;
// sigma is the sample deviation of the silent samples.
inline SpikeMatrix oracle_extract(const Recording& rec, std::size_t d, std::size_t noise_count,
                                  std::size_t peak_index) {
    if (d == 0 || rec.trace.size() < d) throw ConfigError("oracle_extract: bad window length");
    if (peak_index >= d) throw ConfigError("oracle_extract: peak_index out of range");
    if (rec.ground_truth.empty())
        throw InsufficientDataError("oracle_extract: recording has no events to extract");
    if (noise_count == 0) throw ConfigError("oracle_extract: noise_count must be positive");
    if (rec.signal.size() != rec.trace.size())
        throw ConfigError("oracle_extract: recording lacks the noiseless signal ground truth");

    const std::size_t len = rec.trace.size();
    const auto clusters = detail::cluster_events(rec.ground_truth, d);

    std::vector<std::size_t> starts;
    for (const auto& [first, last] : clusters) {
        const std::size_t lo = rec.ground_truth[first].sample;
        const std::size_t hi = std::min(len, rec.ground_truth[last].sample + d);
        std::size_t peak = lo;
        for (std::size_t i = lo; i < hi; ++i)
            if (rec.signal[i] > rec.signal[peak]) peak = i;
        if (peak < peak_index) continue;  // window would leave the trace
        const std::size_t start = peak - peak_index;
        if (start + d > len) continue;
        starts.push_back(start);
    }
    if (starts.empty())
        throw InsufficientDataError("oracle_extract: no cluster window fits inside the trace");

    SpikeMatrix out;
    out.spikes = RealMatrix(starts.size(), d);
    for (std::size_t i = 0; i < starts.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) out.spikes(i, j) = rec.trace[starts[i] + j];

    // silent mask: one window of clearance on both sides of every event window
    std::vector<char> blocked(len, 0);
    for (const auto& ev : rec.ground_truth) {
        const std::size_t lo = ev.sample >= d ? ev.sample - d : 0;
        const std::size_t hi = std::min(len, ev.sample + 2 * d);
        for (std::size_t i = lo; i < hi; ++i) blocked[i] = 1;
    }
    std::vector<double> silent;
    for (std::size_t i = 0; i < len; ++i)
        if (!blocked[i]) silent.push_back(rec.trace[i]);

    std::vector<std::size_t> eligible;
    std::size_t run = 0;
    for (std::size_t i = 0; i < len; ++i) {
        run = blocked[i] ? 0 : run + 1;
        if (run >= d) eligible.push_back(i + 1 - d);
    }
    if (eligible.size() < noise_count)
        throw InsufficientDataError("oracle_extract: silent region supplies only " +
                                    std::to_string(eligible.size()) + " windows, requested " +
                                    std::to_string(noise_count));

    out.noise_windows = RealMatrix(noise_count, d);
    for (std::size_t k = 0; k < noise_count; ++k) {
        const std::size_t pick = eligible[k * eligible.size() / noise_count];
        for (std::size_t j = 0; j < d; ++j) out.noise_windows(k, j) = rec.trace[pick + j];
    }
    out.sigma = sample_stddev(silent);
    return out;
}

// The five synthetic action-potential shapes, peak amplitudes on the fixed
// ladder {3.2, 5.5, 7.5, 10, 20} sigma, length 45 with the peak at sample 15.
// least_favorable picks the nu smallest amplitudes, otherwise the nu largest.
inline std::vector<SpikeTemplate> default_templates(int nu, bool least_favorable) {
    if (nu < 1 || nu > 5) throw ConfigError("default_templates: nu must lie in 1..5");
    constexpr std::size_t kLength = 45;
    constexpr std::size_t kPeak = 15;
    constexpr double kAmplitudes[5] = {3.2, 5.5, 7.5, 10.0, 20.0};
    // per-neuron shape variation: positive-lobe width and sharpness, afterwave
    // delay/sharpness/depth. Widths are sized so the principal-component
    // projections of the five shapes spread across the period instead of
    // crowding near each other mod 2pi.
    constexpr double kWidth[5] = {3.26, 3.33, 3.32, 3.94, 4.28};
    constexpr double kSharp[5] = {3.0, 6.0, 4.3, 3.2, 3.6};
    constexpr double kAfterPeak[5] = {24.0, 26.0, 25.0, 26.0, 27.0};
    constexpr double kAfterK[5] = {1.8, 2.2, 2.0, 1.6, 2.4};
    constexpr double kDepth[5] = {0.45, 0.45, 0.42, 0.48, 0.46};

    // unit-peak gamma bump: ((t-a)/(c-a))^k e^{k(1-(t-a)/(c-a))} for t >= a
    auto bump = [](double t, double onset, double center, double k) {
        if (t <= onset) return 0.0;
        const double x = (t - onset) / (center - onset);
        return std::pow(x, k) * std::exp(k * (1.0 - x));
    };

    std::vector<int> picks;
    for (int i = 0; i < nu; ++i) picks.push_back(least_favorable ? i : 5 - nu + i);

    std::vector<SpikeTemplate> bank;
    for (int idx : picks) {
        SpikeTemplate t;
        t.peak_index = kPeak;
        t.waveform.resize(kLength);
        const double onset = static_cast<double>(kPeak) - kWidth[idx];
        for (std::size_t j = 0; j < kLength; ++j) {
            const double x = static_cast<double>(j);
            const double pos = bump(x, onset, static_cast<double>(kPeak), kSharp[idx]);
            const double neg = kDepth[idx] * bump(x, kPeak + 1.0, kAfterPeak[idx], kAfterK[idx]);
            t.waveform[j] = kAmplitudes[idx] * (pos - neg);
        }
        t.validate();
        if (!(t.waveform[t.peak_index] > 0.0))
            throw ConfigError("default_templates: degenerate peak");
        bank.push_back(std::move(t));
    }
    return bank;
}

}  // namespace neurocount
