#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "neurocount/detector.hpp"
#include "neurocount/rng.hpp"
#include "neurocount/simulator.hpp"

using namespace neurocount;

TEST_CASE("estimate_sigma is consistent, equivariant, and robust") {
    Rng rng(1);
    std::vector<double> trace(100000);
    for (auto& v : trace) v = rng.normal();
    const double sigma = estimate_sigma(trace);
    REQUIRE(sigma == Catch::Approx(1.0).margin(0.02));

    std::vector<double> doubled = trace;
    for (auto& v : doubled) v *= 2.0;
    REQUIRE(estimate_sigma(doubled) == 2.0 * sigma);  // order statistics scale exactly

    // 0.3% large spikes: the robust estimate barely moves, the plain one blows up
    std::vector<double> contaminated = trace;
    for (std::size_t i = 0; i < contaminated.size(); i += 333) contaminated[i] += 30.0;
    REQUIRE(estimate_sigma(contaminated) == Catch::Approx(1.0).margin(0.05));
    REQUIRE(sample_stddev(contaminated) > 1.2);

    REQUIRE_THROWS_AS(estimate_sigma(std::vector<double>(50, 0.0)), ConfigError);
    REQUIRE_THROWS_AS(estimate_sigma(std::vector<double>(5000, 1.0)), ConfigError);
}

TEST_CASE("detect finds a lone clean template exactly once, at its peak") {
    const auto bank = default_templates(2, true);  // 3.2 and 5.5 sigma shapes
    std::vector<double> trace(4000, 0.0);
    const std::size_t onset = 1800;
    for (std::size_t j = 0; j < bank[1].waveform.size(); ++j)
        trace[onset + j] = bank[1].waveform[j];

    DetectorConfig cfg;
    const auto events = detect_events(trace, cfg);
    REQUIRE(events.size() == 1);
    REQUIRE(events[0] == onset + bank[1].peak_index);

    const SpikeMatrix data = detect(trace, cfg);
    REQUIRE(data.n() == 1);
    std::size_t arg = 0;
    for (std::size_t j = 0; j < data.d(); ++j)
        if (data.spikes(0, j) > data.spikes(0, arg)) arg = j;
    REQUIRE(arg == cfg.peak_index);
}

TEST_CASE("Gaussian false-positive exceedance matches the tail oracle") {
    Rng rng(2);
    std::vector<double> trace(400000);
    for (auto& v : trace) v = rng.normal();
    const double sigma = estimate_sigma(trace);
    std::size_t exceed = 0;
    for (double v : trace)
        if (std::abs(v) > 2.25 * sigma) ++exceed;
    const double rate = static_cast<double>(exceed) / static_cast<double>(trace.size());
    const double want = 2.0 * 0.5 * std::erfc(2.25 / std::sqrt(2.0));  // 2 Phi(-2.25)
    REQUIRE(rate == Catch::Approx(want).margin(0.004));
    REQUIRE(rate > 0.0);

    // suppression still leaves false events on pure noise
    DetectorConfig cfg;
    cfg.noise_count_m = 100;
    const auto events = detect_events(trace, cfg);
    REQUIRE(events.size() > 100);
}

TEST_CASE("heavy-tailed noise triggers far more false positives at matched variance") {
    Rng rng(3);
    std::vector<double> gauss(300000), heavy(300000);
    for (auto& v : gauss) v = rng.normal();
    {
        Rng rng2(4);
        const auto t5 = t5_noise(heavy.size(), rng2);
        std::copy(t5.begin(), t5.end(), heavy.begin());
    }
    DetectorConfig cfg;
    const auto fp_gauss = detect_events(gauss, cfg).size();
    const auto fp_heavy = detect_events(heavy, cfg).size();
    REQUIRE(fp_heavy > fp_gauss);
}

TEST_CASE("detections shift with the trace and ignore positive rescaling") {
    SimulationSpec spec;
    spec.templates = default_templates(3, false);  // 7.5..20 sigma peaks
    spec.duration_samples = 120000;
    spec.seed = 5;
    const Recording rec = generate(spec);
    DetectorConfig cfg;
    cfg.noise_count_m = 50;

    const auto events = detect_events(rec.trace, cfg);

    // scale invariance: a power-of-two gain changes nothing at all
    std::vector<double> scaled = rec.trace;
    for (auto& v : scaled) v *= 4.0;
    REQUIRE(detect_events(scaled, cfg) == events);

    // translation: drop the first k samples; strong events away from the cut
    // appear at shifted positions
    const std::size_t k = 1000;
    std::vector<double> suffix(rec.trace.begin() + k, rec.trace.end());
    const auto shifted = detect_events(suffix, cfg);
    std::vector<std::size_t> strong_orig, strong_shift;
    const double cut = 5.0;  // only unambiguous spikes
    for (std::size_t e : events)
        if (e >= k + 45 && rec.trace[e] > cut) strong_orig.push_back(e - k);
    for (std::size_t e : shifted)
        if (suffix[e] > cut && e >= 45) strong_shift.push_back(e);
    REQUIRE(strong_orig == strong_shift);
}

TEST_CASE("recall on oracle ground truth with strong peaks") {
    SimulationSpec spec;
    spec.templates = default_templates(3, false);  // smallest peak 7.5 sigma
    spec.duration_samples = 400000;
    spec.seed = 6;
    spec.overlap_policy = OverlapPolicy::forbid_overlap;
    const Recording rec = generate(spec);

    DetectorConfig cfg;
    const auto events = detect_events(rec.trace, cfg);

    std::size_t matched = 0;
    for (const auto& ev : rec.ground_truth) {
        const std::size_t true_peak =
            ev.sample + spec.templates[static_cast<std::size_t>(ev.neuron_id)].peak_index;
        for (std::size_t e : events) {
            if (e + 2 >= true_peak && e <= true_peak + 2) {
                ++matched;
                break;
            }
        }
    }
    const double recall =
        static_cast<double>(matched) / static_cast<double>(rec.ground_truth.size());
    REQUIRE(recall >= 0.95);
}

TEST_CASE("silent-region noise sample variance at the 3 sigma setting") {
    SimulationSpec spec;
    spec.templates = default_templates(2, false);
    spec.duration_samples = 400000;
    spec.seed = 7;
    const Recording rec = generate(spec);

    DetectorConfig cfg;
    cfg.threshold_sigmas = 3.0;  // the setting where sub-threshold truncation is mild
    cfg.noise_count_m = 2000;
    const SpikeMatrix data = detect(rec.trace, cfg);
    REQUIRE(data.sigma == 1.0);

    double ss = 0.0;
    const double mean = sample_mean(data.noise_windows.data());
    for (double v : data.noise_windows.data()) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(data.noise_windows.data().size() - 1);
    const double tol = 5.0 / std::sqrt(static_cast<double>(cfg.noise_count_m));
    REQUIRE(var >= 1.0 - tol);
    REQUIRE(var <= 1.0 + tol);
}

TEST_CASE("detector error paths") {
    Rng rng(8);
    std::vector<double> quiet(20000);
    for (auto& v : quiet) v = 0.01 * rng.normal();
    DetectorConfig cfg;
    cfg.threshold_sigmas = 50.0;
    REQUIRE_THROWS_AS(detect(quiet, cfg), InsufficientDataError);  // zero detections

    DetectorConfig bad;
    bad.peak_index = 60;
    REQUIRE_THROWS_AS(detect(quiet, bad), ConfigError);
}
