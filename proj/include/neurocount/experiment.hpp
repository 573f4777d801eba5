#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "neurocount/detector.hpp"
#include "neurocount/errors.hpp"
#include "neurocount/estimator.hpp"
#include "neurocount/io.hpp"
#include "neurocount/rng.hpp"
#include "neurocount/simulator.hpp"

namespace neurocount {

enum class DetectorKind { oracle, threshold };

// One row of the factorial design, or a custom combination when
// experiment_id is 0. Ids 1..8 pin noise kind, detector, and overlap.
struct ExperimentSpec {
    int experiment_id = 0;
    std::vector<int> nu_list{1, 2, 3, 4, 5};
    std::size_t n = 1000;
    std::size_t m = 2000;
    int repetitions = 25;
    std::uint64_t seed = 0;
    DetectorKind detector = DetectorKind::oracle;
    NoiseKind noise_kind = NoiseKind::gaussian;
    bool overlaps = true;  // ~10% overlapping spikes vs none
    EstimatorConfig estimator;
    DetectorConfig detector_cfg;

    static ExperimentSpec from_id(int id) {
        if (id < 1 || id > 8) throw ConfigError("ExperimentSpec: experiment id must be 1..8");
        ExperimentSpec spec;
        spec.experiment_id = id;
        spec.noise_kind = id <= 4 ? NoiseKind::gaussian : NoiseKind::t5_scaled;
        spec.detector = (id % 2 == 1) ? DetectorKind::oracle : DetectorKind::threshold;
        const int row = (id - 1) % 4;  // 0: overlap/oracle, 1: overlap/det, 2,3: none
        spec.overlaps = row < 2;
        return spec;
    }

    void validate() const {
        if (experiment_id < 0 || experiment_id > 8)
            throw ConfigError("ExperimentSpec: experiment id must be 0..8");
        if (nu_list.empty()) throw ConfigError("ExperimentSpec: empty nu list");
        for (int nu : nu_list)
            if (nu < 1 || nu > 5) throw ConfigError("ExperimentSpec: nu must lie in 1..5");
        if (n < 2) throw ConfigError("ExperimentSpec: n must be >= 2");
        if (m < 1) throw ConfigError("ExperimentSpec: m must be >= 1");
        if (repetitions < 0) throw ConfigError("ExperimentSpec: repetitions must be >= 0");
    }
};

struct FrequencyRow {
    int experiment_id = 0;
    std::size_t n = 0;
    std::size_t m = 0;
    int nu = 0;
    int repetitions = 0;
    int matches = 0;
    int failures = 0;                // repetitions whose pipeline errored
    std::map<int, int> histogram;    // nu_hat -> count; failures keyed as -1

    double frequency_pct() const {
        return repetitions == 0 ? 0.0 : 100.0 * matches / repetitions;
    }
    double stderr_pct() const {
        if (repetitions == 0) return 0.0;
        const double f = frequency_pct();
        return std::sqrt(f * (100.0 - f) / repetitions);
    }

    bool operator==(const FrequencyRow&) const = default;
};

struct FrequencyTable {
    std::vector<FrequencyRow> rows;

    bool operator==(const FrequencyTable&) const = default;
};

// Simulation length that comfortably yields n spike clusters at the 1/400
// collective rate (about 1.2 n expected, shortfalls tallied as failures).
inline std::size_t duration_for_spikes(std::size_t n) { return n * 540; }

// One estimation repetition: simulate, extract with the chosen detector, run
// the estimator with the tuning defaults, return nu_hat.
inline int run_repetition(int nu, std::uint64_t seed, const ExperimentSpec& spec) {
    SimulationSpec sim;
    sim.templates = default_templates(nu, /*least_favorable=*/true);
    sim.duration_samples = duration_for_spikes(spec.n);
    sim.noise_kind = spec.noise_kind;
    sim.seed = seed;
    sim.overlap_policy =
        spec.overlaps ? OverlapPolicy::natural : OverlapPolicy::forbid_overlap;
    const Recording rec = generate(sim);

    SpikeMatrix data;
    if (spec.detector == DetectorKind::oracle) {
        data = oracle_extract(rec, sim.templates[0].waveform.size(), spec.m,
                              sim.templates[0].peak_index);
    } else {
        DetectorConfig det = spec.detector_cfg;
        det.noise_count_m = spec.m;
        data = detect(rec.trace, det);
    }
    if (data.n() < spec.n)
        throw InsufficientDataError("run_repetition: extracted " + std::to_string(data.n()) +
                                    " spikes, needed " + std::to_string(spec.n));
    return estimate_nu(data.take_spikes(spec.n), spec.estimator).nu_hat;
}

// The factorial grid: per scenario nu and repetition, simulate + estimate and
// tally how often nu_hat equals nu. Per-repetition errors count as failed
// outcomes; the grid never aborts. Deterministic for a fixed seed.
inline FrequencyTable run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    FrequencyTable table;
    for (int nu : spec.nu_list) {
        FrequencyRow row;
        row.experiment_id = spec.experiment_id;
        row.n = spec.n;
        row.m = spec.m;
        row.nu = nu;
        row.repetitions = spec.repetitions;
        for (int rep = 0; rep < spec.repetitions; ++rep) {
            const std::uint64_t rep_seed =
                derive_seed(spec.seed, static_cast<std::uint64_t>(nu),
                            static_cast<std::uint64_t>(rep));
            try {
                const int nu_hat = run_repetition(nu, rep_seed, spec);
                row.histogram[nu_hat] += 1;
                if (nu_hat == nu) row.matches += 1;
            } catch (const Error&) {
                row.histogram[-1] += 1;
                row.failures += 1;
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

// Detect-and-estimate on a recording bundle from disk.
inline EstimateReport analyze_recording(const std::string& base_path,
                                        const DetectorConfig& detector_cfg,
                                        const EstimatorConfig& estimator_cfg) {
    const RecordingBundle bundle = read_bundle(base_path);
    const SpikeMatrix data = detect(bundle.recording.trace, detector_cfg);
    return estimate_nu(data, estimator_cfg);
}

// ---- frequency table CSV ----

inline std::string histogram_to_string(const std::map<int, int>& histogram) {
    std::ostringstream out;
    bool first = true;
    for (const auto& [nu_hat, count] : histogram) {
        if (!first) out << '|';
        out << nu_hat << ':' << count;
        first = false;
    }
    return out.str();
}

inline std::map<int, int> histogram_from_string(const std::string& text) {
    std::map<int, int> out;
    if (text.empty()) return out;
    std::stringstream ss(text);
    std::string pair;
    while (std::getline(ss, pair, '|')) {
        const auto colon = pair.find(':');
        if (colon == std::string::npos)
            throw FormatError("histogram_from_string: bad entry '" + pair + "'");
        try {
            out[std::stoi(pair.substr(0, colon))] = std::stoi(pair.substr(colon + 1));
        } catch (const std::exception&) {
            throw FormatError("histogram_from_string: bad entry '" + pair + "'");
        }
    }
    return out;
}

inline std::string frequency_table_to_csv(const FrequencyTable& table) {
    std::ostringstream out;
    out << "experiment,n,m,nu,repetitions,matches,failures,frequency_pct,stderr_pct,histogram\n";
    out.precision(17);
    for (const auto& row : table.rows) {
        out << row.experiment_id << ',' << row.n << ',' << row.m << ',' << row.nu << ','
            << row.repetitions << ',' << row.matches << ',' << row.failures << ','
            << row.frequency_pct() << ',' << row.stderr_pct() << ','
            << histogram_to_string(row.histogram) << "\n";
    }
    return out.str();
}

inline FrequencyTable frequency_table_from_csv(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    if (!std::getline(ss, line)) throw FormatError("frequency_table_from_csv: empty input");
    FrequencyTable table;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 10)
            throw FormatError("frequency_table_from_csv: expected 10 columns, got " +
                              std::to_string(cells.size()));
        FrequencyRow row;
        try {
            row.experiment_id = std::stoi(cells[0]);
            row.n = static_cast<std::size_t>(std::stoull(cells[1]));
            row.m = static_cast<std::size_t>(std::stoull(cells[2]));
            row.nu = std::stoi(cells[3]);
            row.repetitions = std::stoi(cells[4]);
            row.matches = std::stoi(cells[5]);
            row.failures = std::stoi(cells[6]);
        } catch (const std::exception&) {
            throw FormatError("frequency_table_from_csv: bad numeric cell in '" + line + "'");
        }
        row.histogram = histogram_from_string(cells[9]);
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace neurocount
