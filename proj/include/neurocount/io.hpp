#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "neurocount/errors.hpp"
#include "neurocount/estimator.hpp"
#include "neurocount/simulator.hpp"
#include "neurocount/spikes.hpp"

namespace neurocount {

// ---- Recording bundle: <base>.f64 raw little-endian doubles + <base>.json sidecar ----

struct RecordingBundle {
    Recording recording;
    std::optional<SimulationSpec> spec;  // echo of the generating spec, when known
};

namespace detail {

inline nlohmann::json spec_echo_json(const SimulationSpec& spec) {
    nlohmann::json templates = nlohmann::json::array();
    for (const auto& t : spec.templates)
        templates.push_back({{"waveform", t.waveform}, {"peak_index", t.peak_index}});
    return nlohmann::json{
        {"templates", templates},
        {"firing_rate", spec.firing_rate},
        {"duration_samples", spec.duration_samples},
        {"noise_kind", spec.noise_kind == NoiseKind::gaussian ? "gaussian" : "t5_scaled"},
        {"seed", spec.seed},
        {"overlap_policy",
         spec.overlap_policy == OverlapPolicy::natural ? "natural" : "forbid_overlap"},
        {"sampling_rate_hz", spec.sampling_rate_hz}};
}

inline SimulationSpec spec_echo_from_json(const nlohmann::json& j) {
    SimulationSpec spec;
    for (const auto& t : j.at("templates")) {
        SpikeTemplate tpl;
        tpl.waveform = t.at("waveform").get<std::vector<double>>();
        tpl.peak_index = t.at("peak_index").get<std::size_t>();
        spec.templates.push_back(std::move(tpl));
    }
    spec.firing_rate = j.at("firing_rate").get<double>();
    spec.duration_samples = j.at("duration_samples").get<std::size_t>();
    const std::string noise = j.at("noise_kind").get<std::string>();
    if (noise == "gaussian")
        spec.noise_kind = NoiseKind::gaussian;
    else if (noise == "t5_scaled")
        spec.noise_kind = NoiseKind::t5_scaled;
    else
        throw FormatError("bundle sidecar: unknown noise_kind '" + noise + "'");
    spec.seed = j.at("seed").get<std::uint64_t>();
    const std::string policy = j.at("overlap_policy").get<std::string>();
    if (policy == "natural")
        spec.overlap_policy = OverlapPolicy::natural;
    else if (policy == "forbid_overlap")
        spec.overlap_policy = OverlapPolicy::forbid_overlap;
    else
        throw FormatError("bundle sidecar: unknown overlap_policy '" + policy + "'");
    spec.sampling_rate_hz = j.at("sampling_rate_hz").get<double>();
    return spec;
}

}  // namespace detail

inline void write_bundle(const std::string& base_path, const Recording& rec,
                         const std::optional<SimulationSpec>& spec = std::nullopt) {
    static_assert(sizeof(double) == 8);
    {
        std::ofstream raw(base_path + ".f64", std::ios::binary);
        if (!raw) throw FormatError("write_bundle: cannot open " + base_path + ".f64");
        // this toolchain is little-endian; the format stores bytes as-is
        raw.write(reinterpret_cast<const char*>(rec.trace.data()),
                  static_cast<std::streamsize>(rec.trace.size() * sizeof(double)));
        if (!raw) throw FormatError("write_bundle: short write to " + base_path + ".f64");
    }
    nlohmann::json side{{"sampling_rate_hz", rec.sampling_rate_hz},
                        {"sigma_true", rec.sigma_true}};
    nlohmann::json events = nlohmann::json::array();
    for (const auto& ev : rec.ground_truth) events.push_back({ev.sample, ev.neuron_id});
    side["ground_truth"] = events;
    if (spec) side["spec"] = detail::spec_echo_json(*spec);
    std::ofstream meta(base_path + ".json");
    if (!meta) throw FormatError("write_bundle: cannot open " + base_path + ".json");
    meta << side.dump(2) << "\n";
}

inline RecordingBundle read_bundle(const std::string& base_path) {
    RecordingBundle out;
    {
        std::ifstream raw(base_path + ".f64", std::ios::binary | std::ios::ate);
        if (!raw) throw FormatError("read_bundle: cannot open " + base_path + ".f64");
        const std::streamsize bytes = raw.tellg();
        if (bytes % 8 != 0)
            throw FormatError("read_bundle: trace file size is not a multiple of 8 bytes");
        out.recording.trace.resize(static_cast<std::size_t>(bytes) / 8);
        raw.seekg(0);
        raw.read(reinterpret_cast<char*>(out.recording.trace.data()), bytes);
        if (!raw) throw FormatError("read_bundle: short read from " + base_path + ".f64");
    }
    std::ifstream meta(base_path + ".json");
    if (!meta) throw FormatError("read_bundle: cannot open " + base_path + ".json");
    nlohmann::json side;
    try {
        meta >> side;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("read_bundle: invalid sidecar JSON: " + std::string(e.what()));
    }
    try {
        out.recording.sampling_rate_hz = side.at("sampling_rate_hz").get<double>();
    } catch (const nlohmann::json::exception&) {
        throw FormatError("read_bundle: sidecar field 'sampling_rate_hz' missing or invalid");
    }
    if (side.contains("sigma_true")) {
        if (!side["sigma_true"].is_number())
            throw FormatError("read_bundle: sidecar field 'sigma_true' must be a number");
        out.recording.sigma_true = side["sigma_true"].get<double>();
    }
    if (side.contains("ground_truth")) {
        if (!side["ground_truth"].is_array())
            throw FormatError("read_bundle: sidecar field 'ground_truth' must be an array");
        for (const auto& ev : side["ground_truth"]) {
            if (!ev.is_array() || ev.size() != 2 || !ev[0].is_number() || !ev[1].is_number())
                throw FormatError(
                    "read_bundle: sidecar field 'ground_truth' entries must be "
                    "[sample, neuron_id] pairs");
            out.recording.ground_truth.push_back(
                GroundTruthEvent{ev[0].get<std::size_t>(), ev[1].get<int>()});
        }
    }
    if (side.contains("spec")) {
        try {
            out.spec = detail::spec_echo_from_json(side["spec"]);
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("read_bundle: sidecar field 'spec' invalid: " +
                              std::string(e.what()));
        }
        // rebuild the noiseless signal ground truth so oracle extraction on a
        // loaded bundle matches the in-memory recording exactly
        out.recording.signal.assign(out.recording.trace.size(), 0.0);
        for (const auto& ev : out.recording.ground_truth) {
            if (ev.neuron_id < 0 ||
                ev.neuron_id >= static_cast<int>(out.spec->templates.size()))
                throw FormatError("read_bundle: ground_truth neuron_id outside the template bank");
            const auto& w = out.spec->templates[static_cast<std::size_t>(ev.neuron_id)].waveform;
            if (ev.sample + w.size() > out.recording.signal.size())
                throw FormatError("read_bundle: ground_truth event outside the trace");
            for (std::size_t j = 0; j < w.size(); ++j)
                out.recording.signal[ev.sample + j] += w[j];
        }
    }
    return out;
}

// ---- SpikeMatrix CSV: spikes n x d with header s1..s<d>; noise single column y ----

inline void write_spikes_csv(const std::string& path, const RealMatrix& spikes) {
    std::ofstream out(path);
    if (!out) throw FormatError("write_spikes_csv: cannot open " + path);
    out.precision(17);
    for (std::size_t j = 0; j < spikes.cols(); ++j) out << (j ? "," : "") << "s" << (j + 1);
    out << "\n";
    for (std::size_t i = 0; i < spikes.rows(); ++i) {
        for (std::size_t j = 0; j < spikes.cols(); ++j) out << (j ? "," : "") << spikes(i, j);
        out << "\n";
    }
}

inline void write_noise_csv(const std::string& path, std::span<const double> noise) {
    std::ofstream out(path);
    if (!out) throw FormatError("write_noise_csv: cannot open " + path);
    out.precision(17);
    out << "y\n";
    for (double v : noise) out << v << "\n";
}

namespace detail {

inline std::vector<std::vector<double>> read_csv_rows(const std::string& path,
                                                      std::string& header) {
    std::ifstream in(path);
    if (!in) throw FormatError("read_csv: cannot open " + path);
    if (!std::getline(in, header)) throw FormatError("read_csv: empty file " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw FormatError("read_csv: non-numeric cell '" + cell + "' in " + path);
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace detail

inline RealMatrix read_spikes_csv(const std::string& path) {
    std::string header;
    const auto rows = detail::read_csv_rows(path, header);
    if (header.rfind("s1", 0) != 0)
        throw FormatError("read_spikes_csv: expected header s1..s<d> in " + path);
    if (rows.empty()) throw FormatError("read_spikes_csv: no spike rows in " + path);
    const std::size_t d = rows[0].size();
    RealMatrix out(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != d)
            throw FormatError("read_spikes_csv: ragged row in " + path);
        for (std::size_t j = 0; j < d; ++j) out(i, j) = rows[i][j];
    }
    return out;
}

inline std::vector<double> read_noise_csv(const std::string& path) {
    std::string header;
    const auto rows = detail::read_csv_rows(path, header);
    if (header != "y") throw FormatError("read_noise_csv: expected header 'y' in " + path);
    std::vector<double> out;
    for (const auto& row : rows) {
        if (row.size() != 1)
            throw FormatError("read_noise_csv: expected a single column in " + path);
        out.push_back(row[0]);
    }
    if (out.empty()) throw FormatError("read_noise_csv: no noise rows in " + path);
    return out;
}

// SpikeMatrix from the CSV pair; sigma estimated from the noise column.
inline SpikeMatrix read_spike_matrix_csv(const std::string& spikes_path,
                                         const std::string& noise_path) {
    SpikeMatrix out;
    out.spikes = read_spikes_csv(spikes_path);
    out.noise = read_noise_csv(noise_path);
    if (out.noise.size() < 2)
        throw FormatError("read_spike_matrix_csv: noise sample too small to set the scale");
    out.sigma = sample_stddev(out.noise);
    out.validate();
    return out;
}

// ---- EstimateReport JSON ----

inline nlohmann::json report_to_json(const EstimateReport& report) {
    nlohmann::json j{{"p_used", report.p_used},
                     {"threshold", report.threshold},
                     {"eigenvalues", report.eigenvalues},
                     {"nu_hat", report.nu_hat},
                     {"condition_lhs", report.condition_lhs_value},
                     {"alpha", report.alpha}};
    j["omega_bound"] =
        report.omega_probability ? nlohmann::json(*report.omega_probability) : nullptr;
    j["omega_bound_raw"] = report.omega_raw ? nlohmann::json(*report.omega_raw) : nullptr;
    j["rms_bound"] =
        report.rms_error_bound ? nlohmann::json(*report.rms_error_bound) : nullptr;
    return j;
}

inline EstimateReport report_from_json(const nlohmann::json& j) {
    EstimateReport report;
    try {
        report.p_used = j.at("p_used").get<int>();
        report.threshold = j.at("threshold").get<double>();
        report.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
        report.nu_hat = j.at("nu_hat").get<int>();
        report.condition_lhs_value = j.at("condition_lhs").get<double>();
        report.alpha = j.at("alpha").get<std::vector<double>>();
        if (j.contains("omega_bound") && !j["omega_bound"].is_null())
            report.omega_probability = j["omega_bound"].get<double>();
        if (j.contains("omega_bound_raw") && !j["omega_bound_raw"].is_null())
            report.omega_raw = j["omega_bound_raw"].get<double>();
        if (j.contains("rms_bound") && !j["rms_bound"].is_null())
            report.rms_error_bound = j["rms_bound"].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("report_from_json: " + std::string(e.what()));
    }
    return report;
}

inline void write_report(const std::string& path, const EstimateReport& report) {
    std::ofstream out(path);
    if (!out) throw FormatError("write_report: cannot open " + path);
    out << report_to_json(report).dump(2) << "\n";
}

inline EstimateReport read_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("read_report: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("read_report: invalid JSON: " + std::string(e.what()));
    }
    return report_from_json(j);
}

}  // namespace neurocount
