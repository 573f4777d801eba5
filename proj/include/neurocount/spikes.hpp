#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "neurocount/errors.hpp"

namespace neurocount {

// Dense row-major real matrix; rows are aligned voltage windows.
class RealMatrix {
public:
    RealMatrix() = default;
    RealMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(data_.data() + r * cols_, cols_);
    }
    std::span<double> row(std::size_t r) {
        return std::span<double>(data_.data() + r * cols_, cols_);
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    RealMatrix take_rows(std::size_t count) const {
        if (count > rows_) throw ConfigError("RealMatrix::take_rows: not enough rows");
        RealMatrix out(count, cols_);
        std::copy(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(count * cols_),
                  out.data_.begin());
        return out;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Extracted spikes plus the pure-noise sample from the silent region.
//
// The noise sample exists in one of two forms: d-wide silent windows (the
// extractors produce these; the estimator projects them onto the same alpha
// it uses for the spikes) or pre-projected scalars (the single-column CSV
// interface). Exactly one of the two is populated.
struct SpikeMatrix {
    RealMatrix spikes;          // n x d
    RealMatrix noise_windows;   // m x d, or empty
    std::vector<double> noise;  // m scalars, or empty
    double sigma = 0.0;         // noise standard deviation on the current scale

    std::size_t n() const { return spikes.rows(); }
    std::size_t d() const { return spikes.cols(); }
    std::size_t m() const { return noise_windows.empty() ? noise.size() : noise_windows.rows(); }

    void validate() const {
        if (spikes.rows() == 0 || spikes.cols() == 0)
            throw ConfigError("SpikeMatrix: needs at least one spike of positive length");
        if (noise_windows.empty() == noise.empty())
            throw ConfigError("SpikeMatrix: exactly one noise representation must be present");
        if (!noise_windows.empty() && noise_windows.cols() != spikes.cols())
            throw ConfigError("SpikeMatrix: noise window length differs from spike length");
        if (m() == 0) throw ConfigError("SpikeMatrix: needs at least one noise observation");
        if (!(sigma > 0.0)) throw ConfigError("SpikeMatrix: sigma must be positive");
        for (double v : spikes.data())
            if (!std::isfinite(v)) throw ConfigError("SpikeMatrix: non-finite spike value");
        for (double v : noise_windows.data())
            if (!std::isfinite(v)) throw ConfigError("SpikeMatrix: non-finite noise value");
        for (double v : noise)
            if (!std::isfinite(v)) throw ConfigError("SpikeMatrix: non-finite noise value");
    }

    // First `count` spikes with the noise sample unchanged.
    SpikeMatrix take_spikes(std::size_t count) const {
        SpikeMatrix out = *this;
        out.spikes = spikes.take_rows(count);
        return out;
    }
};

inline double sample_mean(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double sample_stddev(std::span<const double> xs) {
    if (xs.size() < 2) throw ConfigError("sample_stddev: needs at least two values");
    const double mean = sample_mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace neurocount
