#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "neurocount/errors.hpp"

namespace neurocount {

inline constexpr double kTwoPi = 2.0 * M_PI;

inline double reduce_mod_2pi(double x) {
    double r = std::fmod(x, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;  // guard fmod rounding at the seam
    return r;
}

// A probability density on the real line together with the truncation J used
// to evaluate its 2pi-wrapped version sum_{j=-J..J} f(mu + 2pi j). Densities
// with jump discontinuities list their (wrapped) breakpoints so that
// quadrature can split at them.
class WrappedDensity {
public:
    WrappedDensity(std::function<double(double)> eval, int wrap_terms,
                   std::vector<double> breakpoints = {})
        : eval_(std::move(eval)), wrap_terms_(wrap_terms) {
        if (!eval_) throw ConfigError("WrappedDensity: missing evaluation callback");
        if (wrap_terms_ < 0) throw ConfigError("WrappedDensity: wrap_terms must be >= 0");
        for (double b : breakpoints) breakpoints_.push_back(reduce_mod_2pi(b));
        std::sort(breakpoints_.begin(), breakpoints_.end());
        breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()),
                           breakpoints_.end());
    }

    double operator()(double x) const { return eval_(x); }

    double wrapped(double mu) const {
        double s = 0.0;
        for (int j = -wrap_terms_; j <= wrap_terms_; ++j) s += eval_(mu + kTwoPi * j);
        return s;
    }

    int wrap_terms() const { return wrap_terms_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }

private:
    std::function<double(double)> eval_;
    int wrap_terms_;
    std::vector<double> breakpoints_;
};

// Uniform density on [a, b). The wrap truncation covers the support exactly.
inline WrappedDensity uniform_density(double a, double b) {
    if (!(b > a)) throw ConfigError("uniform_density: requires b > a");
    const double inv = 1.0 / (b - a);
    const int terms = static_cast<int>(std::ceil((std::abs(a) + std::abs(b)) / kTwoPi)) + 1;
    return WrappedDensity(
        [a, b, inv](double x) { return (x >= a && x < b) ? inv : 0.0; }, terms, {a, b});
}

// Normal density; wrapping it onto [0, 2pi) gives the wrapped normal. The
// truncation leaves tail mass below 1e-12 (a 10-sigma reach past the mean,
// with the spec's floor of 8 terms).
inline WrappedDensity wrapped_normal_density(double mean, double stddev) {
    if (!(stddev > 0.0)) throw ConfigError("wrapped_normal_density: requires stddev > 0");
    const double norm = 1.0 / (stddev * std::sqrt(kTwoPi));
    const double inv2s2 = 1.0 / (2.0 * stddev * stddev);
    const int terms = std::max(
        8, static_cast<int>(std::ceil((std::abs(mean) + 10.0 * stddev) / kTwoPi)) + 1);
    return WrappedDensity(
        [mean, norm, inv2s2](double x) {
            const double d = x - mean;
            return norm * std::exp(-d * d * inv2s2);
        },
        terms);
}

// Gaussian kernel density over an empirical sample (used to cross-check the
// simulator's induced overlap distribution against the moment model).
inline WrappedDensity kde_density(std::span<const double> samples, double bandwidth) {
    if (samples.empty()) throw ConfigError("kde_density: empty sample");
    if (!(bandwidth > 0.0)) throw ConfigError("kde_density: requires bandwidth > 0");
    std::vector<double> pts(samples.begin(), samples.end());
    double reach = 0.0;
    for (double s : pts) reach = std::max(reach, std::abs(s));
    const int terms =
        std::max(8, static_cast<int>(std::ceil((reach + 10.0 * bandwidth) / kTwoPi)) + 1);
    const double norm = 1.0 / (static_cast<double>(pts.size()) * bandwidth * std::sqrt(kTwoPi));
    return WrappedDensity(
        [pts = std::move(pts), bandwidth, norm](double x) {
            double acc = 0.0;
            for (double s : pts) {
                const double u = (x - s) / bandwidth;
                acc += std::exp(-0.5 * u * u);
            }
            return acc * norm;
        },
        terms);
}

// Extrema of the wrapped density over [0, 2pi): dense grid scan followed by
// golden-section refinement around the best cells (tolerance 1e-10 in mu).
struct WrapExtrema {
    double min_value = 0.0;
    double max_value = 0.0;
};

namespace detail {

inline double golden_refine(const WrappedDensity& w, double lo, double hi, bool maximize) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = w.wrapped(c), fd = w.wrapped(d);
    double best = maximize ? std::max(fc, fd) : std::min(fc, fd);
    while (b - a > 1e-10) {
        const bool pick_c = maximize ? (fc > fd) : (fc < fd);
        if (pick_c) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = w.wrapped(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = w.wrapped(d);
        }
        best = maximize ? std::max(best, std::max(fc, fd)) : std::min(best, std::min(fc, fd));
    }
    return best;
}

}  // namespace detail

inline WrapExtrema wrapped_extrema(const WrappedDensity& w) {
    constexpr std::size_t kGrid = 8192;
    const double h = kTwoPi / kGrid;
    double min_v = std::numeric_limits<double>::infinity();
    double max_v = -min_v;
    std::size_t min_i = 0, max_i = 0;
    for (std::size_t i = 0; i < kGrid; ++i) {
        const double v = w.wrapped(i * h);
        if (v < min_v) {
            min_v = v;
            min_i = i;
        }
        if (v > max_v) {
            max_v = v;
            max_i = i;
        }
    }
    // wrapped() is 2pi-periodic, so refining past the seam is harmless.
    const double max_ref =
        detail::golden_refine(w, (max_i - 1.0) * h, (max_i + 1.0) * h, /*maximize=*/true);
    const double min_ref =
        detail::golden_refine(w, (min_i - 1.0) * h, (min_i + 1.0) * h, /*maximize=*/false);
    return WrapExtrema{std::min(min_v, min_ref), std::max(max_v, max_ref)};
}

}  // namespace neurocount
