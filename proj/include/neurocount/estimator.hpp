#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neurocount/errors.hpp"
#include "neurocount/hermitian.hpp"
#include "neurocount/spikes.hpp"

namespace neurocount {

enum class ConditionVariant {
    literal_p,  // empirical characteristic function at lag p in every summand
    per_j,      // lag j inside the sum (the form the RMS error bound uses)
};

struct EstimatorConfig {
    double gamma = 1.0;         // threshold gamma_threshold for counting eigenvalues
    double sigma_target = 0.1;  // noise scale after rescaling
    double epsilon = 0.05;
    double condition_rhs = 1.0 / 3.0;
    int p_cap = 64;
    double zero_pad_fraction = 0.01;  // zeros mixed into the PCA, as a fraction of n
    ConditionVariant condition_variant = ConditionVariant::literal_p;

    void validate() const {
        if (!(gamma > 0.0)) throw ConfigError("EstimatorConfig: gamma must be positive");
        if (!(sigma_target > 0.0))
            throw ConfigError("EstimatorConfig: sigma_target must be positive");
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw ConfigError("EstimatorConfig: epsilon must lie in (0, 1)");
        if (!(condition_rhs > 0.0))
            throw ConfigError("EstimatorConfig: condition_rhs must be positive");
        if (p_cap < 1) throw ConfigError("EstimatorConfig: p_cap must be >= 1");
        if (zero_pad_fraction < 0.0)
            throw ConfigError("EstimatorConfig: zero_pad_fraction must be >= 0");
    }
};

struct OmegaBound {
    double probability = 0.0;  // clamped to [0, 1]
    double raw = 0.0;          // unclamped sum
};

struct EstimateReport {
    int p_used = 0;
    double threshold = 0.0;  // gamma_threshold used by the counting rule
    std::vector<double> eigenvalues;
    int nu_hat = 0;
    double condition_lhs_value = 0.0;
    std::vector<double> alpha;
    std::optional<double> omega_probability;
    std::optional<double> omega_raw;
    std::optional<double> rms_error_bound;
};

// The counting rule: eigenvalues strictly above the threshold.
inline int count_above(std::span<const double> eigenvalues_desc_order, double threshold) {
    int count = 0;
    for (double v : eigenvalues_desc_order)
        if (v > threshold) ++count;
    return count;
}

// Re-apply the counting rule to a stored report; nothing is recomputed.
inline EstimateReport rethreshold(EstimateReport report, double threshold) {
    if (!(threshold > 0.0)) throw ConfigError("rethreshold: threshold must be positive");
    report.threshold = threshold;
    report.nu_hat = count_above(report.eigenvalues, threshold);
    return report;
}

// Empirical characteristic function averages (1/m) sum e^{-i t x} for
// t = 0..max_lag. All deconvolution surfaces share this path, so conjugate
// lags are exact conjugates.
inline std::vector<Complex> ecf_lags(std::span<const double> xs, int max_lag) {
    if (xs.empty()) throw ConfigError("ecf_lags: empty sample");
    std::vector<Complex> acc(static_cast<std::size_t>(max_lag) + 1, Complex{0.0, 0.0});
    for (double x : xs) {
        const Complex step = std::polar(1.0, -x);
        Complex cur{1.0, 0.0};
        for (int t = 0; t <= max_lag; ++t) {
            acc[static_cast<std::size_t>(t)] += cur;
            cur *= step;
        }
    }
    const double inv = 1.0 / static_cast<double>(xs.size());
    for (auto& v : acc) v *= inv;
    acc[0] = Complex{1.0, 0.0};
    return acc;
}

// Multiply every voltage by sigma_target / sigma so the noise scale is pinned.
inline SpikeMatrix rescale(const SpikeMatrix& data, const EstimatorConfig& cfg) {
    cfg.validate();
    data.validate();
    const double factor = cfg.sigma_target / data.sigma;
    SpikeMatrix out = data;
    for (auto& v : out.spikes.data()) v *= factor;
    for (auto& v : out.noise_windows.data()) v *= factor;
    for (auto& v : out.noise) v *= factor;
    out.sigma = cfg.sigma_target;
    return out;
}

// First principal component of the spikes augmented with round(0.01 n) zero
// vectors (floor of one), sign fixed so the mean spike projection is
// nonnegative. The zeros keep the direction well defined when all spikes come
// from one neuron in symmetric noise.
inline std::vector<double> principal_direction(const SpikeMatrix& data,
                                               const EstimatorConfig& cfg) {
    const std::size_t n = data.n();
    const std::size_t d = data.d();
    if (n < 2) throw ConfigError("principal_direction: needs at least two spikes");
    const std::size_t zeros = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(cfg.zero_pad_fraction * static_cast<double>(n))));
    const double total = static_cast<double>(n + zeros);

    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += data.spikes(i, j);
    for (auto& v : mean) v /= total;  // the zero vectors pull the mean toward 0

    // covariance of the augmented set
    std::vector<double> cov(d * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double xj = data.spikes(i, j) - mean[j];
            for (std::size_t k = 0; k <= j; ++k)
                cov[j * d + k] += xj * (data.spikes(i, k) - mean[k]);
        }
    }
    for (std::size_t z = 0; z < zeros; ++z)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = 0; k <= j; ++k) cov[j * d + k] += mean[j] * mean[k];
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = 0; k <= j; ++k) {
            cov[j * d + k] /= total;
            cov[k * d + j] = cov[j * d + k];
        }

    double cov_norm = 0.0;
    for (double v : cov) cov_norm += v * v;
    if (std::sqrt(cov_norm) < 1e-300)
        throw ConfigError("principal_direction: degenerate covariance (all points identical)");

    std::vector<double> vectors;
    const std::vector<double> values = detail::jacobi_symmetric(cov, d, &vectors);
    std::size_t best = 0;
    for (std::size_t i = 1; i < d; ++i)
        if (values[i] > values[best]) best = i;

    std::vector<double> alpha(d);
    double norm = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        alpha[j] = vectors[j * d + best];
        norm += alpha[j] * alpha[j];
    }
    norm = std::sqrt(norm);
    for (auto& v : alpha) v /= norm;

    double mean_projection = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < d; ++j) dot += alpha[j] * data.spikes(i, j);
        mean_projection += dot;
    }
    if (mean_projection < 0.0)
        for (auto& v : alpha) v = -v;
    return alpha;
}

// Row-wise projections onto a unit vector.
inline std::vector<double> project(const RealMatrix& rows, std::span<const double> alpha) {
    if (rows.cols() != alpha.size()) throw ConfigError("project: dimension mismatch");
    std::vector<double> out(rows.rows(), 0.0);
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < alpha.size(); ++j) dot += rows(i, j) * alpha[j];
        out[i] = dot;
    }
    return out;
}

// Deconvolved sample moment matrix: Toeplitz with lag-t entry
// (mean of e^{-i t X}) / (mean of e^{-i t Y}); the zero lag is pinned to 1.
inline HermitianMatrix m_hat(std::span<const double> x, std::span<const double> y, int p) {
    if (p < 1) throw ConfigError("m_hat: order p must be >= 1");
    const auto num = ecf_lags(x, p);
    const auto den = ecf_lags(y, p);
    std::vector<Complex> lags(static_cast<std::size_t>(p) + 1);
    lags[0] = Complex{1.0, 0.0};
    for (int t = 1; t <= p; ++t) {
        if (std::abs(den[static_cast<std::size_t>(t)]) <= 1e-12)
            throw DeconvolutionError(
                "m_hat: noise characteristic function vanishes at lag " + std::to_string(t), t);
        lags[static_cast<std::size_t>(t)] =
            num[static_cast<std::size_t>(t)] / den[static_cast<std::size_t>(t)];
    }
    return hermitian_toeplitz(lags);
}

// Left-hand side of the order-selection condition: the plug-in estimate of
// the RMS eigenvalue error bound with (1-eps)/eps in place of 0.95/0.05.
inline double condition_lhs(std::span<const double> y, std::size_t n, int p,
                            const EstimatorConfig& cfg) {
    cfg.validate();
    if (p < 1) throw ConfigError("condition_lhs: order p must be >= 1");
    if (n == 0) throw ConfigError("condition_lhs: n must be positive");
    const auto cf = ecf_lags(y, p);
    const double one_minus = 1.0 - cfg.epsilon;

    double sum = 0.0;
    for (int j = 1; j <= p; ++j) {
        const int lag = cfg.condition_variant == ConditionVariant::literal_p ? p : j;
        const double mod = std::abs(cf[static_cast<std::size_t>(lag)]);
        if (mod <= 1e-12)
            throw DeconvolutionError(
                "condition_lhs: noise characteristic function vanishes at lag " +
                    std::to_string(lag),
                lag);
        sum += (p - j + 1.0) / ((p + 1.0) * mod * mod);
    }
    const double term1 = 2.0 / (one_minus * one_minus * static_cast<double>(n)) * sum;
    const double term2 =
        cfg.epsilon * cfg.epsilon * static_cast<double>(p) / (one_minus * one_minus);
    return std::sqrt(term1 + term2);
}

// Largest admissible matrix order: linear scan over 1..p_cap keeping the
// largest p whose condition value stays at or below the right-hand side (the
// value is not guaranteed monotone for arbitrary noise samples). Lags where
// the empirical characteristic function vanishes are treated as inadmissible.
inline int select_p_max(std::span<const double> y, std::size_t n, const EstimatorConfig& cfg) {
    cfg.validate();
    int best = 0;
    for (int p = 1; p <= cfg.p_cap; ++p) {
        double lhs;
        try {
            lhs = condition_lhs(y, n, p, cfg);
        } catch (const DeconvolutionError&) {
            continue;
        }
        if (lhs <= cfg.condition_rhs) best = p;
    }
    if (best == 0)
        throw NoAdmissiblePError(
            "select_p_max: no order p satisfies the selection condition up to the cap; "
            "a larger noise sample or a different scaling is needed");
    return best;
}

// Union probability bound on any empirical noise characteristic-function lag
// deviating by more than epsilon, with the asymptotic-order constants taken
// as 1; moduli are |psi| at lags 1..p.
inline OmegaBound omega_bound(std::span<const double> cf_moduli, std::size_t m, double epsilon) {
    if (m < 2) throw ConfigError("omega_bound: m must be >= 2");
    if (!(epsilon > 0.0)) throw ConfigError("omega_bound: epsilon must be positive");
    const double md = static_cast<double>(m);
    double raw = 0.0;
    for (std::size_t j = 0; j < cf_moduli.size(); ++j) {
        const double mod = cf_moduli[j];
        if (!(mod > 0.0))
            throw DeconvolutionError("omega_bound: zero characteristic-function modulus at lag " +
                                         std::to_string(j + 1),
                                     static_cast<int>(j + 1));
        const double em = epsilon * mod;
        const double quartic = 6.0 / (md * md * em * em * em * em);
        const double sextic = 42.0 / (md * md * md * em * em * em * em * em * em);
        raw += std::min(quartic, sextic);
    }
    return OmegaBound{std::clamp(raw, 0.0, 1.0), raw};
}

// Right-hand side of the conditional RMS eigenvalue-error bound; moduli are
// |psi_Z(sigma j)| at lags 1..p.
inline double rms_bound(std::span<const double> psi_moduli, std::size_t n, double epsilon,
                        int p) {
    if (p < 1) throw ConfigError("rms_bound: order p must be >= 1");
    if (psi_moduli.size() < static_cast<std::size_t>(p))
        throw ConfigError("rms_bound: needs a modulus for every lag 1..p");
    if (n == 0) throw ConfigError("rms_bound: n must be positive");
    const double one_minus = 1.0 - epsilon;
    double sum = 0.0;
    for (int j = 1; j <= p; ++j) {
        const double mod = psi_moduli[static_cast<std::size_t>(j - 1)];
        if (!(mod > 0.0))
            throw DeconvolutionError("rms_bound: zero characteristic-function modulus at lag " +
                                         std::to_string(j),
                                     j);
        sum += (p - j + 1.0) / ((p + 1.0) * mod * mod);
    }
    const double term1 = 2.0 / (static_cast<double>(n) * one_minus * one_minus) * sum;
    const double term2 = static_cast<double>(p) * epsilon * epsilon / (one_minus * one_minus);
    return std::sqrt(term1 + term2);
}

namespace detail {

template <typename F>
auto run_stage(const char* stage, F&& f) {
    try {
        return f();
    } catch (const DeconvolutionError& e) {
        throw DeconvolutionError(std::string(stage) + ": " + e.what(), e.lag());
    } catch (const NoAdmissiblePError& e) {
        throw NoAdmissiblePError(std::string(stage) + ": " + e.what());
    } catch (const SolverError& e) {
        throw SolverError(std::string(stage) + ": " + e.what(), e.residual());
    } catch (const Error& e) {
        throw Error(std::string(stage) + ": " + e.what());
    }
}

}  // namespace detail

// The whole empirical pipeline: rescale, principal direction, projection,
// order selection, deconvolved moment matrix, eigenvalues, counting rule.
inline EstimateReport estimate_nu(const SpikeMatrix& data, const EstimatorConfig& cfg) {
    cfg.validate();
    data.validate();

    const SpikeMatrix scaled =
        detail::run_stage("rescale", [&] { return rescale(data, cfg); });
    const std::vector<double> alpha = detail::run_stage(
        "principal_direction", [&] { return principal_direction(scaled, cfg); });
    const std::vector<double> x =
        detail::run_stage("project", [&] { return project(scaled.spikes, alpha); });
    const std::vector<double> y = detail::run_stage("project", [&] {
        return scaled.noise_windows.empty() ? scaled.noise
                                            : project(scaled.noise_windows, alpha);
    });

    const int p =
        detail::run_stage("select_p_max", [&] { return select_p_max(y, x.size(), cfg); });
    const HermitianMatrix moments =
        detail::run_stage("m_hat", [&] { return m_hat(x, y, p); });
    const std::vector<double> eigs =
        detail::run_stage("eigenvalues", [&] { return eigenvalues_desc(moments); });

    EstimateReport report;
    report.p_used = p;
    report.threshold = cfg.gamma;
    report.eigenvalues = eigs;
    report.nu_hat = count_above(eigs, report.threshold);
    report.alpha = alpha;
    report.condition_lhs_value =
        detail::run_stage("condition_lhs", [&] { return condition_lhs(y, x.size(), p, cfg); });

    const auto cf = ecf_lags(y, p);
    std::vector<double> moduli(static_cast<std::size_t>(p));
    for (int j = 1; j <= p; ++j)
        moduli[static_cast<std::size_t>(j - 1)] = std::abs(cf[static_cast<std::size_t>(j)]);
    const OmegaBound omega = omega_bound(moduli, y.size(), cfg.epsilon);
    report.omega_probability = omega.probability;
    report.omega_raw = omega.raw;
    report.rms_error_bound = rms_bound(moduli, x.size(), cfg.epsilon, p);
    return report;
}

}  // namespace neurocount
