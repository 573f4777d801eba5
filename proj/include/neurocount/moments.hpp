#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "neurocount/density.hpp"
#include "neurocount/errors.hpp"
#include "neurocount/hermitian.hpp"
#include "neurocount/mixture.hpp"

namespace neurocount {

// Moment matrix of the discrete component: sum_i pi_i T_p(mu_i). Toeplitz,
// with lag-t coefficient sum_i pi_i e^{-i t mu_i}.
inline HermitianMatrix m_p_disc(const MixtureSpec& spec, int p) {
    if (p < 1) throw ConfigError("m_p_disc: order p must be >= 1");
    std::vector<Complex> lags(static_cast<std::size_t>(p) + 1, Complex{0.0, 0.0});
    for (const auto& atom : spec.atoms()) {
        const Complex step = std::polar(1.0, -atom.location);
        Complex cur{1.0, 0.0};
        for (int t = 0; t <= p; ++t) {
            lags[static_cast<std::size_t>(t)] += atom.weight * cur;
            cur *= step;
        }
    }
    lags[0] = Complex{lags[0].real(), 0.0};
    return hermitian_toeplitz(lags);
}

namespace detail {

// Composite Simpson for the lag integrals int_a^b e^{-i t mu} wrapped(mu) dmu,
// t = 0..p, on a shared grid of `panels` panels (panels even). The density is
// sampled a hair inside the endpoints so pieces that abut a jump use the
// one-sided value belonging to this piece.
inline std::vector<Complex> simpson_lags(const WrappedDensity& w, double a, double b, int p,
                                         std::size_t panels) {
    const double h = (b - a) / static_cast<double>(panels);
    const double nudge = 1e-9 * h;
    std::vector<Complex> acc(static_cast<std::size_t>(p) + 1, Complex{0.0, 0.0});
    for (std::size_t k = 0; k <= panels; ++k) {
        const double mu = a + h * static_cast<double>(k);
        double weight = (k == 0 || k == panels) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        const double sample_at = (k == 0) ? mu + nudge : (k == panels ? mu - nudge : mu);
        const double f = w.wrapped(sample_at) * weight;
        const Complex step = std::polar(1.0, -mu);
        Complex cur{1.0, 0.0};
        for (int t = 0; t <= p; ++t) {
            acc[static_cast<std::size_t>(t)] += f * cur;
            cur *= step;
        }
    }
    const double scale = h / 3.0;
    for (auto& v : acc) v *= scale;
    return acc;
}

// Integration pieces over one period, split at the density's breakpoints so
// each piece is smooth.
inline std::vector<std::pair<double, double>> quadrature_pieces(const WrappedDensity& w) {
    const auto& bp = w.breakpoints();
    if (bp.empty()) return {{0.0, kTwoPi}};
    std::vector<std::pair<double, double>> pieces;
    for (std::size_t i = 0; i < bp.size(); ++i) {
        const double lo = bp[i];
        const double hi = (i + 1 < bp.size()) ? bp[i + 1] : bp[0] + kTwoPi;
        if (hi - lo > 1e-14) pieces.emplace_back(lo, hi);
    }
    return pieces;
}

}  // namespace detail

// Moment matrix of the continuous component: entry (j,k) is the Fourier
// coefficient int_0^{2pi} e^{i(k-j)mu} wrapped(mu) dmu. Composite Simpson per
// smooth piece, grid-doubling until the entrywise change drops below 1e-10.
inline HermitianMatrix m_p_cont(const WrappedDensity& density, int p) {
    if (p < 1) throw ConfigError("m_p_cont: order p must be >= 1");

    const auto pieces = detail::quadrature_pieces(density);
    std::size_t panels = std::max<std::size_t>(64, 4096 / pieces.size());
    if (panels % 2 == 1) ++panels;

    auto evaluate = [&](std::size_t n) {
        std::vector<Complex> total(static_cast<std::size_t>(p) + 1, Complex{0.0, 0.0});
        for (const auto& [a, b] : pieces) {
            const auto part = detail::simpson_lags(density, a, b, p, n);
            for (std::size_t t = 0; t < total.size(); ++t) total[t] += part[t];
        }
        return total;
    };

    std::vector<Complex> lags = evaluate(panels);
    double change = std::numeric_limits<double>::infinity();
    constexpr std::size_t kMaxPanels = 1u << 21;
    while (panels < kMaxPanels) {
        panels *= 2;
        std::vector<Complex> refined = evaluate(panels);
        change = 0.0;
        for (std::size_t t = 0; t < lags.size(); ++t)
            change = std::max(change, std::abs(refined[t] - lags[t]));
        lags = std::move(refined);
        if (change < 1e-10) break;
    }
    if (!(change < 1e-10))
        throw QuadratureError("m_p_cont: quadrature did not converge, last change " +
                                  std::to_string(change),
                              change);

    lags[0] = Complex{lags[0].real(), 0.0};
    return hermitian_toeplitz(lags);
}

// M_p = M_{p,disc} + pi_cont * M_{p,cont}; trace (p+1) by construction.
inline HermitianMatrix m_p(const MixtureSpec& spec, int p) {
    HermitianMatrix disc = m_p_disc(spec, p);
    if (spec.pi_cont() == 0.0) return disc;
    const HermitianMatrix cont = m_p_cont(spec.contamination()->realize(), p);
    disc.add_scaled(cont, spec.pi_cont());
    return disc;
}

// The nu x nu matrix sharing the nonzero spectrum of M_{p,disc}: diagonal
// (p+1) pi_i, off-diagonal (j,k) = sqrt(pi_j pi_k) times the geometric sum
// (1 - e^{i(p+1)(mu_k-mu_j)}) / (1 - e^{i(mu_k-mu_j)}).
inline HermitianMatrix b_matrix(const MixtureSpec& spec, int p) {
    if (p < 1) throw ConfigError("b_matrix: order p must be >= 1");
    const auto& atoms = spec.atoms();
    const std::size_t nu = atoms.size();
    HermitianMatrix b(nu);
    for (std::size_t j = 0; j < nu; ++j) {
        b.set(j, j, Complex{(p + 1.0) * atoms[j].weight, 0.0});
        for (std::size_t k = 0; k < j; ++k) {
            const double delta = atoms[k].location - atoms[j].location;
            const Complex denom = 1.0 - std::polar(1.0, delta);
            if (std::abs(denom) < 1e-12)
                throw ConfigError("b_matrix: atom locations coincide mod 2pi");
            const Complex numer = 1.0 - std::polar(1.0, (p + 1.0) * delta);
            b.set(j, k, std::sqrt(atoms[j].weight * atoms[k].weight) * numer / denom);
        }
    }
    return b;
}

// Per-index eigenvalue intervals for M_p.
struct EigenBounds {
    std::vector<double> lower;  // size p+1, index i-1 bounds lambda_i
    std::vector<double> upper;
    double perturbation = 0.0;  // the sqrt(2 sum ...) cross-atom term
    double min_wrap = 0.0;      // extrema of the wrapped contamination density
    double max_wrap = 0.0;
};

namespace detail {

inline EigenBounds eigen_bounds_with(const MixtureSpec& spec, int p, double min_wrap,
                                     double max_wrap) {
    const auto& atoms = spec.atoms();
    const int nu = spec.nu();
    if (p < nu) throw ConfigError("eigen_bounds: requires p >= nu");

    double sum = 0.0;
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        for (std::size_t k = j + 1; k < atoms.size(); ++k) {
            const double delta = atoms[j].location - atoms[k].location;
            const double s = std::sin(delta / 2.0);
            if (std::abs(s) < 1e-12) throw ConfigError("eigen_bounds: coincident atoms");
            const double ratio = std::sin((p + 1.0) * delta / 2.0) / s;
            sum += atoms[j].weight * atoms[k].weight * ratio * ratio;
        }
    }
    const double r = std::sqrt(2.0 * sum);

    const double cont_lo = kTwoPi * spec.pi_cont() * min_wrap;
    const double cont_hi = kTwoPi * spec.pi_cont() * max_wrap;

    EigenBounds out;
    out.perturbation = r;
    out.min_wrap = min_wrap;
    out.max_wrap = max_wrap;
    out.lower.resize(static_cast<std::size_t>(p) + 1);
    out.upper.resize(static_cast<std::size_t>(p) + 1);
    for (int i = 0; i <= p; ++i) {
        if (i < nu) {
            const double center = (p + 1.0) * atoms[static_cast<std::size_t>(i)].weight;
            out.lower[static_cast<std::size_t>(i)] = center + cont_lo - r;
            out.upper[static_cast<std::size_t>(i)] = center + cont_hi + r;
        } else {
            out.lower[static_cast<std::size_t>(i)] = cont_lo;
            out.upper[static_cast<std::size_t>(i)] = cont_hi;
        }
    }
    return out;
}

}  // namespace detail

inline EigenBounds eigen_bounds(const MixtureSpec& spec, int p) {
    double min_wrap = 0.0, max_wrap = 0.0;
    if (spec.pi_cont() > 0.0) {
        const WrapExtrema ex = wrapped_extrema(spec.contamination()->realize());
        min_wrap = ex.min_value;
        max_wrap = ex.max_value;
    }
    return detail::eigen_bounds_with(spec, p, min_wrap, max_wrap);
}

// Smallest p <= p_cap whose bounds certify the spectral gap at gamma sqrt(p+1):
// lower bound of lambda_nu strictly above it, upper bound of lambda_{nu+1}
// strictly below. Empty result when no p up to the cap qualifies (the bounds
// are sufficient, not necessary).
inline std::optional<int> p_gamma(const MixtureSpec& spec, double gamma, int p_cap) {
    if (!(gamma > 0.0)) throw ConfigError("p_gamma: gamma must be positive");
    const int nu = spec.nu();
    if (p_cap < nu) throw ConfigError("p_gamma: cap must be >= nu");

    double min_wrap = 0.0, max_wrap = 0.0;
    if (spec.pi_cont() > 0.0) {
        const WrapExtrema ex = wrapped_extrema(spec.contamination()->realize());
        min_wrap = ex.min_value;
        max_wrap = ex.max_value;
    }
    for (int p = std::max(nu, 1); p <= p_cap; ++p) {
        const EigenBounds b = detail::eigen_bounds_with(spec, p, min_wrap, max_wrap);
        const double cut = gamma * std::sqrt(p + 1.0);
        if (b.lower[static_cast<std::size_t>(nu - 1)] > cut &&
            b.upper[static_cast<std::size_t>(nu)] < cut)
            return p;
    }
    return std::nullopt;
}

}  // namespace neurocount
