#pragma once

// Test-only reference implementations. These deliberately avoid the library's
// cyclic-Jacobi path: small spectra come from characteristic polynomials, and
// larger ones from Householder tridiagonalization plus Sturm bisection.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "neurocount/hermitian.hpp"
#include "neurocount/rng.hpp"

namespace oracles {

using neurocount::Complex;
using neurocount::HermitianMatrix;

using CMatrix = std::vector<Complex>;  // row-major dense, n x n

inline CMatrix to_dense(const HermitianMatrix& h) {
    const std::size_t n = h.dim();
    CMatrix a(n * n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) a[r * n + c] = h(r, c);
    return a;
}

inline HermitianMatrix to_hermitian(const CMatrix& a, std::size_t n) {
    HermitianMatrix h(n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c <= r; ++c)
            h.set(r, c, r == c ? Complex{a[r * n + c].real(), 0.0} : a[r * n + c]);
    return h;
}

// Roots of lambda^3 - c2 lambda^2 + c1 lambda - c0 with all-real roots,
// by the trigonometric method on the depressed cubic.
inline std::vector<double> real_cubic_roots(double c2, double c1, double c0) {
    const double a = -c2, b = c1, c = -c0;  // monic lambda^3 + a l^2 + b l + c
    const double p = b - a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    std::vector<double> roots;
    if (p > -1e-14) {
        // near-triple root
        const double t = std::cbrt(-q);
        roots = {t, t, t};
    } else {
        const double m = 2.0 * std::sqrt(-p / 3.0);
        double arg = 3.0 * q / (p * m);
        arg = std::clamp(arg, -1.0, 1.0);
        const double theta = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k)
            roots.push_back(m * std::cos(theta - 2.0 * M_PI * k / 3.0));
    }
    for (auto& r : roots) r -= a / 3.0;
    std::sort(roots.begin(), roots.end(), std::greater<double>());
    return roots;
}

// Characteristic-polynomial eigenvalues for Hermitian dim <= 3, descending.
inline std::vector<double> charpoly_eigenvalues(const HermitianMatrix& h) {
    const std::size_t n = h.dim();
    if (n == 1) return {h(0, 0).real()};
    if (n == 2) {
        const double tr = h.trace();
        const double det = (h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0)).real();
        const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
        return {tr / 2.0 + disc, tr / 2.0 - disc};
    }
    if (n == 3) {
        const double c2 = h.trace();
        double c1 = 0.0;  // sum of principal 2x2 minors
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = i + 1; j < 3; ++j)
                c1 += (h(i, i) * h(j, j) - h(i, j) * h(j, i)).real();
        const Complex det = h(0, 0) * (h(1, 1) * h(2, 2) - h(1, 2) * h(2, 1)) -
                            h(0, 1) * (h(1, 0) * h(2, 2) - h(1, 2) * h(2, 0)) +
                            h(0, 2) * (h(1, 0) * h(2, 1) - h(1, 1) * h(2, 0));
        return real_cubic_roots(c2, c1, det.real());
    }
    throw std::invalid_argument("charpoly_eigenvalues: dim must be <= 3");
}

// Householder tridiagonalization of a dense real symmetric matrix (explicit
// similarity transforms; fine at oracle sizes).
inline void tridiagonalize(std::vector<double> a, std::size_t n, std::vector<double>& diag,
                           std::vector<double>& off) {
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double norm = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) norm += a[i * n + k] * a[i * n + k];
        norm = std::sqrt(norm);
        if (norm < 1e-300) continue;
        const double x0 = a[(k + 1) * n + k];
        const double alpha = (x0 >= 0.0) ? -norm : norm;
        std::vector<double> v(n, 0.0);
        v[k + 1] = x0 - alpha;
        for (std::size_t i = k + 2; i < n; ++i) v[i] = a[i * n + k];
        double vnorm = 0.0;
        for (double t : v) vnorm += t * t;
        vnorm = std::sqrt(vnorm);
        if (vnorm < 1e-300) continue;
        for (auto& t : v) t /= vnorm;

        // a <- (I - 2vv') a (I - 2vv')
        std::vector<double> w(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) w[i] += a[i * n + j] * v[j];
        double vw = 0.0;
        for (std::size_t i = 0; i < n; ++i) vw += v[i] * w[i];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                a[i * n + j] += -2.0 * v[i] * w[j] - 2.0 * w[i] * v[j] + 4.0 * vw * v[i] * v[j];
    }
    diag.resize(n);
    off.assign(n > 1 ? n - 1 : 0, 0.0);
    for (std::size_t i = 0; i < n; ++i) diag[i] = a[i * n + i];
    for (std::size_t i = 0; i + 1 < n; ++i) off[i] = a[(i + 1) * n + i];
}

// Count of eigenvalues of the tridiagonal matrix strictly below x.
inline int sturm_count(const std::vector<double>& diag, const std::vector<double>& off, double x) {
    int count = 0;
    double q = diag[0] - x;
    if (q < 0.0) ++count;
    for (std::size_t i = 1; i < diag.size(); ++i) {
        if (q == 0.0) q = 1e-300;
        q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        if (q < 0.0) ++count;
    }
    return count;
}

// All eigenvalues of a dense real symmetric matrix, descending, via
// tridiagonalization + Sturm bisection.
inline std::vector<double> sturm_eigenvalues(const std::vector<double>& a, std::size_t n) {
    std::vector<double> diag, off;
    tridiagonalize(a, n, diag, off);

    double lo = diag[0], hi = diag[0];
    for (std::size_t i = 0; i < n; ++i) {
        double radius = 0.0;
        if (i > 0) radius += std::abs(off[i - 1]);
        if (i + 1 < n) radius += std::abs(off[i]);
        lo = std::min(lo, diag[i] - radius);
        hi = std::max(hi, diag[i] + radius);
    }
    const double span = std::max(1.0, hi - lo);
    lo -= 1e-8 * span;
    hi += 1e-8 * span;

    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        double a_ = lo, b_ = hi;
        for (int it = 0; it < 200 && b_ - a_ > 1e-13 * span; ++it) {
            const double mid = 0.5 * (a_ + b_);
            if (sturm_count(diag, off, mid) > static_cast<int>(k))
                b_ = mid;
            else
                a_ = mid;
        }
        out[k] = 0.5 * (a_ + b_);
    }
    std::sort(out.begin(), out.end(), std::greater<double>());
    return out;
}

// Reference Hermitian eigenvalues through the real embedding, solved by the
// Sturm path (not Jacobi).
inline std::vector<double> hermitian_eigenvalues_sturm(const HermitianMatrix& h) {
    const std::size_t n = h.dim();
    const std::size_t n2 = 2 * n;
    std::vector<double> e(n2 * n2, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const Complex v = h(r, c);
            e[r * n2 + c] = v.real();
            e[(n + r) * n2 + (n + c)] = v.real();
            e[r * n2 + (n + c)] = -v.imag();
            e[(n + r) * n2 + c] = v.imag();
        }
    }
    std::vector<double> doubled = sturm_eigenvalues(e, n2);
    std::vector<double> out;
    for (std::size_t i = 0; i < n2; i += 2) out.push_back(doubled[i]);
    return out;
}

inline HermitianMatrix random_hermitian(std::size_t n, neurocount::Rng& rng, double scale = 1.0) {
    HermitianMatrix h(n);
    for (std::size_t r = 0; r < n; ++r) {
        h.set(r, r, Complex{scale * rng.normal(), 0.0});
        for (std::size_t c = 0; c < r; ++c)
            h.set(r, c, Complex{scale * rng.normal(), scale * rng.normal()});
    }
    return h;
}

// Random unitary from a few complex Householder reflectors and a phase.
inline CMatrix random_unitary(std::size_t n, neurocount::Rng& rng) {
    CMatrix u(n * n, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) u[i * n + i] = Complex{1.0, 0.0};
    for (int rep = 0; rep < 3; ++rep) {
        std::vector<Complex> v(n);
        double norm2 = 0.0;
        for (auto& x : v) {
            x = Complex{rng.normal(), rng.normal()};
            norm2 += std::norm(x);
        }
        // u <- u (I - 2 v v* / |v|^2)
        CMatrix next(n * n, Complex{0.0, 0.0});
        for (std::size_t r = 0; r < n; ++r) {
            Complex uv{0.0, 0.0};
            for (std::size_t k = 0; k < n; ++k) uv += u[r * n + k] * v[k];
            for (std::size_t c = 0; c < n; ++c)
                next[r * n + c] = u[r * n + c] - 2.0 * uv * std::conj(v[c]) / norm2;
        }
        u = std::move(next);
    }
    const double phase = 2.0 * M_PI * rng.uniform01();
    for (auto& x : u) x *= std::polar(1.0, phase);
    return u;
}

// u h u* for dense complex matrices.
inline CMatrix conjugate(const CMatrix& u, const CMatrix& h, std::size_t n) {
    CMatrix uh(n * n, Complex{0.0, 0.0});
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t c = 0; c < n; ++c) uh[r * n + c] += u[r * n + k] * h[k * n + c];
    CMatrix out(n * n, Complex{0.0, 0.0});
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t k = 0; k < n; ++k)
                out[r * n + c] += uh[r * n + k] * std::conj(u[c * n + k]);
    return out;
}

}  // namespace oracles
