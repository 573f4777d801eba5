#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "neurocount/errors.hpp"

namespace neurocount {

using Complex = std::complex<double>;

namespace detail {

// Cyclic Jacobi sweeps on a dense real symmetric matrix (row-major, full
// storage). Returns the eigenvalues unsorted (final diagonal). If v_out is
// non-null it receives the eigenvectors as columns of a row-major n x n
// matrix. Stops when the off-diagonal Frobenius norm drops below
// 1e-12 * (1 + ||input||_F); throws SolverError after 100 sweeps.
inline std::vector<double> jacobi_symmetric(std::vector<double> a, std::size_t n,
                                            std::vector<double>* v_out = nullptr) {
    constexpr int kMaxSweeps = 100;

    double input_norm = 0.0;
    for (double x : a) input_norm += x * x;
    input_norm = std::sqrt(input_norm);
    const double tol = 1e-12 * (1.0 + input_norm);

    if (v_out) {
        v_out->assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) (*v_out)[i * n + i] = 1.0;
    }

    double off = 0.0;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        off = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                off += 2.0 * a[p * n + q] * a[p * n + q];
        off = std::sqrt(off);
        if (off < tol) {
            std::vector<double> diag(n);
            for (std::size_t i = 0; i < n; ++i) diag[i] = a[i * n + i];
            return diag;
        }

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                a[p * n + p] -= t * apq;
                a[q * n + q] += t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = a[r * n + p];
                    const double arq = a[r * n + q];
                    a[r * n + p] = c * arp - s * arq;
                    a[p * n + r] = a[r * n + p];
                    a[r * n + q] = s * arp + c * arq;
                    a[q * n + r] = a[r * n + q];
                }
                if (v_out) {
                    for (std::size_t r = 0; r < n; ++r) {
                        const double vrp = (*v_out)[r * n + p];
                        const double vrq = (*v_out)[r * n + q];
                        (*v_out)[r * n + p] = c * vrp - s * vrq;
                        (*v_out)[r * n + q] = s * vrp + c * vrq;
                    }
                }
            }
        }
    }
    throw SolverError("jacobi_symmetric: no convergence after 100 sweeps, off-diagonal norm " +
                          std::to_string(off),
                      off);
}

}  // namespace detail

// Dense complex Hermitian matrix. Only the lower triangle and the (real)
// diagonal are stored, so conjugate symmetry holds exactly by construction.
class HermitianMatrix {
public:
    explicit HermitianMatrix(std::size_t dim)
        : dim_(dim), lower_(dim * (dim + 1) / 2, Complex{0.0, 0.0}) {
        if (dim == 0) throw ConfigError("HermitianMatrix: dimension must be positive");
    }

    std::size_t dim() const { return dim_; }

    Complex operator()(std::size_t row, std::size_t col) const {
        if (row >= col) return lower_[index(row, col)];
        return std::conj(lower_[index(col, row)]);
    }

    // Assign entry (row, col) with row >= col; the mirror entry follows by
    // conjugation. Diagonal assignments must be (numerically) real.
    void set(std::size_t row, std::size_t col, Complex value) {
        if (row < col) throw ConfigError("HermitianMatrix::set: expects row >= col");
        if (row == col) {
            if (std::abs(value.imag()) > 1e-12 * (1.0 + std::abs(value.real())))
                throw ConfigError("HermitianMatrix::set: diagonal entry has imaginary part");
            value = Complex{value.real(), 0.0};
        }
        lower_[index(row, col)] = value;
    }

    double trace() const {
        double t = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) t += lower_[index(i, i)].real();
        return t;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (std::size_t r = 0; r < dim_; ++r) {
            s += std::norm(lower_[index(r, r)]);
            for (std::size_t c = 0; c < r; ++c) s += 2.0 * std::norm(lower_[index(r, c)]);
        }
        return std::sqrt(s);
    }

    // this += scale * other, entry-wise on the stored triangle.
    HermitianMatrix& add_scaled(const HermitianMatrix& other, double scale) {
        if (other.dim_ != dim_) throw ConfigError("HermitianMatrix::add_scaled: dimension mismatch");
        for (std::size_t i = 0; i < lower_.size(); ++i) lower_[i] += scale * other.lower_[i];
        return *this;
    }

private:
    static std::size_t index(std::size_t row, std::size_t col) {
        return row * (row + 1) / 2 + col;
    }

    std::size_t dim_;
    std::vector<Complex> lower_;  // packed rows of the lower triangle
};

// Hermitian Toeplitz matrix from lag coefficients: entry (j,k) with j >= k is
// lags[j-k]; lags[0] must be real. All Toeplitz constructions in this library
// go through here so that entries at lags t and -t are exact conjugates.
inline HermitianMatrix hermitian_toeplitz(std::span<const Complex> lags) {
    if (lags.empty()) throw ConfigError("hermitian_toeplitz: needs at least the zero lag");
    const std::size_t dim = lags.size();
    HermitianMatrix h(dim);
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c <= r; ++c) h.set(r, c, lags[r - c]);
    return h;
}

// The (p+1) x (p+1) matrix with entry (j,k) = e^{i(k-j)x}; equals the outer
// product of (1, e^{-ix}, ..., e^{-ipx}) with its conjugate transpose.
inline HermitianMatrix trig_matrix(double x, int p) {
    if (p < 0) throw ConfigError("trig_matrix: order p must be nonnegative");
    if (!std::isfinite(x)) throw ConfigError("trig_matrix: angle must be finite");
    std::vector<Complex> lags(static_cast<std::size_t>(p) + 1);
    const Complex step = std::polar(1.0, -x);
    Complex cur{1.0, 0.0};
    for (int t = 0; t <= p; ++t) {
        lags[static_cast<std::size_t>(t)] = cur;
        cur *= step;
    }
    lags[0] = Complex{1.0, 0.0};
    return hermitian_toeplitz(lags);
}

// All eigenvalues in descending order, computed by embedding H = A + iB into
// the real symmetric [[A, -B], [B, A]] (each eigenvalue doubled) and running
// cyclic Jacobi. In builds without NDEBUG the eigendecomposition of the
// embedding is verified by reconstruction.
inline std::vector<double> eigenvalues_desc(const HermitianMatrix& h) {
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

#ifndef NDEBUG
    const std::vector<double> embedded = e;
    std::vector<double> vectors;
    std::vector<double> values = detail::jacobi_symmetric(std::move(e), n2, &vectors);
    {
        // Reconstruction check: || V diag(w) V' - E ||_max small.
        double scale = 1.0;
        for (double w : values) scale = std::max(scale, std::abs(w));
        for (std::size_t r = 0; r < n2; ++r) {
            for (std::size_t c = 0; c < n2; ++c) {
                double acc = 0.0;
                for (std::size_t k = 0; k < n2; ++k)
                    acc += vectors[r * n2 + k] * values[k] * vectors[c * n2 + k];
                if (std::abs(acc - embedded[r * n2 + c]) > 1e-8 * scale)
                    throw SolverError("eigenvalues_desc: reconstruction check failed",
                                      std::abs(acc - embedded[r * n2 + c]));
            }
        }
    }
#else
    std::vector<double> values = detail::jacobi_symmetric(std::move(e), n2);
#endif

    std::sort(values.begin(), values.end(), std::greater<double>());

    // The embedding yields every eigenvalue of H exactly twice; keep one per
    // pair and verify the discarded partner agrees.
    std::vector<double> out;
    out.reserve(n);
    double scale = 1.0;
    for (double w : values) scale = std::max(scale, std::abs(w));
    for (std::size_t i = 0; i < n2; i += 2) {
        if (std::abs(values[i] - values[i + 1]) > 1e-8 * scale)
            throw SolverError("eigenvalues_desc: embedded spectrum is not paired",
                              std::abs(values[i] - values[i + 1]));
        out.push_back(values[i]);
    }

    double sum = 0.0;
    for (double w : out) sum += w;
    const double tr = h.trace();
    if (std::abs(sum - tr) > 1e-9 * std::max(1.0, std::abs(tr)))
        throw SolverError("eigenvalues_desc: eigenvalue sum drifted from the trace",
                          std::abs(sum - tr));
    return out;
}

}  // namespace neurocount
