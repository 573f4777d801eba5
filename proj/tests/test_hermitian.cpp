#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "neurocount/hermitian.hpp"
#include "neurocount/rng.hpp"
#include "oracles.hpp"

using neurocount::Complex;
using neurocount::HermitianMatrix;
using neurocount::Rng;
using neurocount::eigenvalues_desc;
using neurocount::trig_matrix;

namespace {

void require_close(Complex a, Complex b, double tol = 1e-12) {
    REQUIRE(std::abs(a - b) <= tol);
}

}  // namespace

TEST_CASE("trig_matrix small cases") {
    for (double x : {0.0, 0.37, -2.5, 11.0}) {
        const HermitianMatrix h = trig_matrix(x, 0);
        REQUIRE(h.dim() == 1);
        require_close(h(0, 0), Complex{1.0, 0.0});
    }

    const HermitianMatrix ones = trig_matrix(0.0, 2);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) require_close(ones(r, c), Complex{1.0, 0.0});

    const HermitianMatrix q = trig_matrix(M_PI / 2.0, 1);
    require_close(q(0, 0), Complex{1.0, 0.0});
    require_close(q(0, 1), Complex{0.0, 1.0});
    require_close(q(1, 0), Complex{0.0, -1.0});
    require_close(q(1, 1), Complex{1.0, 0.0});
}

TEST_CASE("trig_matrix equals its rank-one outer product") {
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const double x = 10.0 * (rng.uniform01() - 0.5);
        const int p = 1 + static_cast<int>(rng.uniform01() * 8);
        const HermitianMatrix h = trig_matrix(x, p);
        std::vector<Complex> u(static_cast<std::size_t>(p) + 1);
        for (int t = 0; t <= p; ++t) u[static_cast<std::size_t>(t)] = std::polar(1.0, -t * x);
        for (std::size_t r = 0; r <= static_cast<std::size_t>(p); ++r)
            for (std::size_t c = 0; c <= static_cast<std::size_t>(p); ++c)
                require_close(h(r, c), u[r] * std::conj(u[c]), 1e-10);
    }
}

TEST_CASE("hermitian storage keeps conjugate symmetry exact") {
    Rng rng(5);
    const HermitianMatrix h = oracles::random_hermitian(6, rng);
    for (std::size_t r = 0; r < 6; ++r) {
        REQUIRE(h(r, r).imag() == 0.0);
        for (std::size_t c = 0; c < 6; ++c) {
            const Complex a = h(r, c);
            const Complex b = std::conj(h(c, r));
            REQUIRE(a.real() == b.real());
            REQUIRE(a.imag() == b.imag());
        }
    }
}

TEST_CASE("eigenvalues_desc frozen cases") {
    HermitianMatrix eye(2);
    eye.set(0, 0, {1.0, 0.0});
    eye.set(1, 1, {1.0, 0.0});
    auto e = eigenvalues_desc(eye);
    REQUIRE(e[0] == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(e[1] == Catch::Approx(1.0).margin(1e-12));

    // [[2, i], [-i, 2]]: characteristic polynomial x^2 - 4x + 3, roots 3 and 1.
    HermitianMatrix m(2);
    m.set(0, 0, {2.0, 0.0});
    m.set(1, 1, {2.0, 0.0});
    m.set(1, 0, {0.0, -1.0});
    e = eigenvalues_desc(m);
    REQUIRE(e[0] == Catch::Approx(3.0).margin(1e-10));
    REQUIRE(e[1] == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("trig_matrix spectrum is rank one") {
    Rng rng(42);
    for (int rep = 0; rep < 10; ++rep) {
        const double x = 20.0 * (rng.uniform01() - 0.5);
        const int p = 1 + static_cast<int>(rng.uniform01() * 10);
        const auto e = eigenvalues_desc(trig_matrix(x, p));
        REQUIRE(e[0] == Catch::Approx(p + 1.0).margin(1e-9));
        for (std::size_t i = 1; i < e.size(); ++i) REQUIRE(std::abs(e[i]) <= 1e-9);
    }
}

TEST_CASE("eigenvalues match the characteristic-polynomial oracle (dim <= 3)") {
    Rng rng(100);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform01() * 3000) % 3;
        const HermitianMatrix h = oracles::random_hermitian(n, rng, 2.0);
        const auto got = eigenvalues_desc(h);
        const auto want = oracles::charpoly_eigenvalues(h);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < n; ++i)
            REQUIRE(got[i] == Catch::Approx(want[i]).margin(1e-8));
    }
}

TEST_CASE("eigenvalues match the Sturm-bisection oracle (dim <= 8)") {
    Rng rng(200);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform01() * 8000) % 8;
        const HermitianMatrix h = oracles::random_hermitian(n, rng, 3.0);
        const auto got = eigenvalues_desc(h);
        const auto want = oracles::hermitian_eigenvalues_sturm(h);
        for (std::size_t i = 0; i < n; ++i)
            REQUIRE(got[i] == Catch::Approx(want[i]).margin(1e-8));
    }
}

TEST_CASE("Weyl perturbation bound") {
    Rng rng(300);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform01() * 6000) % 6;
        const HermitianMatrix h = oracles::random_hermitian(n, rng, 2.0);
        const HermitianMatrix pert = oracles::random_hermitian(n, rng, 0.01);
        HermitianMatrix sum = h;
        sum.add_scaled(pert, 1.0);
        const auto base = eigenvalues_desc(h);
        const auto moved = eigenvalues_desc(sum);
        const double bound = pert.frobenius_norm() + 1e-10;
        for (std::size_t i = 0; i < n; ++i) REQUIRE(std::abs(moved[i] - base[i]) <= bound);
    }
}

TEST_CASE("eigenvalues of A A* are those of A* A plus zeros") {
    Rng rng(400);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform01() * 5000) % 5;
        const std::size_t m = n + 1 + static_cast<std::size_t>(rng.uniform01() * 600) % (6 - n);
        std::vector<Complex> a(m * n);
        for (auto& v : a) v = Complex{rng.normal(), rng.normal()};

        HermitianMatrix aat(m);
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c <= r; ++c) {
                Complex acc{0.0, 0.0};
                for (std::size_t k = 0; k < n; ++k) acc += a[r * n + k] * std::conj(a[c * n + k]);
                aat.set(r, c, r == c ? Complex{acc.real(), 0.0} : acc);
            }
        HermitianMatrix ata(n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c <= r; ++c) {
                Complex acc{0.0, 0.0};
                for (std::size_t k = 0; k < m; ++k) acc += std::conj(a[k * n + r]) * a[k * n + c];
                ata.set(r, c, r == c ? Complex{acc.real(), 0.0} : acc);
            }

        const auto big = eigenvalues_desc(aat);
        auto small = eigenvalues_desc(ata);
        small.resize(m, 0.0);
        std::sort(small.begin(), small.end(), std::greater<double>());
        for (std::size_t i = 0; i < m; ++i)
            REQUIRE(big[i] == Catch::Approx(small[i]).margin(1e-8));
    }
}

TEST_CASE("spectrum is invariant under unitary conjugation") {
    Rng rng(500);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform01() * 6000) % 6;
        const HermitianMatrix h = oracles::random_hermitian(n, rng, 2.0);
        const auto u = oracles::random_unitary(n, rng);
        const auto rotated = oracles::conjugate(u, oracles::to_dense(h), n);
        // force exact Hermitian storage of the rotated matrix
        const HermitianMatrix hr = oracles::to_hermitian(rotated, n);
        const auto base = eigenvalues_desc(h);
        const auto moved = eigenvalues_desc(hr);
        for (std::size_t i = 0; i < n; ++i)
            REQUIRE(moved[i] == Catch::Approx(base[i]).margin(1e-8));
    }
}

TEST_CASE("invalid construction is rejected") {
    REQUIRE_THROWS_AS(trig_matrix(0.0, -1), neurocount::ConfigError);
    REQUIRE_THROWS_AS(HermitianMatrix(0), neurocount::ConfigError);
    HermitianMatrix h(2);
    REQUIRE_THROWS_AS(h.set(0, 0, Complex{1.0, 0.5}), neurocount::ConfigError);
    REQUIRE_THROWS_AS(h.set(0, 1, Complex{1.0, 0.0}), neurocount::ConfigError);
}
