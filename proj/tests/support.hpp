// Test-side oracles. Nothing here calls into the library's numerics: states are
// built entry by entry, spectra come from Eigen's SelfAdjointEigenSolver, and
// the brute-force register simulator uses plain index arithmetic.

#pragma once

#include "nmchain/matcore.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using nmchain::Complex;
using nmchain::ComplexMatrix;
using nmchain::ComplexVector;

inline constexpr Complex kI{0.0, 1.0};

// ------------------------------------------------------------------ random

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }

    ComplexMatrix ginibre(Eigen::Index rows, Eigen::Index cols) {
        ComplexMatrix g(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) g(r, c) = Complex(normal(), normal());
        return g;
    }

    /// Random mixed state of full rank: G G^dagger / Tr.
    ComplexMatrix density(Eigen::Index dim) {
        const ComplexMatrix g = ginibre(dim, dim);
        ComplexMatrix rho = g * g.adjoint();
        rho /= rho.trace();
        return 0.5 * (rho + rho.adjoint());
    }

    ComplexVector pure(Eigen::Index dim) {
        ComplexVector v = ginibre(dim, 1);
        return v / v.norm();
    }

    /// Haar-ish unitary from the QR decomposition of a Ginibre matrix.
    ComplexMatrix unitary(Eigen::Index dim) {
        Eigen::HouseholderQR<ComplexMatrix> qr(ginibre(dim, dim));
        ComplexMatrix q = qr.householderQ();
        const ComplexMatrix r = qr.matrixQR();
        for (Eigen::Index i = 0; i < dim; ++i) q.col(i) *= std::polar(1.0, std::arg(r(i, i)));
        return q;
    }

private:
    std::mt19937_64 eng_;
};

// ---------------------------------------------------------------- spectra

inline Eigen::VectorXd eigenvalues(const ComplexMatrix& h) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues();  // ascending
}

inline double entropy(const ComplexMatrix& rho) {
    double h = 0.0;
    if (rho.rows() == 2) {  // closed-form qubit spectrum, for the dense grid searches
        const double a = rho(0, 0).real(), d = rho(1, 1).real();
        const double r = std::hypot(0.5 * (a - d), std::abs(rho(0, 1)));
        for (double w : {0.5 * (a + d) + r, 0.5 * (a + d) - r})
            if (w > 1e-300) h -= w * std::log2(w);
        return h;
    }
    for (double w : eigenvalues(rho))
        if (w > 1e-300) h -= w * std::log2(w);
    return h;
}

inline double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
    return 0.5 * eigenvalues(a - b).cwiseAbs().sum();
}

inline double max_abs(const ComplexMatrix& m) {
    return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

// Two-qubit partial traces, |a b> with a most significant.
inline ComplexMatrix keep_first(const ComplexMatrix& rho) {
    ComplexMatrix out = ComplexMatrix::Zero(2, 2);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int k = 0; k < 2; ++k) out(a, b) += rho(2 * a + k, 2 * b + k);
    return out;
}

inline ComplexMatrix keep_second(const ComplexMatrix& rho) {
    ComplexMatrix out = ComplexMatrix::Zero(2, 2);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int k = 0; k < 2; ++k) out(a, b) += rho(2 * k + a, 2 * k + b);
    return out;
}

inline double mutual_information(const ComplexMatrix& rho) {
    return entropy(keep_first(rho)) + entropy(keep_second(rho)) - entropy(rho);
}

// --------------------------------------------------- discord grid oracle

/// J(S:M) for a projective measurement along (theta, psi) on the first qubit
/// (the memory in |mem, sys>), via explicit projectors and Eigen spectra.
inline double classical_j_first(const ComplexMatrix& rho, double theta, double psi) {
    ComplexVector n(2);
    n << std::cos(theta / 2), std::polar(std::sin(theta / 2), psi);
    const ComplexMatrix p0 = n * n.adjoint();
    const ComplexMatrix p1 = ComplexMatrix::Identity(2, 2) - p0;
    double cond = 0.0;
    for (const ComplexMatrix* p : {&p0, &p1}) {
        ComplexMatrix big = ComplexMatrix::Zero(4, 4);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int s = 0; s < 2; ++s) big(2 * a + s, 2 * b + s) = (*p)(a, b);
        const ComplexMatrix sigma = keep_second(big * rho * big);
        const double prob = sigma.trace().real();
        if (prob > 1e-300) cond += prob * entropy(sigma / prob);
    }
    return entropy(keep_second(rho)) - cond;
}

struct GridMax {
    double value;
    double theta;
    double psi;
};

/// Grid over theta in [0, pi] (n_theta points, endpoints included) and psi in
/// [0, 2 pi) (n_psi points).
inline GridMax grid_max(const ComplexMatrix& rho, int n_theta, int n_psi) {
    GridMax best{-1e300, 0.0, 0.0};
    for (int i = 0; i < n_theta; ++i) {
        const double theta = std::numbers::pi * i / (n_theta - 1);
        for (int j = 0; j < n_psi; ++j) {
            const double psi = 2.0 * std::numbers::pi * j / n_psi;
            const double v = classical_j_first(rho, theta, psi);
            if (v > best.value) best = {v, theta, psi};
        }
    }
    return best;
}

/// Grid maximum followed by repeated local zooms (21 x 21 grids shrinking
/// tenfold around the incumbent) down to an angular resolution of 1e-10.
inline GridMax zoomed_grid_max(const ComplexMatrix& rho, int n_theta, int n_psi,
                               std::optional<GridMax> start = std::nullopt) {
    GridMax best = start ? *start : grid_max(rho, n_theta, n_psi);
    double ht = std::numbers::pi / (n_theta - 1);
    double hp = 2.0 * std::numbers::pi / n_psi;
    while (ht > 1e-10) {
        const GridMax centre = best;
        for (int i = -10; i <= 10; ++i) {
            for (int j = -10; j <= 10; ++j) {
                const double theta = centre.theta + ht * i / 10.0;
                const double psi = centre.psi + hp * j / 10.0;
                const double v = classical_j_first(rho, theta, psi);
                if (v > best.value) best = {v, theta, psi};
            }
        }
        ht /= 10.0;
        hp /= 10.0;
    }
    return best;
}

// ------------------------------------------------ brute-force register

inline ComplexMatrix xor4() {
    ComplexMatrix g = ComplexMatrix::Zero(4, 4);
    g(0, 0) = g(1, 1) = g(2, 3) = g(3, 2) = 1.0;
    return g;
}

/// sqrt(i/2) = (1 + i)/2, so the lower block is ((1+i)/2, (1-i)/2; (1-i)/2, (1+i)/2).
inline ComplexMatrix sqrt_xor4() {
    ComplexMatrix g = ComplexMatrix::Zero(4, 4);
    g(0, 0) = g(1, 1) = 1.0;
    g(2, 2) = g(3, 3) = Complex(0.5, 0.5);
    g(2, 3) = g(3, 2) = Complex(0.5, -0.5);
    return g;
}

/// System plus every molecule of a run held in one register from the start;
/// the system is bit 0, molecule k of the list is bit k + 1.
class Register {
public:
    Register(const ComplexMatrix& sys, const std::vector<ComplexMatrix>& molecules) {
        std::vector<const ComplexMatrix*> q{&sys};
        for (const auto& m : molecules) q.push_back(&m);
        n_ = static_cast<int>(q.size());
        dim_ = std::size_t{1} << n_;
        rho_.assign(dim_ * dim_, Complex{});
        for (std::size_t r = 0; r < dim_; ++r) {
            for (std::size_t c = 0; c < dim_; ++c) {
                Complex v{1.0};
                for (int k = 0; k < n_ && v != Complex{}; ++k) v *= (*q[k])((r >> k) & 1, (c >> k) & 1);
                rho_[r * dim_ + c] = v;
            }
        }
    }

    /// Two-qubit gate on |control = system, target = molecule `index`>.
    void collide(const ComplexMatrix& g, int index) {
        const std::size_t cb = 1, tb = std::size_t{1} << (index + 1);
        auto sub = [&](std::size_t base, int k) { return base | ((k & 2) ? cb : 0) | ((k & 1) ? tb : 0); };
        for (std::size_t base = 0; base < dim_; ++base) {
            if (base & (cb | tb)) continue;
            for (std::size_t c = 0; c < dim_; ++c) {  // rows: U rho
                Complex in[4], out[4]{};
                for (int k = 0; k < 4; ++k) in[k] = rho_[sub(base, k) * dim_ + c];
                for (int a = 0; a < 4; ++a)
                    for (int k = 0; k < 4; ++k) out[a] += g(a, k) * in[k];
                for (int a = 0; a < 4; ++a) rho_[sub(base, a) * dim_ + c] = out[a];
            }
        }
        for (std::size_t base = 0; base < dim_; ++base) {
            if (base & (cb | tb)) continue;
            for (std::size_t r = 0; r < dim_; ++r) {  // columns: rho U^dagger
                Complex in[4], out[4]{};
                for (int k = 0; k < 4; ++k) in[k] = rho_[r * dim_ + sub(base, k)];
                for (int a = 0; a < 4; ++a)
                    for (int k = 0; k < 4; ++k) out[a] += in[k] * std::conj(g(a, k));
                for (int a = 0; a < 4; ++a) rho_[r * dim_ + sub(base, a)] = out[a];
            }
        }
    }

    ComplexMatrix system() const {
        ComplexMatrix s = ComplexMatrix::Zero(2, 2);
        for (std::size_t rest = 0; rest < dim_; rest += 2)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) s(a, b) += rho_[(rest | a) * dim_ + (rest | b)];
        return s;
    }

    int qubits() const { return n_; }

private:
    int n_ = 0;
    std::size_t dim_ = 0;
    std::vector<Complex> rho_;
};

inline ComplexMatrix molecule_projector(double phi) {
    ComplexVector v(2);
    v << std::cos(phi), std::sin(phi);
    return v * v.adjoint();
}

// ------------------------------------------------ printed paper matrices

/// U exp(i phi sigma_y) of the single-XOR chain on |mol, sys>.
inline ComplexMatrix paper_markov_u(double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    m(0, 0) = c;  m(0, 2) = -s;
    m(1, 1) = s;  m(1, 3) = c;
    m(2, 0) = s;  m(2, 2) = c;
    m(3, 1) = c;  m(3, 3) = -s;
    return m;
}

/// U exp(i phi sigma_y) of the repeated-XOR chain on |mol, mem, sys>.
inline ComplexMatrix paper_repeated_u(double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    ComplexMatrix m = ComplexMatrix::Zero(8, 8);
    m(0, 0) = c;  m(0, 4) = -s;
    m(1, 3) = s;  m(1, 7) = c;
    m(2, 0) = s;  m(2, 4) = c;
    m(3, 3) = c;  m(3, 7) = -s;
    m(4, 2) = c;  m(4, 6) = -s;
    m(5, 1) = s;  m(5, 5) = c;
    m(6, 2) = s;  m(6, 6) = c;
    m(7, 1) = c;  m(7, 5) = -s;
    return m;
}

/// Upper-left and lower-left 4x4 blocks of the repeated-XOR collision.
inline std::vector<ComplexMatrix> paper_repeated_kraus(double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    ComplexMatrix m0 = ComplexMatrix::Zero(4, 4), m1 = ComplexMatrix::Zero(4, 4);
    m0(0, 0) = c;  m0(1, 3) = s;  m0(2, 0) = s;  m0(3, 3) = c;
    m1(0, 2) = c;  m1(1, 1) = s;  m1(2, 2) = s;  m1(3, 1) = c;
    return {m0, m1};
}

inline std::vector<ComplexMatrix> paper_sqrt_kraus(double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    const Complex b = std::polar(0.5, phi), bb = std::conj(b);
    ComplexMatrix m0 = ComplexMatrix::Zero(4, 4), m1 = ComplexMatrix::Zero(4, 4);
    m0(0, 0) = c;  m0(1, 1) = kI * bb;  m0(1, 3) = bb;
    m0(2, 0) = s;  m0(3, 1) = b;        m0(3, 3) = -kI * b;
    m1(0, 2) = c;  m1(1, 1) = bb;       m1(1, 3) = kI * bb;
    m1(2, 2) = s;  m1(3, 1) = -kI * b;  m1(3, 3) = b;
    return {m0, m1};
}

/// The printed stationary compound of the repeated-XOR chain with free
/// parameters C_{x-} = cm, C_{x+} = conj(cm).
inline ComplexMatrix paper_repeated_stationary(double phi, double p00, double p11, Complex cm) {
    const double c = std::cos(phi), s = std::sin(phi);
    const Complex cp = std::conj(cm);
    ComplexMatrix m(4, 4);
    m << c * c * p00, c * s * cm, c * s * p00, c * c * cm,
         c * s * cp, s * s * p11, s * s * cp, c * s * p11,
         c * s * p00, s * s * cm, s * s * p00, c * s * cm,
         c * c * cp, c * s * p11, c * s * cp, c * c * p11;
    return m;
}

/// The printed sqrt-XOR compound recursion.
inline ComplexMatrix paper_sqrt_recursion(const ComplexMatrix& r, double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    const Complex b = std::polar(0.5, phi), bb = std::conj(b);
    const Complex d = -kI * (r(0, 1) + r(2, 3)) + (r(0, 3) + r(2, 1));
    const Complex db = std::conj(d);
    const Complex a = r(0, 0) + r(2, 2), e = r(1, 1) + r(3, 3);
    ComplexMatrix m(4, 4);
    m << c * c * a, c * b * d, c * s * a, kI * c * bb * d,
         c * bb * db, 0.5 * e, s * bb * db, 2.0 * kI * bb * bb * e,
         c * s * a, s * b * d, s * s * a, kI * s * bb * d,
         -c * b * kI * db, -2.0 * kI * b * b * e, -s * b * kI * db, 0.5 * e;
    return m;
}

}  // namespace oracle
