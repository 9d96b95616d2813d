#include "nmchain/matcore.hpp"

#include "nmchain/errors.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>
#include <stdexcept>

namespace nmchain {

double max_abs(const ComplexMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool all_finite(const ComplexMatrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const Complex z = m.data()[i];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
    return true;
}

int qubit_count(Eigen::Index dim) {
    if (dim < 1 || (dim & (dim - 1)) != 0) {
        throw std::invalid_argument(fmt::format("dimension {} is not a power of two", dim));
    }
    int n = 0;
    while ((Eigen::Index{1} << n) < dim) ++n;
    return n;
}

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

// ---------------------------------------------------------------- PureState

PureState::PureState(ComplexVector amplitudes) : amplitudes_(std::move(amplitudes)) {
    qubit_count(amplitudes_.size());
    if (!all_finite(amplitudes_)) {
        throw InvariantViolation("finite-entries", "state vector has non-finite amplitudes");
    }
    const double norm = amplitudes_.norm();
    if (std::abs(norm - 1.0) > tol::kNorm) {
        throw InvariantViolation("unit-norm", fmt::format("||psi|| = {:.17g}", norm));
    }
}

ComplexMatrix PureState::projector() const {
    return amplitudes_ * amplitudes_.adjoint();
}

// ------------------------------------------------------------ DensityMatrix

void check_density_invariants(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) {
        throw InvariantViolation("square", fmt::format("{}x{} matrix", m.rows(), m.cols()));
    }
    if (!all_finite(m)) throw InvariantViolation("finite-entries", "non-finite matrix entry");
    const double herm = max_abs(m - m.adjoint());
    if (herm > tol::kHermitian) {
        throw InvariantViolation("hermitian", fmt::format("||rho - rho^dagger||_max = {:.3e}", herm));
    }
    const double tr = m.trace().real();
    if (std::abs(tr - 1.0) > tol::kTrace) {
        throw InvariantViolation("unit-trace", fmt::format("Tr rho = {:.17g}", tr));
    }
    const RealVector w = eigenvalues_hermitian(m);
    if (w.size() > 0 && w(w.size() - 1) < -tol::kEigenClamp) {
        throw InvariantViolation("positive", fmt::format("min eigenvalue {:.3e}", w(w.size() - 1)));
    }
}

DensityMatrix::DensityMatrix(ComplexMatrix matrix, SlotLabels slot_labels)
    : DensityMatrix(std::move(matrix), std::move(slot_labels), true) {}

DensityMatrix::DensityMatrix(ComplexMatrix matrix, SlotLabels slot_labels, bool validate)
    : matrix_(std::move(matrix)), labels_(std::move(slot_labels)) {
    if (matrix_.rows() != matrix_.cols()) {
        throw InvariantViolation("square", fmt::format("{}x{} matrix", matrix_.rows(), matrix_.cols()));
    }
    const int n = qubit_count(matrix_.rows());
    if (n != static_cast<int>(labels_.size())) {
        throw std::invalid_argument(
            fmt::format("{} slot labels for a {}-qubit matrix", labels_.size(), n));
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        for (std::size_t j = i + 1; j < labels_.size(); ++j) {
            if (labels_[i] == labels_[j]) {
                throw std::invalid_argument("duplicate slot label '" + labels_[i] + "'");
            }
        }
    }
    if (validate) check_density_invariants(matrix_);
}

DensityMatrix DensityMatrix::trusted(ComplexMatrix matrix, SlotLabels slot_labels) {
    return DensityMatrix(std::move(matrix), std::move(slot_labels), false);
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi, SlotLabels slot_labels) {
    return DensityMatrix(psi.projector(), std::move(slot_labels));
}

int DensityMatrix::slot_index(const std::string& label) const {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw std::invalid_argument("unknown slot '" + label + "'");
    return static_cast<int>(it - labels_.begin());
}

DensityMatrix DensityMatrix::relabeled(SlotLabels slot_labels) const {
    return DensityMatrix(matrix_, std::move(slot_labels), false);
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
    SlotLabels labels = a.slot_labels();
    labels.insert(labels.end(), b.slot_labels().begin(), b.slot_labels().end());
    return DensityMatrix::trusted(tensor(a.matrix(), b.matrix()), std::move(labels));
}

// ------------------------------------------------------------ partial trace

namespace {

// Scatter the bits of `compact` into the register bit positions `bits`
// (bits[0] receives the most significant bit of `compact`).
Eigen::Index scatter_bits(Eigen::Index compact, const std::vector<int>& bits) {
    Eigen::Index full = 0;
    const int k = static_cast<int>(bits.size());
    for (int i = 0; i < k; ++i) {
        if ((compact >> (k - 1 - i)) & 1) full |= Eigen::Index{1} << bits[i];
    }
    return full;
}

}  // namespace

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::string> keep) {
    if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
    const int n = rho.n_qubits();
    std::vector<bool> kept(n, false);
    for (const auto& label : keep) {
        const int idx = rho.slot_index(label);
        if (kept[idx]) throw std::invalid_argument("partial_trace: repeated slot '" + label + "'");
        kept[idx] = true;
    }
    std::vector<int> keep_bits;
    std::vector<int> trace_bits;
    SlotLabels labels;
    for (int i = 0; i < n; ++i) {
        if (kept[i]) {
            keep_bits.push_back(n - 1 - i);
            labels.push_back(rho.slot_labels()[i]);
        } else {
            trace_bits.push_back(n - 1 - i);
        }
    }
    const Eigen::Index dk = Eigen::Index{1} << keep_bits.size();
    const Eigen::Index dt = Eigen::Index{1} << trace_bits.size();
    std::vector<Eigen::Index> keep_index(dk), trace_index(dt);
    for (Eigen::Index i = 0; i < dk; ++i) keep_index[i] = scatter_bits(i, keep_bits);
    for (Eigen::Index i = 0; i < dt; ++i) trace_index[i] = scatter_bits(i, trace_bits);

    ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
    const ComplexMatrix& m = rho.matrix();
    for (Eigen::Index c = 0; c < dk; ++c) {
        for (Eigen::Index r = 0; r < dk; ++r) {
            Complex acc{0.0, 0.0};
            for (Eigen::Index t = 0; t < dt; ++t) {
                acc += m(keep_index[r] | trace_index[t], keep_index[c] | trace_index[t]);
            }
            out(r, c) = acc;
        }
    }
    return DensityMatrix::trusted(std::move(out), std::move(labels));
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<std::string> keep) {
    const std::vector<std::string> k(keep);
    return partial_trace(rho, std::span<const std::string>(k));
}

ComplexMatrix partial_transpose(const DensityMatrix& rho, const std::string& slot) {
    const int bit = rho.n_qubits() - 1 - rho.slot_index(slot);
    const Eigen::Index mask = Eigen::Index{1} << bit;
    const ComplexMatrix& m = rho.matrix();
    ComplexMatrix out(m.rows(), m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            // swap the bit of `slot` between row and column index
            const Eigen::Index r2 = (r & ~mask) | (c & mask);
            const Eigen::Index c2 = (c & ~mask) | (r & mask);
            out(r2, c2) = m(r, c);
        }
    }
    return out;
}

// ----------------------------------------------------------------- Jacobi

HermitianEigen eig_hermitian(const ComplexMatrix& h) {
    if (h.rows() != h.cols()) throw std::invalid_argument("eig_hermitian: matrix is not square");
    const double asym = max_abs(h - h.adjoint());
    if (asym > tol::kEigenInputHermitian) {
        throw std::invalid_argument(fmt::format("eig_hermitian: non-Hermitian input ({:.3e})", asym));
    }
    const Eigen::Index n = h.rows();
    ComplexMatrix a = 0.5 * (h + h.adjoint());
    ComplexMatrix v = ComplexMatrix::Identity(n, n);

    const double scale = std::max(1.0, a.norm());
    const double stop = 1e-13 * scale;
    auto off_norm = [&] {
        double s = 0.0;
        for (Eigen::Index c = 0; c < n; ++c)
            for (Eigen::Index r = 0; r < n; ++r)
                if (r != c) s += std::norm(a(r, c));
        return std::sqrt(s);
    };

    for (int sweep = 0; sweep < 100 && off_norm() >= stop; ++sweep) {
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const Complex apq = a(p, q);
                const double r = std::abs(apq);
                if (r < 1e-300) continue;
                const Complex phase = apq / r;  // e^{i alpha}
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * r);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // G = diag(1, e^{-i alpha}) [[c, s], [-s, c]] on the (p, q) plane
                const Complex g00 = c;
                const Complex g01 = s;
                const Complex g10 = -s * std::conj(phase);
                const Complex g11 = c * std::conj(phase);
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Complex akp = a(k, p);
                    const Complex akq = a(k, q);
                    a(k, p) = akp * g00 + akq * g10;
                    a(k, q) = akp * g01 + akq * g11;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Complex apk = a(p, k);
                    const Complex aqk = a(q, k);
                    a(p, k) = std::conj(g00) * apk + std::conj(g10) * aqk;
                    a(q, k) = std::conj(g01) * apk + std::conj(g11) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Complex vkp = v(k, p);
                    const Complex vkq = v(k, q);
                    v(k, p) = vkp * g00 + vkq * g10;
                    v(k, q) = vkp * g01 + vkq * g11;
                }
            }
        }
    }

    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() > a(j, j).real(); });
    HermitianEigen out{RealVector(n), ComplexMatrix(n, n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values(i) = a(order[i], order[i]).real();
        out.vectors.col(i) = v.col(order[i]);
    }
    return out;
}

// ------------------------------------------------------------ functionals

double entropy_bits(const RealVector& spectrum) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
        const double w = spectrum(i);
        if (w > 0.0) h -= w * std::log2(w);
    }
    return h;
}

double von_neumann_entropy(const DensityMatrix& rho) {
    return entropy_bits(eigenvalues_hermitian(rho.matrix()));
}

double trace_norm_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument(fmt::format("trace_norm_distance: {}x{} vs {}x{}", a.rows(), a.cols(),
                                                b.rows(), b.cols()));
    }
    const RealVector w = eigenvalues_hermitian(a - b);
    return 0.5 * w.cwiseAbs().sum();
}

double trace_norm_distance(const DensityMatrix& a, const DensityMatrix& b) {
    return trace_norm_distance(a.matrix(), b.matrix());
}

ComplexMatrix basis_projector(Eigen::Index dim, Eigen::Index i) {
    ComplexMatrix p = ComplexMatrix::Zero(dim, dim);
    p(i, i) = 1.0;
    return p;
}

}  // namespace nmchain
