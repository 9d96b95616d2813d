// matcore.hpp: dense complex matrices, qubit-register density matrices and
// the scalar functionals (entropy, trace distance) built on them.
//
// Register convention: the first slot label is the most significant bit of
// the basis index, so a register {"mol", "mem", "sys"} enumerates
// |000>, |001>, ... with "sys" as the least significant qubit.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace nmchain {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using SlotLabels = std::vector<std::string>;

namespace tol {
inline constexpr double kHermitian = 1e-12;
inline constexpr double kTrace = 1e-12;
inline constexpr double kNorm = 1e-12;
/// Eigenvalues in [-kEigenClamp, 0) are treated as zero.
inline constexpr double kEigenClamp = 1e-10;
inline constexpr double kEigenInputHermitian = 1e-10;
}  // namespace tol

/// Largest absolute entry, 0 for empty matrices.
double max_abs(const ComplexMatrix& m);

bool all_finite(const ComplexMatrix& m);

/// Number of qubits n with 2^n == dim; throws std::invalid_argument otherwise.
int qubit_count(Eigen::Index dim);

/// Kronecker product with the indices of `a` most significant.
ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);

/// Normalized state vector on a qubit register.
class PureState {
public:
    explicit PureState(ComplexVector amplitudes);

    const ComplexVector& amplitudes() const noexcept { return amplitudes_; }
    Eigen::Index dim() const noexcept { return amplitudes_.size(); }
    ComplexMatrix projector() const;

private:
    ComplexVector amplitudes_;
};

/// Hermitian, unit-trace, positive semidefinite matrix on 2^n dimensions with
/// one label per qubit slot.
class DensityMatrix {
public:
    /// Validates every invariant; throws InvariantViolation on failure.
    DensityMatrix(ComplexMatrix matrix, SlotLabels slot_labels);

    /// Skips the spectral checks for states produced by trusted CPTP
    /// evolution. Shape and label count are still checked.
    static DensityMatrix trusted(ComplexMatrix matrix, SlotLabels slot_labels);

    static DensityMatrix from_pure(const PureState& psi, SlotLabels slot_labels);

    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    const SlotLabels& slot_labels() const noexcept { return labels_; }
    int n_qubits() const noexcept { return static_cast<int>(labels_.size()); }
    Eigen::Index dim() const noexcept { return matrix_.rows(); }
    Complex operator()(Eigen::Index r, Eigen::Index c) const { return matrix_(r, c); }

    /// Index of `label` in slot_labels; throws std::invalid_argument if absent.
    int slot_index(const std::string& label) const;

    DensityMatrix relabeled(SlotLabels slot_labels) const;

private:
    DensityMatrix(ComplexMatrix matrix, SlotLabels slot_labels, bool validate);

    ComplexMatrix matrix_;
    SlotLabels labels_;
};

/// Throws InvariantViolation naming the first density-matrix invariant that
/// `m` violates.
void check_density_invariants(const ComplexMatrix& m);

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

/// Reduced state on `keep` (nonempty, distinct, present), in the original
/// relative slot order.
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::string> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<std::string> keep);

/// Partial transpose on one slot.
ComplexMatrix partial_transpose(const DensityMatrix& rho, const std::string& slot);

struct HermitianEigen {
    RealVector values;      // descending
    ComplexMatrix vectors;  // columns are eigenvectors
};

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix. Throws
/// std::invalid_argument when ||h - h^dagger||_max exceeds 1e-10.
HermitianEigen eig_hermitian(const ComplexMatrix& h);

inline RealVector eigenvalues_hermitian(const ComplexMatrix& h) { return eig_hermitian(h).values; }

/// -sum w log2 w over a probability spectrum, with clamped round-off negatives.
double entropy_bits(const RealVector& spectrum);

/// Von Neumann entropy in bits.
double von_neumann_entropy(const DensityMatrix& rho);

/// Half the trace norm of a - b.
double trace_norm_distance(const DensityMatrix& a, const DensityMatrix& b);
double trace_norm_distance(const ComplexMatrix& a, const ComplexMatrix& b);

/// Computational-basis projector |i><i| on a `dim`-dimensional space.
ComplexMatrix basis_projector(Eigen::Index dim, Eigen::Index i);

}  // namespace nmchain
