// channels.hpp: Kraus sets, superoperators, Choi matrices and the
// divisibility test for a cumulative dynamical map.
//
// Superoperators act on column-stacked density matrices:
// vec(rho)[i + d*j] = rho(i, j), so rho -> K rho K^dagger has the matrix
// conj(K) (x) K.

#pragma once

#include "nmchain/gates.hpp"
#include "nmchain/matcore.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace nmchain {

class KrausSet {
public:
    /// Throws InvariantViolation when ||sum M^dagger M - 1||_max > 1e-12.
    KrausSet(std::vector<ComplexMatrix> operators, std::vector<int> labels);
    explicit KrausSet(std::vector<ComplexMatrix> operators);

    const std::vector<ComplexMatrix>& operators() const noexcept { return ops_; }
    const std::vector<int>& labels() const noexcept { return labels_; }
    std::size_t size() const noexcept { return ops_.size(); }
    Eigen::Index dim() const noexcept { return ops_.front().cols(); }

    /// Position of `label`; throws std::invalid_argument if absent.
    std::size_t index_of(int label) const;

    /// ||sum M^dagger M - 1||_max.
    double completeness_error() const;

private:
    std::vector<ComplexMatrix> ops_;
    std::vector<int> labels_;
};

struct LinearMap {
    ComplexMatrix superoperator;  // d^2 x d^2, column stacking

    Eigen::Index dim() const;
    ComplexMatrix apply(const ComplexMatrix& rho) const;
};

struct ChoiMatrix {
    ComplexMatrix matrix;  // sum_ij E_ij (x) map(E_ij), unnormalized
};

/// M_lambda = (<lambda| (x) 1) U (|molecule> (x) 1); the molecule occupies the
/// leading (most significant) slot(s) of `u`. Readout basis must be an
/// orthonormal basis of the molecule space.
KrausSet kraus_from_collision(const UnitaryGate& u, const PureState& molecule,
                              std::span<const PureState> readout_basis);

/// Computational basis |0>, |1>, ... of a `dim`-dimensional space.
std::vector<PureState> computational_basis(Eigen::Index dim);

DensityMatrix apply_kraus(const KrausSet& k, const DensityMatrix& rho);

struct SelectiveOutcome {
    DensityMatrix state;
    double probability;
};

/// Tr M_lambda rho M_lambda^dagger for every operator, in set order.
std::vector<double> outcome_probabilities(const KrausSet& k, const DensityMatrix& rho);

/// (M rho M^dagger / p, p). Throws std::domain_error when p <= 1e-15.
SelectiveOutcome apply_selective(const KrausSet& k, const DensityMatrix& rho, int label);

inline constexpr double kMinBranchProbability = 1e-15;

LinearMap identity_map(Eigen::Index dim);
LinearMap map_from_kraus(const KrausSet& k);

/// later o earlier: apply `earlier` first.
LinearMap compose(const LinearMap& later, const LinearMap& earlier);

ChoiMatrix choi(const LinearMap& m);

inline constexpr double kDefaultCpTolerance = 1e-9;

/// Smallest eigenvalue of the Hermitian part of the Choi matrix; -infinity
/// when the Choi matrix is not Hermitian within 1e-10.
double min_choi_eigenvalue(const ChoiMatrix& c);

bool is_cp(const ChoiMatrix& c, double tol = kDefaultCpTolerance);

enum class Divisibility { divisible, not_divisible, indeterminate };

const char* to_string(Divisibility d);

struct DivisibilityStep {
    Divisibility verdict;
    std::optional<LinearMap> intermediate;  // m_t o m_prev^{-1} when m_prev is invertible
    double min_choi_eig;                    // NaN when indeterminate
    double min_singular_value;              // of m_prev
};

inline constexpr double kSingularCutoff = 1e-10;

/// Whether m_t = X o m_prev for a CP map X.
DivisibilityStep divisibility_step(const LinearMap& m_t, const LinearMap& m_prev,
                                   double tol_cp = kDefaultCpTolerance);

using StateEvolution = std::function<DensityMatrix(const DensityMatrix&)>;

/// Reconstruct a linear map from its action on the density-matrix basis
/// {|i><i|, |x_ij><x_ij|, |y_ij><y_ij|}, extended to the matrix units by
/// linearity. `evolve` is called d^2 times, sequentially.
LinearMap map_tomography(const StateEvolution& evolve, Eigen::Index dim, SlotLabels slot_labels = {});

}  // namespace nmchain
