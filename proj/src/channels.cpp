#include "nmchain/channels.hpp"

#include "nmchain/errors.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace nmchain {

namespace {

std::vector<int> default_labels(std::size_t n) {
    std::vector<int> labels(n);
    std::iota(labels.begin(), labels.end(), 0);
    return labels;
}

ComplexMatrix vec(const ComplexMatrix& m) {
    return m.reshaped(m.size(), 1);
}

ComplexMatrix unvec(const ComplexMatrix& v, Eigen::Index d) {
    return v.reshaped(d, d);
}

SlotLabels generic_labels(Eigen::Index dim) {
    const int n = qubit_count(dim);
    SlotLabels labels;
    for (int i = 0; i < n; ++i) labels.push_back(fmt::format("q{}", i));
    return labels;
}

}  // namespace

// ------------------------------------------------------------------ Kraus

KrausSet::KrausSet(std::vector<ComplexMatrix> operators, std::vector<int> labels)
    : ops_(std::move(operators)), labels_(std::move(labels)) {
    if (ops_.empty()) throw std::invalid_argument("KrausSet: no operators");
    if (labels_.size() != ops_.size()) throw std::invalid_argument("KrausSet: label count mismatch");
    const auto d = ops_.front().cols();
    for (const auto& m : ops_) {
        if (m.rows() != d || m.cols() != d) throw std::invalid_argument("KrausSet: operators differ in shape");
        if (!all_finite(m)) throw InvariantViolation("finite-entries", "Kraus operator has non-finite entries");
    }
    for (std::size_t i = 0; i < labels_.size(); ++i)
        for (std::size_t j = i + 1; j < labels_.size(); ++j)
            if (labels_[i] == labels_[j]) throw std::invalid_argument("KrausSet: duplicate outcome label");
    const double err = completeness_error();
    if (err > 1e-12) {
        throw InvariantViolation("kraus-completeness", fmt::format("||sum M^dagger M - 1||_max = {:.3e}", err));
    }
}

KrausSet::KrausSet(std::vector<ComplexMatrix> operators)
    : KrausSet(operators, default_labels(operators.size())) {}

std::size_t KrausSet::index_of(int label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] == label) return i;
    throw std::invalid_argument(fmt::format("KrausSet: no outcome labelled {}", label));
}

double KrausSet::completeness_error() const {
    const auto d = ops_.front().cols();
    ComplexMatrix acc = ComplexMatrix::Zero(d, d);
    for (const auto& m : ops_) acc += m.adjoint() * m;
    return max_abs(acc - ComplexMatrix::Identity(d, d));
}

std::vector<PureState> computational_basis(Eigen::Index dim) {
    std::vector<PureState> basis;
    basis.reserve(dim);
    for (Eigen::Index i = 0; i < dim; ++i) basis.emplace_back(ComplexVector::Unit(dim, i));
    return basis;
}

KrausSet kraus_from_collision(const UnitaryGate& u, const PureState& molecule,
                              std::span<const PureState> readout_basis) {
    const Eigen::Index dm = molecule.dim();
    const Eigen::Index du = u.matrix().rows();
    if (du % dm != 0 || du == dm) {
        throw std::invalid_argument(fmt::format("kraus_from_collision: {}-dim molecule does not split a {}-dim gate", dm, du));
    }
    if (static_cast<Eigen::Index>(readout_basis.size()) != dm) {
        throw std::invalid_argument("kraus_from_collision: readout basis does not span the molecule space");
    }
    for (std::size_t a = 0; a < readout_basis.size(); ++a) {
        if (readout_basis[a].dim() != dm) throw std::invalid_argument("kraus_from_collision: readout slot mismatch");
        for (std::size_t b = 0; b < readout_basis.size(); ++b) {
            const Complex ip = readout_basis[a].amplitudes().dot(readout_basis[b].amplitudes());
            const double expect = (a == b) ? 1.0 : 0.0;
            if (std::abs(ip - expect) > 1e-12) {
                throw std::invalid_argument("kraus_from_collision: readout basis is not orthonormal");
            }
        }
    }
    const Eigen::Index dr = du / dm;
    const ComplexMatrix ident = ComplexMatrix::Identity(dr, dr);
    const ComplexMatrix prepare = tensor(ComplexMatrix(molecule.amplitudes()), ident);  // du x dr
    std::vector<ComplexMatrix> ops;
    for (const auto& lam : readout_basis) {
        const ComplexMatrix bra = tensor(ComplexMatrix(lam.amplitudes().adjoint()), ident);  // dr x du
        ops.push_back(bra * u.matrix() * prepare);
    }
    return KrausSet(std::move(ops));
}

DensityMatrix apply_kraus(const KrausSet& k, const DensityMatrix& rho) {
    if (rho.dim() != k.dim()) {
        throw std::invalid_argument(fmt::format("apply_kraus: {}-dim state, {}-dim Kraus set", rho.dim(), k.dim()));
    }
    ComplexMatrix out = ComplexMatrix::Zero(rho.dim(), rho.dim());
    for (const auto& m : k.operators()) out += m * rho.matrix() * m.adjoint();
    out = 0.5 * (out + out.adjoint()).eval();
    return DensityMatrix::trusted(std::move(out), rho.slot_labels());
}

std::vector<double> outcome_probabilities(const KrausSet& k, const DensityMatrix& rho) {
    if (rho.dim() != k.dim()) throw std::invalid_argument("outcome_probabilities: dimension mismatch");
    std::vector<double> p;
    p.reserve(k.size());
    for (const auto& m : k.operators()) p.push_back((m * rho.matrix() * m.adjoint()).trace().real());
    return p;
}

SelectiveOutcome apply_selective(const KrausSet& k, const DensityMatrix& rho, int label) {
    if (rho.dim() != k.dim()) throw std::invalid_argument("apply_selective: dimension mismatch");
    const ComplexMatrix& m = k.operators()[k.index_of(label)];
    ComplexMatrix out = m * rho.matrix() * m.adjoint();
    const double p = out.trace().real();
    if (!(p > kMinBranchProbability)) {
        throw std::domain_error(fmt::format("apply_selective: outcome {} has probability {:.3e}", label, p));
    }
    out = (0.5 / p) * (out + out.adjoint()).eval();
    return {DensityMatrix::trusted(std::move(out), rho.slot_labels()), p};
}

// ---------------------------------------------------------- superoperators

Eigen::Index LinearMap::dim() const {
    const auto d2 = superoperator.rows();
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(d2))));
    if (d * d != d2 || superoperator.cols() != d2) throw std::invalid_argument("LinearMap: malformed superoperator");
    return d;
}

ComplexMatrix LinearMap::apply(const ComplexMatrix& rho) const {
    const auto d = dim();
    if (rho.rows() != d || rho.cols() != d) throw std::invalid_argument("LinearMap::apply: dimension mismatch");
    return unvec(superoperator * vec(rho), d);
}

LinearMap identity_map(Eigen::Index dim) {
    return {ComplexMatrix::Identity(dim * dim, dim * dim)};
}

LinearMap map_from_kraus(const KrausSet& k) {
    const auto d = k.dim();
    ComplexMatrix s = ComplexMatrix::Zero(d * d, d * d);
    for (const auto& m : k.operators()) s += tensor(m.conjugate(), m);
    return {std::move(s)};
}

LinearMap compose(const LinearMap& later, const LinearMap& earlier) {
    if (later.superoperator.rows() != earlier.superoperator.rows()) {
        throw std::invalid_argument("compose: dimension mismatch");
    }
    return {later.superoperator * earlier.superoperator};
}

ChoiMatrix choi(const LinearMap& m) {
    const auto d = m.dim();
    ComplexMatrix c = ComplexMatrix::Zero(d * d, d * d);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            // column i + d*j of the superoperator is vec(map(E_ij))
            const ComplexMatrix image = unvec(m.superoperator.col(i + d * j), d);
            c.block(i * d, j * d, d, d) = image;
        }
    }
    return {std::move(c)};
}

double min_choi_eigenvalue(const ChoiMatrix& c) {
    if (max_abs(c.matrix - c.matrix.adjoint()) > tol::kEigenInputHermitian) {
        return -std::numeric_limits<double>::infinity();
    }
    const RealVector w = eigenvalues_hermitian(c.matrix);
    return w(w.size() - 1);
}

bool is_cp(const ChoiMatrix& c, double tol) {
    return min_choi_eigenvalue(c) >= -tol;
}

const char* to_string(Divisibility d) {
    switch (d) {
        case Divisibility::divisible: return "true";
        case Divisibility::not_divisible: return "false";
        case Divisibility::indeterminate: return "indeterminate";
    }
    return "?";
}

DivisibilityStep divisibility_step(const LinearMap& m_t, const LinearMap& m_prev, double tol_cp) {
    if (m_t.superoperator.rows() != m_prev.superoperator.rows()) {
        throw std::invalid_argument("divisibility_step: dimension mismatch");
    }
    Eigen::JacobiSVD<ComplexMatrix> svd(m_prev.superoperator, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RealVector& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (!(smin > kSingularCutoff)) {
        return {Divisibility::indeterminate, std::nullopt, std::numeric_limits<double>::quiet_NaN(), smin};
    }
    // m_prev^{-1} = V diag(1/s) U^dagger
    const ComplexMatrix inverse =
        svd.matrixV() * sv.cwiseInverse().cast<Complex>().asDiagonal() * svd.matrixU().adjoint();
    LinearMap intermediate{m_t.superoperator * inverse};
    const double w = min_choi_eigenvalue(choi(intermediate));
    const auto verdict = (w >= -tol_cp) ? Divisibility::divisible : Divisibility::not_divisible;
    return {verdict, std::move(intermediate), w, smin};
}

LinearMap map_tomography(const StateEvolution& evolve, Eigen::Index dim, SlotLabels slot_labels) {
    if (slot_labels.empty()) slot_labels = generic_labels(dim);
    const Complex i1{0.0, 1.0};
    const double r = 1.0 / std::sqrt(2.0);

    std::vector<ComplexMatrix> diag_images(dim);
    for (Eigen::Index a = 0; a < dim; ++a) {
        diag_images[a] = evolve(DensityMatrix(basis_projector(dim, a), slot_labels)).matrix();
    }

    ComplexMatrix s(dim * dim, dim * dim);
    for (Eigen::Index a = 0; a < dim; ++a) s.col(a + dim * a) = vec(diag_images[a]);

    for (Eigen::Index a = 0; a < dim; ++a) {
        for (Eigen::Index b = a + 1; b < dim; ++b) {
            ComplexVector x = ComplexVector::Zero(dim);
            ComplexVector y = ComplexVector::Zero(dim);
            x(a) = r;
            x(b) = r;
            y(a) = r;
            y(b) = i1 * r;
            const ComplexMatrix mx = evolve(DensityMatrix::from_pure(PureState(x), slot_labels)).matrix();
            const ComplexMatrix my = evolve(DensityMatrix::from_pure(PureState(y), slot_labels)).matrix();
            // E_ab = P_x + i P_y - (1+i)/2 (E_aa + E_bb); E_ba is its adjoint
            const ComplexMatrix diag_sum = diag_images[a] + diag_images[b];
            const ComplexMatrix e_ab = mx + i1 * my - Complex(0.5, 0.5) * diag_sum;
            const ComplexMatrix e_ba = mx - i1 * my - Complex(0.5, -0.5) * diag_sum;
            s.col(a + dim * b) = vec(e_ab);
            s.col(b + dim * a) = vec(e_ba);
        }
    }
    return {std::move(s)};
}

}  // namespace nmchain
