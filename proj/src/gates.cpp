#include "nmchain/gates.hpp"

#include "nmchain/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <stdexcept>

namespace nmchain {

UnitaryGate::UnitaryGate(ComplexMatrix matrix, SlotLabels slot_roles)
    : matrix_(std::move(matrix)), roles_(std::move(slot_roles)) {
    if (matrix_.rows() != matrix_.cols()) throw std::invalid_argument("UnitaryGate: matrix is not square");
    if (qubit_count(matrix_.rows()) != arity()) {
        throw std::invalid_argument(
            fmt::format("UnitaryGate: {} roles for a {}x{} matrix", roles_.size(), matrix_.rows(), matrix_.cols()));
    }
    if (!all_finite(matrix_)) throw InvariantViolation("finite-entries", "gate has non-finite entries");
    const auto n = matrix_.rows();
    const double err = max_abs(matrix_.adjoint() * matrix_ - ComplexMatrix::Identity(n, n));
    if (err > 1e-12) throw InvariantViolation("unitary", fmt::format("||U^dagger U - 1||_max = {:.3e}", err));
}

UnitaryGate UnitaryGate::then_after(const UnitaryGate& other) const {
    if (other.matrix_.rows() != matrix_.rows()) throw std::invalid_argument("then_after: dimension mismatch");
    return UnitaryGate(matrix_ * other.matrix_, roles_);
}

ComplexMatrix molecule_rotation(double phi) {
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    ComplexMatrix r(2, 2);
    r << c, -s,
         s, c;
    return r;
}

PureState molecule_state(MoleculeSpec spec) {
    ComplexVector v(2);
    v << std::cos(spec.phi), std::sin(spec.phi);
    return PureState(std::move(v));
}

UnitaryGate xor_gate() {
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    m(2, 3) = 1.0;
    m(3, 2) = 1.0;
    return UnitaryGate(std::move(m), {"control", "target"});
}

UnitaryGate swap_gate() {
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    m(0, 0) = 1.0;
    m(1, 2) = 1.0;
    m(2, 1) = 1.0;
    m(3, 3) = 1.0;
    return UnitaryGate(std::move(m), {"a", "b"});
}

Complex sqrt_half_i() {
    return std::polar(1.0 / std::numbers::sqrt2, std::numbers::pi / 4.0);
}

UnitaryGate sqrt_xor_gate() {
    const Complex r = sqrt_half_i();
    const Complex i{0.0, 1.0};
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    m(2, 2) = r;
    m(2, 3) = -i * r;
    m(3, 2) = -i * r;
    m(3, 3) = r;
    return UnitaryGate(std::move(m), {"control", "target"});
}

UnitaryGate single_qubit_gate(ComplexMatrix m, std::string role) {
    return UnitaryGate(std::move(m), {std::move(role)});
}

ComplexMatrix embed_operator(const ComplexMatrix& op, std::span<const std::string> register_slots,
                             std::span<const std::string> acting_on) {
    const int n = static_cast<int>(register_slots.size());
    const int k = static_cast<int>(acting_on.size());
    if (op.rows() != op.cols() || op.rows() != (Eigen::Index{1} << k)) {
        throw std::invalid_argument(fmt::format("embed: operator is {}x{} for {} slots", op.rows(), op.cols(), k));
    }
    std::vector<int> bits(k);
    Eigen::Index mask = 0;
    for (int i = 0; i < k; ++i) {
        const auto it = std::find(register_slots.begin(), register_slots.end(), acting_on[i]);
        if (it == register_slots.end()) throw std::invalid_argument("embed: slot '" + acting_on[i] + "' not in register");
        bits[i] = n - 1 - static_cast<int>(it - register_slots.begin());
        if (mask & (Eigen::Index{1} << bits[i])) {
            throw std::invalid_argument("embed: slot '" + acting_on[i] + "' assigned twice");
        }
        mask |= Eigen::Index{1} << bits[i];
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (register_slots[i] == register_slots[j]) {
                throw std::invalid_argument("embed: duplicate register slot '" + register_slots[i] + "'");
            }
        }
    }

    const Eigen::Index dim = Eigen::Index{1} << n;
    const Eigen::Index dk = Eigen::Index{1} << k;
    std::vector<Eigen::Index> placed(dk);
    for (Eigen::Index g = 0; g < dk; ++g) {
        Eigen::Index full = 0;
        for (int i = 0; i < k; ++i) {
            if ((g >> (k - 1 - i)) & 1) full |= Eigen::Index{1} << bits[i];
        }
        placed[g] = full;
    }

    ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        const Eigen::Index rest = col & ~mask;
        Eigen::Index gcol = 0;
        for (int i = 0; i < k; ++i) {
            if (col & (Eigen::Index{1} << bits[i])) gcol |= Eigen::Index{1} << (k - 1 - i);
        }
        for (Eigen::Index grow = 0; grow < dk; ++grow) {
            const Complex v = op(grow, gcol);
            if (v != Complex{}) out(rest | placed[grow], col) = v;
        }
    }
    return out;
}

UnitaryGate embed(const UnitaryGate& gate, std::span<const std::string> register_slots,
                  std::span<const std::string> acting_on) {
    if (static_cast<int>(acting_on.size()) != gate.arity()) {
        throw std::invalid_argument(
            fmt::format("embed: gate has {} slots but {} were assigned", gate.arity(), acting_on.size()));
    }
    return UnitaryGate(embed_operator(gate.matrix(), register_slots, acting_on),
                       SlotLabels(register_slots.begin(), register_slots.end()));
}

UnitaryGate embed(const UnitaryGate& gate, const SlotLabels& register_slots, const SlotLabels& acting_on) {
    return embed(gate, std::span<const std::string>(register_slots), std::span<const std::string>(acting_on));
}

}  // namespace nmchain
