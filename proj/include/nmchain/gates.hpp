// gates.hpp: the collision gates (XOR, SWAP, sqrt-XOR), molecule preparation,
// and embedding of few-slot gates into a labelled qubit register.
//
// Two-slot gates are stored in their own slot order (for XOR and sqrt-XOR:
// |control, target>). `embed` places them into a register such as
// {"mol", "mem", "sys"}, where the first label is the most significant bit.
// Throughout the collision models the SYSTEM is the control and the MOLECULE
// the target; this is the only reading under which XOR_sys-mol reproduces the
// 4x4 compound matrix with columns (c,0,s,0), (0,s,0,c), (-s,0,c,0), (0,c,0,-s).

#pragma once

#include "nmchain/matcore.hpp"

#include <span>
#include <string>
#include <vector>

namespace nmchain {

class UnitaryGate {
public:
    /// Throws InvariantViolation when ||U^dagger U - 1||_max > 1e-12.
    UnitaryGate(ComplexMatrix matrix, SlotLabels slot_roles);

    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    const SlotLabels& slot_roles() const noexcept { return roles_; }
    int arity() const noexcept { return static_cast<int>(roles_.size()); }

    /// this * other, both on the same slots.
    UnitaryGate then_after(const UnitaryGate& other) const;

private:
    ComplexMatrix matrix_;
    SlotLabels roles_;
};

struct MoleculeSpec {
    double phi = 0.0;  // radians; [0, pi/2] is the canonical range, others allowed
};

/// Real rotation [[cos phi, -sin phi], [sin phi, cos phi]] taking |0> to
/// cos phi |0> + sin phi |1>.
ComplexMatrix molecule_rotation(double phi);

/// |Psi_phi> = cos phi |0> + sin phi |1>.
PureState molecule_state(MoleculeSpec spec);

/// Controlled-NOT, slots {control, target}.
UnitaryGate xor_gate();

/// Two-qubit swap, slots {a, b}.
UnitaryGate swap_gate();

/// Square root of XOR: identity on control = 0, and on control = 1 the block
/// [[r, -i r], [-i r, r]] with r = sqrt(i/2) = e^{i pi/4}/sqrt(2), so that
/// the square is exactly XOR.
UnitaryGate sqrt_xor_gate();

/// The principal square root of i/2 used by sqrt_xor_gate.
Complex sqrt_half_i();

/// Single-slot unitary wrapper.
UnitaryGate single_qubit_gate(ComplexMatrix m, std::string role = "q");

/// Full-register unitary acting as `gate` on `acting_on` (gate slot i is
/// placed on register slot acting_on[i]) and as identity elsewhere.
UnitaryGate embed(const UnitaryGate& gate, std::span<const std::string> register_slots,
                  std::span<const std::string> acting_on);
UnitaryGate embed(const UnitaryGate& gate, const SlotLabels& register_slots, const SlotLabels& acting_on);

/// Same placement for an arbitrary (not necessarily unitary) operator.
ComplexMatrix embed_operator(const ComplexMatrix& op, std::span<const std::string> register_slots,
                             std::span<const std::string> acting_on);

}  // namespace nmchain
