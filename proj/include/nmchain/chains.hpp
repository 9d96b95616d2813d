// chains.hpp: the collisional qubit chains.
//
//  * MarkovXOR: every molecule collides once with the system (XOR, system
//    controls molecule).
//  * RepeatedXOR / DistributedSqrtXOR: every molecule collides twice, the
//    intervals of neighbouring molecules overlapping. Equivalent to a Markov
//    chain of the two-qubit compound |mem, sys> driven by the three-qubit
//    collision U = G_sys-mol SWAP_mol-mem G_sys-mol on |mol, mem, sys>, with
//    G = XOR or sqrt-XOR.
//  * Custom: any gate plus an explicit collision schedule, run by the
//    sliding-window engine.
//
// Schedule molecule ids >= 1 are fresh reservoir molecules prepared in
// |Psi_phi>. Ids <= 0 are pre-existing satellite-memory molecules prepared in
// the memory state; they realize the "broken" start of an overlapping chain.

#pragma once

#include "nmchain/channels.hpp"
#include "nmchain/gates.hpp"
#include "nmchain/matcore.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nmchain {

enum class ModelKind { MarkovXOR, RepeatedXOR, DistributedSqrtXOR, Custom };

const char* to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);  // markov-xor | repeated-xor | sqrt-xor | custom

struct CollisionEvent {
    int t = 0;         // >= 1
    int molecule = 0;  // ids <= 0 are memory molecules
};

class CollisionSchedule {
public:
    CollisionSchedule() = default;
    /// Validates: t >= 1, distinct time steps per molecule, events ordered by t.
    /// horizon defaults to the last event time. `persistent` molecules never
    /// close: they stay in the register and cannot be monitored.
    explicit CollisionSchedule(std::vector<CollisionEvent> events, std::optional<int> horizon = std::nullopt,
                               std::vector<int> persistent = {});

    const std::vector<CollisionEvent>& events() const noexcept { return events_; }
    int horizon() const noexcept { return horizon_; }
    const std::vector<int>& persistent() const noexcept { return persistent_; }
    bool is_persistent(int molecule) const;

    std::vector<int> molecules() const;  // ascending ids
    int first_event(int molecule) const;
    int last_event(int molecule) const;
    /// Events at step t, in schedule order.
    std::vector<CollisionEvent> events_at(int t) const;
    /// Non-persistent molecules whose final collision happens at step t.
    std::vector<int> closing_at(int t) const;

    /// Restriction to steps <= horizon.
    CollisionSchedule truncated(int horizon) const;

private:
    std::vector<CollisionEvent> events_;
    int horizon_ = 0;
    std::vector<int> persistent_;
};

enum class ScheduleFigure { single_collision, double_overlap, single_molecule, advanced_overlap };

/// "1a" | "1b" | "1d" | "5"
ScheduleFigure parse_figure(std::string_view name);
const char* to_string(ScheduleFigure figure);

/// Canonical schedules:
///  single_collision (1a): molecule t collides at step t.
///  double_overlap (1b):   molecule k >= 1 collides at steps k and k+1; memory
///                         molecule 0 collides once at step 1. Within a step
///                         the first collision of the new molecule precedes
///                         the second collision of the previous one.
///  single_molecule (1d):  molecule 1 collides at every step; persistent.
///  advanced_overlap (5):  molecule k collides at steps k and k+2; memory
///                         molecules -1 and 0 collide once at steps 1 and 2.
CollisionSchedule make_schedule(ScheduleFigure figure, int horizon);

/// Size of the satellite memory in qubits: max over step boundaries of the
/// number of molecules that have collided and will collide again.
int satellite_count(const CollisionSchedule& schedule);

/// Largest number of molecules simultaneously held by the sliding window.
int max_open_molecules(const CollisionSchedule& schedule);

std::string schedule_to_json(const CollisionSchedule& schedule);
/// Accepts a JSON list of {"t": int, "mol": int} or an object with an
/// "events" list and optional "horizon" and "persistent" (list of ids).
CollisionSchedule schedule_from_json(std::string_view text);

struct ChainModel {
    ModelKind kind = ModelKind::MarkovXOR;
    double phi = 0.0;
    // Custom only:
    std::optional<UnitaryGate> gate;  // slots {control=sys, target=mol}
    std::optional<CollisionSchedule> schedule;

    static ChainModel markov_xor(double phi) { return {ModelKind::MarkovXOR, phi, {}, {}}; }
    static ChainModel repeated_xor(double phi) { return {ModelKind::RepeatedXOR, phi, {}, {}}; }
    static ChainModel sqrt_xor(double phi) { return {ModelKind::DistributedSqrtXOR, phi, {}, {}}; }
    static ChainModel custom(double phi, UnitaryGate gate, CollisionSchedule schedule);

    PureState molecule() const { return molecule_state({phi}); }
    bool has_embedding() const {
        return kind == ModelKind::RepeatedXOR || kind == ModelKind::DistributedSqrtXOR;
    }
    /// Collision gate of the model (XOR, sqrt-XOR, or the custom gate).
    UnitaryGate collision_gate() const;
    /// The model's schedule: canonical figure for the paper models.
    CollisionSchedule collision_schedule(int horizon) const;
    void validate() const;
};

inline const SlotLabels kSystemSlots{"sys"};
inline const SlotLabels kCompoundSlots{"mem", "sys"};
inline const SlotLabels kEmbeddingRegister{"mol", "mem", "sys"};

/// |0><0| on the memory qubit.
DensityMatrix default_memory_state();

/// 1-qubit density matrix from (p00, p11, re01, im01), validated.
DensityMatrix qubit_state(double p00, double p11, double re01, double im01, std::string label = "sys");

// ----------------------------------------------------------- Markov XOR

/// rho_01 <- sin(2 phi) rho_01, diagonal unchanged.
DensityMatrix markov_xor_step(const DensityMatrix& rho, double phi);

/// diag(rho0_00, rho0_11). Throws std::domain_error ("non-contracting") when
/// |sin 2phi| = 1.
DensityMatrix markov_xor_fixed_point(const DensityMatrix& rho0, double phi);

/// XOR_sys-mol on |mol, sys>.
UnitaryGate markov_xor_collision();
KrausSet markov_xor_kraus(double phi);

// ------------------------------------------------- satellite embedding

struct Embedding {
    UnitaryGate collision;           // U on |mol, mem, sys>
    UnitaryGate prepared_collision;  // U (R(phi) (x) 1 (x) 1)
    KrausSet kraus;                  // two 4x4 operators on |mem, sys>
};

/// Throws std::invalid_argument unless model.has_embedding().
Embedding build_embedding(const ChainModel& model);

/// One step of the compound chain via the Kraus set.
DensityMatrix embedded_step(const ChainModel& model, const DensityMatrix& rho_tilde);
/// One step from the explicit entry-wise recursion of the model.
DensityMatrix embedded_step_closed_form(const ChainModel& model, const DensityMatrix& rho_tilde);

/// Stepper that builds the embedding once.
class EmbeddedChain {
public:
    explicit EmbeddedChain(const ChainModel& model);

    DensityMatrix step(const DensityMatrix& rho_tilde) const { return apply_kraus(embedding_.kraus, rho_tilde); }
    const Embedding& embedding() const noexcept { return embedding_; }

private:
    Embedding embedding_;
};

/// Delta = -i(r01 + r23) + (r03 + r21) of a |mem, sys> state.
Complex delta(const DensityMatrix& rho_tilde);

/// <sigma_x> of the memory marginal.
double memory_sigma_x(const DensityMatrix& mem);

/// Memory state correlated with system basis state `sys_bit` in the
/// stationary compound: |Psi_phi> for 0; for 1, sin phi|0> + cos phi|1>
/// (RepeatedXOR) or (|0> - i e^{2i phi}|1>)/sqrt 2 (DistributedSqrtXOR).
ComplexVector stationary_memory_state(const ChainModel& model, int sys_bit);

/// |<Psi_phi | Psi'_phi>|.
double stationary_memory_overlap(const ChainModel& model);

/// Closed-form stationary compound state for system rho0 and memory mem0.
/// Throws std::domain_error when |<sigma_x>_mem0| > 1e-12 (iterate instead).
DensityMatrix stationary_state(const ChainModel& model, const DensityMatrix& rho0,
                               const DensityMatrix& mem0 = default_memory_state());

struct PowerIterationResult {
    DensityMatrix state;
    int steps;
    bool converged;
};

/// Iterate the compound superoperator until successive states differ by less
/// than `tol` in trace distance, or max_steps.
PowerIterationResult stationary_state_numeric(const ChainModel& model, const DensityMatrix& rho_tilde0,
                                              int max_steps = 10000, double tol = 1e-13);

// ----------------------------------------------------- sliding window

struct ChainState {
    DensityMatrix joint;             // slots: open molecules (newest first), then "sys"
    std::vector<int> open_molecules; // in slot order
    int t = 0;
};

std::string molecule_label(int id);

struct SlidingWindowConfig {
    UnitaryGate gate;  // slots {control=sys, target=mol}
    CollisionSchedule schedule;
    PureState molecule;                    // fresh molecules (id >= 1)
    DensityMatrix memory = default_memory_state();  // memory molecules (id <= 0)
    int qubit_cap = 6;
};

SlidingWindowConfig sliding_window_config(const ChainModel& model, int horizon,
                                          const DensityMatrix& mem0 = default_memory_state());

ChainState initial_chain_state(const DensityMatrix& rho0);

/// Opens molecules first colliding at step t and applies the gates of step
/// t. Closing molecules are left in the register. Throws UnsupportedFeature
/// if the register would exceed the qubit cap.
ChainState sliding_window_collide(const ChainState& state, const SlidingWindowConfig& config, int t);

/// Trace out `molecule`.
ChainState close_molecule(const ChainState& state, int molecule);

/// Project `molecule` on |outcome>, trace it out; returns the unnormalized
/// probability alongside the renormalized state (state undefined when p is 0).
std::pair<ChainState, double> measure_molecule(const ChainState& state, int molecule, int outcome);

/// Full non-selective step t: collide, then trace out non-persistent
/// molecules whose last event is <= t.
ChainState sliding_window_step(const ChainState& state, const SlidingWindowConfig& config, int t);

DensityMatrix system_marginal(const ChainState& state);

// ------------------------------------------------------- system dynamics

/// System state after `t` steps starting from rho0 (system) and mem0.
/// MarkovXOR: closed form. Embedding models: compound chain then Tr_mem.
/// Custom: sliding-window engine.
DensityMatrix evolve_system(const ChainModel& model, const DensityMatrix& rho0, int t,
                            const DensityMatrix& mem0 = default_memory_state());

}  // namespace nmchain
