#include "nmchain/chains.hpp"

#include "nmchain/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <json.hpp>
#include <map>
#include <set>
#include <stdexcept>

namespace nmchain {

const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::MarkovXOR: return "markov-xor";
        case ModelKind::RepeatedXOR: return "repeated-xor";
        case ModelKind::DistributedSqrtXOR: return "sqrt-xor";
        case ModelKind::Custom: return "custom";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "markov-xor") return ModelKind::MarkovXOR;
    if (name == "repeated-xor") return ModelKind::RepeatedXOR;
    if (name == "sqrt-xor") return ModelKind::DistributedSqrtXOR;
    if (name == "custom") return ModelKind::Custom;
    throw std::invalid_argument(fmt::format("unknown model '{}'", name));
}

// --------------------------------------------------------------- schedule

CollisionSchedule::CollisionSchedule(std::vector<CollisionEvent> events, std::optional<int> horizon,
                                     std::vector<int> persistent)
    : events_(std::move(events)), persistent_(std::move(persistent)) {
    std::map<int, std::set<int>> seen;
    int last_t = 0;
    for (const auto& e : events_) {
        if (e.t < 1) throw std::invalid_argument(fmt::format("schedule: event time {} < 1", e.t));
        if (e.t < last_t) throw std::invalid_argument("schedule: events are not ordered by time step");
        if (!seen[e.molecule].insert(e.t).second) {
            throw std::invalid_argument(
                fmt::format("schedule: molecule {} collides twice at step {}", e.molecule, e.t));
        }
        last_t = e.t;
    }
    horizon_ = horizon.value_or(last_t);
    if (horizon_ < 0) throw std::invalid_argument("schedule: negative horizon");
    if (horizon_ < last_t) {
        throw std::invalid_argument(fmt::format("schedule: horizon {} precedes event at step {}", horizon_, last_t));
    }
    std::sort(persistent_.begin(), persistent_.end());
    if (std::adjacent_find(persistent_.begin(), persistent_.end()) != persistent_.end()) {
        throw std::invalid_argument("schedule: duplicate persistent molecule");
    }
}

bool CollisionSchedule::is_persistent(int molecule) const {
    return std::binary_search(persistent_.begin(), persistent_.end(), molecule);
}

std::vector<int> CollisionSchedule::molecules() const {
    std::set<int> ids;
    for (const auto& e : events_) ids.insert(e.molecule);
    return {ids.begin(), ids.end()};
}

int CollisionSchedule::first_event(int molecule) const {
    for (const auto& e : events_)
        if (e.molecule == molecule) return e.t;
    throw std::invalid_argument(fmt::format("schedule: no molecule {}", molecule));
}

int CollisionSchedule::last_event(int molecule) const {
    for (auto it = events_.rbegin(); it != events_.rend(); ++it)
        if (it->molecule == molecule) return it->t;
    throw std::invalid_argument(fmt::format("schedule: no molecule {}", molecule));
}

std::vector<CollisionEvent> CollisionSchedule::events_at(int t) const {
    std::vector<CollisionEvent> out;
    for (const auto& e : events_)
        if (e.t == t) out.push_back(e);
    return out;
}

std::vector<int> CollisionSchedule::closing_at(int t) const {
    std::vector<int> out;
    for (const auto& e : events_)
        if (e.t == t && !is_persistent(e.molecule) && last_event(e.molecule) == t) out.push_back(e.molecule);
    return out;
}

CollisionSchedule CollisionSchedule::truncated(int horizon) const {
    std::vector<CollisionEvent> kept;
    for (const auto& e : events_)
        if (e.t <= horizon) kept.push_back(e);
    return CollisionSchedule(std::move(kept), horizon, persistent_);
}

ScheduleFigure parse_figure(std::string_view name) {
    if (name == "1a") return ScheduleFigure::single_collision;
    if (name == "1b") return ScheduleFigure::double_overlap;
    if (name == "1d") return ScheduleFigure::single_molecule;
    if (name == "5") return ScheduleFigure::advanced_overlap;
    throw std::invalid_argument(fmt::format("unknown figure '{}' (expected 1a, 1b, 1d or 5)", name));
}

const char* to_string(ScheduleFigure figure) {
    switch (figure) {
        case ScheduleFigure::single_collision: return "1a";
        case ScheduleFigure::double_overlap: return "1b";
        case ScheduleFigure::single_molecule: return "1d";
        case ScheduleFigure::advanced_overlap: return "5";
    }
    return "?";
}

CollisionSchedule make_schedule(ScheduleFigure figure, int horizon) {
    if (horizon < 0) throw std::invalid_argument("make_schedule: negative horizon");
    std::vector<CollisionEvent> ev;
    for (int t = 1; t <= horizon; ++t) {
        switch (figure) {
            case ScheduleFigure::single_collision:
                ev.push_back({t, t});
                break;
            case ScheduleFigure::double_overlap:
                ev.push_back({t, t});
                ev.push_back({t, t - 1});
                break;
            case ScheduleFigure::single_molecule:
                ev.push_back({t, 1});
                break;
            case ScheduleFigure::advanced_overlap:
                ev.push_back({t, t});
                ev.push_back({t, t - 2});
                break;
        }
    }
    std::vector<int> persistent;
    if (figure == ScheduleFigure::single_molecule) persistent.push_back(1);
    return CollisionSchedule(std::move(ev), horizon, std::move(persistent));
}

int satellite_count(const CollisionSchedule& schedule) {
    const auto ids = schedule.molecules();
    std::vector<std::pair<int, int>> spans;
    for (int id : ids) spans.emplace_back(schedule.first_event(id), schedule.last_event(id));
    int best = 0;
    for (int b = 0; b <= schedule.horizon(); ++b) {
        int n = 0;
        for (const auto& [first, last] : spans)
            if (first <= b && last > b) ++n;
        best = std::max(best, n);
    }
    return best;
}

int max_open_molecules(const CollisionSchedule& schedule) {
    const auto ids = schedule.molecules();
    int best = 0;
    for (int t = 1; t <= schedule.horizon(); ++t) {
        int n = 0;
        for (int id : ids)
            if (schedule.first_event(id) <= t && schedule.last_event(id) >= t) ++n;
        best = std::max(best, n);
    }
    return best;
}

std::string schedule_to_json(const CollisionSchedule& schedule) {
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : schedule.events()) events.push_back({{"t", e.t}, {"mol", e.molecule}});
    nlohmann::json doc{{"horizon", schedule.horizon()}, {"events", std::move(events)}};
    if (!schedule.persistent().empty()) doc["persistent"] = schedule.persistent();
    return doc.dump();
}

CollisionSchedule schedule_from_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(fmt::format("schedule: malformed JSON ({})", e.what()));
    }
    std::optional<int> horizon;
    std::vector<int> persistent;
    const nlohmann::json* list = &doc;
    if (doc.is_object()) {
        if (!doc.contains("events")) throw std::invalid_argument("schedule: object has no \"events\" list");
        list = &doc.at("events");
        if (doc.contains("horizon")) {
            if (!doc["horizon"].is_number_integer()) throw std::invalid_argument("schedule: horizon must be an integer");
            horizon = doc["horizon"].get<int>();
        }
        if (doc.contains("persistent")) {
            const auto& p = doc["persistent"];
            if (!p.is_array()) throw std::invalid_argument("schedule: \"persistent\" must be a list of ids");
            for (const auto& id : p) {
                if (!id.is_number_integer()) throw std::invalid_argument("schedule: persistent ids must be integers");
                persistent.push_back(id.get<int>());
            }
        }
    }
    if (!list->is_array()) throw std::invalid_argument("schedule: expected a list of events");
    std::vector<CollisionEvent> events;
    for (const auto& item : *list) {
        if (!item.is_object() || !item.contains("t") || !item.contains("mol") || !item["t"].is_number_integer() ||
            !item["mol"].is_number_integer()) {
            throw std::invalid_argument("schedule: each event needs integer \"t\" and \"mol\"");
        }
        events.push_back({item["t"].get<int>(), item["mol"].get<int>()});
    }
    return CollisionSchedule(std::move(events), horizon, std::move(persistent));
}

// ------------------------------------------------------------------ model

ChainModel ChainModel::custom(double phi, UnitaryGate gate, CollisionSchedule schedule) {
    ChainModel m{ModelKind::Custom, phi, std::move(gate), std::move(schedule)};
    m.validate();
    return m;
}

void ChainModel::validate() const {
    if (!std::isfinite(phi)) throw std::invalid_argument("model: phi is not finite");
    if (kind == ModelKind::Custom) {
        if (!gate || !schedule) throw std::invalid_argument("model: custom kind needs a gate and a schedule");
        if (gate->arity() != 2) throw std::invalid_argument("model: custom gate must act on {sys, mol}");
    }
}

UnitaryGate ChainModel::collision_gate() const {
    switch (kind) {
        case ModelKind::MarkovXOR:
        case ModelKind::RepeatedXOR: return xor_gate();
        case ModelKind::DistributedSqrtXOR: return sqrt_xor_gate();
        case ModelKind::Custom:
            validate();
            return *gate;
    }
    throw std::logic_error("unreachable");
}

CollisionSchedule ChainModel::collision_schedule(int horizon) const {
    switch (kind) {
        case ModelKind::MarkovXOR: return make_schedule(ScheduleFigure::single_collision, horizon);
        case ModelKind::RepeatedXOR:
        case ModelKind::DistributedSqrtXOR: return make_schedule(ScheduleFigure::double_overlap, horizon);
        case ModelKind::Custom:
            validate();
            return horizon <= schedule->horizon() ? schedule->truncated(horizon)
                                                  : CollisionSchedule(schedule->events(), horizon, schedule->persistent());
    }
    throw std::logic_error("unreachable");
}

DensityMatrix default_memory_state() {
    return DensityMatrix(basis_projector(2, 0), {"mem"});
}

DensityMatrix qubit_state(double p00, double p11, double re01, double im01, std::string label) {
    ComplexMatrix m(2, 2);
    m << p00, Complex(re01, im01),
         Complex(re01, -im01), p11;
    return DensityMatrix(std::move(m), {std::move(label)});
}

// ------------------------------------------------------------- Markov XOR

DensityMatrix markov_xor_step(const DensityMatrix& rho, double phi) {
    if (rho.n_qubits() != 1) throw std::invalid_argument("markov_xor_step: expected a 1-qubit state");
    ComplexMatrix m = rho.matrix();
    const double f = std::sin(2.0 * phi);
    m(0, 1) *= f;
    m(1, 0) *= f;
    return DensityMatrix::trusted(std::move(m), rho.slot_labels());
}

DensityMatrix markov_xor_fixed_point(const DensityMatrix& rho0, double phi) {
    if (rho0.n_qubits() != 1) throw std::invalid_argument("markov_xor_fixed_point: expected a 1-qubit state");
    if (std::abs(std::sin(2.0 * phi)) >= 1.0 - 1e-15) {
        throw std::domain_error("markov_xor_fixed_point: non-contracting (|sin 2phi| = 1)");
    }
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = rho0(0, 0);
    m(1, 1) = rho0(1, 1);
    return DensityMatrix::trusted(std::move(m), rho0.slot_labels());
}

UnitaryGate markov_xor_collision() {
    return embed(xor_gate(), SlotLabels{"mol", "sys"}, SlotLabels{"sys", "mol"});
}

KrausSet markov_xor_kraus(double phi) {
    const auto basis = computational_basis(2);
    return kraus_from_collision(markov_xor_collision(), molecule_state({phi}), basis);
}

// -------------------------------------------------------------- embedding

Embedding build_embedding(const ChainModel& model) {
    if (!model.has_embedding()) {
        throw std::invalid_argument(fmt::format("build_embedding: unsupported model '{}'", to_string(model.kind)));
    }
    const UnitaryGate g = model.collision_gate();
    const SlotLabels& reg = kEmbeddingRegister;
    const UnitaryGate g_sys_mol = embed(g, reg, SlotLabels{"sys", "mol"});
    const UnitaryGate swap_mol_mem = embed(swap_gate(), reg, SlotLabels{"mol", "mem"});
    const UnitaryGate u = g_sys_mol.then_after(swap_mol_mem).then_after(g_sys_mol);
    const UnitaryGate prep = embed(single_qubit_gate(molecule_rotation(model.phi)), reg, SlotLabels{"mol"});
    const auto basis = computational_basis(2);
    KrausSet kraus = kraus_from_collision(u, model.molecule(), basis);
    return {u, u.then_after(prep), std::move(kraus)};
}

EmbeddedChain::EmbeddedChain(const ChainModel& model) : embedding_(build_embedding(model)) {}

DensityMatrix embedded_step(const ChainModel& model, const DensityMatrix& rho_tilde) {
    if (rho_tilde.n_qubits() != 2) throw std::invalid_argument("embedded_step: expected a |mem, sys> state");
    return apply_kraus(build_embedding(model).kraus, rho_tilde);
}

DensityMatrix embedded_step_closed_form(const ChainModel& model, const DensityMatrix& rho_tilde) {
    if (rho_tilde.n_qubits() != 2) throw std::invalid_argument("embedded_step_closed_form: expected a |mem, sys> state");
    const auto& r = rho_tilde.matrix();
    const double c = std::cos(model.phi);
    const double s = std::sin(model.phi);
    const Complex pop0 = r(0, 0) + r(2, 2);
    const Complex pop1 = r(1, 1) + r(3, 3);
    ComplexMatrix n(4, 4);
    switch (model.kind) {
        case ModelKind::RepeatedXOR: {
            const Complex cm = r(0, 3) + r(2, 1);  // C_{x-}
            const Complex cp = r(3, 0) + r(1, 2);  // C_{x+}
            n << c * c * pop0, c * s * cm,    c * s * pop0, c * c * cm,
                 c * s * cp,   s * s * pop1,  s * s * cp,   c * s * pop1,
                 c * s * pop0, s * s * cm,    s * s * pop0, c * s * cm,
                 c * c * cp,   c * s * pop1,  c * s * cp,   c * c * pop1;
            break;
        }
        case ModelKind::DistributedSqrtXOR: {
            const Complex i1{0.0, 1.0};
            const Complex beta = std::polar(0.5, model.phi);
            const Complex bb = std::conj(beta);
            const Complex d = delta(rho_tilde);
            const Complex db = std::conj(d);
            n << c * c * pop0,          c * beta * d,            c * s * pop0,           i1 * c * bb * d,
                 c * bb * db,           0.5 * pop1,              s * bb * db,            2.0 * i1 * bb * bb * pop1,
                 c * s * pop0,          s * beta * d,            s * s * pop0,           i1 * s * bb * d,
                 -i1 * c * beta * db,   -2.0 * i1 * beta * beta * pop1, -i1 * s * beta * db, 0.5 * pop1;
            break;
        }
        default:
            throw std::invalid_argument(
                fmt::format("embedded_step_closed_form: unsupported model '{}'", to_string(model.kind)));
    }
    return DensityMatrix::trusted(std::move(n), rho_tilde.slot_labels());
}

Complex delta(const DensityMatrix& rho_tilde) {
    if (rho_tilde.n_qubits() != 2) throw std::invalid_argument("delta: expected a |mem, sys> state");
    const auto& r = rho_tilde.matrix();
    const Complex i1{0.0, 1.0};
    return -i1 * (r(0, 1) + r(2, 3)) + (r(0, 3) + r(2, 1));
}

double memory_sigma_x(const DensityMatrix& mem) {
    if (mem.n_qubits() != 1) throw std::invalid_argument("memory_sigma_x: expected a 1-qubit state");
    return 2.0 * mem(0, 1).real();
}

ComplexVector stationary_memory_state(const ChainModel& model, int sys_bit) {
    const double c = std::cos(model.phi);
    const double s = std::sin(model.phi);
    ComplexVector v(2);
    if (sys_bit == 0) {
        v << c, s;
        return v;
    }
    switch (model.kind) {
        case ModelKind::RepeatedXOR:
            v << s, c;
            return v;
        case ModelKind::DistributedSqrtXOR: {
            const Complex i1{0.0, 1.0};
            v << 1.0, -i1 * std::polar(1.0, 2.0 * model.phi);
            return v / std::sqrt(2.0);
        }
        default:
            throw std::invalid_argument(
                fmt::format("stationary_memory_state: unsupported model '{}'", to_string(model.kind)));
    }
}

double stationary_memory_overlap(const ChainModel& model) {
    return std::abs(stationary_memory_state(model, 0).dot(stationary_memory_state(model, 1)));
}

DensityMatrix stationary_state(const ChainModel& model, const DensityMatrix& rho0, const DensityMatrix& mem0) {
    if (!model.has_embedding()) {
        throw std::invalid_argument(fmt::format("stationary_state: unsupported model '{}'", to_string(model.kind)));
    }
    if (rho0.n_qubits() != 1 || mem0.n_qubits() != 1) {
        throw std::invalid_argument("stationary_state: expected 1-qubit system and memory states");
    }
    const double sx = memory_sigma_x(mem0);
    if (std::abs(sx) > 1e-12) {
        throw std::domain_error(
            fmt::format("stationary_state: closed form needs <sigma_x>_mem = 0 (got {:.6g}); iterate instead", sx));
    }
    const ComplexVector a = stationary_memory_state(model, 0);
    const ComplexVector b = stationary_memory_state(model, 1);
    const ComplexMatrix m = rho0(0, 0).real() * tensor(ComplexMatrix(a * a.adjoint()), basis_projector(2, 0)) +
                            rho0(1, 1).real() * tensor(ComplexMatrix(b * b.adjoint()), basis_projector(2, 1));
    return DensityMatrix::trusted(m, kCompoundSlots);
}

PowerIterationResult stationary_state_numeric(const ChainModel& model, const DensityMatrix& rho_tilde0,
                                              int max_steps, double tol) {
    const EmbeddedChain chain(model);
    DensityMatrix cur = rho_tilde0;
    for (int k = 1; k <= max_steps; ++k) {
        DensityMatrix next = chain.step(cur);
        const double change = trace_norm_distance(next, cur);
        cur = std::move(next);
        if (change < tol) return {std::move(cur), k, true};
    }
    return {std::move(cur), max_steps, false};
}

// ---------------------------------------------------------- sliding window

std::string molecule_label(int id) {
    return fmt::format("mol{}", id);
}

SlidingWindowConfig sliding_window_config(const ChainModel& model, int horizon, const DensityMatrix& mem0) {
    return SlidingWindowConfig{model.collision_gate(), model.collision_schedule(horizon), model.molecule(), mem0, 6};
}

ChainState initial_chain_state(const DensityMatrix& rho0) {
    if (rho0.n_qubits() != 1) throw std::invalid_argument("initial_chain_state: expected a 1-qubit system state");
    return {rho0.relabeled(kSystemSlots), {}, 0};
}

ChainState sliding_window_collide(const ChainState& state, const SlidingWindowConfig& config, int t) {
    const auto events = config.schedule.events_at(t);
    ChainState next = state;
    next.t = t;
    for (const auto& e : events) {
        if (config.schedule.first_event(e.molecule) != t) continue;
        if (std::find(next.open_molecules.begin(), next.open_molecules.end(), e.molecule) != next.open_molecules.end()) {
            continue;
        }
        if (next.joint.n_qubits() + 1 > config.qubit_cap) {
            throw UnsupportedFeature(fmt::format(
                "sliding window: opening molecule {} at step {} exceeds the {}-qubit register cap", e.molecule, t,
                config.qubit_cap));
        }
        const ComplexMatrix prep = e.molecule <= 0 ? config.memory.matrix() : config.molecule.projector();
        SlotLabels labels{molecule_label(e.molecule)};
        labels.insert(labels.end(), next.joint.slot_labels().begin(), next.joint.slot_labels().end());
        next.joint = DensityMatrix::trusted(tensor(prep, next.joint.matrix()), std::move(labels));
        next.open_molecules.insert(next.open_molecules.begin(), e.molecule);
    }
    for (const auto& e : events) {
        const UnitaryGate u = embed(config.gate, next.joint.slot_labels(), SlotLabels{"sys", molecule_label(e.molecule)});
        ComplexMatrix m = u.matrix() * next.joint.matrix() * u.matrix().adjoint();
        m = 0.5 * (m + m.adjoint()).eval();
        next.joint = DensityMatrix::trusted(std::move(m), next.joint.slot_labels());
    }
    return next;
}

namespace {

SlotLabels labels_without(const SlotLabels& labels, const std::string& drop) {
    SlotLabels keep;
    for (const auto& l : labels)
        if (l != drop) keep.push_back(l);
    return keep;
}

}  // namespace

ChainState close_molecule(const ChainState& state, int molecule) {
    const std::string label = molecule_label(molecule);
    const SlotLabels keep = labels_without(state.joint.slot_labels(), label);
    ChainState next{partial_trace(state.joint, std::span<const std::string>(keep)), {}, state.t};
    for (int id : state.open_molecules)
        if (id != molecule) next.open_molecules.push_back(id);
    return next;
}

std::pair<ChainState, double> measure_molecule(const ChainState& state, int molecule, int outcome) {
    const std::string label = molecule_label(molecule);
    const ComplexMatrix proj = embed_operator(basis_projector(2, outcome), state.joint.slot_labels(), SlotLabels{label});
    ComplexMatrix m = proj * state.joint.matrix() * proj;
    const double p = m.trace().real();
    if (p > 0.0) m /= p;
    m = 0.5 * (m + m.adjoint()).eval();
    ChainState projected{DensityMatrix::trusted(std::move(m), state.joint.slot_labels()), state.open_molecules, state.t};
    return {close_molecule(projected, molecule), p};
}

ChainState sliding_window_step(const ChainState& state, const SlidingWindowConfig& config, int t) {
    ChainState next = sliding_window_collide(state, config, t);
    const std::vector<int> open = next.open_molecules;
    for (int id : open) {
        if (!config.schedule.is_persistent(id) && config.schedule.last_event(id) <= t) next = close_molecule(next, id);
    }
    return next;
}

DensityMatrix system_marginal(const ChainState& state) {
    return partial_trace(state.joint, {"sys"});
}

// ------------------------------------------------------- system dynamics

DensityMatrix evolve_system(const ChainModel& model, const DensityMatrix& rho0, int t, const DensityMatrix& mem0) {
    if (t < 0) throw std::invalid_argument("evolve_system: negative step count");
    if (rho0.n_qubits() != 1) throw std::invalid_argument("evolve_system: expected a 1-qubit system state");
    switch (model.kind) {
        case ModelKind::MarkovXOR: {
            DensityMatrix cur = rho0.relabeled(kSystemSlots);
            for (int k = 0; k < t; ++k) cur = markov_xor_step(cur, model.phi);
            return cur;
        }
        case ModelKind::RepeatedXOR:
        case ModelKind::DistributedSqrtXOR: {
            const EmbeddedChain chain(model);
            DensityMatrix cur = tensor(mem0.relabeled({"mem"}), rho0.relabeled(kSystemSlots));
            for (int k = 0; k < t; ++k) cur = chain.step(cur);
            return partial_trace(cur, {"sys"});
        }
        case ModelKind::Custom: {
            const SlidingWindowConfig config = sliding_window_config(model, t, mem0);
            ChainState cur = initial_chain_state(rho0);
            for (int k = 1; k <= t; ++k) cur = sliding_window_step(cur, config, k);
            return system_marginal(cur);
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace nmchain
