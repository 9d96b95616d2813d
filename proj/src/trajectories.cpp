#include "nmchain/trajectories.hpp"

#include "nmchain/errors.hpp"
#include "nmchain/io.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <stdexcept>
#include <thread>

namespace nmchain {

// ------------------------------------------------------------ Kraus engine

namespace {

KrausSet kraus_for(const ChainModel& model) {
    if (model.kind == ModelKind::MarkovXOR) return markov_xor_kraus(model.phi);
    if (model.has_embedding()) return build_embedding(model).kraus;
    throw std::invalid_argument(fmt::format("KrausProcess: no Kraus set for model '{}'", to_string(model.kind)));
}

}  // namespace

KrausProcess::KrausProcess(const ChainModel& model, const DensityMatrix& mem0)
    : kraus_(kraus_for(model)), compound_(model.has_embedding()), mem0_(mem0.relabeled({"mem"})) {}

ChainState KrausProcess::initial(const DensityMatrix& rho0) const {
    const DensityMatrix sys = rho0.relabeled(kSystemSlots);
    return {compound_ ? tensor(mem0_, sys) : sys, {}, 0};
}

std::vector<StepBranch> KrausProcess::branches(const ChainState& state, int t) const {
    // Same arithmetic as apply_selective, with each M rho M^dagger formed once.
    std::vector<StepBranch> out;
    for (std::size_t k = 0; k < kraus_.size(); ++k) {
        const ComplexMatrix& m = kraus_.operators()[k];
        ComplexMatrix branch = m * state.joint.matrix() * m.adjoint();
        const double p = branch.trace().real();
        if (!(p > kMinBranchProbability)) continue;
        branch = (0.5 / p) * (branch + branch.adjoint()).eval();
        out.push_back({ChainState{DensityMatrix::trusted(std::move(branch), state.joint.slot_labels()), {}, t},
                       {kraus_.labels()[k]},
                       p});
    }
    return out;
}

ChainState KrausProcess::average_step(const ChainState& state, int t) const {
    return {apply_kraus(kraus_, state.joint), {}, t};
}

DensityMatrix KrausProcess::system_state(const ChainState& state) const {
    return compound_ ? partial_trace(state.joint, {"sys"}) : state.joint;
}

// --------------------------------------------------- sliding-window engine

namespace {

SlidingWindowConfig selective_config(const ChainModel& model, int t_max, const DensityMatrix& mem0) {
    if (t_max < 0) throw std::invalid_argument("selective process: negative step count");
    // Paper models: look two steps past t_max so every molecule's true final
    // collision is known. Custom schedules are taken as complete.
    CollisionSchedule sched = model.kind == ModelKind::Custom
                                  ? (model.schedule->horizon() >= t_max ? *model.schedule : model.collision_schedule(t_max))
                                  : model.collision_schedule(t_max + 2);
    if (!sched.persistent().empty()) {
        throw UnsupportedFeature(
            "selective sampling: the schedule has a molecule that never closes, so it cannot be monitored");
    }
    return SlidingWindowConfig{model.collision_gate(), std::move(sched), model.molecule(), mem0, 6};
}

}  // namespace

SlidingWindowProcess::SlidingWindowProcess(const ChainModel& model, int t_max, const DensityMatrix& mem0)
    : config_(selective_config(model, t_max, mem0)) {}

ChainState SlidingWindowProcess::initial(const DensityMatrix& rho0) const {
    return initial_chain_state(rho0);
}

std::vector<StepBranch> SlidingWindowProcess::branches(const ChainState& state, int t) const {
    std::vector<StepBranch> live{{sliding_window_collide(state, config_, t), {}, 1.0}};
    for (int id : config_.schedule.closing_at(t)) {
        std::vector<StepBranch> next;
        for (const auto& b : live) {
            for (int outcome = 0; outcome < 2; ++outcome) {
                auto [s, p] = measure_molecule(b.state, id, outcome);
                const double total = b.probability * p;
                if (!(total > kMinBranchProbability)) continue;
                std::vector<int> outcomes = b.outcomes;
                outcomes.push_back(outcome);
                next.push_back({std::move(s), std::move(outcomes), total});
            }
        }
        live = std::move(next);
    }
    return live;
}

ChainState SlidingWindowProcess::average_step(const ChainState& state, int t) const {
    return sliding_window_step(state, config_, t);
}

DensityMatrix SlidingWindowProcess::system_state(const ChainState& state) const {
    return system_marginal(state);
}

std::unique_ptr<SelectiveProcess> make_process(const ChainModel& model, int t_max, const DensityMatrix& mem0,
                                               std::optional<Engine> engine) {
    model.validate();
    const Engine e = engine.value_or(model.kind == ModelKind::Custom ? Engine::sliding_window : Engine::kraus);
    if (e == Engine::kraus) return std::make_unique<KrausProcess>(model, mem0);
    return std::make_unique<SlidingWindowProcess>(model, t_max, mem0);
}

// ------------------------------------------------------------- enumeration

EnumerationResult enumerate_branches(const SelectiveProcess& process, const DensityMatrix& rho0, int t_max,
                                     double prune_below, bool keep_states) {
    if (t_max < 0 || t_max > kMaxEnumerationSteps) {
        throw std::invalid_argument(fmt::format("enumerate_branches: t_max must be in [0, {}]", kMaxEnumerationSteps));
    }
    if (!(prune_below >= 0.0)) throw std::invalid_argument("enumerate_branches: prune_below must be >= 0");
    if (t_max > kMaxExactEnumerationSteps && prune_below == 0.0) {
        throw std::invalid_argument(fmt::format(
            "enumerate_branches: beyond {} steps a positive prune threshold is required", kMaxExactEnumerationSteps));
    }

    struct Live {
        ChainState state;
        TrajectoryRecord record;
        double probability;
    };
    EnumerationResult result;
    std::vector<Live> live;
    live.push_back({process.initial(rho0), {}, 1.0});
    for (int t = 1; t <= t_max; ++t) {
        std::vector<Live> next;
        for (auto& parent : live) {
            auto children = process.branches(parent.state, t);
            double kept = 0.0;
            for (auto& c : children) {
                kept += c.probability;
                const double p = parent.probability * c.probability;
                if (!(p > prune_below)) {
                    result.pruned_mass += p;
                    continue;
                }
                TrajectoryRecord rec = parent.record;
                for (int o : c.outcomes) {
                    rec.outcomes.push_back(o);
                    rec.steps.push_back(t);
                }
                rec.step_probabilities.push_back(c.probability);
                rec.log_probability += std::log(c.probability);
                if (keep_states) rec.conditional_states.push_back(process.system_state(c.state));
                next.push_back({std::move(c.state), std::move(rec), p});
                if (next.size() > kMaxBranches) {
                    throw UnsupportedFeature(
                        fmt::format("enumerate_branches: more than {} branches at step {}; raise --prune", kMaxBranches, t));
                }
            }
            result.pruned_mass += std::max(0.0, parent.probability * (1.0 - kept));
        }
        live = std::move(next);
    }
    result.branches.reserve(live.size());
    for (auto& l : live) {
        l.record.final_state = process.system_state(l.state);
        result.branches.push_back(std::move(l.record));
    }
    return result;
}

DensityMatrix branch_average(const EnumerationResult& result) {
    if (result.branches.empty()) throw std::invalid_argument("branch_average: no branches");
    const auto& first = *result.branches.front().final_state;
    ComplexMatrix acc = ComplexMatrix::Zero(first.dim(), first.dim());
    double mass = 0.0;
    for (const auto& b : result.branches) {
        const double p = b.probability();
        acc += p * b.final_state->matrix();
        mass += p;
    }
    acc /= mass;
    return DensityMatrix(std::move(acc), first.slot_labels());
}

// ---------------------------------------------------------------- sampling

TrajectoryRng::TrajectoryRng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    engine_.seed(seq);
}

double TrajectoryRng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

TrajectoryRecord sample_trajectory(const SelectiveProcess& process, const DensityMatrix& rho0, int t_max,
                                   std::uint64_t seed, std::uint64_t index, bool keep_states) {
    if (t_max < 0) throw std::invalid_argument("sample_trajectory: negative step count");
    TrajectoryRng rng(seed, index);
    TrajectoryRecord rec;
    ChainState state = process.initial(rho0);
    for (int t = 1; t <= t_max; ++t) {
        auto children = process.branches(state, t);
        if (children.empty()) throw std::logic_error("sample_trajectory: step has no outcome");
        const double u = rng.uniform();
        double cum = 0.0;
        std::size_t pick = children.size() - 1;
        for (std::size_t k = 0; k < children.size(); ++k) {
            cum += children[k].probability;
            if (u < cum) {
                pick = k;
                break;
            }
        }
        StepBranch& c = children[pick];
        for (int o : c.outcomes) {
            rec.outcomes.push_back(o);
            rec.steps.push_back(t);
        }
        rec.step_probabilities.push_back(c.probability);
        rec.log_probability += std::log(c.probability);
        state = std::move(c.state);
        if (keep_states) rec.conditional_states.push_back(process.system_state(state));
    }
    rec.final_state = process.system_state(state);
    return rec;
}

std::vector<TrajectoryRecord> sample_ensemble(const SelectiveProcess& process, const DensityMatrix& rho0, int t_max,
                                              std::uint64_t seed, std::size_t n, unsigned threads) {
    std::vector<TrajectoryRecord> out(n);
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = sample_trajectory(process, rho0, t_max, seed, i);
    };
    if (workers == 1) {
        run(0, n);
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(n, w * chunk);
        const std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&, w, begin, end] {
            try {
                run(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

EnsembleStats ensemble_stats(const std::vector<TrajectoryRecord>& records, std::uint64_t seed) {
    if (records.empty()) throw std::invalid_argument("ensemble_stats: no records");
    const auto& first = records.front().final_state;
    if (!first) throw std::invalid_argument("ensemble_stats: records carry no final state");
    ComplexMatrix acc = ComplexMatrix::Zero(first->dim(), first->dim());
    std::vector<std::array<std::size_t, 2>> freq;
    for (const auto& r : records) {
        if (!r.final_state) throw std::invalid_argument("ensemble_stats: records carry no final state");
        acc += r.final_state->matrix();
        if (freq.size() < r.outcomes.size()) freq.resize(r.outcomes.size(), {0, 0});
        for (std::size_t k = 0; k < r.outcomes.size(); ++k) ++freq[k][r.outcomes[k] == 0 ? 0 : 1];
    }
    acc /= acc.trace().real();
    acc = 0.5 * (acc + acc.adjoint()).eval();
    return {records.size(), DensityMatrix(std::move(acc), first->slot_labels()), std::move(freq), seed};
}

std::string trajectory_json_line(const TrajectoryRecord& record) {
    std::string s = "{\"outcomes\":[";
    for (std::size_t k = 0; k < record.outcomes.size(); ++k) {
        if (k) s += ',';
        s += std::to_string(record.outcomes[k]);
    }
    s += "],\"log_p\":";
    s += json_number(record.log_probability);
    s += '}';
    return s;
}

}  // namespace nmchain
