// trajectories.hpp: selective chains. Each molecule is read out in the
// computational basis right after its final collision; the outcome record of a
// run is the sequence of those readouts.
//
// Two engines realize the selective process:
//  * KrausProcess: the Kraus set of the (possibly embedded) Markov chain. For
//    the overlapping models the outcome of step t is the Kraus label of the
//    compound map, i.e. the readout of the molecule leaving the satellite.
//  * SlidingWindowProcess: the explicit register, measuring every molecule
//    that closes at step t (memory molecules included).
//
// Random numbers: std::mt19937_64 seeded through std::seed_seq with the four
// 32-bit words (seed lo, seed hi, index lo, index hi); uniform doubles take the
// top 53 bits. Both algorithms are fixed by the C++ standard, so a trajectory
// is reproducible from (seed, index) on any conforming platform.

#pragma once

#include "nmchain/chains.hpp"
#include "nmchain/channels.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace nmchain {

struct TrajectoryRecord {
    std::vector<int> outcomes;
    std::vector<int> steps;               // time step of each outcome
    std::vector<double> step_probabilities;  // per step, conditional on the history
    double log_probability = 0.0;
    std::vector<DensityMatrix> conditional_states;  // system state after each step, when retained
    std::optional<DensityMatrix> final_state;       // system state after the last step

    double probability() const { return std::exp(log_probability); }
};

/// One selective branch of a single step.
struct StepBranch {
    ChainState state;
    std::vector<int> outcomes;
    double probability;  // conditional on the history
};

class SelectiveProcess {
public:
    virtual ~SelectiveProcess() = default;

    virtual ChainState initial(const DensityMatrix& rho0) const = 0;
    /// Outcome combinations of step t with probability > 1e-15, in label order.
    virtual std::vector<StepBranch> branches(const ChainState& state, int t) const = 0;
    /// Non-selective step t.
    virtual ChainState average_step(const ChainState& state, int t) const = 0;
    virtual DensityMatrix system_state(const ChainState& state) const = 0;
};

class KrausProcess final : public SelectiveProcess {
public:
    /// Markov XOR on the system, or the embedded chain on |mem, sys>.
    KrausProcess(const ChainModel& model, const DensityMatrix& mem0 = default_memory_state());

    ChainState initial(const DensityMatrix& rho0) const override;
    std::vector<StepBranch> branches(const ChainState& state, int t) const override;
    ChainState average_step(const ChainState& state, int t) const override;
    DensityMatrix system_state(const ChainState& state) const override;

private:
    KrausSet kraus_;
    bool compound_;
    DensityMatrix mem0_;
};

class SlidingWindowProcess final : public SelectiveProcess {
public:
    /// Throws UnsupportedFeature when the schedule has persistent molecules:
    /// a molecule that never closes cannot be monitored.
    SlidingWindowProcess(const ChainModel& model, int t_max, const DensityMatrix& mem0 = default_memory_state());

    ChainState initial(const DensityMatrix& rho0) const override;
    std::vector<StepBranch> branches(const ChainState& state, int t) const override;
    ChainState average_step(const ChainState& state, int t) const override;
    DensityMatrix system_state(const ChainState& state) const override;

private:
    SlidingWindowConfig config_;
};

enum class Engine { kraus, sliding_window };

/// Kraus engine for the paper models, sliding window for custom ones (or on
/// request). t_max sizes the sliding-window schedule.
std::unique_ptr<SelectiveProcess> make_process(const ChainModel& model, int t_max,
                                               const DensityMatrix& mem0 = default_memory_state(),
                                               std::optional<Engine> engine = std::nullopt);

inline constexpr int kMaxEnumerationSteps = 20;
inline constexpr int kMaxExactEnumerationSteps = 16;
inline constexpr std::size_t kMaxBranches = std::size_t{1} << 20;

struct EnumerationResult {
    std::vector<TrajectoryRecord> branches;
    double pruned_mass = 0.0;
};

/// All outcome records of t_max steps with probability > prune_below.
/// t_max > 20 is rejected; beyond 16 steps prune_below must be positive.
/// Throws UnsupportedFeature when more than 2^20 branches survive.
EnumerationResult enumerate_branches(const SelectiveProcess& process, const DensityMatrix& rho0, int t_max,
                                     double prune_below = 0.0, bool keep_states = false);

/// Probability-weighted mean of the branches' final system states.
DensityMatrix branch_average(const EnumerationResult& result);

class TrajectoryRng {
public:
    TrajectoryRng(std::uint64_t seed, std::uint64_t index);
    double uniform();  // [0, 1)

private:
    std::mt19937_64 engine_;
};

TrajectoryRecord sample_trajectory(const SelectiveProcess& process, const DensityMatrix& rho0, int t_max,
                                   std::uint64_t seed, std::uint64_t index = 0, bool keep_states = false);

/// Trajectories 0..n-1 of `seed`, split over `threads` workers. The result
/// does not depend on the thread count.
std::vector<TrajectoryRecord> sample_ensemble(const SelectiveProcess& process, const DensityMatrix& rho0, int t_max,
                                              std::uint64_t seed, std::size_t n, unsigned threads = 1);

struct EnsembleStats {
    std::size_t n_samples = 0;
    DensityMatrix mean_state;
    std::vector<std::array<std::size_t, 2>> outcome_frequencies;  // per outcome position: counts of 0 and 1
    std::uint64_t rng_seed = 0;
};

/// Records must carry final states. Reduction runs in record order.
EnsembleStats ensemble_stats(const std::vector<TrajectoryRecord>& records, std::uint64_t seed);

/// {"outcomes":[...],"log_p":x}
std::string trajectory_json_line(const TrajectoryRecord& record);

}  // namespace nmchain
