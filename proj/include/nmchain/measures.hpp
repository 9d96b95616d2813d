// measures.hpp: correlation measures of a system+memory compound and the
// non-Markovianity report built on them.
//
// All entropies are in bits. The classical correlation maximizes over rank-1
// projective measurements of one qubit (the memory by default):
//   J = H(S) - sum_j p_j H(S | Pi_j).

#pragma once

#include "nmchain/chains.hpp"
#include "nmchain/channels.hpp"
#include "nmchain/matcore.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nmchain {

/// H(A) + H(B) - H(AB) of a two-qubit state, in bits.
double mutual_information(const DensityMatrix& rho);

/// Projector pair along the Bloch direction (theta, psi):
/// Pi0 = |n><n| with |n> = cos(theta/2)|0> + e^{i psi} sin(theta/2)|1>.
struct ProjectivePair {
    double theta = 0.0;
    double psi = 0.0;
    ComplexMatrix pi0;
    ComplexMatrix pi1;

    static ProjectivePair from_angles(double theta, double psi);
};

struct OptimizerOptions {
    int grid_theta = 64;   // theta in [0, pi], endpoints included
    int grid_psi = 128;    // psi in [0, 2 pi), endpoint excluded
    int refine_starts = 3;
    double simplex_tol = 1e-9;
    int max_iterations = 5000;
};

/// H(S) - sum_j p_j H(S | Pi_j) for the measurement `pair` on `measured_slot`.
double classical_correlation_at(const DensityMatrix& rho, const ProjectivePair& pair,
                                const std::string& measured_slot = "mem");

struct ClassicalCorrelation {
    double value;
    ProjectivePair basis;
};

/// Maximum over projective measurements of `measured_slot`: coarse grid, then
/// Nelder-Mead from the best grid points.
ClassicalCorrelation classical_correlation(const DensityMatrix& rho, const std::string& measured_slot = "mem",
                                           const OptimizerOptions& options = {});

struct DiscordResult {
    double mutual_info;
    double classical_J;
    double discord;  // raw, may be slightly negative from round-off
    ProjectivePair basis;
};

DiscordResult discord(const DensityMatrix& rho, const std::string& measured_slot = "mem",
                      const OptimizerOptions& options = {});

/// Values in [-1e-9, 0) are reported as 0.
double clamp_reported(double v);

enum class Classification { markovian, classical_nm, quantum_nm, undetermined };

const char* to_string(Classification c);

struct NMReport {
    int count_qubits = 0;
    std::optional<double> mutual_info;
    std::optional<double> classical_J;
    std::optional<double> discord;
    std::optional<ProjectivePair> argmax_basis;
    Classification classification = Classification::undetermined;
    std::optional<DensityMatrix> stationary;  // |mem, sys> compound, when one exists
    std::string note;
};

inline constexpr double kDiscordThreshold = 1e-6;

/// Count from the model's schedule; measures on the stationary compound of the
/// model started from rho0 (system) and mem0 (memory). Markov chains have no
/// memory and report zero correlations. Custom schedules report the count only.
NMReport nm_report(const ChainModel& model, const DensityMatrix& rho0,
                   const DensityMatrix& mem0 = default_memory_state(), double threshold = kDiscordThreshold,
                   const OptimizerOptions& options = {});

// ----------------------------------------------------------- divisibility

/// Cumulative reduced map rho0 -> rho_t of the system, by tomography of
/// evolve_system with the memory prepared in mem0.
LinearMap reduced_dynamics_map(const ChainModel& model, int t, const DensityMatrix& mem0 = default_memory_state());

struct DivisibilityRow {
    int t;
    Divisibility verdict;
    double min_choi_eig;
    double min_singular_value;
};

/// divisibility_step(M(t), M(t-1)) for t = 1..steps, with M(0) the identity.
std::vector<DivisibilityRow> divisibility_witness(const ChainModel& model, int steps,
                                                  const DensityMatrix& mem0 = default_memory_state(),
                                                  double tol_cp = kDefaultCpTolerance);

}  // namespace nmchain
