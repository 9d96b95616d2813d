#include "nmchain/measures.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <stdexcept>

namespace nmchain {

namespace {

using Mat2 = std::array<Complex, 4>;  // row-major (00, 01, 10, 11)

double h_bits(double p) {
    return p > 0.0 ? -p * std::log2(p) : 0.0;
}

// Entropy of m / tr(m) for a 2x2 Hermitian positive m.
double entropy2(const Mat2& m) {
    const double a = m[0].real();
    const double d = m[3].real();
    const double tr = a + d;
    if (!(tr > 0.0)) return 0.0;
    const double gap = std::sqrt((a - d) * (a - d) + 4.0 * std::norm(m[1]));
    double hi = 0.5 * (tr + gap) / tr;
    double lo = 0.5 * (tr - gap) / tr;
    if (lo < 0.0) lo = 0.0;  // round-off
    if (hi > 1.0) hi = 1.0;
    return h_bits(hi) + h_bits(lo);
}

// sigma(s, s') = sum_{a,b} w(b, a) rho(.) with `w` acting on the measured
// qubit; `measured` is the slot position (0 = most significant).
Mat2 reduce_other(const ComplexMatrix& rho, int measured, const Mat2& w) {
    Mat2 out{};
    for (int s = 0; s < 2; ++s) {
        for (int sp = 0; sp < 2; ++sp) {
            Complex acc{};
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) {
                    const int row = measured == 0 ? 2 * a + s : 2 * s + a;
                    const int col = measured == 0 ? 2 * b + sp : 2 * sp + b;
                    acc += w[2 * b + a] * rho(row, col);
                }
            }
            out[2 * s + sp] = acc;
        }
    }
    return out;
}

const Mat2 kIdentity2{Complex{1.0}, Complex{}, Complex{}, Complex{1.0}};

void require_two_qubits(const DensityMatrix& rho, const char* who) {
    if (rho.n_qubits() != 2) throw std::invalid_argument(fmt::format("{}: expected a two-qubit state", who));
}

struct Objective {
    const ComplexMatrix* rho;
    int measured;
    double h_s;
};

double correlation_at(const Objective& o, double theta, double psi) {
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    const Complex e = std::polar(1.0, psi);
    const Mat2 p0{Complex{c * c}, c * s * std::conj(e), c * s * e, Complex{s * s}};
    const Mat2 p1{Complex{s * s}, -c * s * std::conj(e), -c * s * e, Complex{c * c}};
    double cond = 0.0;
    for (const Mat2* p : {&p0, &p1}) {
        const Mat2 sigma = reduce_other(*o.rho, o.measured, *p);
        const double prob = sigma[0].real() + sigma[3].real();
        if (prob > 0.0) cond += prob * entropy2(sigma);
    }
    return o.h_s - cond;
}

Objective make_objective(const DensityMatrix& rho, const std::string& measured_slot) {
    const int measured = rho.slot_index(measured_slot);
    const Mat2 s = reduce_other(rho.matrix(), measured, kIdentity2);
    return {&rho.matrix(), measured, entropy2(s)};
}

double gsl_objective(const gsl_vector* x, void* params) {
    const auto* o = static_cast<const Objective*>(params);
    return -correlation_at(*o, gsl_vector_get(x, 0), gsl_vector_get(x, 1));
}

// Map arbitrary (theta, psi) to theta in [0, pi], psi in [0, 2 pi).
std::pair<double, double> canonical_angles(double theta, double psi) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    theta = std::fmod(theta, two_pi);
    if (theta < 0.0) theta += two_pi;
    if (theta > std::numbers::pi) {
        theta = two_pi - theta;
        psi += std::numbers::pi;
    }
    psi = std::fmod(psi, two_pi);
    if (psi < 0.0) psi += two_pi;
    return {theta, psi};
}

struct Candidate {
    double value;
    double theta;
    double psi;
};

Candidate nelder_mead(const Objective& o, const Candidate& start, double step_theta, double step_psi,
                      const OptimizerOptions& options) {
    static const bool handler_off = [] {
        gsl_set_error_handler_off();
        return true;
    }();
    (void)handler_off;

    gsl_multimin_function fn{&gsl_objective, 2, const_cast<Objective*>(&o)};
    gsl_vector* x = gsl_vector_alloc(2);
    gsl_vector* step = gsl_vector_alloc(2);
    gsl_vector_set(x, 0, start.theta);
    gsl_vector_set(x, 1, start.psi);
    gsl_vector_set(step, 0, step_theta);
    gsl_vector_set(step, 1, step_psi);
    gsl_multimin_fminimizer* nm = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2);
    gsl_multimin_fminimizer_set(nm, &fn, x, step);

    int status = GSL_CONTINUE;
    for (int it = 0; it < options.max_iterations && status == GSL_CONTINUE; ++it) {
        if (gsl_multimin_fminimizer_iterate(nm) != GSL_SUCCESS) break;
        status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(nm), options.simplex_tol);
    }
    Candidate best{-nm->fval, gsl_vector_get(nm->x, 0), gsl_vector_get(nm->x, 1)};
    gsl_multimin_fminimizer_free(nm);
    gsl_vector_free(step);
    gsl_vector_free(x);
    return best;
}

}  // namespace

double mutual_information(const DensityMatrix& rho) {
    require_two_qubits(rho, "mutual_information");
    const auto& l = rho.slot_labels();
    const double ha = von_neumann_entropy(partial_trace(rho, {l[0]}));
    const double hb = von_neumann_entropy(partial_trace(rho, {l[1]}));
    return ha + hb - von_neumann_entropy(rho);
}

ProjectivePair ProjectivePair::from_angles(double theta, double psi) {
    ComplexVector n(2);
    n << std::cos(0.5 * theta), std::polar(std::sin(0.5 * theta), psi);
    ProjectivePair p;
    p.theta = theta;
    p.psi = psi;
    p.pi0 = n * n.adjoint();
    p.pi1 = ComplexMatrix::Identity(2, 2) - p.pi0;
    return p;
}

double classical_correlation_at(const DensityMatrix& rho, const ProjectivePair& pair,
                                const std::string& measured_slot) {
    require_two_qubits(rho, "classical_correlation_at");
    return correlation_at(make_objective(rho, measured_slot), pair.theta, pair.psi);
}

ClassicalCorrelation classical_correlation(const DensityMatrix& rho, const std::string& measured_slot,
                                           const OptimizerOptions& options) {
    require_two_qubits(rho, "classical_correlation");
    if (options.grid_theta < 2 || options.grid_psi < 1 || options.refine_starts < 0) {
        throw std::invalid_argument("classical_correlation: bad optimizer grid");
    }
    const Objective o = make_objective(rho, measured_slot);
    const double dtheta = std::numbers::pi / (options.grid_theta - 1);
    const double dpsi = 2.0 * std::numbers::pi / options.grid_psi;

    std::vector<Candidate> grid;
    grid.reserve(static_cast<std::size_t>(options.grid_theta) * options.grid_psi);
    for (int i = 0; i < options.grid_theta; ++i) {
        for (int j = 0; j < options.grid_psi; ++j) {
            const double theta = i * dtheta;
            const double psi = j * dpsi;
            grid.push_back({correlation_at(o, theta, psi), theta, psi});
        }
    }
    // Best first; ties keep grid order.
    std::stable_sort(grid.begin(), grid.end(), [](const Candidate& a, const Candidate& b) { return a.value > b.value; });

    Candidate best = grid.front();
    const int starts = std::min<int>(options.refine_starts, static_cast<int>(grid.size()));
    for (int k = 0; k < starts; ++k) {
        const Candidate refined = nelder_mead(o, grid[k], dtheta, dpsi, options);
        if (refined.value > best.value) best = refined;
    }
    const auto [theta, psi] = canonical_angles(best.theta, best.psi);
    return {best.value, ProjectivePair::from_angles(theta, psi)};
}

DiscordResult discord(const DensityMatrix& rho, const std::string& measured_slot, const OptimizerOptions& options) {
    require_two_qubits(rho, "discord");
    const double i = mutual_information(rho);
    ClassicalCorrelation j = classical_correlation(rho, measured_slot, options);
    return {i, j.value, i - j.value, std::move(j.basis)};
}

double clamp_reported(double v) {
    return (v < 0.0 && v >= -1e-9) ? 0.0 : v;
}

const char* to_string(Classification c) {
    switch (c) {
        case Classification::markovian: return "markovian";
        case Classification::classical_nm: return "classical-nm";
        case Classification::quantum_nm: return "quantum-nm";
        case Classification::undetermined: return "undetermined";
    }
    return "?";
}

NMReport nm_report(const ChainModel& model, const DensityMatrix& rho0, const DensityMatrix& mem0, double threshold,
                   const OptimizerOptions& options) {
    model.validate();
    NMReport r;
    const CollisionSchedule sched = model.kind == ModelKind::Custom ? *model.schedule : model.collision_schedule(12);
    r.count_qubits = satellite_count(sched);

    if (model.kind == ModelKind::MarkovXOR || (model.kind == ModelKind::Custom && r.count_qubits == 0)) {
        r.mutual_info = 0.0;
        r.classical_J = 0.0;
        r.discord = 0.0;
        r.argmax_basis = ProjectivePair::from_angles(0.0, 0.0);
        r.classification = Classification::markovian;
        r.note = "no satellite memory";
        return r;
    }
    if (model.kind == ModelKind::Custom) {
        r.classification = Classification::undetermined;
        r.note = "measures not computed for custom schedules";
        return r;
    }

    DensityMatrix st = [&] {
        try {
            return stationary_state(model, rho0, mem0);
        } catch (const std::domain_error&) {
            auto it = stationary_state_numeric(model, tensor(mem0.relabeled({"mem"}), rho0.relabeled(kSystemSlots)));
            if (!it.converged) r.note = fmt::format("power iteration not converged after {} steps", it.steps);
            return std::move(it.state);
        }
    }();
    const DiscordResult d = discord(st, "mem", options);
    r.mutual_info = d.mutual_info;
    r.classical_J = d.classical_J;
    r.discord = d.discord;
    r.argmax_basis = d.basis;
    r.stationary = std::move(st);
    if (d.discord > threshold) {
        r.classification = Classification::quantum_nm;
    } else if (r.count_qubits > 0) {
        r.classification = Classification::classical_nm;
    } else {
        r.classification = Classification::markovian;
    }
    return r;
}

LinearMap reduced_dynamics_map(const ChainModel& model, int t, const DensityMatrix& mem0) {
    return map_tomography([&](const DensityMatrix& r) { return evolve_system(model, r, t, mem0); }, 2, kSystemSlots);
}

std::vector<DivisibilityRow> divisibility_witness(const ChainModel& model, int steps, const DensityMatrix& mem0,
                                                  double tol_cp) {
    if (steps < 1) throw std::invalid_argument("divisibility_witness: need at least one step");
    std::vector<DivisibilityRow> rows;
    LinearMap prev = identity_map(2);
    for (int t = 1; t <= steps; ++t) {
        LinearMap cur = reduced_dynamics_map(model, t, mem0);
        const DivisibilityStep s = divisibility_step(cur, prev, tol_cp);
        rows.push_back({t, s.verdict, s.min_choi_eig, s.min_singular_value});
        prev = std::move(cur);
    }
    return rows;
}

}  // namespace nmchain
