#include "nmchain/cli.hpp"

#include "nmchain/chains.hpp"
#include "nmchain/errors.hpp"
#include "nmchain/io.hpp"
#include "nmchain/measures.hpp"
#include "nmchain/trajectories.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fmt/format.h>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>

namespace nmchain {

namespace {

struct RunConfig {
    std::string model = "markov-xor";
    double phi = std::numbers::pi / 6.0;
    int steps = 10;
    std::string initial = "0.5,0.5,0.5,0";
    std::string memory = "1,0,0,0";
    std::string schedule_path;
    std::string figure;
    std::string gate = "xor";
    std::uint64_t seed = 1;
    std::size_t samples = 1000;
    std::string format;
    double tol_cp = kDefaultCpTolerance;
    int threads = 0;
    std::string engine = "auto";
    bool exact = false;
    double prune = 0.0;
    std::string dump;
    int horizon = 12;
    std::string out_path;
};

// --------------------------------------------------------------- building

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument(fmt::format("cannot read '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

UnitaryGate gate_by_name(const std::string& name) {
    if (name == "xor") return xor_gate();
    if (name == "sqrt-xor") return sqrt_xor_gate();
    if (name == "swap") return swap_gate();
    throw std::invalid_argument(fmt::format("unknown gate '{}'", name));
}

ChainModel build_model(const RunConfig& c) {
    const ModelKind kind = parse_model_kind(c.model);
    switch (kind) {
        case ModelKind::MarkovXOR: return ChainModel::markov_xor(c.phi);
        case ModelKind::RepeatedXOR: return ChainModel::repeated_xor(c.phi);
        case ModelKind::DistributedSqrtXOR: return ChainModel::sqrt_xor(c.phi);
        case ModelKind::Custom: break;
    }
    if (c.schedule_path.empty() == c.figure.empty()) {
        throw std::invalid_argument("--model custom needs exactly one of --schedule or --figure");
    }
    CollisionSchedule sched = c.schedule_path.empty() ? make_schedule(parse_figure(c.figure), c.steps)
                                                      : schedule_from_json(read_file(c.schedule_path));
    return ChainModel::custom(c.phi, gate_by_name(c.gate), std::move(sched));
}

unsigned thread_count(const RunConfig& c) {
    if (c.threads > 0) return static_cast<unsigned>(c.threads);
    if (const char* env = std::getenv("NMCHAIN_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1 || v > 1024) {
            throw std::invalid_argument(fmt::format("NMCHAIN_THREADS='{}' is not a thread count in [1, 1024]", env));
        }
        return static_cast<unsigned>(v);
    }
    return 1;
}

bool want_csv(const RunConfig& c, const char* default_format) {
    const std::string f = c.format.empty() ? default_format : c.format;
    return f == "csv";
}

// --------------------------------------------------------------- commands

void cmd_simulate(const RunConfig& c, std::ostream& out) {
    const ChainModel model = build_model(c);
    const DensityMatrix rho0 = parse_qubit_state(c.initial, "sys");
    const DensityMatrix mem0 = parse_qubit_state(c.memory, "mem");
    const bool csv = want_csv(c, "json");
    const bool compound = model.has_embedding();

    if (csv) {
        out << "t,rho00,rho11,re01,im01,abs01";
        if (compound) out << ",delta_re,delta_im,abs_delta";
        out << '\n';
    }
    auto emit = [&](int t, const DensityMatrix& sys, const std::optional<DensityMatrix>& comp) {
        if (csv) {
            out << t << ',' << format_double(sys(0, 0).real()) << ',' << format_double(sys(1, 1).real()) << ','
                << format_double(sys(0, 1).real()) << ',' << format_double(sys(0, 1).imag()) << ','
                << format_double(std::abs(sys(0, 1)));
            if (comp) {
                const Complex d = delta(*comp);
                out << ',' << format_double(d.real()) << ',' << format_double(d.imag()) << ','
                    << format_double(std::abs(d));
            }
            out << '\n';
            return;
        }
        out << "{\"t\":" << t << ",\"rho_system\":" << matrix_json(sys.matrix());
        if (comp) {
            out << ",\"rho_compound\":" << matrix_json(comp->matrix()) << ",\"delta\":" << complex_json(delta(*comp));
        }
        out << "}\n";
    };

    switch (model.kind) {
        case ModelKind::MarkovXOR: {
            DensityMatrix cur = rho0;
            emit(0, cur, std::nullopt);
            for (int t = 1; t <= c.steps; ++t) {
                cur = markov_xor_step(cur, model.phi);
                emit(t, cur, std::nullopt);
            }
            break;
        }
        case ModelKind::RepeatedXOR:
        case ModelKind::DistributedSqrtXOR: {
            const EmbeddedChain chain(model);
            DensityMatrix cur = tensor(mem0, rho0);
            emit(0, rho0, cur);
            for (int t = 1; t <= c.steps; ++t) {
                cur = chain.step(cur);
                check_density_invariants(cur.matrix());
                emit(t, partial_trace(cur, {"sys"}), cur);
            }
            break;
        }
        case ModelKind::Custom: {
            const SlidingWindowConfig config = sliding_window_config(model, c.steps, mem0);
            ChainState cur = initial_chain_state(rho0);
            emit(0, rho0, std::nullopt);
            for (int t = 1; t <= c.steps; ++t) {
                cur = sliding_window_step(cur, config, t);
                check_density_invariants(cur.joint.matrix());
                emit(t, system_marginal(cur), std::nullopt);
            }
            break;
        }
    }
}

std::string optional_number(const std::optional<double>& v) {
    return v ? json_number(clamp_reported(*v)) : "null";
}

void cmd_measures(const RunConfig& c, std::ostream& out) {
    const ChainModel model = build_model(c);
    const DensityMatrix rho0 = parse_qubit_state(c.initial, "sys");
    const DensityMatrix mem0 = parse_qubit_state(c.memory, "mem");
    const NMReport r = nm_report(model, rho0, mem0);

    if (want_csv(c, "json")) {
        auto cell = [](const std::optional<double>& v) { return v ? format_double(clamp_reported(*v)) : std::string(); };
        out << "model,phi,count_qubits,mutual_info,classical_J,discord,classification,theta,psi\n";
        out << c.model << ',' << format_double(c.phi) << ',' << r.count_qubits << ',' << cell(r.mutual_info) << ','
            << cell(r.classical_J) << ',' << cell(r.discord) << ',' << to_string(r.classification) << ','
            << (r.argmax_basis ? format_double(r.argmax_basis->theta) : "") << ','
            << (r.argmax_basis ? format_double(r.argmax_basis->psi) : "") << '\n';
        return;
    }
    out << "{\"model\":" << json_string(c.model) << ",\"phi\":" << json_number(c.phi)
        << ",\"count_qubits\":" << r.count_qubits << ",\"mutual_info\":" << optional_number(r.mutual_info)
        << ",\"classical_J\":" << optional_number(r.classical_J) << ",\"discord\":" << optional_number(r.discord)
        << ",\"classification\":" << json_string(to_string(r.classification)) << ",\"basis\":";
    if (r.argmax_basis) {
        out << "{\"theta\":" << json_number(r.argmax_basis->theta) << ",\"psi\":" << json_number(r.argmax_basis->psi)
            << '}';
    } else {
        out << "null";
    }
    out << ",\"stationary\":" << (r.stationary ? matrix_json(r.stationary->matrix()) : "null");
    out << ",\"note\":" << json_string(r.note) << "}\n";
}

void cmd_divisibility(const RunConfig& c, std::ostream& out) {
    if (!(c.tol_cp >= 0.0)) throw std::invalid_argument("--tol-cp must be >= 0");
    const ChainModel model = build_model(c);
    const DensityMatrix mem0 = parse_qubit_state(c.memory, "mem");
    const auto rows = divisibility_witness(model, c.steps, mem0, c.tol_cp);
    const bool csv = want_csv(c, "csv");
    if (csv) out << "t,exists,min_choi_eig\n";
    for (const auto& r : rows) {
        if (csv) {
            out << r.t << ',' << to_string(r.verdict) << ',' << format_double(r.min_choi_eig) << '\n';
        } else {
            out << "{\"t\":" << r.t << ",\"exists\":" << json_string(to_string(r.verdict))
                << ",\"min_choi_eig\":" << json_number(r.min_choi_eig)
                << ",\"min_singular_value\":" << json_number(r.min_singular_value) << "}\n";
        }
    }
}

void cmd_trajectories(const RunConfig& c, std::ostream& out) {
    if (want_csv(c, "json")) throw std::invalid_argument("trajectories: only --format json is supported");
    const ChainModel model = build_model(c);
    const DensityMatrix rho0 = parse_qubit_state(c.initial, "sys");
    const DensityMatrix mem0 = parse_qubit_state(c.memory, "mem");
    std::optional<Engine> engine;
    if (c.engine == "kraus") engine = Engine::kraus;
    if (c.engine == "sliding") engine = Engine::sliding_window;
    const auto process = make_process(model, c.steps, mem0, engine);

    ChainState avg = process->initial(rho0);
    for (int t = 1; t <= c.steps; ++t) avg = process->average_step(avg, t);
    const DensityMatrix nonselective = process->system_state(avg);

    std::ofstream dump_file;
    if (!c.dump.empty()) {
        dump_file.open(c.dump);
        if (!dump_file) throw std::invalid_argument(fmt::format("cannot write '{}'", c.dump));
    }
    std::ostream& records_out = c.dump.empty() ? out : dump_file;

    if (c.exact) {
        const EnumerationResult res = enumerate_branches(*process, rho0, c.steps, c.prune);
        for (const auto& b : res.branches) records_out << trajectory_json_line(b) << '\n';
        const DensityMatrix mean = branch_average(res);
        out << "{\"summary\":{\"mode\":\"exact\",\"steps\":" << c.steps << ",\"branches\":" << res.branches.size()
            << ",\"pruned_mass\":" << json_number(res.pruned_mass) << ",\"mean_state\":" << matrix_json(mean.matrix())
            << ",\"nonselective_state\":" << matrix_json(nonselective.matrix())
            << ",\"trace_distance\":" << json_number(trace_norm_distance(mean, nonselective)) << "}}\n";
        return;
    }

    if (c.samples < 1) throw std::invalid_argument("--samples must be >= 1");
    const auto records = sample_ensemble(*process, rho0, c.steps, c.seed, c.samples, thread_count(c));
    for (const auto& r : records) records_out << trajectory_json_line(r) << '\n';
    const EnsembleStats stats = ensemble_stats(records, c.seed);
    out << "{\"summary\":{\"mode\":\"sample\",\"steps\":" << c.steps << ",\"n_samples\":" << stats.n_samples
        << ",\"seed\":" << stats.rng_seed << ",\"mean_state\":" << matrix_json(stats.mean_state.matrix())
        << ",\"nonselective_state\":" << matrix_json(nonselective.matrix())
        << ",\"trace_distance\":" << json_number(trace_norm_distance(stats.mean_state, nonselective))
        << ",\"outcome_frequencies\":[";
    for (std::size_t k = 0; k < stats.outcome_frequencies.size(); ++k) {
        if (k) out << ',';
        out << '[' << stats.outcome_frequencies[k][0] << ',' << stats.outcome_frequencies[k][1] << ']';
    }
    out << "]}}\n";
}

void cmd_schedule(const RunConfig& c, std::ostream& out) {
    if (want_csv(c, "json")) throw std::invalid_argument("schedule: only --format json is supported");
    const ScheduleFigure figure = parse_figure(c.figure);
    const CollisionSchedule sched = make_schedule(figure, c.horizon);
    nlohmann::json doc = nlohmann::json::parse(schedule_to_json(sched));
    doc["figure"] = to_string(figure);
    doc["satellite_count"] = satellite_count(sched);
    doc["max_open_molecules"] = max_open_molecules(sched);
    const std::string text = doc.dump();
    if (!c.out_path.empty()) {
        std::ofstream f(c.out_path);
        if (!f) throw std::invalid_argument(fmt::format("cannot write '{}'", c.out_path));
        f << text << '\n';
    }
    out << text << '\n';
}

// ------------------------------------------------------------------ flags

void add_model_flags(CLI::App* sub, RunConfig& c) {
    sub->add_option("--model", c.model, "markov-xor | repeated-xor | sqrt-xor | custom")
        ->check(CLI::IsMember({"markov-xor", "repeated-xor", "sqrt-xor", "custom"}))
        ->capture_default_str();
    sub->add_option("--phi", c.phi, "molecule preparation angle in radians")->capture_default_str();
    sub->add_option("--steps", c.steps, "number of collision steps")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_option("--memory", c.memory, "memory state p00,p11,re01,im01")->capture_default_str();
    sub->add_option("--schedule", c.schedule_path, "schedule JSON file (custom model)");
    sub->add_option("--figure", c.figure, "canonical schedule 1a | 1b | 1d | 5 (custom model)");
    sub->add_option("--gate", c.gate, "collision gate of the custom model: xor | sqrt-xor | swap")
        ->check(CLI::IsMember({"xor", "sqrt-xor", "swap"}))
        ->capture_default_str();
    sub->add_option("--format", c.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
}

void add_initial_flag(CLI::App* sub, RunConfig& c) {
    sub->add_option("--initial", c.initial, "initial system state p00,p11,re01,im01")->capture_default_str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"nmchain: collisional qubit chains, their satellite-memory embeddings and non-Markovianity measures",
                 "nmchain"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "per-step system (and compound) states");
    add_model_flags(sim, c);
    add_initial_flag(sim, c);

    auto* meas = app.add_subcommand("measures", "satellite count, mutual information, classical correlation, discord");
    add_model_flags(meas, c);
    add_initial_flag(meas, c);

    auto* div = app.add_subcommand("divisibility", "per-step CP-divisibility witness of the reduced system map");
    add_model_flags(div, c);
    div->add_option("--tol-cp", c.tol_cp, "tolerance on the minimal Choi eigenvalue")->capture_default_str();

    auto* traj = app.add_subcommand("trajectories", "selective chains: sampled or enumerated outcome records");
    add_model_flags(traj, c);
    add_initial_flag(traj, c);
    traj->add_option("--seed", c.seed, "64-bit RNG seed")->capture_default_str();
    traj->add_option("--samples", c.samples, "number of sampled trajectories")->capture_default_str();
    traj->add_option("--threads", c.threads, "sampling threads (fallback: NMCHAIN_THREADS, then 1)")
        ->check(CLI::Range(1, 1024));
    traj->add_flag("--exact", c.exact, "enumerate all branches instead of sampling");
    traj->add_option("--prune", c.prune, "drop branches with probability <= this (with --exact)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    traj->add_option("--engine", c.engine, "auto | kraus | sliding")
        ->check(CLI::IsMember({"auto", "kraus", "sliding"}))
        ->capture_default_str();
    traj->add_option("--dump", c.dump, "write the JSON-lines records here instead of stdout");

    auto* sched = app.add_subcommand("schedule", "canonical collision schedules");
    sched->add_option("--figure", c.figure, "1a | 1b | 1d | 5")->required();
    sched->add_option("--horizon", c.horizon, "number of steps")->check(CLI::NonNegativeNumber)->capture_default_str();
    sched->add_option("--format", c.format, "json")->check(CLI::IsMember({"json", "csv"}));
    sched->add_option("--out", c.out_path, "also write the schedule to this file");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (!std::isfinite(c.phi)) throw std::invalid_argument("--phi must be finite");
        if (sim->parsed()) cmd_simulate(c, out);
        if (meas->parsed()) cmd_measures(c, out);
        if (div->parsed()) cmd_divisibility(c, out);
        if (traj->parsed()) cmd_trajectories(c, out);
        if (sched->parsed()) cmd_schedule(c, out);
    } catch (const InvariantViolation& e) {
        err << "error: numerical invariant violated: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const UnsupportedFeature& e) {
        err << "error: unsupported: " << e.what() << '\n';
        return kExitUnsupported;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}

}  // namespace nmchain
