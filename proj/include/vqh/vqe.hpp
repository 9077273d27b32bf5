// vqe.hpp
// The hybrid loop: an optimizer drives ansatz parameters against an Ising
// observable and every cost evaluation becomes an IterationRecord.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vqh/optimizers.hpp"
#include "vqh/quantum.hpp"
#include "vqh/qubo.hpp"

namespace vqh::vqe {

using nlohmann::json;
using opt::OptimizerName;
using quantum::Entanglement;

enum class InitialPoint { zeros, random };

inline std::string to_string(InitialPoint p) { return p == InitialPoint::zeros ? "zeros" : "random"; }

inline InitialPoint initial_point_from_string(const std::string& s) {
    if (s == "zeros") return InitialPoint::zeros;
    if (s == "random") return InitialPoint::random;
    throw std::invalid_argument("unknown initial_point: " + s);
}

struct VqeConfig {
    int reps = 1;
    Entanglement entanglement = Entanglement::linear;
    OptimizerName optimizer_name = OptimizerName::cobyla;
    int sequence_length = 1;
    int size = 12;
    std::string description;
    std::vector<int> iterations{100};
    std::string nextpathid = "0";

    long long shots = 0;  // 0 = exact probabilities
    std::uint64_t seed = 0;
    double transverse_field = 0.0;
    InitialPoint initial_point = InitialPoint::zeros;
    double spsa_a = 0.2;
    double spsa_c = 0.1;
    double cobyla_rhobeg = 1.0;
    double cobyla_rhoend = 1e-4;

    void validate() const {
        if (reps < 0) throw std::invalid_argument("reps must be non-negative");
        if (size < 1 || static_cast<std::size_t>(size) > quantum::kMaxQubits) {
            throw std::invalid_argument("size must be in [1, " + std::to_string(quantum::kMaxQubits) + "]");
        }
        if (sequence_length < 1) throw std::invalid_argument("sequence_length must be at least 1");
        if (iterations.size() != static_cast<std::size_t>(sequence_length)) {
            throw std::invalid_argument("iterations has " + std::to_string(iterations.size()) +
                                        " entries but sequence_length is " +
                                        std::to_string(sequence_length));
        }
        for (int it : iterations) {
            if (it < 1) throw std::invalid_argument("every iterations entry must be at least 1");
        }
        if (shots < 0) throw std::invalid_argument("shots must be non-negative");
        if (transverse_field != 0.0 && shots != 0) {
            throw std::invalid_argument("transverse_field needs exact mode (shots = 0)");
        }
        if (!(cobyla_rhobeg > 0.0) || !(cobyla_rhoend > 0.0) || cobyla_rhoend > cobyla_rhobeg) {
            throw std::invalid_argument("need 0 < cobyla_rhoend <= cobyla_rhobeg");
        }
        if (!(spsa_c > 0.0)) throw std::invalid_argument("spsa_c must be positive");
    }

    [[nodiscard]] quantum::AnsatzSpec ansatz() const {
        return {static_cast<std::size_t>(size), static_cast<std::size_t>(reps), entanglement};
    }
};

inline void to_json(json& j, const VqeConfig& c) {
    j = json{{"reps", c.reps},
             {"entanglement", quantum::to_string(c.entanglement)},
             {"optimizer_name", opt::to_string(c.optimizer_name)},
             {"sequence_length", c.sequence_length},
             {"size", c.size},
             {"description", c.description},
             {"iterations", c.iterations},
             {"nextpathid", c.nextpathid},
             {"shots", c.shots},
             {"seed", c.seed},
             {"transverse_field", c.transverse_field},
             {"initial_point", to_string(c.initial_point)},
             {"spsa_a", c.spsa_a},
             {"spsa_c", c.spsa_c},
             {"cobyla_rhobeg", c.cobyla_rhobeg},
             {"cobyla_rhoend", c.cobyla_rhoend}};
}

/// The eight original keys are required; the extensions fall back to defaults.
/// `iterations` may be a single integer, applied to every Hamiltonian.
inline void from_json(const json& j, VqeConfig& c) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const char* key : {"reps", "entanglement", "optimizer_name", "sequence_length", "size",
                            "description", "iterations", "nextpathid"}) {
        if (!j.contains(key)) throw std::invalid_argument(std::string("config is missing \"") + key + "\"");
    }
    VqeConfig out;
    out.reps = j.at("reps").get<int>();
    out.entanglement = quantum::entanglement_from_string(j.at("entanglement").get<std::string>());
    out.optimizer_name = opt::optimizer_from_string(j.at("optimizer_name").get<std::string>());
    out.sequence_length = j.at("sequence_length").get<int>();
    out.size = j.at("size").get<int>();
    out.description = j.at("description").get<std::string>();
    const json& it = j.at("iterations");
    if (it.is_number_integer()) {
        out.iterations.assign(static_cast<std::size_t>(std::max(out.sequence_length, 0)), it.get<int>());
    } else {
        out.iterations = it.get<std::vector<int>>();
    }
    const json& id = j.at("nextpathid");
    out.nextpathid = id.is_string() ? id.get<std::string>() : id.dump();
    out.shots = j.value("shots", out.shots);
    out.seed = j.value("seed", out.seed);
    out.transverse_field = j.value("transverse_field", out.transverse_field);
    if (j.contains("initial_point")) {
        out.initial_point = initial_point_from_string(j.at("initial_point").get<std::string>());
    }
    out.spsa_a = j.value("spsa_a", out.spsa_a);
    out.spsa_c = j.value("spsa_c", out.spsa_c);
    out.cobyla_rhobeg = j.value("cobyla_rhobeg", out.cobyla_rhobeg);
    out.cobyla_rhoend = j.value("cobyla_rhoend", out.cobyla_rhoend);
    c = std::move(out);
}

struct IterationRecord {
    std::size_t index = 0;
    std::vector<double> params;
    double energy = 0.0;
    quantum::SampleDistribution distribution;
    std::vector<double> marginals;
    std::string argmax;
};

inline void to_json(json& j, const IterationRecord& r) {
    j = json{{"index", r.index},
             {"params", r.params},
             {"energy", r.energy},
             {"shots", r.distribution.shots},
             {"distribution", r.distribution.probabilities},
             {"marginals", r.marginals},
             {"argmax", r.argmax}};
}

inline void from_json(const json& j, IterationRecord& r) {
    r.index = j.at("index").get<std::size_t>();
    r.params = j.at("params").get<std::vector<double>>();
    r.energy = j.at("energy").get<double>();
    r.distribution.shots = j.at("shots").get<std::size_t>();
    r.distribution.probabilities = j.at("distribution").get<std::map<std::string, double>>();
    r.marginals = j.at("marginals").get<std::vector<double>>();
    r.distribution.n_qubits = r.marginals.size();
    r.argmax = j.at("argmax").get<std::string>();
}

using RecordCallback = std::function<void(const IterationRecord&)>;

/// Thrown out of a run when a cost evaluation is not a finite number.
class NonFiniteCost : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunResult {
    std::vector<IterationRecord> records;
    std::vector<double> final_params;
    bool aborted = false;
};

struct RunOptions {
    /// Index given to the first record (records are numbered across segments).
    std::size_t first_index = 0;
    const std::atomic<bool>* cancel = nullptr;
};

namespace detail {

struct Cancelled {};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

inline std::vector<double> initial_parameters(const VqeConfig& cfg) {
    const std::size_t count = cfg.ansatz().parameter_count();
    std::vector<double> p(count, 0.0);
    if (cfg.initial_point == InitialPoint::random) {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
        for (double& v : p) v = u(rng);
    }
    return p;
}

/// Runs one optimization with `budget` cost evaluations at most. The optimizer
/// gets budget - 1 evaluations; the final parameters are then evaluated once
/// more (unless that was already the last evaluation) so the last record
/// always describes final_params.
inline RunResult run_vqe(const quantum::Observable& obs, const quantum::AnsatzSpec& ansatz,
                         const VqeConfig& cfg, std::span<const double> initial_params,
                         std::size_t budget, const RecordCallback& on_record = {},
                         const RunOptions& options = {}) {
    if (budget < 1) throw std::invalid_argument("evaluation budget must be at least 1");
    if (obs.n_qubits() != ansatz.n_qubits) {
        throw std::invalid_argument("observable acts on " + std::to_string(obs.n_qubits()) +
                                    " qubits but the ansatz has " + std::to_string(ansatz.n_qubits));
    }
    if (initial_params.size() != ansatz.parameter_count()) {
        throw std::invalid_argument("initial point has " + std::to_string(initial_params.size()) +
                                    " parameters, ansatz needs " +
                                    std::to_string(ansatz.parameter_count()));
    }
    if (cfg.shots > 0 && !obs.is_diagonal()) {
        throw std::invalid_argument("sampled mode needs a Z-only observable; use shots = 0");
    }

    RunResult result;
    auto evaluate = [&](std::span<const double> params) -> double {
        if (options.cancel != nullptr && options.cancel->load()) throw detail::Cancelled{};
        IterationRecord rec;
        rec.index = options.first_index + result.records.size();
        rec.params.assign(params.begin(), params.end());
        const quantum::StateVector state = quantum::evaluate_ansatz(ansatz, params);
        if (cfg.shots == 0) {
            rec.distribution = quantum::sample(state, 0, 0);
            rec.energy = quantum::expectation(state, obs);
        } else {
            rec.distribution = quantum::sample(state, cfg.shots, detail::splitmix64(cfg.seed + rec.index));
            rec.energy = quantum::sampled_expectation(rec.distribution, obs);
        }
        if (!std::isfinite(rec.energy)) {
            throw NonFiniteCost("cost evaluation " + std::to_string(rec.index) +
                                " returned a non-finite energy");
        }
        rec.marginals = quantum::marginals(rec.distribution);
        rec.argmax = quantum::argmax_state(rec.distribution);
        const double energy = rec.energy;
        result.records.push_back(std::move(rec));
        if (on_record) on_record(result.records.back());
        return energy;
    };

    const std::size_t opt_budget = budget - 1;
    try {
        opt::OptimizerResult o;
        switch (cfg.optimizer_name) {
            case OptimizerName::nft:
                o = opt::nft_minimize(evaluate, initial_params, opt_budget);
                break;
            case OptimizerName::spsa: {
                opt::SpsaOptions so;
                so.a = cfg.spsa_a;
                so.c = cfg.spsa_c;
                so.seed = cfg.seed;
                o = opt::spsa_minimize(evaluate, initial_params, opt_budget, so);
                break;
            }
            case OptimizerName::cobyla: {
                opt::CobylaOptions co;
                co.rhobeg = cfg.cobyla_rhobeg;
                co.rhoend = cfg.cobyla_rhoend;
                o = opt::cobyla_run(evaluate, initial_params, opt_budget, co);
                break;
            }
        }
        result.final_params = std::move(o.x);
        if (result.records.empty() || result.records.back().params != result.final_params) {
            evaluate(result.final_params);
        }
    } catch (const detail::Cancelled&) {
        result.aborted = true;
        if (result.records.empty()) {
            result.final_params.assign(initial_params.begin(), initial_params.end());
        } else {
            result.final_params = result.records.back().params;
        }
    }
    return result;
}

struct ExperimentResult {
    std::string id;
    VqeConfig config;
    qubo::HamiltonianSequence sequence;
    std::vector<std::vector<std::string>> operators;  // one list per Hamiltonian
    std::vector<IterationRecord> records;
    std::vector<double> final_params;
    std::vector<std::size_t> segment_boundaries;
    bool aborted = false;
};

/// Observable whose ground state encodes the QUBO minimum (energies are
/// 4 * Q(n) when the transverse field is zero).
inline quantum::Observable hamiltonian_for(const qubo::QuboProblem& q, double transverse_field) {
    return qubo::ising_to_observable(qubo::qubo_to_ising(q, transverse_field));
}

/// Runs every Hamiltonian in turn; each segment starts from the previous
/// segment's final parameters. Optimizer state is not carried over.
inline ExperimentResult run_sequence(const qubo::HamiltonianSequence& seq, const VqeConfig& cfg,
                                     const RecordCallback& on_record = {},
                                     const std::atomic<bool>* cancel = nullptr,
                                     std::span<const double> initial_params = {}) {
    cfg.validate();
    if (seq.entries.empty()) throw std::invalid_argument("empty Hamiltonian sequence");
    if (static_cast<std::size_t>(cfg.sequence_length) != seq.entries.size()) {
        throw std::invalid_argument("sequence_length is " + std::to_string(cfg.sequence_length) +
                                    " but h_setup defines " + std::to_string(seq.entries.size()) +
                                    " Hamiltonians");
    }
    for (const auto& q : seq.entries) {
        q.validate();
        if (q.size() != static_cast<std::size_t>(cfg.size)) {
            throw std::invalid_argument("config size is " + std::to_string(cfg.size) +
                                        " but the QUBO has " + std::to_string(q.size()) + " variables");
        }
    }

    ExperimentResult ex;
    ex.config = cfg;
    ex.sequence = seq;
    ex.sequence.budgets.assign(cfg.iterations.begin(), cfg.iterations.end());
    const quantum::AnsatzSpec ansatz = cfg.ansatz();
    std::vector<double> params = initial_params.empty()
                                     ? initial_parameters(cfg)
                                     : std::vector<double>(initial_params.begin(), initial_params.end());
    for (std::size_t k = 0; k < seq.entries.size(); ++k) {
        const quantum::Observable obs = hamiltonian_for(seq.entries[k], cfg.transverse_field);
        ex.operators.push_back(qubo::describe_operators(obs));
        RunOptions ro;
        ro.first_index = ex.records.size();
        ro.cancel = cancel;
        RunResult r = run_vqe(obs, ansatz, cfg, params, static_cast<std::size_t>(cfg.iterations[k]),
                              on_record, ro);
        if (!r.records.empty()) {
            ex.segment_boundaries.push_back(ex.records.size());
            for (auto& rec : r.records) ex.records.push_back(std::move(rec));
        }
        params = std::move(r.final_params);
        if (r.aborted) {
            ex.aborted = true;
            break;
        }
    }
    ex.final_params = std::move(params);
    return ex;
}

}  // namespace vqh::vqe
