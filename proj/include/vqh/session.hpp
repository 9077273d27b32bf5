// session.hpp
// Session folder layout, experiment persistence and the interactive command
// loop.
//
// Layout under <SESSIONPATH>_Data/:
//   Data_<id>/h_setup.csv        QUBO text the run used
//   Data_<id>/vqe_conf.json      config snapshot
//   Data_<id>/operators.json     Pauli strings, one list per Hamiltonian
//   Data_<id>/raw_results.json   per-iteration records (distributions included)
//   Data_<id>/marginals.csv      iteration, one column per label
//   Data_<id>/energies.csv       iteration, energy
//   Data_<id>/states.csv         iteration, most probable bitstring
//   Data_<id>/meta.json          segment boundaries, final params, aborted flag
//   render_<id>_<type>.wav       written by map / mapfile

#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "vqh/api.hpp"
#include "vqh/book.hpp"
#include "vqh/osc.hpp"
#include "vqh/qubo.hpp"
#include "vqh/sonify.hpp"
#include "vqh/vqe.hpp"
#include "vqh/wav.hpp"

namespace vqh::session {

namespace fs = std::filesystem;
using nlohmann::json;

inline const std::vector<std::string> kDatasetFiles{"h_setup.csv",      "vqe_conf.json", "operators.json",
                                                   "raw_results.json", "marginals.csv", "energies.csv",
                                                   "states.csv",       "meta.json"};

inline constexpr int kIdWidth = 3;

inline std::string format_id(long long id) {
    std::ostringstream os;
    os << std::setw(kIdWidth) << std::setfill('0') << id;
    return os.str();
}

/// Accepts "7" or "007"; throws on anything else.
inline long long parse_id(const std::string& text) {
    std::size_t used = 0;
    long long id = -1;
    try {
        id = std::stoll(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size() || id < 0) throw std::invalid_argument("bad experiment id '" + text + "'");
    return id;
}

enum class Platform { local };
enum class Protocol { basis };

inline Platform platform_from_string(const std::string& s) {
    if (s == "local") return Platform::local;
    throw std::invalid_argument("unknown platform '" + s + "' (supported: local)");
}

inline Protocol protocol_from_string(const std::string& s) {
    if (s == "basis") return Protocol::basis;
    throw std::invalid_argument("unknown protocol '" + s + "' (supported: basis)");
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace detail {

inline void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
    if (!f) throw std::runtime_error("failed writing " + path.string());
}

inline std::string read_text(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

inline json read_json(const fs::path& path) { return json::parse(read_text(path)); }

inline std::ostringstream csv_stream() {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    return os;
}

}  // namespace detail

inline void write_dataset(const fs::path& dir, const vqe::ExperimentResult& ex, const std::string& h_setup_text) {
    fs::create_directories(dir);
    detail::write_text(dir / "h_setup.csv", h_setup_text);
    detail::write_text(dir / "vqe_conf.json", json(ex.config).dump(2) + "\n");
    detail::write_text(dir / "operators.json", json(ex.operators).dump(2) + "\n");
    detail::write_text(dir / "raw_results.json", json(ex.records).dump() + "\n");

    const std::vector<std::string> labels =
        ex.sequence.entries.empty() ? std::vector<std::string>{} : ex.sequence.entries.front().labels;
    auto marg = detail::csv_stream();
    marg << "iteration";
    for (const auto& l : labels) marg << ',' << l;
    marg << '\n';
    auto energies = detail::csv_stream();
    energies << "iteration,energy\n";
    auto states = detail::csv_stream();
    states << "iteration,state\n";
    for (const auto& r : ex.records) {
        marg << r.index;
        for (double v : r.marginals) marg << ',' << v;
        marg << '\n';
        energies << r.index << ',' << r.energy << '\n';
        states << r.index << ',' << r.argmax << '\n';
    }
    detail::write_text(dir / "marginals.csv", marg.str());
    detail::write_text(dir / "energies.csv", energies.str());
    detail::write_text(dir / "states.csv", states.str());

    const json meta{{"id", ex.id},
                    {"segment_boundaries", ex.segment_boundaries},
                    {"final_params", ex.final_params},
                    {"aborted", ex.aborted},
                    {"records", ex.records.size()}};
    detail::write_text(dir / "meta.json", meta.dump(2) + "\n");
}

inline vqe::ExperimentResult load_dataset(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw std::runtime_error("no dataset at " + dir.string());
    vqe::ExperimentResult ex;
    ex.config = detail::read_json(dir / "vqe_conf.json").get<vqe::VqeConfig>();
    ex.sequence = qubo::parse_h_setup(detail::read_text(dir / "h_setup.csv"));
    ex.operators = detail::read_json(dir / "operators.json").get<std::vector<std::vector<std::string>>>();
    ex.records = detail::read_json(dir / "raw_results.json").get<std::vector<vqe::IterationRecord>>();
    const json meta = detail::read_json(dir / "meta.json");
    ex.id = meta.at("id").get<std::string>();
    ex.segment_boundaries = meta.at("segment_boundaries").get<std::vector<std::size_t>>();
    ex.final_params = meta.at("final_params").get<std::vector<double>>();
    ex.aborted = meta.at("aborted").get<bool>();
    return ex;
}

// ---------------------------------------------------------------------------
// Session
// ---------------------------------------------------------------------------

struct SessionOptions {
    std::string session_path = "Session";  // folder becomes <session_path>_Data
    fs::path workdir = ".";                 // holds h_setup.csv and vqe_conf.json
    Platform platform = Platform::local;
    Protocol protocol = Protocol::basis;
    std::optional<osc::Target> osc_target;
    std::string api_url;  // empty: do not post books
    api::PostOptions post;
    sonify::MappingConfig mapping;
};

class Busy : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Session {
public:
    explicit Session(SessionOptions opts, std::ostream& out) : opts_(std::move(opts)), out_(out) {
        fs::path data(opts_.session_path + "_Data");
        dir_ = data.is_absolute() ? data : opts_.workdir / data;
        fs::create_directories(dir_);
        for (const auto& entry : fs::directory_iterator(dir_)) {
            const std::string name = entry.path().filename().string();
            if (!entry.is_directory() || name.rfind("Data_", 0) != 0) continue;
            try {
                next_id_ = std::max(next_id_, parse_id(name.substr(5)) + 1);
            } catch (const std::invalid_argument&) {
            }
        }
        if (opts_.osc_target) {
            emitter_ = std::make_unique<osc::Emitter>(*opts_.osc_target, opts_.mapping.iteration_rate,
                                                      [this](const std::string& m) { say("osc: " + m); });
        }
    }

    ~Session() { shutdown(); }

    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    [[nodiscard]] const fs::path& data_dir() const noexcept { return dir_; }
    [[nodiscard]] fs::path dataset_dir(const std::string& id) const { return dir_ / ("Data_" + id); }
    [[nodiscard]] fs::path render_path(const std::string& id, const std::string& type) const {
        return dir_ / ("render_" + id + "_" + type + ".wav");
    }

    /// SSE hub for live records; may be null.
    void attach_hub(api::EventHub* hub) {
        std::lock_guard lock(mutex_);
        hub_ = hub;
    }

    [[nodiscard]] osc::Emitter* emitter() noexcept { return emitter_.get(); }

    [[nodiscard]] bool running() const {
        std::lock_guard lock(mutex_);
        return running_;
    }

    [[nodiscard]] std::optional<vqe::ExperimentResult> last_experiment() const {
        std::lock_guard lock(mutex_);
        return last_;
    }

    /// Reads the working-directory files, applies `overrides` (a JSON merge
    /// patch on the config) and starts the run on the worker. Returns the id.
    std::string start_run(const json& overrides = json::object()) {
        std::lock_guard lock(mutex_);
        if (running_) throw Busy("a run is already in progress");
        const std::string text = detail::read_text(opts_.workdir / "h_setup.csv");
        const qubo::HamiltonianSequence seq = qubo::parse_h_setup(text);
        json conf = detail::read_json(opts_.workdir / "vqe_conf.json");
        if (!overrides.is_null() && !overrides.empty()) conf.merge_patch(overrides);
        const auto cfg = conf.get<vqe::VqeConfig>();
        cfg.validate();
        long long seed_id = 0;
        try {
            seed_id = parse_id(cfg.nextpathid);
        } catch (const std::invalid_argument&) {
        }
        const std::string id = format_id(std::max(next_id_, seed_id));
        next_id_ = std::max(next_id_, seed_id) + 1;

        if (worker_.joinable()) worker_.join();
        cancel_ = false;
        running_ = true;
        worker_ = std::thread([this, id, text, seq, cfg] { run_worker(id, text, seq, cfg); });
        return id;
    }

    /// Blocks until the current run (if any) has been persisted.
    void wait() {
        std::thread t;
        {
            std::lock_guard lock(mutex_);
            t = std::move(worker_);
        }
        if (t.joinable()) t.join();
    }

    void cancel_run() { cancel_ = true; }

    /// Halts OSC emission; a running optimization continues.
    void stop_sound() {
        if (emitter_) emitter_->stop();
    }

    void shutdown() {
        cancel_ = true;
        wait();
    }

    /// Renders the experiment and writes render_<id>_<type>.wav. Starts OSC
    /// playback if a target is configured.
    fs::path render(const vqe::ExperimentResult& ex, const std::string& type) {
        sonify::MappingConfig mc = opts_.mapping;
        mc.mapping = sonify::mapping_from_string(type);
        const sonify::ControlStreams streams = sonify::basis_protocol(ex);
        const audio::AudioBuffer buf = sonify::render(streams, mc);
        const fs::path path = render_path(ex.id, type);
        audio::write_wav(buf, path.string());
        if (emitter_) {
            emitter_->resume();
            emitter_->play(streams);
        }
        return path;
    }

    fs::path map(const std::string& type) {
        const auto ex = last_experiment();
        if (!ex) throw std::runtime_error("no experiment in memory; run runvqe or use mapfile");
        return render(*ex, type);
    }

    fs::path mapfile(const std::string& id_text, const std::string& type) {
        const std::string id = format_id(parse_id(id_text));
        const fs::path dir = dataset_dir(id);
        if (!fs::is_directory(dir)) throw std::runtime_error("unknown id " + id_text);
        return render(load_dataset(dir), type);
    }

    /// Replaces h_setup.csv after checking it parses.
    std::size_t set_h_setup(const std::string& text) {
        const auto seq = qubo::parse_h_setup(text);
        std::lock_guard lock(mutex_);
        detail::write_text(opts_.workdir / "h_setup.csv", text);
        return seq.entries.size();
    }

    /// Hooks for the HTTP session endpoints.
    api::SessionHooks hooks() {
        api::SessionHooks h;
        h.set_qubo = [this](const json& body) -> std::pair<int, json> {
            if (!body.contains("h_setup") || !body.at("h_setup").is_string()) {
                return {400, api::error_body("invalid_request", "body needs a string field 'h_setup'")};
            }
            try {
                const std::size_t k = set_h_setup(body.at("h_setup").get<std::string>());
                return {200, json{{"hamiltonians", k}}};
            } catch (const qubo::HSetupError& e) {
                return {400, api::error_body("invalid_h_setup", e.what())};
            }
        };
        h.run = [this](const json& body) -> std::pair<int, json> {
            try {
                return {202, json{{"id", start_run(body.value("config", json::object()))}}};
            } catch (const Busy& e) {
                return {409, api::error_body("busy", e.what())};
            }
        };
        h.stop = [this](const json& body) -> std::pair<int, json> {
            stop_sound();
            const bool cancel = body.value("cancel", false);
            if (cancel) cancel_run();
            return {200, json{{"stopped", true}, {"cancelled", cancel}}};
        };
        return h;
    }

    /// Executes one prompt line. Returns false when the session should end.
    /// Never throws.
    bool execute(const std::string& line) {
        std::istringstream is(line);
        std::vector<std::string> words;
        for (std::string w; is >> w;) words.push_back(w);
        if (words.empty()) return true;
        const std::string& cmd = words.front();
        try {
            if (cmd == "quit" || cmd == "q" || cmd == "exit") {
                if (running()) say("cancelling the running experiment");
                shutdown();
                return false;
            }
            if (cmd == "runvqe") {
                expect_args(words, 0, 0, "runvqe");
                say("started experiment " + start_run());
            } else if (cmd == "map") {
                expect_args(words, 0, 1, "map [type]");
                say("wrote " + map(words.size() > 1 ? words[1] : "additive").string());
            } else if (cmd == "mapfile") {
                expect_args(words, 1, 2, "mapfile <id> [type]");
                say("wrote " + mapfile(words[1], words.size() > 2 ? words[2] : "additive").string());
            } else if (cmd == "stop") {
                expect_args(words, 0, 0, "stop");
                stop_sound();
                say("stopped");
            } else if (cmd == "wait") {
                expect_args(words, 0, 0, "wait");
                wait();
            } else if (cmd == "help" || cmd == "?") {
                say(help_text());
            } else {
                say("unknown command '" + cmd + "' (try help)");
            }
        } catch (const std::exception& e) {
            say(std::string("error: ") + e.what());
        }
        return true;
    }

    /// Reads commands until quit or end of input.
    void repl(std::istream& in) {
        std::string line;
        while (true) {
            prompt();
            if (!std::getline(in, line)) {
                shutdown();
                break;
            }
            if (!execute(line)) break;
        }
    }

    static std::string help_text() {
        std::string types;
        for (const auto& m : sonify::kMappingNames) types += std::string(types.empty() ? "" : "|") + std::string(m.flag);
        return "commands:\n"
               "  runvqe                 run the experiment in h_setup.csv / vqe_conf.json\n"
               "  map [type]             render the last experiment\n"
               "  mapfile <id> [type]    render a stored experiment\n"
               "  stop                   stop sound emission\n"
               "  wait                   block until the running experiment finishes\n"
               "  quit | q               cancel any run and exit\n"
               "  types: " + types;
    }

private:
    static void expect_args(const std::vector<std::string>& w, std::size_t lo, std::size_t hi, const char* usage) {
        const std::size_t n = w.size() - 1;
        if (n < lo || n > hi) throw std::invalid_argument(std::string("usage: ") + usage);
    }

    void say(const std::string& msg) {
        std::lock_guard lock(out_mutex_);
        out_ << msg << '\n' << std::flush;
    }

    void prompt() {
        std::lock_guard lock(out_mutex_);
        out_ << "VQH=> " << std::flush;
    }

    void publish(const std::string& name, const json& data) {
        api::EventHub* hub = nullptr;
        {
            std::lock_guard lock(mutex_);
            hub = hub_;
        }
        if (hub) hub->publish(name, data.dump());
    }

    void run_worker(std::string id, std::string text, qubo::HamiltonianSequence seq, vqe::VqeConfig cfg) {
        publish("session", json{{"state", "running"}, {"id", id}});
        auto on_record = [&](const vqe::IterationRecord& r) {
            if (emitter_) emitter_->push({r.marginals, r.energy, r.argmax, static_cast<std::int32_t>(r.index)});
            publish("record", json{{"id", id}, {"index", r.index}, {"energy", r.energy},
                                   {"marginals", r.marginals}, {"argmax", r.argmax}});
        };
        std::string outcome;
        try {
            vqe::ExperimentResult ex = vqe::run_sequence(seq, cfg, on_record, &cancel_);
            ex.id = id;
            write_dataset(dataset_dir(id), ex, text);
            outcome = ex.aborted ? "aborted" : "done";
            std::string summary = "experiment " + id + " " + outcome + ": " + std::to_string(ex.records.size()) +
                                  " records";
            if (!ex.records.empty()) {
                summary += ", final state " + ex.records.back().argmax + ", energy " +
                           qubo::format_number(ex.records.back().energy);
            }
            say(summary);
            if (!opts_.api_url.empty()) {
                try {
                    say("book posted as " + api::post_book(opts_.api_url, book::make_book(ex), opts_.post));
                } catch (const std::exception& e) {
                    say(std::string("book not posted: ") + e.what());
                }
            }
            std::lock_guard lock(mutex_);
            last_ = std::move(ex);
        } catch (const std::exception& e) {
            outcome = "failed";
            say("experiment " + id + " failed: " + e.what());
        }
        publish("session", json{{"state", outcome}, {"id", id}});
        std::lock_guard lock(mutex_);
        running_ = false;
    }

    SessionOptions opts_;
    std::ostream& out_;
    fs::path dir_;
    long long next_id_ = 0;
    std::unique_ptr<osc::Emitter> emitter_;

    mutable std::mutex mutex_;
    std::mutex out_mutex_;
    api::EventHub* hub_ = nullptr;
    bool running_ = false;
    std::atomic<bool> cancel_{false};
    std::thread worker_;
    std::optional<vqe::ExperimentResult> last_;
};

}  // namespace vqh::session
