// book.hpp
// A "book" is the self-contained JSON record of one experiment, as shipped to
// the API service and to downstream synthesis clients.
//
// Schema (all keys required):
//   config            object   session config snapshot
//   qubo_csv          string   h_setup text the run used
//   operators         array    one array of operator strings per Hamiltonian
//   raw               array    per-record {index, params, energy, shots, distribution, marginals, argmax}
//   marginals         array    per-record marginal vectors
//   values            array    per-record energies
//   states            array    per-record argmax bitstrings
//   created_at        string   ISO-8601 UTC timestamp
// Optional: id, description, segment_boundaries, final_params, aborted.

#pragma once

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vqh/qubo.hpp"
#include "vqh/vqe.hpp"

namespace vqh::book {

using nlohmann::json;

class BookError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Throws BookError naming the first problem found.
inline void validate_book(const json& b) {
    if (!b.is_object()) throw BookError("book must be a JSON object");
    auto need = [&](const char* key, json::value_t type) -> const json& {
        if (!b.contains(key)) throw BookError(std::string("missing field '") + key + "'");
        const json& v = b.at(key);
        if (v.type() != type) throw BookError(std::string("field '") + key + "' has the wrong type");
        return v;
    };
    need("config", json::value_t::object);
    need("qubo_csv", json::value_t::string);
    need("created_at", json::value_t::string);
    const json& ops = need("operators", json::value_t::array);
    const json& raw = need("raw", json::value_t::array);
    const json& marg = need("marginals", json::value_t::array);
    const json& values = need("values", json::value_t::array);
    const json& states = need("states", json::value_t::array);
    for (const auto& o : ops) {
        if (!o.is_array()) throw BookError("operators must be an array of string arrays");
        for (const auto& s : o)
            if (!s.is_string()) throw BookError("operators must be an array of string arrays");
    }
    const std::size_t n = raw.size();
    if (marg.size() != n || values.size() != n || states.size() != n) {
        throw BookError("raw, marginals, values and states must have equal lengths (raw has " +
                        std::to_string(n) + ", marginals " + std::to_string(marg.size()) + ", values " +
                        std::to_string(values.size()) + ", states " + std::to_string(states.size()) + ")");
    }
    for (const auto& row : marg) {
        if (!row.is_array()) throw BookError("marginals rows must be arrays");
        for (const auto& v : row)
            if (!v.is_number()) throw BookError("marginals must be numeric");
    }
    for (const auto& v : values)
        if (!v.is_number()) throw BookError("values must be numeric");
    for (const auto& s : states)
        if (!s.is_string()) throw BookError("states must be strings");
}

inline json make_book(const vqe::ExperimentResult& ex) {
    json b;
    b["id"] = ex.id;
    b["created_at"] = utc_timestamp();
    b["description"] = ex.config.description;
    b["config"] = ex.config;
    b["qubo_csv"] = qubo::serialize_h_setup(ex.sequence);
    b["operators"] = ex.operators;
    b["raw"] = ex.records;
    json marg = json::array(), values = json::array(), states = json::array();
    for (const auto& r : ex.records) {
        marg.push_back(r.marginals);
        values.push_back(r.energy);
        states.push_back(r.argmax);
    }
    b["marginals"] = std::move(marg);
    b["values"] = std::move(values);
    b["states"] = std::move(states);
    b["segment_boundaries"] = ex.segment_boundaries;
    b["final_params"] = ex.final_params;
    b["aborted"] = ex.aborted;
    return b;
}

struct IndexEntry {
    std::string id;
    std::string received_at;
};

/// Append-only store: one JSON file per book under `dir`, plus an in-memory
/// index. Ids are sequential integers assigned on insert. Payloads are kept
/// verbatim.
class BookStore {
public:
    explicit BookStore(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
        std::map<long long, IndexEntry> found;
        for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
            if (entry.path().extension() != ".json") continue;
            const std::string stem = entry.path().stem().string();
            try {
                std::size_t used = 0;
                const long long id = std::stoll(stem, &used);
                if (used != stem.size() || id < 1) continue;
                std::ifstream f(entry.path());
                const json doc = json::parse(f);
                found[id] = {stem, doc.value("received_at", std::string{})};
                next_ = std::max(next_, id + 1);
            } catch (const std::exception&) {
                continue;
            }
        }
        for (auto& entry : found) index_.push_back(std::move(entry.second));
    }

    /// Validates, persists and returns the new id.
    std::string insert(const json& book) {
        validate_book(book);
        std::unique_lock lock(mutex_);
        const std::string id = std::to_string(next_++);
        const std::string received = utc_timestamp();
        const json envelope{{"id", id}, {"received_at", received}, {"book", book}};
        const auto path = dir_ / (id + ".json");
        const auto tmp = dir_ / (id + ".json.tmp");
        {
            std::ofstream f(tmp, std::ios::trunc);
            if (!f) throw std::runtime_error("cannot write " + tmp.string());
            f << envelope.dump();
            if (!f) throw std::runtime_error("failed writing " + tmp.string());
        }
        std::filesystem::rename(tmp, path);
        index_.push_back({id, received});
        return id;
    }

    [[nodiscard]] std::optional<json> get(const std::string& id) const {
        {
            std::shared_lock lock(mutex_);
            bool known = false;
            for (const auto& e : index_) known = known || e.id == id;
            if (!known) return std::nullopt;
        }
        std::ifstream f(dir_ / (id + ".json"));
        if (!f) return std::nullopt;
        return json::parse(f).at("book");
    }

    [[nodiscard]] std::optional<std::string> latest_id() const {
        std::shared_lock lock(mutex_);
        if (index_.empty()) return std::nullopt;
        return index_.back().id;
    }

    [[nodiscard]] std::vector<IndexEntry> index() const {
        std::shared_lock lock(mutex_);
        return index_;
    }

private:
    std::filesystem::path dir_;
    mutable std::shared_mutex mutex_;
    long long next_ = 1;
    std::vector<IndexEntry> index_;
};

}  // namespace vqh::book
