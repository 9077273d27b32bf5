// api.hpp
// HTTP book service with server-sent-event notifications, plus the client
// used to publish books.
//
// Endpoints:
//   POST /books            body: book JSON        -> 201 {"id": "<id>"}
//   GET  /books            -> [{"id", "received_at"}...]
//   GET  /books/latest     -> book JSON (404 when empty)
//   GET  /books/{id}       -> book JSON (404 when unknown)
//   GET  /events           -> text/event-stream ("book", "record", "session" events)
//   GET  /health           -> {"status": "ok"}
//   POST /session/qubo     body: {"h_setup": "<csv>"}      (session hooks)
//   POST /session/run      body: optional config overrides
//   POST /session/stop     body: optional {"cancel": true} to also cancel the run
// Errors are JSON: {"error": "<code>", "reason": "<text>"}.

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "vqh/book.hpp"

namespace vqh::api {

using nlohmann::json;

struct Event {
    std::uint64_t seq = 0;
    std::string name;
    std::string data;  // single-line JSON
};

inline std::string format_sse(const Event& e) {
    return "id: " + std::to_string(e.seq) + "\nevent: " + e.name + "\ndata: " + e.data + "\n\n";
}

/// Fan-out of events to SSE subscribers. Each subscriber reads from its own
/// cursor into a bounded history, so every subscriber sees every event
/// published after it subscribed (unless it falls more than `history` events
/// behind).
class EventHub {
public:
    explicit EventHub(std::size_t history = 4096) : history_(history) {}

    std::uint64_t publish(std::string name, std::string data) {
        std::lock_guard lock(mutex_);
        events_.push_back({next_seq_, std::move(name), std::move(data)});
        if (events_.size() > history_) events_.pop_front();
        cv_.notify_all();
        return next_seq_++;
    }

    /// Sequence number the next published event will carry.
    [[nodiscard]] std::uint64_t cursor() const {
        std::lock_guard lock(mutex_);
        return next_seq_;
    }

    /// Events with seq >= from, waiting up to `timeout` if none are ready.
    std::vector<Event> wait(std::uint64_t from, std::chrono::milliseconds timeout) {
        std::unique_lock lock(mutex_);
        cv_.wait_for(lock, timeout, [&] { return closed_ || next_seq_ > from; });
        std::vector<Event> out;
        for (const auto& e : events_)
            if (e.seq >= from) out.push_back(e);
        return out;
    }

    void close() {
        std::lock_guard lock(mutex_);
        closed_ = true;
        cv_.notify_all();
    }

    [[nodiscard]] bool closed() const {
        std::lock_guard lock(mutex_);
        return closed_;
    }

    void add_subscriber() {
        std::lock_guard lock(mutex_);
        ++subscribers_;
        cv_.notify_all();
    }
    void remove_subscriber() {
        std::lock_guard lock(mutex_);
        --subscribers_;
        cv_.notify_all();
    }
    [[nodiscard]] int subscriber_count() const {
        std::lock_guard lock(mutex_);
        return subscribers_;
    }

    /// Blocks until at least `n` subscribers are connected or the timeout hits.
    bool wait_for_subscribers(int n, std::chrono::milliseconds timeout) {
        std::unique_lock lock(mutex_);
        return cv_.wait_for(lock, timeout, [&] { return subscribers_ >= n; });
    }

private:
    const std::size_t history_;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<Event> events_;
    std::uint64_t next_seq_ = 0;
    int subscribers_ = 0;
    bool closed_ = false;
};

/// Callbacks wiring the session endpoints to a running session. Each returns
/// an HTTP status and a JSON body.
struct SessionHooks {
    std::function<std::pair<int, json>(const json&)> set_qubo;
    std::function<std::pair<int, json>(const json&)> run;
    std::function<std::pair<int, json>(const json&)> stop;
};

struct ServerOptions {
    std::chrono::milliseconds keepalive{15000};
};

inline json error_body(const std::string& code, const std::string& reason) {
    return json{{"error", code}, {"reason", reason}};
}

class ApiServer {
public:
    ApiServer(book::BookStore& store, EventHub& hub, SessionHooks hooks = {}, ServerOptions opts = {})
        : store_(store), hub_(hub), hooks_(std::move(hooks)), opts_(opts) {
        routes();
    }

    ~ApiServer() { stop(); }

    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    /// Binds and starts serving on a background thread; port 0 picks a free
    /// port. Returns the bound port.
    int start(const std::string& host = "127.0.0.1", int port = 0) {
        const int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
        if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
        port_ = bound;
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        return bound;
    }

    void stop() {
        hub_.close();
        if (thread_.joinable()) {
            server_.stop();
            thread_.join();
        }
    }

    [[nodiscard]] int port() const noexcept { return port_; }

private:
    static void send_json(httplib::Response& res, int status, const json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    void routes() {
        server_.Get("/health", [](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, json{{"status", "ok"}});
        });

        server_.Post("/books", [this](const httplib::Request& req, httplib::Response& res) {
            json body;
            try {
                body = json::parse(req.body);
            } catch (const json::parse_error& e) {
                send_json(res, 400, error_body("malformed_json", e.what()));
                return;
            }
            try {
                const std::string id = store_.insert(body);
                hub_.publish("book", json{{"id", id}}.dump());
                res.set_header("Location", "/books/" + id);
                send_json(res, 201, json{{"id", id}});
            } catch (const book::BookError& e) {
                send_json(res, 400, error_body("invalid_book", e.what()));
            } catch (const std::exception& e) {
                send_json(res, 500, error_body("storage_failure", e.what()));
            }
        });

        server_.Get("/books", [this](const httplib::Request&, httplib::Response& res) {
            json list = json::array();
            for (const auto& e : store_.index()) list.push_back({{"id", e.id}, {"received_at", e.received_at}});
            send_json(res, 200, list);
        });

        server_.Get("/books/latest", [this](const httplib::Request&, httplib::Response& res) {
            const auto id = store_.latest_id();
            const auto b = id ? store_.get(*id) : std::nullopt;
            if (!b) {
                send_json(res, 404, error_body("not_found", "no books stored yet"));
                return;
            }
            send_json(res, 200, *b);
        });

        server_.Get(R"(/books/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            const auto b = store_.get(id);
            if (!b) {
                send_json(res, 404, error_body("not_found", "unknown book id '" + id + "'"));
                return;
            }
            send_json(res, 200, *b);
        });

        server_.Get("/events", [this](const httplib::Request&, httplib::Response& res) {
            auto cursor = std::make_shared<std::uint64_t>(hub_.cursor());
            hub_.add_subscriber();
            res.set_header("Cache-Control", "no-cache");
            res.set_chunked_content_provider(
                "text/event-stream",
                [this, cursor](std::size_t, httplib::DataSink& sink) {
                    if (hub_.closed()) return false;
                    const auto events = hub_.wait(*cursor, opts_.keepalive);
                    if (events.empty()) {
                        const std::string ping = ": keepalive\n\n";
                        return sink.write(ping.data(), ping.size());
                    }
                    for (const Event& e : events) {
                        const std::string text = format_sse(e);
                        if (!sink.write(text.data(), text.size())) return false;
                        *cursor = e.seq + 1;
                    }
                    return true;
                },
                [this](bool) { hub_.remove_subscriber(); });
        });

        auto session_post = [this](auto hook_of) {
            return [this, hook_of](const httplib::Request& req, httplib::Response& res) {
                const auto& hook = hook_of(hooks_);
                if (!hook) {
                    send_json(res, 503, error_body("no_session", "no session is attached to this server"));
                    return;
                }
                json body = json::object();
                if (!req.body.empty()) {
                    try {
                        body = json::parse(req.body);
                    } catch (const json::parse_error& e) {
                        send_json(res, 400, error_body("malformed_json", e.what()));
                        return;
                    }
                }
                try {
                    auto [status, out] = hook(body);
                    send_json(res, status, out);
                } catch (const std::exception& e) {
                    send_json(res, 400, error_body("rejected", e.what()));
                }
            };
        };
        server_.Post("/session/qubo", session_post([](SessionHooks& h) -> auto& { return h.set_qubo; }));
        server_.Post("/session/run", session_post([](SessionHooks& h) -> auto& { return h.run; }));
        server_.Post("/session/stop", session_post([](SessionHooks& h) -> auto& { return h.stop; }));
    }

    book::BookStore& store_;
    EventHub& hub_;
    SessionHooks hooks_;
    ServerOptions opts_;
    httplib::Server server_;
    std::thread thread_;
    int port_ = -1;
};

// ---------------------------------------------------------------------------
// Client
// ---------------------------------------------------------------------------

/// 4xx responses: the book was rejected and retrying cannot help.
class PermanentError : public std::runtime_error {
public:
    int status;
    PermanentError(int s, const std::string& what) : std::runtime_error(what), status(s) {}
};

/// Connection failures or 5xx responses that persisted through every retry.
class TransientError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PostOptions {
    int retries = 3;
    std::chrono::milliseconds backoff{100};  // doubles after each failed attempt
    std::chrono::seconds timeout{10};
};

/// POSTs a book to `<base_url>/books` and returns the server-assigned id.
inline std::string post_book(const std::string& base_url, const json& book, const PostOptions& opts = {}) {
    httplib::Client cli(base_url);
    cli.set_connection_timeout(opts.timeout);
    cli.set_read_timeout(opts.timeout);
    cli.set_write_timeout(opts.timeout);
    const std::string body = book.dump();
    auto delay = opts.backoff;
    std::string last_error;
    for (int attempt = 0; attempt <= opts.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
        auto res = cli.Post("/books", body, "application/json");
        if (!res) {
            last_error = "connection failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 201 || res->status == 200) {
            return json::parse(res->body).at("id").get<std::string>();
        }
        if (res->status >= 400 && res->status < 500) {
            throw PermanentError(res->status, "book rejected with HTTP " + std::to_string(res->status) + ": " + res->body);
        }
        last_error = "HTTP " + std::to_string(res->status);
    }
    throw TransientError("posting book failed after " + std::to_string(opts.retries + 1) + " attempts: " + last_error);
}

}  // namespace vqh::api
