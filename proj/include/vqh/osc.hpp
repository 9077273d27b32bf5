// osc.hpp
// OSC 1.0 messages (no bundles) and best-effort UDP emission of control
// streams.
//
// Address space:
//   /vqh/marginals  n float32   marginal coefficients of one iteration
//   /vqh/energy     float32     energy of that iteration
//   /vqh/state      string      most probable bitstring
//   /vqh/clock      int32       iteration index

#pragma once

#include <netdb.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <unistd.h>

#include <atomic>
#include <bit>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <functional>
#include <iostream>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "vqh/queue.hpp"
#include "vqh/sonify.hpp"

namespace vqh::osc {

using Blob = std::vector<std::uint8_t>;
using Arg = std::variant<std::int32_t, float, std::string, Blob>;

struct Message {
    std::string address;
    std::vector<Arg> args;

    bool operator==(const Message&) const = default;
};

class OscError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void pad4(std::vector<std::uint8_t>& out) {
    while (out.size() % 4 != 0) out.push_back(0);
}

inline void put_string(std::vector<std::uint8_t>& out, std::string_view s) {
    out.insert(out.end(), s.begin(), s.end());
    out.push_back(0);
    pad4(out);
}

inline void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::string string() {
        std::size_t end = pos_;
        while (end < bytes_.size() && bytes_[end] != 0) ++end;
        if (end >= bytes_.size()) throw OscError("unterminated OSC string");
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), end - pos_);
        pos_ = (end + 4) & ~std::size_t{3};
        if (pos_ > bytes_.size()) throw OscError("OSC string padding runs past the packet");
        return s;
    }

    std::uint32_t be32() {
        if (pos_ + 4 > bytes_.size()) throw OscError("truncated OSC argument");
        const std::uint8_t* p = bytes_.data() + pos_;
        pos_ += 4;
        return static_cast<std::uint32_t>(p[0]) << 24 | static_cast<std::uint32_t>(p[1]) << 16 |
               static_cast<std::uint32_t>(p[2]) << 8 | static_cast<std::uint32_t>(p[3]);
    }

    Blob blob() {
        const std::uint32_t size = be32();
        if (pos_ + size > bytes_.size()) throw OscError("truncated OSC blob");
        Blob b(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
               bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + size));
        pos_ = (pos_ + size + 3) & ~std::size_t{3};
        if (pos_ > bytes_.size()) throw OscError("OSC blob padding runs past the packet");
        return b;
    }

    [[nodiscard]] bool done() const noexcept { return pos_ == bytes_.size(); }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<std::uint8_t> encode(const Message& msg) {
    if (msg.address.empty() || msg.address.front() != '/') {
        throw OscError("OSC address must start with '/': " + msg.address);
    }
    if (msg.address.find('\0') != std::string::npos) throw OscError("OSC address contains NUL");
    std::vector<std::uint8_t> out;
    detail::put_string(out, msg.address);
    std::string tags = ",";
    for (const Arg& a : msg.args) tags += "ifsb"[a.index()];
    detail::put_string(out, tags);
    for (const Arg& a : msg.args) {
        if (const auto* i = std::get_if<std::int32_t>(&a)) {
            detail::put_be32(out, static_cast<std::uint32_t>(*i));
        } else if (const auto* f = std::get_if<float>(&a)) {
            detail::put_be32(out, std::bit_cast<std::uint32_t>(*f));
        } else if (const auto* s = std::get_if<std::string>(&a)) {
            if (s->find('\0') != std::string::npos) throw OscError("OSC string argument contains NUL");
            detail::put_string(out, *s);
        } else {
            const Blob& b = std::get<Blob>(a);
            detail::put_be32(out, static_cast<std::uint32_t>(b.size()));
            out.insert(out.end(), b.begin(), b.end());
            detail::pad4(out);
        }
    }
    return out;
}

inline Message decode(std::span<const std::uint8_t> bytes) {
    if (bytes.size() % 4 != 0) throw OscError("OSC packet length is not a multiple of 4");
    detail::Reader r(bytes);
    Message msg;
    msg.address = r.string();
    if (msg.address.empty() || msg.address.front() != '/') throw OscError("bad OSC address");
    const std::string tags = r.string();
    if (tags.empty() || tags.front() != ',') throw OscError("missing OSC type tag string");
    for (std::size_t i = 1; i < tags.size(); ++i) {
        switch (tags[i]) {
            case 'i': msg.args.emplace_back(static_cast<std::int32_t>(r.be32())); break;
            case 'f': msg.args.emplace_back(std::bit_cast<float>(r.be32())); break;
            case 's': msg.args.emplace_back(r.string()); break;
            case 'b': msg.args.emplace_back(r.blob()); break;
            default: throw OscError(std::string("unsupported OSC type tag '") + tags[i] + "'");
        }
    }
    if (!r.done()) throw OscError("trailing bytes after OSC arguments");
    return msg;
}

// ---------------------------------------------------------------------------
// Control-stream frames
// ---------------------------------------------------------------------------

struct Frame {
    std::vector<double> marginals;
    double energy = 0.0;
    std::string state;
    std::int32_t clock = 0;
};

inline std::vector<Message> frame_messages(const Frame& f) {
    Message m{"/vqh/marginals", {}};
    for (double v : f.marginals) m.args.emplace_back(static_cast<float>(v));
    return {std::move(m),
            Message{"/vqh/energy", {static_cast<float>(f.energy)}},
            Message{"/vqh/state", {f.state}},
            Message{"/vqh/clock", {f.clock}}};
}

inline std::vector<Frame> frames_from(const sonify::ControlStreams& s) {
    std::vector<Frame> frames;
    for (std::size_t i = 0; i < s.length(); ++i) {
        frames.push_back({s.c[i], s.e[i], s.states[i], static_cast<std::int32_t>(i)});
    }
    return frames;
}

// ---------------------------------------------------------------------------
// UDP
// ---------------------------------------------------------------------------

struct Target {
    std::string host;
    std::uint16_t port = 0;
};

inline Target parse_target(std::string_view spec) {
    const auto colon = spec.rfind(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == spec.size()) {
        throw std::invalid_argument("OSC target must be host:port, got '" + std::string(spec) + "'");
    }
    const std::string port_text(spec.substr(colon + 1));
    std::size_t used = 0;
    int port = 0;
    try {
        port = std::stoi(port_text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != port_text.size() || port < 1 || port > 65535) {
        throw std::invalid_argument("bad OSC port '" + port_text + "'");
    }
    return {std::string(spec.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

using LogFn = std::function<void(const std::string&)>;

inline LogFn stderr_log() {
    return [](const std::string& line) { std::cerr << line << '\n'; };
}

/// Fire-and-forget datagram sender. The first failure is logged; later
/// failures are counted silently.
class UdpSender {
public:
    explicit UdpSender(const Target& target, LogFn log = stderr_log()) : log_(std::move(log)) {
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_DGRAM;
        addrinfo* res = nullptr;
        const std::string port = std::to_string(target.port);
        if (const int rc = ::getaddrinfo(target.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
            fail("cannot resolve OSC target " + target.host + ": " + ::gai_strerror(rc));
            return;
        }
        for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
            fd_ = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
            if (fd_ < 0) continue;
            std::memcpy(&addr_, ai->ai_addr, ai->ai_addrlen);
            addr_len_ = ai->ai_addrlen;
            break;
        }
        ::freeaddrinfo(res);
        if (fd_ < 0) fail(std::string("cannot open UDP socket: ") + std::strerror(errno));
    }

    ~UdpSender() {
        if (fd_ >= 0) ::close(fd_);
    }
    UdpSender(const UdpSender&) = delete;
    UdpSender& operator=(const UdpSender&) = delete;

    bool send(std::span<const std::uint8_t> bytes) {
        if (fd_ < 0) {
            ++failures_;
            return false;
        }
        const auto n = ::sendto(fd_, bytes.data(), bytes.size(), 0,
                                reinterpret_cast<const sockaddr*>(&addr_), addr_len_);
        if (n != static_cast<ssize_t>(bytes.size())) {
            fail(std::string("OSC send failed: ") + std::strerror(errno));
            return false;
        }
        ++sent_;
        return true;
    }

    bool send(const Message& m) { return send(encode(m)); }

    [[nodiscard]] std::size_t sent() const noexcept { return sent_; }
    [[nodiscard]] std::size_t failures() const noexcept { return failures_; }

private:
    void fail(const std::string& what) {
        ++failures_;
        if (!warned_ && log_) log_("warning: " + what + " (further OSC errors are suppressed)");
        warned_ = true;
    }

    LogFn log_;
    int fd_ = -1;
    sockaddr_storage addr_{};
    socklen_t addr_len_ = 0;
    bool warned_ = false;
    std::size_t sent_ = 0;
    std::size_t failures_ = 0;
};

/// Sends every frame's four messages, one frame per 1/rate seconds. Returns
/// early when `stop` becomes true.
inline void emit_streams(const sonify::ControlStreams& s, double rate, UdpSender& sender,
                         const std::atomic<bool>* stop = nullptr) {
    if (!(rate > 0.0)) throw std::invalid_argument("emission rate must be positive");
    const auto period = std::chrono::duration<double>(1.0 / rate);
    auto next = std::chrono::steady_clock::now();
    for (const Frame& f : frames_from(s)) {
        if (stop != nullptr && stop->load()) return;
        for (const Message& m : frame_messages(f)) sender.send(m);
        next += std::chrono::duration_cast<std::chrono::steady_clock::duration>(period);
        std::this_thread::sleep_until(next);
    }
}

/// Background emitter fed through a bounded queue; producers never wait. The
/// worker sends one frame per tick and stop() drops whatever is still queued.
class Emitter {
public:
    Emitter(const Target& target, double rate, LogFn log = stderr_log(), std::size_t capacity = 4096)
        : sender_(target, std::move(log)), period_(1.0 / rate), queue_(capacity) {
        if (!(rate > 0.0)) throw std::invalid_argument("emission rate must be positive");
        worker_ = std::thread([this] { run(); });
    }

    ~Emitter() {
        {
            std::lock_guard lock(mutex_);
            shutdown_ = true;
        }
        queue_.close();
        wake_.notify_all();
        worker_.join();
    }

    Emitter(const Emitter&) = delete;
    Emitter& operator=(const Emitter&) = delete;

    /// Non-blocking; returns false if the queue was full or the emitter is
    /// stopped.
    bool push(Frame f) {
        {
            std::lock_guard lock(mutex_);
            if (halted_) return false;
        }
        return queue_.push_for(std::move(f), std::chrono::milliseconds(0));
    }

    void play(const sonify::ControlStreams& s) {
        for (Frame& f : frames_from(s)) push(std::move(f));
    }

    /// Drops queued frames, interrupts the current wait and rejects pushes
    /// until resume().
    void stop() {
        {
            std::lock_guard lock(mutex_);
            halted_ = true;
            ++generation_;
        }
        queue_.clear();
        wake_.notify_all();
    }

    void resume() {
        std::lock_guard lock(mutex_);
        halted_ = false;
    }

    [[nodiscard]] bool stopped() const {
        std::lock_guard lock(mutex_);
        return halted_;
    }

    [[nodiscard]] std::size_t datagrams_sent() const {
        std::lock_guard lock(mutex_);
        return sender_.sent();
    }
    [[nodiscard]] std::size_t pending() const { return queue_.size(); }

private:
    void run() {
        while (true) {
            auto item = queue_.pop();
            if (!item) return;
            std::unique_lock lock(mutex_);
            if (shutdown_) return;
            if (halted_) continue;
            for (const Message& m : frame_messages(*item)) sender_.send(m);
            const auto gen = generation_;
            wake_.wait_for(lock, period_, [&] { return shutdown_ || generation_ != gen; });
            if (shutdown_) return;
        }
    }

    UdpSender sender_;
    std::chrono::duration<double> period_;
    BoundedQueue<Frame> queue_;
    mutable std::mutex mutex_;
    std::condition_variable wake_;
    bool shutdown_ = false;
    bool halted_ = false;
    std::uint64_t generation_ = 0;
    std::thread worker_;
};

}  // namespace vqh::osc
