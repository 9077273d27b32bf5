#include <catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include "net.hpp"
#include "vqh/api.hpp"
#include "vqh/midi.hpp"
#include "vqh/osc.hpp"

using namespace vqh;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("vqh_bridge_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

json sample_book() {
    qubo::HamiltonianSequence seq;
    seq.entries = {qubo::chord_qubo({"C", "E", "G"}, {0, 2}, qubo::ChordMode::linear)};
    vqe::VqeConfig cfg;
    cfg.size = 3;
    cfg.iterations = {12};
    cfg.optimizer_name = opt::OptimizerName::nft;
    auto ex = vqe::run_sequence(seq, cfg);
    ex.id = "001";
    return book::make_book(ex);
}

/// Server with a short keepalive so SSE readers notice stop() quickly.
struct Service {
    explicit Service(const std::string& name, api::SessionHooks hooks = {})
        : store(fresh_dir(name)), server(store, hub, std::move(hooks), api::ServerOptions{50ms}) {
        port = server.start();
    }
    book::BookStore store;
    api::EventHub hub;
    api::ApiServer server;
    int port = 0;
    [[nodiscard]] std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

}  // namespace

TEST_CASE("OSC golden bytes") {
    const std::vector<std::uint8_t> want{0x2F, 0x76, 0x71, 0x68, 0x2F, 0x65, 0x6E, 0x65, 0x72, 0x67,
                                         0x79, 0x00, 0x2C, 0x66, 0x00, 0x00, 0x3F, 0xC0, 0x00, 0x00};
    CHECK(osc::encode({"/vqh/energy", {1.5f}}) == want);
}

TEST_CASE("OSC encodes every argument type and decodes back") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        osc::Message m{"/vqh/t" + std::string(static_cast<std::size_t>(trial % 7), 'x'), {}};
        const int count = static_cast<int>(rng() % 6);
        for (int i = 0; i < count; ++i) {
            switch (rng() % 4) {
                case 0: m.args.emplace_back(static_cast<std::int32_t>(rng())); break;
                case 1: m.args.emplace_back(static_cast<float>(static_cast<double>(rng() % 1000) / 7.0)); break;
                case 2: m.args.emplace_back(std::string(rng() % 9, 'a')); break;
                default: m.args.emplace_back(osc::Blob(rng() % 7, 0xAB)); break;
            }
        }
        const auto bytes = osc::encode(m);
        CHECK(bytes.size() % 4 == 0);
        CHECK(osc::decode(bytes) == m);
    }
    CHECK_THROWS_AS(osc::encode({"vqh", {}}), osc::OscError);
    const std::vector<std::uint8_t> odd{0x2F, 0x00, 0x00};
    CHECK_THROWS_AS(osc::decode(odd), osc::OscError);
    const std::vector<std::uint8_t> unknown_tag{'/', 'a', 0, 0, ',', 'q', 0, 0};
    CHECK_THROWS_AS(osc::decode(unknown_tag), osc::OscError);
}

TEST_CASE("frame messages follow the address space") {
    const auto msgs = osc::frame_messages({{0.25, 0.75}, -3.5, "01", 42});
    REQUIRE(msgs.size() == 4);
    CHECK(msgs[0].address == "/vqh/marginals");
    CHECK(msgs[0].args == std::vector<osc::Arg>{0.25f, 0.75f});
    CHECK(msgs[1] == osc::Message{"/vqh/energy", {-3.5f}});
    CHECK(msgs[2] == osc::Message{"/vqh/state", {std::string("01")}});
    CHECK(msgs[3] == osc::Message{"/vqh/clock", {std::int32_t{42}}});
}

TEST_CASE("OSC target parsing") {
    const auto t = osc::parse_target("localhost:57120");
    CHECK(t.host == "localhost");
    CHECK(t.port == 57120);
    CHECK_THROWS(osc::parse_target("localhost"));
    CHECK_THROWS(osc::parse_target("host:0"));
    CHECK_THROWS(osc::parse_target("host:99999"));
    CHECK_THROWS(osc::parse_target(":9"));
}

TEST_CASE("UDP sender delivers decodable datagrams") {
    testnet::UdpCapture cap;
    osc::UdpSender sender({"127.0.0.1", cap.port()});
    sender.send(osc::Message{"/vqh/energy", {1.5f}});
    const auto got = cap.recv_for(1000ms);
    REQUIRE(got);
    CHECK(osc::decode(*got) == osc::Message{"/vqh/energy", {1.5f}});
}

TEST_CASE("emit_streams sends four messages per frame") {
    testnet::UdpCapture cap;
    osc::UdpSender sender({"127.0.0.1", cap.port()});
    sonify::ControlStreams s;
    s.n = 2;
    s.c = {{0.1, 0.9}, {0.5, 0.5}, {0.9, 0.1}};
    s.e = {-1.0, -2.0, -3.0};
    s.states = {"01", "00", "10"};
    osc::emit_streams(s, 200.0, sender);
    std::vector<osc::Message> msgs;
    while (auto d = cap.recv_for(200ms)) msgs.push_back(osc::decode(*d));
    REQUIRE(msgs.size() == 12);
    CHECK(msgs[11] == osc::Message{"/vqh/clock", {std::int32_t{2}}});
    CHECK(msgs[9] == osc::Message{"/vqh/energy", {-3.0f}});
}

TEST_CASE("emitter goes quiet once stopped") {
    testnet::UdpCapture cap;
    osc::Emitter emitter({"127.0.0.1", cap.port()}, 100.0);
    sonify::ControlStreams s;
    s.n = 1;
    for (int i = 0; i < 500; ++i) {
        s.c.push_back({0.5});
        s.e.push_back(0.0);
        s.states.push_back("0");
    }
    emitter.play(s);
    REQUIRE(cap.recv_for(1000ms));
    emitter.stop();
    const std::size_t sent = emitter.datagrams_sent();
    cap.drain(20ms);  // datagrams already in the socket buffer
    CHECK_FALSE(cap.recv_for(100ms));
    CHECK(emitter.datagrams_sent() == sent);
    CHECK(emitter.pending() == 0);
    CHECK_FALSE(emitter.push({{0.5}, 0.0, "0", 0}));
    emitter.resume();
    CHECK(emitter.push({{0.5}, 0.0, "0", 0}));
    CHECK(cap.recv_for(1000ms));
}

TEST_CASE("MIDI clock round trip over the 21-bit range") {
    std::mt19937_64 rng(5);
    std::vector<std::uint32_t> steps{0, 1, 127, 128, 16383, 16384, midi::kClockLimit - 1};
    for (int i = 0; i < 20000; ++i) steps.push_back(static_cast<std::uint32_t>(rng() % midi::kClockLimit));
    for (std::uint32_t s : steps) {
        const auto msgs = midi::clock_encode(s);
        for (const auto& m : msgs) CHECK(m.value <= 127);
        CHECK(midi::clock_decode(msgs) == s);
    }
    CHECK_THROWS(midi::clock_encode(midi::kClockLimit));
    auto msgs = midi::clock_encode(300);
    msgs[1].controller = 99;
    CHECK_THROWS(midi::clock_decode(msgs));
    const midi::ClockControllers custom{1, 2, 3};
    CHECK(midi::clock_decode(midi::clock_encode(77777, custom), custom) == 77777);
}

TEST_CASE("controller values map onto QUBO coefficients") {
    CHECK(midi::cc_to_coefficient(0, -2.0, 2.0) == -2.0);
    CHECK(midi::cc_to_coefficient(127, -2.0, 2.0) == 2.0);
    CHECK_THROWS(midi::cc_to_coefficient(128, -2.0, 2.0));
    auto q = qubo::make_qubo({"a", "b"});
    midi::apply_cc(q, 0, 0, 127, -1.0, 1.0);
    midi::apply_cc(q, 0, 1, 0, -1.0, 1.0);
    CHECK(q.a[0] == 1.0);
    CHECK(q.b[0][1] == -1.0);
    CHECK(q.b[1][0] == -1.0);
    q.validate();
}

TEST_CASE("bounded queue drops when full and drains after close") {
    BoundedQueue<int> q(2);
    CHECK(q.push_for(1, 0ms));
    CHECK(q.push_for(2, 0ms));
    CHECK_FALSE(q.push_for(3, 5ms));
    CHECK(q.dropped() == 1);
    q.close();
    CHECK(q.pop() == 1);
    CHECK(q.pop() == 2);
    CHECK_FALSE(q.pop());
    CHECK_FALSE(q.push_for(4, 0ms));
}

TEST_CASE("bounded queue hands items across threads in order") {
    BoundedQueue<int> q(8);
    std::vector<int> got;
    std::thread consumer([&] {
        while (auto v = q.pop()) got.push_back(*v);
    });
    for (int i = 0; i < 1000; ++i) REQUIRE(q.push_for(i, 1s));
    q.close();
    consumer.join();
    REQUIRE(got.size() == 1000);
    for (int i = 0; i < 1000; ++i) CHECK(got[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("book validation") {
    const json b = sample_book();
    book::validate_book(b);
    CHECK(b["operators"].is_array());
    CHECK(b["operators"][0].is_array());
    for (const char* key : {"config", "qubo_csv", "operators", "raw", "marginals", "values", "states", "created_at"}) {
        json broken = b;
        broken.erase(key);
        CHECK_THROWS_AS(book::validate_book(broken), book::BookError);
    }
    json uneven = b;
    uneven["values"].erase(0);
    CHECK_THROWS_AS(book::validate_book(uneven), book::BookError);
}

TEST_CASE("book store assigns ids and reloads from disk") {
    const auto dir = fresh_dir("store");
    const json b = sample_book();
    {
        book::BookStore store(dir);
        CHECK_FALSE(store.latest_id());
        CHECK(store.insert(b) == "1");
        CHECK(store.insert(b) == "2");
        CHECK(store.get("2") == b);
        CHECK_FALSE(store.get("9"));
    }
    book::BookStore again(dir);
    CHECK(again.index().size() == 2);
    CHECK(again.latest_id() == "2");
    CHECK(again.insert(b) == "3");
}

TEST_CASE("book POST then GET round-trips JSON-equal") {
    Service svc("roundtrip");
    const json b = sample_book();
    const std::string id = api::post_book(svc.url(), b);
    httplib::Client cli("127.0.0.1", svc.port);
    auto res = cli.Get("/books/" + id);
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body) == b);
    res = cli.Get("/books/latest");
    REQUIRE(res);
    CHECK(json::parse(res->body) == b);
    res = cli.Get("/books");
    REQUIRE(res);
    CHECK(json::parse(res->body).size() == 1);
    res = cli.Get("/health");
    REQUIRE(res);
    CHECK(res->status == 200);
}

TEST_CASE("API errors are JSON with codes") {
    Service svc("errors");
    httplib::Client cli("127.0.0.1", svc.port);
    auto res = cli.Get("/books/latest");
    REQUIRE(res);
    CHECK(res->status == 404);
    res = cli.Get("/books/77");
    REQUIRE(res);
    CHECK(res->status == 404);
    CHECK(json::parse(res->body)["error"] == "not_found");
    res = cli.Post("/books", "{not json", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(json::parse(res->body)["error"] == "malformed_json");
    res = cli.Post("/books", R"({"config": {}})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(json::parse(res->body)["error"] == "invalid_book");
    CHECK_THROWS_AS(api::post_book(svc.url(), json{{"config", 1}}), api::PermanentError);
}

TEST_CASE("SSE delivers exactly one event per POST to each subscriber") {
    Service svc("sse");
    testnet::SseReader a("127.0.0.1", svc.port);
    testnet::SseReader b("127.0.0.1", svc.port);
    REQUIRE(svc.hub.wait_for_subscribers(2, 5s));
    const json book = sample_book();
    std::vector<std::string> ids;
    for (int i = 0; i < 5; ++i) ids.push_back(api::post_book(svc.url(), book));
    REQUIRE(a.wait_for_events(5, 5s));
    REQUIRE(b.wait_for_events(5, 5s));
    std::this_thread::sleep_for(200ms);  // room for any duplicate to show up
    for (auto* r : {&a, &b}) {
        const auto ev = r->events();
        REQUIRE(ev.size() == 5);
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(ev[i].name == "book");
            CHECK(json::parse(ev[i].data)["id"] == ids[i]);
        }
    }
    CHECK(a.pings() > 0);
    a.stop();
    b.stop();
}

TEST_CASE("session endpoints without a session answer 503") {
    Service svc("nosession");
    httplib::Client cli("127.0.0.1", svc.port);
    for (const char* path : {"/session/qubo", "/session/run", "/session/stop"}) {
        auto res = cli.Post(path, "{}", "application/json");
        REQUIRE(res);
        CHECK(res->status == 503);
        CHECK(json::parse(res->body)["error"] == "no_session");
    }
}

TEST_CASE("session endpoints forward bodies to the hooks") {
    json seen;
    api::SessionHooks hooks;
    hooks.set_qubo = [&](const json& body) {
        seen = body;
        return std::pair<int, json>{200, json{{"ok", true}}};
    };
    hooks.run = [](const json&) -> std::pair<int, json> { throw std::invalid_argument("bad config"); };
    hooks.stop = [](const json& body) { return std::pair<int, json>{200, json{{"cancel", body.value("cancel", false)}}}; };
    Service svc("hooks", hooks);
    httplib::Client cli("127.0.0.1", svc.port);
    auto res = cli.Post("/session/qubo", R"({"h_setup":"h0,a\na,1\n"})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(seen["h_setup"] == "h0,a\na,1\n");
    res = cli.Post("/session/run", "{}", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    res = cli.Post("/session/stop", "", "application/json");
    REQUIRE(res);
    CHECK(json::parse(res->body)["cancel"] == false);
    res = cli.Post("/session/stop", "{oops", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
}

TEST_CASE("post_book retries transient failures with backoff") {
    testnet::ScriptedServer flaky([](int attempt) {
        if (attempt < 2) return std::pair<int, std::string>{503, R"({"error":"busy"})"};
        return std::pair<int, std::string>{201, R"({"id":"42"})"};
    });
    api::PostOptions opts;
    opts.backoff = 20ms;
    const auto t0 = std::chrono::steady_clock::now();
    CHECK(api::post_book(flaky.url(), sample_book(), opts) == "42");
    CHECK(flaky.attempts() == 3);
    CHECK(std::chrono::steady_clock::now() - t0 >= 60ms);  // 20 + 40
}

TEST_CASE("post_book does not retry a rejected book") {
    testnet::ScriptedServer strict([](int) { return std::pair<int, std::string>{400, R"({"error":"invalid_book"})"}; });
    try {
        api::post_book(strict.url(), sample_book());
        FAIL("expected PermanentError");
    } catch (const api::PermanentError& e) {
        CHECK(e.status == 400);
    }
    CHECK(strict.attempts() == 1);
}

TEST_CASE("post_book gives up after the retry budget") {
    testnet::ScriptedServer down([](int) { return std::pair<int, std::string>{500, "{}"}; });
    api::PostOptions opts;
    opts.retries = 2;
    opts.backoff = 1ms;
    CHECK_THROWS_AS(api::post_book(down.url(), sample_book(), opts), api::TransientError);
    CHECK(down.attempts() == 3);
}
