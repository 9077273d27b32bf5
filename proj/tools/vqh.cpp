// vqh.cpp - session command line
//
//   vqh SESSIONPATH [PLATFORM] [PROTOCOL] [options]
//
// Reads h_setup.csv and vqe_conf.json from the working directory and opens
// the VQH=> prompt.

#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "vqh/api.hpp"
#include "vqh/book.hpp"
#include "vqh/session.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Variational quantum harmonizer session"};

    std::string session_path;
    std::string platform = "local";
    std::string protocol = "basis";
    std::string workdir = ".";
    std::string osc_target;
    std::string api_url;
    int serve_port = -1;
    std::string serve_host = "127.0.0.1";
    vqh::sonify::MappingConfig mapping;

    app.add_option("SESSIONPATH", session_path, "session name; data goes to <SESSIONPATH>_Data/")->required();
    app.add_option("PLATFORM", platform, "execution backend (local)")->capture_default_str();
    app.add_option("PROTOCOL", protocol, "decoding protocol (basis)")->capture_default_str();
    app.add_option("-C,--workdir", workdir, "directory holding h_setup.csv and vqe_conf.json")
        ->check(CLI::ExistingDirectory)
        ->capture_default_str();
    app.add_option("--osc", osc_target, "stream frames over OSC/UDP to host:port");
    app.add_option("--api", api_url, "post every finished experiment to this book service, e.g. http://127.0.0.1:8080");
    app.add_option("--serve", serve_port, "serve the book API, /events and /session/* on this port (0 picks one)");
    app.add_option("--serve-host", serve_host, "bind address for --serve")->capture_default_str();
    app.add_option("--rate", mapping.iteration_rate, "iterations per second for renders and OSC")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--sample-rate", mapping.sample_rate, "render sample rate in Hz")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--channels", mapping.channels, "render channel count")
        ->check(CLI::Range(1, 64))
        ->capture_default_str();
    app.add_option("--seed", mapping.noise_seed, "noise seed for subtractive renders")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    vqh::session::SessionOptions opts;
    try {
        opts.platform = vqh::session::platform_from_string(platform);
        opts.protocol = vqh::session::protocol_from_string(protocol);
        if (!osc_target.empty()) opts.osc_target = vqh::osc::parse_target(osc_target);
        mapping.validate();
    } catch (const std::exception& e) {
        std::cerr << "vqh: " << e.what() << "\n" << app.help();
        return 2;
    }
    opts.session_path = session_path;
    opts.workdir = workdir;
    opts.api_url = api_url;
    opts.mapping = mapping;

    try {
        vqh::session::Session session(opts, std::cout);
        std::cout << "session folder " << session.data_dir().string() << "\n";

        vqh::api::EventHub hub;
        std::unique_ptr<vqh::book::BookStore> store;
        std::unique_ptr<vqh::api::ApiServer> server;
        if (serve_port >= 0) {
            store = std::make_unique<vqh::book::BookStore>(session.data_dir() / "books");
            server = std::make_unique<vqh::api::ApiServer>(*store, hub, session.hooks());
            const int port = server->start(serve_host, serve_port);
            session.attach_hub(&hub);
            std::cout << "serving on http://" << serve_host << ":" << port << "\n";
        }

        session.repl(std::cin);
        session.attach_hub(nullptr);
        if (server) server->stop();
    } catch (const std::exception& e) {
        std::cerr << "vqh: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
