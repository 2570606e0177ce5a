#include <csignal>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include <spdlog/spdlog.h>

#include "mylibrary/callno.hpp"
#include "mylibrary/config.hpp"
#include "mylibrary/error.hpp"
#include "mylibrary/http.hpp"
#include "mylibrary/seed.hpp"

using namespace mylib;

namespace {

HttpServer *g_server = nullptr;

void OnSignal(int) {
    if (g_server)
        g_server->stop();
}

Config LoadConfig(const std::string &path, const std::string &data_dir) {
    Config c = path.empty() ? Config{} : load_config(path);
    if (!data_dir.empty())
        c.data_dir = data_dir;
    return c;
}

std::vector<std::string> Inputs(const std::vector<std::string> &args) {
    if (!args.empty())
        return args;
    std::vector<std::string> lines;
    for (std::string line; std::getline(std::cin, line);)
        if (!line.empty())
            lines.push_back(line);
    return lines;
}

int Serve(const Config &config, const std::string &listen) {
    auto services = make_services(config, system_clock());
    std::string host = config.listen_host;
    int port = config.listen_port;
    if (!listen.empty()) {
        const auto colon = listen.rfind(':');
        if (colon == std::string::npos)
            throw Error(Errc::invalid_argument, "--listen expects host:port");
        host = listen.substr(0, colon);
        port = std::stoi(listen.substr(colon + 1));
    }
    std::filesystem::create_directories(config.resolved_access_log().parent_path());
    std::ofstream log(config.resolved_access_log(), std::ios::app);
    if (!log)
        throw Error(Errc::io_error, "cannot open access log " + config.resolved_access_log().string());
    HttpServer server(*services, &log);
    const int bound = server.bind(host, port);
    spdlog::info("listening on http://{}:{}", host, bound);
    g_server = &server;
    std::signal(SIGINT, OnSignal);
    std::signal(SIGTERM, OnSignal);
    server.run();
    g_server = nullptr;
    return 0;
}

int CallnoParse(const std::vector<std::string> &args) {
    int status = 0;
    for (const auto &text : Inputs(args)) {
        try {
            const auto c = callno::parse_call_number(text);
            std::cout << callno::format(c) << '\t' << callno::sort_key(c).hex() << '\n';
        } catch (const ParseError &e) {
            std::cout << text << "\terror at " << e.offset() << ": " << e.reason() << '\n';
            status = 1;
        }
    }
    return status;
}

int CallnoSort(const std::vector<std::string> &args) {
    std::vector<std::pair<callno::CallNumber, std::string>> items;
    int status = 0;
    for (const auto &text : Inputs(args)) {
        if (auto c = callno::try_parse_call_number(text))
            items.emplace_back(std::move(*c), text);
        else {
            std::cerr << "skipping unparseable call number: " << text << '\n';
            status = 1;
        }
    }
    std::stable_sort(items.begin(), items.end(),
                     [](const auto &a, const auto &b) { return callno::compare(a.first, b.first) < 0; });
    for (const auto &[c, text] : items)
        std::cout << text << '\n';
    return status;
}

int CallnoMatch(const std::string &ranges_text, const std::vector<std::string> &args) {
    const auto ranges = callno::parse_range_list(ranges_text);
    for (const auto &text : Inputs(args)) {
        const auto c = callno::try_parse_call_number(text);
        std::cout << text << '\t' << (!c ? "invalid" : callno::in_any_range(*c, ranges) ? "match" : "no-match") << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"MyLibrary personalized library portal"};
    app.require_subcommand(1);
    std::string config_path;
    std::string data_dir;
    app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--data-dir", data_dir, "Override the data directory");

    auto *serve = app.add_subcommand("serve", "Run the HTTP service");
    std::string listen;
    serve->add_option("--listen", listen, "host:port to listen on");

    auto *cn = app.add_subcommand("callno", "Call number utilities");
    cn->require_subcommand(1);
    std::vector<std::string> cn_args;
    auto *cn_parse = cn->add_subcommand("parse", "Print canonical form and sort key");
    cn_parse->add_option("callno", cn_args, "Call numbers (default: stdin lines)");
    auto *cn_sort = cn->add_subcommand("sort", "Sort call numbers into shelf order");
    cn_sort->add_option("callno", cn_args, "Call numbers (default: stdin lines)");
    auto *cn_match = cn->add_subcommand("match", "Test call numbers against a range list");
    std::string ranges;
    cn_match->add_option("--ranges", ranges, "e.g. \"b - bd, z - zz\"")->required();
    cn_match->add_option("callno", cn_args, "Call numbers (default: stdin lines)");

    auto *weekly = app.add_subcommand("run-weekly", "Send the weekly current-awareness digests");
    std::string now_text;
    weekly->add_option("--now", now_text, "Evaluation time, YYYY-MM-DDTHH:MM:SSZ");

    auto *ingest = app.add_subcommand("ingest", "Load a tab-separated acquisitions file");
    std::string ingest_file;
    ingest->add_option("file", ingest_file)->required()->check(CLI::ExistingFile);

    auto *seed = app.add_subcommand("seed", "Load disciplines, librarians, resources and recommendations");
    std::string seed_file;
    seed->add_option("file", seed_file)->required()->check(CLI::ExistingFile);

    auto *admin = app.add_subcommand("admin", "Administrator accounts");
    admin->require_subcommand(1);
    auto *add_user = admin->add_subcommand("add-user", "Create or reset an administrator");
    std::string username;
    bool password_stdin = false;
    add_user->add_option("--username", username)->required();
    add_user->add_flag("--password-stdin", password_stdin, "Read the password from standard input")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cn->parsed()) {
            if (cn_parse->parsed())
                return CallnoParse(cn_args);
            if (cn_sort->parsed())
                return CallnoSort(cn_args);
            return CallnoMatch(ranges, cn_args);
        }

        const Config config = LoadConfig(config_path, data_dir);
        if (serve->parsed())
            return Serve(config, listen);

        auto services = make_services(config, system_clock());
        if (weekly->parsed()) {
            const auto now = now_text.empty() ? services->clock() : parse_timestamp(now_text);
            const auto r = services->alerts->weekly_run(now);
            std::cout << "week " << r.week.str() << ": evaluated " << r.profiles_evaluated << ", sent "
                      << r.emails_sent << ", suppressed " << r.emails_suppressed << ", queued " << r.emails_queued
                      << ", already sent " << r.already_dispatched << '\n';
            return r.busy ? 3 : 0;
        }
        if (ingest->parsed()) {
            std::ifstream in(ingest_file);
            const auto file = read_acquisition_file(in);
            const auto r = services->store->record_acquisitions(file.records, file.malformed);
            std::cout << "accepted " << r.accepted << ", duplicates " << r.duplicates << ", quarantined "
                      << r.quarantined << '\n';
            for (const auto &reason : r.reasons)
                std::cout << "  " << reason << '\n';
            return 0;
        }
        if (seed->parsed()) {
            std::ifstream in(seed_file);
            const auto r = load_seed(*services->store, in, services->clock());
            for (const auto &[type, n] : r.created)
                std::cout << "created " << n << ' ' << type << '\n';
            for (const auto &[type, n] : r.reused)
                std::cout << "reused " << n << ' ' << type << '\n';
            return 0;
        }
        if (add_user->parsed()) {
            std::string password;
            std::getline(std::cin, password);
            if (!password.empty() && password.back() == '\r')
                password.pop_back();
            services->admin->create_account(username, password);
            std::cout << "administrator " << username << " saved\n";
            return 0;
        }
    } catch (const Error &e) {
        std::cerr << "mylibrary: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
