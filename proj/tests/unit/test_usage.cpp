#include "doctest.h"

#include <sstream>

#include "mylibrary/usage.hpp"
#include "support/fixtures.hpp"
#include "support/usage_fixture.hpp"

using namespace mylib;

namespace {

UsageReport Report(const std::string &text, UsagePeriod period = {}) {
    std::istringstream in(text);
    return usage_report(in, period);
}

} // namespace

TEST_CASE("clf lines") {
    const std::string line =
        "127.0.0.1 - 7 [15/Oct/2026:12:00:05 +0000] \"GET /customize/library_links HTTP/1.1\" 200 1532";
    const auto e = parse_clf_line(line);
    REQUIRE(e);
    CHECK(e->host == "127.0.0.1");
    CHECK(e->authuser == "7");
    CHECK(e->at == testing::At("2026-10-15T12:00:05Z"));
    CHECK(e->method == "GET");
    CHECK(e->target == "/customize/library_links");
    CHECK(e->status == 200);
    CHECK(e->bytes == 1532u);
    CHECK(format_clf_line(*e) == line);

    const auto offset = parse_clf_line("h - - [15/Oct/2026:08:00:05 -0400] \"GET / HTTP/1.1\" 302 -");
    REQUIRE(offset);
    CHECK(offset->at == testing::At("2026-10-15T12:00:05Z"));
    CHECK_FALSE(offset->bytes);

    CHECK_FALSE(parse_clf_line(""));
    CHECK_FALSE(parse_clf_line("not a log line"));
    CHECK_FALSE(parse_clf_line("h - - [40/Oct/2026:08:00:05 +0000] \"GET / HTTP/1.1\" 200 1"));
    CHECK_FALSE(parse_clf_line("h - - [15/Oct/2026:08:00:05 +0000] \"GET / HTTP/1.1\" abc 1"));
}

TEST_CASE("route counters") {
    CHECK(route_counter("GET", "/page") == "page");
    CHECK(route_counter("GET", "/page?x=1") == "page");
    CHECK(route_counter("GET", "/customize/reference_shelf") == "customize.reference_shelf");
    CHECK(route_counter("POST", "/customize/reference_shelf") == "customize.reference_shelf.set");
    CHECK(route_counter("GET", "/customize/nope") == "other");
    CHECK(route_counter("GET", "/quick-search?engine=3&q=x") == "quick_search");
    CHECK(route_counter("DELETE", "/personal-links/4") == "personal_links.delete");
    CHECK(route_counter("GET", "/admin/reports") == "admin");
}

TEST_CASE("hand-tallied report") {
    const std::string log = "1.2.3.4 - 1 [15/Oct/2026:12:00:00 +0000] \"GET /page HTTP/1.1\" 200 10\n"
                            "1.2.3.4 - 1 [15/Oct/2026:12:00:01 +0000] \"GET /page HTTP/1.1\" 200 10\n"
                            "1.2.3.4 - 2 [15/Oct/2026:12:00:02 +0000] \"GET /customize/library_links HTTP/1.1\" 200 10\n";
    const auto r = Report(log);
    CHECK(r.counters == std::map<std::string, std::size_t>{{"page", 2}, {"customize.library_links", 1}});
    CHECK(r.requests == 3);
    CHECK(r.distinct_users == 2);
    CHECK(r.malformed == 0);

    SUBCASE("garbage is counted, not fatal") {
        const auto g = Report(log + "%%%%\n");
        CHECK(g.malformed == 1);
        CHECK(g.counters == r.counters);
    }
    SUBCASE("period bounds") {
        const auto p = Report(log, {testing::At("2026-10-15T12:00:01Z"), testing::At("2026-10-15T12:00:02Z")});
        CHECK(p.requests == 1);
        CHECK(p.outside_period == 2);
    }
    SUBCASE("json") {
        const Json j = r;
        CHECK(j.at("counters").at("page") == 2);
        CHECK(j.at("from").is_null());
    }
}

TEST_CASE("empty log") {
    const auto r = Report("");
    CHECK(r.counters.empty());
    CHECK(r.requests == 0);
    CHECK(r.distinct_users == 0);
}

TEST_CASE("synthetic log matches generator tallies") {
    const auto log = testing::MakeSyntheticLog(11, 3000);
    const auto r = Report(log.text);
    CHECK(r.counters == log.counters);
    CHECK(r.resource_hits == log.engine_hits);
    CHECK(r.distinct_users == log.users.size());
    CHECK(r.requests == log.requests);
    CHECK(r.malformed == log.malformed);
    CHECK(Report(log.text) == r);
}
