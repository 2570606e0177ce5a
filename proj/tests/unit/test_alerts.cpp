#include "doctest.h"

#include <condition_variable>
#include <future>
#include <set>

#include "mylibrary/alerts.hpp"
#include "mylibrary/error.hpp"
#include "support/fixtures.hpp"
#include "support/sdi_fixture.hpp"

using namespace mylib;
using namespace std::chrono_literals;
using testing::At;

namespace {

// Thursday of ISO week 2026-W42.
const Timestamp kNow = At("2026-10-15T12:00:00Z");

AcquisitionRecord Acq(const char *callno, const char *date, const char *title = "Title") {
    return {callno, "Morgan", title, std::string("https://catalog.example.edu/") + callno, parse_date(date)};
}

struct World {
    std::unique_ptr<Store> store = make_memory_store();
    std::shared_ptr<testing::RecordingTransport> transport = std::make_shared<testing::RecordingTransport>();
    std::shared_ptr<MailDispatcher> dispatcher = std::make_shared<MailDispatcher>(transport);
    AlertService alerts{*store, dispatcher, {}};
    DisciplineId discipline = store->create_discipline("Philosophy", "").id;

    UserId User(const std::string &auth, const std::string &email = "") {
        return store->create_user(auth, "User " + auth, email.empty() ? auth + "@example.edu" : email, discipline,
                                  kNow)
            .id;
    }
};

} // namespace

TEST_CASE("window resolution") {
    const auto offset = 0min;
    CHECK(resolve_window({2, 0}, kNow, offset) == DateRange{parse_date("2026-09-28"), parse_date("2026-10-16")});
    CHECK(resolve_window({1, 1}, kNow, offset) == DateRange{parse_date("2026-10-05"), parse_date("2026-10-12")});
    CHECK(resolve_window({0, 0}, kNow, offset) == DateRange{parse_date("2026-10-12"), parse_date("2026-10-16")});
    CHECK_THROWS_AS(resolve_window({0, 1}, kNow, offset), Error);

    SUBCASE("monday midnight belongs to the new week") {
        const auto r = resolve_window({1, 1}, At("2026-10-12T00:00:00Z"), offset);
        CHECK(r.start == parse_date("2026-10-05"));
    }
    SUBCASE("time zone shifts the local day") {
        // 02:00 UTC Monday is still Sunday evening five hours west.
        const auto r = resolve_window({0, 0}, At("2026-10-12T02:00:00Z"), -300min);
        CHECK(r.start == parse_date("2026-10-05"));
        CHECK(r.end == parse_date("2026-10-12"));
    }
    SUBCASE("agrees with day arithmetic") {
        std::mt19937_64 rng(99);
        for (int i = 0; i < 2000; ++i) {
            const auto now = Timestamp(std::chrono::seconds(1500000000 + static_cast<long long>(rng() % 400000000)));
            const auto offset_min = std::chrono::minutes(static_cast<int>(rng() % 1500) - 720);
            const unsigned to = rng() % 5;
            const unsigned from = to + rng() % 5;
            const auto r = resolve_window({from, to}, now, offset_min);
            const long long local_seconds = now.time_since_epoch().count() + offset_min.count() * 60;
            const long long today = local_seconds / 86400;
            const auto [start, end] = testing::OracleWindow(today, from, to);
            CHECK(testing::DayNumber(r.start) == start);
            CHECK(testing::DayNumber(r.end) == end);
        }
    }
}

TEST_CASE("window query") {
    World w;
    const auto user = w.User("alice");
    const auto profile = w.alerts.save_profile(user, "b - bd, z - zz", Delivery::screen);
    CHECK(profile.ranges.size() == 2);

    SUBCASE("empty catalog") { CHECK(w.alerts.run_window_query(profile, {2, 0}, kNow).items.empty()); }

    SUBCASE("matches by range and week") {
        w.store->record_acquisitions(std::vector{Acq("Z671 .L7", "2026-10-08"), Acq("BD41 .M67 1999", "2026-10-08"),
                                                 Acq("QA76 .A1", "2026-10-08"), Acq("B105 .A1", "2026-09-24"),
                                                 Acq("ZA4 .B3", "2026-10-15")});
        const auto r = w.alerts.run_window_query(profile, {2, 0}, kNow);
        std::vector<std::string> got;
        for (const auto &item : r.items)
            got.push_back(item.call_number);
        CHECK(got == std::vector<std::string>{"BD41 .M67 1999", "Z671 .L7", "ZA4 .B3"});
        CHECK(r.items[0].author == "Morgan");
        CHECK(r.items[0].record_url == "https://catalog.example.edu/BD41 .M67 1999");

        const auto last_week = w.alerts.run_window_query(profile, {1, 1}, kNow);
        CHECK(last_week.items.size() == 2);
        CHECK(w.alerts.run_window_query(profile, {3, 3}, kNow).items.size() == 1);
    }

    SUBCASE("user union has no repeats") {
        w.alerts.save_profile(user, "b - c", Delivery::screen);
        w.store->record_acquisitions(std::vector{Acq("BD41", "2026-10-08"), Acq("C1", "2026-10-08")});
        const auto items = w.alerts.run_user_query(user, {2, 0}, kNow);
        CHECK(items.size() == 2);
    }

    SUBCASE("bad ranges") {
        CHECK_THROWS_AS(w.alerts.save_profile(user, "", Delivery::email), ParseError);
        CHECK(w.alerts.save_profile(user, "q", Delivery::screen).ranges.size() == 1);
    }
}

TEST_CASE("digest format") {
    World w;
    const auto user = w.User("alice");
    const auto profile = w.alerts.save_profile(user, "b - bd", Delivery::email);
    w.store->record_acquisitions(std::vector{Acq("BD41 .M67 1999", "2026-10-08", "Metaphysics")});
    const auto result = w.alerts.run_window_query(profile, {1, 1}, kNow);
    const auto m = w.alerts.format_digest(result, *w.store->find_user(user), profile, IsoWeek{2026, 41}, kNow);
    CHECK(m.to == "User alice <alice@example.edu>");
    CHECK(m.subject == "New titles in B - BD (2026-W41)");
    CHECK(m.key == std::to_string(profile.id.value) + "_2026-W41");
    CHECK(m.body.find("BD41 .M67 1999 | Morgan | Metaphysics\nhttps://catalog.example.edu/BD41 .M67 1999\n") !=
          std::string::npos);
    CHECK(m.body.find('<') == std::string::npos);
}

TEST_CASE("weekly run") {
    World w;
    const auto a = w.User("alice");
    const auto b = w.User("bob");
    const auto c = w.User("carol");
    w.alerts.save_profile(a, "b - bd", Delivery::email);
    w.alerts.save_profile(b, "q", Delivery::email);
    w.alerts.save_profile(c, "b", Delivery::screen);
    w.store->record_acquisitions(std::vector{Acq("BD41", "2026-10-08"), Acq("B12", "2026-10-09")});

    const auto first = w.alerts.weekly_run(kNow);
    CHECK(first.week == IsoWeek{2026, 41});
    CHECK(first.profiles_evaluated == 2);
    CHECK(first.emails_sent == 1);
    CHECK(first.emails_suppressed == 1);
    REQUIRE(w.transport->sent().size() == 1);
    CHECK(w.transport->sent()[0].to.find("alice@") != std::string::npos);

    const auto second = w.alerts.weekly_run(kNow + 1h);
    CHECK(second.emails_sent == 0);
    CHECK(second.already_dispatched == 1);
    CHECK(w.transport->sent().size() == 1);

    SUBCASE("next week is a new week") {
        w.store->record_acquisitions(std::vector{Acq("BD42", "2026-10-13")});
        const auto next = w.alerts.weekly_run(kNow + 7 * 24h);
        CHECK(next.week == IsoWeek{2026, 42});
        CHECK(next.emails_sent == 1);
    }
}

TEST_CASE("weekly run survives transport failures") {
    World w;
    const auto a = w.User("alice");
    const auto b = w.User("bob");
    w.alerts.save_profile(a, "b", Delivery::email);
    w.alerts.save_profile(b, "b", Delivery::email);
    w.store->record_acquisitions(std::vector{Acq("B12", "2026-10-09")});
    w.transport->fail_next = 1;
    const auto r = w.alerts.weekly_run(kNow);
    CHECK(r.emails_sent == 1);
    CHECK(r.emails_queued == 1);
    CHECK(w.dispatcher->pending() == 1);

    const auto again = w.alerts.weekly_run(kNow + 1h);
    CHECK(again.retries_sent == 1);
    CHECK(again.emails_sent == 0);
    CHECK(w.transport->sent().size() == 2);
}

TEST_CASE("weekly run is single flight") {
    struct Gate : MailTransport {
        std::mutex mu;
        std::condition_variable cv;
        bool entered = false;
        bool release = false;
        void send(const MailMessage &) override {
            std::unique_lock lock(mu);
            entered = true;
            cv.notify_all();
            cv.wait(lock, [&] { return release; });
        }
    };
    auto store = make_memory_store();
    auto gate = std::make_shared<Gate>();
    AlertService alerts(*store, std::make_shared<MailDispatcher>(gate), {});
    const auto d = store->create_discipline("D", "");
    const auto u = store->create_user("u", "", "u@example.edu", d.id, kNow);
    alerts.save_profile(u.id, "b", Delivery::email);
    store->record_acquisitions(std::vector{Acq("B1", "2026-10-09")});

    auto first = std::async(std::launch::async, [&] { return alerts.weekly_run(kNow); });
    {
        std::unique_lock lock(gate->mu);
        gate->cv.wait(lock, [&] { return gate->entered; });
    }
    CHECK(alerts.weekly_run(kNow).busy);
    {
        std::lock_guard lock(gate->mu);
        gate->release = true;
    }
    gate->cv.notify_all();
    CHECK_FALSE(first.get().busy);
    CHECK_FALSE(alerts.weekly_run(kNow).busy);
}

TEST_CASE("window queries agree with the brute-force filter") {
    World w;
    const Date today = parse_date("2026-10-15");
    const auto acquisitions = testing::SyntheticAcquisitions(2024, 1000, today);
    const auto report = w.store->record_acquisitions(acquisitions);
    CHECK(report.accepted + report.duplicates == 1000);
    const auto profiles = testing::SyntheticProfiles(77, 50);
    const auto user = w.User("alice");

    for (const auto &p : profiles) {
        const auto saved = w.alerts.save_profile(user, p.text(), Delivery::screen);
        for (const TimeWindow window : {TimeWindow{2, 0}, TimeWindow{1, 1}, TimeWindow{5, 2}}) {
            const auto got = w.alerts.run_window_query(saved, window, kNow);
            const auto [start, end] =
                testing::OracleWindow(testing::DayNumber(today), window.from_weeks_ago, window.to_weeks_ago);
            const auto expected = testing::BruteForceMatches(acquisitions, p, start, end);
            std::multiset<std::string> got_urls, want_urls;
            for (const auto &item : got.items)
                got_urls.insert(item.record_url);
            for (auto i : expected)
                want_urls.insert(acquisitions[i].record_url);
            CHECK(got_urls == want_urls);
            for (std::size_t i = 1; i < got.items.size(); ++i)
                CHECK(oracle::compare(*oracle::parse(got.items[i - 1].call_number),
                                      *oracle::parse(got.items[i].call_number)) <= 0);
        }
    }
}
