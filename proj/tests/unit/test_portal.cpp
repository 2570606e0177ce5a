#include "doctest.h"

#include <algorithm>
#include <random>

#include "mylibrary/error.hpp"
#include "mylibrary/portal.hpp"
#include "support/fixtures.hpp"

using namespace mylib;
using namespace std::chrono_literals;
using testing::MakeLibrarian;
using testing::MakeResource;

namespace {

Errc CodeOf(const std::function<void()> &fn) {
    try {
        fn();
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("expected an error");
    return Errc::io_error;
}

struct World {
    testing::ManualClock clock{testing::At("2026-10-15T12:00:00Z")};
    std::unique_ptr<Store> store = make_memory_store();
    SessionTable sessions{30 * 24h, true, clock.clock()};
    std::unique_ptr<Authenticator> auth = make_stub_authenticator("https://sso.example.edu/login");
    AlertService alerts{*store, nullptr, {}};
    Portal portal{*store, sessions, *auth, alerts, Options(), clock.clock()};

    DisciplineId philosophy = store->create_discipline("Philosophy", "").id;
    DisciplineId chemistry = store->create_discipline("Chemistry", "").id;

    static PortalOptions Options() {
        PortalOptions o;
        o.reference_contact = {"LibRef", "515-2935", "libref@example.edu", std::nullopt};
        o.version = "1.0";
        return o;
    }

    Session Login(const std::string &auth_id, const Onboarding &onboarding = {}) {
        auto r = portal.resolve_session("", auth_id, onboarding);
        return std::get<Resolved>(r).session;
    }

    Resource Add(ResourceKind kind, const std::string &title, std::set<DisciplineId> ds) {
        return store->put_resource(MakeResource(kind, title, std::move(ds)));
    }
};

std::vector<std::string> Titles(const PageBlock &b) {
    std::vector<std::string> out;
    for (const auto &r : b.items)
        out.push_back(r.title);
    return out;
}

} // namespace

TEST_CASE("resolveSession") {
    World w;
    SUBCASE("no cookie and no assertion redirects to the authenticator") {
        const auto r = w.portal.resolve_session("", std::nullopt, {}, "/page");
        REQUIRE(std::holds_alternative<AuthRedirect>(r));
        CHECK(std::get<AuthRedirect>(r).location == "https://sso.example.edu/login?return_to=%2Fpage");
    }
    SUBCASE("assertion for a new identity creates the account") {
        const auto r = std::get<Resolved>(w.portal.resolve_session("", "alice", {"Alice", "alice@example.edu", "Chemistry"}));
        CHECK(r.created_account);
        CHECK(r.fresh);
        const auto user = w.store->find_user(r.session.user_id);
        CHECK(user->auth_id == "alice");
        CHECK(user->discipline_id == w.chemistry);
        CHECK(user->email == "alice@example.edu");

        const auto again = std::get<Resolved>(w.portal.resolve_session("", "alice", {}));
        CHECK_FALSE(again.created_account);
        CHECK(again.session.user_id == r.session.user_id);
        CHECK(again.session.token != r.session.token);
    }
    SUBCASE("valid token needs no redirect") {
        const auto s = w.Login("alice");
        const auto r = std::get<Resolved>(w.portal.resolve_session(s.token, std::nullopt));
        CHECK(r.session.user_id == s.user_id);
        CHECK_FALSE(r.fresh);
    }
    SUBCASE("malformed assertion") {
        CHECK(CodeOf([&] { w.portal.resolve_session("", std::string("not valid!"), {}); }) ==
              Errc::authentication_failed);
    }
    SUBCASE("default discipline is the lowest id") {
        const auto s = w.Login("bob");
        CHECK(w.store->find_user(s.user_id)->discipline_id == w.philosophy);
    }
    SUBCASE("unknown onboarding discipline") {
        CHECK(CodeOf([&] { w.portal.resolve_session("", "carol", {"", "", "Alchemy"}); }) == Errc::not_found);
    }
    SUBCASE("expired token redirects") {
        const auto s = w.Login("alice");
        w.clock.advance(31 * 24h);
        CHECK(std::holds_alternative<AuthRedirect>(w.portal.resolve_session(s.token, std::nullopt)));
    }
}

TEST_CASE("assemblePage") {
    World w;
    w.store->put_librarian(MakeLibrarian("Pat Leamon", "513-2990", "pat@example.edu", LibrarianRole::collection_manager,
                                         {w.philosophy}));
    w.store->put_librarian(MakeLibrarian("Susan Baker", "515-2936", "susan@example.edu",
                                         LibrarianRole::reference_librarian, {w.philosophy}));
    w.store->put_librarian(MakeLibrarian("Chem Person", "1", "chem@example.edu", LibrarianRole::reference_librarian,
                                         {w.chemistry}));
    const auto home = w.Add(ResourceKind::library_link, "NCSU Libraries home page", {w.philosophy});
    w.Add(ResourceKind::library_link, "Hours", {w.philosophy});
    w.store->set_recommendations(w.philosophy, Section::library_links, {home.id});
    const auto s = w.Login("alice");
    const auto page = w.portal.assemble_page(s.user_id);

    std::vector<Section> order;
    for (const auto &b : page.blocks)
        order.push_back(b.section);
    CHECK(order == std::vector<Section>(section_order().begin(), section_order().end()));

    CHECK(Titles(page.block(Section::library_links)) == std::vector<std::string>{"NCSU Libraries home page"});
    CHECK_FALSE(page.block(Section::library_links).customized);

    const auto &librarians = page.block(Section::your_librarians).librarians;
    REQUIRE(librarians.size() == 3);
    CHECK(librarians[0].name == "Susan Baker");
    CHECK(librarians[0].phone == "515-2936");
    CHECK(librarians[0].email == "susan@example.edu");
    CHECK(librarians[1].name == "Pat Leamon");
    CHECK(librarians[2].name == "LibRef");
    CHECK_FALSE(librarians[2].role.has_value());

    CHECK(page.block(Section::global_message).body.empty());
    CHECK_FALSE(page.block(Section::global_message).updated_at);
    CHECK(page.block(Section::message_from_librarian).body.empty());
    CHECK(page.block(Section::personal_links).items.empty());
    CHECK_FALSE(page.block(Section::header).classification);
    CHECK(page.block(Section::your_librarians).classification ==
          ServiceClassification{AssistanceMode::reactive, AssistanceAgent::human});
    CHECK(page.block(Section::footer).footer->version == "1.0");
    CHECK(page.block(Section::footer).footer->date == "2026-10-15");
    CHECK(page.block(Section::header).header->navigation.size() == 10);
    CHECK(page.block(Section::current_awareness).window_form->weeks.size() == 13);

    SUBCASE("messages") {
        w.store->set_global_message("Welcome back", w.clock.now());
        w.store->set_discipline_message(w.philosophy, "Try the authors database", w.clock.now());
        w.store->set_discipline_message(w.chemistry, "Chemistry only", w.clock.now());
        const auto p = w.portal.assemble_page(s.user_id);
        CHECK(p.block(Section::global_message).body == "Welcome back");
        CHECK(p.block(Section::message_from_librarian).body == "Try the authors database");
    }
}

TEST_CASE("dispatch") {
    World w;
    const auto r1 = w.Add(ResourceKind::library_link, "Hours", {w.philosophy});
    const auto r9 = w.Add(ResourceKind::library_link, "Catalog", {w.philosophy});
    const auto chem = w.Add(ResourceKind::library_link, "Chem library", {w.chemistry});
    w.store->set_recommendations(w.philosophy, Section::library_links, {r1.id});
    const auto s = w.Login("alice");

    SUBCASE("get returns the form with current selections checked") {
        const auto result = w.portal.dispatch(s.user_id, "get", {"library_links", {}, std::nullopt});
        const auto &form = std::get<CustomizationForm>(result);
        CHECK(form.current == std::vector<ResourceId>{r1.id});
        REQUIRE(form.groups.size() == 2);
        CHECK(form.groups[0].name == "Chemistry");
        CHECK(form.groups[0].items.size() == 1);
        CHECK_FALSE(form.groups[0].items[0].checked);
        const auto &phil = form.groups[1].items;
        REQUIRE(phil.size() == 2);
        CHECK(phil[0].resource.title == "Catalog");
        CHECK_FALSE(phil[0].checked);
        CHECK(phil[1].resource.title == "Hours");
        CHECK(phil[1].checked);

        const auto filtered =
            std::get<CustomizationForm>(w.portal.dispatch(s.user_id, "get", {"library_links", {}, w.chemistry}));
        CHECK(filtered.groups.size() == 1);
    }
    SUBCASE("set stores and returns the page") {
        const auto result = w.portal.dispatch(s.user_id, "set", {"library_links", {r9.id, chem.id}, std::nullopt});
        const auto &page = std::get<PageDocument>(result);
        CHECK(Titles(page.block(Section::library_links)) == std::vector<std::string>{"Catalog", "Chem library"});
        CHECK(page.block(Section::library_links).customized);
    }
    SUBCASE("anything else displays the page") {
        const auto result = w.portal.dispatch(s.user_id, "frobnicate", {});
        CHECK(std::get<PageDocument>(result) == w.portal.assemble_page(s.user_id));
    }
    SUBCASE("unknown section") {
        CHECK(CodeOf([&] { w.portal.dispatch(s.user_id, "get", {"nonsense", {}, std::nullopt}); }) ==
              Errc::invalid_argument);
        CHECK(CodeOf([&] { w.portal.dispatch(s.user_id, "display", {"nonsense", {}, std::nullopt}); }) ==
              Errc::invalid_argument);
        CHECK(CodeOf([&] { w.portal.dispatch(s.user_id, "get", {"header", {}, std::nullopt}); }) ==
              Errc::invalid_argument);
        CHECK(CodeOf([&] { w.portal.dispatch(s.user_id, "set", {}); }) == Errc::invalid_argument);
    }
}

TEST_CASE("quickSearch") {
    World w;
    auto engine = MakeResource(ResourceKind::quick_search_engine, "Dictionary", {w.philosophy});
    engine.url_template = "https://example.test/dict?q={query}";
    engine = w.store->put_resource(engine);
    const auto other = w.Add(ResourceKind::quick_search_engine, "Other", {w.philosophy});
    w.store->set_recommendations(w.philosophy, Section::quick_searches, {engine.id});
    const auto s = w.Login("alice");

    CHECK(w.portal.quick_search(s.user_id, engine.id, "hegel") == "https://example.test/dict?q=hegel");
    CHECK(w.portal.quick_search(s.user_id, engine.id, "free will") == "https://example.test/dict?q=free%20will");
    CHECK(CodeOf([&] { w.portal.quick_search(s.user_id, engine.id, ""); }) == Errc::invalid_argument);
    CHECK(CodeOf([&] { w.portal.quick_search(s.user_id, other.id, "x"); }) == Errc::not_found);
    CHECK(CodeOf([&] { w.portal.quick_search(s.user_id, ResourceId{999}, "x"); }) == Errc::not_found);
}

TEST_CASE("personal links") {
    World w;
    const auto alice = w.Login("alice");
    const auto bob = w.Login("bob");
    const auto link = w.portal.add_personal_link(alice.user_id, "NY Times", "https://www.nytimes.com/");
    CHECK(Titles(w.portal.assemble_page(alice.user_id).block(Section::personal_links)) ==
          std::vector<std::string>{"NY Times"});
    CHECK(CodeOf([&] { w.portal.add_personal_link(alice.user_id, "x", "not a url"); }) == Errc::invalid_argument);
    CHECK(CodeOf([&] { w.portal.delete_personal_link(bob.user_id, link.id); }) == Errc::forbidden);
    const auto form = w.portal.customization_form(alice.user_id, Section::personal_links);
    CHECK(form.personal_links.size() == 1);
    w.portal.delete_personal_link(alice.user_id, link.id);
    CHECK(w.portal.assemble_page(alice.user_id).block(Section::personal_links).items.empty());
}

TEST_CASE("setDiscipline") {
    World w;
    w.store->put_librarian(MakeLibrarian("Phil", "", "", LibrarianRole::reference_librarian, {w.philosophy}));
    w.store->put_librarian(MakeLibrarian("Chem", "", "", LibrarianRole::reference_librarian, {w.chemistry}));
    w.store->set_discipline_message(w.chemistry, "chem news", w.clock.now());
    const auto r = w.Add(ResourceKind::reference, "Handbook", {w.philosophy});
    w.store->set_recommendations(w.philosophy, Section::reference_shelf, {r.id});
    const auto s = w.Login("alice");
    const auto before = w.portal.assemble_page(s.user_id);

    CHECK(w.portal.set_discipline(s.user_id, w.philosophy) == before);
    const auto after = w.portal.set_discipline(s.user_id, w.chemistry);
    CHECK(after.block(Section::your_librarians).librarians[0].name == "Chem");
    CHECK(after.block(Section::message_from_librarian).body == "chem news");
    for (Section sec : section_order())
        if (is_customizable(sec) && sec != Section::current_awareness)
            CHECK(after.block(sec).items == before.block(sec).items);
    CHECK(CodeOf([&] { w.portal.set_discipline(s.user_id, DisciplineId{99}); }) == Errc::not_found);
}

TEST_CASE("logout") {
    World w;
    const auto a = w.Login("alice");
    const auto b = w.Login("alice");
    w.portal.logout(a.token);
    w.portal.logout(a.token);
    CHECK(std::holds_alternative<AuthRedirect>(w.portal.resolve_session(a.token, std::nullopt)));
    CHECK(std::holds_alternative<Resolved>(w.portal.resolve_session(b.token, std::nullopt)));
}

TEST_CASE("customizations survive logout and login") {
    World w;
    std::mt19937_64 rng(5);
    std::map<Section, std::vector<Resource>> pool;
    for (Section sec : section_order()) {
        const auto kind = resource_kind_for(sec);
        if (!is_customizable(sec) || !kind || *kind == ResourceKind::personal_link)
            continue;
        for (int i = 0; i < 6; ++i)
            pool[sec].push_back(w.Add(*kind, std::string(to_string(sec)) + " " + std::to_string(i), {w.philosophy}));
    }
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = w.Login("user" + std::to_string(trial));
        for (int op = 0; op < 10; ++op) {
            auto it = pool.begin();
            std::advance(it, static_cast<long>(rng() % pool.size()));
            std::vector<ResourceId> ids;
            for (const auto &r : it->second)
                if (rng() % 2)
                    ids.push_back(r.id);
            w.portal.dispatch(s.user_id, "set", {std::string(to_string(it->first)), ids, std::nullopt});
        }
        if (rng() % 2)
            w.portal.add_personal_link(s.user_id, "Link", "https://example.test/l");
        const auto before = w.portal.assemble_page(s.user_id);
        w.portal.logout(s.token);
        const auto again = w.Login("user" + std::to_string(trial));
        CHECK(again.user_id == s.user_id);
        CHECK(w.portal.assemble_page(again.user_id) == before);
        // Page agrees with the store.
        for (const auto &b : before.blocks) {
            if (!b.customizable || b.section == Section::current_awareness)
                continue;
            std::vector<ResourceId> shown, stored = w.store->selections(s.user_id, b.section).resource_ids;
            for (const auto &r : b.items)
                shown.push_back(r.id);
            std::sort(shown.begin(), shown.end());
            std::sort(stored.begin(), stored.end());
            CHECK(shown == stored);
        }
    }
}

TEST_CASE("page json") {
    World w;
    const auto s = w.Login("alice");
    const Json j = w.portal.assemble_page(s.user_id);
    REQUIRE(j.at("blocks").size() == 13);
    CHECK(j.at("blocks")[0].at("section") == "header");
    CHECK(j.at("blocks")[0].at("classification").is_null());
    CHECK(j.at("blocks")[1].at("body") == "");
    CHECK(j.at("blocks")[4].at("items").is_array());
    CHECK(j.at("blocks")[4].at("classification").at("mode") == "proactive");
    CHECK(j.at("blocks")[12].at("section") == "footer");
}
