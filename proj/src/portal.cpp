#include "mylibrary/portal.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>

#include "mylibrary/error.hpp"

namespace mylib {

namespace {

bool TitleLess(const Resource &a, const Resource &b) {
    const auto n = std::min(a.title.size(), b.title.size());
    for (std::size_t i = 0; i < n; ++i) {
        const int x = std::tolower(static_cast<unsigned char>(a.title[i]));
        const int y = std::tolower(static_cast<unsigned char>(b.title[i]));
        if (x != y)
            return x < y;
    }
    if (a.title.size() != b.title.size())
        return a.title.size() < b.title.size();
    return a.id < b.id;
}

Section RequireSection(std::string_view name) {
    const auto s = parse_section(name);
    if (!s)
        throw Error(Errc::invalid_argument, "unknown section '" + std::string(name) + "'");
    return *s;
}

int RoleRank(LibrarianRole r) { return r == LibrarianRole::reference_librarian ? 0 : 1; }

void PutOptional(Json &j, const char *key, const auto &value) {
    if (value)
        j[key] = *value;
}

} // namespace

std::string_view section_title(Section section) noexcept {
    switch (section) {
    case Section::header: return "Header";
    case Section::global_message: return "Global message";
    case Section::message_from_librarian: return "Message from your librarian";
    case Section::your_librarians: return "Your librarians";
    case Section::library_links: return "Library links";
    case Section::university_links: return "University links";
    case Section::current_awareness: return "Current Awareness";
    case Section::personal_links: return "Personal links";
    case Section::quick_searches: return "Quick Searches";
    case Section::reference_shelf: return "Reference Shelf";
    case Section::bibliographic_databases: return "Bibliographic databases";
    case Section::electronic_journals: return "Electronic journals";
    case Section::footer: return "Footer";
    }
    return "";
}

const PageBlock &PageDocument::block(Section section) const {
    for (const auto &b : blocks)
        if (b.section == section)
            return b;
    throw Error(Errc::not_found, "page has no " + std::string(to_string(section)) + " block");
}

void to_json(Json &j, const PageDocument &page) {
    Json blocks = Json::array();
    for (const auto &b : page.blocks) {
        Json jb{{"section", b.section},
                {"title", section_title(b.section)},
                {"customizable", b.customizable},
                {"customized", b.customized}};
        jb["classification"] = b.classification ? Json(*b.classification) : Json(nullptr);
        switch (b.section) {
        case Section::header: {
            Json nav = Json::array();
            for (const auto &n : b.header->navigation)
                nav.push_back({{"section", n.section}, {"label", n.label}, {"anchor", "#" + std::string(to_string(n.section))}});
            jb["user_name"] = b.header->user_name;
            jb["discipline"] = b.header->discipline;
            jb["navigation"] = std::move(nav);
            jb["links"] = {{"customize", "/customize"}, {"logout", "/logout"}};
            break;
        }
        case Section::footer:
            jb["version"] = b.footer->version;
            jb["date"] = b.footer->date;
            jb["contact"] = b.footer->contact;
            break;
        case Section::global_message:
        case Section::message_from_librarian:
            jb["body"] = b.body;
            jb["updated_at"] = b.updated_at ? timestamp_json(*b.updated_at) : Json(nullptr);
            break;
        case Section::your_librarians: {
            Json list = Json::array();
            for (const auto &c : b.librarians) {
                Json jc{{"name", c.name}, {"phone", c.phone}, {"email", c.email}};
                jc["role"] = c.role ? Json(*c.role) : Json("reference_contact");
                list.push_back(std::move(jc));
            }
            jb["librarians"] = std::move(list);
            break;
        }
        case Section::current_awareness: {
            jb["profiles"] = b.profiles;
            const auto &f = *b.window_form;
            jb["window_form"] = {{"weeks", f.weeks},
                                 {"from", f.defaults.from_weeks_ago},
                                 {"to", f.defaults.to_weeks_ago},
                                 {"outputs", f.outputs}};
            break;
        }
        default:
            jb["items"] = b.items;
            break;
        }
        blocks.push_back(std::move(jb));
    }
    j = Json{{"user_id", page.user_id}, {"blocks", std::move(blocks)}};
}

void to_json(Json &j, const CustomizationForm &form) {
    Json groups = Json::array();
    for (const auto &g : form.groups) {
        Json items = Json::array();
        for (const auto &item : g.items) {
            Json ji = item.resource;
            ji["checked"] = item.checked;
            items.push_back(std::move(ji));
        }
        Json jg{{"name", g.name}, {"items", std::move(items)}};
        jg["discipline_id"] = g.discipline_id ? Json(g.discipline_id->value) : Json(nullptr);
        groups.push_back(std::move(jg));
    }
    j = Json{{"section", form.section}, {"current", form.current}, {"groups", std::move(groups)}};
    if (form.section == Section::personal_links)
        j["personal_links"] = form.personal_links;
    if (form.section == Section::current_awareness)
        j["profiles"] = form.profiles;
}

Portal::Portal(Store &store, SessionTable &sessions, const Authenticator &auth, AlertService &alerts,
               PortalOptions options, Clock clock)
    : store_(store), sessions_(sessions), auth_(auth), alerts_(alerts), options_(std::move(options)),
      clock_(std::move(clock)) {}

User Portal::RequireUser(UserId id) const {
    auto u = store_.find_user(id);
    if (!u)
        throw Error(Errc::not_found, "no such user");
    return *u;
}

DisciplineId Portal::OnboardingDiscipline(const std::string &requested) const {
    if (!requested.empty()) {
        std::uint64_t id = 0;
        const auto *end = requested.data() + requested.size();
        if (std::from_chars(requested.data(), end, id).ptr == end) {
            if (store_.find_discipline(DisciplineId{id}))
                return DisciplineId{id};
        } else if (auto d = store_.find_discipline_by_name(requested)) {
            return d->id;
        }
        throw Error(Errc::not_found, "unknown discipline '" + requested + "'");
    }
    if (!options_.default_discipline.empty())
        if (auto d = store_.find_discipline_by_name(options_.default_discipline))
            return d->id;
    const auto all = store_.list_disciplines();
    if (all.empty())
        throw Error(Errc::conflict, "no disciplines are configured");
    return std::min_element(all.begin(), all.end(), [](const auto &a, const auto &b) { return a.id < b.id; })->id;
}

std::variant<Resolved, AuthRedirect> Portal::resolve_session(const std::string &token,
                                                             const std::optional<std::string> &assertion,
                                                             const Onboarding &onboarding, std::string_view return_to) {
    if (auto s = sessions_.resolve(token))
        return Resolved{*s, false, false};
    if (!assertion)
        return AuthRedirect{auth_.login_url(return_to)};

    const auto auth_id = auth_.verify(*assertion);
    bool created = false;
    auto user = store_.find_user_by_auth_id(auth_id);
    if (!user) {
        try {
            user = store_.create_user(auth_id, onboarding.name, onboarding.email,
                                      OnboardingDiscipline(onboarding.discipline), clock_());
            created = true;
        } catch (const Error &e) {
            // Lost the create race: use the existing account.
            if (e.code() != Errc::conflict || !(user = store_.find_user_by_auth_id(auth_id)))
                throw;
        }
    }
    return Resolved{sessions_.issue(user->id), created, true};
}

DispatchResult Portal::dispatch(UserId user, std::string_view command, const DispatchArgs &args) {
    std::optional<Section> section;
    if (!args.section.empty())
        section = RequireSection(args.section);
    if (command == "get" || command == "set") {
        if (!section)
            throw Error(Errc::invalid_argument, "command needs a section");
        if (command == "get")
            return customization_form(user, *section, args.discipline_filter);
        store_.set_selections(user, *section, args.resource_ids);
    }
    return assemble_page(user);
}

PageDocument Portal::assemble_page(UserId user_id) const {
    const User user = RequireUser(user_id);
    const auto discipline = store_.find_discipline(user.discipline_id);
    PageDocument page;
    page.user_id = user.id;

    for (Section s : section_order()) {
        PageBlock b;
        b.section = s;
        b.customizable = is_customizable(s);
        if (is_service(s))
            b.classification = classify(s);
        switch (s) {
        case Section::header: {
            HeaderContent h{user.name.empty() ? user.auth_id : user.name, discipline ? discipline->name : "", {}};
            for (Section n : section_order())
                if (is_service(n) && n != Section::global_message)
                    h.navigation.push_back({n, std::string(section_title(n))});
            b.header = std::move(h);
            break;
        }
        case Section::footer:
            b.footer = FooterContent{options_.version, format_date(local_date(clock_(), options_.utc_offset)),
                                     options_.contact};
            break;
        case Section::global_message:
        case Section::message_from_librarian: {
            const auto m = s == Section::global_message ? store_.live_global_message()
                                                        : store_.live_discipline_message(user.discipline_id);
            if (m) {
                b.body = m->body;
                b.updated_at = m->updated_at;
            }
            break;
        }
        case Section::your_librarians: {
            auto librarians = store_.librarians_for(user.discipline_id);
            std::sort(librarians.begin(), librarians.end(), [](const Librarian &a, const Librarian &b) {
                return std::tuple(RoleRank(a.role), a.name, a.id) < std::tuple(RoleRank(b.role), b.name, b.id);
            });
            for (const auto &l : librarians)
                b.librarians.push_back({l.name, l.phone, l.email, l.role});
            b.librarians.push_back(options_.reference_contact);
            break;
        }
        case Section::current_awareness: {
            b.profiles = store_.profiles_for(user.id);
            WindowForm form;
            for (unsigned w = 0; w <= options_.window_weeks; ++w)
                form.weeks.push_back(w);
            b.window_form = std::move(form);
            b.customized = !b.profiles.empty();
            break;
        }
        default: {
            const auto sel = store_.selections(user.id, s);
            b.customized = sel.customized;
            for (ResourceId id : sel.resource_ids)
                if (auto r = store_.find_resource(id))
                    b.items.push_back(std::move(*r));
            std::sort(b.items.begin(), b.items.end(), TitleLess);
            break;
        }
        }
        page.blocks.push_back(std::move(b));
    }
    return page;
}

CustomizationForm Portal::customization_form(UserId user_id, Section section,
                                             std::optional<DisciplineId> filter) const {
    if (!is_customizable(section))
        throw Error(Errc::invalid_argument, std::string(to_string(section)) + " is not customizable");
    const User user = RequireUser(user_id);
    CustomizationForm form;
    form.section = section;

    if (section == Section::current_awareness) {
        form.profiles = store_.profiles_for(user.id);
        return form;
    }
    const auto sel = store_.selections(user.id, section);
    form.current = sel.resource_ids;
    const std::set<ResourceId> checked(sel.resource_ids.begin(), sel.resource_ids.end());

    if (section == Section::personal_links) {
        for (const auto &r : store_.list_resources())
            if (r.owner_user_id == user.id)
                form.personal_links.push_back(r);
        std::sort(form.personal_links.begin(), form.personal_links.end(), TitleLess);
        return form;
    }

    std::vector<Discipline> disciplines;
    if (filter) {
        auto d = store_.find_discipline(*filter);
        if (!d)
            throw Error(Errc::not_found, "no such discipline");
        disciplines.push_back(*d);
    } else {
        disciplines = store_.list_disciplines();
        std::sort(disciplines.begin(), disciplines.end(),
                  [](const Discipline &a, const Discipline &b) { return std::tie(a.name, a.id) < std::tie(b.name, b.id); });
    }
    for (const auto &d : disciplines) {
        FormGroup g{d.id, d.name, {}};
        for (auto &r : store_.list_recommendations(d.id, section)) {
            const bool on = checked.contains(r.id);
            g.items.push_back({std::move(r), on});
        }
        form.groups.push_back(std::move(g));
    }
    if (!filter) {
        const auto kind = resource_kind_for(section);
        FormGroup general{std::nullopt, "General", {}};
        std::vector<Resource> loose;
        for (const auto &r : store_.list_resources())
            if (r.kind == kind && r.discipline_ids.empty())
                loose.push_back(r);
        std::sort(loose.begin(), loose.end(), TitleLess);
        for (auto &r : loose) {
            const bool on = checked.contains(r.id);
            general.items.push_back({std::move(r), on});
        }
        if (!general.items.empty())
            form.groups.push_back(std::move(general));
    }
    return form;
}

std::string Portal::quick_search(UserId user, ResourceId engine, std::string_view query) const {
    if (query.empty())
        throw Error(Errc::invalid_argument, "empty query");
    const auto sel = store_.selections(user, Section::quick_searches);
    const auto r = store_.find_resource(engine);
    if (!r || r->kind != ResourceKind::quick_search_engine || !r->url_template ||
        std::find(sel.resource_ids.begin(), sel.resource_ids.end(), engine) == sel.resource_ids.end())
        throw Error(Errc::not_found, "search engine not in your quick searches");
    std::string url = *r->url_template;
    const auto at = url.find(kQueryPlaceholder);
    url.replace(at, kQueryPlaceholder.size(), percent_encode(query));
    return url;
}

Resource Portal::add_personal_link(UserId user, const std::string &title, const std::string &url) {
    return store_.add_personal_link(user, title, url);
}

void Portal::delete_personal_link(UserId user, ResourceId id) { store_.delete_personal_link(user, id); }

PageDocument Portal::set_discipline(UserId user_id, DisciplineId discipline) {
    if (!store_.find_discipline(discipline))
        throw Error(Errc::not_found, "no such discipline");
    User user = RequireUser(user_id);
    if (user.discipline_id != discipline) {
        user.discipline_id = discipline;
        store_.update_user(user);
    }
    return assemble_page(user_id);
}

User Portal::set_preferences(UserId user_id, std::optional<bool> email_opt_in, std::optional<std::string> name,
                             std::optional<std::string> email) {
    User user = RequireUser(user_id);
    if (email_opt_in)
        user.email_opt_in = *email_opt_in;
    if (name)
        user.name = *name;
    if (email)
        user.email = *email;
    return store_.update_user(user);
}

CAProfile Portal::save_profile(UserId user, std::string_view range_text, Delivery delivery) {
    return alerts_.save_profile(user, range_text, delivery);
}

void Portal::delete_profile(UserId user, ProfileId id) { store_.delete_profile(user, id); }

AwarenessSearch Portal::current_awareness_search(UserId user_id, TimeWindow window, std::optional<ProfileId> profile,
                                                 Delivery output) {
    const User user = RequireUser(user_id);
    if (window.from_weeks_ago > options_.window_weeks)
        throw Error(Errc::invalid_argument, fmt::format("windows reach back at most {} weeks", options_.window_weeks));
    const auto now = clock_();
    AwarenessSearch out;
    out.dates = resolve_window(window, now, options_.utc_offset);
    callno::RangeList ranges;
    if (profile) {
        const auto p = store_.find_profile(*profile);
        if (!p || p->user_id != user.id)
            throw Error(Errc::not_found, "no such profile");
        out.items = alerts_.run_window_query(*p, window, now).items;
        ranges = p->ranges;
    } else {
        out.items = alerts_.run_user_query(user.id, window, now);
        for (const auto &p : store_.profiles_for(user.id))
            ranges.insert(ranges.end(), p.ranges.begin(), p.ranges.end());
    }
    if (output == Delivery::email) {
        if (ranges.empty())
            throw Error(Errc::invalid_argument, "no profile to search");
        out.emailed = alerts_.email_results(user, out.items, out.dates, ranges, now);
        out.queued = !out.emailed;
    }
    return out;
}

void Portal::logout(const std::string &token) { sessions_.revoke(token); }

} // namespace mylib
