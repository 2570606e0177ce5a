#include "mylibrary/store.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <tuple>
#include <unordered_map>

#include <fcntl.h>
#include <unistd.h>

#include <spdlog/spdlog.h>

#include "mylibrary/codec.hpp"

namespace mylib {

namespace {

namespace fs = std::filesystem;

constexpr const char *kSnapshotFormat = "mylibrary-snapshot";
constexpr int kSnapshotVersion = 1;

using AcquisitionKey = std::tuple<callno::SortKey, Date, std::string>;

std::string Lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool TitleLess(const Resource &a, const Resource &b) {
    const auto la = Lower(a.title);
    const auto lb = Lower(b.title);
    return la != lb ? la < lb : a.id < b.id;
}

std::vector<ResourceId> Dedupe(const std::vector<ResourceId> &ids) {
    std::vector<ResourceId> out;
    std::set<ResourceId> seen;
    for (ResourceId id : ids)
        if (seen.insert(id).second)
            out.push_back(id);
    return out;
}

template <class T>
Json Op(const char *name, const T &value) {
    return Json{{"op", name}, {"value", value}};
}

Json DeleteOp(const char *name, std::uint64_t id) { return Json{{"op", name}, {"id", id}}; }

[[noreturn]] void NotFound(const std::string &what) { throw Error(Errc::not_found, what + " not found"); }

// ---------------------------------------------------------------------------
// In-memory state and the operations that mutate it. Every mutation, live or
// replayed from disk, goes through Apply(); callers validate first.
// ---------------------------------------------------------------------------

struct State {
    std::map<DisciplineId, Discipline> disciplines;
    std::map<LibrarianId, Librarian> librarians;
    std::map<ResourceId, Resource> resources;
    std::map<UserId, User> users;
    std::unordered_map<std::string, UserId> users_by_auth;
    std::map<std::pair<UserId, Section>, SelectionSet> selections;
    std::map<std::pair<DisciplineId, Section>, RecommendationSet> recommendations;
    std::vector<Message> message_history;
    std::optional<Message> live_global;
    std::map<DisciplineId, Message> live_discipline;
    std::map<ProfileId, CAProfile> profiles;
    std::map<AcquisitionKey, StoredAcquisition> acquisitions;
    std::vector<QuarantinedRecord> quarantine;
    std::set<std::pair<ProfileId, IsoWeek>> dispatched;
    std::map<std::string, AdminAccount> admins;

    std::uint64_t next_discipline = 1;
    std::uint64_t next_librarian = 1;
    std::uint64_t next_resource = 1;
    std::uint64_t next_user = 1;
    std::uint64_t next_message = 1;
    std::uint64_t next_profile = 1;
};

void Bump(std::uint64_t &counter, std::uint64_t id) { counter = std::max(counter, id + 1); }

std::optional<StoredAcquisition> Stored(const AcquisitionRecord &record) {
    auto parsed = callno::try_parse_call_number(record.call_number);
    if (!parsed)
        return std::nullopt;
    StoredAcquisition out{record, *parsed, callno::sort_key(*parsed)};
    return out;
}

AcquisitionKey KeyOf(const StoredAcquisition &a) { return {a.key, a.record.accession_date, a.record.title}; }

void Apply(State &s, const Json &op) {
    const std::string name = op.at("op").get<std::string>();
    if (name == "discipline.put") {
        auto d = op.at("value").get<Discipline>();
        Bump(s.next_discipline, d.id.value);
        s.disciplines[d.id] = std::move(d);
    } else if (name == "discipline.delete") {
        const DisciplineId id{op.at("id").get<std::uint64_t>()};
        s.disciplines.erase(id);
        for (auto &[_, r] : s.resources)
            r.discipline_ids.erase(id);
        for (auto &[_, l] : s.librarians)
            l.discipline_ids.erase(id);
        std::erase_if(s.recommendations, [&](const auto &kv) { return kv.first.first == id; });
        s.live_discipline.erase(id);
    } else if (name == "librarian.put") {
        auto l = op.at("value").get<Librarian>();
        Bump(s.next_librarian, l.id.value);
        s.librarians[l.id] = std::move(l);
    } else if (name == "librarian.delete") {
        s.librarians.erase(LibrarianId{op.at("id").get<std::uint64_t>()});
    } else if (name == "resource.put") {
        auto r = op.at("value").get<Resource>();
        Bump(s.next_resource, r.id.value);
        s.resources[r.id] = std::move(r);
    } else if (name == "resource.delete") {
        const ResourceId id{op.at("id").get<std::uint64_t>()};
        s.resources.erase(id);
        for (auto &[_, set] : s.selections)
            std::erase(set.resource_ids, id);
        for (auto &[_, set] : s.recommendations)
            std::erase(set.resource_ids, id);
    } else if (name == "user.put") {
        auto u = op.at("value").get<User>();
        Bump(s.next_user, u.id.value);
        s.users_by_auth[u.auth_id] = u.id;
        s.users[u.id] = std::move(u);
    } else if (name == "selection.put") {
        auto set = op.at("value").get<SelectionSet>();
        s.selections[{set.user_id, set.section}] = std::move(set);
    } else if (name == "recommendation.put") {
        auto set = op.at("value").get<RecommendationSet>();
        s.recommendations[{set.discipline_id, set.section}] = std::move(set);
    } else if (name == "message.put") {
        auto m = op.at("value").get<Message>();
        Bump(s.next_message, m.id.value);
        if (m.scope == MessageScope::global) {
            if (m.body.empty())
                s.live_global.reset();
            else
                s.live_global = m;
        } else if (m.discipline_id && s.disciplines.contains(*m.discipline_id)) {
            if (m.body.empty())
                s.live_discipline.erase(*m.discipline_id);
            else
                s.live_discipline[*m.discipline_id] = m;
        }
        s.message_history.push_back(std::move(m));
    } else if (name == "profile.put") {
        auto p = op.at("value").get<CAProfile>();
        Bump(s.next_profile, p.id.value);
        s.profiles[p.id] = std::move(p);
    } else if (name == "profile.delete") {
        s.profiles.erase(ProfileId{op.at("id").get<std::uint64_t>()});
    } else if (name == "acquisition.put") {
        if (auto stored = Stored(op.at("value").get<AcquisitionRecord>()))
            s.acquisitions.emplace(KeyOf(*stored), std::move(*stored));
    } else if (name == "quarantine.put") {
        s.quarantine.push_back(op.at("value").get<QuarantinedRecord>());
    } else if (name == "dispatch.put") {
        const ProfileId profile{op.at("profile").get<std::uint64_t>()};
        const IsoWeek week{op.at("year").get<int>(), op.at("week").get<unsigned>()};
        s.dispatched.insert({profile, week});
    } else if (name == "admin.put") {
        auto a = op.at("value").get<AdminAccount>();
        s.admins[a.username] = std::move(a);
    } else if (name == "counters") {
        Bump(s.next_discipline, op.at("discipline").get<std::uint64_t>() - 1);
        Bump(s.next_librarian, op.at("librarian").get<std::uint64_t>() - 1);
        Bump(s.next_resource, op.at("resource").get<std::uint64_t>() - 1);
        Bump(s.next_user, op.at("user").get<std::uint64_t>() - 1);
        Bump(s.next_message, op.at("message").get<std::uint64_t>() - 1);
        Bump(s.next_profile, op.at("profile").get<std::uint64_t>() - 1);
    } else {
        throw Error(Errc::io_error, "unknown journal operation '" + name + "'");
    }
}

/// Ops that rebuild `s` from empty.
std::vector<Json> SnapshotOps(const State &s) {
    std::vector<Json> ops;
    ops.push_back(Json{{"op", "counters"},
                       {"discipline", s.next_discipline},
                       {"librarian", s.next_librarian},
                       {"resource", s.next_resource},
                       {"user", s.next_user},
                       {"message", s.next_message},
                       {"profile", s.next_profile}});
    for (const auto &[_, v] : s.disciplines)
        ops.push_back(Op("discipline.put", v));
    for (const auto &[_, v] : s.librarians)
        ops.push_back(Op("librarian.put", v));
    for (const auto &[_, v] : s.users)
        ops.push_back(Op("user.put", v));
    for (const auto &[_, v] : s.resources)
        ops.push_back(Op("resource.put", v));
    for (const auto &[_, v] : s.selections)
        ops.push_back(Op("selection.put", v));
    for (const auto &[_, v] : s.recommendations)
        ops.push_back(Op("recommendation.put", v));
    for (const auto &m : s.message_history)
        ops.push_back(Op("message.put", m));
    for (const auto &[_, v] : s.profiles)
        ops.push_back(Op("profile.put", v));
    for (const auto &[_, v] : s.acquisitions)
        ops.push_back(Op("acquisition.put", v.record));
    for (const auto &q : s.quarantine)
        ops.push_back(Op("quarantine.put", q));
    for (const auto &[profile, week] : s.dispatched)
        ops.push_back(Json{{"op", "dispatch.put"}, {"profile", profile.value}, {"year", week.year}, {"week", week.week}});
    for (const auto &[_, v] : s.admins)
        ops.push_back(Op("admin.put", v));
    return ops;
}

// ---------------------------------------------------------------------------
// Durable append-only journal: one JSON transaction per line.
// ---------------------------------------------------------------------------

class Journal {
public:
    explicit Journal(fs::path path) : path_(std::move(path)) { Open(O_APPEND); }
    ~Journal() {
        if (fd_ >= 0)
            ::close(fd_);
    }
    Journal(const Journal &) = delete;
    Journal &operator=(const Journal &) = delete;

    void Append(const Json &txn) {
        const std::string line = txn.dump() + "\n";
        std::size_t written = 0;
        while (written < line.size()) {
            const auto n = ::write(fd_, line.data() + written, line.size() - written);
            if (n < 0)
                throw Error(Errc::io_error, "journal write failed: " + path_.string());
            written += static_cast<std::size_t>(n);
        }
        if (::fdatasync(fd_) != 0)
            throw Error(Errc::io_error, "journal sync failed: " + path_.string());
    }

    void Truncate() {
        ::close(fd_);
        Open(O_TRUNC);
    }

private:
    void Open(int mode) {
        fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | mode, 0644);
        if (fd_ < 0)
            throw Error(Errc::io_error, "cannot open journal " + path_.string());
    }

    fs::path path_;
    int fd_ = -1;
};

void WriteFileSynced(const fs::path &path, const std::string &content) {
    const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0)
        throw Error(Errc::io_error, "cannot write " + path.string());
    std::size_t written = 0;
    bool ok = true;
    while (ok && written < content.size()) {
        const auto n = ::write(fd, content.data() + written, content.size() - written);
        ok = n >= 0;
        if (ok)
            written += static_cast<std::size_t>(n);
    }
    ok = ok && ::fsync(fd) == 0;
    ::close(fd);
    if (!ok)
        throw Error(Errc::io_error, "cannot write " + path.string());
}

// ---------------------------------------------------------------------------

class JournaledStore final : public Store {
public:
    JournaledStore() = default;

    JournaledStore(fs::path directory, FileStoreOptions options) : dir_(std::move(directory)), options_(options) {
        fs::create_directories(dir_);
        Load();
        journal_ = std::make_unique<Journal>(JournalPath());
    }

    // Disciplines ------------------------------------------------------------

    Discipline create_discipline(const std::string &name, const std::string &description) override {
        std::unique_lock lock(mutex_);
        Discipline d{DisciplineId{state_.next_discipline}, name, description};
        CheckDiscipline(d);
        Commit({Op("discipline.put", d)});
        return d;
    }

    Discipline update_discipline(const Discipline &discipline) override {
        std::unique_lock lock(mutex_);
        if (!state_.disciplines.contains(discipline.id))
            NotFound("discipline " + discipline.id.str());
        CheckDiscipline(discipline);
        Commit({Op("discipline.put", discipline)});
        return discipline;
    }

    DeletionReport delete_discipline(DisciplineId id) override {
        std::unique_lock lock(mutex_);
        if (!state_.disciplines.contains(id))
            NotFound("discipline " + id.str());
        const auto users = std::count_if(state_.users.begin(), state_.users.end(),
                                         [&](const auto &kv) { return kv.second.discipline_id == id; });
        const auto librarians = std::count_if(state_.librarians.begin(), state_.librarians.end(),
                                              [&](const auto &kv) { return kv.second.discipline_ids.contains(id); });
        if (users > 0 || librarians > 0)
            throw ReferencedError("discipline " + id.str(), {{"users", static_cast<std::size_t>(users)},
                                                             {"librarians", static_cast<std::size_t>(librarians)}});
        DeletionReport report;
        for (const auto &[_, r] : state_.resources)
            report.resources += r.discipline_ids.contains(id) ? 1 : 0;
        for (const auto &[key, _] : state_.recommendations)
            report.recommendations += key.first == id ? 1 : 0;
        report.messages = state_.live_discipline.contains(id) ? 1 : 0;
        Commit({DeleteOp("discipline.delete", id.value)});
        return report;
    }

    std::optional<Discipline> find_discipline(DisciplineId id) const override {
        std::shared_lock lock(mutex_);
        return Find(state_.disciplines, id);
    }

    std::optional<Discipline> find_discipline_by_name(const std::string &name) const override {
        std::shared_lock lock(mutex_);
        for (const auto &[_, d] : state_.disciplines)
            if (Lower(d.name) == Lower(name))
                return d;
        return std::nullopt;
    }

    std::vector<Discipline> list_disciplines() const override {
        std::shared_lock lock(mutex_);
        return Values(state_.disciplines);
    }

    // Librarians -------------------------------------------------------------

    Librarian put_librarian(const Librarian &librarian) override {
        std::unique_lock lock(mutex_);
        Librarian l = librarian;
        if (l.id.value == 0)
            l.id = LibrarianId{state_.next_librarian};
        else if (!state_.librarians.contains(l.id))
            NotFound("librarian " + l.id.str());
        if (auto v = validate_librarian(l); !v.empty())
            throw ValidationError(std::move(v));
        for (DisciplineId d : l.discipline_ids)
            RequireDiscipline(d);
        Commit({Op("librarian.put", l)});
        return l;
    }

    void delete_librarian(LibrarianId id) override {
        std::unique_lock lock(mutex_);
        if (!state_.librarians.contains(id))
            NotFound("librarian " + id.str());
        Commit({DeleteOp("librarian.delete", id.value)});
    }

    std::vector<Librarian> list_librarians() const override {
        std::shared_lock lock(mutex_);
        return Values(state_.librarians);
    }

    std::vector<Librarian> librarians_for(DisciplineId discipline) const override {
        std::shared_lock lock(mutex_);
        std::vector<Librarian> out;
        for (const auto &[_, l] : state_.librarians)
            if (l.discipline_ids.contains(discipline))
                out.push_back(l);
        return out;
    }

    // Resources --------------------------------------------------------------

    Resource put_resource(const Resource &resource) override {
        std::unique_lock lock(mutex_);
        Resource r = resource;
        if (r.id.value == 0) {
            r.id = ResourceId{state_.next_resource};
        } else {
            const auto it = state_.resources.find(r.id);
            if (it == state_.resources.end())
                NotFound("resource " + r.id.str());
            if (it->second.kind != r.kind)
                throw Error(Errc::invalid_argument, "a resource's kind cannot change");
        }
        if (auto v = validate_resource(r); !v.empty())
            throw ValidationError(std::move(v));
        for (DisciplineId d : r.discipline_ids)
            RequireDiscipline(d);
        if (r.owner_user_id && !state_.users.contains(*r.owner_user_id))
            NotFound("user " + r.owner_user_id->str());
        Commit({Op("resource.put", r)});
        return r;
    }

    DeletionReport delete_resource(ResourceId id) override {
        std::unique_lock lock(mutex_);
        if (!state_.resources.contains(id))
            NotFound("resource " + id.str());
        DeletionReport report = CascadeCount(id);
        Commit({DeleteOp("resource.delete", id.value)});
        return report;
    }

    std::optional<Resource> find_resource(ResourceId id) const override {
        std::shared_lock lock(mutex_);
        return Find(state_.resources, id);
    }

    std::vector<Resource> list_resources() const override {
        std::shared_lock lock(mutex_);
        return Values(state_.resources);
    }

    // Recommendations --------------------------------------------------------

    RecommendationSet set_recommendations(DisciplineId discipline, Section section,
                                          const std::vector<ResourceId> &ids) override {
        std::unique_lock lock(mutex_);
        RequireDiscipline(discipline);
        RequireCustomizable(section);
        RecommendationSet set{discipline, section, Dedupe(ids)};
        for (ResourceId id : set.resource_ids) {
            const Resource &r = RequireResource(id);
            if (r.kind == ResourceKind::personal_link)
                throw Error(Errc::invalid_argument, "personal links cannot be recommended");
            RequireCompatible(r, section);
        }
        Commit({Op("recommendation.put", set)});
        return set;
    }

    RecommendationSet recommendations(DisciplineId discipline, Section section) const override {
        std::shared_lock lock(mutex_);
        const auto it = state_.recommendations.find({discipline, section});
        return it != state_.recommendations.end() ? it->second : RecommendationSet{discipline, section, {}};
    }

    std::vector<RecommendationSet> list_recommendation_sets() const override {
        std::shared_lock lock(mutex_);
        return Values(state_.recommendations);
    }

    std::vector<Resource> list_recommendations(DisciplineId discipline, Section section) const override {
        std::shared_lock lock(mutex_);
        RequireDiscipline(discipline);
        RequireCustomizable(section);
        std::vector<Resource> out;
        const auto kind = resource_kind_for(section);
        if (!kind || *kind == ResourceKind::personal_link)
            return out;
        for (const auto &[_, r] : state_.resources)
            if (r.kind == *kind && r.discipline_ids.contains(discipline))
                out.push_back(r);
        std::sort(out.begin(), out.end(), TitleLess);
        return out;
    }

    // Users ------------------------------------------------------------------

    User create_user(const std::string &auth_id, const std::string &name, const std::string &email,
                     DisciplineId discipline, Timestamp now) override {
        std::unique_lock lock(mutex_);
        User u{UserId{state_.next_user}, auth_id, name, email, discipline, true, now};
        if (auth_id.empty())
            throw ValidationError({"auth_id must not be empty"});
        if (state_.users_by_auth.contains(auth_id))
            throw Error(Errc::conflict, "auth id already registered");
        RequireDiscipline(discipline);

        std::vector<Json> ops{Op("user.put", u)};
        for (Section section : section_order()) {
            if (!is_customizable(section))
                continue;
            SelectionSet set{u.id, section, {}, false};
            if (auto it = state_.recommendations.find({discipline, section}); it != state_.recommendations.end())
                set.resource_ids = it->second.resource_ids;
            ops.push_back(Op("selection.put", set));
        }
        Commit(std::move(ops));
        return u;
    }

    std::optional<User> find_user(UserId id) const override {
        std::shared_lock lock(mutex_);
        return Find(state_.users, id);
    }

    std::optional<User> find_user_by_auth_id(const std::string &auth_id) const override {
        std::shared_lock lock(mutex_);
        const auto it = state_.users_by_auth.find(auth_id);
        if (it == state_.users_by_auth.end())
            return std::nullopt;
        return state_.users.at(it->second);
    }

    User update_user(const User &user) override {
        std::unique_lock lock(mutex_);
        const auto it = state_.users.find(user.id);
        if (it == state_.users.end())
            NotFound("user " + user.id.str());
        RequireDiscipline(user.discipline_id);
        User u = user;
        u.auth_id = it->second.auth_id;
        u.created_at = it->second.created_at;
        Commit({Op("user.put", u)});
        return u;
    }

    std::vector<User> list_users() const override {
        std::shared_lock lock(mutex_);
        return Values(state_.users);
    }

    // Selections -------------------------------------------------------------

    SelectionSet set_selections(UserId user, Section section, const std::vector<ResourceId> &ids) override {
        std::unique_lock lock(mutex_);
        RequireUser(user);
        RequireCustomizable(section);
        SelectionSet set{user, section, Dedupe(ids), true};
        for (ResourceId id : set.resource_ids) {
            const Resource &r = RequireResource(id);
            RequireCompatible(r, section);
            if (r.kind == ResourceKind::personal_link && r.owner_user_id != user)
                throw Error(Errc::invalid_argument, "resource " + id.str() + " is another user's personal link");
        }
        Commit({Op("selection.put", set)});
        return set;
    }

    SelectionSet selections(UserId user, Section section) const override {
        std::shared_lock lock(mutex_);
        const auto it = state_.selections.find({user, section});
        return it != state_.selections.end() ? it->second : SelectionSet{user, section, {}, false};
    }

    // Personal links ---------------------------------------------------------

    Resource add_personal_link(UserId user, const std::string &title, const std::string &url) override {
        std::unique_lock lock(mutex_);
        RequireUser(user);
        Resource r;
        r.id = ResourceId{state_.next_resource};
        r.kind = ResourceKind::personal_link;
        r.title = title;
        r.url = url;
        r.owner_user_id = user;
        if (auto v = validate_resource(r); !v.empty())
            throw ValidationError(std::move(v));

        SelectionSet set{user, Section::personal_links, {}, true};
        if (auto it = state_.selections.find({user, Section::personal_links}); it != state_.selections.end())
            set.resource_ids = it->second.resource_ids;
        set.resource_ids.push_back(r.id);
        Commit({Op("resource.put", r), Op("selection.put", set)});
        return r;
    }

    void delete_personal_link(UserId user, ResourceId id) override {
        std::unique_lock lock(mutex_);
        const Resource &r = RequireResource(id);
        if (r.kind != ResourceKind::personal_link || r.owner_user_id != user)
            throw Error(Errc::forbidden, "resource " + id.str() + " is not one of your personal links");
        Commit({DeleteOp("resource.delete", id.value)});
    }

    // Messages ---------------------------------------------------------------

    Message set_global_message(const std::string &body, Timestamp now) override {
        std::unique_lock lock(mutex_);
        Message m{MessageId{state_.next_message}, MessageScope::global, std::nullopt, body, now};
        Commit({Op("message.put", m)});
        return m;
    }

    Message set_discipline_message(DisciplineId discipline, const std::string &body, Timestamp now) override {
        std::unique_lock lock(mutex_);
        RequireDiscipline(discipline);
        Message m{MessageId{state_.next_message}, MessageScope::discipline, discipline, body, now};
        Commit({Op("message.put", m)});
        return m;
    }

    std::optional<Message> live_global_message() const override {
        std::shared_lock lock(mutex_);
        return state_.live_global;
    }

    std::optional<Message> live_discipline_message(DisciplineId discipline) const override {
        std::shared_lock lock(mutex_);
        return Find(state_.live_discipline, discipline);
    }

    std::vector<Message> message_history() const override {
        std::shared_lock lock(mutex_);
        return state_.message_history;
    }

    // Profiles ---------------------------------------------------------------

    CAProfile save_profile(UserId user, const callno::RangeList &ranges, Delivery delivery) override {
        std::unique_lock lock(mutex_);
        RequireUser(user);
        if (ranges.empty())
            throw Error(Errc::invalid_argument, "a profile needs at least one call number range");
        for (const auto &r : ranges)
            if (r.lo.empty() || r.hi.empty() || callno::compare_class(r.lo, r.hi) > 0)
                throw Error(Errc::invalid_argument, "invalid range " + r.lo + " - " + r.hi);
        CAProfile p{ProfileId{state_.next_profile}, user, ranges, delivery};
        Commit({Op("profile.put", p)});
        return p;
    }

    void delete_profile(UserId user, ProfileId id) override {
        std::unique_lock lock(mutex_);
        const auto it = state_.profiles.find(id);
        if (it == state_.profiles.end())
            NotFound("profile " + id.str());
        if (it->second.user_id != user)
            throw Error(Errc::forbidden, "profile " + id.str() + " belongs to another user");
        Commit({DeleteOp("profile.delete", id.value)});
    }

    std::optional<CAProfile> find_profile(ProfileId id) const override {
        std::shared_lock lock(mutex_);
        return Find(state_.profiles, id);
    }

    std::vector<CAProfile> profiles_for(UserId user) const override {
        std::shared_lock lock(mutex_);
        std::vector<CAProfile> out;
        for (const auto &[_, p] : state_.profiles)
            if (p.user_id == user)
                out.push_back(p);
        return out;
    }

    std::vector<CAProfile> list_profiles() const override {
        std::shared_lock lock(mutex_);
        return Values(state_.profiles);
    }

    // Acquisitions -----------------------------------------------------------

    IngestReport record_acquisitions(std::span<const AcquisitionRecord> batch,
                                     std::span<const QuarantinedRecord> rejected) override {
        std::unique_lock lock(mutex_);
        IngestReport report;
        std::vector<Json> ops;
        std::set<AcquisitionKey> pending;
        for (const auto &q : rejected) {
            spdlog::warn("quarantined acquisition: {}", q.reason);
            report.reasons.push_back(q.reason);
            ops.push_back(Op("quarantine.put", q));
        }
        for (const AcquisitionRecord &record : batch) {
            try {
                const auto parsed = callno::parse_call_number(record.call_number);
                const AcquisitionKey key{callno::sort_key(parsed), record.accession_date, record.title};
                if (state_.acquisitions.contains(key) || !pending.insert(key).second) {
                    ++report.duplicates;
                    continue;
                }
                ops.push_back(Op("acquisition.put", record));
                ++report.accepted;
            } catch (const ParseError &e) {
                const std::string reason = "call number '" + record.call_number + "': " + e.what();
                spdlog::warn("quarantined acquisition: {}", reason);
                report.reasons.push_back(reason);
                ops.push_back(Op("quarantine.put", QuarantinedRecord{record, reason}));
            }
        }
        report.quarantined = report.reasons.size();
        if (!ops.empty())
            Commit(std::move(ops));
        return report;
    }

    std::vector<StoredAcquisition> acquisitions_between(Date from, Date to) const override {
        std::shared_lock lock(mutex_);
        std::vector<StoredAcquisition> out;
        for (const auto &[_, a] : state_.acquisitions)
            if (a.record.accession_date >= from && a.record.accession_date < to)
                out.push_back(a);
        return out;
    }

    std::size_t acquisition_count() const override {
        std::shared_lock lock(mutex_);
        return state_.acquisitions.size();
    }

    std::vector<QuarantinedRecord> quarantined() const override {
        std::shared_lock lock(mutex_);
        return state_.quarantine;
    }

    // Dispatch ledger --------------------------------------------------------

    bool mark_dispatched(ProfileId profile, const IsoWeek &week) override {
        std::unique_lock lock(mutex_);
        if (state_.dispatched.contains({profile, week}))
            return false;
        Commit({Json{{"op", "dispatch.put"}, {"profile", profile.value}, {"year", week.year}, {"week", week.week}}});
        return true;
    }

    bool was_dispatched(ProfileId profile, const IsoWeek &week) const override {
        std::shared_lock lock(mutex_);
        return state_.dispatched.contains({profile, week});
    }

    // Admin accounts ---------------------------------------------------------

    void put_admin_account(const AdminAccount &account) override {
        std::unique_lock lock(mutex_);
        if (account.username.empty() || account.password_verifier.empty())
            throw ValidationError({"admin account needs a username and a password verifier"});
        Commit({Op("admin.put", account)});
    }

    std::optional<AdminAccount> find_admin_account(const std::string &username) const override {
        std::shared_lock lock(mutex_);
        return Find(state_.admins, username);
    }

private:
    template <class Map, class Key>
    static std::optional<typename Map::mapped_type> Find(const Map &map, const Key &key) {
        const auto it = map.find(key);
        if (it == map.end())
            return std::nullopt;
        return it->second;
    }

    template <class Map>
    static std::vector<typename Map::mapped_type> Values(const Map &map) {
        std::vector<typename Map::mapped_type> out;
        out.reserve(map.size());
        for (const auto &[_, v] : map)
            out.push_back(v);
        return out;
    }

    void CheckDiscipline(const Discipline &d) const {
        if (auto v = validate_discipline(d); !v.empty())
            throw ValidationError(std::move(v));
        for (const auto &[id, other] : state_.disciplines)
            if (id != d.id && Lower(other.name) == Lower(d.name))
                throw Error(Errc::conflict, "discipline '" + d.name + "' already exists");
    }

    void RequireDiscipline(DisciplineId id) const {
        if (!state_.disciplines.contains(id))
            NotFound("discipline " + id.str());
    }

    void RequireUser(UserId id) const {
        if (!state_.users.contains(id))
            NotFound("user " + id.str());
    }

    const Resource &RequireResource(ResourceId id) const {
        const auto it = state_.resources.find(id);
        if (it == state_.resources.end())
            NotFound("resource " + id.str());
        return it->second;
    }

    static void RequireCustomizable(Section section) {
        if (!is_customizable(section))
            throw Error(Errc::invalid_argument, std::string(to_string(section)) + " is not customizable");
    }

    static void RequireCompatible(const Resource &r, Section section) {
        if (section_for(r.kind) != section)
            throw Error(Errc::invalid_argument, "resource " + r.id.str() + " (" + std::string(to_string(r.kind)) +
                                                    ") does not belong in " + std::string(to_string(section)));
    }

    DeletionReport CascadeCount(ResourceId id) const {
        DeletionReport report;
        for (const auto &[_, set] : state_.selections)
            report.selections += std::count(set.resource_ids.begin(), set.resource_ids.end(), id) > 0 ? 1 : 0;
        for (const auto &[_, set] : state_.recommendations)
            report.recommendations += std::count(set.resource_ids.begin(), set.resource_ids.end(), id) > 0 ? 1 : 0;
        return report;
    }

    /// Caller holds the write lock and has validated `ops`.
    void Commit(std::vector<Json> ops) {
        if (journal_)
            journal_->Append(Json{{"seq", seq_ + 1}, {"ops", ops}});
        ++seq_;
        for (const Json &op : ops)
            Apply(state_, op);
        if (journal_ && options_.snapshot_interval > 0 && ++since_snapshot_ >= options_.snapshot_interval) {
            try {
                WriteSnapshot();
            } catch (const std::exception &e) {
                spdlog::warn("snapshot failed, journal kept: {}", e.what());
            }
        }
    }

    fs::path JournalPath() const { return dir_ / "journal.jsonl"; }
    fs::path SnapshotPath() const { return dir_ / "snapshot.jsonl"; }

    void WriteSnapshot() {
        std::string content = Json{{"format", kSnapshotFormat}, {"version", kSnapshotVersion}, {"seq", seq_}}.dump() + "\n";
        for (const Json &op : SnapshotOps(state_))
            content += op.dump() + "\n";
        const fs::path tmp = dir_ / "snapshot.jsonl.tmp";
        WriteFileSynced(tmp, content);
        fs::rename(tmp, SnapshotPath());
        journal_->Truncate();
        since_snapshot_ = 0;
    }

    void Load() {
        std::uint64_t snapshot_seq = 0;
        if (std::ifstream in(SnapshotPath()); in) {
            std::string line;
            if (!std::getline(in, line))
                throw Error(Errc::io_error, "empty snapshot " + SnapshotPath().string());
            const Json header = Json::parse(line);
            if (header.value("format", "") != kSnapshotFormat || header.value("version", 0) != kSnapshotVersion)
                throw Error(Errc::io_error, "unsupported snapshot format in " + SnapshotPath().string());
            snapshot_seq = header.at("seq").get<std::uint64_t>();
            while (std::getline(in, line))
                if (!line.empty())
                    Apply(state_, Json::parse(line));
        }
        seq_ = snapshot_seq;

        std::ifstream in(JournalPath(), std::ios::binary);
        const std::string content{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
        std::size_t offset = 0;
        std::size_t line_no = 0;
        while (offset < content.size()) {
            const std::size_t eol = content.find('\n', offset);
            const std::size_t line_start = offset;
            const std::string_view line =
                std::string_view(content).substr(offset, (eol == std::string::npos ? content.size() : eol) - offset);
            offset = eol == std::string::npos ? content.size() : eol + 1;
            ++line_no;
            if (line.empty())
                continue;
            Json txn;
            try {
                txn = Json::parse(line);
            } catch (const Json::parse_error &) {
                if (offset >= content.size()) {
                    // A crash mid-append leaves a partial last line; drop it so
                    // later appends start on a clean line.
                    spdlog::warn("dropping torn final journal record at line {}", line_no);
                    in.close();
                    fs::resize_file(JournalPath(), line_start);
                    break;
                }
                throw Error(Errc::io_error, "corrupt journal record at line " + std::to_string(line_no));
            }
            const auto seq = txn.at("seq").get<std::uint64_t>();
            if (seq <= seq_)
                continue;
            for (const Json &op : txn.at("ops"))
                Apply(state_, op);
            seq_ = seq;
            ++since_snapshot_;
        }
    }

    mutable std::shared_mutex mutex_;
    State state_;
    fs::path dir_;
    FileStoreOptions options_;
    std::unique_ptr<Journal> journal_;
    std::uint64_t seq_ = 0;
    std::size_t since_snapshot_ = 0;
};

} // namespace

std::unique_ptr<Store> make_memory_store() { return std::make_unique<JournaledStore>(); }

std::unique_ptr<Store> open_file_store(const std::filesystem::path &directory, FileStoreOptions options) {
    return std::make_unique<JournaledStore>(directory, options);
}

} // namespace mylib
