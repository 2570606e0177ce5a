#include "mylibrary/admin.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mylibrary/crypto.hpp"
#include "mylibrary/error.hpp"

namespace mylib {

namespace {

template <class T>
T Decode(const Json &payload) {
    if (!payload.is_object())
        throw ValidationError({"payload must be a JSON object"});
    try {
        return payload.get<T>();
    } catch (const Json::exception &e) {
        throw ValidationError({std::string("malformed payload: ") + e.what()});
    }
}

} // namespace

std::optional<EntityKind> parse_entity_kind(std::string_view name) noexcept {
    if (name == "disciplines" || name == "discipline")
        return EntityKind::discipline;
    if (name == "librarians" || name == "librarian")
        return EntityKind::librarian;
    if (name == "resources" || name == "resource")
        return EntityKind::resource;
    if (name == "recommendations" || name == "recommendation")
        return EntityKind::recommendation;
    return std::nullopt;
}

void to_json(Json &j, const MassEmailReport &r) {
    j = Json{{"recipients", r.recipients},
             {"skipped_opt_out", r.skipped_opt_out},
             {"skipped_no_address", r.skipped_no_address},
             {"sent", r.sent},
             {"queued", r.queued}};
}

void to_json(Json &j, const MassEmailJob &job) {
    j = Json{{"id", job.id}, {"state", job.done ? (job.error.empty() ? "done" : "failed") : "running"}};
    if (job.done)
        j["report"] = job.report;
    if (!job.error.empty())
        j["error"] = job.error;
}

AdminService::AdminService(Store &store, std::shared_ptr<MailDispatcher> dispatcher, AdminOptions options, Clock clock)
    : store_(store), dispatcher_(std::move(dispatcher)), options_(std::move(options)), clock_(std::move(clock)),
      dummy_verifier_(crypto::make_password_verifier(crypto::random_hex(16))) {}

AdminService::~AdminService() { wait_for_jobs(); }

void AdminService::create_account(const std::string &username, const std::string &password) {
    if (username.empty())
        throw Error(Errc::invalid_argument, "username must not be empty");
    if (password.size() < options_.min_password_length)
        throw Error(Errc::invalid_argument,
                    fmt::format("password must be at least {} characters", options_.min_password_length));
    store_.put_admin_account({username, crypto::make_password_verifier(password), clock_()});
}

AdminSession AdminService::login(const std::string &username, const std::string &password) {
    const auto account = store_.find_admin_account(username);
    // Unknown names verify against a dummy hash.
    const bool ok = crypto::verify_password(password, account ? account->password_verifier : dummy_verifier_);
    if (!account || !ok)
        throw Error(Errc::authentication_failed, "invalid credentials");
    AdminSession s(crypto::random_hex(16), username, clock_() + options_.session_lifetime);
    std::lock_guard lock(mu_);
    std::erase_if(sessions_, [now = clock_()](const auto &kv) { return kv.second.expires_at() <= now; });
    sessions_.emplace(s.token(), s);
    return s;
}

std::optional<AdminSession> AdminService::resolve(const std::string &token) const {
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(token);
    if (it == sessions_.end() || it->second.expires_at() <= clock_())
        return std::nullopt;
    return it->second;
}

void AdminService::logout(const std::string &token) {
    std::lock_guard lock(mu_);
    sessions_.erase(token);
}

Json AdminService::list(const AdminSession &, EntityKind kind) const {
    switch (kind) {
    case EntityKind::discipline:
        return store_.list_disciplines();
    case EntityKind::librarian:
        return store_.list_librarians();
    case EntityKind::resource: {
        Json out = Json::array();
        for (const auto &r : store_.list_resources())
            if (r.kind != ResourceKind::personal_link)
                out.push_back(r);
        return out;
    }
    case EntityKind::recommendation:
        return store_.list_recommendation_sets();
    }
    return Json::array();
}

Json AdminService::upsert(const AdminSession &, EntityKind kind, const Json &payload) {
    switch (kind) {
    case EntityKind::discipline: {
        const auto d = Decode<Discipline>(payload);
        if (d.id.value == 0)
            return store_.create_discipline(d.name, d.description);
        return store_.update_discipline(d);
    }
    case EntityKind::librarian:
        return store_.put_librarian(Decode<Librarian>(payload));
    case EntityKind::resource: {
        auto r = Decode<Resource>(payload);
        if (r.kind == ResourceKind::personal_link)
            throw ValidationError({"personal links belong to users and cannot be managed here"});
        return store_.put_resource(r);
    }
    case EntityKind::recommendation: {
        const auto s = Decode<RecommendationSet>(payload);
        return store_.set_recommendations(s.discipline_id, s.section, s.resource_ids);
    }
    }
    throw Error(Errc::invalid_argument, "unknown entity kind");
}

DeletionReport AdminService::remove(const AdminSession &, EntityKind kind, std::uint64_t id) {
    switch (kind) {
    case EntityKind::discipline:
        return store_.delete_discipline(DisciplineId{id});
    case EntityKind::librarian:
        store_.delete_librarian(LibrarianId{id});
        return {};
    case EntityKind::resource:
        return store_.delete_resource(ResourceId{id});
    case EntityKind::recommendation:
        break;
    }
    throw Error(Errc::invalid_argument, "recommendation sets are addressed by discipline and section");
}

DeletionReport AdminService::remove_recommendations(const AdminSession &, DisciplineId discipline, Section section) {
    const auto before = store_.recommendations(discipline, section);
    store_.set_recommendations(discipline, section, {});
    DeletionReport report;
    report.recommendations = before.resource_ids.empty() ? 0 : 1;
    return report;
}

std::vector<User> AdminService::list_users(const AdminSession &) const { return store_.list_users(); }

Message AdminService::set_global_message(const AdminSession &, const std::string &body) {
    return store_.set_global_message(body, clock_());
}

Message AdminService::set_discipline_message(const AdminSession &, DisciplineId discipline, const std::string &body) {
    return store_.set_discipline_message(discipline, body, clock_());
}

Recipients AdminService::mass_email_recipients(const std::vector<DisciplineId> &disciplines) const {
    if (disciplines.empty())
        throw Error(Errc::invalid_argument, "choose at least one discipline");
    std::set<DisciplineId> wanted;
    for (DisciplineId d : disciplines) {
        if (!store_.find_discipline(d))
            throw Error(Errc::not_found, fmt::format("no discipline {}", d.value));
        wanted.insert(d);
    }
    Recipients out;
    for (auto &u : store_.list_users()) {
        if (!wanted.contains(u.discipline_id))
            continue;
        if (!u.email_opt_in)
            ++out.skipped_opt_out;
        else if (u.email.empty())
            ++out.skipped_no_address;
        else
            out.users.push_back(std::move(u));
    }
    std::sort(out.users.begin(), out.users.end(), [](const User &a, const User &b) { return a.id < b.id; });
    return out;
}

MassEmailReport AdminService::SendMass(const std::vector<DisciplineId> &disciplines, const std::string &subject,
                                       const std::string &body, std::uint64_t job) {
    const auto recipients = mass_email_recipients(disciplines);
    MassEmailReport report;
    report.recipients = recipients.users.size();
    report.skipped_opt_out = recipients.skipped_opt_out;
    report.skipped_no_address = recipients.skipped_no_address;
    const auto now = clock_();
    for (const auto &u : recipients.users) {
        MailMessage m;
        m.from = options_.from_address;
        m.to = u.name.empty() ? u.email : fmt::format("{} <{}>", u.name, u.email);
        m.subject = subject;
        m.body = body;
        m.date = now;
        m.key = fmt::format("mass{}_{}_u{}", job, now.time_since_epoch().count(), u.id.value);
        if (dispatcher_->deliver(m))
            ++report.sent;
        else
            ++report.queued;
    }
    spdlog::info("mass email: {} recipients, {} opted out, {} sent", report.recipients, report.skipped_opt_out,
                 report.sent);
    return report;
}

MassEmailReport AdminService::mass_email(const AdminSession &, const std::vector<DisciplineId> &disciplines,
                                         const std::string &subject, const std::string &body) {
    if (!dispatcher_)
        throw Error(Errc::refused, "mail delivery is not configured");
    if (subject.empty())
        throw Error(Errc::invalid_argument, "subject must not be empty");
    return SendMass(disciplines, subject, body, 0);
}

std::uint64_t AdminService::start_mass_email(const AdminSession &, std::vector<DisciplineId> disciplines,
                                             std::string subject, std::string body) {
    if (!dispatcher_)
        throw Error(Errc::refused, "mail delivery is not configured");
    if (subject.empty())
        throw Error(Errc::invalid_argument, "subject must not be empty");
    mass_email_recipients(disciplines);
    std::lock_guard lock(mu_);
    const auto id = next_job_++;
    jobs_[id] = MassEmailJob{id, false, "", {}};
    workers_.emplace_back([this, id, disciplines = std::move(disciplines), subject = std::move(subject),
                           body = std::move(body)] {
        MassEmailJob result{id, true, "", {}};
        try {
            result.report = SendMass(disciplines, subject, body, id);
        } catch (const std::exception &e) {
            result.error = e.what();
        }
        std::lock_guard lock(mu_);
        jobs_[id] = result;
    });
    return id;
}

std::optional<MassEmailJob> AdminService::job(std::uint64_t id) const {
    std::lock_guard lock(mu_);
    const auto it = jobs_.find(id);
    if (it == jobs_.end())
        return std::nullopt;
    return it->second;
}

void AdminService::wait_for_jobs() {
    std::vector<std::thread> workers;
    {
        std::lock_guard lock(mu_);
        workers.swap(workers_);
    }
    for (auto &t : workers)
        t.join();
}

} // namespace mylib
