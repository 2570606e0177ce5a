#include "mylibrary/codec.hpp"

namespace mylib {

namespace {

template <class E, class Parse>
E ParseEnum(const Json &j, Parse parse, const char *what) {
    if (!j.is_string())
        throw ValidationError({std::string(what) + " must be a string"});
    const auto value = parse(j.get<std::string>());
    if (!value)
        throw ValidationError({"unknown " + std::string(what) + " '" + j.get<std::string>() + "'"});
    return *value;
}

} // namespace

std::string_view to_string(Delivery delivery) noexcept { return delivery == Delivery::screen ? "screen" : "email"; }

std::optional<Delivery> parse_delivery(std::string_view name) noexcept {
    if (name == "screen")
        return Delivery::screen;
    if (name == "email")
        return Delivery::email;
    return std::nullopt;
}

Json timestamp_json(Timestamp t) { return format_timestamp(t); }

Timestamp timestamp_from_json(const Json &j) {
    try {
        return parse_timestamp(j.get<std::string>());
    } catch (const Json::exception &) {
        throw ValidationError({"timestamp must be a string"});
    }
}

void to_json(Json &j, Section s) { j = to_string(s); }
void from_json(const Json &j, Section &s) { s = ParseEnum<Section>(j, parse_section, "section"); }
void to_json(Json &j, ResourceKind k) { j = to_string(k); }
void from_json(const Json &j, ResourceKind &k) { k = ParseEnum<ResourceKind>(j, parse_resource_kind, "resource kind"); }
void to_json(Json &j, LibrarianRole r) { j = to_string(r); }
void from_json(const Json &j, LibrarianRole &r) { r = ParseEnum<LibrarianRole>(j, parse_librarian_role, "librarian role"); }
void to_json(Json &j, MessageScope s) { j = to_string(s); }
void from_json(const Json &j, MessageScope &s) {
    s = ParseEnum<MessageScope>(
        j,
        [](std::string_view v) -> std::optional<MessageScope> {
            if (v == "global")
                return MessageScope::global;
            if (v == "discipline")
                return MessageScope::discipline;
            return std::nullopt;
        },
        "message scope");
}
void to_json(Json &j, Delivery d) { j = to_string(d); }
void from_json(const Json &j, Delivery &d) { d = ParseEnum<Delivery>(j, parse_delivery, "delivery"); }

void to_json(Json &j, const ServiceClassification &c) {
    j = Json{{"mode", to_string(c.mode)}, {"agent", to_string(c.agent)}};
}

void to_json(Json &j, const Discipline &d) {
    j = Json{{"id", d.id}, {"name", d.name}, {"description", d.description}};
}

void from_json(const Json &j, Discipline &d) {
    d.id = optional_field(j, "id", DisciplineId{});
    d.name = required<std::string>(j, "name");
    d.description = optional_field<std::string>(j, "description", "");
}

void to_json(Json &j, const User &u) {
    j = Json{{"id", u.id},
             {"auth_id", u.auth_id},
             {"name", u.name},
             {"email", u.email},
             {"discipline_id", u.discipline_id},
             {"email_opt_in", u.email_opt_in},
             {"created_at", timestamp_json(u.created_at)}};
}

void from_json(const Json &j, User &u) {
    u.id = optional_field(j, "id", UserId{});
    u.auth_id = required<std::string>(j, "auth_id");
    u.name = optional_field<std::string>(j, "name", "");
    u.email = optional_field<std::string>(j, "email", "");
    u.discipline_id = required<DisciplineId>(j, "discipline_id");
    u.email_opt_in = optional_field(j, "email_opt_in", true);
    u.created_at = j.contains("created_at") ? timestamp_from_json(j.at("created_at")) : Timestamp{};
}

void to_json(Json &j, const Librarian &l) {
    j = Json{{"id", l.id},       {"name", l.name}, {"phone", l.phone},
             {"email", l.email}, {"role", l.role}, {"discipline_ids", l.discipline_ids}};
}

void from_json(const Json &j, Librarian &l) {
    l.id = optional_field(j, "id", LibrarianId{});
    l.name = required<std::string>(j, "name");
    l.phone = optional_field<std::string>(j, "phone", "");
    l.email = optional_field<std::string>(j, "email", "");
    l.role = optional_field(j, "role", LibrarianRole::reference_librarian);
    l.discipline_ids = optional_field(j, "discipline_ids", std::set<DisciplineId>{});
}

void to_json(Json &j, const Resource &r) {
    j = Json{{"id", r.id},   {"kind", r.kind}, {"title", r.title}, {"url", r.url}, {"description", r.description},
             {"discipline_ids", r.discipline_ids}};
    j["url_template"] = r.url_template ? Json(*r.url_template) : Json(nullptr);
    j["owner_user_id"] = r.owner_user_id ? Json(r.owner_user_id->value) : Json(nullptr);
}

void from_json(const Json &j, Resource &r) {
    r.id = optional_field(j, "id", ResourceId{});
    r.kind = required<ResourceKind>(j, "kind");
    r.title = optional_field<std::string>(j, "title", "");
    r.url = optional_field<std::string>(j, "url", "");
    r.description = optional_field<std::string>(j, "description", "");
    if (j.contains("url_template") && !j.at("url_template").is_null())
        r.url_template = required<std::string>(j, "url_template");
    else
        r.url_template.reset();
    if (j.contains("owner_user_id") && !j.at("owner_user_id").is_null())
        r.owner_user_id = required<UserId>(j, "owner_user_id");
    else
        r.owner_user_id.reset();
    r.discipline_ids = optional_field(j, "discipline_ids", std::set<DisciplineId>{});
}

void to_json(Json &j, const Message &m) {
    j = Json{{"id", m.id}, {"scope", m.scope}, {"body", m.body}, {"updated_at", timestamp_json(m.updated_at)}};
    j["discipline_id"] = m.discipline_id ? Json(m.discipline_id->value) : Json(nullptr);
}

void from_json(const Json &j, Message &m) {
    m.id = optional_field(j, "id", MessageId{});
    m.scope = required<MessageScope>(j, "scope");
    if (j.contains("discipline_id") && !j.at("discipline_id").is_null())
        m.discipline_id = required<DisciplineId>(j, "discipline_id");
    m.body = optional_field<std::string>(j, "body", "");
    m.updated_at = timestamp_from_json(j.at("updated_at"));
}

void to_json(Json &j, const SelectionSet &s) {
    j = Json{{"user_id", s.user_id}, {"section", s.section}, {"resource_ids", s.resource_ids}, {"customized", s.customized}};
}

void from_json(const Json &j, SelectionSet &s) {
    s.user_id = required<UserId>(j, "user_id");
    s.section = required<Section>(j, "section");
    s.resource_ids = required<std::vector<ResourceId>>(j, "resource_ids");
    s.customized = optional_field(j, "customized", false);
}

void to_json(Json &j, const RecommendationSet &s) {
    j = Json{{"discipline_id", s.discipline_id}, {"section", s.section}, {"resource_ids", s.resource_ids}};
}

void from_json(const Json &j, RecommendationSet &s) {
    s.discipline_id = required<DisciplineId>(j, "discipline_id");
    s.section = required<Section>(j, "section");
    s.resource_ids = optional_field(j, "resource_ids", std::vector<ResourceId>{});
}

void to_json(Json &j, const AcquisitionRecord &a) {
    j = Json{{"call_number", a.call_number},
             {"author", a.author},
             {"title", a.title},
             {"record_url", a.record_url},
             {"accession_date", format_date(a.accession_date)}};
}

void from_json(const Json &j, AcquisitionRecord &a) {
    a.call_number = required<std::string>(j, "call_number");
    a.author = optional_field<std::string>(j, "author", "");
    a.title = optional_field<std::string>(j, "title", "");
    a.record_url = optional_field<std::string>(j, "record_url", "");
    a.accession_date = parse_date(required<std::string>(j, "accession_date"));
}

void to_json(Json &j, const QuarantinedRecord &q) { j = Json{{"record", q.record}, {"reason", q.reason}}; }

void from_json(const Json &j, QuarantinedRecord &q) {
    // Malformed file lines may not even have a usable date; keep what exists.
    const Json &r = j.at("record");
    q.record.call_number = optional_field<std::string>(r, "call_number", "");
    q.record.author = optional_field<std::string>(r, "author", "");
    q.record.title = optional_field<std::string>(r, "title", "");
    q.record.record_url = optional_field<std::string>(r, "record_url", "");
    q.record.accession_date = parse_date(optional_field<std::string>(r, "accession_date", "1970-01-01"));
    q.reason = required<std::string>(j, "reason");
}

void to_json(Json &j, const CAProfile &p) {
    Json ranges = Json::array();
    for (const auto &r : p.ranges)
        ranges.push_back(Json{{"lo", r.lo}, {"hi", r.hi}});
    j = Json{{"id", p.id},
             {"user_id", p.user_id},
             {"ranges", std::move(ranges)},
             {"range_text", callno::format_range_list(p.ranges)},
             {"delivery", p.delivery}};
}

void from_json(const Json &j, CAProfile &p) {
    p.id = optional_field(j, "id", ProfileId{});
    p.user_id = required<UserId>(j, "user_id");
    p.ranges.clear();
    for (const auto &r : j.at("ranges"))
        p.ranges.push_back({r.at("lo").get<std::string>(), r.at("hi").get<std::string>()});
    p.delivery = required<Delivery>(j, "delivery");
}

void to_json(Json &j, const AdminAccount &a) {
    j = Json{{"username", a.username},
             {"password_verifier", a.password_verifier},
             {"created_at", timestamp_json(a.created_at)}};
}

void from_json(const Json &j, AdminAccount &a) {
    a.username = required<std::string>(j, "username");
    a.password_verifier = required<std::string>(j, "password_verifier");
    a.created_at = timestamp_from_json(j.at("created_at"));
}

void to_json(Json &j, const DeletionReport &r) {
    j = Json{{"selections", r.selections},
             {"recommendations", r.recommendations},
             {"resources", r.resources},
             {"messages", r.messages},
             {"profiles", r.profiles}};
}

void to_json(Json &j, const IngestReport &r) {
    j = Json{{"accepted", r.accepted}, {"duplicates", r.duplicates}, {"quarantined", r.quarantined}, {"reasons", r.reasons}};
}

} // namespace mylib
