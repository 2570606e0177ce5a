#include "mylibrary/model.hpp"

#include <algorithm>

#include "mylibrary/error.hpp"

namespace mylib {

namespace {

constexpr std::array<Section, kSectionCount> kSectionOrder = {
    Section::header,          Section::global_message,    Section::message_from_librarian,
    Section::your_librarians, Section::library_links,     Section::university_links,
    Section::current_awareness, Section::personal_links,  Section::quick_searches,
    Section::reference_shelf, Section::bibliographic_databases, Section::electronic_journals,
    Section::footer,
};

constexpr std::array<std::string_view, kSectionCount> kSectionNames = {
    "header",          "global_message", "message_from_librarian", "your_librarians", "library_links",
    "university_links", "current_awareness", "personal_links",    "quick_searches",  "reference_shelf",
    "bibliographic_databases", "electronic_journals", "footer",
};

constexpr std::array<std::string_view, 7> kResourceKindNames = {
    "library_link",       "university_link",     "reference",     "bibliographic_database",
    "electronic_journal", "quick_search_engine", "personal_link",
};

bool IsBlank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; });
}

} // namespace

std::span<const Section, kSectionCount> section_order() noexcept { return kSectionOrder; }

std::string_view to_string(Section section) noexcept { return kSectionNames[static_cast<std::size_t>(section)]; }

std::optional<Section> parse_section(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kSectionNames.size(); ++i)
        if (kSectionNames[i] == name)
            return static_cast<Section>(i);
    return std::nullopt;
}

bool is_customizable(Section section) noexcept {
    switch (section) {
    case Section::library_links:
    case Section::university_links:
    case Section::current_awareness:
    case Section::personal_links:
    case Section::quick_searches:
    case Section::reference_shelf:
    case Section::bibliographic_databases:
    case Section::electronic_journals:
        return true;
    default:
        return false;
    }
}

bool is_service(Section section) noexcept { return section != Section::header && section != Section::footer; }

std::string_view to_string(AssistanceMode mode) noexcept {
    return mode == AssistanceMode::proactive ? "proactive" : "reactive";
}

std::string_view to_string(AssistanceAgent agent) noexcept {
    return agent == AssistanceAgent::human ? "human" : "computer";
}

ServiceClassification classify(Section section) {
    using enum AssistanceMode;
    using enum AssistanceAgent;
    switch (section) {
    case Section::global_message:
    case Section::message_from_librarian:
        return {proactive, computer};
    case Section::your_librarians:
        return {reactive, human};
    // Librarian-seeded lists start out proactive; customizing them is tracked
    // on the selection set, not here.
    case Section::library_links:
    case Section::university_links:
    case Section::quick_searches:
    case Section::reference_shelf:
    case Section::bibliographic_databases:
    case Section::electronic_journals:
        return {proactive, computer};
    case Section::current_awareness:
    case Section::personal_links:
        return {reactive, computer};
    case Section::header:
    case Section::footer:
        break;
    }
    throw Error(Errc::invalid_argument, std::string(to_string(section)) + " is not a service section");
}

std::string_view to_string(ResourceKind kind) noexcept { return kResourceKindNames[static_cast<std::size_t>(kind)]; }

std::optional<ResourceKind> parse_resource_kind(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kResourceKindNames.size(); ++i)
        if (kResourceKindNames[i] == name)
            return static_cast<ResourceKind>(i);
    return std::nullopt;
}

Section section_for(ResourceKind kind) noexcept {
    switch (kind) {
    case ResourceKind::library_link:
        return Section::library_links;
    case ResourceKind::university_link:
        return Section::university_links;
    case ResourceKind::reference:
        return Section::reference_shelf;
    case ResourceKind::bibliographic_database:
        return Section::bibliographic_databases;
    case ResourceKind::electronic_journal:
        return Section::electronic_journals;
    case ResourceKind::quick_search_engine:
        return Section::quick_searches;
    case ResourceKind::personal_link:
        return Section::personal_links;
    }
    return Section::library_links;
}

std::optional<ResourceKind> resource_kind_for(Section section) noexcept {
    for (std::size_t i = 0; i < kResourceKindNames.size(); ++i) {
        const auto kind = static_cast<ResourceKind>(i);
        if (section_for(kind) == section)
            return kind;
    }
    return std::nullopt;
}

std::string_view to_string(LibrarianRole role) noexcept {
    return role == LibrarianRole::reference_librarian ? "reference_librarian" : "collection_manager";
}

std::optional<LibrarianRole> parse_librarian_role(std::string_view name) noexcept {
    if (name == "reference_librarian")
        return LibrarianRole::reference_librarian;
    if (name == "collection_manager")
        return LibrarianRole::collection_manager;
    return std::nullopt;
}

std::string_view to_string(MessageScope scope) noexcept {
    return scope == MessageScope::global ? "global" : "discipline";
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) noexcept {
    if (needle.empty())
        return 0;
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string_view::npos; pos = haystack.find(needle, pos + needle.size()))
        ++n;
    return n;
}

bool is_well_formed_url(std::string_view url) noexcept {
    const auto sep = url.find("://");
    if (sep == std::string_view::npos || sep == 0)
        return false;
    const auto is_alpha = [](unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
    const auto is_digit = [](unsigned char c) { return c >= '0' && c <= '9'; };
    if (!is_alpha(static_cast<unsigned char>(url[0])))
        return false;
    for (std::size_t i = 1; i < sep; ++i) {
        const auto c = static_cast<unsigned char>(url[i]);
        if (!is_alpha(c) && !is_digit(c) && c != '+' && c != '-' && c != '.')
            return false;
    }
    const auto rest = url.substr(sep + 3);
    const auto host_end = rest.find_first_of("/?#");
    if ((host_end == std::string_view::npos ? rest.size() : host_end) == 0)
        return false;
    return std::none_of(rest.begin(), rest.end(), [](unsigned char c) {
        return c <= 0x20 || c == 0x7f || c == '"' || c == '<' || c == '>' || c == '\\';
    });
}

std::vector<std::string> validate_resource(const Resource &r) {
    std::vector<std::string> out;
    if (IsBlank(r.title))
        out.emplace_back("title must not be empty");
    if (!is_well_formed_url(r.url))
        out.emplace_back("url is not a well-formed absolute URL");

    const bool engine = r.kind == ResourceKind::quick_search_engine;
    if (engine && !r.url_template) {
        out.emplace_back("quick_search_engine requires a url_template");
    } else if (engine) {
        if (count_occurrences(*r.url_template, kQueryPlaceholder) != 1)
            out.emplace_back("url_template must contain exactly one {query} placeholder");
        else {
            std::string probe = *r.url_template;
            probe.replace(probe.find(kQueryPlaceholder), kQueryPlaceholder.size(), "q");
            if (!is_well_formed_url(probe))
                out.emplace_back("url_template does not expand to a well-formed URL");
        }
    } else if (r.url_template) {
        out.emplace_back("url_template is only allowed on quick_search_engine resources");
    }

    const bool personal = r.kind == ResourceKind::personal_link;
    if (personal && !r.owner_user_id)
        out.emplace_back("personal_link requires an owner");
    if (!personal && r.owner_user_id)
        out.emplace_back("only personal_link resources may have an owner");
    if (personal && !r.discipline_ids.empty())
        out.emplace_back("personal_link must not be mapped to disciplines");
    return out;
}

std::vector<std::string> validate_discipline(const Discipline &d) {
    std::vector<std::string> out;
    if (IsBlank(d.name))
        out.emplace_back("discipline name must not be empty");
    return out;
}

std::vector<std::string> validate_librarian(const Librarian &l) {
    std::vector<std::string> out;
    if (IsBlank(l.name))
        out.emplace_back("librarian name must not be empty");
    if (l.discipline_ids.empty())
        out.emplace_back("librarian must be associated with at least one discipline");
    return out;
}

std::vector<std::string> validate_user(const User &u) {
    std::vector<std::string> out;
    if (u.auth_id.empty())
        out.emplace_back("auth_id must not be empty");
    if (u.discipline_id.value == 0)
        out.emplace_back("user must have a primary discipline");
    return out;
}

std::vector<std::string> validate_message(const Message &m) {
    std::vector<std::string> out;
    if (m.scope == MessageScope::discipline && !m.discipline_id)
        out.emplace_back("discipline message requires a discipline_id");
    if (m.scope == MessageScope::global && m.discipline_id)
        out.emplace_back("global message must not carry a discipline_id");
    return out;
}

} // namespace mylib
