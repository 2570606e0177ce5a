#pragma once

#include <array>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mylibrary/ids.hpp"
#include "mylibrary/time.hpp"

namespace mylib {

// ---------------------------------------------------------------------------
// Page sections
// ---------------------------------------------------------------------------

enum class Section {
    header,
    global_message,
    message_from_librarian,
    your_librarians,
    library_links,
    university_links,
    current_awareness,
    personal_links,
    quick_searches,
    reference_shelf,
    bibliographic_databases,
    electronic_journals,
    footer,
};

inline constexpr std::size_t kSectionCount = 13;

/// The thirteen sections in page order, header first and footer last.
std::span<const Section, kSectionCount> section_order() noexcept;

std::string_view to_string(Section section) noexcept;
std::optional<Section> parse_section(std::string_view name) noexcept;

/// The eight sections a user may customize.
bool is_customizable(Section section) noexcept;
/// Everything except the header and footer.
bool is_service(Section section) noexcept;

// ---------------------------------------------------------------------------
// Interactive assistance
// ---------------------------------------------------------------------------

enum class AssistanceMode { proactive, reactive };
enum class AssistanceAgent { human, computer };

std::string_view to_string(AssistanceMode mode) noexcept;
std::string_view to_string(AssistanceAgent agent) noexcept;

struct ServiceClassification {
    AssistanceMode mode;
    AssistanceAgent agent;

    friend bool operator==(const ServiceClassification &, const ServiceClassification &) = default;
};

/// Classification of a service section in its initial, uncustomized state.
/// Throws Error(invalid_argument) for the header and footer.
ServiceClassification classify(Section section);

// ---------------------------------------------------------------------------
// Entities
// ---------------------------------------------------------------------------

enum class ResourceKind {
    library_link,
    university_link,
    reference,
    bibliographic_database,
    electronic_journal,
    quick_search_engine,
    personal_link,
};

std::string_view to_string(ResourceKind kind) noexcept;
std::optional<ResourceKind> parse_resource_kind(std::string_view name) noexcept;

/// A resource's kind fixes the one section it can be shown in.
Section section_for(ResourceKind kind) noexcept;
/// Inverse of section_for; current_awareness and the non-customizable sections hold no resources.
std::optional<ResourceKind> resource_kind_for(Section section) noexcept;

enum class LibrarianRole { reference_librarian, collection_manager };

std::string_view to_string(LibrarianRole role) noexcept;
std::optional<LibrarianRole> parse_librarian_role(std::string_view name) noexcept;

enum class MessageScope { global, discipline };

std::string_view to_string(MessageScope scope) noexcept;

struct Discipline {
    DisciplineId id;
    std::string name;
    std::string description;

    friend bool operator==(const Discipline &, const Discipline &) = default;
};

struct User {
    UserId id;
    std::string auth_id;
    std::string name;
    std::string email;
    DisciplineId discipline_id;
    bool email_opt_in = true;
    Timestamp created_at{};

    friend bool operator==(const User &, const User &) = default;
};

struct Librarian {
    LibrarianId id;
    std::string name;
    std::string phone;
    std::string email;
    LibrarianRole role = LibrarianRole::reference_librarian;
    std::set<DisciplineId> discipline_ids;

    friend bool operator==(const Librarian &, const Librarian &) = default;
};

inline constexpr std::string_view kQueryPlaceholder = "{query}";

struct Resource {
    ResourceId id;
    ResourceKind kind = ResourceKind::library_link;
    std::string title;
    std::string url;
    std::string description;
    std::optional<std::string> url_template;
    std::optional<UserId> owner_user_id;
    std::set<DisciplineId> discipline_ids;

    friend bool operator==(const Resource &, const Resource &) = default;
};

struct Message {
    MessageId id;
    MessageScope scope = MessageScope::global;
    std::optional<DisciplineId> discipline_id;
    std::string body;
    Timestamp updated_at{};

    friend bool operator==(const Message &, const Message &) = default;
};

// ---------------------------------------------------------------------------
// Stateless validation. An empty result means the value is valid.
// ---------------------------------------------------------------------------

std::vector<std::string> validate_resource(const Resource &resource);
std::vector<std::string> validate_discipline(const Discipline &discipline);
std::vector<std::string> validate_librarian(const Librarian &librarian);
std::vector<std::string> validate_user(const User &user);
std::vector<std::string> validate_message(const Message &message);

/// scheme://host[...] with no whitespace or control characters.
bool is_well_formed_url(std::string_view url) noexcept;

/// Number of non-overlapping occurrences of `needle` in `haystack`.
std::size_t count_occurrences(std::string_view haystack, std::string_view needle) noexcept;

} // namespace mylib
