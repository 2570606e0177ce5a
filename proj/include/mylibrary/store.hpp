#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mylibrary/callno.hpp"
#include "mylibrary/model.hpp"
#include "mylibrary/time.hpp"

namespace mylib {

/// A user's chosen resources for one customizable section.
struct SelectionSet {
    UserId user_id;
    Section section = Section::library_links;
    std::vector<ResourceId> resource_ids;
    /// False while the set is still the discipline defaults copied at sign-up.
    bool customized = false;

    friend bool operator==(const SelectionSet &, const SelectionSet &) = default;
};

/// Librarian-curated defaults for one discipline and section.
struct RecommendationSet {
    DisciplineId discipline_id;
    Section section = Section::library_links;
    std::vector<ResourceId> resource_ids;

    friend bool operator==(const RecommendationSet &, const RecommendationSet &) = default;
};

struct AcquisitionRecord {
    std::string call_number;
    std::string author;
    std::string title;
    std::string record_url;
    Date accession_date{};

    friend bool operator==(const AcquisitionRecord &, const AcquisitionRecord &) = default;
};

/// An acquisition with its parsed call number and shelf key.
struct StoredAcquisition {
    AcquisitionRecord record;
    callno::CallNumber call_number;
    callno::SortKey key;
};

struct QuarantinedRecord {
    AcquisitionRecord record;
    std::string reason;
};

struct IngestReport {
    std::size_t accepted = 0;
    std::size_t duplicates = 0;
    std::size_t quarantined = 0;
    std::vector<std::string> reasons;
};

enum class Delivery { screen, email };

std::string_view to_string(Delivery delivery) noexcept;
std::optional<Delivery> parse_delivery(std::string_view name) noexcept;

/// A saved current-awareness profile.
struct CAProfile {
    ProfileId id;
    UserId user_id;
    callno::RangeList ranges;
    Delivery delivery = Delivery::screen;

    friend bool operator==(const CAProfile &, const CAProfile &) = default;
};

struct AdminAccount {
    std::string username;
    /// Salted password hash, never the password.
    std::string password_verifier;
    Timestamp created_at{};

    friend bool operator==(const AdminAccount &, const AdminAccount &) = default;
};

/// Rows touched by a cascading delete.
struct DeletionReport {
    std::size_t selections = 0;
    std::size_t recommendations = 0;
    std::size_t resources = 0;
    std::size_t messages = 0;
    std::size_t profiles = 0;

    friend bool operator==(const DeletionReport &, const DeletionReport &) = default;
};

/// Persistence contract for every entity in the system.
///
/// Each mutating call is atomic: it either applies completely or throws and
/// leaves every query returning what it returned before. Integrity rules are
/// checked before anything is written. Implementations serialize writers and let
/// readers run concurrently.
class Store {
public:
    virtual ~Store() = default;

    // Disciplines
    virtual Discipline create_discipline(const std::string &name, const std::string &description) = 0;
    virtual Discipline update_discipline(const Discipline &discipline) = 0;
    /// Refused with ReferencedError while users or librarians point at it.
    virtual DeletionReport delete_discipline(DisciplineId id) = 0;
    virtual std::optional<Discipline> find_discipline(DisciplineId id) const = 0;
    virtual std::optional<Discipline> find_discipline_by_name(const std::string &name) const = 0;
    virtual std::vector<Discipline> list_disciplines() const = 0;

    // Librarians
    /// Creates when `librarian.id` is zero, replaces otherwise.
    virtual Librarian put_librarian(const Librarian &librarian) = 0;
    virtual void delete_librarian(LibrarianId id) = 0;
    virtual std::vector<Librarian> list_librarians() const = 0;
    virtual std::vector<Librarian> librarians_for(DisciplineId discipline) const = 0;

    // Resources
    /// Creates when `resource.id` is zero, replaces otherwise. Kind is fixed at creation.
    virtual Resource put_resource(const Resource &resource) = 0;
    /// Removes the resource from every selection and recommendation set.
    virtual DeletionReport delete_resource(ResourceId id) = 0;
    virtual std::optional<Resource> find_resource(ResourceId id) const = 0;
    virtual std::vector<Resource> list_resources() const = 0;

    // Recommendations
    virtual RecommendationSet set_recommendations(DisciplineId discipline, Section section,
                                                  const std::vector<ResourceId> &ids) = 0;
    virtual RecommendationSet recommendations(DisciplineId discipline, Section section) const = 0;
    virtual std::vector<RecommendationSet> list_recommendation_sets() const = 0;
    /// Every resource mapped to the discipline whose kind belongs in the
    /// section, sorted by title without regard to case.
    virtual std::vector<Resource> list_recommendations(DisciplineId discipline, Section section) const = 0;

    // Users
    /// Seeds every customizable section with the discipline's recommendations.
    virtual User create_user(const std::string &auth_id, const std::string &name, const std::string &email,
                             DisciplineId discipline, Timestamp now) = 0;
    virtual std::optional<User> find_user(UserId id) const = 0;
    /// Exact, case-sensitive match.
    virtual std::optional<User> find_user_by_auth_id(const std::string &auth_id) const = 0;
    /// Name, email, opt-in and discipline; selections are left alone.
    virtual User update_user(const User &user) = 0;
    virtual std::vector<User> list_users() const = 0;

    // Selections
    /// Replaces the set; the section must be customizable and every resource
    /// must belong in it.
    virtual SelectionSet set_selections(UserId user, Section section, const std::vector<ResourceId> &ids) = 0;
    virtual SelectionSet selections(UserId user, Section section) const = 0;

    // Personal links
    /// Creates the link and appends it to the owner's personal_links selection.
    virtual Resource add_personal_link(UserId user, const std::string &title, const std::string &url) = 0;
    /// Forbidden unless `user` owns the link.
    virtual void delete_personal_link(UserId user, ResourceId id) = 0;

    // Messages. An empty body clears the live message; history is kept.
    virtual Message set_global_message(const std::string &body, Timestamp now) = 0;
    virtual Message set_discipline_message(DisciplineId discipline, const std::string &body, Timestamp now) = 0;
    virtual std::optional<Message> live_global_message() const = 0;
    virtual std::optional<Message> live_discipline_message(DisciplineId discipline) const = 0;
    virtual std::vector<Message> message_history() const = 0;

    // Current-awareness profiles
    virtual CAProfile save_profile(UserId user, const callno::RangeList &ranges, Delivery delivery) = 0;
    virtual void delete_profile(UserId user, ProfileId id) = 0;
    virtual std::optional<CAProfile> find_profile(ProfileId id) const = 0;
    virtual std::vector<CAProfile> profiles_for(UserId user) const = 0;
    virtual std::vector<CAProfile> list_profiles() const = 0;

    // Acquisitions
    /// Quarantines unparseable call numbers; drops exact replays. `rejected`
    /// carries records the caller already knows are bad (malformed file lines)
    /// so they land in the same quarantine.
    virtual IngestReport record_acquisitions(std::span<const AcquisitionRecord> batch,
                                             std::span<const QuarantinedRecord> rejected = {}) = 0;
    /// Acquisitions accessioned in [from, to), in shelf order.
    virtual std::vector<StoredAcquisition> acquisitions_between(Date from, Date to) const = 0;
    virtual std::size_t acquisition_count() const = 0;
    virtual std::vector<QuarantinedRecord> quarantined() const = 0;

    // Digest dispatch ledger. Returns false if the pair was already recorded.
    virtual bool mark_dispatched(ProfileId profile, const IsoWeek &week) = 0;
    virtual bool was_dispatched(ProfileId profile, const IsoWeek &week) const = 0;

    // Admin accounts
    virtual void put_admin_account(const AdminAccount &account) = 0;
    virtual std::optional<AdminAccount> find_admin_account(const std::string &username) const = 0;
};

struct FileStoreOptions {
    /// Journal records between automatic snapshots; zero disables them.
    std::size_t snapshot_interval = 1000;
};

/// Volatile store, for tests and demos.
std::unique_ptr<Store> make_memory_store();

/// Journal + snapshot store rooted at `directory` (created if missing). Replays
/// existing state on open.
std::unique_ptr<Store> open_file_store(const std::filesystem::path &directory, FileStoreOptions options = {});

/// Parses the tab-separated acquisitions file format. Malformed lines come back
/// as quarantined entries rather than exceptions.
struct AcquisitionFile {
    std::vector<AcquisitionRecord> records;
    std::vector<QuarantinedRecord> malformed;
};
AcquisitionFile read_acquisition_file(std::istream &in);

} // namespace mylib
