#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mylibrary/alerts.hpp"
#include "mylibrary/auth.hpp"
#include "mylibrary/codec.hpp"
#include "mylibrary/session.hpp"
#include "mylibrary/store.hpp"

namespace mylib {

std::string_view section_title(Section section) noexcept;

struct Contact {
    std::string name;
    std::string phone;
    std::string email;
    /// Unset for the generic reference contact.
    std::optional<LibrarianRole> role;

    friend bool operator==(const Contact &, const Contact &) = default;
};

struct NavEntry {
    Section section;
    std::string label;

    friend bool operator==(const NavEntry &, const NavEntry &) = default;
};

struct HeaderContent {
    std::string user_name;
    std::string discipline;
    std::vector<NavEntry> navigation;

    friend bool operator==(const HeaderContent &, const HeaderContent &) = default;
};

struct FooterContent {
    std::string version;
    std::string date;
    std::string contact;

    friend bool operator==(const FooterContent &, const FooterContent &) = default;
};

struct WindowForm {
    /// Choices for from/to, in weeks ago.
    std::vector<unsigned> weeks;
    TimeWindow defaults{2, 0};
    std::vector<Delivery> outputs{Delivery::screen, Delivery::email};

    friend bool operator==(const WindowForm &, const WindowForm &) = default;
};

/// One section of the page. Only the members that belong to the section are
/// filled; the rest stay empty.
struct PageBlock {
    Section section = Section::header;
    std::optional<ServiceClassification> classification;
    bool customizable = false;
    /// The user has changed this section away from the discipline defaults.
    bool customized = false;

    std::vector<Resource> items;
    std::vector<Contact> librarians;
    std::string body;
    std::optional<Timestamp> updated_at;
    std::vector<CAProfile> profiles;
    std::optional<WindowForm> window_form;
    std::optional<HeaderContent> header;
    std::optional<FooterContent> footer;

    friend bool operator==(const PageBlock &, const PageBlock &) = default;
};

struct PageDocument {
    UserId user_id;
    std::vector<PageBlock> blocks;

    const PageBlock &block(Section section) const;

    friend bool operator==(const PageDocument &, const PageDocument &) = default;
};

struct FormItem {
    Resource resource;
    bool checked = false;

    friend bool operator==(const FormItem &, const FormItem &) = default;
};

struct FormGroup {
    /// Unset for resources not tied to any discipline.
    std::optional<DisciplineId> discipline_id;
    std::string name;
    std::vector<FormItem> items;

    friend bool operator==(const FormGroup &, const FormGroup &) = default;
};

struct CustomizationForm {
    Section section = Section::library_links;
    std::vector<ResourceId> current;
    std::vector<FormGroup> groups;
    /// personal_links: the user's own links.
    std::vector<Resource> personal_links;
    /// current_awareness: saved profiles.
    std::vector<CAProfile> profiles;

    friend bool operator==(const CustomizationForm &, const CustomizationForm &) = default;
};

void to_json(Json &j, const PageDocument &page);
void to_json(Json &j, const CustomizationForm &form);

struct PortalOptions {
    std::string version = "1.0.0";
    std::string contact = "MyLibrary Development Team <mylibrary@localhost>";
    Contact reference_contact{"Reference Desk", "", "reference@localhost", std::nullopt};
    /// Discipline name for accounts created without one; falls back to the lowest id.
    std::string default_discipline;
    std::chrono::minutes utc_offset{0};
    unsigned window_weeks = 12;
};

struct AuthRedirect {
    std::string location;
};

/// Extra account fields a login may carry. Only used when the account is new.
struct Onboarding {
    std::string name;
    std::string email;
    /// Discipline id or name.
    std::string discipline;
};

struct Resolved {
    Session session;
    bool created_account = false;
    /// Set when the session was issued by this call; the caller sets the cookie.
    bool fresh = false;
};

struct DispatchArgs {
    std::string section;
    std::vector<ResourceId> resource_ids;
    std::optional<DisciplineId> discipline_filter;
};

struct AwarenessSearch {
    DateRange dates;
    std::vector<AlertItem> items;
    /// Output was email and the message was handed to the mail transport.
    bool emailed = false;
    bool queued = false;
};

using DispatchResult = std::variant<PageDocument, CustomizationForm>;

class Portal {
public:
    Portal(Store &store, SessionTable &sessions, const Authenticator &auth, AlertService &alerts,
           PortalOptions options, Clock clock);

    /// Valid token wins. Otherwise an assertion logs in (creating the account
    /// if needed); otherwise the caller gets a redirect to the authenticator.
    std::variant<Resolved, AuthRedirect> resolve_session(const std::string &token,
                                                         const std::optional<std::string> &assertion,
                                                         const Onboarding &onboarding = {},
                                                         std::string_view return_to = {});

    /// `get` gives the customization form, `set` stores the selection and
    /// gives the page, anything else gives the page.
    DispatchResult dispatch(UserId user, std::string_view command, const DispatchArgs &args);

    PageDocument assemble_page(UserId user) const;
    CustomizationForm customization_form(UserId user, Section section,
                                         std::optional<DisciplineId> filter = std::nullopt) const;
    /// Absolute URL to redirect to.
    std::string quick_search(UserId user, ResourceId engine, std::string_view query) const;
    Resource add_personal_link(UserId user, const std::string &title, const std::string &url);
    void delete_personal_link(UserId user, ResourceId id);
    PageDocument set_discipline(UserId user, DisciplineId discipline);
    User set_preferences(UserId user, std::optional<bool> email_opt_in, std::optional<std::string> name,
                         std::optional<std::string> email);
    CAProfile save_profile(UserId user, std::string_view range_text, Delivery delivery);
    void delete_profile(UserId user, ProfileId id);
    /// One profile, or the union of all the user's profiles when unset.
    AwarenessSearch current_awareness_search(UserId user, TimeWindow window, std::optional<ProfileId> profile,
                                             Delivery output);
    /// Idempotent.
    void logout(const std::string &token);

    const PortalOptions &options() const { return options_; }
    Timestamp now() const { return clock_(); }

private:
    User RequireUser(UserId id) const;
    DisciplineId OnboardingDiscipline(const std::string &requested) const;

    Store &store_;
    SessionTable &sessions_;
    const Authenticator &auth_;
    AlertService &alerts_;
    PortalOptions options_;
    Clock clock_;
};

} // namespace mylib
