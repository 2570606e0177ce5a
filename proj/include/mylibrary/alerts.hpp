#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mylibrary/mail.hpp"
#include "mylibrary/store.hpp"

namespace mylib {

/// Whole ISO weeks counted back from the evaluation time. to_weeks_ago = 0
/// means the current week up to and including today.
struct TimeWindow {
    unsigned from_weeks_ago = 0;
    unsigned to_weeks_ago = 0;

    friend bool operator==(const TimeWindow &, const TimeWindow &) = default;
};

/// Accession dates in [start, end).
struct DateRange {
    Date start{};
    Date end{};

    friend bool operator==(const DateRange &, const DateRange &) = default;
};

/// Throws Error(invalid_argument) when from < to.
DateRange resolve_window(TimeWindow window, Timestamp now, std::chrono::minutes utc_offset);

struct AlertItem {
    std::string call_number;
    std::string author;
    std::string title;
    std::string record_url;

    friend bool operator==(const AlertItem &, const AlertItem &) = default;
};

struct AlertResult {
    ProfileId profile_id;
    TimeWindow window;
    DateRange dates;
    /// Shelf order.
    std::vector<AlertItem> items;
};

struct WeeklyRunReport {
    std::size_t profiles_evaluated = 0;
    std::size_t emails_sent = 0;
    std::size_t emails_suppressed = 0;
    /// Handed to the retry queue after a transport failure.
    std::size_t emails_queued = 0;
    /// Skipped because the (profile, week) pair is already in the ledger.
    std::size_t already_dispatched = 0;
    std::size_t retries_sent = 0;
    /// Another run was in progress; nothing was done.
    bool busy = false;
    IsoWeek week;
};

struct AlertOptions {
    std::chrono::minutes utc_offset{0};
    std::string from_address = "MyLibrary <mylibrary@localhost>";
};

class AlertService {
public:
    /// `dispatcher` may be null; digests are then suppressed.
    AlertService(Store &store, std::shared_ptr<MailDispatcher> dispatcher, AlertOptions options);

    /// Throws ParseError (with offset) when the range text does not parse.
    CAProfile save_profile(UserId user, std::string_view range_text, Delivery delivery);

    AlertResult run_window_query(const CAProfile &profile, TimeWindow window, Timestamp now) const;
    /// Union of every profile the user holds, shelf order, no repeats.
    std::vector<AlertItem> run_user_query(UserId user, TimeWindow window, Timestamp now) const;

    /// Evaluates the previous complete week for every email profile.
    WeeklyRunReport weekly_run(Timestamp now);

    MailMessage format_digest(const AlertResult &result, const User &user, const CAProfile &profile,
                              const IsoWeek &week, Timestamp now) const;

    /// Mails an on-demand result list. False if the message went to the retry queue.
    bool email_results(const User &user, const std::vector<AlertItem> &items, const DateRange &dates,
                       const callno::RangeList &ranges, Timestamp now);

    const AlertOptions &options() const { return options_; }

private:
    std::vector<AlertItem> Match(const callno::RangeList &ranges, const DateRange &dates) const;

    Store &store_;
    std::shared_ptr<MailDispatcher> dispatcher_;
    AlertOptions options_;
    std::atomic<bool> running_{false};
};

} // namespace mylib
