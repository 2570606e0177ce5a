#include "mylibrary/alerts.hpp"

#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mylibrary/crypto.hpp"
#include "mylibrary/error.hpp"

namespace mylib {

using std::chrono::days;

DateRange resolve_window(TimeWindow window, Timestamp now, std::chrono::minutes utc_offset) {
    if (window.from_weeks_ago < window.to_weeks_ago)
        throw Error(Errc::invalid_argument, "window must start no later than it ends");
    const Date today = local_date(now, utc_offset);
    const Date monday = week_start(today);
    DateRange r;
    r.start = monday - days(7 * window.from_weeks_ago);
    r.end = window.to_weeks_ago == 0 ? today + days(1) : monday - days(7 * (window.to_weeks_ago - 1));
    return r;
}

AlertService::AlertService(Store &store, std::shared_ptr<MailDispatcher> dispatcher, AlertOptions options)
    : store_(store), dispatcher_(std::move(dispatcher)), options_(std::move(options)) {}

CAProfile AlertService::save_profile(UserId user, std::string_view range_text, Delivery delivery) {
    return store_.save_profile(user, callno::parse_range_list(range_text), delivery);
}

std::vector<AlertItem> AlertService::Match(const callno::RangeList &ranges, const DateRange &dates) const {
    std::vector<AlertItem> items;
    for (const auto &a : store_.acquisitions_between(dates.start, dates.end)) {
        if (!callno::in_any_range(a.call_number, ranges))
            continue;
        items.push_back({callno::format(a.call_number), a.record.author, a.record.title, a.record.record_url});
    }
    return items;
}

AlertResult AlertService::run_window_query(const CAProfile &profile, TimeWindow window, Timestamp now) const {
    AlertResult result;
    result.profile_id = profile.id;
    result.window = window;
    result.dates = resolve_window(window, now, options_.utc_offset);
    result.items = Match(profile.ranges, result.dates);
    return result;
}

std::vector<AlertItem> AlertService::run_user_query(UserId user, TimeWindow window, Timestamp now) const {
    callno::RangeList all;
    for (const auto &p : store_.profiles_for(user))
        all.insert(all.end(), p.ranges.begin(), p.ranges.end());
    if (all.empty())
        return {};
    return Match(all, resolve_window(window, now, options_.utc_offset));
}

namespace {

std::string DigestBody(const std::vector<AlertItem> &items, const DateRange &dates, const std::string &ranges) {
    std::string body = fmt::format("New titles accessioned {} to {} in call number ranges {}:\n\n",
                                   format_date(dates.start), format_date(dates.end - days(1)), ranges);
    for (const auto &item : items)
        body += fmt::format("{} | {} | {}\n{}\n\n", item.call_number, item.author, item.title, item.record_url);
    body += fmt::format("{} item{}. Manage your current awareness profiles from your MyLibrary page.\n", items.size(),
                        items.size() == 1 ? "" : "s");
    return body;
}

std::string Mailbox(const User &user) {
    return user.name.empty() ? user.email : fmt::format("{} <{}>", user.name, user.email);
}

} // namespace

MailMessage AlertService::format_digest(const AlertResult &result, const User &user, const CAProfile &profile,
                                        const IsoWeek &week, Timestamp now) const {
    const auto ranges = callno::format_range_list(profile.ranges);
    MailMessage m;
    m.from = options_.from_address;
    m.to = Mailbox(user);
    m.subject = fmt::format("New titles in {} ({})", ranges, week.str());
    m.date = now;
    m.key = fmt::format("{}_{}", profile.id.value, week.str());
    m.body = DigestBody(result.items, result.dates, ranges);
    return m;
}

bool AlertService::email_results(const User &user, const std::vector<AlertItem> &items, const DateRange &dates,
                                 const callno::RangeList &ranges, Timestamp now) {
    if (!dispatcher_)
        throw Error(Errc::refused, "mail delivery is not configured");
    if (user.email.empty())
        throw Error(Errc::invalid_argument, "no email address on the account");
    const auto text = callno::format_range_list(ranges);
    MailMessage m;
    m.from = options_.from_address;
    m.to = Mailbox(user);
    m.subject = fmt::format("New titles in {} ({} to {})", text, format_date(dates.start),
                            format_date(dates.end - days(1)));
    m.date = now;
    m.key = fmt::format("u{}_{}_{}", user.id.value, now.time_since_epoch().count(), crypto::random_hex(4));
    m.body = DigestBody(items, dates, text);
    return dispatcher_->deliver(m);
}

WeeklyRunReport AlertService::weekly_run(Timestamp now) {
    WeeklyRunReport report;
    if (running_.exchange(true)) {
        report.busy = true;
        return report;
    }
    struct Reset {
        std::atomic<bool> &flag;
        ~Reset() { flag = false; }
    } reset{running_};

    const TimeWindow previous_week{1, 1};
    const auto dates = resolve_window(previous_week, now, options_.utc_offset);
    report.week = iso_week_of(dates.start);
    if (dispatcher_)
        report.retries_sent = dispatcher_->retry_pending();

    for (const auto &profile : store_.list_profiles()) {
        if (profile.delivery != Delivery::email)
            continue;
        ++report.profiles_evaluated;
        if (store_.was_dispatched(profile.id, report.week)) {
            ++report.already_dispatched;
            continue;
        }
        const auto result = run_window_query(profile, previous_week, now);
        if (result.items.empty()) {
            ++report.emails_suppressed;
            continue;
        }
        const auto user = store_.find_user(profile.user_id);
        if (!user || user->email.empty() || !dispatcher_) {
            spdlog::warn("profile {} has matches but no deliverable address", profile.id.value);
            ++report.emails_suppressed;
            continue;
        }
        const auto message = format_digest(result, *user, profile, report.week, now);
        if (!store_.mark_dispatched(profile.id, report.week)) {
            ++report.already_dispatched;
            continue;
        }
        if (dispatcher_->deliver(message))
            ++report.emails_sent;
        else
            ++report.emails_queued;
    }
    spdlog::info("weekly run {}: {} evaluated, {} sent, {} suppressed, {} queued", report.week.str(),
                 report.profiles_evaluated, report.emails_sent, report.emails_suppressed, report.emails_queued);
    return report;
}

} // namespace mylib
