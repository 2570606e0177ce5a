#pragma once

#include <chrono>
#include <compare>
#include <functional>
#include <string>
#include <string_view>

namespace mylib {

using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

/// Injectable wall clock. Production code uses system_clock(); tests pin it.
using Clock = std::function<Timestamp()>;

Clock system_clock();
Clock fixed_clock(Timestamp at);

/// YYYY-MM-DD, strict. Throws ParseError.
Date parse_date(std::string_view text);
std::string format_date(Date date);

/// YYYY-MM-DDTHH:MM:SSZ, or a bare date meaning midnight UTC. Throws ParseError.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp at);

/// "Thu, 15 Oct 2026 09:00:00 +0000"
std::string rfc5322_date(Timestamp at);
/// "15/Oct/2026:09:00:00 +0000"
std::string clf_date(Timestamp at);
/// Inverse of clf_date, honoring the numeric zone. Throws ParseError.
Timestamp parse_clf_date(std::string_view text);

struct IsoWeek {
    int year = 0;
    unsigned week = 0;

    friend auto operator<=>(const IsoWeek &, const IsoWeek &) = default;

    /// "2026-W07"
    std::string str() const;
};

IsoWeek iso_week_of(Date date);
/// Monday of the week containing `date`.
Date week_start(Date date);

/// Calendar date of `at` in a zone that sits `utc_offset` away from UTC.
Date local_date(Timestamp at, std::chrono::minutes utc_offset);

} // namespace mylib
