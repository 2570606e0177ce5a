#include "mylibrary/time.hpp"

#include <array>
#include <charconv>
#include <cstdlib>

#include <fmt/format.h>

#include "mylibrary/error.hpp"

namespace mylib {

using namespace std::chrono;

namespace {

constexpr std::array<std::string_view, 12> kMonths = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                      "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
constexpr std::array<std::string_view, 7> kWeekdays = {"Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"};

int ReadFixed(std::string_view text, std::size_t pos, std::size_t width) {
    if (pos + width > text.size())
        throw ParseError(pos, "truncated number");
    int value = 0;
    for (std::size_t i = pos; i < pos + width; ++i) {
        if (text[i] < '0' || text[i] > '9')
            throw ParseError(i, "expected digit");
        value = value * 10 + (text[i] - '0');
    }
    return value;
}

void Expect(std::string_view text, std::size_t pos, char c) {
    if (pos >= text.size() || text[pos] != c)
        throw ParseError(pos, std::string("expected '") + c + "'");
}

Date MakeDate(int y, int m, int d, std::size_t offset) {
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok())
        throw ParseError(offset, "invalid calendar date");
    return sys_days{ymd};
}

} // namespace

Clock system_clock() {
    return [] { return floor<seconds>(std::chrono::system_clock::now()); };
}

Clock fixed_clock(Timestamp at) {
    return [at] { return at; };
}

Date parse_date(std::string_view text) {
    if (text.size() != 10)
        throw ParseError(0, "expected YYYY-MM-DD");
    const int y = ReadFixed(text, 0, 4);
    Expect(text, 4, '-');
    const int m = ReadFixed(text, 5, 2);
    Expect(text, 7, '-');
    const int d = ReadFixed(text, 8, 2);
    return MakeDate(y, m, d, 0);
}

std::string format_date(Date date) {
    const year_month_day ymd{date};
    return fmt::format("{:04}-{:02}-{:02}", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                       static_cast<unsigned>(ymd.day()));
}

Timestamp parse_timestamp(std::string_view text) {
    if (text.size() == 10)
        return Timestamp{parse_date(text)};
    if (text.size() != 20 || (text[10] != 'T' && text[10] != ' ') || text[19] != 'Z')
        throw ParseError(0, "expected YYYY-MM-DDTHH:MM:SSZ");
    const Date date = parse_date(text.substr(0, 10));
    const int h = ReadFixed(text, 11, 2);
    Expect(text, 13, ':');
    const int mi = ReadFixed(text, 14, 2);
    Expect(text, 16, ':');
    const int s = ReadFixed(text, 17, 2);
    if (h > 23 || mi > 59 || s > 60)
        throw ParseError(11, "time of day out of range");
    return Timestamp{date} + hours{h} + minutes{mi} + seconds{s};
}

std::string format_timestamp(Timestamp at) {
    const Date date = floor<days>(at);
    const hh_mm_ss hms{at - date};
    return fmt::format("{}T{:02}:{:02}:{:02}Z", format_date(date), hms.hours().count(), hms.minutes().count(),
                       hms.seconds().count());
}

std::string rfc5322_date(Timestamp at) {
    const Date date = floor<days>(at);
    const year_month_day ymd{date};
    const hh_mm_ss hms{at - date};
    return fmt::format("{}, {:02} {} {:04} {:02}:{:02}:{:02} +0000", kWeekdays[weekday{date}.c_encoding()],
                       static_cast<unsigned>(ymd.day()), kMonths[static_cast<unsigned>(ymd.month()) - 1],
                       static_cast<int>(ymd.year()), hms.hours().count(), hms.minutes().count(),
                       hms.seconds().count());
}

std::string clf_date(Timestamp at) {
    const Date date = floor<days>(at);
    const year_month_day ymd{date};
    const hh_mm_ss hms{at - date};
    return fmt::format("{:02}/{}/{:04}:{:02}:{:02}:{:02} +0000", static_cast<unsigned>(ymd.day()),
                       kMonths[static_cast<unsigned>(ymd.month()) - 1], static_cast<int>(ymd.year()),
                       hms.hours().count(), hms.minutes().count(), hms.seconds().count());
}

Timestamp parse_clf_date(std::string_view text) {
    // dd/Mon/yyyy:HH:MM:SS +zzzz
    if (text.size() != 26)
        throw ParseError(0, "expected dd/Mon/yyyy:HH:MM:SS +zzzz");
    const int d = ReadFixed(text, 0, 2);
    Expect(text, 2, '/');
    int m = 0;
    for (std::size_t i = 0; i < kMonths.size(); ++i)
        if (text.substr(3, 3) == kMonths[i])
            m = static_cast<int>(i) + 1;
    if (m == 0)
        throw ParseError(3, "unknown month");
    Expect(text, 6, '/');
    const int y = ReadFixed(text, 7, 4);
    Expect(text, 11, ':');
    const int h = ReadFixed(text, 12, 2);
    Expect(text, 14, ':');
    const int mi = ReadFixed(text, 15, 2);
    Expect(text, 17, ':');
    const int s = ReadFixed(text, 18, 2);
    Expect(text, 20, ' ');
    if (text[21] != '+' && text[21] != '-')
        throw ParseError(21, "expected zone sign");
    const int zh = ReadFixed(text, 22, 2);
    const int zm = ReadFixed(text, 24, 2);
    if (h > 23 || mi > 59 || s > 60 || zm > 59)
        throw ParseError(12, "time of day out of range");
    const minutes zone{(zh * 60 + zm) * (text[21] == '-' ? -1 : 1)};
    return Timestamp{MakeDate(y, m, d, 0)} + hours{h} + minutes{mi} + seconds{s} - zone;
}

std::string IsoWeek::str() const { return fmt::format("{:04}-W{:02}", year, week); }

Date week_start(Date date) {
    const weekday wd{date};
    return date - days{wd.iso_encoding() - 1};
}

IsoWeek iso_week_of(Date date) {
    const Date thursday = week_start(date) + days{3};
    const year y = year_month_day{thursday}.year();
    const Date jan1 = sys_days{y / January / 1};
    return IsoWeek{static_cast<int>(y), static_cast<unsigned>((thursday - jan1).count() / 7 + 1)};
}

Date local_date(Timestamp at, minutes utc_offset) { return floor<days>(at + utc_offset); }

} // namespace mylib
