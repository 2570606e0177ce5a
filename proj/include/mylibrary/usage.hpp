#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "mylibrary/codec.hpp"
#include "mylibrary/time.hpp"

namespace mylib {

struct ClfEntry {
    std::string host;
    std::string ident;
    std::string authuser;
    Timestamp at{};
    std::string method;
    std::string target;
    std::string protocol;
    int status = 0;
    /// Unset for "-".
    std::optional<std::size_t> bytes;
};

std::optional<ClfEntry> parse_clf_line(std::string_view line);
std::string format_clf_line(const ClfEntry &entry);

/// Counter name for a request, e.g. "page", "customize.library_links".
std::string route_counter(std::string_view method, std::string_view target);

struct UsagePeriod {
    std::optional<Timestamp> from;
    /// Exclusive.
    std::optional<Timestamp> to;

    friend bool operator==(const UsagePeriod &, const UsagePeriod &) = default;
};

struct UsageReport {
    UsagePeriod period;
    std::map<std::string, std::size_t> counters;
    /// Quick-search hits by engine id.
    std::map<std::string, std::size_t> resource_hits;
    std::size_t distinct_users = 0;
    std::size_t requests = 0;
    std::size_t malformed = 0;
    std::size_t outside_period = 0;

    friend bool operator==(const UsageReport &, const UsageReport &) = default;
};

UsageReport usage_report(std::istream &log, const UsagePeriod &period);

void to_json(Json &j, const UsageReport &report);

} // namespace mylib
