#pragma once

// Library of Congress call numbers, reduced to the parts that matter for shelf
// order:
//
//     CLASS [NUMBER[.DECIMAL]] [.CUTTER [[.]CUTTER ...]] [YEAR]
//
// CLASS is 1-3 letters, NUMBER is directly attached to CLASS, a CUTTER is one
// letter followed by digits, YEAR is four digits. Input is case-insensitive and
// the canonical form is uppercase, e.g. "BD41 .M67 1999".

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mylib::callno {

struct ClassNumber {
    std::uint32_t integer = 0;
    /// Digits after the decimal point, kept verbatim; compared as a fraction.
    std::string decimal;

    friend bool operator==(const ClassNumber &, const ClassNumber &) = default;
};

struct Cutter {
    char letter = 'A';
    /// Compared as a decimal fraction: M67 files before M7.
    std::string digits;

    friend bool operator==(const Cutter &, const Cutter &) = default;
};

struct CallNumber {
    std::string class_letters;
    std::optional<ClassNumber> number;
    std::vector<Cutter> cutters;
    std::optional<int> year;
    /// Input text as given. Not part of equality.
    std::string raw;

    bool operator==(const CallNumber &other) const {
        return class_letters == other.class_letters && number == other.number && cutters == other.cutters &&
               year == other.year;
    }
};

/// Throws ParseError with the offset of the first offending character.
CallNumber parse_call_number(std::string_view text);
/// Non-throwing variant.
std::optional<CallNumber> try_parse_call_number(std::string_view text) noexcept;

/// Canonical text; parse_call_number(format(c)) == c.
std::string format(const CallNumber &c);

/// Byte string whose lexicographic order is the shelf order.
class SortKey {
public:
    SortKey() = default;
    explicit SortKey(std::string bytes) : bytes_(std::move(bytes)) {}

    const std::string &bytes() const noexcept { return bytes_; }
    std::string hex() const;

    friend auto operator<=>(const SortKey &, const SortKey &) = default;

private:
    std::string bytes_;
};

SortKey sort_key(const CallNumber &c);

/// Class letters, then class number, then cutters token by token, then year.
/// A missing component files before a present one.
std::strong_ordering compare(const CallNumber &a, const CallNumber &b);

/// Class-letter order: letter by letter, a proper prefix first (B < BD < BF < C).
std::strong_ordering compare_class(std::string_view a, std::string_view b) noexcept;

struct CallNumberRange {
    std::string lo;
    std::string hi;

    friend bool operator==(const CallNumberRange &, const CallNumberRange &) = default;
};

using RangeList = std::vector<CallNumberRange>;

/// "b - bd, z - zz" -> [(B,BD), (Z,ZZ)]; a lone "q" means (Q,Q).
/// Throws ParseError on an empty list, a malformed pair or lo > hi.
RangeList parse_range_list(std::string_view text);

/// "B - BD, Z - ZZ"
std::string format_range_list(const RangeList &ranges);

/// True when the class letters fall in [lo, hi], where hi also admits any class
/// it prefixes (so "B - BD" covers BDA as well as BD).
bool in_range(const CallNumber &c, const CallNumberRange &r) noexcept;
bool in_range(std::string_view class_letters, const CallNumberRange &r) noexcept;
bool in_any_range(const CallNumber &c, const RangeList &ranges) noexcept;

} // namespace mylib::callno
