#pragma once

// Reference implementations used only by tests. They deliberately share no
// code with mylibrary/callno: a regex grammar instead of the hand-written
// scanner, tuple comparison instead of the component walk, and a base-27
// numeric encoding for class-letter ranges.

#include <algorithm>
#include <cctype>
#include <optional>
#include <random>
#include <regex>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace oracle {

struct ParsedCallNumber {
    std::string cls;
    bool has_number = false;
    unsigned long integer = 0;
    std::string decimal;
    std::vector<std::pair<char, std::string>> cutters;
    bool has_year = false;
    int year = 0;
};

inline std::optional<ParsedCallNumber> parse(const std::string &text) {
    static const std::regex whole(
        R"(^[ \t]*([A-Za-z]{1,3})(?:([0-9]{1,9})(?:\.([0-9]+))?)?((?:[ \t]*\.[A-Za-z][0-9]+(?:[ \t]*\.?[A-Za-z][0-9]+)*)?)(?:[ \t]+([0-9]{4}))?[ \t]*$)");
    static const std::regex cutter(R"(([A-Za-z])([0-9]+))");
    std::smatch m;
    if (!std::regex_match(text, m, whole))
        return std::nullopt;
    ParsedCallNumber out;
    for (char c : m[1].str())
        out.cls += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (m[2].matched) {
        out.has_number = true;
        out.integer = std::stoul(m[2].str());
        out.decimal = m[3].matched ? m[3].str() : "";
    }
    const std::string cutters = m[4].str();
    for (auto it = std::sregex_iterator(cutters.begin(), cutters.end(), cutter); it != std::sregex_iterator(); ++it)
        out.cutters.emplace_back(static_cast<char>(std::toupper(static_cast<unsigned char>((*it)[1].str()[0]))),
                                 (*it)[2].str());
    if (m[5].matched) {
        out.has_year = true;
        out.year = std::stoi(m[5].str());
    }
    return out;
}

/// Fractional digit strings as padded fixed-width values plus length tie break.
inline std::pair<std::string, std::size_t> fraction(const std::string &digits) {
    std::string padded = digits;
    padded.resize(32, '0');
    return {padded, digits.size()};
}

inline auto tuple_of(const ParsedCallNumber &p) {
    std::vector<std::tuple<char, std::string, std::size_t>> cutters;
    for (const auto &[letter, digits] : p.cutters) {
        auto [padded, len] = fraction(digits);
        cutters.emplace_back(letter, padded, len);
    }
    auto [dec, dec_len] = fraction(p.decimal);
    return std::make_tuple(p.cls, p.has_number, p.integer, dec, dec_len, cutters, p.has_year, p.year);
}

/// -1, 0, 1
inline int compare(const ParsedCallNumber &a, const ParsedCallNumber &b) {
    const auto ta = tuple_of(a);
    const auto tb = tuple_of(b);
    return ta < tb ? -1 : (tb < ta ? 1 : 0);
}

/// Class letters as a base-27 number with a=1..z=26, right-padded with zeros to
/// three places, so numeric order is dictionary order with prefixes first.
inline long class_value(const std::string &cls) {
    long v = 0;
    for (std::size_t i = 0; i < 3; ++i)
        v = v * 27 + (i < cls.size() ? (std::toupper(static_cast<unsigned char>(cls[i])) - 'A' + 1) : 0);
    return v;
}

inline bool in_range(const std::string &cls, const std::string &lo, const std::string &hi) {
    const bool above_lo = class_value(cls) >= class_value(lo);
    const bool below_hi = class_value(cls) <= class_value(hi);
    const bool under_hi = cls.size() >= hi.size() && cls.compare(0, hi.size(), hi) == 0;
    return above_lo && (below_hi || under_hi);
}

/// All classes of one and two letters, A..ZZ (702 of them).
inline std::vector<std::string> all_short_classes() {
    std::vector<std::string> out;
    for (char a = 'A'; a <= 'Z'; ++a) {
        out.emplace_back(1, a);
        for (char b = 'A'; b <= 'Z'; ++b)
            out.push_back(std::string{a, b});
    }
    return out;
}

/// Random call number text in canonical-ish form. Uses raw engine output with
/// modulo so that the sequence is identical on every standard library.
inline std::string random_call_number(std::mt19937_64 &rng) {
    auto pick = [&](std::uint64_t n) { return static_cast<std::size_t>(rng() % n); };
    auto digits = [&](std::size_t min_len, std::size_t max_len) {
        std::string s;
        const std::size_t len = min_len + pick(max_len - min_len + 1);
        for (std::size_t i = 0; i < len; ++i)
            s += static_cast<char>('0' + pick(10));
        return s;
    };
    // A small alphabet makes equal prefixes, and so deep comparisons, common.
    static const std::string letters = "ABDQZ";
    std::string out;
    const std::size_t class_len = 1 + pick(3);
    for (std::size_t i = 0; i < class_len; ++i)
        out += letters[pick(letters.size())];
    if (pick(5) != 0) {
        out += std::to_string(1 + pick(120));
        if (pick(3) == 0)
            out += "." + digits(1, 3);
    }
    const std::size_t cutters = pick(3);
    for (std::size_t i = 0; i < cutters; ++i) {
        out += i == 0 ? " ." : " ";
        out += letters[pick(letters.size())];
        out += digits(1, 3);
    }
    if (pick(2) == 0)
        out += " " + std::to_string(1990 + pick(30));
    if (pick(4) == 0) {
        for (auto &c : out)
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

} // namespace oracle
