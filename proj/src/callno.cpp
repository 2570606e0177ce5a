#include "mylibrary/callno.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "mylibrary/error.hpp"

namespace mylib::callno {

namespace {

constexpr std::size_t kMaxClassLetters = 3;
constexpr std::size_t kMaxIntegerDigits = 9;

bool IsAlpha(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }
bool IsDigit(char c) { return c >= '0' && c <= '9'; }
bool IsSpace(char c) { return c == ' ' || c == '\t'; }
char Upper(char c) { return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c; }

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    CallNumber Run() {
        CallNumber out;
        out.raw = std::string(text_);
        SkipSpace();
        if (AtEnd())
            throw ParseError(pos_, "empty call number");

        const std::size_t class_start = pos_;
        while (!AtEnd() && IsAlpha(Peek()))
            out.class_letters += Upper(text_[pos_++]);
        if (out.class_letters.empty())
            throw ParseError(class_start, "expected class letters");
        if (out.class_letters.size() > kMaxClassLetters)
            throw ParseError(class_start + kMaxClassLetters, "class has more than three letters");

        if (!AtEnd() && IsDigit(Peek()))
            out.number = ReadClassNumber();

        while (true) {
            const bool spaced = SkipSpace();
            if (AtEnd())
                break;
            const char c = Peek();
            if (c == '.') {
                ++pos_;
                if (AtEnd() || !IsAlpha(Peek()))
                    throw ParseError(pos_, "expected cutter letter after '.'");
                out.cutters.push_back(ReadCutter());
            } else if (IsAlpha(c)) {
                if (out.cutters.empty())
                    throw ParseError(pos_, "first cutter must begin with '.'");
                out.cutters.push_back(ReadCutter());
            } else if (IsDigit(c) && spaced) {
                out.year = ReadYear();
                SkipSpace();
                if (!AtEnd())
                    throw ParseError(pos_, "unexpected text after year");
                break;
            } else {
                throw ParseError(pos_, std::string("unexpected character '") + c + "'");
            }
        }
        return out;
    }

private:
    bool AtEnd() const { return pos_ >= text_.size(); }
    char Peek() const { return text_[pos_]; }

    bool SkipSpace() {
        const std::size_t start = pos_;
        while (!AtEnd() && IsSpace(Peek()))
            ++pos_;
        return pos_ != start;
    }

    std::string ReadDigits() {
        std::string digits;
        while (!AtEnd() && IsDigit(Peek()))
            digits += text_[pos_++];
        return digits;
    }

    ClassNumber ReadClassNumber() {
        const std::size_t start = pos_;
        const std::string digits = ReadDigits();
        if (digits.size() > kMaxIntegerDigits)
            throw ParseError(start, "class number too long");
        ClassNumber number;
        number.integer = static_cast<std::uint32_t>(std::stoul(digits));
        if (!AtEnd() && Peek() == '.' && pos_ + 1 < text_.size() && IsDigit(text_[pos_ + 1])) {
            ++pos_;
            number.decimal = ReadDigits();
        }
        return number;
    }

    Cutter ReadCutter() {
        Cutter cutter;
        cutter.letter = Upper(text_[pos_++]);
        const std::size_t digits_at = pos_;
        cutter.digits = ReadDigits();
        if (cutter.digits.empty())
            throw ParseError(digits_at, "cutter letter must be followed by digits");
        return cutter;
    }

    int ReadYear() {
        const std::size_t start = pos_;
        const std::string digits = ReadDigits();
        if (digits.size() != 4)
            throw ParseError(start, "year must have four digits");
        if (!AtEnd() && !IsSpace(Peek()))
            throw ParseError(pos_, "unexpected character after year");
        return std::stoi(digits);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

std::strong_ordering CompareDigits(std::string_view a, std::string_view b) {
    // Digit-by-digit with a shorter prefix first is exactly fraction order with
    // trailing zeros as a tie break.
    return a.compare(b) <=> 0;
}

void AppendBigEndian(std::string &out, std::uint64_t value, int bytes) {
    for (int i = bytes - 1; i >= 0; --i)
        out += static_cast<char>((value >> (8 * i)) & 0xff);
}

std::string_view Trim(std::string_view s) {
    while (!s.empty() && (IsSpace(s.front()) || s.front() == '\n' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (IsSpace(s.back()) || s.back() == '\n' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::string ReadClassLetters(std::string_view part, std::size_t offset) {
    const std::string_view trimmed = Trim(part);
    const std::size_t lead = trimmed.empty() ? 0 : static_cast<std::size_t>(trimmed.data() - part.data());
    if (trimmed.empty())
        throw ParseError(offset, "missing class letters in range");
    if (trimmed.size() > kMaxClassLetters)
        throw ParseError(offset + lead, "range bound has more than three letters");
    std::string out;
    for (std::size_t i = 0; i < trimmed.size(); ++i) {
        if (!IsAlpha(trimmed[i]))
            throw ParseError(offset + lead + i, "range bounds must be class letters");
        out += Upper(trimmed[i]);
    }
    return out;
}

} // namespace

CallNumber parse_call_number(std::string_view text) { return Parser(text).Run(); }

std::optional<CallNumber> try_parse_call_number(std::string_view text) noexcept {
    try {
        return parse_call_number(text);
    } catch (...) {
        return std::nullopt;
    }
}

std::string format(const CallNumber &c) {
    std::string out = c.class_letters;
    if (c.number) {
        out += std::to_string(c.number->integer);
        if (!c.number->decimal.empty())
            out += "." + c.number->decimal;
    }
    for (std::size_t i = 0; i < c.cutters.size(); ++i) {
        out += i == 0 ? " ." : " ";
        out += c.cutters[i].letter;
        out += c.cutters[i].digits;
    }
    if (c.year)
        out += fmt::format(" {:04}", *c.year);
    return out;
}

std::string SortKey::hex() const {
    std::string out;
    out.reserve(bytes_.size() * 2);
    for (unsigned char b : bytes_)
        out += fmt::format("{:02x}", b);
    return out;
}

SortKey sort_key(const CallNumber &c) {
    // Each component is self-delimiting and sorts the same way compare() does:
    // 0x00 ends a variable-length string (below every letter and digit),
    // 0x01 marks "absent / no more", 0x02 marks "present".
    std::string key = c.class_letters;
    key += '\x00';
    if (c.number) {
        key += '\x02';
        AppendBigEndian(key, c.number->integer, 4);
        key += c.number->decimal;
        key += '\x00';
    } else {
        key += '\x01';
    }
    for (const Cutter &cutter : c.cutters) {
        key += '\x02';
        key += cutter.letter;
        key += cutter.digits;
        key += '\x00';
    }
    key += '\x01';
    if (c.year) {
        key += '\x02';
        AppendBigEndian(key, static_cast<std::uint64_t>(*c.year), 2);
    } else {
        key += '\x01';
    }
    return SortKey(std::move(key));
}

std::strong_ordering compare_class(std::string_view a, std::string_view b) noexcept { return a.compare(b) <=> 0; }

std::strong_ordering compare(const CallNumber &a, const CallNumber &b) {
    if (auto c = compare_class(a.class_letters, b.class_letters); c != 0)
        return c;

    if (a.number.has_value() != b.number.has_value())
        return a.number.has_value() ? std::strong_ordering::greater : std::strong_ordering::less;
    if (a.number) {
        if (auto c = a.number->integer <=> b.number->integer; c != 0)
            return c;
        if (auto c = CompareDigits(a.number->decimal, b.number->decimal); c != 0)
            return c;
    }

    const std::size_t shared = std::min(a.cutters.size(), b.cutters.size());
    for (std::size_t i = 0; i < shared; ++i) {
        if (auto c = a.cutters[i].letter <=> b.cutters[i].letter; c != 0)
            return c;
        if (auto c = CompareDigits(a.cutters[i].digits, b.cutters[i].digits); c != 0)
            return c;
    }
    if (auto c = a.cutters.size() <=> b.cutters.size(); c != 0)
        return c;

    if (a.year.has_value() != b.year.has_value())
        return a.year.has_value() ? std::strong_ordering::greater : std::strong_ordering::less;
    if (a.year)
        return *a.year <=> *b.year;
    return std::strong_ordering::equal;
}

RangeList parse_range_list(std::string_view text) {
    if (Trim(text).empty())
        throw ParseError(0, "empty range list");
    RangeList out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::size_t end = comma == std::string_view::npos ? text.size() : comma;
        const std::string_view part = text.substr(start, end - start);

        CallNumberRange range;
        const std::size_t dash = part.find('-');
        if (dash == std::string_view::npos) {
            range.lo = ReadClassLetters(part, start);
            range.hi = range.lo;
        } else {
            if (part.find('-', dash + 1) != std::string_view::npos)
                throw ParseError(start + part.find('-', dash + 1), "malformed range pair");
            range.lo = ReadClassLetters(part.substr(0, dash), start);
            range.hi = ReadClassLetters(part.substr(dash + 1), start + dash + 1);
        }
        if (compare_class(range.lo, range.hi) > 0)
            throw ParseError(start, "range lower bound " + range.lo + " is after upper bound " + range.hi);
        out.push_back(std::move(range));

        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

std::string format_range_list(const RangeList &ranges) {
    std::string out;
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        if (i > 0)
            out += ", ";
        out += ranges[i].lo + " - " + ranges[i].hi;
    }
    return out;
}

bool in_range(std::string_view class_letters, const CallNumberRange &r) noexcept {
    if (compare_class(class_letters, r.lo) < 0)
        return false;
    return compare_class(class_letters, r.hi) <= 0 || class_letters.starts_with(r.hi);
}

bool in_range(const CallNumber &c, const CallNumberRange &r) noexcept { return in_range(c.class_letters, r); }

bool in_any_range(const CallNumber &c, const RangeList &ranges) noexcept {
    return std::any_of(ranges.begin(), ranges.end(), [&](const CallNumberRange &r) { return in_range(c, r); });
}

} // namespace mylib::callno
