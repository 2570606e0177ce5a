#include <istream>
#include <string>

#include "mylibrary/error.hpp"
#include "mylibrary/store.hpp"

namespace mylib {

namespace {

std::vector<std::string> SplitTabs(const std::string &line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
        if (tab == std::string::npos)
            return out;
        start = tab + 1;
    }
}

} // namespace

AcquisitionFile read_acquisition_file(std::istream &in) {
    AcquisitionFile out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line.front() == '#')
            continue;
        const auto fields = SplitTabs(line);
        AcquisitionRecord record;
        if (fields.size() != 5) {
            record.call_number = fields[0];
            out.malformed.push_back({record, "line " + std::to_string(line_no) + ": expected 5 tab-separated fields, got " +
                                                 std::to_string(fields.size())});
            continue;
        }
        record.call_number = fields[0];
        record.author = fields[1];
        record.title = fields[2];
        record.record_url = fields[3];
        try {
            record.accession_date = parse_date(fields[4]);
        } catch (const ParseError &e) {
            out.malformed.push_back({record, "line " + std::to_string(line_no) + ": bad accession date: " + e.what()});
            continue;
        }
        out.records.push_back(std::move(record));
    }
    return out;
}

} // namespace mylib
