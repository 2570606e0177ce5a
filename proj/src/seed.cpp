#include "mylibrary/seed.hpp"

#include <istream>

#include "mylibrary/codec.hpp"
#include "mylibrary/error.hpp"

namespace mylib {

namespace {

class Loader {
public:
    Loader(Store &store, Timestamp now) : store_(store), now_(now) {
        for (const auto &r : store_.list_resources())
            if (r.kind != ResourceKind::personal_link)
                by_title_.emplace(std::pair(r.kind, r.title), r.id);
    }

    void Line(const Json &j) {
        const auto type = required<std::string>(j, "type");
        if (type == "discipline")
            Discipline_(j);
        else if (type == "librarian")
            Librarian_(j);
        else if (type == "resource")
            Resource_(j);
        else if (type == "recommendation")
            Recommendation_(j);
        else if (type == "message")
            Message_(j);
        else
            throw Error(Errc::invalid_argument, "unknown record type '" + type + "'");
    }

    SeedReport report;

private:
    DisciplineId DisciplineByName(const std::string &name) const {
        const auto d = store_.find_discipline_by_name(name);
        if (!d)
            throw Error(Errc::not_found, "unknown discipline '" + name + "'");
        return d->id;
    }

    std::set<DisciplineId> Disciplines(const Json &j) const {
        std::set<DisciplineId> out;
        for (const auto &name : optional_field(j, "disciplines", std::vector<std::string>{}))
            out.insert(DisciplineByName(name));
        return out;
    }

    void Discipline_(const Json &j) {
        const auto name = required<std::string>(j, "name");
        if (store_.find_discipline_by_name(name)) {
            ++report.reused["discipline"];
            return;
        }
        store_.create_discipline(name, optional_field<std::string>(j, "description", ""));
        ++report.created["discipline"];
    }

    void Librarian_(const Json &j) {
        Librarian l;
        l.name = required<std::string>(j, "name");
        l.phone = optional_field<std::string>(j, "phone", "");
        l.email = optional_field<std::string>(j, "email", "");
        l.role = optional_field(j, "role", LibrarianRole::reference_librarian);
        l.discipline_ids = Disciplines(j);
        for (const auto &existing : store_.list_librarians())
            if (existing.name == l.name && existing.email == l.email) {
                l.id = existing.id;
                store_.put_librarian(l);
                ++report.reused["librarian"];
                return;
            }
        store_.put_librarian(l);
        ++report.created["librarian"];
    }

    void Resource_(const Json &j) {
        Resource r;
        r.kind = required<ResourceKind>(j, "kind");
        r.title = required<std::string>(j, "title");
        r.url = required<std::string>(j, "url");
        r.description = optional_field<std::string>(j, "description", "");
        if (j.contains("url_template"))
            r.url_template = required<std::string>(j, "url_template");
        r.discipline_ids = Disciplines(j);
        const auto key = optional_field<std::string>(j, "key", r.title);
        const auto existing = by_title_.find(std::pair(r.kind, r.title));
        if (existing != by_title_.end()) {
            r.id = existing->second;
            ++report.reused["resource"];
        } else {
            ++report.created["resource"];
        }
        r = store_.put_resource(r);
        by_title_[std::pair(r.kind, r.title)] = r.id;
        by_key_[key] = r.id;
    }

    void Recommendation_(const Json &j) {
        const auto discipline = DisciplineByName(required<std::string>(j, "discipline"));
        const auto section = required<Section>(j, "section");
        std::vector<ResourceId> ids;
        for (const auto &key : required<std::vector<std::string>>(j, "resources")) {
            const auto it = by_key_.find(key);
            if (it == by_key_.end())
                throw Error(Errc::not_found, "unknown resource key '" + key + "'");
            ids.push_back(it->second);
        }
        if (store_.recommendations(discipline, section).resource_ids == ids) {
            ++report.reused["recommendation"];
            return;
        }
        store_.set_recommendations(discipline, section, ids);
        ++report.created["recommendation"];
    }

    void Message_(const Json &j) {
        const auto body = required<std::string>(j, "body");
        std::optional<DisciplineId> discipline;
        if (j.contains("discipline"))
            discipline = DisciplineByName(required<std::string>(j, "discipline"));
        const auto live = discipline ? store_.live_discipline_message(*discipline) : store_.live_global_message();
        if (live && live->body == body) {
            ++report.reused["message"];
            return;
        }
        if (discipline)
            store_.set_discipline_message(*discipline, body, now_);
        else
            store_.set_global_message(body, now_);
        ++report.created["message"];
    }

    Store &store_;
    Timestamp now_;
    std::map<std::pair<ResourceKind, std::string>, ResourceId> by_title_;
    std::map<std::string, ResourceId> by_key_;
};

} // namespace

SeedReport load_seed(Store &store, std::istream &in, Timestamp now) {
    Loader loader(store, now);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        try {
            loader.Line(Json::parse(line));
        } catch (const Json::exception &e) {
            throw Error(Errc::invalid_argument, "line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error &e) {
            throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return loader.report;
}

} // namespace mylib
