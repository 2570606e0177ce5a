#pragma once

// JSON encodings shared by the journal, the snapshot and the HTTP API.

#include "json.hpp"

#include "mylibrary/error.hpp"
#include "mylibrary/model.hpp"
#include "mylibrary/store.hpp"

namespace mylib {

using Json = nlohmann::json;

template <class Tag>
void to_json(Json &j, const Id<Tag> &id) {
    j = id.value;
}

template <class Tag>
void from_json(const Json &j, Id<Tag> &id) {
    id.value = j.get<std::uint64_t>();
}

void to_json(Json &j, Section s);
void from_json(const Json &j, Section &s);
void to_json(Json &j, ResourceKind k);
void from_json(const Json &j, ResourceKind &k);
void to_json(Json &j, LibrarianRole r);
void from_json(const Json &j, LibrarianRole &r);
void to_json(Json &j, MessageScope s);
void from_json(const Json &j, MessageScope &s);
void to_json(Json &j, Delivery d);
void from_json(const Json &j, Delivery &d);
void to_json(Json &j, const ServiceClassification &c);

void to_json(Json &j, const Discipline &d);
void from_json(const Json &j, Discipline &d);
void to_json(Json &j, const User &u);
void from_json(const Json &j, User &u);
void to_json(Json &j, const Librarian &l);
void from_json(const Json &j, Librarian &l);
void to_json(Json &j, const Resource &r);
void from_json(const Json &j, Resource &r);
void to_json(Json &j, const Message &m);
void from_json(const Json &j, Message &m);
void to_json(Json &j, const SelectionSet &s);
void from_json(const Json &j, SelectionSet &s);
void to_json(Json &j, const RecommendationSet &s);
void from_json(const Json &j, RecommendationSet &s);
void to_json(Json &j, const AcquisitionRecord &a);
void from_json(const Json &j, AcquisitionRecord &a);
void to_json(Json &j, const QuarantinedRecord &q);
void from_json(const Json &j, QuarantinedRecord &q);
void to_json(Json &j, const CAProfile &p);
void from_json(const Json &j, CAProfile &p);
void to_json(Json &j, const AdminAccount &a);
void from_json(const Json &j, AdminAccount &a);
void to_json(Json &j, const DeletionReport &r);
void to_json(Json &j, const IngestReport &r);

Json timestamp_json(Timestamp t);
Timestamp timestamp_from_json(const Json &j);

/// Reads `key` from an object, throwing ValidationError if it is missing or the
/// wrong type, so API payload mistakes surface as invalid-argument.
template <class T>
T required(const Json &j, const char *key) {
    if (!j.is_object() || !j.contains(key))
        throw ValidationError({std::string("missing field '") + key + "'"});
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception &) {
        throw ValidationError({std::string("field '") + key + "' has the wrong type"});
    }
}

template <class T>
T optional_field(const Json &j, const char *key, T fallback) {
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null())
        return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception &) {
        throw ValidationError({std::string("field '") + key + "' has the wrong type"});
    }
}

} // namespace mylib
