#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mylibrary/store.hpp"

namespace mylib {

struct SeedReport {
    std::map<std::string, std::size_t> created;
    std::map<std::string, std::size_t> reused;
};

/// Loads a JSON Lines fixture. Each line is an object with a "type" of
/// discipline, librarian, resource, recommendation or message. Disciplines are
/// referenced by name and resources by their "key" (or title when no key is
/// given). Existing disciplines and resources with the same name/kind+title
/// are reused, so loading the same file twice changes nothing. Blank lines and
/// lines starting with '#' are skipped. Throws Error with the line number on
/// the first bad line; earlier lines stay applied.
/// Messages are stamped with `now`.
SeedReport load_seed(Store &store, std::istream &in, Timestamp now);

} // namespace mylib
