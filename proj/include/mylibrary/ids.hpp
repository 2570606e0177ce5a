#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>

namespace mylib {

/// Opaque numeric identifier, tagged so ids of different entities never mix.
template <class Tag>
struct Id {
    std::uint64_t value = 0;

    constexpr Id() = default;
    constexpr explicit Id(std::uint64_t v) : value(v) {}

    friend constexpr auto operator<=>(Id, Id) = default;

    std::string str() const { return std::to_string(value); }
};

using UserId = Id<struct UserTag>;
using DisciplineId = Id<struct DisciplineTag>;
using LibrarianId = Id<struct LibrarianTag>;
using ResourceId = Id<struct ResourceTag>;
using MessageId = Id<struct MessageTag>;
using ProfileId = Id<struct ProfileTag>;

} // namespace mylib

template <class Tag>
struct std::hash<mylib::Id<Tag>> {
    std::size_t operator()(mylib::Id<Tag> id) const noexcept { return std::hash<std::uint64_t>{}(id.value); }
};
