#ifndef CATSIM_GEO_HPP
#define CATSIM_GEO_HPP

#include <cmath>
#include <compare>
#include <cstdint>

namespace catsim {

// Local planar coordinates in meters (east = x, north = y).
struct GeoPosition {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const GeoPosition&) const = default;
};

inline double distance(const GeoPosition& a, const GeoPosition& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

// Index of a square grid cell. Floor division, so a point exactly on a
// boundary belongs to the cell on its upper-right side.
struct CellIndex {
    std::int64_t i = 0;
    std::int64_t j = 0;

    auto operator<=>(const CellIndex&) const = default;
};

inline CellIndex cell_index_of(const GeoPosition& p, double cell_width) {
    return {static_cast<std::int64_t>(std::floor(p.x / cell_width)),
            static_cast<std::int64_t>(std::floor(p.y / cell_width))};
}

struct CellIndexHash {
    std::size_t operator()(const CellIndex& c) const {
        const auto a = static_cast<std::uint64_t>(c.i);
        const auto b = static_cast<std::uint64_t>(c.j);
        std::uint64_t h = a * 0x9e3779b97f4a7c15ULL ^ (b + 0x7f4a7c15u + (a << 6) + (a >> 2));
        return static_cast<std::size_t>(h);
    }
};

} // namespace catsim

#endif
