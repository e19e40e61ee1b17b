#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace crowddyn {

// Spherical Earth model. At the ~5 km scale of one analysis region the
// difference to an ellipsoid is far below the grid cell size.
inline constexpr double kEarthRadiusM = 6371000.0;

struct GeoPoint {
    double lat = 0.0; // degrees, [-90, 90]
    double lon = 0.0; // degrees, [-180, 180]

    bool valid() const;
    bool operator==(const GeoPoint&) const = default;
};

// Analysis region: posts are harvested from the circle (center, radius_m);
// representatives move inside the axis-aligned square of side side_m
// centered on the same point.
struct Region {
    GeoPoint center;
    double radius_m = 0.0;
    double side_m = 0.0;

    bool valid() const { return center.valid() && radius_m > 0.0 && side_m > 0.0; }
};

/// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
double haversine_distance(const GeoPoint& a, const GeoPoint& b);

/// Geographic midpoint: weighted mean of the 3D unit vectors of the inputs,
/// renormalized and mapped back to lat/lon. Unweighted when weights is empty.
/// Throws errc::empty_input / errc::degenerate_weights.
GeoPoint geographic_midpoint(std::span<const GeoPoint> points,
                             std::span<const double> weights = {});

// Local east/north coordinates (meters) about an origin, equirectangular:
// east = R * dlon * cos(lat_origin), north = R * dlat. Good to <0.1% at the
// 5 km scale this library works at.
struct EnuPoint {
    double east_m = 0.0;
    double north_m = 0.0;
};

EnuPoint to_local_enu(const GeoPoint& p, const GeoPoint& origin);
GeoPoint from_local_enu(const EnuPoint& p, const GeoPoint& origin);

// Unit vector on the sphere. Chord length is a monotone function of the
// great-circle distance, so "chord_sq(a,b) <= chord_sq_for_distance(d)" is
// exactly the predicate "haversine_distance(a,b) <= d" without the trig per
// pair; the clustering hot loops rely on this.
struct UnitVec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

UnitVec3 to_unit_vector(const GeoPoint& p);

inline double chord_sq(const UnitVec3& a, const UnitVec3& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}

double chord_sq_for_distance(double dist_m);
double distance_from_chord_sq(double chord_sq);

} // namespace crowddyn
