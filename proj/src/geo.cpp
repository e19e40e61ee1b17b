#include "crowddyn/geo.hpp"

#include <algorithm>
#include <cmath>

#include "crowddyn/errors.hpp"

namespace crowddyn {

namespace {
constexpr double kDegToRad = M_PI / 180.0;
constexpr double kRadToDeg = 180.0 / M_PI;
} // namespace

bool GeoPoint::valid() const {
    return std::isfinite(lat) && std::isfinite(lon) &&
           lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0;
}

double haversine_distance(const GeoPoint& a, const GeoPoint& b) {
    const double lat1 = a.lat * kDegToRad;
    const double lat2 = b.lat * kDegToRad;
    const double dlat = (b.lat - a.lat) * kDegToRad;
    const double dlon = (b.lon - a.lon) * kDegToRad;

    const double sin_dlat = std::sin(dlat / 2.0);
    const double sin_dlon = std::sin(dlon / 2.0);
    const double h = sin_dlat * sin_dlat +
                     std::cos(lat1) * std::cos(lat2) * sin_dlon * sin_dlon;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

GeoPoint geographic_midpoint(std::span<const GeoPoint> points,
                             std::span<const double> weights) {
    if (points.empty())
        fail(errc::empty_input, "geographic_midpoint: empty point list");
    if (!weights.empty() && weights.size() != points.size())
        fail(errc::degenerate_weights,
             "geographic_midpoint: weights length does not match points");

    double sx = 0.0, sy = 0.0, sz = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        const UnitVec3 v = to_unit_vector(points[i]);
        sx += w * v.x;
        sy += w * v.y;
        sz += w * v.z;
        wsum += w;
    }
    if (wsum <= 0.0)
        fail(errc::degenerate_weights, "geographic_midpoint: weight sum is zero");

    sx /= wsum;
    sy /= wsum;
    sz /= wsum;

    const double norm = std::sqrt(sx * sx + sy * sy + sz * sz);
    if (norm == 0.0) {
        // Antipodal cancellation; no meaningful midpoint. Fall back to the
        // first point rather than emitting NaN.
        return points[0];
    }

    GeoPoint out;
    out.lat = std::asin(std::clamp(sz / norm, -1.0, 1.0)) * kRadToDeg;
    out.lon = std::atan2(sy / norm, sx / norm) * kRadToDeg;
    return out;
}

EnuPoint to_local_enu(const GeoPoint& p, const GeoPoint& origin) {
    double dlon = p.lon - origin.lon;
    if (dlon > 180.0) dlon -= 360.0;
    if (dlon < -180.0) dlon += 360.0;
    EnuPoint out;
    out.east_m = kEarthRadiusM * dlon * kDegToRad * std::cos(origin.lat * kDegToRad);
    out.north_m = kEarthRadiusM * (p.lat - origin.lat) * kDegToRad;
    return out;
}

GeoPoint from_local_enu(const EnuPoint& p, const GeoPoint& origin) {
    GeoPoint out;
    const double cos_lat = std::cos(origin.lat * kDegToRad);
    out.lat = origin.lat + (p.north_m / kEarthRadiusM) * kRadToDeg;
    out.lon = origin.lon + (p.east_m / (kEarthRadiusM * cos_lat)) * kRadToDeg;
    if (out.lon > 180.0) out.lon -= 360.0;
    if (out.lon < -180.0) out.lon += 360.0;
    return out;
}

UnitVec3 to_unit_vector(const GeoPoint& p) {
    const double lat = p.lat * kDegToRad;
    const double lon = p.lon * kDegToRad;
    const double cos_lat = std::cos(lat);
    return {cos_lat * std::cos(lon), cos_lat * std::sin(lon), std::sin(lat)};
}

double chord_sq_for_distance(double dist_m) {
    const double half_angle = dist_m / (2.0 * kEarthRadiusM);
    const double half_chord = std::sin(half_angle);
    return 4.0 * half_chord * half_chord;
}

double distance_from_chord_sq(double chord_sq) {
    const double half_chord = std::sqrt(std::max(0.0, chord_sq)) / 2.0;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, half_chord));
}

} // namespace crowddyn
