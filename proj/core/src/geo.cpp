#include "drivetel/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace drivetel::geo {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

double great_circle_m(const LatLon& a, const LatLon& b) {
    const double phi1 = a.lat * kDegToRad;
    const double phi2 = b.lat * kDegToRad;
    const double dphi = (b.lat - a.lat) * kDegToRad;
    const double dlambda = (b.lon - a.lon) * kDegToRad;
    const double s1 = std::sin(0.5 * dphi);
    const double s2 = std::sin(0.5 * dlambda);
    const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

LocalProjection::LocalProjection(const LatLon& origin) : origin_(origin) {
    meters_per_deg_lat_ = kEarthRadiusM * kDegToRad;
    meters_per_deg_lon_ = kEarthRadiusM * kDegToRad * std::cos(origin.lat * kDegToRad);
}

XY LocalProjection::to_xy(const LatLon& p) const {
    return {(p.lon - origin_.lon) * meters_per_deg_lon_,
            (p.lat - origin_.lat) * meters_per_deg_lat_};
}

PolylineProjection project_to_polyline(const XY& point, const std::vector<XY>& polyline,
                                       const std::vector<double>& cumulative_lengths) {
    PolylineProjection best;
    best.distance_m = std::numeric_limits<double>::infinity();

    for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
        const XY& a = polyline[i];
        const XY& b = polyline[i + 1];
        const double dx = b.x - a.x;
        const double dy = b.y - a.y;
        const double len2 = dx * dx + dy * dy;
        double t = 0.0;
        if (len2 > 0.0) {
            t = ((point.x - a.x) * dx + (point.y - a.y) * dy) / len2;
            t = std::clamp(t, 0.0, 1.0);
        }
        const double px = a.x + t * dx;
        const double py = a.y + t * dy;
        const double dist = std::hypot(point.x - px, point.y - py);
        if (dist < best.distance_m) {
            best.distance_m = dist;
            best.position_m = cumulative_lengths[i] + t * std::sqrt(len2);
        }
    }
    return best;
}

}  // namespace drivetel::geo
