#ifndef DRIVETEL_GEO_HPP
#define DRIVETEL_GEO_HPP

#include <vector>

namespace drivetel::geo {

inline constexpr double kEarthRadiusM = 6371000.0;  // spherical earth

struct LatLon {
    double lat = 0.0;  // degrees
    double lon = 0.0;  // degrees
};

// Planar point in meters under a local equirectangular projection.
struct XY {
    double x = 0.0;
    double y = 0.0;
};

double great_circle_m(const LatLon& a, const LatLon& b);

// Equirectangular projection anchored at `origin`; accurate at the tens-of-
// meters scales map matching operates on.
class LocalProjection {
  public:
    explicit LocalProjection(const LatLon& origin);
    XY to_xy(const LatLon& p) const;

  private:
    LatLon origin_;
    double meters_per_deg_lat_;
    double meters_per_deg_lon_;
};

struct PolylineProjection {
    double distance_m = 0.0;  // minimal distance from the point to the polyline
    double position_m = 0.0;  // arc length from the polyline start to the foot point
};

// Nearest point on a polyline (given in projected meters, with cumulative arc
// lengths) to a query point.
PolylineProjection project_to_polyline(const XY& point, const std::vector<XY>& polyline,
                                       const std::vector<double>& cumulative_lengths);

}  // namespace drivetel::geo

#endif
