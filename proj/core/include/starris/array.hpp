#pragma once

#include <vector>

#include <Eigen/Core>

#include "starris/types.hpp"

namespace starris {

enum class HalfSpace { transmissive, reflective };

const char* to_string(HalfSpace half);

// Far-field direction seen from the array centroid. Azimuth is measured in
// the (x,y)-plane from +x towards +y, elevation from the (x,y)-plane towards
// +z. The +x axis points into the reflective half-space, so the azimuth
// alone decides which side of the surface a direction lies on.
class Direction {
public:
    // Azimuth is wrapped into (-pi/2, 3pi/2). Throws ConfigError when the
    // direction grazes the surface (azimuth = +-pi/2) or |elevation| >= pi/2.
    static Direction from_radians(double azimuth, double elevation);
    static Direction from_degrees(double azimuth_deg, double elevation_deg);

    double azimuth() const noexcept { return azimuth_; }
    double elevation() const noexcept { return elevation_; }
    HalfSpace half_space() const noexcept { return half_space_; }

    // Unit vector [cos(el)cos(az), cos(el)sin(az), sin(el)].
    Eigen::Vector3d unit_vector() const;

    // Reflection through the array plane: [az; el] -> [pi - az; el].
    Direction mirrored() const;

    bool operator==(const Direction&) const = default;

private:
    Direction(double az, double el, HalfSpace half) : azimuth_(az), elevation_(el), half_space_(half) {}

    double azimuth_;
    double elevation_;
    HalfSpace half_space_;
};

// Uniform rectangular array in the (y,z)-plane, centred on its centroid.
// Element n = iy * n_z + iz, i.e. z runs fastest within each y column.
class ArrayGeometry {
public:
    ArrayGeometry(int n_y, int n_z, double spacing_y, double spacing_z,
                  std::vector<Eigen::Vector3d> positions);

    int n_y() const noexcept { return n_y_; }
    int n_z() const noexcept { return n_z_; }
    double spacing_y() const noexcept { return spacing_y_; }
    double spacing_z() const noexcept { return spacing_z_; }
    Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(positions_.size()); }
    const std::vector<Eigen::Vector3d>& positions() const noexcept { return positions_; }

private:
    int n_y_;
    int n_z_;
    double spacing_y_;
    double spacing_z_;
    std::vector<Eigen::Vector3d> positions_;
};

ArrayGeometry ura_positions(int n_y, int n_z, double spacing_y, double spacing_z);

struct SteeringVector {
    cvec entries;
    Direction direction;
    double wavelength;
};

// entry n = exp(+i 2pi/lambda <p_n, k(direction)>).
SteeringVector steering_vector(const ArrayGeometry& geometry, const Direction& direction,
                               double wavelength);

}  // namespace starris
