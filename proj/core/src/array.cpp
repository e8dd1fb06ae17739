#include "starris/array.hpp"

#include <cmath>
#include <string>

#include "starris/errors.hpp"

namespace starris {

const char* to_string(HalfSpace half) {
    return half == HalfSpace::transmissive ? "transmissive" : "reflective";
}

Direction Direction::from_radians(double azimuth, double elevation) {
    if (!std::isfinite(azimuth) || !std::isfinite(elevation)) {
        throw ConfigError("direction angles must be finite");
    }
    if (!(elevation > -pi / 2 && elevation < pi / 2)) {
        throw ConfigError("elevation must lie in (-90, 90) degrees, got " +
                          std::to_string(rad_to_deg(elevation)));
    }
    // wrap into [-pi/2, 3pi/2)
    double az = std::fmod(azimuth + pi / 2, 2 * pi);
    if (az < 0) az += 2 * pi;
    az -= pi / 2;

    constexpr double grazing_tol = 1e-12;
    if (std::abs(az + pi / 2) < grazing_tol || std::abs(az - pi / 2) < grazing_tol ||
        std::abs(az - 3 * pi / 2) < grazing_tol) {
        throw ConfigError("azimuth +-90 degrees lies on the surface plane and belongs to neither half-space");
    }
    const HalfSpace half = az < pi / 2 ? HalfSpace::reflective : HalfSpace::transmissive;
    return Direction(az, elevation, half);
}

Direction Direction::from_degrees(double azimuth_deg, double elevation_deg) {
    return from_radians(deg_to_rad(azimuth_deg), deg_to_rad(elevation_deg));
}

Eigen::Vector3d Direction::unit_vector() const {
    const double ce = std::cos(elevation_);
    return {ce * std::cos(azimuth_), ce * std::sin(azimuth_), std::sin(elevation_)};
}

Direction Direction::mirrored() const { return from_radians(pi - azimuth_, elevation_); }

ArrayGeometry::ArrayGeometry(int n_y, int n_z, double spacing_y, double spacing_z,
                             std::vector<Eigen::Vector3d> positions)
    : n_y_(n_y), n_z_(n_z), spacing_y_(spacing_y), spacing_z_(spacing_z),
      positions_(std::move(positions)) {
    if (static_cast<long>(positions_.size()) != static_cast<long>(n_y_) * n_z_) {
        throw ConfigError("array position count does not match n_y * n_z");
    }
}

ArrayGeometry ura_positions(int n_y, int n_z, double spacing_y, double spacing_z) {
    if (n_y < 1 || n_z < 1) {
        throw ConfigError("array element counts must be >= 1");
    }
    if (!(spacing_y > 0) || !(spacing_z > 0)) {
        throw ConfigError("array spacings must be > 0");
    }
    const double cy = 0.5 * (n_y - 1);
    const double cz = 0.5 * (n_z - 1);
    std::vector<Eigen::Vector3d> positions;
    positions.reserve(static_cast<std::size_t>(n_y) * n_z);
    for (int iy = 0; iy < n_y; ++iy) {
        for (int iz = 0; iz < n_z; ++iz) {
            positions.emplace_back(0.0, (iy - cy) * spacing_y, (iz - cz) * spacing_z);
        }
    }
    return ArrayGeometry(n_y, n_z, spacing_y, spacing_z, std::move(positions));
}

SteeringVector steering_vector(const ArrayGeometry& geometry, const Direction& direction,
                               double wavelength) {
    if (!(wavelength > 0)) {
        throw ConfigError("wavelength must be > 0");
    }
    const Eigen::Vector3d k = direction.unit_vector();
    const double wavenumber = 2 * pi / wavelength;
    cvec entries(geometry.size());
    const auto& pos = geometry.positions();
    for (Eigen::Index n = 0; n < entries.size(); ++n) {
        entries[n] = std::polar(1.0, wavenumber * pos[static_cast<std::size_t>(n)].dot(k));
    }
    return {std::move(entries), direction, wavelength};
}

}  // namespace starris
