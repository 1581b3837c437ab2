#pragma once

#include "l2sk/types.hpp"

namespace l2sk {

/// Physical constants of the Earth-Moon elliptic restricted three-body
/// problem in distance/time normalized units (mean separation = 1, mean
/// motion = 1).
struct PhysicalConstants {
    double mu = 0.0121505856;       ///< mass ratio m2/(m1+m2)
    double ecc = 0.0549;            ///< primaries' orbit eccentricity
    double srp_accel = 4.5e-6;      ///< solar radiation pressure acceleration
    double zeta = 0.9252;           ///< sun-line angular rate
    double phi = 0.0;               ///< eccentricity phase angle
    double time_unit_seconds = 375190.0;
    /// x-anchor of the eccentricity pulsation coupling. The pulsation terms
    /// act on the displacement from the working libration point rather than
    /// on the barycentric radius; the default matches L2 for the default mu
    /// and is refreshed from the root-found value by the scenario harness.
    double pulsation_anchor_x = 1.1556821877;

    void validate() const {
        if (!(mu > 0.0 && mu < 0.5)) throw ConfigError("mu must be in (0, 0.5)");
        if (ecc < 0.0) throw ConfigError("ecc must be >= 0");
        if (srp_accel < 0.0) throw ConfigError("srp_accel must be >= 0");
        if (!(zeta > 0.0)) throw ConfigError("zeta must be > 0");
        if (!(time_unit_seconds > 0.0)) throw ConfigError("time_unit_seconds must be > 0");
    }

    double hours_to_nd(double hours) const { return hours * 3600.0 / time_unit_seconds; }
    double nd_to_hours(double t) const { return t * time_unit_seconds / 3600.0; }
};

inline constexpr double kEarthMoonKm = 384400.0;

// Any state closer than this to a primary is treated as a diverged
// simulation rather than a meaningful configuration.
inline constexpr double kPrimaryGuardRadius = 1e-6;

} // namespace l2sk
