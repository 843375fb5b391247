#pragma once

#include <cmath>
#include <string>

#include "forma/error.hpp"

namespace forma {

struct MaterialSpec {
  std::string name;
  double youngs_modulus = 0.0;    // Pa
  double poisson_ratio = 0.0;
  double density = 0.0;           // kg/m^3
  double thickness = 0.0;         // m
  double tensile_strength = 0.0;  // Pa
  double allowable_stress = 0.0;  // Pa

  void validate() const {
    auto fail = [&](const std::string& what) {
      throw PreconditionError("material '" + name + "': " + what);
    };
    if (!(youngs_modulus > 0.0) || !std::isfinite(youngs_modulus)) fail("Young's modulus must be > 0");
    if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5)) fail("Poisson ratio must be in [0, 0.5)");
    if (!(density >= 0.0) || !std::isfinite(density)) fail("density must be >= 0");
    if (!(thickness > 0.0) || !std::isfinite(thickness)) fail("thickness must be > 0");
    if (!(allowable_stress > 0.0)) fail("allowable stress must be > 0");
    if (allowable_stress > tensile_strength) fail("allowable stress exceeds strength");
  }

  MaterialSpec with_thickness(double t) const {
    MaterialSpec m = *this;
    m.thickness = t;
    return m;
  }
};

// Placeholder properties; none of these come from measured data.
// Kevlar fabric: allowable is half the tensile strength.
inline MaterialSpec default_kevlar() {
  return {"kevlar", 70e9, 0.3, 1440.0, 0.005, 3e9, 1.5e9};
}

// Sintered regolith: strength field holds the compressive allowable.
inline MaterialSpec default_regolith() {
  return {"sintered_regolith", 2e9, 0.25, 1500.0, 0.3, 2e6, 2e6};
}

inline constexpr double kLunarGravity = 1.62;  // m/s^2

} // namespace forma
