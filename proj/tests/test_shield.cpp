#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "forma/formfind.hpp"
#include "forma/shield.hpp"
#include "forma/sphere_fit.hpp"

using namespace forma;
constexpr double pi = std::numbers::pi;

TEST(Shield, OffsetSurfacesNestOutward) {
  const auto membrane = generate_cap_mesh(5.2, 5);
  const ShieldSpec spec;  // gap 0.15, thickness 0.5
  const auto s = generate_shield(membrane, spec);
  const double rm = fit_sphere_free_vertices(membrane).radius;
  const double ri = fit_sphere_free_vertices(s.inner).radius;
  const double rmid = fit_sphere_free_vertices(s.mid).radius;
  const double ro = fit_sphere_free_vertices(s.outer).radius;
  EXPECT_LT(rm, ri);
  EXPECT_LT(ri, rmid);
  EXPECT_LT(rmid, ro);
  EXPECT_NEAR(ro, 5.85, 0.0585);
  EXPECT_NEAR(ri - rm, 0.15, 0.0015);
  EXPECT_NEAR(ro - ri, 0.5, 0.005);
  EXPECT_GE(s.min_clearance, 0.1425);
  for (const auto* m : {&s.inner, &s.mid, &s.outer}) {
    for (auto v : boundary_vertices(*m)) EXPECT_NEAR(m->vertex(v).z(), 0.0, 1e-12);
  }
}

TEST(Shield, ThinLimit) {
  ShieldSpec spec;
  spec.thickness = 1e-6;
  const auto s = generate_shield(generate_cap_mesh(5.2, 4), spec);
  const double d = fit_sphere_free_vertices(s.outer).radius - fit_sphere_free_vertices(s.inner).radius;
  EXPECT_GT(d, 0.0);
  EXPECT_LE(d, 1.05e-6);
}

TEST(Shield, FormFoundMembrane) {
  const auto ff = form_find(generate_cap_mesh(5.2, 4), FormFindConfig::for_material(default_kevlar(), 101325.0));
  const auto s = generate_shield(ff.mesh, ShieldSpec{});
  EXPECT_NEAR(fit_sphere_free_vertices(s.outer).radius, ff.fitted_sphere.radius + 0.65, 0.01 * 5.85);
}

TEST(Attenuation, Halvings) {
  EXPECT_EQ(attenuation_min_thickness(1.0, 0.7), 0.0);
  EXPECT_DOUBLE_EQ(attenuation_min_thickness(0.5, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(attenuation_min_thickness(0.25, 0.5), 1.0);
  EXPECT_THROW(attenuation_min_thickness(0.0, 0.5), PreconditionError);
  EXPECT_THROW(attenuation_min_thickness(1.5, 0.5), PreconditionError);
}

TEST(SizeThickness, RadiationGovernsWithDefaults) {
  const auto membrane = generate_cap_mesh(5.2, 4);
  const auto sz = size_thickness(membrane, ShieldSpec{}, default_regolith(), DoseConfig{0.5, 0.5});
  EXPECT_DOUBLE_EQ(sz.structural_thickness, 0.05);  // floor of the bounds
  EXPECT_LT(sz.structural_max_von_mises, 2e6);
  EXPECT_DOUBLE_EQ(sz.radiation_thickness, 0.5);
  EXPECT_DOUBLE_EQ(sz.thickness, 0.5);
  EXPECT_EQ(sz.governing, "radiation");
}

TEST(SizeThickness, MonotoneInProtection) {
  const auto membrane = generate_cap_mesh(5.2, 3);
  double prev = 0.0;
  for (double tr : {1.0, 0.8, 0.5, 0.3, 0.1, 0.05}) {
    const auto sz = size_thickness(membrane, ShieldSpec{}, default_regolith(), DoseConfig{tr, 0.5});
    EXPECT_GE(sz.thickness, prev) << tr;
    prev = sz.thickness;
  }
  EXPECT_EQ(size_thickness(membrane, ShieldSpec{}, default_regolith(), DoseConfig{1.0, 0.5}).governing,
            "structural");
}

TEST(SizeThickness, UnreachableAllowableIsSizingError) {
  auto mat = default_regolith();
  mat.allowable_stress = 5e3;
  const auto membrane = generate_cap_mesh(5.2, 3);
  try {
    size_thickness(membrane, ShieldSpec{}, mat, DoseConfig{});
    FAIL();
  } catch (const SizingError& e) {
    EXPECT_NE(std::string(e.what()).find("Pa"), std::string::npos);
  }
}

TEST(SizeThickness, RadiationAboveBoundFails) {
  EXPECT_THROW(size_thickness(generate_cap_mesh(5.2, 3), ShieldSpec{}, default_regolith(), DoseConfig{1e-6, 0.5}),
               SizingError);
}

TEST(Toolpaths, LayersContoursAndMeridians) {
  ShieldSpec spec;
  OffsetOptions opt;
  opt.base_plane = Plane::horizontal(0.0);
  const auto mid = offset_mesh(generate_cap_mesh(5.2, 5), 0.65, opt);
  double apex = 0.0;
  for (const auto& p : mid.vertices()) apex = std::max(apex, p.z());
  EXPECT_NEAR(apex, 5.85, 1e-9);

  const auto paths = toolpaths(mid, spec);
  EXPECT_GE(paths.horizontal.size(), 117u);
  EXPECT_LE(paths.horizontal.size(), 118u);
  for (std::size_t i = 0; i < paths.horizontal.size(); ++i) {
    const auto& l = paths.horizontal[i];
    EXPECT_EQ(l.index, static_cast<int>(i));
    EXPECT_EQ(l.z, l.index * spec.layer_height);
    if (i > 0) {
      EXPECT_GT(l.z, paths.horizontal[i - 1].z);
    }
    for (const auto& c : l.contours) EXPECT_TRUE(c.closed);
  }
  const auto& bottom = paths.horizontal.front();
  EXPECT_EQ(bottom.z, 0.0);
  ASSERT_EQ(bottom.contours.size(), 1u);
  EXPECT_NEAR(bottom.path_length, 2 * pi * 5.85, 0.01 * 2 * pi * 5.85);

  ASSERT_EQ(paths.vertical.size(), 24u);
  for (const auto& m : paths.vertical) {
    EXPECT_FALSE(m.closed);
    EXPECT_NEAR(m.points.front().z(), 0.0, 1e-9);
    EXPECT_NEAR(m.length(), 0.5 * pi * 5.85, 0.01 * 0.5 * pi * 5.85);
  }
}

TEST(Budget, DefaultPodArithmetic) {
  const PodSpec pod;
  ShieldSpec spec;
  const double area = 2 * pi * 5.85 * 5.85;
  const auto b = regolith_budget(pod, area, spec, 1.0);
  EXPECT_NEAR(b.excavated_volume, 113.10, 0.01);
  EXPECT_NEAR(b.drill_rate, 5.65, 0.005);
  EXPECT_NEAR(b.shield_volume, 107.5, 0.1);
  EXPECT_NEAR(b.margin_volume, 39.5, 0.1);
  EXPECT_EQ(b.available_loose_volume, b.excavated_volume * spec.bulking_factor);
  EXPECT_EQ(b.margin_volume, b.available_loose_volume - b.shield_volume);
  EXPECT_EQ(b.shield_mass, b.shield_volume * spec.density);
  EXPECT_EQ(b.print_duration, b.shield_volume / 1.0);
  EXPECT_EQ(b.drill_rate, b.excavated_volume / pod.drill_duration);
  EXPECT_THROW(regolith_budget(pod, area, spec, 0.0), PreconditionError);
}
