#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "forma/fea.hpp"
#include "forma/material.hpp"
#include "forma/mesh.hpp"

using namespace forma;
constexpr double pi = std::numbers::pi;

namespace {

// n x n grid of squares on [0, L]^2 in z = 0, each split into two triangles.
TriMesh flat_patch(int n, double len) {
  std::vector<Point3> pts;
  std::vector<Triangle> tris;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) pts.emplace_back(len * i / n, len * j / n, 0.0);
  }
  auto id = [n](int i, int j) { return static_cast<std::uint32_t>(j * (n + 1) + i); };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      // alternate the diagonal so the patch is irregular
      if ((i + j) % 2 == 0) {
        tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
        tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
      } else {
        tris.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
        tris.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
      }
    }
  }
  // nudge interior vertices so elements are not all alike
  for (int j = 1; j < n; ++j) {
    for (int i = 1; i < n; ++i) {
      pts[id(i, j)] += Point3(0.11 * len / n * std::sin(3.0 * i + j), 0.13 * len / n * std::cos(i + 2.0 * j), 0.0);
    }
  }
  return TriMesh(std::move(pts), std::move(tris));
}

double max_rel_diff(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double scale = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, b[i].norm());
    diff = std::max(diff, (a[i] - b[i]).norm());
  }
  return diff / scale;
}

} // namespace

TEST(VonMises, Identities) {
  EXPECT_DOUBLE_EQ(von_mises(7.0, 0.0, 0.0), 7.0);
  EXPECT_DOUBLE_EQ(von_mises(7.0, 7.0, 0.0), 7.0);
  EXPECT_NEAR(von_mises(0.0, 0.0, 2.0), std::sqrt(3.0) * 2.0, 1e-15);
  AnalysisResult r;
  r.element_stress = {{Vec3::UnitX(), Vec3::UnitY(), 3.0, 0.0, 0.0}};
  EXPECT_EQ(von_mises_field(r), std::vector<double>{3.0});
}

TEST(Stiffness, Symmetric) {
  const auto k = assemble_stiffness(generate_cap_mesh(5.2, 4), default_kevlar());
  const Eigen::SparseMatrix<double> kt = k.transpose();
  const Eigen::SparseMatrix<double> d = k - kt;
  double dmax = 0.0, kmax = 0.0;
  for (int c = 0; c < d.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(d, c); it; ++it) dmax = std::max(dmax, std::abs(it.value()));
  }
  for (int c = 0; c < k.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(k, c); it; ++it) kmax = std::max(kmax, std::abs(it.value()));
  }
  EXPECT_LE(dmax, 1e-9 * kmax);
}

TEST(Fea, NoLoadsNoResponse) {
  const auto cap = generate_cap_mesh(5.2, 3);
  const auto r = assemble_and_solve(cap, default_kevlar(), {}, anchored_vertices(cap));
  EXPECT_EQ(r.max_displacement, 0.0);
  EXPECT_EQ(r.max_von_mises, 0.0);
}

TEST(Fea, PressurisedHemisphereMatchesThinWall) {
  const double R = 5.2, p = 101325.0;
  const auto mat = default_kevlar();
  const auto cap = generate_cap_mesh(R, 5);
  const std::vector<LoadCase> loads{InternalPressure{p}};
  const auto r = assemble_and_solve(cap, mat, loads, anchored_vertices(cap));
  const double expected = p * R / (2 * mat.thickness);
  EXPECT_NEAR(expected, 52.7e6, 0.05e6);
  std::size_t checked = 0;
  for (std::size_t t = 0; t < cap.triangle_count(); ++t) {
    const auto& tri = cap.triangles()[t];
    const Point3 c = (cap.vertex(tri[0]) + cap.vertex(tri[1]) + cap.vertex(tri[2])) / 3.0;
    if (c.z() / c.norm() < std::cos(pi / 3)) continue;  // within 30 deg of the ring
    EXPECT_NEAR(r.von_mises[t], expected, 0.05 * expected) << "element " << t;
    ++checked;
  }
  EXPECT_GT(checked, 100u);
  EXPECT_LT((r.reaction_sum + r.applied_load_sum).norm(), 1e-6 * r.applied_load_sum.norm());
  EXPECT_NEAR(r.applied_load_sum.z(), p * pi * R * R, 0.01 * p * pi * R * R);
}

TEST(Fea, DomeSelfWeightMatchesMembraneTheory) {
  const double R = 5.2;
  const auto mat = default_regolith();
  const double g = 1.62;
  const auto cap = generate_cap_mesh(R, 5);
  const std::vector<LoadCase> loads{GravitySelfWeight{g, -Vec3::UnitZ()}};
  const auto r = assemble_and_solve(cap, mat, loads, anchored_vertices(cap));
  EXPECT_LT((r.reaction_sum + r.applied_load_sum).norm(), 1e-6 * r.applied_load_sum.norm());

  for (double deg : {0.0, 30.0, 60.0}) {
    const double phi = deg * pi / 180.0;
    const double band = (deg == 0.0 ? 4.0 : 2.0) * pi / 180.0;
    double sum = 0.0;
    int n = 0;
    for (std::size_t t = 0; t < cap.triangle_count(); ++t) {
      const auto& tri = cap.triangles()[t];
      const Point3 c = (cap.vertex(tri[0]) + cap.vertex(tri[1]) + cap.vertex(tri[2])) / 3.0;
      const double angle = std::acos(std::clamp(c.z() / c.norm(), -1.0, 1.0));
      if (std::abs(angle - phi) > band) continue;
      const double rho = std::hypot(c.x(), c.y());
      const Vec3 er = rho > 0 ? Vec3(c.x() / rho, c.y() / rho, 0.0) : Vec3::UnitX();
      const double a = std::acos(std::clamp(c.z() / c.norm(), -1.0, 1.0));
      const Vec3 meridian = std::cos(a) * er - std::sin(a) * Vec3::UnitZ();
      sum += r.element_stress[t].normal_along(meridian) * mat.thickness;
      ++n;
    }
    ASSERT_GT(n, 0);
    const double expected = -mat.density * g * mat.thickness * R / (1.0 + std::cos(phi));
    EXPECT_NEAR(sum / n, expected, 0.1 * std::abs(expected)) << "phi=" << deg;
  }
}

TEST(Fea, LoadLinearity) {
  const auto cap = generate_cap_mesh(5.2, 4);
  const auto fixed = anchored_vertices(cap);
  const std::vector<LoadCase> base{InternalPressure{101325.0}};
  const auto r1 = assemble_and_solve(cap, default_kevlar(), base, fixed);
  for (double alpha : {2.0, 10.0}) {
    const std::vector<LoadCase> scaled{InternalPressure{alpha * 101325.0}};
    const auto ra = assemble_and_solve(cap, default_kevlar(), scaled, fixed);
    std::vector<Vec3> expect = r1.displacements;
    for (auto& u : expect) u *= alpha;
    EXPECT_LE(max_rel_diff(ra.displacements, expect), 1e-9) << alpha;
  }
}

TEST(Fea, Superposition) {
  const auto cap = generate_cap_mesh(5.2, 4);
  const auto fixed = anchored_vertices(cap);
  const auto mat = default_kevlar();
  SolverOptions tight;
  tight.tolerance = 1e-13;
  const std::vector<LoadCase> p{InternalPressure{101325.0}};
  const std::vector<LoadCase> g{GravitySelfWeight{}};
  const std::vector<LoadCase> both{InternalPressure{101325.0}, GravitySelfWeight{}};
  const auto rp = assemble_and_solve(cap, mat, p, fixed, tight);
  const auto rg = assemble_and_solve(cap, mat, g, fixed, tight);
  const auto rb = assemble_and_solve(cap, mat, both, fixed, tight);
  std::vector<Vec3> sum(rp.displacements.size());
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = rp.displacements[i] + rg.displacements[i];
  EXPECT_LE(max_rel_diff(rb.displacements, sum), 1e-9);
}

TEST(Fea, PatchTestUniformTraction) {
  const double len = 2.0, sigma = 5e6;
  const int n = 6;
  const auto mesh = flat_patch(n, len);
  const auto mat = default_kevlar();
  // Traction sigma on the x = len edge as consistent nodal forces.
  Eigen::VectorXd f = Eigen::VectorXd::Zero(3 * mesh.vertex_count());
  std::vector<DofConstraint> cons;
  for (std::uint32_t v = 0; v < mesh.vertex_count(); ++v) {
    const auto& p = mesh.vertex(v);
    cons.push_back({3 * v + 2, 0.0});
    if (p.x() == 0.0) cons.push_back({3 * v, 0.0});
    if (p.x() == 0.0 && p.y() == 0.0) cons.push_back({3 * v + 1, 0.0});
    if (p.x() == len) {
      const bool corner = p.y() == 0.0 || p.y() == len;
      f(3 * v) = sigma * mat.thickness * (len / n) * (corner ? 0.5 : 1.0);
    }
  }
  SolverOptions tight;
  tight.tolerance = 1e-14;
  const auto r = solve_membrane(mesh, mat, f, cons, tight);
  for (const auto& s : r.element_stress) {
    EXPECT_NEAR(s.normal_along(Vec3::UnitX()), sigma, 1e-6 * sigma);
    EXPECT_NEAR(s.normal_along(Vec3::UnitY()), 0.0, 1e-6 * sigma);
    EXPECT_NEAR(von_mises(s), sigma, 1e-6 * sigma);
  }
}

TEST(Fea, PatchTestPrescribedLinearField) {
  const double len = 1.0;
  const auto mesh = flat_patch(5, len);
  const auto mat = default_kevlar();
  const double a = 1e-4, b = 3e-5, c = -2e-5, d = -6e-5;  // u = a x + b y, v = c x + d y
  std::vector<DofConstraint> cons;
  for (std::uint32_t v = 0; v < mesh.vertex_count(); ++v) {
    const auto& p = mesh.vertex(v);
    cons.push_back({3 * v + 2, 0.0});
    if (p.x() == 0.0 || p.y() == 0.0 || p.x() == len || p.y() == len) {
      cons.push_back({3 * v, a * p.x() + b * p.y()});
      cons.push_back({3 * v + 1, c * p.x() + d * p.y()});
    }
  }
  SolverOptions tight;
  tight.tolerance = 1e-14;
  const Eigen::VectorXd f = Eigen::VectorXd::Zero(3 * mesh.vertex_count());
  const auto r = solve_membrane(mesh, mat, f, cons, tight);
  const double E = mat.youngs_modulus, nu = mat.poisson_ratio;
  const double k = E / (1 - nu * nu);
  const double sxx = k * (a + nu * d), syy = k * (d + nu * a), sxy = E / (2 * (1 + nu)) * (b + c);
  const double vm = von_mises(sxx, syy, sxy);
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    const auto& p = mesh.vertex(v);
    EXPECT_NEAR(r.displacements[v].x(), a * p.x() + b * p.y(), 1e-12);
    EXPECT_NEAR(r.displacements[v].y(), c * p.x() + d * p.y(), 1e-12);
  }
  for (const auto& s : r.element_stress) {
    EXPECT_NEAR(s.normal_along(Vec3::UnitX()), sxx, 1e-6 * vm);
    EXPECT_NEAR(s.normal_along(Vec3::UnitY()), syy, 1e-6 * vm);
    EXPECT_NEAR(von_mises(s), vm, 1e-6 * vm);
  }
}

TEST(Fea, RigidBodyDetection) {
  const auto cap = generate_cap_mesh(5.2, 2);
  const std::vector<LoadCase> loads{InternalPressure{1e5}};
  EXPECT_THROW(assemble_and_solve(cap, default_kevlar(), loads, std::vector<std::uint32_t>{}), RigidBodyError);
  const std::vector<std::uint32_t> two{anchored_vertices(cap)[0], anchored_vertices(cap)[1]};
  EXPECT_THROW(assemble_and_solve(cap, default_kevlar(), loads, two), RigidBodyError);
}

TEST(Fea, SolverIterationCapReported) {
  const auto cap = generate_cap_mesh(5.2, 4);
  const std::vector<LoadCase> loads{InternalPressure{1e5}};
  SolverOptions opts;
  opts.max_iterations = 2;
  try {
    assemble_and_solve(cap, default_kevlar(), loads, anchored_vertices(cap), opts);
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_GT(e.residual(), 0.0);
  }
}
