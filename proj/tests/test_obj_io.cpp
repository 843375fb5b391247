#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "forma/mesh.hpp"
#include "forma/obj_io.hpp"

using namespace forma;

TEST(Obj, RoundTripPreservesCountsAndAnchors) {
  const auto m = generate_cap_mesh(1.0, 4);
  std::stringstream s;
  write_obj(m, s);
  const auto back = read_obj(s);
  EXPECT_EQ(back.vertex_count(), m.vertex_count());
  EXPECT_EQ(back.triangle_count(), m.triangle_count());
  EXPECT_EQ(MeshTopology(back).edges.size(), MeshTopology(m).edges.size());
  EXPECT_EQ(back.anchored(), m.anchored());
  EXPECT_EQ(back.triangles(), m.triangles());
}

TEST(Obj, CoordinatesRoundTripExactly) {
  const auto m = generate_cap_mesh(5.2, 4);
  const auto path = std::filesystem::temp_directory_path() / "forma_obj_roundtrip.obj";
  write_obj(m, path);
  const auto back = read_obj(path);
  double worst = 0.0;
  for (std::size_t i = 0; i < m.vertex_count(); ++i) worst = std::max(worst, (back.vertex(i) - m.vertex(i)).norm());
  EXPECT_LT(worst, 1e-9);
  EXPECT_EQ(worst, 0.0);  // shortest round-trip formatting
  std::filesystem::remove(path);
}

TEST(Obj, NonTriangleFaceNamesLine) {
  std::istringstream in("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
  try {
    read_obj(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
    EXPECT_NE(std::string(e.what()).find("line 5"), std::string::npos) << e.what();
  }
}

TEST(Obj, AcceptsSlashedIndicesAndIgnoresExtras) {
  std::istringstream in(
      "# comment\no thing\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nvt 0 0\ns off\nf 1/1/1 2/2/1 3//1\n");
  const auto m = read_obj(in);
  EXPECT_EQ(m.vertex_count(), 3u);
  EXPECT_EQ(m.triangle_count(), 1u);
  EXPECT_EQ(m.anchored_count(), 0u);
}

TEST(Obj, Errors) {
  {
    std::istringstream in("v 0 0 0\nv 1 0\n");
    EXPECT_THROW(read_obj(in), ParseError);
  }
  {
    std::istringstream in("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 7\n");
    EXPECT_THROW(read_obj(in), ParseError);
  }
  {
    std::istringstream in("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\nbogus 1\n");
    EXPECT_THROW(read_obj(in), ParseError);
  }
  {
    std::istringstream in("v 0 0 zz\n");
    EXPECT_THROW(read_obj(in), ParseError);
  }
  EXPECT_THROW(read_obj(std::filesystem::path("/nonexistent/x.obj")), Error);
}
