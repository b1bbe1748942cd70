#include <doctest.h>

#include <wrcontrol/timegrid.hpp>

using namespace wrc;

TEST_CASE("one-sided graded nodes, alpha = 0.5, n = 3") {
  // grading exponent (2 - 0.5)/0.5 = 3, so t_j = (j/4)^3
  const auto m = build_mesh(MeshKind::one_sided_graded, 0.5, 1.0, 3);
  const double expect[] = {0.0, 0.015625, 0.125, 0.421875, 1.0};
  REQUIRE(m.nodes.size() == 5);
  for (int j = 0; j < 5; ++j) CHECK(m.nodes[j] == doctest::Approx(expect[j]).epsilon(1e-15));
}

TEST_CASE("both-sided graded nodes, alpha = 0.5, n = 3") {
  const auto m = build_mesh(MeshKind::both_sided_graded, 0.5, 1.0, 3);
  const double expect[] = {0.0, 0.0625, 0.5, 0.9375, 1.0};
  REQUIRE(m.nodes.size() == 5);
  for (int j = 0; j < 5; ++j) CHECK(m.nodes[j] == doctest::Approx(expect[j]).epsilon(1e-15));
}

TEST_CASE("both-sided grading requires an odd interior count") {
  CHECK_THROWS_AS(build_mesh(MeshKind::both_sided_graded, 0.5, 1.0, 4), std::invalid_argument);
  CHECK_NOTHROW(build_mesh(MeshKind::both_sided_graded, 0.5, 1.0, 5));
}

TEST_CASE("alpha = 1 degrades every kind to the uniform mesh") {
  for (MeshKind k :
       {MeshKind::uniform, MeshKind::one_sided_graded, MeshKind::both_sided_graded}) {
    const auto m = build_mesh(k, 1.0, 2.5, 9);
    for (int j = 0; j <= 10; ++j)
      CHECK(m.nodes[j] == doctest::Approx(2.5 * j / 10.0).epsilon(1e-14));
  }
}

TEST_CASE("mesh invariants over kinds, alpha, horizon") {
  for (MeshKind k :
       {MeshKind::uniform, MeshKind::one_sided_graded, MeshKind::both_sided_graded})
    for (double alpha : {0.3, 0.5, 0.8, 1.0})
      for (double T : {1.0, 2.5}) {
        const auto m = build_mesh(k, alpha, T, 19);
        CHECK(m.nodes[0] == 0.0);
        CHECK(m.nodes[20] == T);
        for (int j = 0; j < 20; ++j) CHECK(m.nodes[j + 1] > m.nodes[j]);
        CHECK(m.intervals() == 20);
        if (k == MeshKind::both_sided_graded)  // mirror symmetry about T/2
          for (int j = 0; j <= 20; ++j)
            CHECK(std::abs(m.nodes[j] + m.nodes[20 - j] - T) <= 1e-13 * T);
      }
}

TEST_CASE("one-sided grading clusters at t = 0 only") {
  const auto m = build_mesh(MeshKind::one_sided_graded, 0.4, 1.0, 9);
  CHECK(m.nodes[1] - m.nodes[0] < (m.nodes[10] - m.nodes[9]) / 100);
}

TEST_CASE("reflect_mesh reverses spacings and is an involution") {
  const auto m = build_mesh(MeshKind::one_sided_graded, 0.5, 2.0, 7);
  const auto r = reflect_mesh(m);
  CHECK(r.nodes[0] == 0.0);
  CHECK(r.nodes[8] == 2.0);
  for (int j = 0; j < 8; ++j)
    CHECK(r.nodes[j + 1] - r.nodes[j] ==
          doctest::Approx(m.nodes[8 - j] - m.nodes[7 - j]).epsilon(1e-14));
  const auto rr = reflect_mesh(r);
  for (int j = 0; j <= 8; ++j) CHECK(rr.nodes[j] == doctest::Approx(m.nodes[j]).epsilon(1e-14));
}

TEST_CASE("build_mesh rejects bad parameters") {
  CHECK_THROWS_AS(build_mesh(MeshKind::uniform, 0.0, 1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(build_mesh(MeshKind::uniform, 1.1, 1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(build_mesh(MeshKind::uniform, 0.5, -1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(build_mesh(MeshKind::uniform, 0.5, 1.0, 0), std::invalid_argument);
}

TEST_CASE("mesh kind names round-trip") {
  for (MeshKind k :
       {MeshKind::uniform, MeshKind::one_sided_graded, MeshKind::both_sided_graded})
    CHECK(mesh_kind_from(mesh_kind_name(k)) == k);
  CHECK(mesh_kind_from("one_sided") == MeshKind::one_sided_graded);
  CHECK(mesh_kind_from("both_sided") == MeshKind::both_sided_graded);
  CHECK_THROWS_AS(mesh_kind_from("chebyshev"), std::invalid_argument);
}
