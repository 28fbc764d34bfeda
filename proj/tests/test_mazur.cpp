#include <gtest/gtest.h>

#include <cmath>

#include "recembed/error.hpp"
#include "recembed/mazur.hpp"
#include "recembed/point_set.hpp"
#include "recembed/random.hpp"

using namespace recembed;

TEST(Mazur, FrozenImages) {
  MazurSpec spec(4, 2, 1, {0, 0});
  auto a = mazur_apply(spec, std::vector<double>{1, 0});
  EXPECT_DOUBLE_EQ(a[0], 0.5);
  EXPECT_EQ(a[1], 0.0);
  auto b = mazur_apply(spec, std::vector<double>{-1, 0});
  EXPECT_DOUBLE_EQ(b[0], -0.5);
  auto z = mazur_apply(MazurSpec(4, 2, 3, {1, 2}), std::vector<double>{1, 2});
  EXPECT_EQ(z[0], 0.0);
  EXPECT_EQ(z[1], 0.0);
}

TEST(Mazur, FrozenBounds) {
  MazurSpec spec(4, 2, 1, {0, 0});
  const MazurBounds b = mazur_bounds(spec, std::vector<double>{1, 0}, std::vector<double>{0, 1});
  EXPECT_NEAR(b.lower, 0.353553391, 1e-9);
  EXPECT_NEAR(b.actual, 0.707106781, 1e-9);
  EXPECT_NEAR(b.upper, 1.189207115, 1e-9);
  const MazurBounds same = mazur_bounds(spec, std::vector<double>{0.3, 0}, std::vector<double>{0.3, 0});
  EXPECT_EQ(same.lower, 0.0);
  EXPECT_EQ(same.actual, 0.0);
  EXPECT_EQ(same.upper, 0.0);
}

TEST(Mazur, RadiusAndDomainErrors) {
  EXPECT_THROW(MazurSpec(2, 2, 1, {0}), DomainError);
  EXPECT_THROW(MazurSpec(2, 4, 1, {0}), DomainError);
  EXPECT_THROW(MazurSpec(4, 2, 0, {0}), DomainError);
  MazurSpec spec(4, 2, 1, {0, 0});
  EXPECT_THROW(mazur_apply(spec, std::vector<double>{1.1, 0}), DomainError);
  EXPECT_NO_THROW(mazur_apply(spec, std::vector<double>{1.0 + 1e-14, 0}));
  try {
    mazur_apply(spec, std::vector<double>{2, 0});
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
}

TEST(Mazur, OddSymmetryAboutCenter) {
  MazurSpec spec(3, 2, 2, {0.5, -0.25, 1});
  std::vector<double> x{1.0, 0.25, 0.5}, mirror(3);
  for (int i = 0; i < 3; ++i) mirror[i] = 2 * spec.z()[i] - x[i];
  auto a = mazur_apply(spec, x);
  auto b = mazur_apply(spec, mirror);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[i], -b[i], 1e-15);
}

TEST(Mazur, SandwichRandomPairs) {
  Rng rng = make_rng(RandomSeed{77});
  MazurSpec spec(4, 2, 1, {0, 0, 0});
  const NormExponent p(4);
  auto sample = [&] {
    std::vector<double> x(3);
    while (true) {
      for (double& v : x) v = uniform(rng, -1, 1);
      if (lp_norm(x, p) <= 1) return x;
    }
  };
  for (int t = 0; t < 20000; ++t) {
    const MazurBounds b = mazur_bounds(spec, sample(), sample());
    ASSERT_TRUE(sandwich_holds(b));
  }
}

TEST(Mazur, JsonRoundTrip) {
  MazurSpec spec(4, 3, 2.5, {1, -2});
  EXPECT_EQ(MazurSpec::from_json(spec.to_json()), spec);
  const auto j = spec.to_json();
  EXPECT_TRUE(j.contains("c0"));
  EXPECT_EQ(j["z"].size(), 2u);
}
