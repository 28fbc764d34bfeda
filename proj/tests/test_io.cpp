#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "recembed/dataset.hpp"
#include "recembed/error.hpp"
#include "recembed/point_io.hpp"

using namespace recembed;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "recembed_io_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(PointIo, RoundTripIsExact) {
  const PointSet s = generate_dataset(DatasetKind::gaussian, 50, 7, NormExponent(3.5), RandomSeed{4}).points;
  const auto path = scratch("round.csv");
  write_point_set(path, s, {{"kind", "gaussian"}});
  const PointSet back = read_point_set(path);
  EXPECT_TRUE(std::ranges::equal(back.data(), s.data()));
  EXPECT_EQ(back.ids(), s.ids());
  EXPECT_EQ(back.norm().value(), 3.5);
  const auto meta = nlohmann::json::parse(read_file(sidecar_path(path)));
  EXPECT_EQ(meta["kind"], "gaussian");
  EXPECT_EQ(meta["n"], 50);
}

TEST(PointIo, InfiniteNormAndCustomIds) {
  PointSet s({1, 2, 3, 4}, 2, NormExponent::infinity(), {10, 20});
  const auto path = scratch("inf.csv");
  write_point_set(path, s);
  const PointSet back = read_point_set(path);
  EXPECT_TRUE(back.norm().is_infinite());
  EXPECT_EQ(back.ids(), (std::vector<PointId>{10, 20}));
}

TEST(PointIo, SidecarMismatch) {
  PointSet s({1, 2, 3, 4}, 2, NormExponent(2));
  const auto path = scratch("mismatch.csv");
  write_point_set(path, s);
  write_file_atomic(path, "1,2\n3,4\n5,6\n");
  EXPECT_THROW(read_point_set(path), DomainError);
  write_file_atomic(path, "1,2,3\n4,5,6\n");
  EXPECT_THROW(read_point_set(path), DomainError);
  write_file_atomic(path, "1,2\n3,x\n");
  EXPECT_THROW(read_point_set(path), DomainError);
  std::filesystem::remove(sidecar_path(path));
  EXPECT_THROW(read_point_set(path), DomainError);
}

TEST(PointIo, Formatting) {
  EXPECT_EQ(format_sig9(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(format_sig9(1189.207115002721), "1189.20712");
  EXPECT_EQ(format_sig9(3), "3");
  EXPECT_EQ(format_exact(0.1), "0.1");
  EXPECT_EQ(std::stod(format_exact(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(PointIo, AtomicWriteReplacesContents) {
  const auto path = scratch("sub/atomic.txt");
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  EXPECT_EQ(read_file(path), "second");
  for (const auto& e : std::filesystem::directory_iterator(path.parent_path())) {
    EXPECT_EQ(e.path().filename(), "atomic.txt");
  }
  EXPECT_THROW(read_file(scratch("missing.txt")), DomainError);
}
