#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mls/binary_io.hpp"
#include "mls/errors.hpp"
#include "mls/ply_io.hpp"
#include "test_util.hpp"

using namespace mls;

namespace {

std::string cloud_bytes(const PointCloud& cloud) {
  std::ostringstream out(std::ios::binary);
  write_ply(cloud, out);
  return out.str();
}

PointCloud from_bytes(const std::string& bytes, PlyMode mode = PlyMode::kStrict) {
  std::istringstream in(bytes, std::ios::binary);
  return read_ply(in, mode);
}

// independent record packer for header-manipulation tests
void append_f32(std::string& s, float v) {
  char b[4];
  std::memcpy(b, &v, 4);
  s.append(b, 4);
}
void append_f64(std::string& s, double v) {
  char b[8];
  std::memcpy(b, &v, 8);
  s.append(b, 8);
}
void append_u32(std::string& s, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  s.append(b, 4);
}

}  // namespace

TEST_CASE("round trip is value exact on randomized clouds") {
  Rng rng(11);
  for (int it = 0; it < 200; ++it) {
    std::size_t n = rng.uniform_index(40);
    if (it == 0) n = 0;
    if (it == 1) n = 1;
    const PointCloud cloud = testutil::random_cloud(rng, n);
    const PointCloud back = from_bytes(cloud_bytes(cloud));
    CHECK(testutil::same_cloud(cloud, back));
  }
}

TEST_CASE("writer emits the canonical header and 41-byte records") {
  PointCloud cloud;
  cloud.offset = {1.5, -2.25};
  LabeledPoint p{};
  p.x = 1.0f;
  p.y = 2.0f;
  p.z = 3.0f;
  p.x_origin = 4.0f;
  p.y_origin = 5.0f;
  p.z_origin = 6.0f;
  p.gps_time = 7.5;
  p.reflectance = 200;
  p.label = 9;
  p.class_id = 10;
  cloud.points = {p, p};

  const std::string expected_header =
      "ply\n"
      "format binary_little_endian 1.0\n"
      "comment offset 1.5 -2.25\n"
      "element vertex 2\n"
      "property float x\n"
      "property float y\n"
      "property float z\n"
      "property float x_origin\n"
      "property float y_origin\n"
      "property float z_origin\n"
      "property double GPS_time\n"
      "property uchar reflectance\n"
      "property uint label\n"
      "property uint class\n"
      "end_header\n";

  std::string payload;
  for (int i = 0; i < 2; ++i) {
    append_f32(payload, 1.0f);
    append_f32(payload, 2.0f);
    append_f32(payload, 3.0f);
    append_f32(payload, 4.0f);
    append_f32(payload, 5.0f);
    append_f32(payload, 6.0f);
    append_f64(payload, 7.5);
    payload.push_back(static_cast<char>(200));
    append_u32(payload, 9);
    append_u32(payload, 10);
  }
  CHECK(payload.size() == 82);

  const std::string bytes = cloud_bytes(cloud);
  CHECK(bytes == expected_header + payload);

  std::ostringstream out(std::ios::binary);
  CHECK(write_ply(cloud, out) == bytes.size());
}

TEST_CASE("offset comment survives the round trip") {
  PointCloud cloud;
  cloud.offset = {123456.789, 9876543.21};
  cloud.points.push_back(LabeledPoint{});
  const PointCloud back = from_bytes(cloud_bytes(cloud));
  CHECK(back.offset[0] == cloud.offset[0]);
  CHECK(back.offset[1] == cloud.offset[1]);
}

TEST_CASE("type synonyms are accepted in strict mode") {
  const std::string header =
      "ply\n"
      "format binary_little_endian 1.0\n"
      "element vertex 0\n"
      "property float32 x\n"
      "property float32 y\n"
      "property float32 z\n"
      "property float32 x_origin\n"
      "property float32 y_origin\n"
      "property float32 z_origin\n"
      "property float64 GPS_time\n"
      "property uint8 reflectance\n"
      "property uint32 label\n"
      "property uint32 class\n"
      "end_header\n";
  const PointCloud cloud = from_bytes(header);
  CHECK(cloud.empty());
}

TEST_CASE("lenient mode accepts reordering, strict rejects it") {
  std::string header =
      "ply\n"
      "format binary_little_endian 1.0\n"
      "element vertex 1\n"
      "property uint label\n"
      "property float x\n"
      "property float y\n"
      "property float z\n"
      "property float x_origin\n"
      "property float y_origin\n"
      "property float z_origin\n"
      "property double GPS_time\n"
      "property uchar reflectance\n"
      "property uint class\n"
      "end_header\n";
  std::string payload;
  append_u32(payload, 77);  // label first
  append_f32(payload, 1.0f);
  append_f32(payload, 2.0f);
  append_f32(payload, 3.0f);
  append_f32(payload, 0.0f);
  append_f32(payload, 0.0f);
  append_f32(payload, 2.7f);
  append_f64(payload, 0.25);
  payload.push_back(static_cast<char>(5));
  append_u32(payload, 42);  // class

  CHECK_THROWS_AS(from_bytes(header + payload, PlyMode::kStrict), PlyError);
  const PointCloud cloud = from_bytes(header + payload, PlyMode::kLenient);
  REQUIRE(cloud.size() == 1);
  CHECK(cloud.points[0].label == 77);
  CHECK(cloud.points[0].x == 1.0f);
  CHECK(cloud.points[0].class_id == 42);
  CHECK(cloud.points[0].reflectance == 5);
}

TEST_CASE("lenient mode skips extra scalar properties") {
  std::string header =
      "ply\n"
      "format binary_little_endian 1.0\n"
      "element vertex 1\n"
      "property float x\n"
      "property float y\n"
      "property float z\n"
      "property short extra\n"
      "property float x_origin\n"
      "property float y_origin\n"
      "property float z_origin\n"
      "property double GPS_time\n"
      "property uchar reflectance\n"
      "property uint label\n"
      "property uint class\n"
      "end_header\n";
  std::string payload;
  append_f32(payload, 1.0f);
  append_f32(payload, 2.0f);
  append_f32(payload, 3.0f);
  payload.push_back(char(0xAB));
  payload.push_back(char(0xCD));  // the extra short
  append_f32(payload, 4.0f);
  append_f32(payload, 5.0f);
  append_f32(payload, 6.0f);
  append_f64(payload, 7.0);
  payload.push_back(static_cast<char>(9));
  append_u32(payload, 1);
  append_u32(payload, 2);

  CHECK_THROWS_AS(from_bytes(header + payload, PlyMode::kStrict), PlyError);
  const PointCloud cloud = from_bytes(header + payload, PlyMode::kLenient);
  REQUIRE(cloud.size() == 1);
  CHECK(cloud.points[0].x_origin == 4.0f);
  CHECK(cloud.points[0].gps_time == 7.0);
}

TEST_CASE("list properties are rejected in both modes") {
  const std::string header =
      "ply\n"
      "format binary_little_endian 1.0\n"
      "element vertex 0\n"
      "property list uchar int vertex_indices\n"
      "end_header\n";
  CHECK_THROWS_AS(from_bytes(header, PlyMode::kStrict), PlyError);
  CHECK_THROWS_AS(from_bytes(header, PlyMode::kLenient), PlyError);
}

TEST_CASE("header errors carry byte offsets") {
  CHECK_THROWS_AS(from_bytes("plz\nrest\n"), PlyError);
  CHECK_THROWS_AS(from_bytes("ply\nformat ascii 1.0\nend_header\n"), PlyError);
  CHECK_THROWS_AS(from_bytes("ply\nformat binary_little_endian 1.0\n"), PlyError);

  try {
    from_bytes("ply\nformat binary_big_endian 1.0\nend_header\n");
    FAIL("expected PlyError");
  } catch (const PlyError& e) {
    CHECK(e.offset() == 4);  // the format line starts at byte 4
    CHECK(std::string(e.what()).find("byte offset 4") != std::string::npos);
  }
}

TEST_CASE("missing and duplicate properties are rejected") {
  const std::string missing =
      "ply\nformat binary_little_endian 1.0\nelement vertex 0\n"
      "property float x\nproperty float y\nproperty float z\n"
      "end_header\n";
  CHECK_THROWS_AS(from_bytes(missing, PlyMode::kLenient), PlyError);

  const std::string duplicate =
      "ply\nformat binary_little_endian 1.0\nelement vertex 0\n"
      "property float x\nproperty float x\n"
      "end_header\n";
  CHECK_THROWS_AS(from_bytes(duplicate, PlyMode::kLenient), PlyError);
}

TEST_CASE("truncated payload reports the exact failure offset") {
  PointCloud cloud;
  cloud.points.assign(3, LabeledPoint{});
  std::string bytes = cloud_bytes(cloud);
  const std::size_t header_size = bytes.size() - 3 * 41;
  bytes.resize(bytes.size() - 50);  // cuts into the second record

  try {
    from_bytes(bytes);
    FAIL("expected PlyError");
  } catch (const PlyError& e) {
    CHECK(e.offset() == header_size + 1 * 41 + 32);
    CHECK(std::string(e.what()).find("truncated") != std::string::npos);
  }
}

TEST_CASE("invalid vertex count is rejected") {
  const std::string header =
      "ply\nformat binary_little_endian 1.0\nelement vertex -4\nend_header\n";
  CHECK_THROWS_AS(from_bytes(header), PlyError);
}

TEST_CASE("file round trip") {
  testutil::TempDir dir("urbanmls-ply");
  Rng rng(3);
  const PointCloud cloud = testutil::random_cloud(rng, 25);
  write_ply_file(cloud, dir.file("c.ply"));
  CHECK(testutil::same_cloud(cloud, read_ply_file(dir.file("c.ply"))));
  CHECK_THROWS_AS(read_ply_file(dir.file("absent.ply")), Error);
}
