#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>

#include "mls/point_cloud.hpp"

namespace mls {

/// Strict mode requires the exact 10-property vertex schema in canonical
/// order. Lenient mode accepts the 10 properties in any order, with extra
/// scalar properties skipped (list properties are rejected in both modes).
enum class PlyMode { kStrict, kLenient };

/// Decode a binary little-endian PLY stream.
/// Throws PlyError (with byte offset) on malformed header, schema mismatch,
/// or truncated payload.
PointCloud read_ply(std::istream& in, PlyMode mode = PlyMode::kStrict);
PointCloud read_ply_file(const std::string& path, PlyMode mode = PlyMode::kStrict);

/// Encode the canonical header and packed binary records. Returns the number
/// of bytes written. read_ply inverts it exactly, including the (x, y) offset
/// stored as a header comment.
std::size_t write_ply(const PointCloud& cloud, std::ostream& out);
std::size_t write_ply_file(const PointCloud& cloud, const std::string& path);

}  // namespace mls
