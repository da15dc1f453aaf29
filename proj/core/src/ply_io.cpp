#include "mls/ply_io.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "mls/binary_io.hpp"
#include "mls/errors.hpp"

namespace mls {

namespace {

enum class PropType { kF32, kF64, kU8, kU16, kU32, kI8, kI16, kI32 };

std::size_t width_of(PropType t) {
  switch (t) {
    case PropType::kU8:
    case PropType::kI8:
      return 1;
    case PropType::kU16:
    case PropType::kI16:
      return 2;
    case PropType::kF32:
    case PropType::kU32:
    case PropType::kI32:
      return 4;
    case PropType::kF64:
      return 8;
  }
  return 0;
}

bool parse_prop_type(const std::string& token, PropType& out) {
  if (token == "float" || token == "float32") out = PropType::kF32;
  else if (token == "double" || token == "float64") out = PropType::kF64;
  else if (token == "uchar" || token == "uint8") out = PropType::kU8;
  else if (token == "ushort" || token == "uint16") out = PropType::kU16;
  else if (token == "uint" || token == "uint32") out = PropType::kU32;
  else if (token == "char" || token == "int8") out = PropType::kI8;
  else if (token == "short" || token == "int16") out = PropType::kI16;
  else if (token == "int" || token == "int32") out = PropType::kI32;
  else return false;
  return true;
}

struct RequiredProp {
  const char* name;
  PropType type;
};

constexpr std::array<RequiredProp, 10> kSchema{{
    {"x", PropType::kF32},
    {"y", PropType::kF32},
    {"z", PropType::kF32},
    {"x_origin", PropType::kF32},
    {"y_origin", PropType::kF32},
    {"z_origin", PropType::kF32},
    {"GPS_time", PropType::kF64},
    {"reflectance", PropType::kU8},
    {"label", PropType::kU32},
    {"class", PropType::kU32},
}};

const char* ply_type_name(PropType t) {
  switch (t) {
    case PropType::kF32: return "float";
    case PropType::kF64: return "double";
    case PropType::kU8: return "uchar";
    case PropType::kU16: return "ushort";
    case PropType::kU32: return "uint";
    case PropType::kI8: return "char";
    case PropType::kI16: return "short";
    case PropType::kI32: return "int";
  }
  return "?";
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream iss(line);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct HeaderInfo {
  std::uint64_t vertex_count = 0;
  std::vector<std::pair<std::string, PropType>> props;
  std::size_t record_size = 0;
  std::size_t payload_start = 0;
  std::array<std::size_t, 10> field_offset{};  // byte offset per kSchema entry
  std::array<double, 2> offset{0.0, 0.0};
};

HeaderInfo parse_header(std::istream& in, PlyMode mode) {
  HeaderInfo info;
  std::size_t pos = 0;

  auto next_line = [&](std::string& line, std::size_t& line_start) -> bool {
    line_start = pos;
    if (!std::getline(in, line)) return false;
    pos += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() > (1u << 16)) throw PlyError("header line too long", line_start);
    return true;
  };

  std::string line;
  std::size_t line_start = 0;
  if (!next_line(line, line_start) || line != "ply") throw PlyError("not a PLY file", line_start);
  if (!next_line(line, line_start)) throw PlyError("unexpected end of header", pos);
  if (line != "format binary_little_endian 1.0")
    throw PlyError("unsupported format (need binary_little_endian 1.0)", line_start);

  bool saw_element = false;
  bool saw_end = false;
  while (next_line(line, line_start)) {
    auto tok = split_ws(line);
    if (tok.empty()) throw PlyError("malformed header line", line_start);
    if (tok[0] == "comment" || tok[0] == "obj_info") {
      if (tok.size() == 4 && tok[0] == "comment" && tok[1] == "offset") {
        try {
          info.offset[0] = std::stod(tok[2]);
          info.offset[1] = std::stod(tok[3]);
        } catch (const std::exception&) {
          throw PlyError("malformed offset comment", line_start);
        }
      }
      continue;
    }
    if (tok[0] == "element") {
      if (saw_element) throw PlyError("unsupported element (only one vertex element)", line_start);
      if (tok.size() != 3 || tok[1] != "vertex")
        throw PlyError("unsupported element (need element vertex)", line_start);
      try {
        std::size_t used = 0;
        const unsigned long long n = std::stoull(tok[2], &used);
        if (used != tok[2].size()) throw std::invalid_argument("trailing");
        info.vertex_count = n;
      } catch (const std::exception&) {
        throw PlyError("invalid vertex count", line_start);
      }
      saw_element = true;
      continue;
    }
    if (tok[0] == "property") {
      if (!saw_element) throw PlyError("property before element", line_start);
      if (tok.size() >= 2 && tok[1] == "list")
        throw PlyError("list property not supported", line_start);
      if (tok.size() != 3) throw PlyError("malformed property line", line_start);
      PropType t;
      if (!parse_prop_type(tok[1], t))
        throw PlyError("unknown property type '" + tok[1] + "'", line_start);
      for (const auto& [name, type] : info.props) {
        (void)type;
        if (name == tok[2]) throw PlyError("duplicate property '" + tok[2] + "'", line_start);
      }
      info.props.emplace_back(tok[2], t);
      continue;
    }
    if (tok[0] == "end_header") {
      if (tok.size() != 1) throw PlyError("malformed header line", line_start);
      saw_end = true;
      break;
    }
    throw PlyError("unrecognized header keyword '" + tok[0] + "'", line_start);
  }
  if (!saw_end) throw PlyError("unexpected end of header", pos);
  if (!saw_element) throw PlyError("missing element vertex", pos);
  info.payload_start = pos;

  // Locate the 10 required properties in the declared record.
  std::array<bool, 10> found{};
  std::size_t offset = 0;
  for (std::size_t p = 0; p < info.props.size(); ++p) {
    const auto& [name, type] = info.props[p];
    for (std::size_t s = 0; s < kSchema.size(); ++s) {
      if (name != kSchema[s].name) continue;
      if (type != kSchema[s].type)
        throw PlyError("property '" + name + "' has type " + ply_type_name(type) + ", expected " +
                           ply_type_name(kSchema[s].type),
                       info.payload_start);
      found[s] = true;
      info.field_offset[s] = offset;
      break;
    }
    offset += width_of(type);
  }
  info.record_size = offset;
  for (std::size_t s = 0; s < kSchema.size(); ++s)
    if (!found[s])
      throw PlyError(std::string("missing property '") + kSchema[s].name + "'",
                     info.payload_start);

  if (mode == PlyMode::kStrict) {
    bool exact = info.props.size() == kSchema.size();
    if (exact)
      for (std::size_t s = 0; s < kSchema.size(); ++s)
        if (info.props[s].first != kSchema[s].name || info.props[s].second != kSchema[s].type)
          exact = false;
    if (!exact) throw PlyError("schema mismatch in strict mode", info.payload_start);
  }
  return info;
}

}  // namespace

PointCloud read_ply(std::istream& in, PlyMode mode) {
  const HeaderInfo info = parse_header(in, mode);
  PointCloud cloud;
  cloud.offset = info.offset;
  cloud.points.resize(info.vertex_count);

  constexpr std::size_t kChunkRecords = 1u << 16;
  std::vector<std::uint8_t> buf(kChunkRecords * info.record_size);
  std::size_t done = 0;
  while (done < info.vertex_count) {
    const std::size_t n = std::min<std::size_t>(kChunkRecords, info.vertex_count - done);
    const auto want = static_cast<std::streamsize>(n * info.record_size);
    in.read(reinterpret_cast<char*>(buf.data()), want);
    if (in.gcount() != want)
      throw PlyError("truncated payload",
                     info.payload_start + done * info.record_size +
                         static_cast<std::size_t>(std::max<std::streamsize>(in.gcount(), 0)));
    const auto& off = info.field_offset;
    for (std::size_t r = 0; r < n; ++r) {
      const std::uint8_t* rec = buf.data() + r * info.record_size;
      LabeledPoint& p = cloud.points[done + r];
      p.x = detail::load_le<float>(rec + off[0]);
      p.y = detail::load_le<float>(rec + off[1]);
      p.z = detail::load_le<float>(rec + off[2]);
      p.x_origin = detail::load_le<float>(rec + off[3]);
      p.y_origin = detail::load_le<float>(rec + off[4]);
      p.z_origin = detail::load_le<float>(rec + off[5]);
      p.gps_time = detail::load_le<double>(rec + off[6]);
      p.reflectance = rec[off[7]];
      p.label = detail::load_le<std::uint32_t>(rec + off[8]);
      p.class_id = detail::load_le<std::uint32_t>(rec + off[9]);
    }
    done += n;
  }
  return cloud;
}

PointCloud read_ply_file(const std::string& path, PlyMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_ply(in, mode);
}

std::size_t write_ply(const PointCloud& cloud, std::ostream& out) {
  std::ostringstream header;
  header << "ply\n"
         << "format binary_little_endian 1.0\n"
         << "comment offset " << format_double(cloud.offset[0]) << ' '
         << format_double(cloud.offset[1]) << '\n'
         << "element vertex " << cloud.size() << '\n';
  for (const RequiredProp& p : kSchema)
    header << "property " << ply_type_name(p.type) << ' ' << p.name << '\n';
  header << "end_header\n";
  const std::string head = header.str();
  out.write(head.data(), static_cast<std::streamsize>(head.size()));

  constexpr std::size_t kRecordSize = 41;
  constexpr std::size_t kChunkRecords = 1u << 16;
  std::vector<std::uint8_t> buf(kChunkRecords * kRecordSize);
  std::size_t done = 0;
  while (done < cloud.size()) {
    const std::size_t n = std::min<std::size_t>(kChunkRecords, cloud.size() - done);
    for (std::size_t r = 0; r < n; ++r) {
      std::uint8_t* rec = buf.data() + r * kRecordSize;
      const LabeledPoint& p = cloud.points[done + r];
      detail::store_le<float>(rec + 0, p.x);
      detail::store_le<float>(rec + 4, p.y);
      detail::store_le<float>(rec + 8, p.z);
      detail::store_le<float>(rec + 12, p.x_origin);
      detail::store_le<float>(rec + 16, p.y_origin);
      detail::store_le<float>(rec + 20, p.z_origin);
      detail::store_le<double>(rec + 24, p.gps_time);
      rec[32] = p.reflectance;
      detail::store_le<std::uint32_t>(rec + 33, p.label);
      detail::store_le<std::uint32_t>(rec + 37, p.class_id);
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(n * kRecordSize));
    done += n;
  }
  if (!out) throw Error("write_ply: output stream failure");
  return head.size() + cloud.size() * kRecordSize;
}

std::size_t write_ply_file(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  return write_ply(cloud, out);
}

}  // namespace mls
