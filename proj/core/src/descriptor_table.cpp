#include "mls/descriptor_table.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mls/binary_io.hpp"
#include "mls/errors.hpp"

namespace mls {

namespace {

constexpr char kMagic[4] = {'M', 'L', 'S', 'D'};
constexpr std::uint32_t kVersion = 1;

void validate(const DescriptorTable& table) {
  if (table.values.size() != table.rows * table.cols)
    throw InvalidParameter("descriptor table: value count does not match rows x cols");
  if (!table.segment_ids.empty() && table.segment_ids.size() != table.rows)
    throw InvalidParameter("descriptor table: segment id count does not match rows");
  if (!table.class_ids.empty() && table.class_ids.size() != table.rows)
    throw InvalidParameter("descriptor table: class id count does not match rows");
}

}  // namespace

void write_table(const DescriptorTable& table, std::ostream& out) {
  validate(table);
  out.write(kMagic, 4);
  detail::write_le<std::uint32_t>(out, kVersion);
  detail::write_string(out, table.layout);
  detail::write_le<std::uint64_t>(out, table.rows);
  detail::write_le<std::uint64_t>(out, table.cols);
  for (double v : table.values) detail::write_le<double>(out, v);
  if (!out) throw Error("descriptor table: output stream failure");
}

DescriptorTable read_table(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
    throw InvalidInput("descriptor table: bad magic");
  std::uint32_t version = 0;
  if (!detail::read_le(in, version)) throw InvalidInput("descriptor table: truncated stream");
  if (version != kVersion)
    throw InvalidInput("descriptor table: unsupported version " + std::to_string(version));

  DescriptorTable table;
  std::uint64_t rows = 0, cols = 0;
  if (!detail::read_string(in, table.layout) || !detail::read_le(in, rows) ||
      !detail::read_le(in, cols))
    throw InvalidInput("descriptor table: truncated stream");
  if (cols == 0 && rows > 0) throw InvalidInput("descriptor table: zero columns");
  table.rows = rows;
  table.cols = cols;
  table.values.resize(rows * cols);
  for (double& v : table.values)
    if (!detail::read_le(in, v)) throw InvalidInput("descriptor table: truncated stream");
  return table;
}

std::string sidecar_path(const std::string& table_path) { return table_path + ".txt"; }

void write_table_file(const DescriptorTable& table, const std::string& path) {
  validate(table);
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    write_table(table, out);
  }
  std::ofstream side(sidecar_path(path));
  if (!side) throw Error("cannot open " + sidecar_path(path) + " for writing");
  side << "# row segment_id class_id\n";
  for (std::size_t r = 0; r < table.rows; ++r) {
    const std::uint32_t seg = r < table.segment_ids.size() ? table.segment_ids[r] : 0;
    const std::uint32_t cls = r < table.class_ids.size() ? table.class_ids[r] : 0;
    side << r << ' ' << seg << ' ' << cls << '\n';
  }
  if (!side) throw Error("descriptor table: sidecar write failure");
}

DescriptorTable read_table_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  DescriptorTable table = read_table(in);

  std::ifstream side(sidecar_path(path));
  if (!side) return table;  // sidecar is optional on read
  table.segment_ids.assign(table.rows, 0);
  table.class_ids.assign(table.rows, 0);
  std::string line;
  std::size_t seen = 0;
  std::size_t line_no = 0;
  while (std::getline(side, line)) {
    ++line_no;
    std::size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    std::istringstream row(line);
    std::size_t index = 0;
    std::uint32_t seg = 0, cls = 0;
    if (!(row >> index >> seg >> cls) || index != seen || index >= table.rows)
      throw InvalidInput("descriptor table: malformed sidecar line " + std::to_string(line_no));
    table.segment_ids[index] = seg;
    table.class_ids[index] = cls;
    ++seen;
  }
  if (seen != table.rows)
    throw InvalidInput("descriptor table: sidecar covers " + std::to_string(seen) + " of " +
                       std::to_string(table.rows) + " rows");
  return table;
}

}  // namespace mls
