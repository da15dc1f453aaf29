#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mls {

// Row-major matrix of descriptor rows plus the per-row object identity.
// The binary file stores layout, shape, and values; segment and class ids
// travel in a plain-text sidecar next to it ("<path>.txt").
struct DescriptorTable {
  std::string layout;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;              // rows x cols
  std::vector<std::uint32_t> segment_ids;  // per row, may be empty
  std::vector<std::uint32_t> class_ids;    // per row, may be empty

  const double* row(std::size_t r) const { return values.data() + r * cols; }
  std::vector<double> row_vec(std::size_t r) const {
    return {row(r), row(r) + cols};
  }
};

void write_table(const DescriptorTable& table, std::ostream& out);
DescriptorTable read_table(std::istream& in);  // ids left empty

// File variants also write/read the sidecar; a missing sidecar on read
// leaves the id vectors empty.
void write_table_file(const DescriptorTable& table, const std::string& path);
DescriptorTable read_table_file(const std::string& path);

std::string sidecar_path(const std::string& table_path);

}  // namespace mls
