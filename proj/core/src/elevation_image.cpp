#include "mls/elevation_image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "mls/binary_io.hpp"
#include "mls/errors.hpp"

namespace mls {

namespace {
constexpr char kMagic[4] = {'M', 'L', 'S', 'E'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

ElevationImage::ElevationImage(double cell_size, double x_min, double y_min, std::size_t width,
                               std::size_t height)
    : cell_size_(cell_size),
      x_min_(x_min),
      y_min_(y_min),
      width_(width),
      height_(height),
      values_(width * height, kEmpty),
      mask_(width * height, 0) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size))
    throw InvalidParameter("elevation image cell_size must be positive and finite");
  if (width == 0 || height == 0)
    throw InvalidParameter("elevation image dimensions must be positive");
}

bool ElevationImage::hole_free() const {
  for (double v : values_)
    if (std::isnan(v)) return false;
  return !values_.empty();
}

std::pair<std::size_t, std::size_t> ElevationImage::cell_at(double x, double y) const {
  auto clamp_index = [](double v, std::size_t n) -> std::size_t {
    if (!(v > 0.0)) return 0;
    const double c = std::floor(v);
    if (c >= static_cast<double>(n)) return n - 1;
    return static_cast<std::size_t>(c);
  };
  return {clamp_index((x - x_min_) / cell_size_, width_),
          clamp_index((y - y_min_) / cell_size_, height_)};
}

ElevationImage rasterize_ground(const PointCloud& cloud,
                                const std::vector<std::uint32_t>& ground_indices,
                                double cell_size, ElevationAggregate aggregate) {
  if (ground_indices.empty()) throw EmptyInput("rasterize_ground: empty ground set");
  if (!(cell_size > 0.0) || !std::isfinite(cell_size))
    throw InvalidParameter("rasterize_ground: cell_size must be positive and finite");
  for (std::uint32_t i : ground_indices)
    if (i >= cloud.size()) throw InvalidParameter("rasterize_ground: index out of range");

  // Raster spans the whole cloud so later barycenter projections stay in bounds.
  double x_lo = cloud[0].x, x_hi = cloud[0].x, y_lo = cloud[0].y, y_hi = cloud[0].y;
  for (const LabeledPoint& p : cloud.points) {
    x_lo = std::min<double>(x_lo, p.x);
    x_hi = std::max<double>(x_hi, p.x);
    y_lo = std::min<double>(y_lo, p.y);
    y_hi = std::max<double>(y_hi, p.y);
  }
  const auto width = static_cast<std::size_t>(std::floor((x_hi - x_lo) / cell_size)) + 1;
  const auto height = static_cast<std::size_t>(std::floor((y_hi - y_lo) / cell_size)) + 1;

  ElevationImage img(cell_size, x_lo, y_lo, width, height);
  std::vector<std::uint32_t> counts;
  if (aggregate == ElevationAggregate::kMean) counts.assign(width * height, 0);

  for (std::uint32_t i : ground_indices) {
    const LabeledPoint& p = cloud[i];
    const auto [ix, iy] = img.cell_at(p.x, p.y);
    const double z = p.z;
    if (aggregate == ElevationAggregate::kMin) {
      if (img.empty_at(ix, iy) || z < img.at(ix, iy)) img.set(ix, iy, z);
    } else {
      const double prev = img.empty_at(ix, iy) ? 0.0 : img.at(ix, iy);
      img.set(ix, iy, prev + z);
      ++counts[iy * width + ix];
    }
    img.set_ground(ix, iy, true);
  }
  if (aggregate == ElevationAggregate::kMean) {
    for (std::size_t iy = 0; iy < height; ++iy)
      for (std::size_t ix = 0; ix < width; ++ix)
        if (counts[iy * width + ix] > 0)
          img.set(ix, iy, img.at(ix, iy) / counts[iy * width + ix]);
  }
  return img;
}

ElevationImage fill_holes(const ElevationImage& img) {
  const std::size_t w = img.width(), h = img.height();
  bool any = false;
  for (double v : img.values())
    if (!std::isnan(v)) {
      any = true;
      break;
    }
  if (!any) throw EmptyInput("fill_holes: raster has no non-EMPTY cell");

  ElevationImage out = img;

  // Expanding-ring search per hole: exact nearest by cell-center distance,
  // ties resolved to the lowest (row, column). Candidate rings keep growing
  // until the ring's minimum possible distance exceeds the best hit.
  const auto sq = [](std::ptrdiff_t v) { return static_cast<double>(v) * static_cast<double>(v); };
  for (std::size_t iy = 0; iy < h; ++iy) {
    for (std::size_t ix = 0; ix < w; ++ix) {
      if (!img.empty_at(ix, iy)) continue;
      double best_d2 = std::numeric_limits<double>::infinity();
      std::size_t best_row = 0, best_col = 0;
      const std::ptrdiff_t max_r =
          static_cast<std::ptrdiff_t>(std::max(w, h));
      for (std::ptrdiff_t r = 1; r <= max_r; ++r) {
        if (sq(r) > best_d2) break;
        for (std::ptrdiff_t dy = -r; dy <= r; ++dy) {
          const std::ptrdiff_t cy = static_cast<std::ptrdiff_t>(iy) + dy;
          if (cy < 0 || cy >= static_cast<std::ptrdiff_t>(h)) continue;
          const bool edge_row = (dy == -r || dy == r);
          const std::ptrdiff_t step = edge_row ? 1 : 2 * r;
          for (std::ptrdiff_t dx = -r; dx <= r; dx += step) {
            const std::ptrdiff_t cx = static_cast<std::ptrdiff_t>(ix) + dx;
            if (cx < 0 || cx >= static_cast<std::ptrdiff_t>(w)) continue;
            if (img.empty_at(static_cast<std::size_t>(cx), static_cast<std::size_t>(cy))) continue;
            const double d2 = sq(dx) + sq(dy);
            const auto row = static_cast<std::size_t>(cy);
            const auto col = static_cast<std::size_t>(cx);
            if (d2 < best_d2 ||
                (d2 == best_d2 && (row < best_row || (row == best_row && col < best_col)))) {
              best_d2 = d2;
              best_row = row;
              best_col = col;
            }
          }
        }
      }
      out.set(ix, iy, img.at(best_col, best_row));
    }
  }
  return out;
}

ElevationImage smooth(const ElevationImage& img, int kernel_radius) {
  if (kernel_radius < 0) throw InvalidParameter("smooth: kernel radius must be >= 0");
  if (!img.hole_free()) throw PreconditionViolation("smooth: raster contains EMPTY cells");
  if (kernel_radius == 0) return img;

  const std::size_t w = img.width(), h = img.height();
  // summed-area table, one extra row/column of zeros
  std::vector<double> sat((w + 1) * (h + 1), 0.0);
  for (std::size_t iy = 0; iy < h; ++iy)
    for (std::size_t ix = 0; ix < w; ++ix)
      sat[(iy + 1) * (w + 1) + (ix + 1)] = img.at(ix, iy) + sat[iy * (w + 1) + (ix + 1)] +
                                           sat[(iy + 1) * (w + 1) + ix] - sat[iy * (w + 1) + ix];

  ElevationImage out = img;
  const std::ptrdiff_t r = kernel_radius;
  for (std::size_t iy = 0; iy < h; ++iy) {
    const std::size_t y0 = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(iy) - r));
    const std::size_t y1 = std::min(h - 1, iy + static_cast<std::size_t>(r));
    for (std::size_t ix = 0; ix < w; ++ix) {
      const std::size_t x0 = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(ix) - r));
      const std::size_t x1 = std::min(w - 1, ix + static_cast<std::size_t>(r));
      const double sum = sat[(y1 + 1) * (w + 1) + (x1 + 1)] - sat[y0 * (w + 1) + (x1 + 1)] -
                         sat[(y1 + 1) * (w + 1) + x0] + sat[y0 * (w + 1) + x0];
      const double n = static_cast<double>((x1 - x0 + 1) * (y1 - y0 + 1));
      out.set(ix, iy, sum / n);
    }
  }
  return out;
}

double elevation_at(const ElevationImage& img, double x, double y) {
  const auto [ix, iy] = img.cell_at(x, y);
  return img.at(ix, iy);
}

void write_elevation(const ElevationImage& img, std::ostream& out) {
  out.write(kMagic, 4);
  detail::write_le<std::uint32_t>(out, kVersion);
  detail::write_le<double>(out, img.cell_size());
  detail::write_le<double>(out, img.x_min());
  detail::write_le<double>(out, img.y_min());
  detail::write_le<std::uint64_t>(out, img.width());
  detail::write_le<std::uint64_t>(out, img.height());
  for (double v : img.values()) detail::write_le<double>(out, v);
  out.write(reinterpret_cast<const char*>(img.ground_mask().data()),
            static_cast<std::streamsize>(img.ground_mask().size()));
  if (!out) throw Error("write_elevation: output stream failure");
}

ElevationImage read_elevation(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
    throw Error("read_elevation: bad magic");
  std::uint32_t version = 0;
  if (!detail::read_le(in, version) || version != kVersion)
    throw Error("read_elevation: unsupported version");
  double cell = 0, x0 = 0, y0 = 0;
  std::uint64_t w = 0, h = 0;
  if (!detail::read_le(in, cell) || !detail::read_le(in, x0) || !detail::read_le(in, y0) ||
      !detail::read_le(in, w) || !detail::read_le(in, h))
    throw Error("read_elevation: truncated header");
  ElevationImage img(cell, x0, y0, static_cast<std::size_t>(w), static_cast<std::size_t>(h));
  for (std::size_t i = 0; i < w * h; ++i) {
    double v = 0;
    if (!detail::read_le(in, v)) throw Error("read_elevation: truncated values");
    img.values()[i] = v;
  }
  std::vector<std::uint8_t> mask(w * h);
  in.read(reinterpret_cast<char*>(mask.data()), static_cast<std::streamsize>(mask.size()));
  if (in.gcount() != static_cast<std::streamsize>(mask.size()))
    throw Error("read_elevation: truncated mask");
  for (std::size_t iy = 0; iy < h; ++iy)
    for (std::size_t ix = 0; ix < w; ++ix) img.set_ground(ix, iy, mask[iy * w + ix] != 0);
  return img;
}

void write_elevation_file(const ElevationImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_elevation(img, out);
}

ElevationImage read_elevation_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_elevation(in);
}

}  // namespace mls
