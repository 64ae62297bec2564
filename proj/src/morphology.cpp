#include "parkseg/morphology.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "parkseg/error.hpp"

namespace parkseg {

BinaryMask::BinaryMask(int width, int height, bool fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw Error(ErrorKind::DimensionMismatch, "binary mask dimensions must be positive");
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill ? 1 : 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width < 1 || height < 1) throw Error(ErrorKind::DimensionMismatch, "binary mask dimensions must be positive");
  if (bits_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw Error(ErrorKind::DimensionMismatch, "bit buffer does not match mask dimensions");
  for (auto& b : bits_) b = b ? 1 : 0;
}

BinaryMask BinaryMask::of_class(const Mask& mask, ClassId id) {
  std::vector<std::uint8_t> bits(mask.size());
  std::transform(mask.labels().begin(), mask.labels().end(), bits.begin(),
                 [id](ClassId v) { return static_cast<std::uint8_t>(v == id); });
  return BinaryMask(mask.width(), mask.height(), std::move(bits));
}

std::size_t BinaryMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

namespace {

class DisjointSet {
 public:
  std::int32_t make() {
    parent_.push_back(static_cast<std::int32_t>(parent_.size()));
    return parent_.back();
  }
  std::int32_t find(std::int32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Keep the smaller provisional label as root.
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::int32_t> parent_;
};

}  // namespace

// Two-pass labeling: provisional labels from the already-visited neighbors
// (W, NW, N, NE for 8-connectivity; W, N for 4), equivalences merged in a
// union-find, then resolved to dense ids in raster order.
ComponentLabels connected_components(const BinaryMask& bm, Connectivity connectivity) {
  const int w = bm.width();
  const int h = bm.height();
  ComponentLabels out;
  out.width = w;
  out.height = h;
  out.labels.assign(bm.bits().size(), 0);

  DisjointSet sets;
  sets.make();  // slot 0 is "no label"
  const bool eight = connectivity == Connectivity::Eight;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!bm.at(x, y)) continue;
      std::int32_t neighbors[4];
      int n = 0;
      auto take = [&](int nx, int ny) {
        if (nx < 0 || ny < 0 || nx >= w) return;
        const std::int32_t l = out.labels[bm.index(nx, ny)];
        if (l != 0) neighbors[n++] = l;
      };
      take(x - 1, y);
      take(x, y - 1);
      if (eight) {
        take(x - 1, y - 1);
        take(x + 1, y - 1);
      }
      std::int32_t label;
      if (n == 0) {
        label = sets.make();
      } else {
        label = *std::min_element(neighbors, neighbors + n);
        for (int i = 0; i < n; ++i) sets.unite(label, neighbors[i]);
      }
      out.labels[bm.index(x, y)] = label;
    }
  }

  std::vector<std::int32_t> dense(sets.size(), 0);
  std::int32_t next = 0;
  for (auto& l : out.labels) {
    if (l == 0) continue;
    const std::int32_t root = sets.find(l);
    if (dense[root] == 0) dense[root] = ++next;
    l = dense[root];
  }
  out.count = next;
  return out;
}

namespace {

bool is_edge_pixel(const ComponentLabels& labels, int x, int y, std::int32_t id) {
  if (x == 0 || y == 0 || x == labels.width - 1 || y == labels.height - 1) return true;
  return labels.at(x - 1, y) != id || labels.at(x + 1, y) != id || labels.at(x, y - 1) != id ||
         labels.at(x, y + 1) != id;
}

}  // namespace

BinaryMask boundary(const ComponentLabels& labels, std::int32_t id) {
  if (id < 1 || id > labels.count)
    throw Error(ErrorKind::UnknownComponentId,
                "component " + std::to_string(id) + " not in 1.." + std::to_string(labels.count));
  BinaryMask out(labels.width, labels.height);
  for (int y = 0; y < labels.height; ++y) {
    for (int x = 0; x < labels.width; ++x) {
      if (labels.at(x, y) == id && is_edge_pixel(labels, x, y, id)) out.set(x, y, true);
    }
  }
  return out;
}

BinaryMask all_boundaries(const ComponentLabels& labels) {
  BinaryMask out(labels.width, labels.height);
  for (int y = 0; y < labels.height; ++y) {
    for (int x = 0; x < labels.width; ++x) {
      const std::int32_t id = labels.at(x, y);
      if (id != 0 && is_edge_pixel(labels, x, y, id)) out.set(x, y, true);
    }
  }
  return out;
}

namespace {

// 1-D max filter of radius r along a strided line, via a running count of
// set pixels in the window [i-r, i+r] clipped to [0, n).
void dilate_line(const std::uint8_t* in, std::uint8_t* out, int n, std::ptrdiff_t stride, int r) {
  int inside = 0;
  for (int i = 0; i < std::min(r, n); ++i) inside += in[i * stride];
  for (int i = 0; i < n; ++i) {
    const int enter = i + r;
    if (enter < n) inside += in[enter * stride];
    const int leave = i - r - 1;
    if (leave >= 0) inside -= in[leave * stride];
    out[i * stride] = inside > 0 ? 1 : 0;
  }
}

}  // namespace

BinaryMask dilate_rect(const BinaryMask& bm, int kernel_w, int kernel_h) {
  if (kernel_w < 1 || kernel_h < 1 || kernel_w % 2 == 0 || kernel_h % 2 == 0)
    throw Error(ErrorKind::EvenKernel, "kernel must have odd positive sides, got " + std::to_string(kernel_w) + "x" +
                                           std::to_string(kernel_h));
  const int w = bm.width();
  const int h = bm.height();
  const int rx = (kernel_w - 1) / 2;
  const int ry = (kernel_h - 1) / 2;

  std::vector<std::uint8_t> rows(bm.bits().size());
  for (int y = 0; y < h; ++y) {
    const std::size_t base = static_cast<std::size_t>(y) * static_cast<std::size_t>(w);
    dilate_line(bm.bits().data() + base, rows.data() + base, w, 1, rx);
  }
  std::vector<std::uint8_t> out(rows.size());
  for (int x = 0; x < w; ++x) dilate_line(rows.data() + x, out.data() + x, h, w, ry);
  return BinaryMask(w, h, std::move(out));
}

}  // namespace parkseg
