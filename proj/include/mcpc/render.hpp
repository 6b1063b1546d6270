#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mcpc/features.hpp"
#include "mcpc/image.hpp"

namespace mcpc {

/// Geometry and shading constants for the 100x100 test images. All values
/// are recorded in manifests so rendered datasets are self-describing.
struct RenderParams {
  std::size_t canvas = 100;       // square canvas side, px
  std::size_t grid = 3;           // grid rows = cols
  std::size_t cell = 33;          // cell side, px
  std::size_t margin = 1;         // offset of cell (0,0) from the canvas edge
  double background = 1.0;        // white
  double shade_step = 0.15;       // gray level = shade index * step; 0 = darkest
  double min_diameter = 8.0;      // enclosing-circle diameter at size index 0
  double max_diameter = 30.0;     // ... at the top size index
  double star_inner_ratio = 0.5;  // inner pentagon radius / outer radius
};

inline double shade_gray(int shade_index, const RenderParams& p = {}) {
  return p.shade_step * shade_index;
}

inline double size_diameter(int size_index, const RenderParams& p = {}) {
  return p.min_diameter +
         (p.max_diameter - p.min_diameter) * size_index / (kSizeLevels - 1);
}

namespace detail {

struct Vec2 {
  double x, y;
};

/// Inside-or-on-boundary test for a convex polygon given in vertex order.
inline bool in_convex_polygon(const Vec2* v, int n, double px, double py) {
  bool any_pos = false, any_neg = false;
  for (int i = 0; i < n; ++i) {
    const Vec2 a = v[i], b = v[(i + 1) % n];
    const double cross = (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
    if (cross > 0) any_pos = true;
    if (cross < 0) any_neg = true;
  }
  return !(any_pos && any_neg);
}

inline Vec2 on_circle(double cx, double cy, double r, double angle_deg) {
  const double a = angle_deg * std::acos(-1.0) / 180.0;
  return {cx + r * std::cos(a), cy + r * std::sin(a)};
}

/// Point-in-shape for a shape centered at (cx, cy) with enclosing-circle
/// radius r. Image convention: y grows downward, so "up" is -y.
inline bool in_shape(ShapeKind kind, double cx, double cy, double r, double px, double py,
                     double star_inner_ratio) {
  switch (kind) {
    case ShapeKind::circle: {
      const double dx = px - cx, dy = py - cy;
      return dx * dx + dy * dy <= r * r;
    }
    case ShapeKind::square: {
      const double h = r / std::sqrt(2.0);
      return std::abs(px - cx) <= h && std::abs(py - cy) <= h;
    }
    case ShapeKind::triangle: {
      const Vec2 v[3] = {on_circle(cx, cy, r, -90), on_circle(cx, cy, r, 30),
                         on_circle(cx, cy, r, 150)};
      return in_convex_polygon(v, 3, px, py);
    }
    case ShapeKind::hexagon: {
      Vec2 v[6];
      for (int i = 0; i < 6; ++i) v[i] = on_circle(cx, cy, r, -90 + 60 * i);
      return in_convex_polygon(v, 6, px, py);
    }
    case ShapeKind::star: {
      Vec2 outer[5], inner[5];
      for (int i = 0; i < 5; ++i) {
        outer[i] = on_circle(cx, cy, r, -90 + 72 * i);
        inner[i] = on_circle(cx, cy, r * star_inner_ratio, -54 + 72 * i);
      }
      if (in_convex_polygon(inner, 5, px, py)) return true;
      for (int i = 0; i < 5; ++i) {
        const Vec2 spike[3] = {inner[(i + 4) % 5], outer[i], inner[i]};
        if (in_convex_polygon(spike, 3, px, py)) return true;
      }
      return false;
    }
  }
  return false;
}

}  // namespace detail

/// Rasterizes a feature vector: `number` copies of the shape, at the given
/// gray level and size, centered in the first `number` cells of
/// `position_order` on the 3x3 grid. Hard-edged fill at pixel centers.
inline Image render(const FeatureVector& f, const RenderParams& p = {}) {
  Image img(p.canvas, p.canvas, p.background);
  const double gray = shade_gray(f.shade, p);
  const double radius = size_diameter(f.size, p) / 2.0;
  for (int i = 0; i < f.number; ++i) {
    const int cell_index = f.position_order[i];
    const std::size_t row = static_cast<std::size_t>(cell_index) / p.grid;
    const std::size_t col = static_cast<std::size_t>(cell_index) % p.grid;
    const double cy = p.margin + row * p.cell + p.cell / 2.0;
    const double cx = p.margin + col * p.cell + p.cell / 2.0;
    const std::size_t y0 = p.margin + row * p.cell;
    const std::size_t x0 = p.margin + col * p.cell;
    for (std::size_t y = y0; y < y0 + p.cell && y < p.canvas; ++y) {
      for (std::size_t x = x0; x < x0 + p.cell && x < p.canvas; ++x) {
        if (detail::in_shape(f.shape, cx, cy, radius, x + 0.5, y + 0.5, p.star_inner_ratio)) {
          img.at(y, x) = gray;
        }
      }
    }
  }
  return img;
}

}  // namespace mcpc
