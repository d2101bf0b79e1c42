#include "fracture/generators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace fracture::generators {

namespace {

// Drop unreferenced vertices and renumber.
Mesh compact(const std::vector<std::array<double, 3>>& points, int dim,
             const std::vector<std::vector<int>>& cells) {
  std::vector<int> remap(points.size(), -1);
  int next = 0;
  for (const auto& cell : cells) {
    for (int v : cell) {
      if (remap[v] < 0) remap[v] = next++;
    }
  }
  Vertices vertices(next, dim);
  for (std::size_t v = 0; v < points.size(); ++v) {
    if (remap[v] < 0) continue;
    for (int c = 0; c < dim; ++c) vertices(remap[v], c) = points[v][c];
  }
  Elements elements(cells.size(), dim + 1);
  for (std::size_t f = 0; f < cells.size(); ++f) {
    for (int c = 0; c <= dim; ++c) elements(f, c) = remap[cells[f][c]];
  }
  return make_mesh(std::move(vertices), std::move(elements));
}

}  // namespace

Mesh unit_square() {
  Vertices v(4, 2);
  v << 0, 0, 1, 0, 1, 1, 0, 1;
  Elements e(2, 3);
  e << 0, 1, 2, 0, 2, 3;
  return make_mesh(std::move(v), std::move(e));
}

Mesh pinch() {
  Vertices v(7, 2);
  v << 0, 0,      // 0 A
      0, 1,       // 1 B
      1, 0.4,     // 2 waist bottom
      1, 0.5,     // 3 waist middle
      1, 0.6,     // 4 waist top
      2, 0,       // 5 C
      2, 1;       // 6 D
  Elements e(6, 3);
  e << 0, 2, 3,  //
      0, 3, 1,   //
      1, 3, 4,   //
      2, 5, 3,   //
      3, 5, 6,   //
      3, 6, 4;
  return make_mesh(std::move(v), std::move(e));
}

Mesh grid_rectangle(int nx, int ny, double width, double height,
                    const std::function<bool(int, int)>& keep,
                    const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& warp) {
  std::vector<std::array<double, 3>> points;
  points.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      Eigen::Vector2d p(width * i / nx, height * j / ny);
      if (warp) p = warp(p);
      points.push_back({p.x(), p.y(), 0.0});
    }
  }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::vector<int>> cells;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (keep && !keep(i, j)) continue;
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      if ((i + j) % 2 == 0) {
        cells.push_back({a, b, c});
        cells.push_back({a, c, d});
      } else {
        cells.push_back({a, b, d});
        cells.push_back({b, c, d});
      }
    }
  }
  return compact(points, 2, cells);
}

Mesh hourglass(int nx, int ny, double waist) {
  return grid_rectangle(nx, ny, 2.0, 1.0, {}, [waist](const Eigen::Vector2d& p) {
    const double squeeze = 1.0 - (1.0 - waist) * std::exp(-std::pow((p.x() - 1.0) / 0.3, 2));
    return Eigen::Vector2d(p.x(), 0.5 + (p.y() - 0.5) * squeeze);
  });
}

Mesh notched_block(int cells_per_unit, int notch_depth) {
  const int nx = 4 * cells_per_unit;
  const int ny = 2 * cells_per_unit;
  const int slot = nx / 2;
  return grid_rectangle(nx, ny, 4.0, 2.0, [=](int i, int j) { return !(i == slot && j < notch_depth); });
}

Mesh cube_5tet() {
  std::vector<std::array<double, 3>> points;
  for (int v = 0; v < 8; ++v) {
    points.push_back({double(v & 1), double((v >> 1) & 1), double((v >> 2) & 1)});
  }
  std::vector<std::vector<int>> cells = {{1, 2, 4, 7}, {0, 1, 2, 4}, {3, 1, 2, 7}, {5, 1, 4, 7}, {6, 2, 4, 7}};
  return compact(points, 3, cells);
}

Mesh box_tets(int nx, int ny, int nz, double sx, double sy, double sz) {
  std::vector<std::array<double, 3>> points;
  points.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1) * (nz + 1));
  for (int k = 0; k <= nz; ++k) {
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i <= nx; ++i) points.push_back({sx * i / nx, sy * j / ny, sz * k / nz});
    }
  }
  auto id = [&](int i, int j, int k) { return (k * (ny + 1) + j) * (nx + 1) + i; };
  std::vector<std::vector<int>> cells;
  cells.reserve(static_cast<std::size_t>(6) * nx * ny * nz);
  std::array<int, 3> axes{0, 1, 2};
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        std::sort(axes.begin(), axes.end());
        do {
          std::array<int, 3> at{i, j, k};
          std::vector<int> tet{id(at[0], at[1], at[2])};
          for (int axis : axes) {
            ++at[axis];
            tet.push_back(id(at[0], at[1], at[2]));
          }
          cells.push_back(tet);
        } while (std::next_permutation(axes.begin(), axes.end()));
      }
    }
  }
  return compact(points, 3, cells);
}

Mesh bar_12k() { return box_tets(20, 10, 10, 2.0, 1.0, 1.0); }

}  // namespace fracture::generators
