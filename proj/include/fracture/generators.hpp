#pragma once

#include "fracture/mesh.hpp"

#include <functional>

namespace fracture::generators {

/// Unit square split along the (0,0)-(1,1) diagonal into two triangles.
Mesh unit_square();

/// Six-triangle hourglass on [0,2]x[0,1] whose two lobes meet across a waist
/// of two short edges at x = 1.
Mesh pinch();

/// Structured triangulation of [0,width]x[0,height] with nx x ny cells,
/// alternating cell diagonals. `keep(i, j)` drops cells; `warp` moves
/// vertices after placement.
Mesh grid_rectangle(int nx, int ny, double width, double height,
                    const std::function<bool(int, int)>& keep = {},
                    const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& warp = {});

/// Refined hourglass: grid on [0,2]x[0,1] squeezed to `waist` height at x = 1.
Mesh hourglass(int nx, int ny, double waist = 0.2);

/// 4x2 block with a one-cell-wide slot cut upward from the bottom edge at the
/// middle, reaching `notch_depth` cells.
Mesh notched_block(int cells_per_unit = 4, int notch_depth = 4);

/// Unit cube as one central tetrahedron and four corner tetrahedra.
Mesh cube_5tet();

/// Box [0,sx]x[0,sy]x[0,sz] with nx x ny x nz cubes, six tetrahedra each.
Mesh box_tets(int nx, int ny, int nz, double sx, double sy, double sz);

/// 20x10x10 cubes on a 2x1x1 bar: 12000 tetrahedra.
Mesh bar_12k();

}  // namespace fracture::generators
