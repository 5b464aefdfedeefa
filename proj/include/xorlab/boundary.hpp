#pragma once

#include <cstddef>
#include <iosfwd>

#include "xorlab/distribution.hpp"
#include "xorlab/network.hpp"

namespace xorlab {

struct GridBounds {
  double x0_min = -2.0, x0_max = 2.0;
  double x1_min = -2.0, x1_max = 2.0;
};

/// sgn(f) sampled at the centers of a res x res grid of cells. Entry
/// (row, col) covers x1 band `row` (ascending) and x0 band `col`.
struct BoundaryGrid {
  GridBounds bounds;
  int res = 0;
  std::vector<int> sign;  // row-major, values in {-1, 0, +1}

  int at(int row, int col) const { return sign[static_cast<std::size_t>(row) * res + col]; }
  double x0_center(int col) const;
  double x1_center(int row) const;
};

/// Only defined for d = 2 networks.
BoundaryGrid decision_boundary_grid(const NetworkParams& params, const GridBounds& bounds,
                                    int res);

/// Rows x0,x1,sign, x1-major ascending then x0 ascending.
void write_grid_csv(const BoundaryGrid& grid, std::ostream& out);
BoundaryGrid read_grid_csv(std::istream& in);

/// Two-color sign regions (one <rect> per same-sign run in grid units) with
/// optional training points overlaid, colored by observed label and outlined
/// when noisy. At most `max_points` points are drawn.
void write_boundary_svg(const BoundaryGrid& grid, const Dataset* overlay,
                        std::size_t max_points, std::ostream& out);

}  // namespace xorlab
