#include "xorlab/boundary.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace xorlab {

namespace {

const char* region_fill(int sign) {
  if (sign > 0) return "#aec7e8";
  if (sign < 0) return "#ff9896";
  return "#cccccc";
}

const char* point_fill(int label) { return label > 0 ? "#1f77b4" : "#d62728"; }

}  // namespace

double BoundaryGrid::x0_center(int col) const {
  return bounds.x0_min + (col + 0.5) * (bounds.x0_max - bounds.x0_min) / res;
}

double BoundaryGrid::x1_center(int row) const {
  return bounds.x1_min + (row + 0.5) * (bounds.x1_max - bounds.x1_min) / res;
}

BoundaryGrid decision_boundary_grid(const NetworkParams& params, const GridBounds& bounds,
                                    int res) {
  if (params.dim() != 2)
    throw std::invalid_argument("decision boundary grids require a d = 2 network");
  if (res < 1) throw std::invalid_argument("grid resolution must be >= 1");
  if (!(bounds.x0_max > bounds.x0_min && bounds.x1_max > bounds.x1_min))
    throw std::invalid_argument("grid bounds are empty");

  BoundaryGrid grid;
  grid.bounds = bounds;
  grid.res = res;
  grid.sign.resize(static_cast<std::size_t>(res) * res);

  Matrix points(res, 2);
  for (int row = 0; row < res; ++row) {
    for (int col = 0; col < res; ++col) {
      points(col, 0) = grid.x0_center(col);
      points(col, 1) = grid.x1_center(row);
    }
    const Vector f = forward_batch(params, points);
    for (int col = 0; col < res; ++col)
      grid.sign[static_cast<std::size_t>(row) * res + col] =
          f(col) > 0.0 ? 1 : (f(col) < 0.0 ? -1 : 0);
  }
  return grid;
}

void write_grid_csv(const BoundaryGrid& grid, std::ostream& out) {
  out << "x0,x1,sign\n";
  char buf[64];
  for (int row = 0; row < grid.res; ++row) {
    for (int col = 0; col < grid.res; ++col) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", grid.x0_center(col),
                    grid.x1_center(row), grid.at(row, col));
      out << buf;
    }
  }
}

BoundaryGrid read_grid_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("x0,x1,sign", 0) != 0)
    throw std::runtime_error("grid CSV missing header");
  std::vector<double> x0s, x1s;
  std::vector<int> signs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    x0s.push_back(std::stod(cell));
    std::getline(ls, cell, ',');
    x1s.push_back(std::stod(cell));
    std::getline(ls, cell, ',');
    signs.push_back(std::stoi(cell));
  }
  const auto total = signs.size();
  const int res = static_cast<int>(std::lround(std::sqrt(static_cast<double>(total))));
  if (static_cast<std::size_t>(res) * res != total)
    throw std::runtime_error("grid CSV is not square");
  BoundaryGrid grid;
  grid.res = res;
  grid.sign = signs;
  const double dx0 = res > 1 ? x0s[1] - x0s[0] : 1.0;
  const double dx1 = res > 1 ? x1s[static_cast<std::size_t>(res)] - x1s[0] : 1.0;
  grid.bounds.x0_min = x0s[0] - 0.5 * dx0;
  grid.bounds.x0_max = x0s[static_cast<std::size_t>(res - 1)] + 0.5 * dx0;
  grid.bounds.x1_min = x1s[0] - 0.5 * dx1;
  grid.bounds.x1_max = x1s.back() + 0.5 * dx1;
  return grid;
}

void write_boundary_svg(const BoundaryGrid& grid, const Dataset* overlay,
                        std::size_t max_points, std::ostream& out) {
  const int res = grid.res;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" viewBox=\"0 0 "
      << res << " " << res << "\">\n";

  // One rect per same-sign run per row, in grid units. SVG y grows downward,
  // so row r maps to y = res - 1 - r.
  for (int row = 0; row < res; ++row) {
    int col = 0;
    while (col < res) {
      const int s = grid.at(row, col);
      int end = col + 1;
      while (end < res && grid.at(row, end) == s) ++end;
      out << "<rect x=\"" << col << "\" y=\"" << (res - 1 - row) << "\" width=\"" << (end - col)
          << "\" height=\"1\" fill=\"" << region_fill(s) << "\"/>\n";
      col = end;
    }
  }

  if (overlay != nullptr && overlay->dim() == 2) {
    const double sx = res / (grid.bounds.x0_max - grid.bounds.x0_min);
    const double sy = res / (grid.bounds.x1_max - grid.bounds.x1_min);
    const double r = res / 160.0;
    const std::size_t count = std::min(max_points, overlay->n());
    char buf[256];
    for (std::size_t i = 0; i < count; ++i) {
      const double cx = (overlay->points(static_cast<Eigen::Index>(i), 0) - grid.bounds.x0_min) * sx;
      const double cy = res - (overlay->points(static_cast<Eigen::Index>(i), 1) - grid.bounds.x1_min) * sy;
      if (cx < 0 || cx > res || cy < 0 || cy > res) continue;
      if (overlay->is_noisy(i)) {
        std::snprintf(buf, sizeof buf,
                      "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"%.3f\" fill=\"%s\" stroke=\"black\" "
                      "stroke-width=\"%.3f\"/>\n",
                      cx, cy, r, point_fill(overlay->labels[i]), r / 3.0);
      } else {
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"%.3f\" fill=\"%s\"/>\n",
                      cx, cy, r, point_fill(overlay->labels[i]));
      }
      out << buf;
    }
  }
  out << "</svg>\n";
}

}  // namespace xorlab
