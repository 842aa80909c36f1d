#pragma once

#include <vector>

namespace fpif {

/// Uniform cell grid on [x_min, x_max]. Cell centers sit at
/// x_min + (i + 1/2) dx. Solver grids should place x = 0 on a cell center
/// (see Grid::centered); the reinjection source then acts at 0 exactly.
struct Grid {
  double x_min = 0.0;
  double x_max = 0.0;
  int n_cells = 0;
  int index_of_zero = -1;  // cell whose span contains x = 0, -1 if outside

  Grid() = default;
  Grid(double x_min, double x_max, int n_cells);

  /// Grid with the given spacing whose extents cover [x_min, x_max] and whose
  /// cell centers include x = 0 (extents are widened by at most one cell).
  static Grid centered(double x_min, double x_max, double dx);

  /// Grid with extents exactly [x_min, x_max] and spacing dx (rounded count).
  static Grid spanning(double x_min, double x_max, double dx);

  double dx() const { return (x_max - x_min) / n_cells; }
  double center(int i) const { return x_min + (i + 0.5) * dx(); }
  double face(int i) const { return x_min + i * dx(); }
  int cell_of(double x) const;
  std::vector<double> centers() const;

  bool operator==(const Grid& other) const = default;
};

}  // namespace fpif
