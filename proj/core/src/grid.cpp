#include "fpif/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace fpif {

Grid::Grid(double x_min_, double x_max_, int n_cells_)
    : x_min(x_min_), x_max(x_max_), n_cells(n_cells_) {
  if (!(x_max > x_min) || n_cells <= 0)
    throw std::invalid_argument("grid: need x_min < x_max and n_cells > 0");
  index_of_zero = (x_min <= 0.0 && 0.0 < x_max) ? cell_of(0.0) : -1;
}

Grid Grid::centered(double x_min, double x_max, double dx) {
  if (!(dx > 0.0)) throw std::invalid_argument("grid: dx must be positive");
  // choose x_min' = -(k + 1/2) dx <= x_min so that 0 lands on a center
  const double k = std::ceil(x_min / -dx - 0.5);
  const double lo = -(k + 0.5) * dx;
  const int n = static_cast<int>(std::ceil((x_max - lo) / dx - 1e-12));
  return Grid(lo, lo + n * dx, n);
}

Grid Grid::spanning(double x_min, double x_max, double dx) {
  if (!(dx > 0.0)) throw std::invalid_argument("grid: dx must be positive");
  const int n = static_cast<int>(std::llround((x_max - x_min) / dx));
  if (n <= 0) throw std::invalid_argument("grid: empty span");
  return Grid(x_min, x_max, n);
}

int Grid::cell_of(double x) const {
  const double s = (x - x_min) / dx();
  int i = static_cast<int>(std::floor(s));
  if (i < 0) i = 0;
  if (i >= n_cells) i = n_cells - 1;
  return i;
}

std::vector<double> Grid::centers() const {
  std::vector<double> xs(n_cells);
  for (int i = 0; i < n_cells; ++i) xs[i] = center(i);
  return xs;
}

}  // namespace fpif
