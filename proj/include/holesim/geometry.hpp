#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace holesim {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

/// Grid cell by column/row index. Ordered row-major so sorted sets iterate
/// the grid the same way a full scan does.
struct Cell {
  int ix = 0;
  int iy = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend std::strong_ordering operator<=>(const Cell& a, const Cell& b) {
    if (auto c = a.iy <=> b.iy; c != 0) return c;
    return a.ix <=> b.ix;
  }
};

/// Sorted, duplicate-free list of cells.
using CellSet = std::vector<Cell>;

/// Target area cut into square cells, and into square sub-regions (clusters)
/// that are whole multiples of the cell side.
class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(double width, double height, double cell_side, double subregion_side);

  double width() const { return width_; }
  double height() const { return height_; }
  double cell_side() const { return cell_side_; }
  double subregion_side() const { return subregion_side_; }

  int cols() const { return cols_; }
  int rows() const { return rows_; }
  std::size_t cell_count() const { return static_cast<std::size_t>(cols_) * rows_; }

  int subregion_cols() const { return sub_cols_; }
  int subregion_rows() const { return sub_rows_; }
  int subregion_count() const { return sub_cols_ * sub_rows_; }

  bool contains(Cell c) const { return c.ix >= 0 && c.iy >= 0 && c.ix < cols_ && c.iy < rows_; }
  bool contains(Point p) const { return p.x >= 0.0 && p.y >= 0.0 && p.x <= width_ && p.y <= height_; }
  Point center(Cell c) const;
  /// Cell holding p; points on the far edges map into the last row/column.
  Cell cell_of(Point p) const;
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.iy) * cols_ + c.ix; }
  Cell cell_at(std::size_t index) const {
    return {static_cast<int>(index % cols_), static_cast<int>(index / cols_)};
  }
  /// Sub-region index (row-major) of the sub-region holding p.
  int subregion_of(Point p) const;

  /// Human-readable list of violated constraints; empty when valid.
  std::vector<std::string> violations() const;

 private:
  double width_ = 0.0;
  double height_ = 0.0;
  double cell_side_ = 1.0;
  double subregion_side_ = 1.0;
  int cols_ = 0;
  int rows_ = 0;
  int sub_cols_ = 0;
  int sub_rows_ = 0;
};

struct Disk {
  Point center;
  double radius = 0.0;
};

double distance(Point a, Point b);

/// True iff the cell's center lies within `radius` of the sensor (inclusive).
/// Throws std::domain_error for a cell outside the grid.
bool cell_covered(Cell cell, Point sensor_pos, double radius, const GridSpec& grid);

/// Cells whose centers lie within `radius` of `sensor_pos`, clipped to the
/// grid. Built from the four quadrant boxes around the sensor's cell, each
/// H = ceil(radius / l_c) cells deep, with out-of-disk cells filtered out.
CellSet cells_in_radius(Point sensor_pos, double radius, const GridSpec& grid);

/// cells_in_radius(r_s) minus cells_in_radius(r_l). Requires 0 < r_l < r_s.
CellSet annulus(Point sensor_pos, double r_l, double r_s, const GridSpec& grid);

/// Fraction of grid cells covered by at least one disk.
double coverage_ratio(std::span<const Disk> sensors, const GridSpec& grid);

/// Largest sensor-to-cell-center distance over `uncovered`. Throws
/// std::domain_error on an empty set.
double farthest_uncovered_distance(Point sensor_pos, const CellSet& uncovered,
                                   const GridSpec& grid);

/// Hole cells of a node: its annulus minus everything its neighbours cover.
CellSet hole_cells(const CellSet& q_l_minus_s, std::span<const CellSet* const> neighbor_q_l);

// Set algebra over sorted CellSets.
CellSet set_union(const CellSet& a, const CellSet& b);
CellSet set_difference(const CellSet& a, const CellSet& b);
CellSet set_intersection(const CellSet& a, const CellSet& b);
bool intersects(const CellSet& a, const CellSet& b);
bool is_subset(const CellSet& sub, const CellSet& super);

/// Per-node coverage bookkeeping refreshed in every update round.
struct CoverageSets {
  CellSet q_l;          // cells within the current sensing radius
  CellSet q_star;       // cells within the maximum sensing radius
  CellSet q_l_minus_s;  // q_star - q_l
  CellSet q_hat;        // q_l_minus_s not covered by any neighbour
};

/// q_l, q_star and q_l_minus_s for a node; q_hat is left empty.
CoverageSets compute_coverage_sets(Point pos, double r_l, double r_s, const GridSpec& grid);

/// Per-cell count of covering disks. Used by the simulator for global
/// coverage queries without rescanning every sensor.
class CoverageMap {
 public:
  explicit CoverageMap(const GridSpec& grid);

  void add(Point pos, double radius);
  void remove(Point pos, double radius);

  bool covered(Cell c) const { return counts_[grid_.index(c)] > 0; }
  int count(Cell c) const { return counts_[grid_.index(c)]; }
  bool all_covered(const CellSet& cells) const;
  CellSet uncovered(const CellSet& cells) const;
  std::size_t covered_cells() const { return covered_; }
  double ratio() const;
  const GridSpec& grid() const { return grid_; }

 private:
  GridSpec grid_;
  std::vector<int> counts_;
  std::size_t covered_ = 0;
};

}  // namespace holesim
