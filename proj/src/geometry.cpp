#include "holesim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <sstream>
#include <stdexcept>

namespace holesim {

namespace {

constexpr double kMultipleTolerance = 1e-9;

bool is_multiple(double value, double unit) {
  if (unit <= 0.0) return false;
  const double q = value / unit;
  return std::abs(q - std::round(q)) <= kMultipleTolerance * std::max(1.0, q);
}

int whole_count(double value, double unit) {
  const double q = value / unit;
  const double r = std::round(q);
  if (std::abs(q - r) <= kMultipleTolerance * std::max(1.0, q)) return static_cast<int>(r);
  return static_cast<int>(std::ceil(q));
}

}  // namespace

GridSpec::GridSpec(double width, double height, double cell_side, double subregion_side)
    : width_(width), height_(height), cell_side_(cell_side), subregion_side_(subregion_side) {
  if (cell_side_ > 0.0 && width_ > 0.0 && height_ > 0.0) {
    cols_ = whole_count(width_, cell_side_);
    rows_ = whole_count(height_, cell_side_);
  }
  if (subregion_side_ > 0.0 && width_ > 0.0 && height_ > 0.0) {
    sub_cols_ = std::max(1, whole_count(width_, subregion_side_));
    sub_rows_ = std::max(1, whole_count(height_, subregion_side_));
  }
}

std::vector<std::string> GridSpec::violations() const {
  std::vector<std::string> out;
  auto fmt = [](const char* what, double v) {
    std::ostringstream os;
    os << what << " (got " << v << ")";
    return os.str();
  };
  if (!(width_ > 0.0) || !std::isfinite(width_)) out.push_back(fmt("grid.width must be > 0", width_));
  if (!(height_ > 0.0) || !std::isfinite(height_)) out.push_back(fmt("grid.height must be > 0", height_));
  if (!(cell_side_ > 0.0) || !std::isfinite(cell_side_)) {
    out.push_back(fmt("grid.cell_side must be > 0", cell_side_));
    return out;
  }
  if (!(subregion_side_ > 0.0)) {
    out.push_back(fmt("grid.subregion_side must be > 0", subregion_side_));
    return out;
  }
  if (!is_multiple(subregion_side_, cell_side_))
    out.push_back(fmt("grid.subregion_side must be a whole multiple of grid.cell_side", subregion_side_));
  if (width_ > 0.0 && !is_multiple(width_, subregion_side_))
    out.push_back(fmt("grid.width must be a whole multiple of grid.subregion_side", width_));
  if (height_ > 0.0 && !is_multiple(height_, subregion_side_))
    out.push_back(fmt("grid.height must be a whole multiple of grid.subregion_side", height_));
  return out;
}

Point GridSpec::center(Cell c) const {
  return {(c.ix + 0.5) * cell_side_, (c.iy + 0.5) * cell_side_};
}

Cell GridSpec::cell_of(Point p) const {
  int ix = static_cast<int>(std::floor(p.x / cell_side_));
  int iy = static_cast<int>(std::floor(p.y / cell_side_));
  ix = std::clamp(ix, 0, std::max(0, cols_ - 1));
  iy = std::clamp(iy, 0, std::max(0, rows_ - 1));
  return {ix, iy};
}

int GridSpec::subregion_of(Point p) const {
  int sx = static_cast<int>(std::floor(p.x / subregion_side_));
  int sy = static_cast<int>(std::floor(p.y / subregion_side_));
  sx = std::clamp(sx, 0, std::max(0, sub_cols_ - 1));
  sy = std::clamp(sy, 0, std::max(0, sub_rows_ - 1));
  return sy * sub_cols_ + sx;
}

double distance(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

bool cell_covered(Cell cell, Point sensor_pos, double radius, const GridSpec& grid) {
  if (!grid.contains(cell)) throw std::domain_error("cell_covered: cell outside grid");
  return distance(sensor_pos, grid.center(cell)) <= radius;
}

CellSet cells_in_radius(Point sensor_pos, double radius, const GridSpec& grid) {
  CellSet out;
  if (!(radius >= 0.0) || grid.cell_count() == 0) return out;
  const Cell own = grid.cell_of(sensor_pos);
  const int depth = static_cast<int>(std::ceil(radius / grid.cell_side()));

  // Quadrants share their axis rows/columns; duplicates are removed below.
  constexpr int kSigns[4][2] = {{+1, -1}, {-1, -1}, {-1, +1}, {+1, +1}};
  out.reserve(static_cast<std::size_t>(4 * (depth + 1) * (depth + 1)));
  for (const auto& s : kSigns) {
    for (int k1 = 0; k1 <= depth; ++k1) {
      for (int k2 = 0; k2 <= depth; ++k2) {
        const Cell c{own.ix + s[0] * k1, own.iy + s[1] * k2};
        if (!grid.contains(c)) continue;
        if (distance(sensor_pos, grid.center(c)) > radius) continue;
        out.push_back(c);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

CellSet annulus(Point sensor_pos, double r_l, double r_s, const GridSpec& grid) {
  if (!(r_l > 0.0) || !(r_l < r_s)) throw std::domain_error("annulus: requires 0 < r_l < r_s");
  return set_difference(cells_in_radius(sensor_pos, r_s, grid),
                        cells_in_radius(sensor_pos, r_l, grid));
}

double coverage_ratio(std::span<const Disk> sensors, const GridSpec& grid) {
  if (grid.cell_count() == 0) return 0.0;
  std::vector<char> hit(grid.cell_count(), 0);
  std::size_t covered = 0;
  for (const Disk& d : sensors) {
    for (const Cell& c : cells_in_radius(d.center, d.radius, grid)) {
      char& h = hit[grid.index(c)];
      if (!h) {
        h = 1;
        ++covered;
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(grid.cell_count());
}

double farthest_uncovered_distance(Point sensor_pos, const CellSet& uncovered, const GridSpec& grid) {
  if (uncovered.empty()) throw std::domain_error("farthest_uncovered_distance: empty cell set");
  double best = 0.0;
  for (const Cell& c : uncovered) best = std::max(best, distance(sensor_pos, grid.center(c)));
  return best;
}

CellSet hole_cells(const CellSet& q_l_minus_s, std::span<const CellSet* const> neighbor_q_l) {
  CellSet out;
  out.reserve(q_l_minus_s.size());
  for (const Cell& c : q_l_minus_s) {
    const bool seen = std::any_of(neighbor_q_l.begin(), neighbor_q_l.end(), [&](const CellSet* s) {
      return std::binary_search(s->begin(), s->end(), c);
    });
    if (!seen) out.push_back(c);
  }
  return out;
}

CellSet set_union(const CellSet& a, const CellSet& b) {
  CellSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

CellSet set_difference(const CellSet& a, const CellSet& b) {
  CellSet out;
  out.reserve(a.size());
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

CellSet set_intersection(const CellSet& a, const CellSet& b) {
  CellSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool intersects(const CellSet& a, const CellSet& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      return true;
    }
  }
  return false;
}

bool is_subset(const CellSet& sub, const CellSet& super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

CoverageSets compute_coverage_sets(Point pos, double r_l, double r_s, const GridSpec& grid) {
  CoverageSets sets;
  sets.q_l = cells_in_radius(pos, r_l, grid);
  sets.q_star = cells_in_radius(pos, r_s, grid);
  sets.q_l_minus_s = set_difference(sets.q_star, sets.q_l);
  return sets;
}

CoverageMap::CoverageMap(const GridSpec& grid) : grid_(grid), counts_(grid.cell_count(), 0) {}

void CoverageMap::add(Point pos, double radius) {
  for (const Cell& c : cells_in_radius(pos, radius, grid_)) {
    if (counts_[grid_.index(c)]++ == 0) ++covered_;
  }
}

void CoverageMap::remove(Point pos, double radius) {
  for (const Cell& c : cells_in_radius(pos, radius, grid_)) {
    int& n = counts_[grid_.index(c)];
    if (n <= 0) throw std::logic_error("CoverageMap::remove: disk was never added");
    if (--n == 0) --covered_;
  }
}

bool CoverageMap::all_covered(const CellSet& cells) const {
  return std::all_of(cells.begin(), cells.end(), [&](const Cell& c) { return covered(c); });
}

CellSet CoverageMap::uncovered(const CellSet& cells) const {
  CellSet out;
  for (const Cell& c : cells)
    if (!covered(c)) out.push_back(c);
  return out;
}

double CoverageMap::ratio() const {
  if (counts_.empty()) return 0.0;
  return static_cast<double>(covered_) / static_cast<double>(counts_.size());
}

}  // namespace holesim
