#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "renorm/error.hpp"

namespace renorm {

using Point = std::array<double, 2>;

/// Uniform periodic dyadic grid on the torus [0,L)^dim with spacing 2^-J.
struct Grid {
  int dim = 1;
  int J = 0;  // finest level
  int L = 8;  // box side

  Grid() = default;
  Grid(int dim_, int J_, int L_);

  std::size_t per_axis() const { return static_cast<std::size_t>(L) << J; }
  std::size_t size() const { return dim == 1 ? per_axis() : per_axis() * per_axis(); }
  double spacing() const;
  double cell_volume() const;
  double volume() const;

  /// Midpoint of the cell with flat index `idx` (row-major in 2-D, axis 0 is the row).
  Point position(std::size_t idx) const;
  std::array<std::size_t, 2> unflatten(std::size_t idx) const;
  std::size_t flatten(std::size_t i0, std::size_t i1) const { return i0 * per_axis() + i1; }

  /// Shortest signed offset a-b on the circle of circumference L.
  double wrap_offset(double a, double b) const;
  double periodic_distance(const Point& a, const Point& b) const;

  friend bool operator==(const Grid&, const Grid&) = default;
};

class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(const Grid& grid, double fill = 0.0);
  GridFunction(const Grid& grid, std::vector<double> samples);

  /// Samples `fn` at every cell midpoint.
  static GridFunction sample(const Grid& grid, const std::function<double(const Point&)>& fn);
  /// 1-D only: exact cell averages from an antiderivative F, i.e. (F(b)-F(a))/h.
  static GridFunction cell_average(const Grid& grid, const std::function<double(double)>& antiderivative);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return samples_.size(); }
  std::span<const double> samples() const { return samples_; }
  std::span<double> samples() { return samples_; }
  std::vector<double>& data() { return samples_; }
  const std::vector<double>& data() const { return samples_; }
  double operator[](std::size_t i) const { return samples_[i]; }
  double& operator[](std::size_t i) { return samples_[i]; }

  /// Throws NonFinite if any sample is NaN or infinite.
  void check_finite() const;

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(double s);

  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(GridFunction a, double s) { return a *= s; }
  friend GridFunction operator*(double s, GridFunction a) { return a *= s; }

 private:
  Grid grid_;
  std::vector<double> samples_;
};

void require_same_grid(const GridFunction& a, const GridFunction& b);

GridFunction pointwise_product(const GridFunction& a, const GridFunction& b);
GridFunction abs(const GridFunction& f);

/// Midpoint quadrature: h^dim times the compensated sample sum.
double integrate(const GridFunction& f);
double inner_product(const GridFunction& a, const GridFunction& b);
double sup_norm(const GridFunction& f);
/// (∫|f|^p)^{1/p}; a quasi-norm for p < 1.
double lp_norm(const GridFunction& f, double p);
double mean(const GridFunction& f);

struct DyadicCube {
  int j = 0;
  std::array<long, 2> k{0, 0};
  int dim = 1;

  double side() const;
  double volume() const;
  bool in_D0() const { return j >= 0; }
  Point center() const;
  friend bool operator==(const DyadicCube&, const DyadicCube&) = default;
};

struct Ball {
  Point center{0.0, 0.0};
  double radius = 1.0;
  int dim = 1;

  Ball() = default;
  Ball(Point c, double r, int d);
  /// Interval length in 1-D, disk area in 2-D.
  double measure() const;
};

bool contains(const Grid& grid, const Ball& ball, std::size_t idx);
/// Flat indices of cell midpoints strictly inside the ball (periodic distance).
std::vector<std::size_t> ball_indices(const Grid& grid, const Ball& ball);

GridFunction restrict_to_ball(const GridFunction& f, const Ball& ball);
Ball cube_to_support_ball(const DyadicCube& cube, double m);

// Serialization: 16-byte header of little-endian int32 (dim, J, L, reserved)
// followed by little-endian float64 samples.
void write_binary(std::ostream& os, const GridFunction& f);
GridFunction read_binary(std::istream& is);
void write_csv(std::ostream& os, const GridFunction& f);

}  // namespace renorm
