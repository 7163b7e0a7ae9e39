#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "rotforch/field_expr.hpp"

namespace rotforch {

using Point = std::array<double, 3>;

struct Rect {
  double lx = 1.0;
  double ly = 1.0;
};

enum class Side { left, right, bottom, top };
enum class BoundaryTag { gamma1, gamma2 };

std::string to_string(Side s);
Side side_from_string(const std::string& s);
std::string to_string(BoundaryTag t);
BoundaryTag tag_from_string(const std::string& s);

// A piece of one side of the rectangle, parametrized by arclength
// along that side (x for bottom/top, y for left/right).
struct BoundarySegment {
  Side side = Side::left;
  double s0 = 0.0;
  double s1 = 1.0;
  BoundaryTag tag = BoundaryTag::gamma1;
};

class BoundaryPartition {
 public:
  BoundaryPartition() = default;
  explicit BoundaryPartition(std::vector<BoundarySegment> segments);

  static BoundaryPartition uniform(const Rect& rect, BoundaryTag tag);

  // Throws InvalidInput unless the segments tile every side exactly.
  void validate(const Rect& rect) const;
  BoundaryTag tag_at(Side side, double s) const;
  const std::vector<BoundarySegment>& segments() const { return segments_; }

 private:
  std::vector<BoundarySegment> segments_;
};

struct Face {
  double x = 0.0;
  double y = 0.0;
  // Unit normal; outward for boundary faces, +x or +y for interior faces.
  double nx = 0.0;
  double ny = 0.0;
  double length = 0.0;
  // Cells on the -normal and +normal sides; -1 outside the domain.
  long minus = -1;
  long plus = -1;
  bool boundary = false;
  Side side = Side::left;
  BoundaryTag tag = BoundaryTag::gamma1;
};

// Uniform cell-centred grid on [0,lx] x [0,ly]. Cell (i, j) has index
// j * nx + i. Faces: all x-normal faces, then all y-normal faces.
class Grid {
 public:
  Grid(const Rect& rect, int nx, int ny, const BoundaryPartition& partition);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  const Rect& rect() const { return rect_; }
  std::size_t cell_count() const { return static_cast<std::size_t>(nx_) * ny_; }
  double cell_area() const { return hx_ * hy_; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
  double xc(int i) const { return (i + 0.5) * hx_; }
  double yc(int j) const { return (j + 0.5) * hy_; }
  Point center(std::size_t c) const;

  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<std::size_t>& boundary_faces() const { return boundary_faces_; }
  // Indices into faces(): left, right, bottom, top face of cell c.
  std::array<std::size_t, 4> cell_faces(std::size_t c) const;
  const BoundaryPartition& partition() const { return partition_; }
  double max_abs_x() const;

 private:
  Rect rect_;
  int nx_;
  int ny_;
  double hx_;
  double hy_;
  BoundaryPartition partition_;
  std::vector<Face> faces_;
  std::vector<std::size_t> boundary_faces_;
};

// Domain plus scaled porosity field phi-tilde in (0,1).
struct PorousDomain {
  Rect rect;
  FieldExpr porosity = FieldExpr::constant(0.5);

  double phi_tilde(double x, double y) const;
  // Throws InvalidInput naming the cell if phi-tilde leaves (0,1).
  void validate(const Grid& grid) const;
};

struct BoundaryForcing {
  FieldExpr psi1;  // active on Gamma_1
  FieldExpr psi2;  // active on Gamma_2

  // Zero-extended values at a boundary face: {psi1, psi2}.
  std::array<double, 2> at(const Face& face, const Rect& rect, double t) const;
};

// Cell-centre samples of an expression at time t. Domain errors are
// rethrown naming the cell.
std::vector<double> materialize(const FieldExpr& expr, const Grid& grid, double t);

EvalContext context_at(const Rect& rect, double x, double y, double t);

}  // namespace rotforch
