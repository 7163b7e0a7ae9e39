#include "rotforch/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "rotforch/errors.hpp"

namespace rotforch {

namespace {

constexpr double kTileTol = 1e-12;

double side_length(const Rect& r, Side s) {
  return (s == Side::left || s == Side::right) ? r.ly : r.lx;
}

}  // namespace

std::string to_string(Side s) {
  switch (s) {
    case Side::left:
      return "left";
    case Side::right:
      return "right";
    case Side::bottom:
      return "bottom";
    case Side::top:
      return "top";
  }
  return "?";
}

Side side_from_string(const std::string& s) {
  if (s == "left") return Side::left;
  if (s == "right") return Side::right;
  if (s == "bottom") return Side::bottom;
  if (s == "top") return Side::top;
  throw InvalidInput("unknown boundary side '" + s + "'");
}

std::string to_string(BoundaryTag t) { return t == BoundaryTag::gamma1 ? "G1" : "G2"; }

BoundaryTag tag_from_string(const std::string& s) {
  if (s == "G1" || s == "gamma1") return BoundaryTag::gamma1;
  if (s == "G2" || s == "gamma2") return BoundaryTag::gamma2;
  throw InvalidInput("unknown boundary tag '" + s + "'");
}

BoundaryPartition::BoundaryPartition(std::vector<BoundarySegment> segments)
    : segments_(std::move(segments)) {}

BoundaryPartition BoundaryPartition::uniform(const Rect& rect, BoundaryTag tag) {
  std::vector<BoundarySegment> segs;
  for (Side s : {Side::left, Side::right, Side::bottom, Side::top}) {
    segs.push_back({s, 0.0, side_length(rect, s), tag});
  }
  return BoundaryPartition(std::move(segs));
}

void BoundaryPartition::validate(const Rect& rect) const {
  for (Side s : {Side::left, Side::right, Side::bottom, Side::top}) {
    std::vector<std::pair<double, double>> iv;
    for (const auto& seg : segments_) {
      if (seg.side != s) continue;
      if (!(seg.s1 > seg.s0)) {
        throw InvalidInput("boundary segment on " + to_string(s) + " has empty range");
      }
      iv.emplace_back(seg.s0, seg.s1);
    }
    std::sort(iv.begin(), iv.end());
    const double len = side_length(rect, s);
    double cursor = 0.0;
    for (const auto& [a, b] : iv) {
      if (a < cursor - kTileTol) {
        throw InvalidInput("boundary segments overlap on " + to_string(s) + " near s=" +
                           format_number(a));
      }
      if (a > cursor + kTileTol) {
        throw InvalidInput("boundary gap on " + to_string(s) + " between s=" +
                           format_number(cursor) + " and s=" + format_number(a));
      }
      cursor = b;
    }
    if (std::abs(cursor - len) > kTileTol) {
      throw InvalidInput("boundary segments do not cover " + to_string(s) + " up to s=" +
                         format_number(len));
    }
  }
}

BoundaryTag BoundaryPartition::tag_at(Side side, double s) const {
  for (const auto& seg : segments_) {
    if (seg.side == side && s >= seg.s0 && s < seg.s1) return seg.tag;
  }
  // s at the far end of the last segment
  for (const auto& seg : segments_) {
    if (seg.side == side && s >= seg.s0 && s <= seg.s1) return seg.tag;
  }
  throw InvalidInput("no boundary segment covers " + to_string(side) + " at s=" + format_number(s));
}

Grid::Grid(const Rect& rect, int nx, int ny, const BoundaryPartition& partition)
    : rect_(rect), nx_(nx), ny_(ny), partition_(partition) {
  if (nx < 2 || ny < 2) throw InvalidInput("grid needs at least 2 cells per direction");
  if (!(rect.lx > 0.0) || !(rect.ly > 0.0)) throw InvalidInput("domain extents must be positive");
  partition_.validate(rect_);
  hx_ = rect.lx / nx;
  hy_ = rect.ly / ny;
  faces_.reserve(static_cast<std::size_t>(nx + 1) * ny + static_cast<std::size_t>(ny + 1) * nx);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      Face f;
      f.x = i * hx_;
      f.y = yc(j);
      f.length = hy_;
      f.nx = 1.0;
      if (i == 0 || i == nx) {
        f.boundary = true;
        f.side = i == 0 ? Side::left : Side::right;
        f.nx = i == 0 ? -1.0 : 1.0;
        f.minus = static_cast<long>(index(i == 0 ? 0 : nx - 1, j));
        f.tag = partition_.tag_at(f.side, f.y);
      } else {
        f.minus = static_cast<long>(index(i - 1, j));
        f.plus = static_cast<long>(index(i, j));
      }
      faces_.push_back(f);
    }
  }
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      Face f;
      f.x = xc(i);
      f.y = j * hy_;
      f.length = hx_;
      f.ny = 1.0;
      if (j == 0 || j == ny) {
        f.boundary = true;
        f.side = j == 0 ? Side::bottom : Side::top;
        f.ny = j == 0 ? -1.0 : 1.0;
        f.minus = static_cast<long>(index(i, j == 0 ? 0 : ny - 1));
        f.tag = partition_.tag_at(f.side, f.x);
      } else {
        f.minus = static_cast<long>(index(i, j - 1));
        f.plus = static_cast<long>(index(i, j));
      }
      faces_.push_back(f);
    }
  }
  for (std::size_t k = 0; k < faces_.size(); ++k) {
    if (faces_[k].boundary) boundary_faces_.push_back(k);
  }
}

Point Grid::center(std::size_t c) const {
  const int i = static_cast<int>(c % nx_);
  const int j = static_cast<int>(c / nx_);
  return {xc(i), yc(j), 0.0};
}

std::array<std::size_t, 4> Grid::cell_faces(std::size_t c) const {
  const std::size_t i = c % nx_;
  const std::size_t j = c / nx_;
  const std::size_t xoff = 0;
  const std::size_t yoff = static_cast<std::size_t>(nx_ + 1) * ny_;
  return {xoff + j * (nx_ + 1) + i, xoff + j * (nx_ + 1) + i + 1, yoff + j * nx_ + i,
          yoff + (j + 1) * nx_ + i};
}

double Grid::max_abs_x() const { return std::hypot(rect_.lx, rect_.ly); }

double PorousDomain::phi_tilde(double x, double y) const {
  return porosity.eval(context_at(rect, x, y, 0.0));
}

void PorousDomain::validate(const Grid& grid) const {
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const Point p = grid.center(c);
    double v = 0.0;
    try {
      v = phi_tilde(p[0], p[1]);
    } catch (const FieldDomainError& e) {
      throw InvalidInput("porosity evaluation failed in cell " + std::to_string(c) + ": " + e.what());
    }
    if (!(v > 0.0 && v < 1.0)) {
      throw InvalidInput("porosity " + format_number(v) + " outside (0,1) in cell " +
                         std::to_string(c));
    }
  }
}

std::array<double, 2> BoundaryForcing::at(const Face& face, const Rect& rect, double t) const {
  const EvalContext ctx = context_at(rect, face.x, face.y, t);
  if (face.tag == BoundaryTag::gamma1) return {psi1.eval(ctx), 0.0};
  return {0.0, psi2.eval(ctx)};
}

EvalContext context_at(const Rect& rect, double x, double y, double t) {
  EvalContext c;
  c.x = x;
  c.y = y;
  c.t = t;
  c.lx = rect.lx;
  c.ly = rect.ly;
  return c;
}

std::vector<double> materialize(const FieldExpr& expr, const Grid& grid, double t) {
  std::vector<double> out(grid.cell_count());
  for (std::size_t c = 0; c < out.size(); ++c) {
    const Point p = grid.center(c);
    try {
      out[c] = expr.eval(context_at(grid.rect(), p[0], p[1], t));
    } catch (const FieldDomainError& e) {
      throw FieldDomainError("cell " + std::to_string(c) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace rotforch
