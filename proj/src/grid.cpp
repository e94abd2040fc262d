#include "lmc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lmc/error.hpp"

namespace lmc {

Lattice::Lattice(const ConvexDomain& domain, int resolution)
    : domain_(domain), dim_(domain.dim()), resolution_(resolution) {
  if (dim_ < 1 || dim_ > 2) {
    throw Error("grid", "unsupported-dimension",
                "lattices are one- or two-dimensional");
  }
  if (resolution < 9) {
    throw Error("grid", "coarse-resolution",
                "resolution too coarse for domain (need >= 9 nodes per axis)");
  }
  const double half = domain.half_extent().maxCoeff();
  spacing_ = 2.0 * half / (resolution - 1);
  origin_ = domain.center() - Vec::Constant(dim_, half);

  const int total = dim_ == 1 ? resolution : resolution * resolution;
  kinds_.assign(static_cast<std::size_t>(total), NodeKind::exterior);
  boundary_slot_.assign(static_cast<std::size_t>(total), -1);
  for (int idx = 0; idx < total; ++idx) {
    if (domain.value(position(idx)) >= -0.5 * spacing_) {
      kinds_[static_cast<std::size_t>(idx)] = NodeKind::interior;
    }
  }

  // Demote nodes lacking a full 3^n neighbourhood.
  std::vector<NodeKind> classified = kinds_;
  for (int idx = 0; idx < total; ++idx) {
    if (kinds_[static_cast<std::size_t>(idx)] == NodeKind::exterior) continue;
    bool full = true;
    const auto [i, j] = coords(idx);
    const int jlo = dim_ == 2 ? -1 : 0, jhi = dim_ == 2 ? 1 : 0;
    for (int dj = jlo; dj <= jhi && full; ++dj) {
      for (int di = -1; di <= 1 && full; ++di) {
        const int ii = i + di, jj = j + dj;
        if (ii < 0 || ii >= resolution || jj < 0 ||
            (dim_ == 2 && jj >= resolution)) {
          full = false;
        } else if (kinds_[static_cast<std::size_t>(index(ii, jj))] ==
                   NodeKind::exterior) {
          full = false;
        }
      }
    }
    if (!full) classified[static_cast<std::size_t>(idx)] = NodeKind::boundary;
  }
  kinds_ = std::move(classified);

  for (int idx = 0; idx < total; ++idx) {
    const NodeKind k = kinds_[static_cast<std::size_t>(idx)];
    if (k == NodeKind::exterior) continue;
    active_.push_back(idx);
    if (k == NodeKind::interior) {
      interior_.push_back(idx);
      continue;
    }
    BoundaryNode b;
    b.index = idx;
    const Vec x = position(idx);
    const Vec g = domain.gradient(x);
    b.projection = x - domain.value(x) * g / g.squaredNorm();
    const Vec gp = domain.gradient(b.projection);
    b.normal = gp / gp.norm();
    for (int axis = 0; axis < dim_; ++axis) {
      for (int side = 0; side < 2; ++side) {
        const int dir = side == 0 ? -1 : 1;
        b.available[axis][side] = active(neighbor(idx, axis, dir)) &&
                                  active(neighbor(idx, axis, 2 * dir));
      }
      const int preferred = b.normal(axis) < 0.0 ? -1 : 1;
      if (b.can_use(axis, preferred)) {
        b.default_dir[axis] = preferred;
      } else if (b.can_use(axis, -preferred)) {
        b.default_dir[axis] = -preferred;
      } else {
        throw Error("grid", "coarse-resolution",
                    "resolution too coarse for domain: boundary node lacks "
                    "two inward neighbours");
      }
    }
    boundary_slot_[static_cast<std::size_t>(idx)] =
        static_cast<int>(boundary_.size());
    boundary_.push_back(std::move(b));
  }
  if (interior_.empty()) {
    throw Error("grid", "coarse-resolution", "no interior nodes");
  }

  nearest_interior_.reserve(boundary_.size());
  for (const BoundaryNode& b : boundary_) {
    const Vec x = position(b.index);
    int best = interior_.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (int idx : interior_) {
      const double d = (position(idx) - x).squaredNorm();
      if (d < best_d) best_d = d, best = idx;
    }
    nearest_interior_.push_back(best);
  }
}

int Lattice::neighbor(int idx, int axis, int steps) const {
  const auto c = coords(idx);
  const int moved = c[static_cast<std::size_t>(axis)] + steps;
  if (moved < 0 || moved >= resolution_) return -1;
  return idx + steps * stride(axis);
}

Vec Lattice::position(int idx) const {
  const auto c = coords(idx);
  Vec x = origin_;
  for (int axis = 0; axis < dim_; ++axis) {
    x(axis) += spacing_ * c[static_cast<std::size_t>(axis)];
  }
  return x;
}

Orientation Lattice::default_orientation() const {
  Orientation o;
  o.reserve(boundary_.size());
  for (const BoundaryNode& b : boundary_) o.push_back(b.default_dir);
  return o;
}

std::shared_ptr<const Lattice> build_lattice(const ConvexDomain& omega,
                                             int resolution) {
  return std::make_shared<const Lattice>(omega, resolution);
}

Field::Field(std::shared_ptr<const Lattice> lattice)
    : lattice_(std::move(lattice)),
      values_(static_cast<std::size_t>(lattice_->size()), 0.0) {}

double Field::min_active() const {
  double m = std::numeric_limits<double>::infinity();
  for (int idx : lattice_->active_nodes()) m = std::min(m, (*this)[idx]);
  return m;
}

double Field::max_active() const {
  double m = -std::numeric_limits<double>::infinity();
  for (int idx : lattice_->active_nodes()) m = std::max(m, (*this)[idx]);
  return m;
}

bool Field::all_finite() const {
  for (int idx : lattice_->active_nodes()) {
    if (!std::isfinite((*this)[idx])) return false;
  }
  return true;
}

void Field::shift(double c) {
  for (int idx : lattice_->active_nodes()) (*this)[idx] += c;
}

Vec one_sided_gradient(const Field& u, int slot, const AxisDirections& dir) {
  const Lattice& lat = u.lattice();
  const BoundaryNode& b = lat.boundary_nodes()[static_cast<std::size_t>(slot)];
  const double inv = 1.0 / (2.0 * lat.spacing());
  Vec g(lat.dim());
  for (int axis = 0; axis < lat.dim(); ++axis) {
    const int s = dir[static_cast<std::size_t>(axis)];
    const int step = s * lat.stride(axis);
    g(axis) = s * (-3.0 * u[b.index] + 4.0 * u[b.index + step] -
                   u[b.index + 2 * step]) *
              inv;
  }
  return g;
}

Vec gradient(const Field& u, int idx) {
  const Lattice& lat = u.lattice();
  switch (lat.kind(idx)) {
    case NodeKind::interior: {
      Vec g(lat.dim());
      const double inv = 1.0 / (2.0 * lat.spacing());
      for (int axis = 0; axis < lat.dim(); ++axis) {
        const int s = lat.stride(axis);
        g(axis) = (u[idx + s] - u[idx - s]) * inv;
      }
      return g;
    }
    case NodeKind::boundary: {
      const int slot = lat.boundary_slot(idx);
      return one_sided_gradient(
          u, slot, lat.boundary_nodes()[static_cast<std::size_t>(slot)].default_dir);
    }
    default:
      throw Error("grid", "not-active", "gradient requested at exterior node");
  }
}

Mat hessian(const Field& u, int idx) {
  const Lattice& lat = u.lattice();
  if (lat.kind(idx) != NodeKind::interior) {
    throw Error("grid", "not-interior", "hessian needs an interior node");
  }
  const double inv2 = 1.0 / (lat.spacing() * lat.spacing());
  if (lat.dim() == 1) {
    Mat h(1, 1);
    h << (u[idx + 1] - 2.0 * u[idx] + u[idx - 1]) * inv2;
    return h;
  }
  const int r = lat.resolution();
  const double uxx = (u[idx + 1] - 2.0 * u[idx] + u[idx - 1]) * inv2;
  const double uyy = (u[idx + r] - 2.0 * u[idx] + u[idx - r]) * inv2;
  const double uxy = (u[idx + 1 + r] - u[idx + 1 - r] - u[idx - 1 + r] +
                      u[idx - 1 - r]) *
                     0.25 * inv2;
  return make_mat(uxx, uxy, uyy);
}

void BoundaryStencil::add(int node, int axis, double w) {
  for (int k = 0; k < count; ++k) {
    if (nodes[static_cast<std::size_t>(k)] == node) {
      weights[static_cast<std::size_t>(k)][static_cast<std::size_t>(axis)] += w;
      return;
    }
  }
  if (count == kMaxNodes) {
    throw Error("grid", "stencil-overflow", "boundary stencil too large");
  }
  nodes[static_cast<std::size_t>(count)] = node;
  weights[static_cast<std::size_t>(count)] = {0.0, 0.0};
  weights[static_cast<std::size_t>(count)][static_cast<std::size_t>(axis)] = w;
  ++count;
}

BoundaryStencil boundary_stencil(const Lattice& lat, int slot,
                                 const AxisDirections& dir) {
  const BoundaryNode& b = lat.boundary_nodes()[static_cast<std::size_t>(slot)];
  const int n = lat.dim();
  const double h = lat.spacing();
  BoundaryStencil st;
  st.add(b.index, 0, 0.0);
  st.self = 0;
  for (int axis = 0; axis < n; ++axis) {
    const int s = dir[static_cast<std::size_t>(axis)];
    if (!b.can_use(axis, s)) {
      throw Error("grid", "bad-orientation",
                  "boundary direction lacks two active neighbours");
    }
    const int step = s * lat.stride(axis);
    const double inv = s / (2.0 * h);
    st.add(b.index, axis, -3.0 * inv);
    st.add(b.index + step, axis, 4.0 * inv);
    st.add(b.index + 2 * step, axis, -inv);
  }
  // Taylor shift to the projection: component k gains sum_l H_kl d_l.
  const int centre = lat.nearest_interior()[static_cast<std::size_t>(slot)];
  const Vec d = b.projection - lat.position(b.index);
  const double inv2 = 1.0 / (h * h);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      const double w = d(l) * inv2;
      if (w == 0.0) continue;
      if (k == l) {
        const int sk = lat.stride(k);
        st.add(centre + sk, k, w);
        st.add(centre, k, -2.0 * w);
        st.add(centre - sk, k, w);
      } else {
        const int sk = lat.stride(k), sl = lat.stride(l);
        st.add(centre + sk + sl, k, 0.25 * w);
        st.add(centre + sk - sl, k, -0.25 * w);
        st.add(centre - sk + sl, k, -0.25 * w);
        st.add(centre - sk - sl, k, 0.25 * w);
      }
    }
  }
  return st;
}

BoundaryStencils boundary_stencils(const Lattice& lat, const Orientation& orient) {
  BoundaryStencils out;
  out.reserve(orient.size());
  for (std::size_t slot = 0; slot < orient.size(); ++slot) {
    out.push_back(boundary_stencil(lat, static_cast<int>(slot), orient[slot]));
  }
  return out;
}

Vec boundary_gradient(const Field& u, const BoundaryStencil& st) {
  const int n = u.lattice().dim();
  Vec g = Vec::Zero(n);
  for (int j = 0; j < st.count; ++j) {
    const double v = u[st.nodes[static_cast<std::size_t>(j)]];
    for (int k = 0; k < n; ++k) {
      g(k) += st.weights[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] * v;
    }
  }
  return g;
}

double solve_boundary_node(const Field& u, const BoundaryStencil& st,
                           const ConvexDomain& target) {
  const int n = u.lattice().dim();
  const int self = st.nodes[static_cast<std::size_t>(st.self)];
  // Du(x*) = g + w * slope for the value u[self] + w.
  Vec slope(n);
  for (int k = 0; k < n; ++k) {
    slope(k) = st.weights[static_cast<std::size_t>(st.self)][static_cast<std::size_t>(k)];
  }
  const std::array<double, 3> a = target.along_line(boundary_gradient(u, st), slope);
  auto phi = [&](double w) { return a[0] + w * (a[1] + w * a[2]); };
  auto dphi = [&](double w) { return a[1] + 2.0 * w * a[2]; };

  double w = 0.0;
  double r = phi(w);
  const double tol = 1e-12 * std::max(1.0, std::abs(r));
  for (int it = 0; it < 50; ++it) {
    if (std::abs(r) <= tol) return u[self] + w;
    const double d = dphi(w);
    if (!(std::abs(d) >= 1e-10)) {
      throw Error("grid", "obliqueness-breakdown",
                  "obliqueness breakdown at node " + std::to_string(self));
    }
    double step = -r / d;
    bool moved = false;
    for (int halving = 0; halving < 30 && !moved; ++halving) {
      const double trial = phi(w + step);
      if (std::abs(trial) < std::abs(r)) {
        w += step;
        r = trial;
        moved = true;
      } else {
        step *= 0.5;
      }
    }
    if (!moved) break;
  }
  if (std::abs(r) <= tol) return u[self] + w;
  throw Error("grid", "obliqueness-breakdown",
              "boundary Newton did not converge at node " + std::to_string(self));
}

SweepStats boundary_sweep(Field& u, const BoundaryStencils& stencils,
                          const ConvexDomain& target, SweepOrder order) {
  const int nb = static_cast<int>(stencils.size());
  std::vector<double> next(stencils.size());
  SweepStats stats;
  for (int pass = 1; pass <= 200; ++pass) {
    for (int k = 0; k < nb; ++k) {
      const std::size_t slot =
          static_cast<std::size_t>(order == SweepOrder::forward ? k : nb - 1 - k);
      next[slot] = solve_boundary_node(u, stencils[slot], target);
    }
    double change = 0.0, scale = 1.0;
    for (std::size_t slot = 0; slot < stencils.size(); ++slot) {
      const int idx = stencils[slot].nodes[static_cast<std::size_t>(stencils[slot].self)];
      change = std::max(change, std::abs(next[slot] - u[idx]));
      scale = std::max(scale, std::abs(next[slot]));
      u[idx] = next[slot];
    }
    stats.passes = pass;
    stats.last_change = change;
    if (change <= 1e-13 * scale) return stats;
  }
  throw Error("grid", "boundary-sweep-diverged",
              "boundary values did not settle after 200 Jacobi passes");
}

Orientation orientation_from_state(const Field& u, const BoundaryStencils& current,
                                   const ConvexDomain& target) {
  const Lattice& lat = u.lattice();
  const auto& nodes = lat.boundary_nodes();
  Orientation out(nodes.size());
  for (std::size_t slot = 0; slot < nodes.size(); ++slot) {
    const BoundaryNode& b = nodes[slot];
    const Vec beta = target.gradient(boundary_gradient(u, current[slot]));
    const double big = beta.cwiseAbs().maxCoeff();
    out[slot] = b.default_dir;
    for (int axis = 0; axis < lat.dim(); ++axis) {
      if (std::abs(beta(axis)) > 0.05 * big) {
        const int want = beta(axis) < 0.0 ? -1 : 1;
        if (b.can_use(axis, want)) out[slot][static_cast<std::size_t>(axis)] = want;
      }
    }
  }
  return out;
}

double boundary_residual(const Field& u, int /*slot*/, const BoundaryStencil& st,
                         const ConvexDomain& target) {
  return target.value(boundary_gradient(u, st));
}

double obliqueness(const Field& u, int slot, const BoundaryStencil& st,
                   const ConvexDomain& target) {
  const Vec beta = target.gradient(boundary_gradient(u, st));
  return beta.dot(u.lattice().boundary_nodes()[static_cast<std::size_t>(slot)].normal);
}

namespace {

struct Cell {
  int base = -1;
  std::array<double, 2> frac{0.0, 0.0};
};

Cell locate(const Lattice& lat, const Vec& point) {
  Cell c;
  const double tol = 1e-12 * lat.spacing();
  int offset = 0;
  for (int axis = 0; axis < lat.dim(); ++axis) {
    const double s = (point(axis) - lat.origin()(axis)) / lat.spacing();
    const double top = lat.resolution() - 1;
    if (s < -tol || s > top + tol || !std::isfinite(s)) {
      throw Error("grid", "out-of-hull", "point outside the lattice box");
    }
    int i = static_cast<int>(std::floor(s));
    i = std::clamp(i, 0, lat.resolution() - 2);
    c.frac[static_cast<std::size_t>(axis)] = std::clamp(s - i, 0.0, 1.0);
    offset += i * lat.stride(axis);
  }
  c.base = offset;
  return c;
}

template <class Pred>
bool corners_satisfy(const Lattice& lat, const Cell& c, Pred&& pred) {
  const int jmax = lat.dim() == 2 ? 1 : 0;
  for (int dj = 0; dj <= jmax; ++dj) {
    for (int di = 0; di <= 1; ++di) {
      if (!pred(c.base + di + dj * lat.resolution())) return false;
    }
  }
  return true;
}

}  // namespace

double interpolate(const Lattice& lat, std::span<const double> values,
                   const Vec& point) {
  const Cell c = locate(lat, point);
  if (!corners_satisfy(lat, c, [&](int idx) { return lat.active(idx); })) {
    throw Error("grid", "out-of-hull", "interpolation cell has inactive corners");
  }
  auto at = [&](int idx) { return values[static_cast<std::size_t>(idx)]; };
  const double fx = c.frac[0];
  if (lat.dim() == 1) {
    return (1.0 - fx) * at(c.base) + fx * at(c.base + 1);
  }
  const double fy = c.frac[1];
  const int r = lat.resolution();
  return (1.0 - fx) * (1.0 - fy) * at(c.base) + fx * (1.0 - fy) * at(c.base + 1) +
         (1.0 - fx) * fy * at(c.base + r) + fx * fy * at(c.base + r + 1);
}

double interpolate(const Field& u, const Vec& point) {
  return interpolate(u.lattice(), u.values(), point);
}

bool cell_is_interior(const Lattice& lat, const Vec& point) {
  try {
    const Cell c = locate(lat, point);
    return corners_satisfy(lat, c, [&](int idx) {
      return lat.kind(idx) == NodeKind::interior;
    });
  } catch (const Error&) {
    return false;
  }
}

}  // namespace lmc
