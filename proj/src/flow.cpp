#include "lmc/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Eigenvalue extremes of [[a, b], [b, d]].
inline void eig2(double a, double b, double d, double* lo, double* hi) {
  const double m = 0.5 * (a + d);
  const double r = std::hypot(0.5 * (a - d), b);
  *lo = m - r;
  *hi = m + r;
}

}  // namespace

std::vector<std::string> check_monitors(const DiagnosticSample& s,
                                        const MonitorBounds& b) {
  std::vector<std::string> v;
  if (s.udot_min < b.udot_lower - b.slack) v.emplace_back("udot lower");
  if (s.udot_max > b.udot_upper + b.slack) v.emplace_back("udot upper");
  if (s.sum_f_min < b.lambda1 - b.slack) v.emplace_back("sumF lower");
  if (s.sum_f_max > b.n) v.emplace_back("sumF upper");
  if (s.sum_f_lam2_min < b.lambda1 - b.slack) v.emplace_back("sumF_lam2 lower");
  if (s.sum_f_lam2_max > b.n) v.emplace_back("sumF_lam2 upper");
  if (!(s.obliq_min > 0.0)) v.emplace_back("obliqueness");
  return v;
}

HessianRange hessian_range(const Field& u) {
  HessianRange r{-kInf, kInf};
  for (int idx : u.lattice().interior_nodes()) {
    const double f = lagrangian_angle(hessian(u, idx));
    r.f_max0 = std::max(r.f_max0, f);
    r.f_min0 = std::min(r.f_min0, f);
  }
  return r;
}

double max_boundary_residual(const Field& u, const ConvexDomain& target) {
  const Lattice& lat = u.lattice();
  const BoundaryStencils stencils = boundary_stencils(lat, lat.default_orientation());
  double worst = 0.0;
  for (std::size_t slot = 0; slot < stencils.size(); ++slot) {
    worst = std::max(worst, std::abs(boundary_residual(u, static_cast<int>(slot),
                                                       stencils[slot], target)));
  }
  return worst;
}

FlowSolver::FlowSolver(std::shared_ptr<const Lattice> lattice,
                       SourceTerm source, ConvexDomain target,
                       FlowConfig config)
    : lattice_(std::move(lattice)),
      source_(std::move(source)),
      target_(std::move(target)),
      config_(config) {
  if (lattice_->dim() != target_.dim() || source_.dim() != lattice_->dim()) {
    throw Error("flow", "dimension-mismatch",
                "lattice, target and source dimensions differ");
  }
  if (!(config_.cfl > 0.0 && config_.cfl <= 1.0)) {
    throw Error("flow", "invalid-config", "cfl must lie in (0, 1]");
  }
  if (config_.sample_every < 1) {
    throw Error("flow", "invalid-config", "sample_every must be positive");
  }
  interior_ = lattice_->interior_nodes();
  positions_.reserve(interior_.size());
  fx_part_.reserve(interior_.size());
  for (int idx : interior_) {
    const Vec x = lattice_->position(idx);
    positions_.push_back(x);
    // Both source kinds split as f(x,p) = g(x) + k(p) with k(0) handled below.
    if (source_.kind() == SourceKind::affine) {
      fx_part_.push_back(source_.kappa().dot(x) + source_.c0());
    } else {
      fx_part_.push_back(-source_.eps() * source_.a() *
                         (x - source_.x0()).squaredNorm());
    }
  }
}

double FlowSolver::stable_dt() const {
  const double h = lattice_->spacing();
  return config_.cfl * h * h / (2.0 * lattice_->dim());
}

FlowSolver::InteriorStats FlowSolver::evaluate(const Field& u,
                                               std::vector<double>& udot) const {
  const Lattice& lat = *lattice_;
  const double h = lat.spacing();
  const double inv2 = 1.0 / (h * h);
  const double inv_2h = 1.0 / (2.0 * h);
  const std::span<const double> v = u.values();
  udot.assign(static_cast<std::size_t>(lat.size()), 0.0);

  const bool affine = source_.kind() == SourceKind::affine;
  const double ix = source_.iota()(0);
  const double iy = lat.dim() == 2 ? source_.iota()(1) : 0.0;
  const double qb = source_.eps() * source_.b();
  const double px = source_.p0()(0);
  const double py = lat.dim() == 2 ? source_.p0()(1) : 0.0;

  InteriorStats st{kInf, -kInf, 0.0, kInf, -kInf};
  const std::size_t count = interior_.size();
  if (lat.dim() == 1) {
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t i = static_cast<std::size_t>(interior_[k]);
      const double uxx = (v[i + 1] - 2.0 * v[i] + v[i - 1]) * inv2;
      const double gx = (v[i + 1] - v[i - 1]) * inv_2h;
      const double fp = affine ? ix * gx : qb * (gx - px) * (gx - px);
      const double ud = std::atan(uxx) - fx_part_[k] - fp;
      udot[i] = ud;
      st.udot_min = std::min(st.udot_min, ud);
      st.udot_max = std::max(st.udot_max, ud);
      st.udot_sum += ud;
      st.lam_min = std::min(st.lam_min, uxx);
      st.lam_max = std::max(st.lam_max, uxx);
    }
  } else {
    const std::size_t r = static_cast<std::size_t>(lat.resolution());
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t i = static_cast<std::size_t>(interior_[k]);
      const double c = v[i];
      const double uxx = (v[i + 1] - 2.0 * c + v[i - 1]) * inv2;
      const double uyy = (v[i + r] - 2.0 * c + v[i - r]) * inv2;
      const double uxy =
          (v[i + 1 + r] - v[i + 1 - r] - v[i - 1 + r] + v[i - 1 - r]) * 0.25 * inv2;
      const double gx = (v[i + 1] - v[i - 1]) * inv_2h;
      const double gy = (v[i + r] - v[i - r]) * inv_2h;
      const double fp = affine ? ix * gx + iy * gy
                               : qb * ((gx - px) * (gx - px) + (gy - py) * (gy - py));
      const double ud = lagrangian_angle_2d(uxx, uxy, uyy) - fx_part_[k] - fp;
      udot[i] = ud;
      st.udot_min = std::min(st.udot_min, ud);
      st.udot_max = std::max(st.udot_max, ud);
      st.udot_sum += ud;
      double lo, hi;
      eig2(uxx, uxy, uyy, &lo, &hi);
      st.lam_min = std::min(st.lam_min, lo);
      st.lam_max = std::max(st.lam_max, hi);
    }
  }
  if (!std::isfinite(st.udot_sum) || !std::isfinite(st.lam_min) ||
      !std::isfinite(st.lam_max)) {
    throw FlowError("state-corrupted", "non-finite values in the flow state", {});
  }
  const auto& nearest = lat.nearest_interior();
  const auto& bnodes = lat.boundary_nodes();
  for (std::size_t slot = 0; slot < bnodes.size(); ++slot) {
    udot[static_cast<std::size_t>(bnodes[slot].index)] =
        udot[static_cast<std::size_t>(nearest[slot])];
  }
  return st;
}

void FlowState::set_orientation(Orientation o) {
  stencils = boundary_stencils(u.lattice(), o);
  orient = std::move(o);
}

FlowState FlowSolver::initial_state(const Field& u0) const {
  FlowState s{u0, 0.0, 0, stable_dt(), {}, {}};
  s.set_orientation(lattice_->default_orientation());
  s.set_orientation(orientation_from_state(s.u, s.stencils, target_));
  boundary_sweep(s.u, s.stencils, target_);
  Orientation again = orientation_from_state(s.u, s.stencils, target_);
  if (again != s.orient) {
    s.set_orientation(std::move(again));
    boundary_sweep(s.u, s.stencils, target_);
  }
  return s;
}

Field FlowSolver::udot_field(const FlowState& state) const {
  std::vector<double> udot;
  evaluate(state.u, udot);
  Field out(lattice_);
  for (int idx : lattice_->active_nodes()) out[idx] = udot[static_cast<std::size_t>(idx)];
  return out;
}

void FlowSolver::advance(FlowState& state, const std::vector<double>& udot) const {
  // Boundary nodes carry the copied u_dot as a predictor for the sweep.
  for (int idx : lattice_->active_nodes()) {
    state.u[idx] += state.dt * udot[static_cast<std::size_t>(idx)];
  }
  boundary_sweep(state.u, state.stencils, target_);
  Orientation again = orientation_from_state(state.u, state.stencils, target_);
  if (again != state.orient) {
    state.set_orientation(std::move(again));
    boundary_sweep(state.u, state.stencils, target_);
  }
  state.t += state.dt;
  ++state.step_count;
}

void FlowSolver::step(FlowState& state) const {
  const double h = lattice_->spacing();
  if (state.dt < 0.0 || state.dt > h * h / (2.0 * lattice_->dim()) * (1.0 + 1e-12)) {
    throw Error("flow", "cfl-violation", "dt outside the explicit stability bound");
  }
  std::vector<double> udot;
  const InteriorStats st = evaluate(state.u, udot);
  if (st.lam_min < config_.eps_convex) {
    throw FlowError("convexity-lost",
                    "min Hessian eigenvalue " + std::to_string(st.lam_min) +
                        " below eps_convex",
                    {});
  }
  advance(state, udot);
}

DiagnosticSample FlowSolver::make_sample(const FlowState& state,
                                         const std::vector<double>& udot,
                                         const InteriorStats& st) const {
  const Lattice& lat = *lattice_;
  const int n = lat.dim();
  DiagnosticSample s;
  s.t = state.t;
  s.dt = state.dt;
  s.udot_min = st.udot_min;
  s.udot_max = st.udot_max;
  s.udot_mean = st.udot_sum / static_cast<double>(interior_.size());
  s.udot_osc = st.udot_max - st.udot_min;
  s.lam_min = st.lam_min;
  s.lam_max = st.lam_max;
  (void)udot;

  s.obliq_min = kInf;
  for (std::size_t slot = 0; slot < lat.boundary_nodes().size(); ++slot) {
    const int sl = static_cast<int>(slot);
    s.obliq_min = std::min(s.obliq_min, obliqueness(state.u, sl, state.stencils[slot], target_));
    s.bc_residual_max =
        std::max(s.bc_residual_max,
                 std::abs(boundary_residual(state.u, sl, state.stencils[slot], target_)));
  }

  s.sum_f_min = s.sum_f_lam2_min = kInf;
  s.sum_f_max = s.sum_f_lam2_max = -kInf;
  double mean_u = 0.0;
  for (int idx : interior_) {
    const Mat hess = hessian(state.u, idx);
    const StructureSums ss = structure_sums(hess);
    s.sum_f_min = std::min(s.sum_f_min, ss.sum_f);
    s.sum_f_max = std::max(s.sum_f_max, ss.sum_f);
    s.sum_f_lam2_min = std::min(s.sum_f_lam2_min, ss.sum_f_lam2);
    s.sum_f_lam2_max = std::max(s.sum_f_lam2_max, ss.sum_f_lam2);
    s.structure_identity_error =
        std::max(s.structure_identity_error, std::abs(ss.sum_f + ss.sum_f_lam2 - n));
    s.image_violation =
        std::max(s.image_violation, -target_.value(gradient(state.u, idx)));
    mean_u += state.u[idx];
  }
  s.mean_u = mean_u / static_cast<double>(interior_.size());
  return s;
}

DiagnosticSample FlowSolver::sample(const FlowState& state) const {
  std::vector<double> udot;
  const InteriorStats st = evaluate(state.u, udot);
  return make_sample(state, udot, st);
}

MonitorBounds FlowSolver::monitor_bounds(
    const Field& u0, std::optional<StructureConstants>* structure) const {
  const HessianRange range = hessian_range(u0);
  const ConvexDomain& omega = lattice_->domain();
  MonitorBounds b;
  b.n = lattice_->dim();
  b.slack = 10.0 * lattice_->spacing();
  b.udot_lower = range.f_min0 - source_.sup_value(omega, target_);
  b.udot_upper = range.f_max0 - source_.inf_value(omega, target_);
  const double delta = config_.delta.value_or(oscillation_in_p(source_, target_));
  try {
    const StructureConstants sc =
        structure_constants(range.f_max0, range.f_min0, delta, b.n);
    b.lambda1 = sc.lambda1;
    if (structure) *structure = sc;
  } catch (const Error&) {
    b.lambda1 = 0.0;
    if (structure) structure->reset();
  }
  return b;
}

TranslatorResult FlowSolver::run_to_translator(const Field& u0) const {
  const Lattice& lat = *lattice_;
  {
    std::vector<double> scratch;
    const InteriorStats st0 = evaluate(u0, scratch);
    if (!(st0.lam_min > 0.0)) {
      throw Error("flow", "inadmissible-initial-data",
                  "initial data is not strictly convex on the lattice");
    }
    const double res = max_boundary_residual(u0, target_);
    if (!(res <= 10.0 * lat.spacing())) {
      throw Error("flow", "inadmissible-initial-data",
                  "boundary residual |h(Du0)| = " + std::to_string(res) +
                      " exceeds 10 * spacing");
    }
  }

  TranslatorResult out{Field(lattice_), Field(lattice_), 0.0, 0.0, 0.0, 0, false,
                       0.0, 0.0, {}, {}, {}, {}, {}};
  out.bounds = monitor_bounds(u0, &out.structure);

  FlowState state = initial_state(u0);
  std::vector<double> udot;
  InteriorStats st = evaluate(state.u, udot);
  const double inv_count = 1.0 / static_cast<double>(interior_.size());

  auto record = [&]() {
    DiagnosticSample s = make_sample(state, udot, st);
    out.history.push_back(s);
    const auto violations = check_monitors(s, out.bounds);
    if (!violations.empty() && config_.abort_on_violation) {
      std::string what;
      for (const auto& v : violations) what += (what.empty() ? "" : ", ") + v;
      throw FlowError("monitor-violation", what + " at t=" + std::to_string(s.t),
                      out.history);
    }
  };
  record();

  double tol = 0.0;
  while (true) {
    const double mean = st.udot_sum * inv_count;
    tol = config_.tol_osc > 0.0 ? config_.tol_osc
                                : 1e-8 * std::max(1.0, std::abs(mean));
    if (st.udot_max - st.udot_min <= tol) {
      out.converged = true;
      break;
    }
    if (state.t >= config_.t_max) break;
    if (st.lam_min < config_.eps_convex) {
      throw FlowError("convexity-lost",
                      "min Hessian eigenvalue " + std::to_string(st.lam_min) +
                          " at t=" + std::to_string(state.t),
                      out.history);
    }
    try {
      advance(state, udot);
      st = evaluate(state.u, udot);
    } catch (const FlowError&) {
      throw;
    } catch (const Error& e) {
      throw FlowError(e.code(), e.what(), out.history);
    }
    if (state.step_count % config_.sample_every == 0) record();
  }
  if (out.history.back().t != state.t) record();

  out.final_sample = out.history.back();
  out.tol_osc = tol;
  out.t_final = state.t;
  out.steps = state.step_count;
  out.c_inf = out.final_sample.udot_mean;
  out.translator_residual = 0.0;
  for (int idx : interior_) {
    out.translator_residual = std::max(
        out.translator_residual, std::abs(udot[static_cast<std::size_t>(idx)] - out.c_inf));
  }

  // Least-squares slope of mean(u) against t over the trailing samples.
  const std::size_t m = std::min<std::size_t>(5, out.history.size());
  if (m >= 2) {
    double st_ = 0.0, su = 0.0, stt = 0.0, stu = 0.0;
    for (std::size_t k = out.history.size() - m; k < out.history.size(); ++k) {
      const double t = out.history[k].t, mu = out.history[k].mean_u;
      st_ += t, su += mu, stt += t * t, stu += t * mu;
    }
    const double denom = m * stt - st_ * st_;
    out.c_slope = denom > 0.0 ? (m * stu - st_ * su) / denom : out.c_inf;
  } else {
    out.c_slope = out.c_inf;
  }

  const double lowest = state.u.min_active();
  out.profile = state.u;
  out.profile.shift(-lowest);
  for (int idx : lat.active_nodes()) out.udot[idx] = udot[static_cast<std::size_t>(idx)];
  out.orientation = state.orient;
  return out;
}

}  // namespace lmc
