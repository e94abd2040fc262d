#pragma once

#include <string>
#include <string_view>

#include "lmc/flow.hpp"
#include "lmc/geometry.hpp"
#include "lmc/grid.hpp"
#include "lmc/source.hpp"

namespace lmc {

/// [domain] / [target]
///   kind = ball | ellipse | interval
///   ball:     center = x [y], radius = r
///   ellipse:  center = x y, matrix = m11 m12 m22   ({(x-q)^T M (x-q) < 1})
///   interval: lower = a, upper = b
struct DomainSpec {
  DomainKind kind = DomainKind::ball;
  Vec center;
  double radius = 0.0;
  Mat matrix;
  double lower = 0.0;
  double upper = 0.0;

  ConvexDomain build() const;
};

/// [initial]
///   map = auto | explicit
///   matrix = m11 [m12 m22]   explicit SPD matrix A
///   shift = v                linear part; defaults to the target centre
///   bump_amplitude, bump_radius, bump_center
/// u0(x) = (x-q)^T A (x-q) / 2 + shift.x + amp (1 - |x-c|^2/R^2)^3_+,
/// q the domain centre and A the quadratic map when map = auto.
struct InitialSpec {
  bool explicit_map = false;
  Mat matrix;
  std::optional<Vec> shift;
  double bump_amplitude = 0.0;
  std::optional<double> bump_radius;
  std::optional<Vec> bump_center;
};

/// [source]
///   kind = zero | affine | quadratic
///   affine:    iota, kappa, c0
///   quadratic: eps, a, b, x0, p0
struct SourceSpec {
  std::string kind = "zero";
  Vec iota, kappa;
  double c0 = 0.0;
  double eps = 0.0, a = 0.0, b = 0.0;
  Vec x0, p0;

  SourceTerm build(int dim) const;
};

/// [output]
///   directory = path, heatmaps = true | false
struct OutputSpec {
  std::string directory = "output";
  bool heatmaps = false;
};

struct RunConfig {
  DomainSpec domain;
  DomainSpec target;
  InitialSpec initial;
  SourceSpec source;
  int resolution = 0;  // [grid] resolution
  FlowConfig flow;     // [flow] cfl, t_max, tol_osc, sample_every, eps_convex, delta
  OutputSpec output;

  int dim() const { return static_cast<int>(domain.center.size()); }
};

/// Throws Error("cli", code) with code one of unknown-section, unknown-key,
/// duplicate-key, missing-section, missing-key, invalid-value, io; messages
/// carry the file name and line number.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(std::string_view text, const std::string& name = "<config>");

/// Initial data sampled on the lattice.
Field initial_field(const RunConfig& config, std::shared_ptr<const Lattice> lattice);

}  // namespace lmc
