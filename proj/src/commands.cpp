#include "lmc/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lmc/arctan_operator.hpp"
#include "lmc/error.hpp"
#include "lmc/legendre.hpp"
#include "lmc/output.hpp"
#include "lmc/stationary.hpp"

namespace lmc {

namespace {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

std::string path_in(const RunConfig& config, const std::string& file) {
  return (std::filesystem::path(config.output.directory) / file).string();
}

std::string fmt(double v) { return format_double(v); }

std::optional<AdmissibilityReport> try_admissibility(const RunConfig& config,
                                                     const Field& u0) {
  try {
    return admissibility(config.source.build(config.dim()), config.domain.build(),
                         config.target.build(), hessian_range(u0), config.dim(),
                         config.flow.delta);
  } catch (const Error&) {
    return std::nullopt;
  }
}

Field lam_min_field(const Field& u) {
  const Lattice& lat = u.lattice();
  Field out(u.lattice_ptr());
  for (int idx : lat.active_nodes()) {
    int hidx = idx;
    if (lat.kind(idx) == NodeKind::boundary) {
      hidx = lat.nearest_interior()[static_cast<std::size_t>(lat.boundary_slot(idx))];
    }
    out[idx] = sym_eigenvalues(hessian(u, hidx)).minCoeff();
  }
  return out;
}

}  // namespace

int run_command(const RunConfig& config, std::ostream& out) {
  const ConvexDomain omega = config.domain.build();
  const ConvexDomain target = config.target.build();
  const auto lattice = build_lattice(omega, config.resolution);
  const Field u0 = initial_field(config, lattice);
  const FlowSolver solver(lattice, config.source.build(config.dim()), target, config.flow);

  const TranslatorResult result = [&] {
    try {
      return solver.run_to_translator(u0);
    } catch (const FlowError& e) {
      write_file_atomic(path_in(config, "diagnostics.csv"), diagnostics_csv(e.history()));
      throw;
    }
  }();

  write_file_atomic(path_in(config, "profile.csv"), field_csv(result.profile));
  write_file_atomic(path_in(config, "diagnostics.csv"), diagnostics_csv(result.history));
  KeyValues summary = {
      {"c_inf", fmt(result.c_inf)},
      {"t_final", fmt(result.t_final)},
      {"steps", std::to_string(result.steps)},
      {"converged", result.converged ? "true" : "false"},
      {"translator_residual", fmt(result.translator_residual)},
      {"resolution", std::to_string(config.resolution)},
  };
  if (result.structure) {
    summary.emplace_back("delta", fmt(result.structure->delta));
    summary.emplace_back("Lambda1", fmt(result.structure->lambda1));
  }
  if (const auto report = try_admissibility(config, u0); report && report->eps0) {
    summary.emplace_back("eps0", fmt(*report->eps0));
  }
  write_file_atomic(path_in(config, "summary.txt"), key_value_text(summary));
  if (config.output.heatmaps && config.dim() == 2) {
    write_file_atomic(path_in(config, "u.pgm"), heatmap_pgm(result.profile));
    write_file_atomic(path_in(config, "udot.pgm"), heatmap_pgm(result.udot));
    write_file_atomic(path_in(config, "lam_min.pgm"), heatmap_pgm(lam_min_field(result.profile)));
  }

  out << key_value_text(summary);
  if (!result.converged) {
    throw Error("flow", "did-not-converge",
                "u_dot oscillation " + fmt(result.final_sample.udot_osc) +
                    " above tolerance at t_max");
  }
  return 0;
}

int solve_command(const RunConfig& config, std::ostream& out) {
  const ConvexDomain omega = config.domain.build();
  const ConvexDomain target = config.target.build();
  const auto lattice = build_lattice(omega, config.resolution);
  const Field u0 = initial_field(config, lattice);
  const NewtonResult result = newton_solve(u0, config.source.build(config.dim()), target);

  write_file_atomic(path_in(config, "profile.csv"), field_csv(result.u));
  write_file_atomic(path_in(config, "newton_history.csv"), newton_history_csv(result.history));
  const KeyValues summary = {
      {"c_inf", fmt(result.c)},
      {"iterations", std::to_string(result.iterations)},
      {"converged", result.converged ? "true" : "false"},
      {"residual_inf", fmt(result.residual_inf)},
      {"resolution", std::to_string(config.resolution)},
  };
  write_file_atomic(path_in(config, "summary.txt"), key_value_text(summary));
  out << key_value_text(summary);
  if (!result.converged) {
    throw Error("stationary", "newton-stagnated", "Newton did not reach the tolerance");
  }
  return 0;
}

int check_command(const RunConfig& config, std::ostream& out) {
  const ConvexDomain omega = config.domain.build();
  const ConvexDomain target = config.target.build();
  const auto lattice = build_lattice(omega, config.resolution);
  const Field u0 = initial_field(config, lattice);
  const HessianRange range = hessian_range(u0);
  const AdmissibilityReport r =
      admissibility(config.source.build(config.dim()), omega, target, range, config.dim(),
                    config.flow.delta);

  auto line = [](bool pass, const std::string& name, double value, const char* rel,
                 double bound) {
    return std::string(pass ? "PASS " : "FAIL ") + name + " " + fmt(value) + " " + rel + " " +
           fmt(bound) + "\n";
  };
  std::string text;
  text += "F_max0=" + fmt(range.f_max0) + "\n";
  text += "F_min0=" + fmt(range.f_min0) + "\n";
  text += "delta=" + fmt(r.delta) + "\n";
  text += "delta_max=" + fmt(r.delta_max) + "\n";
  text += "Lambda1=" + fmt(r.lambda1) + "\n";
  text += line(r.pass_delta, "delta", r.delta, "<", r.delta_max);
  text += line(r.pass_lcond, "sup|D_p f|", r.sup_dp, "<=", r.bound_lcond);
  text += line(r.pass_dfcond, "sup|D_x f|", r.sup_dx, "<=", r.bound_dfcond);
  text += line(r.pass_dxp_omega, "sup|D_xp f|", r.sup_dxp, "<=", r.bound_dxp_omega);
  text += line(r.pass_dxp_target, "sup|D_xp f|", r.sup_dxp, "<=", r.bound_dxp_target);
  if (r.eps0) text += "eps0=" + fmt(*r.eps0) + "\n";
  text += std::string("admissible=") + (r.pass() ? "true" : "false") + "\n";
  write_file_atomic(path_in(config, "check.txt"), text);
  out << text;
  if (!r.pass()) {
    std::string why;
    for (const auto& f : r.failures) why += (why.empty() ? "" : "; ") + f;
    throw Error("source", "inadmissible", why);
  }
  return 0;
}

int legendre_command(const RunConfig& config, const std::string& field_path,
                     std::optional<double> c_inf, std::ostream& out) {
  const ConvexDomain omega = config.domain.build();
  const ConvexDomain target = config.target.build();
  const auto lattice = build_lattice(omega, config.resolution);
  const auto target_lattice = build_lattice(target, config.resolution);

  std::ifstream in(field_path, std::ios::binary);
  if (!in) throw Error("cli", "io", "cannot open field file '" + field_path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const Field u = read_field_csv(buf.str(), lattice);

  const Field conjugate = legendre_transform(u, target_lattice);
  const SourceTerm source = config.source.build(config.dim());
  const DualityReport report = duality_checks(u, conjugate, &source, c_inf);

  write_file_atomic(path_in(config, "conjugate.csv"), field_csv(conjugate));
  KeyValues kv = {
      {"checked_points", std::to_string(report.checked_points)},
      {"gradient_inverse_error", fmt(report.gradient_inverse_error)},
      {"hessian_product_error", fmt(report.hessian_product_error)},
      {"involution_error", fmt(report.involution_error)},
  };
  if (report.dual_residual) kv.emplace_back("dual_residual", fmt(*report.dual_residual));
  write_file_atomic(path_in(config, "duality.txt"), key_value_text(kv));
  out << key_value_text(kv);
  return 0;
}

RefineStudy refine_study(const RunConfig& config, const std::vector<int>& resolutions) {
  const ConvexDomain omega = config.domain.build();
  const ConvexDomain target = config.target.build();
  const SourceTerm source = config.source.build(config.dim());

  RefineStudy study;
  if (source.is_zero() && !config.initial.explicit_map) {
    study.reference = lagrangian_angle(quadratic_initial_map(omega, target));
  }
  for (int res : resolutions) {
    const auto lattice = build_lattice(omega, res);
    const FlowSolver solver(lattice, source, target, config.flow);
    const TranslatorResult r = solver.run_to_translator(initial_field(config, lattice));
    RefineLevel level{res, r.c_inf, r.converged, std::nullopt};
    if (study.reference) level.error = r.c_inf - *study.reference;
    study.levels.push_back(level);
  }
  if (study.levels.size() >= 3) {
    const auto& l = study.levels;
    const std::size_t k = l.size() - 3;
    const double d1 = std::abs(l[k].c_inf - l[k + 1].c_inf);
    const double d2 = std::abs(l[k + 1].c_inf - l[k + 2].c_inf);
    if (d1 > 0.0 && d2 > 0.0) study.observed_order = std::log2(d1 / d2);
    if (study.reference && *l[k + 2].error != 0.0) {
      study.observed_error_order = std::log2(std::abs(*l[k + 1].error / *l[k + 2].error));
    }
  }
  return study;
}

int refine_command(const RunConfig& config, std::ostream& out) {
  const RefineStudy study = refine_study(config, {33, 65, 129});
  std::string csv = "resolution,c_inf,error,converged\n";
  for (const RefineLevel& l : study.levels) {
    csv += std::to_string(l.resolution) + "," + fmt(l.c_inf) + "," +
           (l.error ? fmt(*l.error) : std::string()) + "," +
           (l.converged ? "true" : "false") + "\n";
  }
  write_file_atomic(path_in(config, "refine.csv"), csv);
  KeyValues kv;
  for (const RefineLevel& l : study.levels) {
    kv.emplace_back("c_inf_" + std::to_string(l.resolution), fmt(l.c_inf));
    if (l.error) kv.emplace_back("error_" + std::to_string(l.resolution), fmt(*l.error));
  }
  if (study.reference) kv.emplace_back("reference", fmt(*study.reference));
  if (study.observed_order) kv.emplace_back("observed_order", fmt(*study.observed_order));
  if (study.observed_error_order) {
    kv.emplace_back("observed_error_order", fmt(*study.observed_error_order));
  }
  write_file_atomic(path_in(config, "summary.txt"), key_value_text(kv));
  out << key_value_text(kv);
  for (const RefineLevel& l : study.levels) {
    if (!l.converged) {
      throw Error("flow", "did-not-converge",
                  "resolution " + std::to_string(l.resolution) + " did not converge");
    }
  }
  return 0;
}

}  // namespace lmc
