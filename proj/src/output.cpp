#include "lmc/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lmc/arctan_operator.hpp"
#include "lmc/error.hpp"

namespace lmc {

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw Error("cli", "io", "cannot create directory for '" + path + "'");
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cli", "io", "cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error("cli", "io", "write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cli", "io", "cannot rename into '" + path + "'");
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string field_csv(const Field& u) {
  const Lattice& lat = u.lattice();
  const int n = lat.dim();
  std::ostringstream out;
  out << (n == 2 ? "i,j,x,y,u,ux,uy,uxx,uxy,uyy,lam_min,lam_max\n"
                 : "i,x,u,ux,uxx,lam_min,lam_max\n");
  for (int idx : lat.active_nodes()) {
    int hidx = idx;
    if (lat.kind(idx) == NodeKind::boundary) {
      hidx = lat.nearest_interior()[static_cast<std::size_t>(lat.boundary_slot(idx))];
    }
    const Mat h = hessian(u, hidx);
    const Vec lam = sym_eigenvalues(h);
    const Vec g = gradient(u, idx);
    const Vec x = lat.position(idx);
    const auto ij = lat.coords(idx);
    out << ij[0] << ',';
    if (n == 2) out << ij[1] << ',';
    out << format_double(x(0)) << ',';
    if (n == 2) out << format_double(x(1)) << ',';
    out << format_double(u[idx]) << ',' << format_double(g(0)) << ',';
    if (n == 2) out << format_double(g(1)) << ',';
    out << format_double(h(0, 0)) << ',';
    if (n == 2) out << format_double(h(0, 1)) << ',' << format_double(h(1, 1)) << ',';
    out << format_double(lam.minCoeff()) << ',' << format_double(lam.maxCoeff()) << '\n';
  }
  return out.str();
}

Field read_field_csv(const std::string& text, std::shared_ptr<const Lattice> lattice) {
  const int n = lattice->dim();
  const std::string expected = n == 2 ? "i,j,x,y,u,ux,uy,uxx,uxy,uyy,lam_min,lam_max"
                                      : "i,x,u,ux,uxx,lam_min,lam_max";
  const int u_column = n == 2 ? 4 : 2;
  Field out(lattice);
  std::vector<char> seen(static_cast<std::size_t>(lattice->size()), 0);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto bad = [&](const std::string& what) {
    throw Error("cli", "invalid-value", "field csv line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != expected) bad("unexpected header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != static_cast<std::size_t>(n == 2 ? 12 : 7)) bad("wrong column count");
    int i = 0, j = 0;
    double value = 0.0;
    try {
      std::size_t used = 0;
      i = std::stoi(cells[0], &used);
      if (n == 2) j = std::stoi(cells[1]);
      value = std::stod(cells[static_cast<std::size_t>(u_column)], &used);
    } catch (const std::exception&) {
      bad("unparsable number");
    }
    if (i < 0 || j < 0 || i >= lattice->resolution() || j >= lattice->resolution()) {
      bad("node outside the lattice");
    }
    const int idx = lattice->index(i, j);
    if (!lattice->active(idx)) bad("node is not active on this lattice");
    if (seen[static_cast<std::size_t>(idx)]) bad("node listed twice");
    seen[static_cast<std::size_t>(idx)] = 1;
    out[idx] = value;
  }
  for (int idx : lattice->active_nodes()) {
    if (!seen[static_cast<std::size_t>(idx)]) {
      throw Error("cli", "invalid-value", "field csv misses active node " + std::to_string(idx));
    }
  }
  return out;
}

std::string diagnostics_csv(const std::vector<DiagnosticSample>& history) {
  std::ostringstream out;
  out << "t,dt,udot_min,udot_max,udot_mean,udot_osc,lam_min,lam_max,obliq_min,"
         "bc_residual_max,image_violation,sumF_min,sumF_max,sumFl2_min,sumFl2_max\n";
  for (const DiagnosticSample& s : history) {
    const double row[] = {s.t,         s.dt,         s.udot_min,        s.udot_max,
                          s.udot_mean, s.udot_osc,   s.lam_min,         s.lam_max,
                          s.obliq_min, s.bc_residual_max, s.image_violation, s.sum_f_min,
                          s.sum_f_max, s.sum_f_lam2_min,  s.sum_f_lam2_max};
    for (std::size_t k = 0; k < std::size(row); ++k) {
      out << (k ? "," : "") << format_double(row[k]);
    }
    out << '\n';
  }
  return out.str();
}

std::string newton_history_csv(const std::vector<NewtonIteration>& history) {
  std::ostringstream out;
  out << "iteration,residual_inf,residual_2,step_scale,c\n";
  for (const NewtonIteration& it : history) {
    out << it.iteration << ',' << format_double(it.residual_inf) << ','
        << format_double(it.residual_2) << ',' << format_double(it.step_scale) << ','
        << format_double(it.c) << '\n';
  }
  return out.str();
}

std::string key_value_text(const std::vector<std::pair<std::string, std::string>>& entries) {
  std::string out;
  for (const auto& [key, value] : entries) out += key + "=" + value + "\n";
  return out;
}

std::string heatmap_pgm(const Field& values) {
  const Lattice& lat = values.lattice();
  if (lat.dim() != 2) throw Error("cli", "invalid-value", "heatmaps need a 2D lattice");
  double lo = values.min_active(), hi = values.max_active();
  const double span = hi - lo;
  const int res = lat.resolution();
  std::string out = "P5\n" + std::to_string(res) + " " + std::to_string(res) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(res * res));
  for (int j = res - 1; j >= 0; --j) {
    for (int i = 0; i < res; ++i) {
      const int idx = lat.index(i, j);
      unsigned char px = 0;
      if (lat.active(idx)) {
        const double t = span > 0.0 ? (values[idx] - lo) / span : 0.0;
        px = static_cast<unsigned char>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0));
      }
      out.push_back(static_cast<char>(px));
    }
  }
  return out;
}

}  // namespace lmc
