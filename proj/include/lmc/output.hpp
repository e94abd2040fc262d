#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lmc/flow.hpp"
#include "lmc/grid.hpp"
#include "lmc/stationary.hpp"

namespace lmc {

/// Writes through a sibling temporary file and renames it into place.
/// Throws Error("cli", "io") on failure.
void write_file_atomic(const std::string& path, const std::string& contents);

/// %.17g
std::string format_double(double v);

/// Field CSV: i,j,x,y,u,ux,uy,uxx,uxy,uyy,lam_min,lam_max (2D) or
/// i,x,u,ux,uxx,lam_min,lam_max (1D), one row per active node in lattice
/// order. Boundary rows report the Hessian of their nearest interior node.
std::string field_csv(const Field& u);

/// Reads the `u` column of a field CSV back onto a lattice. Throws
/// Error("cli", "invalid-value") on a malformed file or a node mismatch.
Field read_field_csv(const std::string& text, std::shared_ptr<const Lattice> lattice);

std::string diagnostics_csv(const std::vector<DiagnosticSample>& history);
std::string newton_history_csv(const std::vector<NewtonIteration>& history);

/// key=value lines in the given order.
std::string key_value_text(const std::vector<std::pair<std::string, std::string>>& entries);

/// Binary 8-bit PGM (P5), linear min -> 0, max -> 255 over active nodes,
/// exterior nodes 0. Rows run from the largest y down. 2D lattices only.
std::string heatmap_pgm(const Field& values);

}  // namespace lmc
