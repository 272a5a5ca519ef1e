#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "extraction/boundary.hpp"
#include "extraction/oracle.hpp"
#include "extraction/sim.hpp"
#include "extraction/value.hpp"

namespace extraction::io {

using nlohmann::ordered_json;

/// `# boundary-table v1` header, metadata comments, then `x,F` rows at 17
/// significant digits in increasing x.
void write_boundary_csv(std::ostream& out, const boundary::Solution& sol);

/// Reads a table written by write_boundary_csv and recomputes the node
/// slopes from `p`. Throws ConfigError on a malformed file.
boundary::BoundaryTable read_boundary_csv(std::istream& in, const ModelParams& p, const QuadratureSpec& q);

/// `x,y,w,w_x,w_xx,w_y,region` on an nx-by-ny grid.
void write_value_surface(std::ostream& out, const boundary::Solution& sol, double x_lo, double x_hi, int nx,
                         double y_max, int ny);

ordered_json to_json(const ModelParams& p);
ordered_json to_json(const QuadratureSpec& q);
ordered_json to_json(const boundary::CriticalPrices& c);
ordered_json to_json(const sim::SimResult& r);
ordered_json to_json(const sim::DominanceReport& r);
ordered_json to_json(const oracle::Discrepancy& d);
ordered_json to_json(const value::HJBReport& r);
ordered_json to_json(const value::SmoothFitReport& r);

/// Writes `doc` followed by a newline; doubles are printed round-trip exact.
void write_json(std::ostream& out, const ordered_json& doc);

/// Opens `dir/name` for writing, creating `dir` if needed. Throws ConfigError.
std::ofstream open_output(const std::string& dir, const std::string& name);

}  // namespace extraction::io
