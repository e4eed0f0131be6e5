#pragma once

#include "toricflow/flow.hpp"
#include "toricflow/stability.hpp"
#include "toricflow/weighted.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace toricflow {

// Raw polytope description before validation.
struct PolytopeSpec {
  std::string name;
  int dim = 0;
  std::vector<Facet> facets;
};

// Structured-text polytope file {name, dim, facets: [{normal, offset}]}.
// Offsets may be numbers or "p/q" strings. Throws ParseError.
PolytopeSpec parse_polytope_spec(const std::string& text);
PolytopeSpec read_polytope_spec(const std::string& path);
DelzantPolytope read_polytope(const std::string& path);

// {p_sigma, c_sigma, groups: [{p, c, d}], scal_sigma, scal_j}.
WeightData parse_weight(const std::string& text);
WeightData read_weight(const std::string& path);

// Flat config object; values are kept as text (numbers printed exactly as
// given). Unknown keys throw InvalidInput.
std::map<std::string, std::string> read_config(const std::string& path, const std::vector<std::string>& allowed);

std::string read_text(const std::string& path);

// Checkpoint: "# polytope=<name> h=<h> t=<t>" then "index..., x..., f" rows.
void write_checkpoint(std::ostream& out, const SymplecticPotential& u, double t);
void write_checkpoint(const std::string& path, const SymplecticPotential& u, double t);

struct Checkpoint {
  std::string polytope;
  double h = 0;
  double t = 0;
  std::vector<std::array<int, 3>> index;
  std::vector<double> f;
};

Checkpoint read_checkpoint(const std::string& path);
// Potential on the chart with the checkpointed values; throws ChartMismatch
// if the nodes differ.
SymplecticPotential load_potential(ChartPtr chart, const Checkpoint& cp);

void write_trace(std::ostream& out, const FlowTrace& trace, int dim);
void write_scan(std::ostream& out, const StabilityReport& report, int dim);
void write_field(std::ostream& out, const ScalarField& field);
void write_segment(std::ostream& out, const SegmentProfile& profile);
void write_probe(std::ostream& out, const std::vector<ProbeRow>& rows);

// %.17g
std::string format_double(double v);

}  // namespace toricflow
