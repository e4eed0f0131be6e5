#pragma once

#include "toricflow/discrete.hpp"
#include "toricflow/geometry.hpp"
#include "toricflow/potential.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace toricflow {

struct FlowState {
  double t = 0;
  SymplecticPotential u;
  AffineFunction theta;
  ScalarField R;   // abreu_scalar_curvature(u)
  ScalarField rm;  // riemannian_norm(u)
};

FlowState make_state(const SymplecticPotential& u, const AffineFunction& theta, double t = 0);

struct TraceRow {
  double t = 0;
  double dt = 0;
  double calabi_energy = 0;
  double mabuchi_rel = 0;
  double sup_residual = 0;
  double max_rm = 0;
  double dist_to_start = 0;
  double dist_to_target = 0;
  double min_hessian_eig = 0;
  double max_f = 0;
  int halvings = 0;  // step-size halvings spent before this row was accepted
  // Weighted runs only.
  double weighted_energy = 0;
  std::vector<double> A;
  double B = 0;
  double orthogonality_residual = 0;
};

struct FlowTrace {
  bool weighted = false;
  std::vector<TraceRow> rows;
};

enum class Scheme { Implicit, RK4 };
enum class RunStatus { Converged, TimeLimit, StepUnderflow, StepLimit };
const char* status_name(RunStatus s);

struct FlowControls {
  double dt0 = 1e-5;
  double t_max = 1.0;
  double tol = 1e-3;
  double safety = 0.1;      // RK4 cap: safety * h^4 / (max eig u^ij)^2
  double dt_max = 2e-4;     // implicit cap
  Scheme scheme = Scheme::Implicit;
  int max_halvings = 30;
  int grow_after = 10;
  double grow_factor = 1.2;
  long max_steps = 2000000;
  long checkpoint_every = 0;
  std::function<void(const FlowState&, long)> on_checkpoint;
  std::optional<SymplecticPotential> target;  // defaults to the Guillemin potential
};

struct RunResult {
  FlowTrace trace;
  FlowState final_state;
  RunStatus status = RunStatus::Converged;
  std::string message;
};

// Nodal drift theta - R on every node from the discrete functional (equals
// theta - R_u in the interior).
std::vector<double> drift(const SymplecticPotential& u, const AffineFunction& theta);

// One classical four-stage explicit step of df/dt = theta - R.
FlowState step(const FlowState& state, double dt);
// One backward Euler step solved by Newton's method.
FlowState step_implicit(const FlowState& state, double dt);

RunResult run(const DelzantPolytope& P, const SymplecticPotential& u0, const AffineFunction& theta,
              const FlowControls& controls = {});

double calabi_energy(const SymplecticPotential& u, const AffineFunction& theta);
// Energy of a given nodal curvature field.
double calabi_energy(const GridChart& chart, const std::vector<double>& R, const AffineFunction& theta);
double distance(const SymplecticPotential& u1, const SymplecticPotential& u2);

struct RateFit {
  double rate = 0;
  double r2 = 0;
  std::size_t rows_used = 0;
};
RateFit convergence_rate(const FlowTrace& trace);

struct ProbeRow {
  double boundary_integral = 0;
  double max_rm = 0;
  double max_u = 0;
  bool convex = true;
  std::string note;
};

struct ProbeSummary {
  std::size_t members = 0;
  std::size_t filtered = 0;
  double sup_max_u = 0;  // over the filtered set; NaN when empty
  double min_max_rm = 0;
};

std::vector<ProbeRow> linf_bound_probe(const DelzantPolytope& P, const std::vector<SymplecticPotential>& family,
                                       const std::optional<std::vector<double>>& x0 = std::nullopt);
ProbeSummary summarize_probe(const std::vector<ProbeRow>& rows, double boundary_bound, double curvature_bound);
// Guillemin plus seeded smooth perturbations, each kept convex.
std::vector<SymplecticPotential> make_probe_family(ChartPtr chart, unsigned long seed, int count);

// Generic engine shared with the weighted flow.
struct AffinePart {
  std::vector<double> values;  // a_k at the nodes
  std::vector<double> A;
  double B = 0;
};

struct FlowModel {
  DiscreteMabuchi op;
  std::vector<double> energy_weights;  // Lebesgue weights for the calabi_energy column
  std::function<AffinePart(const std::vector<double>& R)> affine;
  bool weighted = false;
};

RunResult run_model(const FlowModel& model, const SymplecticPotential& u0, const FlowControls& controls);

}  // namespace toricflow
