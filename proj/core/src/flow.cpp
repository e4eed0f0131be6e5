#include "toricflow/flow.hpp"

#include "toricflow/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>

namespace toricflow {

const char* status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "converged";
    case RunStatus::TimeLimit: return "time-limit";
    case RunStatus::StepUnderflow: return "step-underflow";
    case RunStatus::StepLimit: return "step-limit";
  }
  return "unknown";
}

FlowState make_state(const SymplecticPotential& u, const AffineFunction& theta, double t) {
  auto hd = hessian_data(u);
  return FlowState{t, u, theta, abreu_scalar_curvature(u, hd), riemannian_norm(u, hd)};
}

namespace {

FlowModel unweighted_model(const SymplecticPotential& u, const AffineFunction& theta) {
  auto op = DiscreteMabuchi::unweighted(u.chart_ptr(), u.has_guillemin_part());
  AffinePart a;
  a.values = sample_affine(u.chart(), theta);
  for (double& v : a.values) v = -v;
  for (double g : theta.gradient) a.A.push_back(-g);
  a.B = -theta.constant;
  FlowModel m{std::move(op), u.chart().weights(), nullptr, false};
  m.affine = [a](const std::vector<double>&) { return a; };
  return m;
}

struct Eval {
  HessianData hd;
  std::vector<double> R;
  AffinePart a;
  std::vector<double> drift;
};

Eval evaluate_model(const FlowModel& m, const std::vector<double>& f, const AffinePart* fixed = nullptr) {
  Eval e;
  e.hd = m.op.hessians(f);
  e.R = m.op.curvature(e.hd);
  e.a = fixed ? *fixed : m.affine(e.R);
  e.drift.resize(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) e.drift[k] = -(e.R[k] + e.a.values[k]);
  return e;
}

double weighted_square_sum(const std::vector<double>& w, const std::vector<double>& v) {
  double s = 0;
  for (std::size_t k = 0; k < v.size(); ++k) s += w[k] * v[k] * v[k];
  return s;
}

double weighted_distance(const std::vector<double>& w, const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += w[k] * (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

double max_abs_of(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::vector<double> rk4(const FlowModel& m, const std::vector<double>& f, double dt) {
  const std::size_t N = f.size();
  auto k1 = evaluate_model(m, f).drift;
  std::vector<double> y(N);
  for (std::size_t k = 0; k < N; ++k) y[k] = f[k] + 0.5 * dt * k1[k];
  auto k2 = evaluate_model(m, y).drift;
  for (std::size_t k = 0; k < N; ++k) y[k] = f[k] + 0.5 * dt * k2[k];
  auto k3 = evaluate_model(m, y).drift;
  for (std::size_t k = 0; k < N; ++k) y[k] = f[k] + dt * k3[k];
  auto k4 = evaluate_model(m, y).drift;
  for (std::size_t k = 0; k < N; ++k) y[k] = f[k] + dt / 6.0 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
  return y;
}

// Minimises M(g) + |g - f|^2_w / (2 dt) by damped Newton iterations.
std::vector<double> backward_euler(const FlowModel& m, const std::vector<double>& f, double dt, const AffinePart& a) {
  const auto& w = m.op.weights();
  const std::size_t N = f.size();
  std::vector<double> g = f;
  Eigen::VectorXd grad(static_cast<Eigen::Index>(N));
  for (int it = 0; it < 40; ++it) {
    auto e = evaluate_model(m, g, &a);
    for (std::size_t k = 0; k < N; ++k) grad(k) = w[k] * (e.R[k] + a.values[k]) + w[k] * (g[k] - f[k]) / dt;
    Eigen::SparseMatrix<double> K = m.op.second_variation(e.hd);
    for (std::size_t k = 0; k < N; ++k) K.coeffRef(k, k) += w[k] / dt;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(K);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::SingularHessian, "Newton system not factorizable");
    Eigen::VectorXd d = solver.solve(-grad);
    double move = d.lpNorm<Eigen::Infinity>();
    double gdist = 0, gmax = 0;
    for (std::size_t k = 0; k < N; ++k) {
      gdist = std::max(gdist, std::abs(g[k] - f[k]));
      gmax = std::max(gmax, std::abs(g[k]));
    }
    double alpha = 1.0;
    std::vector<double> trial(N);
    bool taken = false;
    for (int ls = 0; ls < 30 && !taken; ++ls, alpha *= 0.5) {
      for (std::size_t k = 0; k < N; ++k) trial[k] = g[k] + alpha * d(k);
      try {
        const double dM = m.op.energy_difference(trial, g, e.hd, a.values);
        double dQ = 0;
        for (std::size_t k = 0; k < N; ++k)
          dQ += w[k] * ((trial[k] - f[k]) * (trial[k] - f[k]) - (g[k] - f[k]) * (g[k] - f[k]));
        const double dPhi = dM + 0.5 * dQ / dt;
        if (dPhi <= 0 || alpha * move < 1e-9 * (1 + gmax)) taken = true;
      } catch (const Error& err) {
        if (err.code() != ErrorCode::SingularHessian) throw;
      }
    }
    if (!taken) throw Error(ErrorCode::SingularHessian, "Newton line search failed");
    alpha *= 2;  // undo the last halving of the loop increment
    g = trial;
    if (alpha * move <= 1e-11 * gdist + 1e-15 * (1 + gmax)) return g;
  }
  throw Error(ErrorCode::SingularHessian, "Newton iteration did not converge");
}

double orthogonality_residual(const GridChart& chart, const std::vector<double>& w, const std::vector<double>& R,
                              const std::vector<double>& a) {
  const int n = chart.dim();
  double worst = 0;
  for (int b = 0; b <= n; ++b) {
    double s = 0;
    for (std::size_t k = 0; k < R.size(); ++k) {
      const double basis = b == 0 ? 1.0 : chart.node(static_cast<int>(k)).x[b - 1];
      s += w[k] * (R[k] + a[k]) * basis;
    }
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

double max_inverse_eigenvalue(const HessianData& hd) {
  double m = 0;
  for (const auto& W : hd.W) {
    Eigen::SelfAdjointEigenSolver<Mat> es(W, Eigen::EigenvaluesOnly);
    m = std::max(m, es.eigenvalues()(es.eigenvalues().size() - 1));
  }
  return m;
}

AffineFunction theta_of(const AffinePart& a) {
  AffineFunction t;
  for (double v : a.A) t.gradient.push_back(-v);
  t.constant = -a.B;
  return t;
}

}  // namespace

RunResult run_model(const FlowModel& model, const SymplecticPotential& u0, const FlowControls& c) {
  const auto& chart = model.op.chart();
  if (!same_chart(chart, u0.chart())) throw Error(ErrorCode::ChartMismatch, "model and start live on different charts");
  if (!(c.dt0 > 0) || !(c.t_max > 0) || !(c.tol > 0)) throw Error(ErrorCode::InvalidInput, "controls must be positive");
  const auto& w = model.op.weights();
  const std::vector<double> f0 = u0.f();
  std::vector<double> target_f(f0.size(), 0.0);
  if (c.target) {
    require_same_chart(u0, *c.target);
    target_f = c.target->f();
  }

  Eval cur;
  try {
    cur = evaluate_model(model, f0);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SingularHessian) throw Error(ErrorCode::NonConvexStart, e.what());
    throw;
  }
  const HessianData hd0 = cur.hd;
  const AffinePart a0 = cur.a;
  const double h = chart.spacing();

  auto make_row = [&](const Eval& e, const std::vector<double>& f, double t, double dt, int halvings,
                      const AffinePart& used) {
    TraceRow r;
    r.t = t;
    r.dt = dt;
    r.calabi_energy = weighted_square_sum(model.energy_weights, e.drift);
    r.weighted_energy = weighted_square_sum(w, e.drift);
    r.mabuchi_rel = model.op.energy_difference(f, f0, hd0, a0.values);
    r.sup_residual = max_abs_of(e.drift);
    auto rm = riemannian_norm(u0.with_f(f, PotentialTag::Flowed), e.hd);
    r.max_rm = rm.values.empty() ? 0.0 : max_value(rm);
    r.dist_to_start = weighted_distance(w, f, f0);
    r.dist_to_target = weighted_distance(w, f, target_f);
    r.min_hessian_eig = e.hd.min_eigenvalue;
    r.max_f = *std::max_element(f.begin(), f.end());
    r.halvings = halvings;
    r.A = e.a.A;
    r.B = e.a.B;
    r.orthogonality_residual = orthogonality_residual(chart, w, e.R, used.values);
    return r;
  };

  FlowTrace trace;
  trace.weighted = model.weighted;
  std::vector<double> f = f0;
  double t = 0;
  trace.rows.push_back(make_row(cur, f, t, 0.0, 0, cur.a));
  double E = trace.rows.back().weighted_energy;
  // Energies this small are roundoff in the curvature; steps between them
  // count as non-increasing.
  double total_weight = 0, scale = 0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    total_weight += w[k];
    scale = std::max(scale, std::abs(model.op.closure()[k]));
  }
  const double noise_floor = 1e-18 * total_weight * (1 + scale) * (1 + scale);

  RunStatus status = RunStatus::TimeLimit;
  std::string message;
  double dt = c.dt0;
  int halvings = 0, consecutive = 0;
  long accepted = 0;
  if (trace.rows.back().sup_residual < c.tol) {
    status = RunStatus::Converged;
  } else {
    while (true) {
      const double cap = c.scheme == Scheme::RK4
                             ? c.safety * std::pow(h, 4) / std::pow(max_inverse_eigenvalue(cur.hd), 2)
                             : c.dt_max;
      dt = std::min(dt, cap);
      const double remaining = c.t_max - t;
      const bool last = dt >= remaining;
      const double dt_try = last ? remaining : dt;
      bool ok = false;
      Eval next;
      std::vector<double> g;
      try {
        g = c.scheme == Scheme::RK4 ? rk4(model, f, dt_try) : backward_euler(model, f, dt_try, cur.a);
        next = evaluate_model(model, g);
        const double En = weighted_square_sum(w, next.drift);
        ok = En < E || (En <= noise_floor && E <= noise_floor);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularHessian) throw;
      }
      if (!ok) {
        ++halvings;
        consecutive = 0;
        dt = dt_try / 2;
        if (halvings > c.max_halvings || dt < 1e-15) {
          status = RunStatus::StepUnderflow;
          message = "step size underflow at t = " + std::to_string(t);
          break;
        }
        continue;
      }
      const AffinePart used = c.scheme == Scheme::RK4 ? next.a : cur.a;
      t = last ? c.t_max : t + dt_try;
      f = std::move(g);
      cur = std::move(next);
      trace.rows.push_back(make_row(cur, f, t, dt_try, halvings, used));
      E = trace.rows.back().weighted_energy;
      halvings = 0;
      ++accepted;
      if (++consecutive >= c.grow_after) {
        dt = std::min(dt * c.grow_factor, cap);
        consecutive = 0;
      }
      if (c.checkpoint_every > 0 && c.on_checkpoint && accepted % c.checkpoint_every == 0) {
        c.on_checkpoint(make_state(u0.with_f(f, PotentialTag::Flowed), theta_of(cur.a), t), accepted);
      }
      if (trace.rows.back().sup_residual < c.tol) {
        status = RunStatus::Converged;
        break;
      }
      if (t >= c.t_max) {
        status = RunStatus::TimeLimit;
        break;
      }
      if (accepted >= c.max_steps) {
        status = RunStatus::StepLimit;
        break;
      }
    }
  }
  auto final_state = make_state(u0.with_f(f, accepted ? PotentialTag::Flowed : u0.tag()), theta_of(cur.a), t);
  return RunResult{std::move(trace), std::move(final_state), status, message};
}

RunResult run(const DelzantPolytope& P, const SymplecticPotential& u0, const AffineFunction& theta,
              const FlowControls& controls) {
  if (static_cast<int>(theta.gradient.size()) != P.dim()) throw Error(ErrorCode::InvalidInput, "theta has wrong dimension");
  FlowControls c = controls;
  if (!c.target) c.target = u0.has_guillemin_part() ? guillemin(u0.chart_ptr()) : u0.with_f(std::vector<double>(u0.f().size(), 0.0), PotentialTag::Guillemin);
  return run_model(unweighted_model(u0, theta), u0, c);
}

std::vector<double> drift(const SymplecticPotential& u, const AffineFunction& theta) {
  return evaluate_model(unweighted_model(u, theta), u.f()).drift;
}

FlowState step(const FlowState& state, double dt) {
  if (!(dt > 0)) throw Error(ErrorCode::InvalidInput, "dt must be positive");
  auto m = unweighted_model(state.u, state.theta);
  auto g = rk4(m, state.u.f(), dt);
  return make_state(state.u.with_f(std::move(g), PotentialTag::Flowed), state.theta, state.t + dt);
}

FlowState step_implicit(const FlowState& state, double dt) {
  if (!(dt > 0)) throw Error(ErrorCode::InvalidInput, "dt must be positive");
  auto m = unweighted_model(state.u, state.theta);
  auto a = m.affine({});
  auto g = backward_euler(m, state.u.f(), dt, a);
  return make_state(state.u.with_f(std::move(g), PotentialTag::Flowed), state.theta, state.t + dt);
}

double calabi_energy(const SymplecticPotential& u, const AffineFunction& theta) {
  return weighted_square_sum(u.chart().weights(), drift(u, theta));
}

double calabi_energy(const GridChart& chart, const std::vector<double>& R, const AffineFunction& theta) {
  if (R.size() != chart.size()) throw Error(ErrorCode::ChartMismatch, "field has wrong length");
  std::vector<double> r(R.size());
  for (std::size_t k = 0; k < R.size(); ++k) r[k] = R[k] - theta(chart.x(static_cast<int>(k)));
  return weighted_square_sum(chart.weights(), r);
}

double distance(const SymplecticPotential& u1, const SymplecticPotential& u2) {
  require_same_chart(u1, u2);
  const auto v1 = u1.has_guillemin_part() == u2.has_guillemin_part() ? u1.f() : u1.nodal_values();
  const auto v2 = u1.has_guillemin_part() == u2.has_guillemin_part() ? u2.f() : u2.nodal_values();
  return weighted_distance(u1.chart().weights(), v1, v2);
}

RateFit convergence_rate(const FlowTrace& trace) {
  std::size_t start = 0;
  for (std::size_t i = 0; i < trace.rows.size(); ++i)
    if (trace.rows[i].halvings > 0) start = i;
  const std::size_t available = trace.rows.size() - start;
  if (available < 20) throw Error(ErrorCode::TraceTooShort, "fewer than 20 rows after the last dt halving");
  const std::size_t first = start + available / 2;
  std::vector<double> ts, ys;
  for (std::size_t i = first; i < trace.rows.size(); ++i) {
    const double E = trace.weighted ? trace.rows[i].weighted_energy : trace.rows[i].calabi_energy;
    if (!(E > 0)) throw Error(ErrorCode::TraceTooShort, "energy not positive in the tail; rate undefined");
    ts.push_back(trace.rows[i].t);
    ys.push_back(std::log(E));
  }
  const double m = static_cast<double>(ts.size());
  double st = 0, sy = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sy += ys[i];
  }
  const double tb = st / m, yb = sy / m;
  double stt = 0, sty = 0, syy = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - tb) * (ts[i] - tb);
    sty += (ts[i] - tb) * (ys[i] - yb);
    syy += (ys[i] - yb) * (ys[i] - yb);
  }
  if (!(stt > 0)) throw Error(ErrorCode::TraceTooShort, "tail has no time spread");
  RateFit fit;
  fit.rate = sty / stt;
  fit.r2 = syy > 0 ? (sty * sty) / (stt * syy) : 1.0;
  fit.rows_used = ts.size();
  return fit;
}

std::vector<ProbeRow> linf_bound_probe(const DelzantPolytope& P, const std::vector<SymplecticPotential>& family,
                                       const std::optional<std::vector<double>>& x0_opt) {
  const auto x0 = x0_opt ? *x0_opt : P.barycenter();
  std::vector<ProbeRow> rows;
  for (const auto& member : family) {
    ProbeRow row;
    try {
      auto hd = hessian_data(member);
      auto ut = normalize(member, x0);
      row.boundary_integral = boundary_integral(
          P, [&](std::span<const double> x) { return evaluate(ut, x); }, member.chart().spacing());
      auto rm = riemannian_norm(ut, hd);
      row.max_rm = rm.values.empty() ? 0.0 : max_value(rm);
      auto vals = ut.nodal_values();
      row.max_u = *std::max_element(vals.begin(), vals.end());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularHessian) throw;
      row.convex = false;
      row.boundary_integral = row.max_rm = row.max_u = NAN;
      row.note = "excluded: not convex";
    }
    rows.push_back(row);
  }
  return rows;
}

ProbeSummary summarize_probe(const std::vector<ProbeRow>& rows, double boundary_bound, double curvature_bound) {
  ProbeSummary s;
  s.members = rows.size();
  s.sup_max_u = NAN;
  s.min_max_rm = INFINITY;
  for (const auto& r : rows) {
    if (!r.convex) continue;
    s.min_max_rm = std::min(s.min_max_rm, r.max_rm);
    if (r.max_rm <= curvature_bound && r.boundary_integral <= boundary_bound) {
      ++s.filtered;
      s.sup_max_u = std::isnan(s.sup_max_u) ? r.max_u : std::max(s.sup_max_u, r.max_u);
    }
  }
  return s;
}

std::vector<SymplecticPotential> make_probe_family(ChartPtr chart, unsigned long seed, int count) {
  const auto& P = chart->polytope();
  const int m = P.facet_count();
  const int n = P.dim();
  // Smooth perturbation shapes: products of facet functions and quadratics.
  std::vector<PointFunction> shapes;
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j)
      shapes.push_back([&P, i, j](std::span<const double> x) { return P.l(i, x) * P.l(j, x); });
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j)
        shapes.push_back([&P, i, j](std::span<const double> x) { return P.l(i, x) * P.l(i, x) * P.l(j, x); });
  shapes.push_back([&P, m](std::span<const double> x) {
    double p = 1;
    for (int i = 0; i < m; ++i) p *= P.l(i, x);
    return p;
  });
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) shapes.push_back([a, b](std::span<const double> x) { return x[a] * x[b]; });

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> scale(0.0, 1.0);
  std::vector<SymplecticPotential> family;
  family.push_back(guillemin(chart));
  while (static_cast<int>(family.size()) < count) {
    std::vector<double> c(shapes.size());
    for (auto& v : c) v = coef(rng);
    double s = scale(rng);
    std::vector<double> base(chart->size(), 0.0);
    for (std::size_t k = 0; k < base.size(); ++k)
      for (std::size_t q = 0; q < shapes.size(); ++q) base[k] += c[q] * shapes[q](chart->x(static_cast<int>(k)));
    for (int attempt = 0; attempt < 40; ++attempt, s *= 0.5) {
      std::vector<double> f(base.size());
      for (std::size_t k = 0; k < f.size(); ++k) f[k] = s * base[k];
      SymplecticPotential u(chart, std::move(f), PotentialTag::Perturbed, true);
      try {
        hessian_data(u);
        family.push_back(std::move(u));
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularHessian) throw;
      }
    }
  }
  return family;
}

}  // namespace toricflow
