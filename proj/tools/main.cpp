#include "toricflow/errors.hpp"
#include "toricflow/io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace toricflow;

namespace {

// Values shared by all subcommands; flags override the config file.
struct Options {
  std::string polytope;
  std::string config;
  std::string weight;
  std::string h = "1/32";
  double dt0 = 1e-5;
  double tmax = 1.0;
  double tol = 1e-3;
  double dt_max = 2e-4;
  std::string scheme = "implicit";
  long checkpoint_every = 0;
  int max_denominator = 5;
  double epsilon = 0.25;
  unsigned long seed = 1;
  int count = 50;
  double c1 = 1e300;
  double curvature_bound = 1.0;
  std::string init = "guillemin";
  std::string out;
  std::string final_checkpoint;
  std::string a, b;
  int samples = 201;
};

const std::vector<std::string> kConfigKeys = {
    "polytope", "weight", "h", "dt0", "tmax", "tol", "dt_max", "scheme", "checkpoint_every", "max_denominator",
    "epsilon", "seed", "count", "c1", "curvature_bound", "init", "out", "final", "a", "b", "samples"};

std::string operation;  // named on stderr when a command fails

[[noreturn]] void fail_validation(const std::string& what) { throw Error(ErrorCode::InvalidInput, what); }

double parse_number(const std::string& text, const std::string& key) {
  try {
    return to_double(parse_rational(text));
  } catch (const std::exception&) {
    fail_validation("bad value for " + key + ": " + text);
  }
}

std::vector<double> parse_point(const std::string& text, int dim, const std::string& key) {
  std::vector<double> p;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) p.push_back(parse_number(item, key));
  if (static_cast<int>(p.size()) != dim) fail_validation(key + " needs " + std::to_string(dim) + " coordinates");
  return p;
}

void apply_config(CLI::App& sub, Options& o) {
  if (o.config.empty()) return;
  const auto cfg = read_config(o.config, kConfigKeys);
  auto given = [&](const std::string& flag) {
    auto* opt = sub.get_option_no_throw(flag);
    return opt && opt->count() > 0;
  };
  for (const auto& [k, v] : cfg) {
    std::string flag = "--" + k;
    for (auto& c : flag)
      if (c == '_') c = '-';
    if (k == "polytope") {
      if (o.polytope.empty()) o.polytope = v;
      continue;
    }
    if (given(flag)) continue;
    if (k == "weight") o.weight = v;
    else if (k == "h") o.h = v;
    else if (k == "dt0") o.dt0 = parse_number(v, k);
    else if (k == "tmax") o.tmax = parse_number(v, k);
    else if (k == "tol") o.tol = parse_number(v, k);
    else if (k == "dt_max") o.dt_max = parse_number(v, k);
    else if (k == "scheme") o.scheme = v;
    else if (k == "checkpoint_every") o.checkpoint_every = static_cast<long>(parse_number(v, k));
    else if (k == "max_denominator") o.max_denominator = static_cast<int>(parse_number(v, k));
    else if (k == "epsilon") o.epsilon = parse_number(v, k);
    else if (k == "seed") o.seed = static_cast<unsigned long>(parse_number(v, k));
    else if (k == "count") o.count = static_cast<int>(parse_number(v, k));
    else if (k == "c1") o.c1 = parse_number(v, k);
    else if (k == "curvature_bound") o.curvature_bound = parse_number(v, k);
    else if (k == "init") o.init = v;
    else if (k == "out") o.out = v;
    else if (k == "final") o.final_checkpoint = v;
    else if (k == "a") o.a = v;
    else if (k == "b") o.b = v;
    else if (k == "samples") o.samples = static_cast<int>(parse_number(v, k));
  }
}

void require_positive(const Options& o) {
  const double h = parse_number(o.h, "h");
  if (!(h > 0) || !(o.dt0 > 0) || !(o.tmax > 0) || !(o.tol > 0) || !(o.dt_max > 0) || o.max_denominator <= 0 ||
      !(o.epsilon > 0) || o.count <= 0 || o.samples < 2 || o.checkpoint_every < 0)
    fail_validation("numeric controls must be positive");
  if (o.polytope.empty()) fail_validation("a polytope file is required");
}

// Writes to the file, or to stdout when the path is empty or "-".
template <class F>
void emit(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  write(out);
}

std::shared_ptr<const DelzantPolytope> load_polytope(const Options& o) {
  operation = "load polytope";
  return std::make_shared<const DelzantPolytope>(read_polytope(o.polytope));
}

SymplecticPotential initial_potential(const ChartPtr& chart, const Options& o) {
  operation = "load initial potential";
  if (o.init == "guillemin") return guillemin(chart);
  return load_potential(chart, read_checkpoint(o.init));
}

FlowControls controls_of(const Options& o) {
  FlowControls c;
  c.dt0 = o.dt0;
  c.t_max = o.tmax;
  c.tol = o.tol;
  c.dt_max = o.dt_max;
  if (o.scheme == "implicit") c.scheme = Scheme::Implicit;
  else if (o.scheme == "rk4") c.scheme = Scheme::RK4;
  else fail_validation("scheme must be implicit or rk4");
  c.checkpoint_every = o.checkpoint_every;
  if (o.checkpoint_every > 0) {
    const std::string stem = o.final_checkpoint.empty() ? "final.ckpt" : o.final_checkpoint;
    c.on_checkpoint = [stem](const FlowState& s, long step) {
      write_checkpoint(stem + "." + std::to_string(step), s.u, s.t);
    };
  }
  return c;
}

int finish_run(const RunResult& r, const Options& o, int dim) {
  operation = "write outputs";
  emit(o.out.empty() ? "trace.csv" : o.out, [&](std::ostream& s) { write_trace(s, r.trace, dim); });
  write_checkpoint(o.final_checkpoint.empty() ? "final.ckpt" : o.final_checkpoint, r.final_state.u, r.final_state.t);
  const auto& last = r.trace.rows.back();
  std::cout << "status=" << status_name(r.status) << " steps=" << r.trace.rows.size() - 1
            << " t=" << format_double(last.t) << " sup_residual=" << format_double(last.sup_residual) << "\n";
  if (r.status == RunStatus::StepUnderflow) {
    std::cerr << "toricflow: flow failed: " << r.message << "\n";
    return 3;
  }
  return 0;
}

int cmd_check(const Options& o) {
  operation = "read polytope";
  if (o.polytope.empty()) fail_validation("a polytope file is required");
  auto spec = read_polytope_spec(o.polytope);
  operation = "check Delzant conditions";
  const auto rep = check_delzant(spec.dim, spec.facets, spec.name);
  std::cout << rep.message << "\n";
  if (!rep.valid) {
    std::cerr << "toricflow: check failed: " << error_name(rep.code) << "\n";
    return 2;
  }
  return 0;
}

int cmd_theta(const Options& o) {
  auto P = load_polytope(o);
  operation = "solve for theta";
  const RVec th = extremal_affine_exact(*P);
  const int n = P->dim();
  std::cout << "theta = " << format_rational(th[n]);
  for (int i = 0; i < n; ++i)
    if (th[i] != 0) std::cout << " + (" << format_rational(th[i]) << ")*x" << i + 1;
  std::cout << "\n";
  const auto res = extremal_residuals(*P, extremal_affine(*P));
  double worst = 0;
  for (std::size_t i = 0; i < res.size(); ++i) {
    std::cout << "residual[" << (i == 0 ? std::string("1") : "x" + std::to_string(i)) << "] = " << format_double(res[i])
              << "\n";
    worst = std::max(worst, std::abs(res[i]));
  }
  std::cout << "max_residual = " << format_double(worst) << "\n";
  return 0;
}

int cmd_scan(const Options& o) {
  auto P = load_polytope(o);
  operation = "stability scan";
  const auto rep = pl_stability_scan(*P, extremal_affine(*P), o.max_denominator);
  emit(o.out.empty() ? "scan.csv" : o.out, [&](std::ostream& s) { write_scan(s, rep, P->dim()); });
  std::cout << "lambda_estimate=" << format_double(rep.lambda_estimate) << " candidates=" << rep.rows.size() << "\n";
  return 0;
}

int cmd_flow(const Options& o) {
  auto P = load_polytope(o);
  operation = "build grid";
  auto chart = make_grid(P, parse_number(o.h, "h"));
  auto u0 = initial_potential(chart, o);
  auto c = controls_of(o);
  operation = "flow";
  const auto r = run(*P, u0, extremal_affine(*P), c);
  return finish_run(r, o, P->dim());
}

int cmd_wflow(const Options& o) {
  auto P = load_polytope(o);
  if (o.weight.empty()) fail_validation("wflow needs --weight");
  operation = "load weight";
  WeightModel w(*P, read_weight(o.weight));
  operation = "build grid";
  auto chart = make_grid(P, parse_number(o.h, "h"));
  auto u0 = initial_potential(chart, o);
  auto c = controls_of(o);
  operation = "weighted flow";
  const auto r = weighted_flow(w, u0, c);
  const int code = finish_run(r, o, P->dim());
  if (o.epsilon > 2 * chart->spacing()) {
    operation = "interior bound probe";
    const auto ib = interior_bound_probe(r.final_state.u, w, o.epsilon);
    std::cout << "interior_bound epsilon=" << format_double(o.epsilon) << " weighted_l2=" << format_double(ib.weighted_l2)
              << " max_abs_u=" << format_double(ib.max_abs_u) << " max_abs_du=" << format_double(ib.max_abs_du) << "\n";
  }
  return code;
}

int cmd_probe(const Options& o) {
  auto P = load_polytope(o);
  operation = "build grid";
  auto chart = make_grid(P, parse_number(o.h, "h"));
  operation = "probe family";
  const auto family = make_probe_family(chart, o.seed, o.count);
  const auto rows = linf_bound_probe(*P, family);
  emit(o.out.empty() ? "probe.csv" : o.out, [&](std::ostream& s) { write_probe(s, rows); });
  const auto sum = summarize_probe(rows, o.c1, o.curvature_bound);
  std::cout << "members=" << sum.members << " filtered=" << sum.filtered << " sup_max_u=" << format_double(sum.sup_max_u)
            << " min_max_rm=" << format_double(sum.min_max_rm) << "\n";
  return 0;
}

int cmd_segment(const Options& o) {
  auto P = load_polytope(o);
  operation = "build grid";
  auto chart = make_grid(P, parse_number(o.h, "h"));
  auto u = initial_potential(chart, o);
  const int n = P->dim();
  std::vector<double> a = o.a.empty() ? std::vector<double>(n, 0.0) : parse_point(o.a, n, "a");
  std::vector<double> b = o.b.empty() ? P->barycenter() : parse_point(o.b, n, "b");
  operation = "segment profile";
  const auto prof = segment_profile(u, a, b, o.samples);
  emit(o.out.empty() ? "segment.csv" : o.out, [&](std::ostream& s) { write_segment(s, prof); });
  std::cout << "max_rm=" << format_double(prof.max_rm) << " chord_excess=" << format_double(prof.chord_excess) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for toric extremal Kähler metrics"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help");
  Options o;
  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const Options&);
  };
  const Sub subs[] = {{"check", "validate a polytope file", cmd_check},
                      {"theta", "extremal affine function", cmd_theta},
                      {"scan", "piecewise linear stability scan", cmd_scan},
                      {"flow", "modified Calabi flow", cmd_flow},
                      {"wflow", "weighted Calabi flow", cmd_wflow},
                      {"probe", "L-infinity bound probe", cmd_probe},
                      {"segment", "segment profile of a potential", cmd_segment}};
  std::vector<std::pair<CLI::App*, const Sub*>> apps;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    sub->set_help_flag("--help", "print help");
    sub->add_option("polytope", o.polytope, "polytope file");
    sub->add_option("--config", o.config, "config file (flags override it)");
    sub->add_option("--weight", o.weight, "weight file");
    sub->add_option("--h", o.h, "grid spacing, decimal or p/q");
    sub->add_option("--dt0", o.dt0, "initial step");
    sub->add_option("--tmax", o.tmax, "final time");
    sub->add_option("--tol", o.tol, "stop when sup residual drops below");
    sub->add_option("--dt-max", o.dt_max, "largest implicit step");
    sub->add_option("--scheme", o.scheme, "implicit or rk4");
    sub->add_option("--checkpoint-every", o.checkpoint_every, "write a checkpoint every N accepted steps");
    sub->add_option("--max-denominator", o.max_denominator, "scan denominator bound");
    sub->add_option("--epsilon", o.epsilon, "interior depth for the weighted bound probe");
    sub->add_option("--seed", o.seed, "probe family seed");
    sub->add_option("--count", o.count, "probe family size");
    sub->add_option("--c1", o.c1, "boundary integral bound for the probe filter");
    sub->add_option("--curvature-bound", o.curvature_bound, "max |Rm| bound for the probe filter");
    sub->add_option("--init", o.init, "guillemin or a checkpoint file");
    sub->add_option("--out", o.out, "main output file, - for stdout");
    sub->add_option("--final", o.final_checkpoint, "final checkpoint file");
    sub->add_option("--a", o.a, "segment start, comma separated");
    sub->add_option("--b", o.b, "segment end, comma separated");
    sub->add_option("--samples", o.samples, "segment samples");
    apps.emplace_back(sub, &s);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  for (auto& [sub, s] : apps) {
    if (!sub->parsed()) continue;
    try {
      operation = "read config";
      apply_config(*sub, o);
      if (std::string(s->name) != "check") require_positive(o);
      return s->fn(o);
    } catch (const Error& e) {
      std::cerr << "toricflow " << s->name << ": " << operation << " failed: " << error_name(e.code()) << ": "
                << e.what() << "\n";
      return is_validation_error(e.code()) ? 2 : 3;
    } catch (const std::exception& e) {
      std::cerr << "toricflow " << s->name << ": " << operation << " failed: " << e.what() << "\n";
      return 3;
    }
  }
  return 2;
}
