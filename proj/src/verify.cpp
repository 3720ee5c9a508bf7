#include "freeito/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "freeito/error.hpp"
#include "freeito/parallel.hpp"
#include "freeito/randmat.hpp"

namespace freeito {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Stats {
  double mean = 0.0;
  double stderr_ = 0.0;
};

Stats stats_of(const std::vector<double>& x) {
  Stats s;
  if (x.empty()) return s;
  for (double v : x) s.mean += v;
  s.mean /= static_cast<double>(x.size());
  if (x.size() < 2) return s;
  double var = 0.0;
  for (double v : x) var += (v - s.mean) * (v - s.mean);
  var /= static_cast<double>(x.size() - 1);
  s.stderr_ = std::sqrt(var / static_cast<double>(x.size()));
  return s;
}

int threads_for(const MonteCarlo& mc) { return mc.threads > 0 ? mc.threads : default_threads(); }

void check_mc(const MonteCarlo& mc) {
  if (mc.paths < 1) throw InvalidArgument("paths must be positive");
}

// Ascending, and the finest resolution is a power-of-two multiple of each of the others.
std::vector<int> checked_steps(std::vector<int> steps_list) {
  if (steps_list.empty()) throw InvalidArgument("steps_list must not be empty");
  std::sort(steps_list.begin(), steps_list.end());
  if (steps_list.front() < 1) throw InvalidArgument("steps must be positive");
  if (std::adjacent_find(steps_list.begin(), steps_list.end()) != steps_list.end())
    throw InvalidArgument("steps_list has duplicates");
  const int finest = steps_list.back();
  for (int s : steps_list) {
    int r = finest / s;
    if (finest % s != 0 || (r & (r - 1)) != 0)
      throw InvalidArgument("steps_list entries must divide the finest by a power of two");
  }
  return steps_list;
}

// Increments for every resolution in `steps_list`, coarsened from one finest draw.
std::vector<IncrementSet> coupled_increments(const ItoProcessSpec& spec, double T, const std::vector<int>& steps_list,
                                             RngStream& rng) {
  std::vector<IncrementSet> out(steps_list.size());
  IncrementSet inc = draw_increments(spec.dim, spec.n_drivers, T, steps_list.back(), rng);
  for (std::size_t r = steps_list.size(); r-- > 0;) {
    while (static_cast<int>(inc.size()) > steps_list[r]) inc = coarsen(inc);
    out[r] = inc;
  }
  return out;
}

SpectralDecomposition eigen_of(const ComplexMatrix& m) { return hermitian_eigen(HermitianMatrix::symmetrized(m)); }

ComplexMatrix ito_residual(const FunctionSpec& f, const ItoProcessSpec& spec, const SimulationPath& path) {
  const int steps = path.steps();
  const double dt = path.dt();
  ComplexMatrix r = apply_function(f, eigen_of(path.states.back())) - apply_function(f, eigen_of(path.states.front()));
  for (int k = 0; k < steps; ++k) {
    auto sd = eigen_of(path.states[k]);
    r -= frechet1_apply(nc_first_derivative(f, sd), increment_of(path, k));
    const SpectralKernel3 k3(f, std::move(sd));
    for (int i = 0; i < spec.n_drivers; ++i) {
      const auto u = diffusion_at(spec, path, i, k);
      if (!u.empty()) r.axpy(-0.5 * dt, delta_u(k3, u));
    }
  }
  return r;
}

void require_self_adjoint(const ItoProcessSpec& spec, const char* where) {
  if (!spec.self_adjoint) throw InvalidArgument(std::string(where) + " needs a self-adjoint process");
}

std::vector<std::vector<double>> per_path_matrix(std::size_t paths, std::size_t cols) {
  return std::vector<std::vector<double>>(paths, std::vector<double>(cols, 0.0));
}

ResolutionRow make_row(int steps, const std::vector<double>& x) {
  const auto s = stats_of(x);
  return {steps, s.mean, s.stderr_, kInf, false};
}

std::vector<double> column(const std::vector<std::vector<double>>& m, std::size_t c) {
  std::vector<double> x;
  x.reserve(m.size());
  for (const auto& row : m) x.push_back(row[c]);
  return x;
}

}  // namespace

// -- Report ---------------------------------------------------------------------------

void VerificationReport::add_check(std::string name, double value, double tolerance) {
  checks.push_back({std::move(name), value, tolerance, value <= tolerance});
}

void VerificationReport::finalize() {
  pass = true;
  for (auto& r : rows) {
    r.pass = r.mean <= r.tolerance;
    pass = pass && r.pass;
  }
  for (auto& c : checks) {
    c.pass = c.value <= c.tolerance;
    pass = pass && c.pass;
  }
}

bool rederivable(const VerificationReport& r) {
  bool all = true;
  for (const auto& row : r.rows) {
    if (row.pass != (row.mean <= row.tolerance)) return false;
    all = all && row.pass;
  }
  for (const auto& c : r.checks) {
    if (c.pass != (c.value <= c.tolerance)) return false;
    all = all && c.pass;
  }
  return all == r.pass;
}

void apply_convergence_criteria(VerificationReport& r, const ConvergenceCriteria& c) {
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    double tol = i == 0 ? kInf : r.rows[i - 1].mean / c.decrease_factor;
    if (i + 1 == r.rows.size()) tol = std::min(tol, c.final_tolerance);
    r.rows[i].tolerance = tol;
  }
  r.parameters["decrease_factor"] = c.decrease_factor;
  r.parameters["final_tolerance"] = c.final_tolerance;
  r.finalize();
}

// -- Itô residual ------------------------------------------------------------------------

VerificationReport check_ito_residual(const FunctionSpec& f, const ItoProcessSpec& spec, double T,
                                      const std::vector<int>& steps_list, const MonteCarlo& mc,
                                      const ConvergenceCriteria& crit) {
  require_self_adjoint(spec, "check_ito_residual");
  check_mc(mc);
  const auto steps = checked_steps(steps_list);
  const std::size_t paths = static_cast<std::size_t>(mc.paths);
  auto residuals = per_path_matrix(paths, steps.size());
  std::vector<double> change(paths);

  parallel_for(paths, threads_for(mc), [&](std::size_t p) {
    RngStream rng(mc.seed, p);
    const auto incs = coupled_increments(spec, T, steps, rng);
    for (std::size_t r = 0; r < steps.size(); ++r) {
      const auto path = simulate_with_increments(spec, T, incs[r]);
      residuals[p][r] = ito_residual(f, spec, path).frobenius_norm();
      if (r + 1 == steps.size())
        change[p] = (apply_function(f, eigen_of(path.states.back())) - apply_function(f, eigen_of(path.states.front())))
                        .frobenius_norm();
    }
  });

  VerificationReport rep;
  rep.experiment = "ito-residual";
  rep.parameters = {{"N", spec.dim}, {"T", T}, {"steps_list", steps}, {"paths", mc.paths},
                    {"seed", mc.seed}, {"process", spec.name}};
  if (!f.label().empty()) rep.parameters["function"] = f.label();
  for (std::size_t r = 0; r < steps.size(); ++r) rep.rows.push_back(make_row(steps[r], column(residuals, r)));
  rep.diagnostics["mean_norm_f_change"] = stats_of(change).mean;
  apply_convergence_criteria(rep, crit);
  return rep;
}

// -- Quadratic covariation --------------------------------------------------------------

VerificationReport check_quadratic_covariation(const TripleTensorSum& w, const ItoProcessSpec& spec1,
                                               const ItoProcessSpec& spec2, double T,
                                               const std::vector<int>& steps_list, const MonteCarlo& mc,
                                               const ConvergenceCriteria& crit) {
  check_mc(mc);
  if (spec1.dim != spec2.dim || spec1.dim != w.dim()) throw DimensionMismatch("qcov: dimensions differ");
  if (spec1.n_drivers != spec2.n_drivers) throw InvalidArgument("qcov: processes must share their drivers");
  const auto steps = checked_steps(steps_list);
  const std::size_t paths = static_cast<std::size_t>(mc.paths);
  auto dev = per_path_matrix(paths, steps.size());

  parallel_for(paths, threads_for(mc), [&](std::size_t p) {
    RngStream rng(mc.seed, p);
    const auto incs = coupled_increments(spec1, T, steps, rng);
    for (std::size_t r = 0; r < steps.size(); ++r) {
      const auto p1 = simulate_with_increments(spec1, T, incs[r]);
      const auto p2 = simulate_with_increments(spec2, T, incs[r]);
      const double dt = p1.dt();
      ComplexMatrix d(w.dim());
      for (int k = 0; k < p1.steps(); ++k) {
        d += hash2(w, increment_of(p1, k), increment_of(p2, k));
        for (int i = 0; i < spec1.n_drivers; ++i) {
          const auto u1 = diffusion_at(spec1, p1, i, k);
          const auto u2 = diffusion_at(spec2, p2, i, k);
          if (u1.empty() || u2.empty()) continue;
          d.axpy(-dt, covariation_density(w, u1, u2));
        }
      }
      dev[p][r] = d.frobenius_norm();
    }
  });

  VerificationReport rep;
  rep.experiment = "qcov";
  rep.parameters = {{"N", spec1.dim}, {"T", T}, {"steps_list", steps}, {"paths", mc.paths},
                    {"seed", mc.seed}, {"process1", spec1.name}, {"process2", spec2.name}};
  for (std::size_t r = 0; r < steps.size(); ++r) rep.rows.push_back(make_row(steps[r], column(dev, r)));
  apply_convergence_criteria(rep, crit);
  return rep;
}

// -- Traced formula ------------------------------------------------------------------------

VerificationReport check_traced_formula(const FunctionSpec& f, const ItoProcessSpec& spec, double T, int steps,
                                        const MonteCarlo& mc, const TracedCriteria& crit) {
  require_self_adjoint(spec, "check_traced_formula");
  check_mc(mc);
  const FunctionSpec fp = derivative(f);
  const std::size_t paths = static_cast<std::size_t>(mc.paths);
  std::vector<double> residual(paths), final_trace(paths), drift_integral(paths), excess(paths);
  Complex initial_trace{0.0, 0.0};

  parallel_for(paths, threads_for(mc), [&](std::size_t p) {
    RngStream rng(mc.seed, p);
    const auto path = simulate(spec, T, steps, rng);
    const double dt = path.dt();
    const Complex tr_end = normalized_trace(apply_function(f, eigen_of(path.states.back())));
    const Complex tr_start = normalized_trace(apply_function(f, eigen_of(path.states.front())));
    Complex martingale{0.0, 0.0}, drift{0.0, 0.0};
    for (int k = 0; k < path.steps(); ++k) {
      const auto sd = eigen_of(path.states[k]);
      martingale += normalized_trace(apply_function(fp, sd) * increment_of(path, k));
      for (int i = 0; i < spec.n_drivers; ++i) {
        const auto u = diffusion_at(spec, path, i, k);
        if (!u.empty()) drift += 0.5 * dt * traced_correction(f, sd, u);
      }
    }
    residual[p] = std::abs(tr_end - tr_start - martingale - drift);
    final_trace[p] = tr_end.real();
    drift_integral[p] = drift.real();
    excess[p] = (tr_end - tr_start - drift).real();
    if (p == 0) initial_trace = tr_start;
  });

  VerificationReport rep;
  rep.experiment = "traced";
  rep.parameters = {{"N", spec.dim}, {"T", T}, {"steps", steps}, {"paths", mc.paths},
                    {"seed", mc.seed}, {"process", spec.name}};
  if (!f.label().empty()) rep.parameters["function"] = f.label();
  auto row = make_row(steps, residual);
  row.tolerance = crit.path_tolerance;
  rep.rows.push_back(row);

  // Martingale terms average out: E[tr f(M(T)) − tr f(M(0)) − drift] = 0.
  const auto ex = stats_of(excess);
  rep.add_check("expectation_deviation", std::abs(ex.mean), crit.sigmas * ex.stderr_);
  const auto ft = stats_of(final_trace);
  rep.diagnostics["mean_trace_f_T"] = ft.mean;
  rep.diagnostics["stderr_trace_f_T"] = ft.stderr_;
  rep.diagnostics["trace_f_0"] = initial_trace.real();
  rep.diagnostics["mean_drift_integral"] = stats_of(drift_integral).mean;
  rep.parameters["path_tolerance"] = crit.path_tolerance;
  rep.parameters["sigmas"] = crit.sigmas;
  rep.finalize();
  return rep;
}

// -- Semicircle -------------------------------------------------------------------------------

double semicircle_cdf(double s, double t) {
  if (!(t > 0.0)) throw InvalidArgument("semicircle variance must be positive");
  const double edge = 2.0 * std::sqrt(t);
  if (s <= -edge) return 0.0;
  if (s >= edge) return 1.0;
  const double pi = std::numbers::pi;
  return 0.5 + s * std::sqrt(4.0 * t - s * s) / (4.0 * pi * t) + std::asin(s / edge) / pi;
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw InvalidArgument("KS distance of an empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = cdf(sample[i]);
    d = std::max({d, (i + 1) / n - F, F - i / n});
  }
  return d;
}

VerificationReport check_semicircle(int n, double t, std::uint64_t seed) {
  if (n < 50) throw InvalidArgument("check_semicircle needs N >= 50");
  if (!(t > 0.0)) throw InvalidArgument("t must be positive");
  RngStream rng(seed, 0);
  const auto x = hermitian_increment(n, t, rng);
  const auto sd = hermitian_eigen(x);
  const double ks = ks_distance(sd.eigenvalues, [t](double s) { return semicircle_cdf(s, t); });
  const double edge = std::max(std::abs(sd.eigenvalues.front()), std::abs(sd.eigenvalues.back()));

  VerificationReport rep;
  rep.experiment = "semicircle";
  rep.parameters = {{"N", n}, {"T", t}, {"seed", seed}};
  rep.rows.push_back({1, ks, 0.0, 1.5 / std::sqrt(static_cast<double>(n)) + 0.05, false});
  rep.add_check("support_max_abs_eigenvalue", edge, 2.0 * std::sqrt(t) + 0.3);
  rep.finalize();
  return rep;
}

// -- Log identity ------------------------------------------------------------------------------

VerificationReport check_dhk_log_identity(int n, double T, int steps, const MonteCarlo& mc, double eps,
                                          Complex lambda, double tolerance) {
  check_mc(mc);
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  if (!(T > 0.0) || steps < 1) throw InvalidArgument("T and steps must be positive");
  const double h = T / 10.0;
  const int q = (steps + 9) / 10;  // steps per bandwidth
  const int total = 11 * q;        // grid reaches T + h
  const double horizon = T + h;

  const auto spec = modulus_squared(free_mult_bm(ComplexMatrix::identity(n)), lambda);
  const auto logf = log_shift(eps);
  const std::size_t paths = static_cast<std::size_t>(mc.paths);
  std::vector<double> lhs(paths), inv_g(paths), inv(paths), gg(paths), cross(paths);

  parallel_for(paths, threads_for(mc), [&](std::size_t p) {
    RngStream rng(mc.seed, p);
    const auto path = simulate(spec, horizon, total, rng);
    auto trace_log = [&](int k) { return normalized_trace(apply_function(logf, eigen_of(path.states[k]))).real(); };
    lhs[p] = (trace_log(11 * q) - trace_log(9 * q)) / (2.0 * h);

    const int k = 10 * q;
    const ComplexMatrix& g = path.aux[k];
    const ComplexMatrix gl = g - lambda * ComplexMatrix::identity(n);
    const auto sd = eigen_of(path.states[k]);
    std::vector<Complex> d;
    for (double x : sd.eigenvalues) d.push_back(1.0 / (x + eps));
    const ComplexMatrix resolvent = sd.from_eigenbasis(ComplexMatrix::diagonal(d));
    const ComplexMatrix gsg = g.adjoint() * g;
    inv[p] = normalized_trace(resolvent).real();
    inv_g[p] = normalized_trace(resolvent * gsg).real();
    gg[p] = normalized_trace(gsg).real();
    cross[p] = normalized_trace(g.adjoint() * gl * resolvent * gl.adjoint() * g).real();
  });

  const auto L = stats_of(lhs);
  const auto A = stats_of(inv_g);
  const auto B = stats_of(inv);
  const double rhs = eps * A.mean * B.mean;
  // Delta method for the product of two means (covariance neglected).
  const double rhs_se = eps * std::hypot(A.stderr_ * B.mean, B.stderr_ * A.mean);
  const double rel = std::abs(L.mean - rhs) / std::abs(rhs);
  const double rel_se = std::hypot(L.stderr_, rhs_se) / std::abs(rhs);

  VerificationReport rep;
  rep.experiment = "dhk-log";
  rep.parameters = {{"N", n},       {"T", T},
                    {"steps", steps}, {"paths", mc.paths},
                    {"seed", mc.seed}, {"eps", eps},
                    {"lambda", {lambda.real(), lambda.imag()}}, {"fd_bandwidth", h},
                    {"dt", horizon / total}};
  rep.rows.push_back({steps, rel, rel_se, tolerance, false});
  rep.diagnostics["lhs"] = L.mean;
  rep.diagnostics["lhs_stderr"] = L.stderr_;
  rep.diagnostics["rhs"] = rhs;
  rep.diagnostics["rhs_stderr"] = rhs_se;
  // Same derivative before the final algebraic simplification:
  // tr(R) tr(G*G) − tr(G*G_λ R G_λ* G) tr(R), R = (|G_λ|²+ε)⁻¹.
  rep.diagnostics["rhs_unsimplified"] = B.mean * stats_of(gg).mean - stats_of(cross).mean * B.mean;
  rep.finalize();
  return rep;
}

// -- Explicit correction -----------------------------------------------------------------------

ComplexMatrix ito_correction_explicit(const FunctionSpec& f, const HermitianMatrix& m, const TensorSumOperator& u) {
  const auto sd = hermitian_eigen(m);
  const int n = sd.dim();
  if (u.dim() != n) throw DimensionMismatch("ito_correction_explicit");
  std::vector<ComplexMatrix> proj;
  for (int i = 0; i < n; ++i) proj.push_back(sd.projection(i));
  const auto& ev = sd.eigenvalues;
  ComplexMatrix c(n);
  for (const auto& tj : u.terms())
    for (const auto& tk : u.terms())
      for (int l = 0; l < n; ++l)
        for (int mu = 0; mu < n; ++mu) {
          const Complex t1 = normalized_trace(tj.b * proj[mu] * tk.a);
          const Complex t2 = normalized_trace(tk.b * proj[mu] * tj.a);
          for (int nu = 0; nu < n; ++nu) {
            const Complex w = divided_difference(f, {ev[l], ev[mu], ev[nu]});
            c += w * (t1 * (proj[l] * tj.a * tk.b * proj[nu]) + t2 * (proj[l] * tk.a * tj.b * proj[nu]));
          }
        }
  return c;
}

}  // namespace freeito
