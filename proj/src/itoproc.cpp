#include "freeito/itoproc.hpp"

#include <cmath>
#include <string>

#include "freeito/error.hpp"

namespace freeito {

namespace {

template <class F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw CoefficientEvaluationError(std::string(what) + " threw: " + e.what());
  }
}

TensorSumOperator eval_diffusion(const ItoProcessSpec& spec, int i, double t, const ProcessState& s) {
  if (!spec.diffusion) return TensorSumOperator(spec.dim);
  auto u = guarded("diffusion", [&] { return spec.diffusion(i, t, s); });
  if (u.dim() != spec.dim)
    throw CoefficientEvaluationError("diffusion U_" + std::to_string(i) + " has dimension " +
                                     std::to_string(u.dim()));
  return u;
}

ComplexMatrix eval_drift(const ItoProcessSpec& spec, double t, const ProcessState& s) {
  if (!spec.drift) return ComplexMatrix(spec.dim);
  auto k = guarded("drift", [&] { return spec.drift(t, s); });
  if (k.dim() != spec.dim) throw CoefficientEvaluationError("drift has dimension " + std::to_string(k.dim()));
  return k;
}

bool finite(const ComplexMatrix& m) {
  for (const auto& z : m.entries())
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

void guard_norm(const ComplexMatrix& m, int step, const char* which) {
  if (!finite(m) || m.frobenius_norm() > kBlowUpNorm)
    throw Overflow(std::string(which) + " norm exceeded " + std::to_string(kBlowUpNorm) + " at step " +
                   std::to_string(step) + "; try a finer time grid");
}

// u^★ = u iff u # C = (u # C*)* for all C.
double star_defect(const TensorSumOperator& u) {
  const int n = u.dim();
  RngStream rng(0x5eed, 0);
  double worst = 0.0;
  for (int trial = 0; trial < 2; ++trial) {
    ComplexMatrix c(n);
    for (auto& z : c.entries()) z = Complex{rng.normal(), rng.normal()};
    const ComplexMatrix lhs = hash_apply(u, c);
    const ComplexMatrix rhs = hash_apply(u, c.adjoint()).adjoint();
    worst = std::max(worst, (lhs - rhs).frobenius_norm() / std::max(1.0, lhs.frobenius_norm()));
  }
  return worst;
}

}  // namespace

void validate_spec(const ItoProcessSpec& spec) {
  if (spec.dim < 1) throw InvalidArgument("process dimension must be positive");
  if (spec.initial.dim() != spec.dim) throw DimensionMismatch("initial value has the wrong dimension");
  if (spec.n_drivers < 0) throw InvalidArgument("driver count must be nonnegative");
  if (static_cast<int>(spec.driver_kind.size()) != spec.n_drivers)
    throw InvalidArgument("driver_kind must list one kind per driver");
  if (spec.aux) {
    if (spec.aux->initial.dim() != spec.dim) throw DimensionMismatch("auxiliary initial value has the wrong dimension");
    if (!spec.aux->diffusion) throw InvalidArgument("auxiliary dynamics need a diffusion");
  }
  if (!spec.self_adjoint) return;

  const ComplexMatrix* aux = spec.aux ? &spec.aux->initial : nullptr;
  const ProcessState s{spec.initial, aux};
  const double scale = std::max(1.0, spec.initial.frobenius_norm());
  if (hermitian_defect(spec.initial) > 1e-12 * scale)
    throw InvalidArgument("self-adjoint process needs a Hermitian initial value");
  const ComplexMatrix k = eval_drift(spec, 0.0, s);
  if (hermitian_defect(k) > 1e-10 * std::max(1.0, k.frobenius_norm()))
    throw InvalidArgument("self-adjoint process needs a Hermitian drift");
  for (int i = 0; i < spec.n_drivers; ++i)
    if (star_defect(eval_diffusion(spec, i, 0.0, s)) > 1e-10)
      throw InvalidArgument("self-adjoint process needs U_" + std::to_string(i) + "^★ = U_" + std::to_string(i));
}

IncrementSet draw_increments(int dim, int n_drivers, double T, int steps, RngStream& rng) {
  if (!(T > 0.0)) throw InvalidArgument("T must be positive");
  if (steps < 1) throw InvalidArgument("steps must be positive");
  const double dt = T / steps;
  IncrementSet inc(static_cast<std::size_t>(steps));
  for (auto& step : inc) {
    step.reserve(static_cast<std::size_t>(n_drivers));
    for (int i = 0; i < n_drivers; ++i) step.push_back(hermitian_increment(dim, dt, rng).matrix());
  }
  return inc;
}

IncrementSet coarsen(const IncrementSet& inc) {
  if (inc.size() % 2 != 0) throw InvalidArgument("coarsening needs an even number of steps");
  IncrementSet out(inc.size() / 2);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = inc[2 * k];
    for (std::size_t i = 0; i < out[k].size(); ++i) out[k][i] += inc[2 * k + 1][i];
  }
  return out;
}

SimulationPath simulate_with_increments(const ItoProcessSpec& spec, double T, const IncrementSet& inc) {
  validate_spec(spec);
  if (!(T > 0.0)) throw InvalidArgument("T must be positive");
  if (inc.empty()) throw InvalidArgument("steps must be positive");
  const int steps = static_cast<int>(inc.size());
  for (const auto& step : inc)
    if (static_cast<int>(step.size()) != spec.n_drivers)
      throw DimensionMismatch("increment set does not match the driver count");

  SimulationPath path;
  path.T = T;
  path.increments = inc;
  path.times.resize(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) path.times[k] = T * k / steps;
  const double dt = T / steps;

  ComplexMatrix m = spec.initial;
  ComplexMatrix a;
  if (spec.aux) {
    a = spec.aux->initial;
    if (spec.aux->observe) m = spec.aux->observe(a);
    path.aux.reserve(static_cast<std::size_t>(steps) + 1);
    path.aux.push_back(a);
  }
  path.states.reserve(static_cast<std::size_t>(steps) + 1);
  path.states.push_back(m);

  for (int k = 0; k < steps; ++k) {
    const double t = path.times[k];
    const ProcessState s{m, spec.aux ? &a : nullptr};
    ComplexMatrix next_a;
    if (spec.aux) {
      next_a = a;
      for (int i = 0; i < spec.n_drivers; ++i) {
        const auto u = guarded("auxiliary diffusion", [&] { return spec.aux->diffusion(i, t, a); });
        next_a += hash_apply(u, inc[k][i]);
      }
      if (spec.aux->drift) next_a.axpy(dt, guarded("auxiliary drift", [&] { return spec.aux->drift(t, a); }));
      guard_norm(next_a, k + 1, "auxiliary state");
    }

    ComplexMatrix next;
    if (spec.aux && spec.aux->observe) {
      next = guarded("observation", [&] { return spec.aux->observe(next_a); });
    } else {
      next = m;
      for (int i = 0; i < spec.n_drivers; ++i) {
        const auto u = eval_diffusion(spec, i, t, s);
        if (!u.empty()) next += hash_apply(u, inc[k][i]);
      }
      if (spec.drift) next.axpy(dt, eval_drift(spec, t, s));
    }
    guard_norm(next, k + 1, "state");

    if (spec.self_adjoint) {
      const double defect = hermitian_defect(next);
      const double rel = defect / std::max(1.0, next.frobenius_norm());
      path.max_symmetrization_defect = std::max(path.max_symmetrization_defect, rel);
      if (rel > kSymmetrizationTolerance)
        throw CoefficientEvaluationError("symmetrization defect " + std::to_string(rel) + " at step " +
                                         std::to_string(k + 1) + " exceeds tolerance");
      next = HermitianMatrix::symmetrized(next).matrix();
    }
    m = std::move(next);
    path.states.push_back(m);
    if (spec.aux) {
      a = std::move(next_a);
      path.aux.push_back(a);
    }
  }
  return path;
}

SimulationPath simulate(const ItoProcessSpec& spec, double T, int steps, RngStream& rng) {
  auto inc = draw_increments(spec.dim, spec.n_drivers, T, steps, rng);
  auto path = simulate_with_increments(spec, T, inc);
  path.seed = rng.master_seed();
  path.stream = rng.stream_index();
  return path;
}

TensorSumOperator diffusion_at(const ItoProcessSpec& spec, const SimulationPath& path, int driver, int k) {
  const ComplexMatrix* aux = path.aux.empty() ? nullptr : &path.aux[k];
  return eval_diffusion(spec, driver, path.times[k], ProcessState{path.states[k], aux});
}

ComplexMatrix drift_at(const ItoProcessSpec& spec, const SimulationPath& path, int k) {
  const ComplexMatrix* aux = path.aux.empty() ? nullptr : &path.aux[k];
  return eval_drift(spec, path.times[k], ProcessState{path.states[k], aux});
}

ComplexMatrix increment_of(const SimulationPath& path, int k) { return path.states[k + 1] - path.states[k]; }

// -- Builtins --------------------------------------------------------------------

ItoProcessSpec hermitian_bm(int n, int drivers, int driver, std::optional<ComplexMatrix> initial) {
  if (drivers < 1 || driver < 0 || driver >= drivers)
    throw InvalidArgument("hermitian_bm: driver index outside [0, drivers)");
  ItoProcessSpec spec;
  spec.name = "hermitian_bm";
  spec.dim = n;
  spec.n_drivers = drivers;
  spec.driver_kind.assign(static_cast<std::size_t>(drivers), DriverKind::Hermitian);
  spec.initial = initial ? *initial : ComplexMatrix(n);
  const auto id = TensorSumOperator::identity(n);
  spec.diffusion = [id, driver, n](int i, double, const ProcessState&) {
    return i == driver ? id : TensorSumOperator(n);
  };
  spec.self_adjoint = true;
  return spec;
}

namespace {

// dG = G dZ, dZ = (dX₀ + i dX₁)/√2
TensorSumOperator free_mult_diffusion(int i, const ComplexMatrix& g) {
  const double r = 1.0 / std::sqrt(2.0);
  const Complex c = i == 0 ? Complex{r, 0.0} : Complex{0.0, r};
  return TensorSumOperator::pure(c * g, ComplexMatrix::identity(g.dim()));
}

}  // namespace

ItoProcessSpec free_mult_bm(const ComplexMatrix& h) {
  ItoProcessSpec spec;
  spec.name = "free_mult_bm";
  spec.dim = h.dim();
  spec.n_drivers = 2;
  spec.driver_kind = {DriverKind::CircularReal, DriverKind::CircularImag};
  spec.initial = h;
  spec.diffusion = [](int i, double, const ProcessState& s) { return free_mult_diffusion(i, s.m); };
  return spec;
}

ItoProcessSpec modulus_squared(const ItoProcessSpec& spec_g, Complex lambda, ModulusScheme scheme) {
  if (spec_g.name != "free_mult_bm") throw InvalidArgument("modulus_squared expects a free_mult_bm spec");
  const int n = spec_g.dim;
  auto shifted = [lambda, n](const ComplexMatrix& g) { return g - lambda * ComplexMatrix::identity(n); };
  auto modulus = [shifted](const ComplexMatrix& g) {
    const ComplexMatrix gl = shifted(g);
    return gl.adjoint() * gl;
  };

  ItoProcessSpec spec;
  spec.name = "modulus_squared";
  spec.dim = n;
  spec.n_drivers = 2;
  spec.driver_kind = spec_g.driver_kind;
  spec.initial = HermitianMatrix::symmetrized(modulus(spec_g.initial)).matrix();
  spec.self_adjoint = true;

  AuxDynamics aux;
  aux.initial = spec_g.initial;
  aux.diffusion = [](int i, double, const ComplexMatrix& g) { return free_mult_diffusion(i, g); };
  if (scheme == ModulusScheme::Exact) aux.observe = modulus;
  spec.aux = std::move(aux);

  // d|G−λ|² = G_λ* G dZ + dZ* G* G_λ + tr(G*G) dt
  spec.diffusion = [shifted, n](int i, double, const ProcessState& s) {
    const ComplexMatrix& g = *s.aux;
    const ComplexMatrix gl = shifted(g);
    const ComplexMatrix left = gl.adjoint() * g;
    const ComplexMatrix right = g.adjoint() * gl;
    const double r = 1.0 / std::sqrt(2.0);
    const ComplexMatrix id = ComplexMatrix::identity(n);
    TensorSumOperator u(n);
    if (i == 0) {
      u.add(r * left, id);
      u.add(id, r * right);
    } else {
      u.add(Complex{0.0, r} * left, id);
      u.add(id, Complex{0.0, -r} * right);
    }
    return u;
  };
  spec.drift = [n](double, const ProcessState& s) {
    const ComplexMatrix& g = *s.aux;
    return normalized_trace(g.adjoint() * g).real() * ComplexMatrix::identity(n);
  };
  return spec;
}

ItoProcessSpec custom_linear(const ComplexMatrix& initial, std::vector<TensorSumOperator> diffusion,
                             std::optional<ComplexMatrix> drift, bool self_adjoint) {
  ItoProcessSpec spec;
  spec.name = "custom_linear";
  spec.dim = initial.dim();
  spec.n_drivers = static_cast<int>(diffusion.size());
  spec.driver_kind.assign(diffusion.size(), DriverKind::Hermitian);
  spec.initial = initial;
  for (const auto& u : diffusion)
    if (u.dim() != spec.dim) throw DimensionMismatch("custom_linear diffusion has the wrong dimension");
  spec.diffusion = [d = std::move(diffusion)](int i, double, const ProcessState&) { return d.at(i); };
  if (drift) {
    if (drift->dim() != spec.dim) throw DimensionMismatch("custom_linear drift has the wrong dimension");
    spec.drift = [k = *drift](double, const ProcessState&) { return k; };
  }
  spec.self_adjoint = self_adjoint;
  return spec;
}

ItoProcessSpec symmetric_multiplicative(const ComplexMatrix& initial) {
  ItoProcessSpec spec;
  spec.name = "symmetric_multiplicative";
  spec.dim = initial.dim();
  spec.n_drivers = 1;
  spec.driver_kind = {DriverKind::Hermitian};
  spec.initial = initial;
  spec.diffusion = [](int, double, const ProcessState& s) {
    const int n = s.m.dim();
    TensorSumOperator u(n);
    u.add(0.5 * s.m, ComplexMatrix::identity(n));
    u.add(ComplexMatrix::identity(n), 0.5 * s.m);
    return u;
  };
  spec.self_adjoint = true;
  return spec;
}

}  // namespace freeito
