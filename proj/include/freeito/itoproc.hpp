#pragma once

// Matrix Itô processes dM = Σ_i U_i # dX_i + K dt and their Euler–Maruyama paths.

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "freeito/linalg.hpp"
#include "freeito/ncderiv.hpp"
#include "freeito/randmat.hpp"

namespace freeito {

enum class DriverKind {
  Hermitian,
  CircularReal,  // X₁ in Z = (X₁ + iX₂)/√2
  CircularImag,  // X₂
};

// Coefficients see the process value and, when present, the auxiliary state.
struct ProcessState {
  const ComplexMatrix& m;
  const ComplexMatrix* aux = nullptr;
};

using DiffusionFn = std::function<TensorSumOperator(int driver, double t, const ProcessState& s)>;
using DriftFn = std::function<ComplexMatrix(double t, const ProcessState& s)>;

// A second process A carried along with M (for example the G behind
// M = |G − λ|²). A is advanced by its own Euler step. When `observe` is set,
// M(t_k) is read off as observe(A(t_k)); otherwise M follows its own recursion.
struct AuxDynamics {
  ComplexMatrix initial;
  std::function<TensorSumOperator(int driver, double t, const ComplexMatrix& a)> diffusion;
  std::function<ComplexMatrix(double t, const ComplexMatrix& a)> drift;  // may be empty
  std::function<ComplexMatrix(const ComplexMatrix& a)> observe;          // may be empty
};

struct ItoProcessSpec {
  std::string name;
  int dim = 0;
  int n_drivers = 0;  // Hermitian streams; a circular driver uses two
  std::vector<DriverKind> driver_kind;
  ComplexMatrix initial;
  DiffusionFn diffusion;  // empty operator = driver does not act
  DriftFn drift;          // may be empty: zero drift
  bool self_adjoint = false;
  std::optional<AuxDynamics> aux;
};

// Throws InvalidArgument on inconsistent fields. For self-adjoint specs the
// initial value, drift and U_i^★ = U_i are spot-checked at t = 0.
void validate_spec(const ItoProcessSpec& spec);

// Driver increments of one path: increments[step][driver].
using IncrementSet = std::vector<std::vector<ComplexMatrix>>;

struct SimulationPath {
  double T = 0.0;
  std::vector<double> times;           // S + 1 uniform points
  std::vector<ComplexMatrix> states;   // M(t_k)
  std::vector<ComplexMatrix> aux;      // A(t_k), empty without aux dynamics
  IncrementSet increments;             // S steps × n_drivers
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  double max_symmetrization_defect = 0.0;

  int steps() const { return static_cast<int>(increments.size()); }
  double dt() const { return T / steps(); }
};

inline constexpr double kBlowUpNorm = 1e12;
inline constexpr double kSymmetrizationTolerance = 1e-10;

IncrementSet draw_increments(int dim, int n_drivers, double T, int steps, RngStream& rng);
// Sums consecutive pairs: the increments of the same noise at half the resolution.
IncrementSet coarsen(const IncrementSet& inc);

// Deterministic Euler–Maruyama recursion driven by the given increments.
SimulationPath simulate_with_increments(const ItoProcessSpec& spec, double T, const IncrementSet& inc);
SimulationPath simulate(const ItoProcessSpec& spec, double T, int steps, RngStream& rng);

// Diffusion and drift evaluated on a stored path state, with error wrapping.
TensorSumOperator diffusion_at(const ItoProcessSpec& spec, const SimulationPath& path, int driver, int k);
ComplexMatrix drift_at(const ItoProcessSpec& spec, const SimulationPath& path, int k);
// M(t_{k+1}) − M(t_k)
ComplexMatrix increment_of(const SimulationPath& path, int k);

// -- Builtins --------------------------------------------------------------------

// dM = dX_driver among `drivers` independent Hermitian Brownian motions.
ItoProcessSpec hermitian_bm(int n, int drivers = 1, int driver = 0,
                            std::optional<ComplexMatrix> initial = std::nullopt);

// dG = G dZ with Z circular, G(0) = h.
ItoProcessSpec free_mult_bm(const ComplexMatrix& h);

enum class ModulusScheme {
  Exact,  // M = (G − λ)*(G − λ) from the simulated G
  Euler,  // M follows its own Euler recursion with coefficients from G
};

// |G − λ|² for G a free multiplicative Brownian motion spec.
ItoProcessSpec modulus_squared(const ItoProcessSpec& spec_g, Complex lambda,
                               ModulusScheme scheme = ModulusScheme::Exact);

// Constant coefficients: diffusion[i] is U_i, drift is K.
ItoProcessSpec custom_linear(const ComplexMatrix& initial, std::vector<TensorSumOperator> diffusion,
                             std::optional<ComplexMatrix> drift, bool self_adjoint);

// dM = ½(M dX + dX M): a self-adjoint process with state-dependent noise.
ItoProcessSpec symmetric_multiplicative(const ComplexMatrix& initial);

}  // namespace freeito
