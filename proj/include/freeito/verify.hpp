#pragma once

// Monte Carlo checks of the matrix Itô formulas and of their large-N limits.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "freeito/funcspec.hpp"
#include "freeito/itoproc.hpp"
#include "freeito/ncderiv.hpp"

namespace freeito {

// One row per time resolution.
struct ResolutionRow {
  int steps = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
  double tolerance = 0.0;  // +inf when the row carries no bound
  bool pass = false;
};

// A scalar statistic compared against a bound (value <= tolerance).
struct NamedCheck {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct VerificationReport {
  std::string experiment;
  nlohmann::json parameters = nlohmann::json::object();
  std::vector<ResolutionRow> rows;
  std::vector<NamedCheck> checks;
  // Informational numbers that do not enter the pass flag.
  nlohmann::json diagnostics = nlohmann::json::object();
  bool pass = false;

  void add_check(std::string name, double value, double tolerance);
  // Recomputes every row/check flag from its statistics and sets `pass`.
  void finalize();
};

// True iff `pass` and every flag agree with the recorded numbers.
bool rederivable(const VerificationReport& r);

nlohmann::json to_json(const VerificationReport& r);
// Header "steps,mean,stderr,tolerance,pass" then one row per resolution.
std::string to_csv(const VerificationReport& r);

// Convergence criterion for residual tables: each doubling must shrink the
// mean by `decrease_factor`, and the finest mean must not exceed `final_tolerance`.
struct ConvergenceCriteria {
  double decrease_factor = 1.25;
  double final_tolerance = 0.05;
};

// Fills row tolerances from the criterion and finalizes the report.
void apply_convergence_criteria(VerificationReport& r, const ConvergenceCriteria& c);

struct MonteCarlo {
  int paths = 1;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: default_threads()
};

// R = f(M(T)) − f(M(0)) − Σ_k ∂f(M_k) # ΔM_k − ½ Σ_i Σ_k Δ_{U_i} f(M_k) Δt,
// E‖R‖_F per resolution, all resolutions driven by the same noise.
VerificationReport check_ito_residual(const FunctionSpec& f, const ItoProcessSpec& spec, double T,
                                      const std::vector<int>& steps_list, const MonteCarlo& mc,
                                      const ConvergenceCriteria& crit = {});

// E‖Σ_k W #₂ [ΔM₁, ΔM₂] − Σ_k Σ_i M_tr((I⊗U₂ᵢ)·W·(U₁ᵢ⊗I)) Δt‖_F per resolution.
VerificationReport check_quadratic_covariation(const TripleTensorSum& w, const ItoProcessSpec& spec1,
                                               const ItoProcessSpec& spec2, double T,
                                               const std::vector<int>& steps_list, const MonteCarlo& mc,
                                               const ConvergenceCriteria& crit = {});

struct TracedCriteria {
  double path_tolerance = 0.05;  // bound on the mean per-path residual
  double sigmas = 3.0;           // expectation-level bound in standard errors
};

// Per path: tr f(M(T)) − tr f(M(0)) − Σ tr(f'(M_k) ΔM_k) − ½ Σ_i Σ_k (tr⊗tr^op)(U_i^flip ∂f'(M_k) U_i) Δt,
// plus E tr f(M(T)) against tr f(M(0)) + E of the drift integral.
VerificationReport check_traced_formula(const FunctionSpec& f, const ItoProcessSpec& spec, double T, int steps,
                                        const MonteCarlo& mc, const TracedCriteria& crit = {});

// Closed-form CDF of the semicircle law of variance t.
double semicircle_cdf(double s, double t);
// Kolmogorov–Smirnov distance of the sample's empirical CDF from `cdf`.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

// ESD of X(t) against the semicircle law: KS ≤ 1.5/√N + 0.05, max|λ| ≤ 2√t + 0.3.
VerificationReport check_semicircle(int n, double t, std::uint64_t seed);

// d/dt E tr log(|G−λ|²+ε) at T (central differences, bandwidth T/10, common
// noise) against ε E tr((|G−λ|²+ε)⁻¹|G|²) E tr((|G−λ|²+ε)⁻¹), G(0) = I.
VerificationReport check_dhk_log_identity(int n, double T, int steps, const MonteCarlo& mc, double eps,
                                          Complex lambda, double tolerance = 0.10);

// Brute-force correction Σ_{j,k} Σ_{λ,μ,ν} f^[2](λ,μ,ν)(P_λ A_j tr(B_j P_μ A_k) B_k P_ν
// + P_λ A_k tr(B_k P_μ A_j) B_j P_ν) for U = Σ_j A_j⊗B_j, built from explicit
// projection matrices. Independent of the eigenbasis shortcut in delta_bilinear.
ComplexMatrix ito_correction_explicit(const FunctionSpec& f, const HermitianMatrix& m, const TensorSumOperator& u);

}  // namespace freeito
