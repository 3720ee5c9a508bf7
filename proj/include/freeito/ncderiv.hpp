#pragma once

// Tensor sums in M_N ⊗ M_N^op, noncommutative derivatives and the Itô
// correction operators built from them.

#include <vector>

#include "freeito/funcspec.hpp"
#include "freeito/linalg.hpp"

namespace freeito {

struct TensorTerm {
  ComplexMatrix a;
  ComplexMatrix b;
};

// u = Σ_j A_j ⊗ B_j, acting on C by u # C = Σ_j A_j C B_j.
class TensorSumOperator {
 public:
  explicit TensorSumOperator(int n);
  TensorSumOperator(int n, std::vector<TensorTerm> terms);
  static TensorSumOperator pure(ComplexMatrix a, ComplexMatrix b);
  static TensorSumOperator identity(int n);

  int dim() const { return n_; }
  const std::vector<TensorTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  void add(ComplexMatrix a, ComplexMatrix b);

  TensorSumOperator& operator+=(const TensorSumOperator& v);
  TensorSumOperator& operator*=(Complex s);

 private:
  int n_;
  std::vector<TensorTerm> terms_;
};

TensorSumOperator operator+(TensorSumOperator u, const TensorSumOperator& v);
TensorSumOperator operator*(Complex s, TensorSumOperator u);
// Multiplication in M_N ⊗ M_N^op: (a⊗b)(c⊗d) = ac ⊗ db.
TensorSumOperator operator*(const TensorSumOperator& u, const TensorSumOperator& v);

// (a⊗b)^flip = b⊗a
TensorSumOperator tensor_flip(const TensorSumOperator& u);
// (a⊗b)^★ = b*⊗a*
TensorSumOperator tensor_star(const TensorSumOperator& u);
// (a⊗b)* = a*⊗b*
TensorSumOperator tensor_adjoint(const TensorSumOperator& u);

ComplexMatrix hash_apply(const TensorSumOperator& u, const ComplexMatrix& c);
// (tr ⊗ tr^op)(u) = Σ tr(A_j) tr(B_j)
Complex trace_tensor(const TensorSumOperator& u);
// Sum of ‖A_j‖_F ‖B_j‖_F, a cheap size bound used for tolerances.
double tensor_norm_bound(const TensorSumOperator& u);
// Dense action matrix of C ↦ u # C on vec(C); useful for comparing operators.
std::vector<Complex> action_matrix(const TensorSumOperator& u);

// -- Triple tensors -------------------------------------------------------------

struct TripleTerm {
  ComplexMatrix a;
  ComplexMatrix b;
  ComplexMatrix c;
};

class TripleTensorSum {
 public:
  explicit TripleTensorSum(int n);
  TripleTensorSum(int n, std::vector<TripleTerm> terms);
  static TripleTensorSum identity(int n);

  int dim() const { return n_; }
  const std::vector<TripleTerm>& terms() const { return terms_; }
  void add(ComplexMatrix a, ComplexMatrix b, ComplexMatrix c);

 private:
  int n_;
  std::vector<TripleTerm> terms_;
};

// (A⊗B⊗C)·(D⊗E⊗F) = AD ⊗ EB ⊗ CF
TripleTensorSum operator*(const TripleTensorSum& x, const TripleTensorSum& y);
// u ⊗ I and I ⊗ v as triple tensors.
TripleTensorSum lift_left(const TensorSumOperator& u);
TripleTensorSum lift_right(const TensorSumOperator& v);
// (A⊗B⊗C) #₂ [X, Y] = A X B Y C
ComplexMatrix hash2(const TripleTensorSum& w, const ComplexMatrix& x, const ComplexMatrix& y);
// M_tr(A⊗B⊗C) = tr(B) A C
ComplexMatrix magic_operator(const ComplexMatrix& a, const ComplexMatrix& b, const ComplexMatrix& c);
ComplexMatrix magic_operator(const TripleTensorSum& w);
// M_tr((I⊗v)·W·(u⊗I)), the drift of W #₂ [dM₁, dM₂] for dM₁ = u # dX, dM₂ = v # dX.
ComplexMatrix covariation_density(const TripleTensorSum& w, const TensorSumOperator& u,
                                  const TensorSumOperator& v);

// Q(a⊗b, c⊗d) = a tr(bc) d, extended bilinearly.
ComplexMatrix q_tr(const TensorSumOperator& u, const TensorSumOperator& v);

// -- Spectral kernels -------------------------------------------------------------

// f^[1](λ_i, λ_j) over the spectrum of M.
struct SpectralKernel2 {
  SpectralDecomposition sd;
  ComplexMatrix weights;  // (i, j) -> f^[1](λ_i, λ_j)
};

// f^[2](λ_i, λ_j, λ_l), produced one l-slice at a time.
class SpectralKernel3 {
 public:
  SpectralKernel3(FunctionSpec f, SpectralDecomposition sd);
  const SpectralDecomposition& sd() const { return sd_; }
  const FunctionSpec& function() const { return f_; }
  // (i, j) -> f^[2](λ_i, λ_j, λ_l)
  ComplexMatrix slice(int l) const;

 private:
  FunctionSpec f_;
  SpectralDecomposition sd_;
};

SpectralKernel2 nc_first_derivative(const FunctionSpec& f, const SpectralDecomposition& sd);
SpectralKernel2 nc_first_derivative(const FunctionSpec& f, const HermitianMatrix& m);

// Σ f^[1](λ_i, λ_j) P_i B P_j
ComplexMatrix frechet1_apply(const SpectralKernel2& k, const ComplexMatrix& b);

// Σ f^[2](λ, μ, ν) (P_λ B1 P_μ B2 P_ν + P_λ B2 P_μ B1 P_ν)
ComplexMatrix frechet2_apply(const SpectralKernel3& k, const ComplexMatrix& b1, const ComplexMatrix& b2);
ComplexMatrix frechet2_apply(const FunctionSpec& f, const HermitianMatrix& m, const ComplexMatrix& b1,
                             const ComplexMatrix& b2);

// Δ_{u,v} f(M): for u = a⊗b, v = c⊗d,
//   Σ f^[2](λ,μ,ν) [P_λ a tr(b P_μ c) d P_ν + P_λ c tr(d P_μ a) b P_ν].
ComplexMatrix delta_bilinear(const SpectralKernel3& k, const TensorSumOperator& u, const TensorSumOperator& v);
ComplexMatrix delta_bilinear(const FunctionSpec& f, const HermitianMatrix& m, const TensorSumOperator& u,
                             const TensorSumOperator& v);
// Δ_U f(M) = Δ_{U,U} f(M)
ComplexMatrix delta_u(const SpectralKernel3& k, const TensorSumOperator& u);

// ∂f(M) = Σ f^[1](λ_i, λ_j) P_i ⊗ P_j as an explicit tensor sum of N² terms.
TensorSumOperator nc_derivative_operator(const FunctionSpec& f, const SpectralDecomposition& sd);

// (tr ⊗ tr^op)(u^flip ∂f'(M) u), evaluated in the eigenbasis.
Complex traced_correction(const FunctionSpec& f, const SpectralDecomposition& sd, const TensorSumOperator& u);

// Σ_{k,l} tr(A_k* M^{j1} A_l) tr(B_l M^{j2} B_k*)
Complex rho_moments(const HermitianMatrix& m, const TensorSumOperator& u, int j1, int j2);
// ρ_ij: the same sum with M^{j1}, M^{j2} replaced by the projections P_i, P_j.
ComplexMatrix rho_matrix(const SpectralDecomposition& sd, const TensorSumOperator& u);

}  // namespace freeito
