#pragma once

// Dense complex matrices, Hermitian eigendecomposition and f(M).

#include <complex>
#include <initializer_list>
#include <vector>

#include "freeito/funcspec.hpp"

namespace freeito {

inline constexpr int kMaxDim = 1024;

class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  explicit ComplexMatrix(int n);
  ComplexMatrix(int n, std::vector<Complex> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static ComplexMatrix identity(int n);
  static ComplexMatrix diagonal(const std::vector<Complex>& d);
  // E_jk: one at (j, k), zero elsewhere (zero-based indices).
  static ComplexMatrix unit(int n, int j, int k);

  int dim() const { return n_; }
  Complex& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  const Complex& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  const std::vector<Complex>& entries() const { return a_; }
  std::vector<Complex>& entries() { return a_; }

  ComplexMatrix adjoint() const;
  Complex trace() const;
  double frobenius_norm() const;

  ComplexMatrix& operator+=(const ComplexMatrix& b);
  ComplexMatrix& operator-=(const ComplexMatrix& b);
  ComplexMatrix& operator*=(Complex s);
  // this += s * b
  void axpy(Complex s, const ComplexMatrix& b);

 private:
  int n_ = 0;
  std::vector<Complex> a_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(ComplexMatrix a, Complex s);
ComplexMatrix operator*(Complex s, ComplexMatrix a);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

// Entrywise (Hadamard) product.
ComplexMatrix hadamard(const ComplexMatrix& a, const ComplexMatrix& b);

void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b, const char* where);

// Exact comparison with I.
bool is_identity(const ComplexMatrix& m);

// ‖M − M*‖_F
double hermitian_defect(const ComplexMatrix& m);

class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  // Checks ‖M − M*‖_F ≤ 1e-12 max(1, ‖M‖_F), then stores (M + M*)/2.
  explicit HermitianMatrix(const ComplexMatrix& m);
  // Stores (M + M*)/2 without the defect check.
  static HermitianMatrix symmetrized(const ComplexMatrix& m);

  int dim() const { return m_.dim(); }
  const ComplexMatrix& matrix() const { return m_; }
  operator const ComplexMatrix&() const { return m_; }

 private:
  ComplexMatrix m_;
};

struct SpectralDecomposition {
  std::vector<double> eigenvalues;  // ascending
  ComplexMatrix eigenvectors;       // columns are eigenvectors
  double source_norm = 0.0;

  int dim() const { return eigenvectors.dim(); }
  // Rank-one projection onto the i-th eigenvector.
  ComplexMatrix projection(int i) const;
  // U* B U
  ComplexMatrix to_eigenbasis(const ComplexMatrix& b) const;
  // U B U*
  ComplexMatrix from_eigenbasis(const ComplexMatrix& b) const;
  ComplexMatrix reconstruct() const;
};

inline constexpr int kJacobiMaxSweeps = 60;

SpectralDecomposition hermitian_eigen(const HermitianMatrix& m);

ComplexMatrix apply_function(const FunctionSpec& f, const SpectralDecomposition& sd);
ComplexMatrix apply_function(const FunctionSpec& f, const HermitianMatrix& m);

// Tr(A)/N
Complex normalized_trace(const ComplexMatrix& a);
// N Tr(B* A)
Complex inner_product_N(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace freeito
