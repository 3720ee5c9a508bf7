#include "freeito/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "freeito/error.hpp"

namespace freeito {

namespace {

void check_dim(int n) {
  if (n < 1 || n > kMaxDim)
    throw InvalidArgument("matrix dimension " + std::to_string(n) + " outside [1, " +
                          std::to_string(kMaxDim) + "]");
}

}  // namespace

ComplexMatrix::ComplexMatrix(int n) : n_(n) {
  check_dim(n);
  a_.assign(static_cast<std::size_t>(n) * n, Complex{0.0, 0.0});
}

ComplexMatrix::ComplexMatrix(int n, std::vector<Complex> entries) : n_(n), a_(std::move(entries)) {
  check_dim(n);
  if (a_.size() != static_cast<std::size_t>(n) * n)
    throw DimensionMismatch("expected " + std::to_string(n * n) + " entries, got " +
                            std::to_string(a_.size()));
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
  n_ = static_cast<int>(rows.size());
  check_dim(n_);
  a_.reserve(static_cast<std::size_t>(n_) * n_);
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != n_) throw DimensionMismatch("matrix literal is not square");
    a_.insert(a_.end(), r.begin(), r.end());
  }
}

ComplexMatrix ComplexMatrix::identity(int n) {
  ComplexMatrix m(n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(const std::vector<Complex>& d) {
  ComplexMatrix m(static_cast<int>(d.size()));
  for (int i = 0; i < m.dim(); ++i) m(i, i) = d[i];
  return m;
}

ComplexMatrix ComplexMatrix::unit(int n, int j, int k) {
  ComplexMatrix m(n);
  m(j, k) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix r(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) r(j, i) = std::conj((*this)(i, j));
  return r;
}

Complex ComplexMatrix::trace() const {
  Complex t{0.0, 0.0};
  for (int i = 0; i < n_; ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const auto& z : a_) s += std::norm(z);
  return std::sqrt(s);
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& b) {
  require_same_dim(*this, b, "matrix sum");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += b.a_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& b) {
  require_same_dim(*this, b, "matrix difference");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= b.a_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex s) {
  for (auto& z : a_) z *= s;
  return *this;
}

void ComplexMatrix::axpy(Complex s, const ComplexMatrix& b) {
  require_same_dim(*this, b, "axpy");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += s * b.a_[i];
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "matrix product");
  const int n = a.dim();
  ComplexMatrix c(n);
  for (int i = 0; i < n; ++i) {
    Complex* ci = &c(i, 0);
    for (int k = 0; k < n; ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{0.0, 0.0}) continue;
      const Complex* bk = &b(k, 0);
      for (int j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

ComplexMatrix hadamard(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "hadamard product");
  ComplexMatrix c = a;
  for (std::size_t i = 0; i < c.entries().size(); ++i) c.entries()[i] *= b.entries()[i];
  return c;
}

void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b, const char* where) {
  if (a.dim() != b.dim())
    throw DimensionMismatch(std::string(where) + ": " + std::to_string(a.dim()) + " vs " +
                            std::to_string(b.dim()));
}

bool is_identity(const ComplexMatrix& m) {
  const int n = m.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (m(i, j) != (i == j ? Complex{1.0, 0.0} : Complex{0.0, 0.0})) return false;
  return true;
}

double hermitian_defect(const ComplexMatrix& m) {
  double s = 0.0;
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) s += std::norm(m(i, j) - std::conj(m(j, i)));
  return std::sqrt(s);
}

// -- HermitianMatrix ------------------------------------------------------------

HermitianMatrix::HermitianMatrix(const ComplexMatrix& m) {
  const double defect = hermitian_defect(m);
  if (!(defect <= 1e-12 * std::max(1.0, m.frobenius_norm())))
    throw InvalidArgument("matrix is not Hermitian: ‖M − M*‖_F = " + std::to_string(defect));
  *this = symmetrized(m);
}

HermitianMatrix HermitianMatrix::symmetrized(const ComplexMatrix& m) {
  HermitianMatrix h;
  h.m_ = ComplexMatrix(m.dim());
  for (int i = 0; i < m.dim(); ++i) {
    h.m_(i, i) = Complex{m(i, i).real(), 0.0};
    for (int j = i + 1; j < m.dim(); ++j) {
      const Complex z = 0.5 * (m(i, j) + std::conj(m(j, i)));
      h.m_(i, j) = z;
      h.m_(j, i) = std::conj(z);
    }
  }
  return h;
}

// -- SpectralDecomposition -------------------------------------------------------

ComplexMatrix SpectralDecomposition::projection(int k) const {
  const int n = dim();
  ComplexMatrix p(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p(i, j) = eigenvectors(i, k) * std::conj(eigenvectors(j, k));
  return p;
}

ComplexMatrix SpectralDecomposition::to_eigenbasis(const ComplexMatrix& b) const {
  return eigenvectors.adjoint() * (b * eigenvectors);
}

ComplexMatrix SpectralDecomposition::from_eigenbasis(const ComplexMatrix& b) const {
  return eigenvectors * (b * eigenvectors.adjoint());
}

ComplexMatrix SpectralDecomposition::reconstruct() const {
  std::vector<Complex> d(eigenvalues.begin(), eigenvalues.end());
  return from_eigenbasis(ComplexMatrix::diagonal(d));
}

namespace {

double off_diagonal_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

// One complex Jacobi rotation zeroing a(p, q). With a_pq = r e^{iφ} the
// rotation is diag(1, e^{-iφ}) times the real symmetric Jacobi rotation.
void rotate(ComplexMatrix& a, ComplexMatrix& v, int p, int q) {
  const Complex apq = a(p, q);
  const double r = std::abs(apq);
  if (r == 0.0) return;
  const Complex phase = std::conj(apq) / r;  // e^{-iφ}
  const double theta = (a(q, q).real() - a(p, p).real()) / (2.0 * r);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const Complex gpp = c, gpq = s, gqp = -s * phase, gqq = c * phase;
  const int n = a.dim();

  for (int k = 0; k < n; ++k) {
    const Complex akp = a(k, p), akq = a(k, q);
    a(k, p) = akp * gpp + akq * gqp;
    a(k, q) = akp * gpq + akq * gqq;
  }
  for (int k = 0; k < n; ++k) {
    const Complex apk = a(p, k), aqk = a(q, k);
    a(p, k) = std::conj(gpp) * apk + std::conj(gqp) * aqk;
    a(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
  }
  a(p, q) = a(q, p) = 0.0;
  a(p, p) = a(p, p).real();
  a(q, q) = a(q, q).real();

  for (int k = 0; k < n; ++k) {
    const Complex vkp = v(k, p), vkq = v(k, q);
    v(k, p) = vkp * gpp + vkq * gqp;
    v(k, q) = vkp * gpq + vkq * gqq;
  }
}

}  // namespace

SpectralDecomposition hermitian_eigen(const HermitianMatrix& m) {
  const int n = m.dim();
  ComplexMatrix a = m.matrix();
  ComplexMatrix v = ComplexMatrix::identity(n);
  const double norm = a.frobenius_norm();
  const double target = 1e-12 * norm;

  bool converged = off_diagonal_norm(a) <= target;
  for (int sweep = 0; sweep < kJacobiMaxSweeps && !converged; ++sweep) {
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) rotate(a, v, p, q);
    converged = off_diagonal_norm(a) <= target;
  }
  if (!converged)
    throw NonConvergence("Jacobi eigensolver: off-diagonal norm " + std::to_string(off_diagonal_norm(a)) +
                         " after " + std::to_string(kJacobiMaxSweeps) + " sweeps");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&a](int i, int j) { return a(i, i).real() < a(j, j).real(); });

  SpectralDecomposition sd;
  sd.source_norm = norm;
  sd.eigenvalues.resize(static_cast<std::size_t>(n));
  sd.eigenvectors = ComplexMatrix(n);
  for (int k = 0; k < n; ++k) {
    sd.eigenvalues[k] = a(order[k], order[k]).real();
    for (int i = 0; i < n; ++i) sd.eigenvectors(i, k) = v(i, order[k]);
  }
  return sd;
}

ComplexMatrix apply_function(const FunctionSpec& f, const SpectralDecomposition& sd) {
  const int n = sd.dim();
  std::vector<Complex> fl(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    if (!f.in_domain(sd.eigenvalues[k]))
      throw DomainError("eigenvalue " + std::to_string(sd.eigenvalues[k]) + " outside the domain of " +
                        (f.label().empty() ? std::string("function") : f.label()));
    fl[k] = evaluate(f, sd.eigenvalues[k]);
  }
  // U diag(f) U*, scaling columns of U in place.
  ComplexMatrix uf = sd.eigenvectors;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) uf(i, k) *= fl[k];
  return uf * sd.eigenvectors.adjoint();
}

ComplexMatrix apply_function(const FunctionSpec& f, const HermitianMatrix& m) {
  return apply_function(f, hermitian_eigen(m));
}

Complex normalized_trace(const ComplexMatrix& a) { return a.trace() / static_cast<double>(a.dim()); }

Complex inner_product_N(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "inner product");
  // Tr(B* A) = sum_ij conj(b_ij) a_ij
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < a.entries().size(); ++i) s += std::conj(b.entries()[i]) * a.entries()[i];
  return static_cast<double>(a.dim()) * s;
}

}  // namespace freeito
