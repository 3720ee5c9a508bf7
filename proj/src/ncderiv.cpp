#include "freeito/ncderiv.hpp"

#include <string>

#include "freeito/error.hpp"

namespace freeito {

namespace {

void check_term_dims(int n, const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.dim() != n || b.dim() != n)
    throw DimensionMismatch("tensor term of dimension " + std::to_string(a.dim()) + "/" +
                            std::to_string(b.dim()) + " in a dimension " + std::to_string(n) + " sum");
}

void require_dim(int expected, int got, const char* where) {
  if (expected != got)
    throw DimensionMismatch(std::string(where) + ": " + std::to_string(expected) + " vs " + std::to_string(got));
}

// Diagonal of U* X U divided by N, i.e. the vector μ ↦ tr(X P_μ).
std::vector<Complex> traced_diagonal(const ComplexMatrix& x_eig) {
  const int n = x_eig.dim();
  std::vector<Complex> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[i] = x_eig(i, i) / static_cast<double>(n);
  return w;
}

}  // namespace

// -- TensorSumOperator ------------------------------------------------------------

TensorSumOperator::TensorSumOperator(int n) : n_(n) {
  if (n < 1) throw InvalidArgument("tensor sum dimension must be positive");
}

TensorSumOperator::TensorSumOperator(int n, std::vector<TensorTerm> terms) : n_(n), terms_(std::move(terms)) {
  if (n < 1) throw InvalidArgument("tensor sum dimension must be positive");
  for (const auto& t : terms_) check_term_dims(n_, t.a, t.b);
}

TensorSumOperator TensorSumOperator::pure(ComplexMatrix a, ComplexMatrix b) {
  TensorSumOperator u(a.dim());
  u.add(std::move(a), std::move(b));
  return u;
}

TensorSumOperator TensorSumOperator::identity(int n) {
  return pure(ComplexMatrix::identity(n), ComplexMatrix::identity(n));
}

void TensorSumOperator::add(ComplexMatrix a, ComplexMatrix b) {
  check_term_dims(n_, a, b);
  terms_.push_back({std::move(a), std::move(b)});
}

TensorSumOperator& TensorSumOperator::operator+=(const TensorSumOperator& v) {
  require_dim(n_, v.n_, "tensor sum");
  terms_.insert(terms_.end(), v.terms_.begin(), v.terms_.end());
  return *this;
}

TensorSumOperator& TensorSumOperator::operator*=(Complex s) {
  for (auto& t : terms_) t.a *= s;
  return *this;
}

TensorSumOperator operator+(TensorSumOperator u, const TensorSumOperator& v) { return u += v; }
TensorSumOperator operator*(Complex s, TensorSumOperator u) { return u *= s; }

TensorSumOperator operator*(const TensorSumOperator& u, const TensorSumOperator& v) {
  require_dim(u.dim(), v.dim(), "tensor product");
  TensorSumOperator r(u.dim());
  for (const auto& x : u.terms())
    for (const auto& y : v.terms()) r.add(x.a * y.a, y.b * x.b);
  return r;
}

TensorSumOperator tensor_flip(const TensorSumOperator& u) {
  TensorSumOperator r(u.dim());
  for (const auto& t : u.terms()) r.add(t.b, t.a);
  return r;
}

TensorSumOperator tensor_star(const TensorSumOperator& u) {
  TensorSumOperator r(u.dim());
  for (const auto& t : u.terms()) r.add(t.b.adjoint(), t.a.adjoint());
  return r;
}

TensorSumOperator tensor_adjoint(const TensorSumOperator& u) {
  TensorSumOperator r(u.dim());
  for (const auto& t : u.terms()) r.add(t.a.adjoint(), t.b.adjoint());
  return r;
}

ComplexMatrix hash_apply(const TensorSumOperator& u, const ComplexMatrix& c) {
  require_dim(u.dim(), c.dim(), "hash_apply");
  ComplexMatrix r(u.dim());
  for (const auto& t : u.terms()) {
    // Identity factors are common (U = A⊗I), so skip those products.
    const bool ia = is_identity(t.a), ib = is_identity(t.b);
    if (ia && ib)
      r += c;
    else if (ib)
      r += t.a * c;
    else if (ia)
      r += c * t.b;
    else
      r += t.a * (c * t.b);
  }
  return r;
}

Complex trace_tensor(const TensorSumOperator& u) {
  Complex s{0.0, 0.0};
  for (const auto& t : u.terms()) s += normalized_trace(t.a) * normalized_trace(t.b);
  return s;
}

double tensor_norm_bound(const TensorSumOperator& u) {
  double s = 0.0;
  for (const auto& t : u.terms()) s += t.a.frobenius_norm() * t.b.frobenius_norm();
  return s;
}

std::vector<Complex> action_matrix(const TensorSumOperator& u) {
  const int n = u.dim();
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  std::vector<Complex> m(nn * nn);
  // (A C B)_ij = Σ_kl A_ik C_kl B_lj
  for (const auto& t : u.terms())
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            m[(static_cast<std::size_t>(i) * n + j) * nn + static_cast<std::size_t>(k) * n + l] +=
                t.a(i, k) * t.b(l, j);
  return m;
}

// -- TripleTensorSum -----------------------------------------------------------------

TripleTensorSum::TripleTensorSum(int n) : n_(n) {
  if (n < 1) throw InvalidArgument("triple tensor dimension must be positive");
}

TripleTensorSum::TripleTensorSum(int n, std::vector<TripleTerm> terms) : TripleTensorSum(n) {
  for (auto& t : terms) add(std::move(t.a), std::move(t.b), std::move(t.c));
}

TripleTensorSum TripleTensorSum::identity(int n) {
  TripleTensorSum w(n);
  w.add(ComplexMatrix::identity(n), ComplexMatrix::identity(n), ComplexMatrix::identity(n));
  return w;
}

void TripleTensorSum::add(ComplexMatrix a, ComplexMatrix b, ComplexMatrix c) {
  if (a.dim() != n_ || b.dim() != n_ || c.dim() != n_)
    throw DimensionMismatch("triple tensor term dimension mismatch");
  terms_.push_back({std::move(a), std::move(b), std::move(c)});
}

TripleTensorSum operator*(const TripleTensorSum& x, const TripleTensorSum& y) {
  require_dim(x.dim(), y.dim(), "triple tensor product");
  TripleTensorSum r(x.dim());
  for (const auto& s : x.terms())
    for (const auto& t : y.terms()) r.add(s.a * t.a, t.b * s.b, s.c * t.c);
  return r;
}

TripleTensorSum lift_left(const TensorSumOperator& u) {
  TripleTensorSum r(u.dim());
  for (const auto& t : u.terms()) r.add(t.a, t.b, ComplexMatrix::identity(u.dim()));
  return r;
}

TripleTensorSum lift_right(const TensorSumOperator& v) {
  TripleTensorSum r(v.dim());
  for (const auto& t : v.terms()) r.add(ComplexMatrix::identity(v.dim()), t.a, t.b);
  return r;
}

ComplexMatrix hash2(const TripleTensorSum& w, const ComplexMatrix& x, const ComplexMatrix& y) {
  require_dim(w.dim(), x.dim(), "hash2");
  require_dim(w.dim(), y.dim(), "hash2");
  ComplexMatrix r(w.dim());
  for (const auto& t : w.terms()) r += t.a * (x * (t.b * (y * t.c)));
  return r;
}

ComplexMatrix magic_operator(const ComplexMatrix& a, const ComplexMatrix& b, const ComplexMatrix& c) {
  require_same_dim(a, b, "magic operator");
  require_same_dim(a, c, "magic operator");
  return normalized_trace(b) * (a * c);
}

ComplexMatrix magic_operator(const TripleTensorSum& w) {
  ComplexMatrix r(w.dim());
  for (const auto& t : w.terms()) r += magic_operator(t.a, t.b, t.c);
  return r;
}

ComplexMatrix covariation_density(const TripleTensorSum& w, const TensorSumOperator& u,
                                  const TensorSumOperator& v) {
  return magic_operator(lift_right(v) * w * lift_left(u));
}

ComplexMatrix q_tr(const TensorSumOperator& u, const TensorSumOperator& v) {
  require_dim(u.dim(), v.dim(), "q_tr");
  ComplexMatrix r(u.dim());
  for (const auto& x : u.terms())
    for (const auto& y : v.terms()) r += normalized_trace(x.b * y.a) * (x.a * y.b);
  return r;
}

// -- Kernels ----------------------------------------------------------------------

SpectralKernel3::SpectralKernel3(FunctionSpec f, SpectralDecomposition sd) : f_(std::move(f)), sd_(std::move(sd)) {
  if (f_.max_order() < 2) throw UnsupportedOrder("second divided differences need f''");
  for (double x : sd_.eigenvalues)
    if (!f_.in_domain(x)) throw DomainError("eigenvalue " + std::to_string(x) + " outside the function domain");
}

ComplexMatrix SpectralKernel3::slice(int l) const {
  const int n = sd_.dim();
  const auto& ev = sd_.eigenvalues;
  ComplexMatrix s(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const Complex z = divided_difference(f_, {ev[i], ev[j], ev[l]});
      s(i, j) = z;
      s(j, i) = z;
    }
  return s;
}

SpectralKernel2 nc_first_derivative(const FunctionSpec& f, const SpectralDecomposition& sd) {
  const int n = sd.dim();
  SpectralKernel2 k{sd, ComplexMatrix(n)};
  const auto& ev = sd.eigenvalues;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const Complex z = divided_difference(f, {ev[i], ev[j]});
      k.weights(i, j) = z;
      k.weights(j, i) = z;
    }
  return k;
}

SpectralKernel2 nc_first_derivative(const FunctionSpec& f, const HermitianMatrix& m) {
  return nc_first_derivative(f, hermitian_eigen(m));
}

ComplexMatrix frechet1_apply(const SpectralKernel2& k, const ComplexMatrix& b) {
  require_dim(k.sd.dim(), b.dim(), "frechet1_apply");
  return k.sd.from_eigenbasis(hadamard(k.sd.to_eigenbasis(b), k.weights));
}

ComplexMatrix frechet2_apply(const SpectralKernel3& k, const ComplexMatrix& b1, const ComplexMatrix& b2) {
  const auto& sd = k.sd();
  const int n = sd.dim();
  require_dim(n, b1.dim(), "frechet2_apply");
  require_dim(n, b2.dim(), "frechet2_apply");
  const ComplexMatrix x = sd.to_eigenbasis(b1);
  const ComplexMatrix y = sd.to_eigenbasis(b2);
  ComplexMatrix r(n);
  // r_il = Σ_j f^[2](λ_i, λ_j, λ_l) (x_ij y_jl + y_ij x_jl)
  for (int l = 0; l < n; ++l) {
    const ComplexMatrix s = k.slice(l);
    for (int i = 0; i < n; ++i) {
      Complex acc{0.0, 0.0};
      for (int j = 0; j < n; ++j) acc += s(i, j) * (x(i, j) * y(j, l) + y(i, j) * x(j, l));
      r(i, l) = acc;
    }
  }
  return sd.from_eigenbasis(r);
}

ComplexMatrix frechet2_apply(const FunctionSpec& f, const HermitianMatrix& m, const ComplexMatrix& b1,
                             const ComplexMatrix& b2) {
  return frechet2_apply(SpectralKernel3(f, hermitian_eigen(m)), b1, b2);
}

ComplexMatrix delta_bilinear(const SpectralKernel3& k, const TensorSumOperator& u, const TensorSumOperator& v) {
  const auto& sd = k.sd();
  const int n = sd.dim();
  require_dim(n, u.dim(), "delta_bilinear");
  require_dim(n, v.dim(), "delta_bilinear");

  // Each (a⊗b, c⊗d) pair contributes P_λ X P_ν weighted by Σ_μ f^[2](λ,μ,ν) w_μ,
  // once with X = ad, w_μ = tr(cb P_μ) and once with X = cb, w_μ = tr(ad P_μ).
  struct Contribution {
    ComplexMatrix x;
    std::vector<Complex> w;
  };
  std::vector<Contribution> parts;
  parts.reserve(2 * u.terms().size() * v.terms().size());
  for (const auto& s : u.terms())
    for (const auto& t : v.terms()) {
      ComplexMatrix ad = sd.to_eigenbasis(s.a * t.b);
      ComplexMatrix cb = sd.to_eigenbasis(t.a * s.b);
      auto w_cb = traced_diagonal(cb);
      auto w_ad = traced_diagonal(ad);
      parts.push_back({std::move(ad), std::move(w_cb)});
      parts.push_back({std::move(cb), std::move(w_ad)});
    }

  ComplexMatrix r(n);
  std::vector<Complex> g(static_cast<std::size_t>(n));
  for (int nu = 0; nu < n; ++nu) {
    const ComplexMatrix s = k.slice(nu);  // (λ, μ) -> f^[2](λ, μ, ν)
    for (const auto& p : parts) {
      for (int lam = 0; lam < n; ++lam) {
        Complex acc{0.0, 0.0};
        for (int mu = 0; mu < n; ++mu) acc += s(lam, mu) * p.w[mu];
        r(lam, nu) += p.x(lam, nu) * acc;
      }
    }
  }
  return sd.from_eigenbasis(r);
}

ComplexMatrix delta_bilinear(const FunctionSpec& f, const HermitianMatrix& m, const TensorSumOperator& u,
                             const TensorSumOperator& v) {
  return delta_bilinear(SpectralKernel3(f, hermitian_eigen(m)), u, v);
}

ComplexMatrix delta_u(const SpectralKernel3& k, const TensorSumOperator& u) { return delta_bilinear(k, u, u); }

TensorSumOperator nc_derivative_operator(const FunctionSpec& f, const SpectralDecomposition& sd) {
  const int n = sd.dim();
  const auto k = nc_first_derivative(f, sd);
  std::vector<ComplexMatrix> proj;
  proj.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) proj.push_back(sd.projection(i));
  TensorSumOperator r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r.add(k.weights(i, j) * proj[i], proj[j]);
  return r;
}

Complex traced_correction(const FunctionSpec& f, const SpectralDecomposition& sd, const TensorSumOperator& u) {
  const int n = sd.dim();
  require_dim(n, u.dim(), "traced_correction");
  const auto g = nc_first_derivative(derivative(f), sd).weights;
  // Σ_{k,l} Σ_{ij} g_ij tr(B_k P_i A_l) tr(B_l P_j A_k)
  Complex total{0.0, 0.0};
  const auto& terms = u.terms();
  for (const auto& tk : terms)
    for (const auto& tl : terms) {
      const auto x = traced_diagonal(sd.to_eigenbasis(tl.a * tk.b));
      const auto y = traced_diagonal(sd.to_eigenbasis(tk.a * tl.b));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) total += g(i, j) * x[i] * y[j];
    }
  return total;
}

Complex rho_moments(const HermitianMatrix& m, const TensorSumOperator& u, int j1, int j2) {
  require_dim(m.dim(), u.dim(), "rho_moments");
  if (j1 < 0 || j2 < 0) throw InvalidArgument("moment orders must be nonnegative");
  const int n = m.dim();
  auto power = [&](int p) {
    ComplexMatrix r = ComplexMatrix::identity(n);
    for (int i = 0; i < p; ++i) r = r * m.matrix();
    return r;
  };
  const ComplexMatrix m1 = power(j1), m2 = power(j2);
  Complex total{0.0, 0.0};
  for (const auto& tk : u.terms()) {
    const ComplexMatrix ak = tk.a.adjoint() * m1;
    const ComplexMatrix bk = tk.b.adjoint();
    for (const auto& tl : u.terms())
      total += normalized_trace(ak * tl.a) * normalized_trace(tl.b * (m2 * bk));
  }
  return total;
}

ComplexMatrix rho_matrix(const SpectralDecomposition& sd, const TensorSumOperator& u) {
  const int n = sd.dim();
  require_dim(n, u.dim(), "rho_matrix");
  // tr(A_k* P_i A_l) = (U* A_l A_k* U)_ii / N,  tr(B_l P_j B_k*) = (U* B_k* B_l U)_jj / N
  ComplexMatrix rho(n);
  for (const auto& tk : u.terms())
    for (const auto& tl : u.terms()) {
      const auto x = traced_diagonal(sd.to_eigenbasis(tl.a * tk.a.adjoint()));
      const auto y = traced_diagonal(sd.to_eigenbasis(tk.b.adjoint() * tl.b));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) rho(i, j) += x[i] * y[j];
    }
  return rho;
}

}  // namespace freeito
