#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "freeito/error.hpp"
#include "freeito/ncderiv.hpp"
#include "freeito/randmat.hpp"
#include "test_support.hpp"

using namespace freeito;
using namespace testing_support;

namespace {

double scale_of(const ComplexMatrix& m) { return std::max(1.0, m.frobenius_norm()); }

ComplexMatrix E(int n, int j, int k) { return ComplexMatrix::unit(n, j, k); }

// Random Hermitian matrix with ‖M‖_F = norm.
ComplexMatrix hermitian_with_norm(int n, Rng& r, double norm) {
  auto m = random_hermitian(n, r);
  return m * Complex(norm / m.frobenius_norm());
}

TripleTensorSum random_triple(int n, int terms, Rng& r) {
  TripleTensorSum w(n);
  for (int t = 0; t < terms; ++t) w.add(random_matrix(n, r), random_matrix(n, r), random_matrix(n, r));
  return w;
}

// Σ|c_i| max(1, ‖M‖_F)^i
double poly_size(const FunctionSpec& p, const HermitianMatrix& m) {
  double x = std::max(1.0, m.matrix().frobenius_norm()), s = 0.0, pw = 1.0;
  for (const auto& c : std::get<Polynomial>(p.variant()).coeffs) {
    s += std::abs(c) * pw;
    pw *= x;
  }
  return s;
}

std::vector<FunctionSpec> frechet_functions() {
  return {monomial(3), fourier({{{0.7, 0.2}, 1.3}, {{-0.4, 0.5}, -2.1}}), log_shift(2.0)};
}

}  // namespace

// -- tensor algebra ------------------------------------------------------------------

TEST(Tensor, FlipStarAdjointExamples) {
  Rng r(1);
  auto a = random_matrix(3, r), b = random_matrix(3, r);
  auto u = TensorSumOperator::pure(a, b);
  auto f = tensor_flip(u);
  EXPECT_EQ(f.terms()[0].a.entries(), b.entries());
  EXPECT_EQ(f.terms()[0].b.entries(), a.entries());
  auto s = tensor_star(u);
  EXPECT_EQ(s.terms()[0].a.entries(), b.adjoint().entries());
  EXPECT_EQ(s.terms()[0].b.entries(), a.adjoint().entries());
  auto d = tensor_adjoint(u);
  EXPECT_EQ(d.terms()[0].a.entries(), a.adjoint().entries());
  EXPECT_EQ(d.terms()[0].b.entries(), b.adjoint().entries());

  auto v = random_tensor(3, 4, r);
  EXPECT_EQ(action_matrix(tensor_flip(tensor_flip(v))), action_matrix(v));
  EXPECT_EQ(action_matrix(tensor_star(tensor_star(v))), action_matrix(v));
  auto id = TensorSumOperator::identity(3);
  EXPECT_EQ(action_matrix(tensor_flip(id)), action_matrix(id));
}

TEST(Tensor, SelfStarSingleHermitianTerm) {
  Rng r(2);
  auto h = random_hermitian(3, r);
  auto u = TensorSumOperator::pure(h, h);
  EXPECT_EQ(action_matrix(tensor_star(u)), action_matrix(u));
}

TEST(Tensor, StarMeansAdjointOfAction) {
  // (u^★ # C) = (u # C*)*
  Rng r(3);
  auto u = random_tensor(4, 3, r);
  auto c = random_matrix(4, r);
  EXPECT_LE(frob_diff(hash_apply(tensor_star(u), c), hash_apply(u, c.adjoint()).adjoint()), 1e-12);
}

TEST(Tensor, HashExamples) {
  Rng r(4);
  auto c = random_matrix(3, r);
  EXPECT_LE(frob_diff(hash_apply(TensorSumOperator::identity(3), c), c), 0.0);
  auto a = random_matrix(3, r), b = random_matrix(3, r);
  EXPECT_LE(frob_diff(hash_apply(TensorSumOperator::pure(a, b), ComplexMatrix::identity(3)), naive_product(a, b)),
            1e-13);
  auto res = hash_apply(TensorSumOperator::pure(E(2, 0, 0), E(2, 1, 1)), E(2, 0, 1));
  EXPECT_EQ(res.entries(), E(2, 0, 1).entries());
}

TEST(Tensor, HashIsAlgebraHomomorphism) {
  Rng r(5);
  for (int rep = 0; rep < 20; ++rep) {
    int n = r.integer(1, 5);
    auto u = random_tensor(n, r.integer(1, 3), r), v = random_tensor(n, r.integer(1, 3), r);
    auto c = random_matrix(n, r);
    auto lhs = hash_apply(u * v, c);
    auto rhs = hash_apply(u, hash_apply(v, c));
    EXPECT_LE(frob_diff(lhs, rhs), 1e-11 * scale_of(rhs));
    // linearity in u
    Complex s{0.3, -1.2};
    EXPECT_LE(frob_diff(hash_apply(u + s * v, c), hash_apply(u, c) + s * hash_apply(v, c)), 1e-11 * scale_of(rhs));
  }
}

TEST(Tensor, DimensionMismatch) {
  auto u = TensorSumOperator::identity(2);
  EXPECT_THROW(hash_apply(u, ComplexMatrix(3)), DimensionMismatch);
  EXPECT_THROW(u * TensorSumOperator::identity(3), DimensionMismatch);
  EXPECT_THROW(q_tr(u, TensorSumOperator::identity(3)), DimensionMismatch);
  EXPECT_THROW(magic_operator(ComplexMatrix(2), ComplexMatrix(2), ComplexMatrix(3)), DimensionMismatch);
}

TEST(Tensor, TraceTensor) {
  auto u = TensorSumOperator::pure(E(2, 0, 0), ComplexMatrix::identity(2));
  EXPECT_EQ(trace_tensor(u), Complex(0.5));
  EXPECT_EQ(trace_tensor(TensorSumOperator(2)), Complex(0.0));
}

// -- magic operator and Q ------------------------------------------------------------

TEST(Magic, Examples) {
  Rng r(6);
  auto b = random_matrix(3, r);
  auto id = ComplexMatrix::identity(3);
  EXPECT_LE(frob_diff(magic_operator(id, b, id), normalized_trace(b) * id), 1e-14);
  auto a = random_matrix(3, r), c = random_matrix(3, r);
  EXPECT_LE(frob_diff(magic_operator(a, id, c), naive_product(a, c)), 1e-13);
  EXPECT_LE(frob_diff(magic_operator(E(2, 0, 0), E(2, 0, 0), ComplexMatrix::identity(2)), 0.5 * E(2, 0, 0)), 0.0);
}

TEST(Magic, FormulaOnConstructedBasis) {
  Rng r(7);
  for (int n : {1, 2, 3, 5, 8}) {
    auto onb = build_onb(n);
    for (int rep = 0; rep < 100; ++rep) {
      auto b = random_matrix(n, r);
      ComplexMatrix sum(n);
      for (const auto& e : onb.elements) sum += naive_product(naive_product(e, b), e);
      EXPECT_LE(frob_diff(sum, normalized_trace(b) * ComplexMatrix::identity(n)), 1e-10);
    }
  }
}

TEST(Magic, KeyIdentityOnBasis) {
  // Σ_E W #₂ [u#E, v#E] = M_tr((I⊗v)·W·(u⊗I))
  Rng r(8);
  for (int rep = 0; rep < 30; ++rep) {
    int n = r.integer(1, 5);
    auto w = random_triple(n, r.integer(1, 3), r);
    auto u = random_tensor(n, r.integer(1, 3), r), v = random_tensor(n, r.integer(1, 3), r);
    ComplexMatrix sum(n);
    for (const auto& e : build_onb(n).elements) sum += hash2(w, hash_apply(u, e), hash_apply(v, e));
    auto rhs = covariation_density(w, u, v);
    EXPECT_LE(frob_diff(sum, rhs), 1e-10 * scale_of(rhs));
    EXPECT_LE(frob_diff(rhs, magic_operator(lift_right(v) * w * lift_left(u))), 1e-10 * scale_of(rhs));
  }
}

TEST(Magic, TripleProductRule) {
  // (A⊗B⊗C)(D⊗E⊗F) = AD⊗EB⊗CF, so (x·y) #₂ [P, Q] = AD P EB Q CF summed over term pairs.
  Rng r(9);
  auto x = random_triple(3, 2, r), y = random_triple(3, 2, r);
  auto p = random_matrix(3, r), q = random_matrix(3, r);
  ComplexMatrix want(3);
  for (const auto& s : x.terms())
    for (const auto& t : y.terms()) {
      auto left = naive_product(naive_product(naive_product(s.a, t.a), p), naive_product(t.b, s.b));
      want += naive_product(naive_product(left, q), naive_product(s.c, t.c));
    }
  EXPECT_LE(frob_diff(hash2(x * y, p, q), want), 1e-10 * scale_of(want));
}

TEST(Q, Examples) {
  Rng r(10);
  auto id = TensorSumOperator::identity(3);
  EXPECT_LE(frob_diff(q_tr(id, id), ComplexMatrix::identity(3)), 1e-15);
  auto a = random_matrix(3, r), d = random_matrix(3, r);
  auto lhs = q_tr(TensorSumOperator::pure(a, ComplexMatrix::identity(3)),
                  TensorSumOperator::pure(ComplexMatrix::identity(3), d));
  EXPECT_LE(frob_diff(lhs, naive_product(a, d)), 1e-13);
}

TEST(Q, TraceOfQWithStarIsNonnegative) {
  Rng r(11);
  for (int rep = 0; rep < 50; ++rep) {
    int n = r.integer(1, 5);
    auto u = random_tensor(n, r.integer(1, 4), r);
    auto t = normalized_trace(q_tr(u, tensor_star(u)));
    auto want = trace_tensor(u * tensor_adjoint(u));
    EXPECT_LT(std::abs(t - want), 1e-11 * std::max(1.0, std::abs(want)));
    EXPECT_GE(t.real(), -1e-12);
    EXPECT_LT(std::abs(t.imag()), 1e-11 * std::max(1.0, std::abs(t)));
  }
}

// -- derivatives ----------------------------------------------------------------------

TEST(FirstDerivative, KernelExamples) {
  auto m = HermitianMatrix(ComplexMatrix::diagonal({1, 2}));
  auto k = nc_first_derivative(monomial(2), m);
  EXPECT_LT(max_abs_diff(k.weights, ComplexMatrix{{2, 3}, {3, 4}}), 1e-14);
  auto k1 = nc_first_derivative(monomial(1), m);
  EXPECT_LT(max_abs_diff(k1.weights, ComplexMatrix{{1, 1}, {1, 1}}), 1e-14);
  auto ke = nc_first_derivative(fourier({{1.0, 1.0}}), HermitianMatrix(ComplexMatrix(3)));
  for (auto w : ke.weights.entries()) EXPECT_LT(std::abs(w - Complex(0, 1)), 1e-15);
}

TEST(FirstDerivative, ApplyExamples) {
  auto m = HermitianMatrix(ComplexMatrix::diagonal({1, 2}));
  auto x = ComplexMatrix{{0, 1}, {1, 0}};
  EXPECT_LT(max_abs_diff(frechet1_apply(nc_first_derivative(monomial(2), m), x), ComplexMatrix{{0, 3}, {3, 0}}), 1e-14);
  Rng r(12);
  auto b = random_matrix(2, r);
  EXPECT_LT(max_abs_diff(frechet1_apply(nc_first_derivative(monomial(1), m), b), b), 1e-14);
  EXPECT_LT(max_abs_diff(frechet1_apply(nc_first_derivative(monomial(3), m), E(2, 0, 1)), 7.0 * E(2, 0, 1)), 1e-14);
}

TEST(FirstDerivative, HermitianForRealFunction) {
  Rng r(13);
  auto m = HermitianMatrix(random_hermitian(5, r));
  auto b = random_hermitian(5, r);
  auto res = frechet1_apply(nc_first_derivative(log_shift(10.0), m), b);
  EXPECT_LE(hermitian_defect(res), 1e-12 * scale_of(res));
}

TEST(FirstDerivative, MatchesCentralDifferences) {
  Rng r(14);
  const double h = 1e-5;
  for (const auto& f : frechet_functions()) {
    for (int rep = 0; rep < 50; ++rep) {
      auto m = hermitian_with_norm(4, r, r.uniform(0.1, 1.0));
      auto b = hermitian_with_norm(4, r, 1.0);
      auto got = frechet1_apply(nc_first_derivative(f, HermitianMatrix(m)), b);
      auto fd = (apply_function(f, HermitianMatrix(m + h * b)) - apply_function(f, HermitianMatrix(m - h * b))) *
                Complex(1.0 / (2 * h));
      EXPECT_LE(frob_diff(got, fd), 1e-6 * scale_of(got)) << f.label();
    }
  }
}

TEST(SecondDerivative, Examples) {
  Rng r(15);
  auto m = HermitianMatrix(random_hermitian(3, r));
  auto id = ComplexMatrix::identity(3);
  EXPECT_LE(frob_diff(frechet2_apply(monomial(2), m, id, id), 2.0 * id), 1e-13);
  auto b1 = random_matrix(3, r), b2 = random_matrix(3, r);
  EXPECT_LE(frechet2_apply(polynomial({1, 2}), m, b1, b2).frobenius_norm(), 1e-14);
  auto i2 = HermitianMatrix(ComplexMatrix::identity(2));
  auto c1 = random_matrix(2, r), c2 = random_matrix(2, r);
  auto want = 3.0 * (naive_product(c1, c2) + naive_product(c2, c1));
  EXPECT_LE(frob_diff(frechet2_apply(monomial(3), i2, c1, c2), want), 1e-13 * scale_of(want));
}

TEST(SecondDerivative, MatchesCentralDifferences) {
  Rng r(16);
  const double h = 1e-3;
  for (const auto& f : frechet_functions()) {
    for (int rep = 0; rep < 50; ++rep) {
      auto m = hermitian_with_norm(4, r, r.uniform(0.1, 1.0));
      auto b = hermitian_with_norm(4, r, 1.0);
      auto hm = HermitianMatrix(m);
      auto got = frechet2_apply(f, hm, b, b);
      auto fd = (apply_function(f, HermitianMatrix(m + h * b)) - 2.0 * apply_function(f, hm) +
                 apply_function(f, HermitianMatrix(m - h * b))) *
                Complex(1.0 / (h * h));
      EXPECT_LE(frob_diff(got, fd), 1e-4 * scale_of(got)) << f.label();
    }
  }
}

TEST(SecondDerivative, SymmetricBilinear) {
  Rng r(17);
  auto m = HermitianMatrix(random_hermitian(4, r));
  auto f = log_shift(5.0);
  auto b1 = random_matrix(4, r), b2 = random_matrix(4, r), b3 = random_matrix(4, r);
  auto x = frechet2_apply(f, m, b1, b2);
  EXPECT_LE(frob_diff(x, frechet2_apply(f, m, b2, b1)), 1e-13 * scale_of(x));
  Complex s{1.5, -0.5};
  auto lhs = frechet2_apply(f, m, b1 + s * b3, b2);
  auto rhs = x + s * frechet2_apply(f, m, b3, b2);
  EXPECT_LE(frob_diff(lhs, rhs), 1e-12 * scale_of(rhs));
}

TEST(SecondDerivative, KernelSliceIsSymmetric) {
  Rng r(18);
  SpectralKernel3 k(fourier({{1.0, 1.7}}), hermitian_eigen(HermitianMatrix(random_hermitian(4, r))));
  auto s1 = k.slice(1);
  auto s2 = k.slice(2);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      EXPECT_LT(std::abs(s1(i, j) - s1(j, i)), 1e-14);
      EXPECT_LT(std::abs(s1(i, 2) - s2(i, 1)), 1e-14);
    }
}

// -- Δ operators ------------------------------------------------------------------

TEST(Delta, Examples) {
  Rng r(19);
  auto m = HermitianMatrix(random_hermitian(3, r));
  auto id = TensorSumOperator::identity(3);
  EXPECT_LE(frob_diff(delta_bilinear(monomial(2), m, id, id), 2.0 * ComplexMatrix::identity(3)), 1e-13);
  auto u = random_tensor(3, 2, r), v = random_tensor(3, 2, r);
  EXPECT_LE(delta_bilinear(polynomial({3, -1}), m, u, v).frobenius_norm(), 1e-14);
}

TEST(Delta, ScalarCaseBruteForce) {
  // N = 1: Δ_{a⊗b, c⊗d} f(m) = f^[2](m,m,m)(abcd + cdab) = f''(m) abcd
  auto one = [](Complex z) { return ComplexMatrix(1, {z}); };
  auto hm = HermitianMatrix(one(1.0));
  auto u = TensorSumOperator::pure(one(1.0), one(1.0));
  EXPECT_LT(std::abs(delta_bilinear(monomial(3), hm, u, u)(0, 0) - 6.0), 1e-14);
  Rng r(20);
  for (int rep = 0; rep < 20; ++rep) {
    double m = r.uniform(-1, 3);
    Complex a{r.normal(), r.normal()}, b{r.normal(), r.normal()}, c{r.normal(), r.normal()}, d{r.normal(), r.normal()};
    auto f = log_shift(2.0);
    auto got = delta_bilinear(f, HermitianMatrix(one(m)), TensorSumOperator::pure(one(a), one(b)),
                              TensorSumOperator::pure(one(c), one(d)))(0, 0);
    Complex want = evaluate_derivative(f, m, 2) * a * b * c * d;
    EXPECT_LT(std::abs(got - want), 1e-13 * std::max(1.0, std::abs(want)));
  }
}

TEST(Delta, EqualsBasisSumOfSecondDerivatives) {
  // Σ_E D²f(M)[u#E, v#E] = Δ_{u,v} f(M)
  Rng r(21);
  for (int rep = 0; rep < 20; ++rep) {
    int n = r.integer(1, 5);
    auto m = HermitianMatrix(random_hermitian(n, r));
    auto f = rep % 2 ? log_shift(10.0) : FunctionSpec(fourier({{1.0, 0.8}, {{0, 1}, -1.4}}));
    auto u = random_tensor(n, r.integer(1, 3), r), v = random_tensor(n, r.integer(1, 3), r);
    SpectralKernel3 k(f, hermitian_eigen(m));
    ComplexMatrix sum(n);
    for (const auto& e : build_onb(n).elements) sum += frechet2_apply(k, hash_apply(u, e), hash_apply(v, e));
    auto got = delta_bilinear(k, u, v);
    EXPECT_LE(frob_diff(got, sum), 1e-10 * scale_of(sum));
  }
}

TEST(Delta, QuadraticReducesToQ) {
  Rng r(22);
  auto m = HermitianMatrix(random_hermitian(4, r));
  auto u = random_tensor(4, 3, r), v = random_tensor(4, 2, r);
  auto want = q_tr(u, v) + q_tr(v, u);
  EXPECT_LE(frob_diff(delta_bilinear(monomial(2), m, u, v), want), 1e-11 * scale_of(want));
}

TEST(Delta, SymmetricAndBilinear) {
  Rng r(23);
  auto m = HermitianMatrix(random_hermitian(4, r));
  SpectralKernel3 k(log_shift(6.0), hermitian_eigen(m));
  auto u = random_tensor(4, 2, r), v = random_tensor(4, 2, r), w = random_tensor(4, 1, r);
  auto x = delta_bilinear(k, u, v);
  EXPECT_LE(frob_diff(x, delta_bilinear(k, v, u)), 1e-12 * scale_of(x));
  Complex s{-0.3, 2.0};
  auto lhs = delta_bilinear(k, u + s * w, v);
  auto rhs = x + s * delta_bilinear(k, w, v);
  EXPECT_LE(frob_diff(lhs, rhs), 1e-11 * scale_of(rhs));
  EXPECT_LE(frob_diff(delta_u(k, u), delta_bilinear(k, u, u)), 0.0);
}

TEST(Delta, HermitianForSelfStarCoefficient) {
  Rng r(24);
  for (int rep = 0; rep < 30; ++rep) {
    int n = r.integer(1, 6);
    auto m = HermitianMatrix(random_hermitian(n, r));
    auto u = random_self_star(n, r.integer(1, 3), r);
    auto f = rep % 2 ? FunctionSpec(polynomial(random_coeffs(5, r, true))) : log_shift(10.0);
    auto d = delta_bilinear(f, m, u, u);
    EXPECT_LE(hermitian_defect(d), 1e-10 * scale_of(d));
  }
}

// -- trace identities and ρ ---------------------------------------------------------

TEST(TraceIdentities, FirstDerivative) {
  Rng r(25);
  for (int rep = 0; rep < 200; ++rep) {
    int n = r.integer(1, 6);
    auto m = HermitianMatrix(random_hermitian(n, r));
    auto p = polynomial(random_coeffs(r.integer(0, 5), r));
    auto kmat = random_matrix(n, r);
    auto lhs = normalized_trace(frechet1_apply(nc_first_derivative(p, m), kmat));
    auto rhs = normalized_trace(apply_function(derivative(p), m) * kmat);
    EXPECT_LE(std::abs(lhs - rhs), 1e-9 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(TraceIdentities, SecondDerivative) {
  Rng r(26);
  for (int rep = 0; rep < 200; ++rep) {
    int n = r.integer(1, 6);
    auto m = HermitianMatrix(random_hermitian(n, r));
    auto sd = hermitian_eigen(m);
    auto p = polynomial(random_coeffs(r.integer(0, 5), r));
    auto u = random_tensor(n, r.integer(1, 3), r), v = random_tensor(n, r.integer(1, 3), r);
    auto lhs = normalized_trace(delta_bilinear(p, m, u, v));
    auto dp = nc_derivative_operator(derivative(p), sd);
    auto rhs = trace_tensor(tensor_flip(v) * dp * u);
    double scale = std::max(1.0, poly_size(p, m) * tensor_norm_bound(u) * tensor_norm_bound(v));
    EXPECT_LE(std::abs(lhs - rhs), 1e-9 * scale);
  }
}

TEST(TraceIdentities, DerivativeOperatorActsLikeFrechet) {
  Rng r(27);
  auto m = HermitianMatrix(random_hermitian(4, r));
  auto f = log_shift(8.0);
  auto sd = hermitian_eigen(m);
  auto b = random_matrix(4, r);
  auto want = frechet1_apply(nc_first_derivative(f, sd), b);
  EXPECT_LE(frob_diff(hash_apply(nc_derivative_operator(f, sd), b), want), 1e-12 * scale_of(want));
}

TEST(Rho, Examples) {
  auto m = HermitianMatrix(ComplexMatrix::diagonal({1, 2}));
  auto id = TensorSumOperator::identity(2);
  EXPECT_LT(std::abs(rho_moments(m, id, 0, 0) - 1.0), 1e-15);
  EXPECT_LT(std::abs(rho_moments(m, id, 1, 0) - 1.5), 1e-15);
  auto u = TensorSumOperator::pure(E(2, 0, 0), ComplexMatrix::identity(2));
  EXPECT_LT(std::abs(rho_moments(HermitianMatrix(ComplexMatrix::identity(2)), u, 0, 0) - 0.5), 1e-15);
}

TEST(Rho, ZeroMomentIsNonnegativeAndMatrixSumsMoments) {
  Rng r(28);
  for (int rep = 0; rep < 30; ++rep) {
    int n = r.integer(1, 5);
    auto m = HermitianMatrix(random_hermitian(n, r));
    auto sd = hermitian_eigen(m);
    auto u = random_tensor(n, r.integer(1, 3), r);
    auto z = rho_moments(m, u, 0, 0);
    EXPECT_GE(z.real(), -1e-12);
    EXPECT_LT(std::abs(z.imag()), 1e-12 * std::max(1.0, std::abs(z)));
    auto rho = rho_matrix(sd, u);
    for (int j1 : {0, 1, 2})
      for (int j2 : {0, 1, 3}) {
        Complex s = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            s += std::pow(sd.eigenvalues[i], j1) * std::pow(sd.eigenvalues[j], j2) * rho(i, j);
        auto want = rho_moments(m, u, j1, j2);
        EXPECT_LT(std::abs(s - want), 1e-10 * std::max(1.0, std::abs(want)));
      }
  }
}

TEST(Rho, TracedCorrectionConsistency) {
  Rng r(29);
  for (int rep = 0; rep < 50; ++rep) {
    int n = r.integer(1, 6);
    auto m = HermitianMatrix(random_hermitian(n, r));
    auto sd = hermitian_eigen(m);
    auto u = random_self_star(n, r.integer(1, 3), r);
    auto f = rep % 2 ? FunctionSpec(polynomial(random_coeffs(5, r))) : log_shift(10.0);
    auto tc = traced_correction(f, sd, u);
    auto rho = rho_matrix(sd, u);
    auto fp = derivative(f);
    Complex want = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        want += divided_difference(fp, {sd.eigenvalues[i], sd.eigenvalues[j]}) * rho(i, j);
    double scale = std::max(1.0, std::abs(want));
    EXPECT_LT(std::abs(tc - want), 1e-9 * scale);
    EXPECT_LT(std::abs(tc - normalized_trace(delta_bilinear(f, m, u, u))), 1e-9 * scale);
    auto materialized = trace_tensor(tensor_flip(u) * nc_derivative_operator(fp, sd) * u);
    EXPECT_LT(std::abs(tc - materialized), 1e-9 * scale);
  }
}

TEST(Kernels, ActionMatrixOfProduct) {
  Rng r(30);
  auto u = random_tensor(3, 2, r), v = random_tensor(3, 2, r);
  auto au = action_matrix(u), av = action_matrix(v), auv = action_matrix(u * v);
  const int d = 9;
  double worst = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Complex s = 0.0;
      for (int k = 0; k < d; ++k) s += au[i * d + k] * av[k * d + j];
      worst = std::max(worst, std::abs(s - auv[i * d + j]));
    }
  EXPECT_LT(worst, 1e-12);
}
