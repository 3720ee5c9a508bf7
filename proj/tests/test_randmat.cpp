#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "freeito/randmat.hpp"
#include "test_support.hpp"

using namespace freeito;
using namespace testing_support;

namespace {

struct Moments {
  double mean = 0.0;
  double stderr_ = 0.0;
};

Moments moments(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= x.size();
  double var = 0.0;
  for (double v : x) var += (v - m) * (v - m);
  var /= (x.size() - 1);
  return {m, std::sqrt(var / x.size())};
}

}  // namespace

TEST(Onb, SizeOne) {
  auto onb = build_onb(1);
  ASSERT_EQ(onb.elements.size(), 1u);
  EXPECT_EQ(onb.elements[0](0, 0), Complex(1.0));
}

TEST(Onb, OrthonormalAndHermitian) {
  for (int n = 1; n <= 8; ++n) {
    auto onb = build_onb(n);
    ASSERT_EQ(static_cast<int>(onb.elements.size()), n * n);
    double worst = 0.0;
    for (std::size_t a = 0; a < onb.elements.size(); ++a) {
      EXPECT_EQ(hermitian_defect(onb.elements[a]), 0.0);
      for (std::size_t b = 0; b < onb.elements.size(); ++b) {
        Complex g = inner_product_N(onb.elements[a], onb.elements[b]);
        worst = std::max(worst, std::abs(g - (a == b ? 1.0 : 0.0)));
      }
    }
    EXPECT_LE(worst, 1e-12) << n;
  }
}

TEST(Onb, MagicCheckOffDiagonalUnit) {
  auto onb = build_onb(2);
  ComplexMatrix sum(2);
  auto b = ComplexMatrix::unit(2, 0, 1);
  for (const auto& e : onb.elements) sum += e * b * e;
  EXPECT_LE(sum.frobenius_norm(), 1e-15);
}

TEST(Rng, ReproducibleAndStreamDependent) {
  RngStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  std::vector<double> xa, xb, xc, xd;
  for (int i = 0; i < 100; ++i) {
    xa.push_back(a.normal());
    xb.push_back(b.normal());
    xc.push_back(c.normal());
    xd.push_back(d.normal());
  }
  EXPECT_EQ(xa, xb);
  EXPECT_NE(xa, xc);
  EXPECT_NE(xa, xd);
  EXPECT_EQ(a.master_seed(), 42u);
  EXPECT_EQ(a.stream_index(), 3u);
}

TEST(Rng, StreamsAreUncorrelated) {
  RngStream a(9, 0), b(9, 1);
  double s = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) s += a.normal() * b.normal();
  EXPECT_LT(std::abs(s / n), 4.0 / std::sqrt(n));
}

TEST(Increment, ReproducibleBitwise) {
  RngStream a(5, 1), b(5, 1);
  auto x = hermitian_increment(6, 0.01, a);
  auto y = hermitian_increment(6, 0.01, b);
  EXPECT_EQ(x.matrix().entries(), y.matrix().entries());
  auto z1 = circular_increment(4, 0.1, a);
  auto z2 = circular_increment(4, 0.1, b);
  EXPECT_EQ(z1.entries(), z2.entries());
}

TEST(Increment, ForcedZeros) {
  auto z = RngStream::zeros();
  EXPECT_TRUE(z.forced_zero());
  EXPECT_EQ(hermitian_increment(3, 0.5, z).matrix().frobenius_norm(), 0.0);
  EXPECT_EQ(circular_increment(3, 0.5, z).frobenius_norm(), 0.0);
  auto onb = build_onb(3);
  EXPECT_EQ(hermitian_increment(onb, 0.5, z, IncrementMethod::Basis).matrix().frobenius_norm(), 0.0);
}

TEST(Increment, SmallStepsAreSmall) {
  RngStream r(1, 0);
  double big = 0.0, small = 0.0;
  for (int i = 0; i < 200; ++i) {
    big += hermitian_increment(4, 1.0, r).matrix().frobenius_norm();
    small += hermitian_increment(4, 1e-6, r).matrix().frobenius_norm();
  }
  EXPECT_NEAR(small / big, 1e-3, 2e-4);
}

TEST(Increment, TraceOfSquareHasMeanDt) {
  for (auto method : {IncrementMethod::Entrywise, IncrementMethod::Basis}) {
    auto onb = build_onb(3);
    RngStream r(17, 0);
    std::vector<double> x;
    for (int i = 0; i < 10000; ++i) {
      auto dx = hermitian_increment(onb, 0.01, r, method).matrix();
      x.push_back(normalized_trace(dx * dx).real());
    }
    auto m = moments(x);
    EXPECT_LE(std::abs(m.mean - 0.01), 3 * m.stderr_);
  }
}

TEST(Increment, IsotropicCovariance) {
  // E ⟨ΔX,A⟩_N ⟨ΔX,B⟩_N = dt ⟨A,B⟩_N for Hermitian A, B
  Rng t(3);
  auto a = random_hermitian(3, t), b = random_hermitian(3, t);
  for (auto method : {IncrementMethod::Entrywise, IncrementMethod::Basis}) {
    auto onb = build_onb(3);
    RngStream r(23, 0);
    const double dt = 0.5;
    std::vector<double> x;
    for (int i = 0; i < 20000; ++i) {
      auto dx = hermitian_increment(onb, dt, r, method).matrix();
      x.push_back((inner_product_N(dx, a) * inner_product_N(dx, b)).real());
    }
    auto m = moments(x);
    EXPECT_LE(std::abs(m.mean - dt * inner_product_N(a, b).real()), 4 * m.stderr_);
  }
}

TEST(Increment, EntrywiseVarianceLayout) {
  // Diagonal N(0, dt/N); off-diagonal real and imaginary parts N(0, dt/(2N)).
  const int n = 4;
  const double dt = 2.0;
  RngStream r(31, 0);
  double diag = 0.0, re = 0.0, im = 0.0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    auto dx = hermitian_increment(n, dt, r).matrix();
    diag += dx(1, 1).real() * dx(1, 1).real();
    re += dx(0, 2).real() * dx(0, 2).real();
    im += dx(0, 2).imag() * dx(0, 2).imag();
  }
  EXPECT_NEAR(diag / draws, dt / n, 0.05 * dt / n);
  EXPECT_NEAR(re / draws, dt / (2 * n), 0.05 * dt / (2 * n));
  EXPECT_NEAR(im / draws, dt / (2 * n), 0.05 * dt / (2 * n));
}

TEST(Increment, CircularMoments) {
  RngStream r(37, 0);
  const double dt = 0.01;
  std::vector<double> sq_re, sq_im, mod;
  for (int i = 0; i < 10000; ++i) {
    auto dz = circular_increment(3, dt, r);
    auto s = normalized_trace(dz * dz);
    sq_re.push_back(s.real());
    sq_im.push_back(s.imag());
    mod.push_back(normalized_trace(dz * dz.adjoint()).real());
  }
  auto a = moments(sq_re), b = moments(sq_im), c = moments(mod);
  EXPECT_LE(std::abs(a.mean), 3 * a.stderr_);
  EXPECT_LE(std::abs(b.mean), 3 * b.stderr_);
  EXPECT_LE(std::abs(c.mean - dt), 3 * c.stderr_);
}

TEST(Increment, CircularIsNotHermitian) {
  RngStream r(41, 0);
  EXPECT_GT(hermitian_defect(circular_increment(3, 1.0, r)), 0.1);
}

TEST(LargeN, SupportOfSingleDraw) {
  RngStream r(2024, 0);
  auto sd = hermitian_eigen(hermitian_increment(150, 1.0, r));
  EXPECT_GE(sd.eigenvalues.front(), -2.3);
  EXPECT_LE(sd.eigenvalues.back(), 2.3);
}

TEST(LargeN, CatalanMomentsOnAverage) {
  // A single draw of tr X⁶ at N = 150 fluctuates with standard deviation ≈ 0.15,
  // so the moments are checked on a 20-draw average.
  const double catalan[] = {1, 2, 5};
  double sum[3] = {0, 0, 0};
  const int draws = 20;
  for (int d = 0; d < draws; ++d) {
    RngStream r(2024, d);
    auto x = hermitian_increment(150, 1.0, r).matrix();
    auto x2 = x * x;
    auto p = x2;
    for (int k = 0; k < 3; ++k) {
      sum[k] += normalized_trace(p).real();
      p = p * x2;
    }
  }
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(sum[k] / draws, catalan[k], 0.15) << "p=" << k + 1;
}
