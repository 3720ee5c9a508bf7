#include "freeito/randmat.hpp"

#include <cmath>

#include "freeito/error.hpp"

namespace freeito {

HermitianONB build_onb(int n) {
  if (n < 1) throw InvalidArgument("basis dimension must be positive");
  HermitianONB onb;
  onb.dim = n;
  onb.elements.reserve(static_cast<std::size_t>(n) * n);
  const double diag = 1.0 / std::sqrt(static_cast<double>(n));
  const double off = 1.0 / std::sqrt(2.0 * n);
  for (int k = 0; k < n; ++k) onb.elements.push_back(diag * ComplexMatrix::unit(n, k, k));
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      ComplexMatrix s(n), a(n);
      s(j, k) = s(k, j) = off;
      a(j, k) = Complex{0.0, off};
      a(k, j) = Complex{0.0, -off};
      onb.elements.push_back(std::move(s));
      onb.elements.push_back(std::move(a));
    }
  return onb;
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : seed_(master_seed), stream_(stream_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream_index), static_cast<std::uint32_t>(stream_index >> 32)};
  engine_.seed(seq);
}

RngStream RngStream::zeros() {
  RngStream r(0, 0);
  r.zero_ = true;
  return r;
}

double RngStream::normal() {
  if (zero_) return 0.0;
  return dist_(engine_);
}

HermitianMatrix hermitian_increment(int n, double dt, RngStream& rng) {
  if (!(dt > 0.0)) throw InvalidArgument("increment dt must be positive");
  ComplexMatrix x(n);
  const double sd_diag = std::sqrt(dt / n);
  const double sd_off = std::sqrt(dt / (2.0 * n));
  for (int i = 0; i < n; ++i) {
    x(i, i) = sd_diag * rng.normal();
    for (int j = i + 1; j < n; ++j) {
      const double re = sd_off * rng.normal();
      const double im = sd_off * rng.normal();
      x(i, j) = Complex{re, im};
      x(j, i) = Complex{re, -im};
    }
  }
  return HermitianMatrix::symmetrized(x);
}

HermitianMatrix hermitian_increment(const HermitianONB& onb, double dt, RngStream& rng, IncrementMethod method) {
  if (method == IncrementMethod::Entrywise) return hermitian_increment(onb.dim, dt, rng);
  if (!(dt > 0.0)) throw InvalidArgument("increment dt must be positive");
  ComplexMatrix x(onb.dim);
  const double s = std::sqrt(dt);
  for (const auto& e : onb.elements) x.axpy(s * rng.normal(), e);
  return HermitianMatrix::symmetrized(x);
}

ComplexMatrix circular_increment(int n, double dt, RngStream& rng) {
  const auto x1 = hermitian_increment(n, dt, rng);
  const auto x2 = hermitian_increment(n, dt, rng);
  const double r = 1.0 / std::sqrt(2.0);
  return r * x1.matrix() + Complex{0.0, r} * x2.matrix();
}

ComplexMatrix circular_increment(const HermitianONB& onb, double dt, RngStream& rng, IncrementMethod method) {
  const auto x1 = hermitian_increment(onb, dt, rng, method);
  const auto x2 = hermitian_increment(onb, dt, rng, method);
  const double r = 1.0 / std::sqrt(2.0);
  return r * x1.matrix() + Complex{0.0, r} * x2.matrix();
}

}  // namespace freeito
