#pragma once

// Orthonormal bases of Hermitian matrices, Gaussian increments and RNG streams.

#include <cstdint>
#include <random>
#include <vector>

#include "freeito/linalg.hpp"

namespace freeito {

// Orthonormal basis of (M_N(C)_sa, ⟨·,·⟩_N).
struct HermitianONB {
  int dim = 0;
  std::vector<ComplexMatrix> elements;  // N² entries
};

HermitianONB build_onb(int n);

// Reproducible Gaussian stream keyed by (master seed, stream index).
// Single consumer: do not draw from one stream on two threads.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  // Test hook: a stream whose every draw is exactly zero.
  static RngStream zeros();

  double normal();
  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t stream_index() const { return stream_; }
  bool forced_zero() const { return zero_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  bool zero_ = false;
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_;
};

enum class IncrementMethod { Entrywise, Basis };

// ΔX = √dt Σ_E g_E E with g_E iid N(0,1). The entrywise path draws the
// same law directly: diagonal N(0, dt/N), off-diagonal real and imaginary
// parts N(0, dt/(2N)).
HermitianMatrix hermitian_increment(int n, double dt, RngStream& rng);
HermitianMatrix hermitian_increment(const HermitianONB& onb, double dt, RngStream& rng,
                                    IncrementMethod method = IncrementMethod::Entrywise);

// ΔZ = (ΔX₁ + iΔX₂)/√2 from two independent Hermitian increments.
ComplexMatrix circular_increment(int n, double dt, RngStream& rng);
ComplexMatrix circular_increment(const HermitianONB& onb, double dt, RngStream& rng,
                                 IncrementMethod method = IncrementMethod::Entrywise);

}  // namespace freeito
