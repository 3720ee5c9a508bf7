#pragma once

// Scalar functions f: R -> C and their divided differences f^[k].

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace freeito {

using Complex = std::complex<double>;

struct Polynomial {
  // c_0 + c_1 x + ... + c_n x^n
  std::vector<Complex> coeffs;
};

struct FourierAtom {
  Complex c;
  double xi = 0.0;
};

// f(x) = sum_j c_j exp(i x xi_j): a Wiener-space function with a discrete measure.
struct FourierSum {
  std::vector<FourierAtom> atoms;
};

using ScalarFn = std::function<Complex(double)>;

struct OpenInterval {
  double lo;
  double hi;
  bool contains(double x) const { return x > lo && x < hi; }
};

// Function known only through callbacks for f, f' and (optionally) f''.
// Callbacks must be re-entrant.
struct SampledC2 {
  ScalarFn f;
  ScalarFn d1;
  ScalarFn d2;  // may be empty, which limits divided differences to k <= 1
  std::optional<OpenInterval> domain;
};

class FunctionSpec {
 public:
  using Variant = std::variant<Polynomial, FourierSum, SampledC2>;

  FunctionSpec(Polynomial p, std::string label = {});
  FunctionSpec(FourierSum s, std::string label = {});
  FunctionSpec(SampledC2 s, std::string label = {});

  const Variant& variant() const { return v_; }
  const std::string& label() const { return label_; }

  bool is_polynomial() const { return std::holds_alternative<Polynomial>(v_); }
  bool is_fourier() const { return std::holds_alternative<FourierSum>(v_); }
  bool is_sampled() const { return std::holds_alternative<SampledC2>(v_); }

  // Highest divided-difference order available (unbounded for exact variants).
  int max_order() const;
  bool in_domain(double x) const;
  std::optional<OpenInterval> domain() const;

 private:
  Variant v_;
  std::string label_;
};

// -- Construction helpers ---------------------------------------------------

FunctionSpec polynomial(std::vector<Complex> coeffs);
FunctionSpec monomial(int degree);
FunctionSpec fourier(std::vector<FourierAtom> atoms);
// log(x + eps) on (-eps, inf).
FunctionSpec log_shift(double eps);
// exp(rate x)
FunctionSpec exp_fn(double rate = 1.0);
// x^p; integer p >= 0 yields an exact polynomial, otherwise a callback on (0, inf).
FunctionSpec power_fn(double p);

// f' as a FunctionSpec. A SampledC2 input loses one derivative.
FunctionSpec derivative(const FunctionSpec& f);
// Pointwise product; defined for polynomial*polynomial and fourier*fourier.
FunctionSpec product(const FunctionSpec& f, const FunctionSpec& g);
// Polynomial degree (index of last nonzero coefficient); -1 for the zero polynomial.
int degree(const Polynomial& p);

// -- Evaluation -------------------------------------------------------------

Complex evaluate(const FunctionSpec& f, double x);
// order in {0,1,2}
Complex evaluate_derivative(const FunctionSpec& f, double x, int order);

// Nodes are treated as coincident below this separation (relative to max(1, max|node|)).
inline constexpr double kConfluenceThreshold = 1e-7;

// f^[k](nodes), k = nodes.size() - 1. Symmetric in the nodes and continuous
// across collisions, so repeated nodes are allowed.
Complex divided_difference(const FunctionSpec& f, std::span<const double> nodes);
Complex divided_difference(const FunctionSpec& f, std::initializer_list<double> nodes);

// Exact multi-index sum  sum_i c_i sum_{|delta| = i-k} nodes^delta.
// Combinatorial; kept as an independent check on the recursive path.
Complex divided_difference_poly_closed_form(std::span<const Complex> coeffs, int k,
                                            std::span<const double> nodes);

}  // namespace freeito
