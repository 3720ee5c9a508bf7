#include "freeito/funcspec.hpp"

#include <algorithm>
#include <array>
#include <climits>
#include <cmath>
#include <limits>

#include "freeito/error.hpp"

namespace freeito {

namespace {

constexpr Complex kI{0.0, 1.0};

// Gauss-Legendre, 8 points, mapped to [0, 1].
struct GaussRule {
  std::array<double, 8> x;
  std::array<double, 8> w;
};

const GaussRule& gauss8() {
  static const GaussRule rule = [] {
    constexpr std::array<double, 4> pos{0.1834346424956498, 0.5255324099163290,
                                        0.7966664774136267, 0.9602898564975363};
    constexpr std::array<double, 4> wt{0.3626837833783620, 0.3137066458778873,
                                       0.2223810344533745, 0.1012285362903763};
    GaussRule r{};
    for (int i = 0; i < 4; ++i) {
      r.x[2 * i] = 0.5 * (1.0 - pos[i]);
      r.x[2 * i + 1] = 0.5 * (1.0 + pos[i]);
      r.w[2 * i] = 0.5 * wt[i];
      r.w[2 * i + 1] = 0.5 * wt[i];
    }
    return r;
  }();
  return rule;
}

double node_scale(std::span<const double> nodes) {
  double s = 1.0;
  for (double x : nodes) s = std::max(s, std::abs(x));
  return s;
}

double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

Complex horner(std::span<const Complex> c, double x) {
  Complex acc{0.0, 0.0};
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::vector<Complex> poly_derivative(const std::vector<Complex>& c) {
  if (c.size() <= 1) return {Complex{0.0, 0.0}};
  std::vector<Complex> d(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * static_cast<double>(i);
  return d;
}

// Divided difference by repeated synthetic division: dividing p by (x - a)
// leaves the quotient p^[1](a, .), and so on one node at a time.
Complex poly_divided_difference(const Polynomial& p, std::span<const double> nodes) {
  const int k = static_cast<int>(nodes.size()) - 1;
  std::vector<Complex> q(p.coeffs.begin(), p.coeffs.begin() + (degree(p) + 1));
  for (int j = 0; j < k; ++j) {
    if (q.size() <= 1) return Complex{0.0, 0.0};
    std::vector<Complex> quot(q.size() - 1);
    Complex carry = q.back();
    for (std::size_t i = q.size() - 1; i-- > 0;) {
      quot[i] = carry;
      carry = q[i] + nodes[j] * carry;
    }
    q = std::move(quot);
  }
  return horner(q, nodes[k]);
}

// Derivative data needed by the hybrid k <= 2 evaluator.
struct DiffOracle {
  std::function<Complex(double)> f;
  std::function<Complex(double)> d1;
  std::function<Complex(double)> d2;
  // Stable first divided difference for well-separated nodes.
  std::function<Complex(double, double)> dd1_far;
};

// Separation below which difference quotients are replaced by quadrature of
// the Hermite-Genocchi integral.
constexpr double kQuadratureBand = 1e-2;

Complex hybrid_dd1(const DiffOracle& o, double a, double b, double scale) {
  const double gap = std::abs(a - b);
  if (gap < kConfluenceThreshold * scale) return o.d1(0.5 * (a + b));
  if (gap < kQuadratureBand * scale) {
    const auto& g = gauss8();
    Complex acc{0.0, 0.0};
    for (int i = 0; i < 8; ++i) acc += g.w[i] * o.d1(b + g.x[i] * (a - b));
    return acc;
  }
  return o.dd1_far(a, b);
}

Complex hybrid_dd2(const DiffOracle& o, std::array<double, 3> x, double scale) {
  std::sort(x.begin(), x.end());
  const double spread = x[2] - x[0];
  if (spread < kConfluenceThreshold * scale) return 0.5 * o.d2(x[1]);
  if (spread < kQuadratureBand * scale) {
    // Integral of f'' over the 2-simplex in collapsed coordinates.
    const auto& g = gauss8();
    Complex acc{0.0, 0.0};
    for (int i = 0; i < 8; ++i) {
      const double u = g.x[i];
      for (int j = 0; j < 8; ++j) {
        const double v = (1.0 - u) * g.x[j];
        const double pt = u * x[0] + v * x[1] + (1.0 - u - v) * x[2];
        acc += g.w[i] * g.w[j] * (1.0 - u) * o.d2(pt);
      }
    }
    return acc;
  }
  // f^[2](a,b,c) = (f^[1](a,b) - f^[1](b,c)) / (a - c) with a, c the extreme nodes.
  return (hybrid_dd1(o, x[0], x[1], scale) - hybrid_dd1(o, x[1], x[2], scale)) / (x[0] - x[2]);
}

// exp(A) for a small upper-triangular matrix (row-major n x n).
std::vector<Complex> triangular_expm(std::vector<Complex> a, int n) {
  auto mul = [n](const std::vector<Complex>& x, const std::vector<Complex>& y) {
    std::vector<Complex> z(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
      for (int k = i; k < n; ++k)
        for (int j = k; j < n; ++j) z[i * n + j] += x[i * n + k] * y[k * n + j];
    return z;
  };
  double norm = 0.0;
  for (const auto& v : a) norm += std::abs(v);
  int squarings = 0;
  while (norm > 0.25) {
    norm *= 0.5;
    ++squarings;
  }
  const double factor = std::ldexp(1.0, -squarings);
  for (auto& v : a) v *= factor;
  std::vector<Complex> result(static_cast<std::size_t>(n * n));
  std::vector<Complex> term(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) result[i * n + i] = term[i * n + i] = 1.0;
  for (int m = 1; m <= 20; ++m) {
    term = mul(term, a);
    for (auto& v : term) v /= static_cast<double>(m);
    for (std::size_t i = 0; i < result.size(); ++i) result[i] += term[i];
  }
  for (int s = 0; s < squarings; ++s) result = mul(result, result);
  return result;
}

// Opitz: the divided differences of g at x_0..x_k form the first row of
// g(J), J bidiagonal with the nodes on the diagonal and ones above it.
Complex fourier_atom_dd_general(const FourierAtom& atom, std::span<const double> nodes) {
  const int n = static_cast<int>(nodes.size());
  double centre = 0.0;
  for (double x : nodes) centre += x;
  centre /= n;
  std::vector<Complex> a(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) {
    a[i * n + i] = kI * atom.xi * (nodes[i] - centre);
    if (i + 1 < n) a[i * n + i + 1] = kI * atom.xi;
  }
  const auto e = triangular_expm(std::move(a), n);
  return atom.c * std::exp(kI * atom.xi * centre) * e[n - 1];
}

DiffOracle oracle_for(const FunctionSpec& f) {
  DiffOracle o;
  o.f = [&f](double x) { return evaluate(f, x); };
  o.d1 = [&f](double x) { return evaluate_derivative(f, x, 1); };
  o.d2 = [&f](double x) { return evaluate_derivative(f, x, 2); };
  if (const auto* fs = std::get_if<FourierSum>(&f.variant())) {
    o.dd1_far = [fs](double a, double b) {
      Complex acc{0.0, 0.0};
      for (const auto& at : fs->atoms)
        acc += at.c * std::exp(kI * (0.5 * (a + b) * at.xi)) * kI * at.xi *
               sinc(0.5 * at.xi * (a - b));
      return acc;
    };
  } else {
    o.dd1_far = [&f](double a, double b) { return (evaluate(f, a) - evaluate(f, b)) / (a - b); };
  }
  return o;
}

void check_nodes(const FunctionSpec& f, std::span<const double> nodes) {
  for (double x : nodes) {
    if (!std::isfinite(x)) throw DomainError("non-finite node in divided difference");
    if (!f.in_domain(x))
      throw DomainError("node " + std::to_string(x) + " outside the domain of " +
                        (f.label().empty() ? std::string("function") : f.label()));
  }
}

}  // namespace

// -- FunctionSpec -------------------------------------------------------------

FunctionSpec::FunctionSpec(Polynomial p, std::string label)
    : v_(std::move(p)), label_(std::move(label)) {
  auto& c = std::get<Polynomial>(v_).coeffs;
  if (c.empty()) c.push_back(Complex{0.0, 0.0});
}

FunctionSpec::FunctionSpec(FourierSum s, std::string label)
    : v_(std::move(s)), label_(std::move(label)) {
  for (const auto& a : std::get<FourierSum>(v_).atoms)
    if (!std::isfinite(a.xi) || !std::isfinite(std::abs(a.c)))
      throw InvalidArgument("Fourier atom must be finite");
}

FunctionSpec::FunctionSpec(SampledC2 s, std::string label)
    : v_(std::move(s)), label_(std::move(label)) {
  const auto& fs = std::get<SampledC2>(v_);
  if (!fs.f || !fs.d1) throw InvalidArgument("sampled function needs f and f'");
  if (fs.domain && !(fs.domain->lo < fs.domain->hi))
    throw InvalidArgument("sampled function domain must be a nonempty open interval");
}

int FunctionSpec::max_order() const {
  if (const auto* s = std::get_if<SampledC2>(&v_)) return s->d2 ? 2 : 1;
  return INT_MAX;
}

std::optional<OpenInterval> FunctionSpec::domain() const {
  if (const auto* s = std::get_if<SampledC2>(&v_)) return s->domain;
  return std::nullopt;
}

bool FunctionSpec::in_domain(double x) const {
  const auto d = domain();
  return !d || d->contains(x);
}

// -- Construction helpers -----------------------------------------------------

int degree(const Polynomial& p) {
  for (int i = static_cast<int>(p.coeffs.size()) - 1; i >= 0; --i)
    if (p.coeffs[i] != Complex{0.0, 0.0}) return i;
  return -1;
}

FunctionSpec polynomial(std::vector<Complex> coeffs) { return FunctionSpec(Polynomial{std::move(coeffs)}); }

FunctionSpec monomial(int deg) {
  std::vector<Complex> c(static_cast<std::size_t>(deg) + 1);
  c.back() = 1.0;
  return FunctionSpec(Polynomial{std::move(c)}, "x^" + std::to_string(deg));
}

FunctionSpec fourier(std::vector<FourierAtom> atoms) { return FunctionSpec(FourierSum{std::move(atoms)}); }

FunctionSpec log_shift(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("log_shift requires eps > 0");
  SampledC2 s;
  s.f = [eps](double x) { return Complex{std::log(x + eps), 0.0}; };
  s.d1 = [eps](double x) { return Complex{1.0 / (x + eps), 0.0}; };
  s.d2 = [eps](double x) { return Complex{-1.0 / ((x + eps) * (x + eps)), 0.0}; };
  s.domain = OpenInterval{-eps, std::numeric_limits<double>::infinity()};
  return FunctionSpec(std::move(s), "log_shift");
}

FunctionSpec exp_fn(double rate) {
  SampledC2 s;
  s.f = [rate](double x) { return Complex{std::exp(rate * x), 0.0}; };
  s.d1 = [rate](double x) { return Complex{rate * std::exp(rate * x), 0.0}; };
  s.d2 = [rate](double x) { return Complex{rate * rate * std::exp(rate * x), 0.0}; };
  return FunctionSpec(std::move(s), "exp");
}

FunctionSpec power_fn(double p) {
  if (p >= 0.0 && p <= 64.0 && p == std::floor(p)) return monomial(static_cast<int>(p));
  SampledC2 s;
  s.f = [p](double x) { return Complex{std::pow(x, p), 0.0}; };
  s.d1 = [p](double x) { return Complex{p * std::pow(x, p - 1.0), 0.0}; };
  s.d2 = [p](double x) { return Complex{p * (p - 1.0) * std::pow(x, p - 2.0), 0.0}; };
  s.domain = OpenInterval{0.0, std::numeric_limits<double>::infinity()};
  return FunctionSpec(std::move(s), "power");
}

FunctionSpec derivative(const FunctionSpec& f) {
  const std::string label = f.label().empty() ? std::string{} : f.label() + "'";
  if (const auto* p = std::get_if<Polynomial>(&f.variant()))
    return FunctionSpec(Polynomial{poly_derivative(p->coeffs)}, label);
  if (const auto* fs = std::get_if<FourierSum>(&f.variant())) {
    FourierSum d;
    for (const auto& a : fs->atoms) d.atoms.push_back({a.c * kI * a.xi, a.xi});
    return FunctionSpec(std::move(d), label);
  }
  const auto& s = std::get<SampledC2>(f.variant());
  if (!s.d2) throw UnsupportedOrder("derivative of a once-differentiable sampled function");
  return FunctionSpec(SampledC2{s.d1, s.d2, {}, s.domain}, label);
}

FunctionSpec product(const FunctionSpec& f, const FunctionSpec& g) {
  const auto* pf = std::get_if<Polynomial>(&f.variant());
  const auto* pg = std::get_if<Polynomial>(&g.variant());
  if (pf && pg) {
    std::vector<Complex> c(pf->coeffs.size() + pg->coeffs.size() - 1);
    for (std::size_t i = 0; i < pf->coeffs.size(); ++i)
      for (std::size_t j = 0; j < pg->coeffs.size(); ++j) c[i + j] += pf->coeffs[i] * pg->coeffs[j];
    return polynomial(std::move(c));
  }
  const auto* ff = std::get_if<FourierSum>(&f.variant());
  const auto* fg = std::get_if<FourierSum>(&g.variant());
  if (ff && fg) {
    FourierSum s;
    for (const auto& a : ff->atoms)
      for (const auto& b : fg->atoms) s.atoms.push_back({a.c * b.c, a.xi + b.xi});
    return FunctionSpec(std::move(s));
  }
  throw InvalidArgument("product is defined for polynomial or Fourier pairs only");
}

// -- Evaluation -----------------------------------------------------------------

Complex evaluate(const FunctionSpec& f, double x) { return evaluate_derivative(f, x, 0); }

Complex evaluate_derivative(const FunctionSpec& f, double x, int order) {
  if (order < 0 || order > 2) throw UnsupportedOrder("derivative order must be 0, 1 or 2");
  if (!f.in_domain(x))
    throw DomainError("x = " + std::to_string(x) + " outside the domain of " +
                      (f.label().empty() ? std::string("function") : f.label()));
  if (const auto* p = std::get_if<Polynomial>(&f.variant())) {
    std::vector<Complex> c = p->coeffs;
    for (int k = 0; k < order; ++k) c = poly_derivative(c);
    return horner(c, x);
  }
  if (const auto* fs = std::get_if<FourierSum>(&f.variant())) {
    Complex acc{0.0, 0.0};
    for (const auto& a : fs->atoms) acc += a.c * std::pow(kI * a.xi, order) * std::exp(kI * (a.xi * x));
    return acc;
  }
  const auto& s = std::get<SampledC2>(f.variant());
  switch (order) {
    case 0:
      return s.f(x);
    case 1:
      return s.d1(x);
    default:
      if (!s.d2) throw UnsupportedOrder("second derivative unavailable");
      return s.d2(x);
  }
}

Complex divided_difference(const FunctionSpec& f, std::initializer_list<double> nodes) {
  return divided_difference(f, std::span<const double>(nodes.begin(), nodes.size()));
}

Complex divided_difference(const FunctionSpec& f, std::span<const double> nodes) {
  if (nodes.empty()) throw InvalidArgument("divided difference needs at least one node");
  const int k = static_cast<int>(nodes.size()) - 1;
  check_nodes(f, nodes);
  if (k > f.max_order())
    throw UnsupportedOrder("divided difference of order " + std::to_string(k) +
                           " exceeds the available derivatives");
  if (const auto* p = std::get_if<Polynomial>(&f.variant())) return poly_divided_difference(*p, nodes);
  if (k == 0) return evaluate(f, nodes[0]);

  const auto oracle = oracle_for(f);
  const double scale = node_scale(nodes);
  if (k == 1) return hybrid_dd1(oracle, nodes[0], nodes[1], scale);
  if (k == 2) return hybrid_dd2(oracle, {nodes[0], nodes[1], nodes[2]}, scale);

  const auto& fs = std::get<FourierSum>(f.variant());
  Complex acc{0.0, 0.0};
  for (const auto& a : fs.atoms) acc += fourier_atom_dd_general(a, nodes);
  return acc;
}

Complex divided_difference_poly_closed_form(std::span<const Complex> coeffs, int k,
                                            std::span<const double> nodes) {
  if (k < 0 || nodes.size() != static_cast<std::size_t>(k) + 1)
    throw InvalidArgument("closed form needs k+1 nodes");
  const std::size_t vars = nodes.size();
  Complex total{0.0, 0.0};
  std::vector<int> delta(vars);
  for (std::size_t i = static_cast<std::size_t>(k); i < coeffs.size(); ++i) {
    const int order = static_cast<int>(i) - k;
    // Enumerate every delta in N_0^vars with |delta| = order.
    std::function<double(std::size_t, int)> sum_over = [&](std::size_t var, int remaining) -> double {
      if (var + 1 == vars) {
        delta[var] = remaining;
        double term = 1.0;
        for (std::size_t v = 0; v < vars; ++v) term *= std::pow(nodes[v], delta[v]);
        return term;
      }
      double acc = 0.0;
      for (int d = 0; d <= remaining; ++d) {
        delta[var] = d;
        acc += sum_over(var + 1, remaining - d);
      }
      return acc;
    };
    total += coeffs[i] * sum_over(0, order);
  }
  return total;
}

}  // namespace freeito
