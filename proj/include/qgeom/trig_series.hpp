#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <compare>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>

#include "qgeom/error.hpp"

namespace qgeom {

using Rational = boost::multiprecision::cpp_rational;

/// I^{i2/2} eps^{eps} kappa^{k4/4} 2^{t4/4} 3^{h2/2}. The 2 and 3 exponents are kept in
/// [0,4) and [0,2); integer parts live in the numeric coefficient.
struct Monomial {
  int i2 = 0;
  int eps = 0;
  int k4 = 0;
  int t4 = 0;
  int h2 = 0;

  auto operator<=>(const Monomial&) const = default;

  [[nodiscard]] Monomial times(const Monomial& o) const {
    return {i2 + o.i2, eps + o.eps, k4 + o.k4, t4 + o.t4, h2 + o.h2};
  }
  // Same I, coupling and kappa powers; the surds may differ.
  [[nodiscard]] bool same_scaling(const Monomial& o) const {
    return i2 == o.i2 && eps == o.eps && k4 == o.k4;
  }
  [[nodiscard]] double surd() const { return std::pow(2.0, t4 / 4.0) * std::pow(3.0, h2 / 2.0); }
  [[nodiscard]] double eval(double I, double coupling, double kappa) const {
    return surd() * std::pow(I, i2 / 2.0) * std::pow(coupling, eps) * std::pow(kappa, k4 / 4.0);
  }
};

namespace detail {

inline int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

template <class C>
C int_power(int base, int p) {
  C r = 1;
  C b = base;
  if (p < 0) {
    b = C(1) / b;
    p = -p;
  }
  for (int i = 0; i < p; ++i) r *= b;
  return r;
}

// Pulls integer powers of 2 and 3 out of the surd exponents into the coefficient.
template <class C>
void normalize(Monomial& m, C& c) {
  const int p2 = floor_div(m.t4, 4);
  const int p3 = floor_div(m.h2, 2);
  if (p2 != 0) {
    c *= int_power<C>(2, p2);
    m.t4 -= 4 * p2;
  }
  if (p3 != 0) {
    c *= int_power<C>(3, p3);
    m.h2 -= 2 * p3;
  }
}

template <class C>
double to_double(const C& c) {
  if constexpr (std::is_same_v<C, double>) return c;
  else return c.template convert_to<double>();
}

}  // namespace detail

enum class Phase { cos_, sin_ };

/// Finite sum of coefficient * Monomial * {cos,sin}(m phi0), m >= 0.
template <class C = Rational>
class TrigSeries {
 public:
  struct Key {
    int m;
    Phase phase;
    Monomial mono;
    auto operator<=>(const Key&) const = default;
  };
  using Terms = std::map<Key, C>;

  TrigSeries() = default;

  static TrigSeries constant(const C& c, Monomial mono = {}) {
    TrigSeries s;
    s.add(0, Phase::cos_, mono, c);
    return s;
  }
  static TrigSeries harmonic(int m, Phase ph, const C& c, Monomial mono = {}) {
    TrigSeries s;
    s.add(m, ph, mono, c);
    return s;
  }

  /// Adds c * mono * phase(m phi0), folding negative m and dropping zeros.
  void add(int m, Phase ph, Monomial mono, C c) {
    if (m < 0) {
      m = -m;
      if (ph == Phase::sin_) c = -c;
    }
    if (m == 0 && ph == Phase::sin_) return;
    detail::normalize(mono, c);
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(Key{m, ph, mono}, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  [[nodiscard]] const Terms& terms() const { return terms_; }
  [[nodiscard]] bool empty() const { return terms_.empty(); }
  [[nodiscard]] std::size_t size() const { return terms_.size(); }

  TrigSeries& operator+=(const TrigSeries& o) {
    for (const auto& [k, c] : o.terms_) add(k.m, k.phase, k.mono, c);
    return *this;
  }
  TrigSeries& operator-=(const TrigSeries& o) {
    for (const auto& [k, c] : o.terms_) add(k.m, k.phase, k.mono, -c);
    return *this;
  }
  friend TrigSeries operator+(TrigSeries a, const TrigSeries& b) { return a += b; }
  friend TrigSeries operator-(TrigSeries a, const TrigSeries& b) { return a -= b; }

  [[nodiscard]] TrigSeries scaled(const C& f, Monomial mono = {}) const {
    TrigSeries out;
    for (const auto& [k, c] : terms_) out.add(k.m, k.phase, k.mono.times(mono), c * f);
    return out;
  }

  /// Product, dropping every term whose coupling power exceeds `cut`.
  [[nodiscard]] TrigSeries times(const TrigSeries& o, int cut = std::numeric_limits<int>::max()) const {
    TrigSeries out;
    for (const auto& [a, ca] : terms_) {
      for (const auto& [b, cb] : o.terms_) {
        if (a.mono.eps + b.mono.eps > cut) continue;
        const Monomial mono = a.mono.times(b.mono);
        const C half = ca * cb / 2;
        const int s = a.m + b.m;
        const int d = a.m - b.m;
        if (a.phase == Phase::cos_ && b.phase == Phase::cos_) {
          out.add(d, Phase::cos_, mono, half);
          out.add(s, Phase::cos_, mono, half);
        } else if (a.phase == Phase::sin_ && b.phase == Phase::sin_) {
          out.add(d, Phase::cos_, mono, half);
          out.add(s, Phase::cos_, mono, -half);
        } else if (a.phase == Phase::sin_) {  // sin a cos b
          out.add(s, Phase::sin_, mono, half);
          out.add(d, Phase::sin_, mono, half);
        } else {  // cos a sin b
          out.add(s, Phase::sin_, mono, half);
          out.add(d, Phase::sin_, mono, -half);
        }
      }
    }
    return out;
  }

  [[nodiscard]] TrigSeries truncated(int cut) const {
    TrigSeries out;
    for (const auto& [k, c] : terms_)
      if (k.mono.eps <= cut) out.terms_.emplace(k, c);
    return out;
  }

  /// Angle average over phi0: the m = 0 part.
  [[nodiscard]] TrigSeries average() const {
    TrigSeries out;
    for (const auto& [k, c] : terms_)
      if (k.m == 0) out.terms_.emplace(k, c);
    return out;
  }

  /// <this * {cos,sin}(m phi0)> without forming the product.
  [[nodiscard]] TrigSeries average_with(int m, Phase ph) const {
    TrigSeries out;
    for (const auto& [k, c] : terms_) {
      if (k.m != m || k.phase != ph) continue;
      out.add(0, Phase::cos_, k.mono, m == 0 ? c : c / 2);
    }
    return out;
  }

  [[nodiscard]] TrigSeries d_phi() const {
    TrigSeries out;
    for (const auto& [k, c] : terms_) {
      if (k.m == 0) continue;
      if (k.phase == Phase::cos_) out.add(k.m, Phase::sin_, k.mono, -c * k.m);
      else out.add(k.m, Phase::cos_, k.mono, c * k.m);
    }
    return out;
  }

  /// Zero-mean antiderivative in phi0; a secular part is a consistency failure.
  [[nodiscard]] TrigSeries integrate_phi() const {
    TrigSeries out;
    for (const auto& [k, c] : terms_) {
      if (k.m == 0) throw ConsistencyError("non-zero mean left in an angle integrand");
      if (k.phase == Phase::cos_) out.add(k.m, Phase::sin_, k.mono, c / k.m);
      else out.add(k.m, Phase::cos_, k.mono, -c / k.m);
    }
    return out;
  }

  [[nodiscard]] TrigSeries d_action() const {
    TrigSeries out;
    for (const auto& [k, c] : terms_) {
      if (k.mono.i2 == 0) continue;
      Monomial mono = k.mono;
      mono.i2 -= 2;
      out.add(k.m, k.phase, mono, c * k.mono.i2 / 2);
    }
    return out;
  }

  [[nodiscard]] int max_harmonic() const {
    int h = 0;
    for (const auto& [k, c] : terms_) h = std::max(h, k.m);
    return h;
  }
  [[nodiscard]] int min_order() const {
    int e = std::numeric_limits<int>::max();
    for (const auto& [k, c] : terms_) e = std::min(e, k.mono.eps);
    return e;
  }
  [[nodiscard]] int max_order() const {
    int e = std::numeric_limits<int>::min();
    for (const auto& [k, c] : terms_) e = std::max(e, k.mono.eps);
    return e;
  }

  [[nodiscard]] TrigSeries order(int eps) const {
    TrigSeries out;
    for (const auto& [k, c] : terms_)
      if (k.mono.eps == eps) out.terms_.emplace(k, c);
    return out;
  }

  [[nodiscard]] double eval(double phi0, double I, double coupling, double kappa) const {
    double s = 0.0;
    for (const auto& [k, c] : terms_) {
      const double t = k.phase == Phase::cos_ ? std::cos(k.m * phi0) : std::sin(k.m * phi0);
      s += detail::to_double(c) * k.mono.eval(I, coupling, kappa) * t;
    }
    return s;
  }

  /// Sum of coefficient * surd over terms (all harmonics) with the given scaling.
  [[nodiscard]] double coefficient_of(int m, Phase ph, int i2, int eps, int k4) const {
    double s = 0.0;
    for (const auto& [k, c] : terms_)
      if (k.m == m && k.phase == ph && k.mono.i2 == i2 && k.mono.eps == eps && k.mono.k4 == k4)
        s += detail::to_double(c) * k.mono.surd();
    return s;
  }

  /// One term per line: coefficient, m, phase, then exponents of I, coupling, kappa, 2, 3
  /// (I, kappa and 2 exponents as fractions).
  void dump(std::ostream& os) const {
    for (const auto& [k, c] : terms_) {
      os << c << ' ' << k.m << ' ' << (k.phase == Phase::cos_ ? "cos" : "sin") << ' ' << k.mono.i2 << "/2 "
         << k.mono.eps << ' ' << k.mono.k4 << "/4 " << k.mono.t4 << "/4 " << k.mono.h2 << "/2\n";
    }
  }
  [[nodiscard]] std::string str() const {
    std::ostringstream os;
    dump(os);
    return os.str();
  }

  friend bool operator==(const TrigSeries& a, const TrigSeries& b) { return a.terms_ == b.terms_; }

 private:
  Terms terms_;
};

}  // namespace qgeom
