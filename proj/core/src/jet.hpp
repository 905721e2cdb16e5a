#pragma once

#include <cmath>

namespace tmcmc::detail {

// First-order forward-mode jet: value plus one directional derivative.
// Nesting Jet<Jet<double>> yields mixed second derivatives, and so on.
template <class T>
struct Jet {
  T v{};
  T d{};

  Jet() = default;
  Jet(double value) : v(value), d(0.0) {}  // NOLINT(google-explicit-constructor)
  Jet(T value, T deriv) : v(std::move(value)), d(std::move(deriv)) {}

  Jet& operator+=(const Jet& o) {
    v += o.v;
    d += o.d;
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    d -= o.d;
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    d = d * o.v + v * o.d;
    v *= o.v;
    return *this;
  }
};

template <class T>
Jet<T> operator+(Jet<T> a, const Jet<T>& b) { return a += b; }
template <class T>
Jet<T> operator-(Jet<T> a, const Jet<T>& b) { return a -= b; }
template <class T>
Jet<T> operator*(Jet<T> a, const Jet<T>& b) { return a *= b; }
template <class T>
Jet<T> operator-(const Jet<T>& a) { return {-a.v, -a.d}; }
template <class T>
Jet<T> operator/(const Jet<T>& a, const Jet<T>& b) {
  T q = a.v / b.v;
  return {q, (a.d - q * b.d) / b.v};
}
template <class T>
Jet<T> operator+(Jet<T> a, double b) { a.v += b; return a; }
template <class T>
Jet<T> operator+(double a, Jet<T> b) { b.v += a; return b; }
template <class T>
Jet<T> operator-(Jet<T> a, double b) { a.v -= b; return a; }
template <class T>
Jet<T> operator-(double a, const Jet<T>& b) { return {a - b.v, -b.d}; }
template <class T>
Jet<T> operator*(const Jet<T>& a, double b) { return {a.v * b, a.d * b}; }
template <class T>
Jet<T> operator*(double a, const Jet<T>& b) { return {b.v * a, b.d * a}; }
template <class T>
Jet<T> operator/(const Jet<T>& a, double b) { return {a.v / b, a.d / b}; }

template <class T>
Jet<T> sqrt(const Jet<T>& a) {
  using std::sqrt;
  T s = sqrt(a.v);
  return {s, a.d / (s * 2.0)};
}

inline double value_of(double a) { return a; }
template <class T>
double value_of(const Jet<T>& a) {
  return value_of(a.v);
}

}  // namespace tmcmc::detail
