#pragma once

// Exact order-dependent constants of the differentiator: observer gains, the
// a/b coefficients of the explicit error solution, the characteristic
// polynomial of the error equation, and the identities tying them together.
//
// Everything here is computed in arbitrary precision. No tolerances apply.

#include <cstdint>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hound/errors.hpp"

namespace hound {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Largest order parameter accepted anywhere in the library. Gains grow like
/// (2n-1)!, so beyond this the floating-point core loses all meaning.
inline constexpr int kMaxOrder = 32;

/// Default upper order of the exact identity suite.
inline constexpr int kDefaultIdentityOrder = 16;

namespace detail {

inline void check_order(int n) {
  if (n < 1 || n > kMaxOrder) {
    throw OrderOutOfRange("order " + std::to_string(n) + " outside [1, " +
                          std::to_string(kMaxOrder) + "]");
  }
}

inline void check_index(int i, int n, const char* what) {
  if (i < 1 || i > n) {
    throw OrderOutOfRange(std::string(what) + " " + std::to_string(i) + " outside [1, " +
                          std::to_string(n) + "]");
  }
}

}  // namespace detail

inline BigInt factorial(int k) {
  BigInt r = 1;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

inline BigInt binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  BigInt r = 1;
  for (int i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

/// Dense row-major matrix of exact integers, 0-based storage. Entry (m-1, d-1)
/// holds a_{m,d,n}.
struct IntMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<BigInt> data;

  IntMatrix() = default;
  IntMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c) {}

  BigInt& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  const BigInt& operator()(int r, int c) const {
    return data[static_cast<std::size_t>(r) * cols + c];
  }

  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;
};

/// Observer gain of channel m for order n: (n+m-1)! n / (m! (n-m)!).
/// The runtime gain divides this by t^m.
inline Rational gain(int n, int m) {
  detail::check_order(n);
  detail::check_index(m, n, "channel");
  Rational num = factorial(n + m - 1) * n;
  return num / Rational(factorial(m) * factorial(n - m));
}

/// a_{m,d,n} for m, d in 1..n from the recurrence
///   a_{m+1,d} = -(d+m-1) a_{m,d} + gain(n, m),  a_{1,d} = 1.
/// The gains are integers, so the whole table is integral.
inline IntMatrix a_coeff_table(int n) {
  detail::check_order(n);
  IntMatrix a(n, n);
  for (int d = 1; d <= n; ++d) a(0, d - 1) = 1;
  for (int m = 1; m < n; ++m) {
    const Rational g = gain(n, m);
    const BigInt drive = boost::multiprecision::numerator(g);  // denominator is 1
    for (int d = 1; d <= n; ++d) {
      a(m, d - 1) = -BigInt(d + m - 1) * a(m - 1, d - 1) + drive;
    }
  }
  return a;
}

/// b_{d,n} = (n-d)! (d-1)!
inline BigInt b_coeff(int d, int n) {
  detail::check_order(n);
  detail::check_index(d, n, "mode");
  return factorial(n - d) * factorial(d - 1);
}

/// All precomputed per-order constants. Immutable once built; share it through
/// `std::shared_ptr<const GainTable>`.
struct GainTable {
  int order = 0;
  std::vector<Rational> gains;  // gains[m-1], m = 1..n
  IntMatrix a;
  std::vector<BigInt> b;  // b[d-1], d = 1..n
  std::vector<double> gains_f64;

  static GainTable build(int n) {
    detail::check_order(n);
    GainTable t;
    t.order = n;
    t.a = a_coeff_table(n);
    for (int m = 1; m <= n; ++m) {
      t.gains.push_back(gain(n, m));
      t.gains_f64.push_back(t.gains.back().convert_to<double>());
      t.b.push_back(b_coeff(m, n));
    }
    return t;
  }

  double a_f64(int m, int d) const { return a(m - 1, d - 1).convert_to<double>(); }
  double b_f64(int d) const { return b[d - 1].convert_to<double>(); }
};

inline std::shared_ptr<const GainTable> make_gain_table(int n) {
  return std::make_shared<const GainTable>(GainTable::build(n));
}

/// FNV-1a over the decimal gains; written into stream metadata so that
/// downstream consumers can detect a change of order or gain definition.
inline std::uint64_t gain_checksum(const GainTable& table) {
  std::ostringstream text;
  text << table.order << ':';
  for (const auto& g : table.gains) text << g << ',';
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// --- characteristic polynomial -------------------------------------------------

/// Polynomial in lambda, coeffs[k] multiplies lambda^k.
struct CharPoly {
  int order = 0;
  std::vector<BigInt> coeffs;

  friend bool operator==(const CharPoly&, const CharPoly&) = default;
};

/// Signed Stirling numbers of the first kind, s[d][k] for 0 <= k <= d <= max_d:
/// lambda (lambda-1) ... (lambda-d+1) = sum_k s(d,k) lambda^k.
inline std::vector<std::vector<BigInt>> signed_stirling_first(int max_d) {
  std::vector<std::vector<BigInt>> s(max_d + 1, std::vector<BigInt>(max_d + 1));
  s[0][0] = 1;
  for (int d = 0; d < max_d; ++d) {
    for (int k = 1; k <= d + 1; ++k) {
      s[d + 1][k] = s[d][k - 1] - BigInt(d) * s[d][k];
    }
  }
  return s;
}

/// Unsigned Stirling number of the first kind [n k] (cycle count).
inline BigInt unsigned_stirling_first(int n, int k) {
  if (n < 0 || k < 0 || k > n) return 0;
  std::vector<BigInt> row(n + 1);
  row[0] = 1;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j >= 1; --j) row[j] = row[j - 1] + BigInt(i) * row[j];
    row[0] = 0;
  }
  return row[k];
}

/// Characteristic polynomial of the error Euler equation,
///   sum_d (n!/d!) C(n,d) lambda(lambda-1)...(lambda-d+1),
/// expanded through signed Stirling numbers.
inline CharPoly char_poly(int n) {
  detail::check_order(n);
  const auto s = signed_stirling_first(n);
  const BigInt nf = factorial(n);
  CharPoly p{n, std::vector<BigInt>(n + 1)};
  for (int d = 0; d <= n; ++d) {
    const BigInt w = nf / factorial(d) * binomial(n, d);
    for (int k = 0; k <= d; ++k) p.coeffs[k] += w * s[d][k];
  }
  return p;
}

/// Expansion of (lambda+1)(lambda+2)...(lambda+n).
inline CharPoly shifted_rising_product(int n) {
  detail::check_order(n);
  std::vector<BigInt> c{1};
  for (int k = 1; k <= n; ++k) {
    std::vector<BigInt> next(c.size() + 1);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i] * k;
      next[i + 1] += c[i];
    }
    c = std::move(next);
  }
  return {n, std::move(c)};
}

// --- linear algebra over the integers / rationals ------------------------------

/// Exact determinant by fraction-free (Bareiss) elimination.
inline BigInt determinant(IntMatrix m) {
  if (m.rows != m.cols) throw LengthMismatch(m.rows, m.cols);
  const int n = m.rows;
  if (n == 0) return 1;
  BigInt sign = 1;
  BigInt prev = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (m(k, k) == 0) {
      int swap = k + 1;
      while (swap < n && m(swap, k) == 0) ++swap;
      if (swap == n) return 0;
      for (int c = 0; c < n; ++c) std::swap(m(k, c), m(swap, c));
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j) {
        m(i, j) = (m(i, j) * m(k, k) - m(i, k) * m(k, j)) / prev;
      }
    }
    prev = m(k, k);
  }
  return sign * m(n - 1, n - 1);
}

/// prod_{k=0}^{n-1} k!
inline BigInt superfactorial(int n) {
  BigInt r = 1;
  for (int k = 0; k < n; ++k) r *= factorial(k);
  return r;
}

struct DetReport {
  BigInt det;
  BigInt expected;
  bool holds = false;
};

/// Checks det(A) = (-1)^floor(n/2) prod_{k<n} k!. The diagonal t-power matrix
/// only contributes t^{n(n-1)/2}, so it is left symbolic.
inline DetReport det_identity(int n) {
  DetReport r;
  r.det = determinant(a_coeff_table(n));
  r.expected = superfactorial(n);
  if ((n / 2) % 2 == 1) r.expected = -r.expected;
  r.holds = r.det == r.expected;
  return r;
}

inline bool verify_det_identity(int n) { return det_identity(n).holds; }

/// Solves A x = (0, ..., 0, -1) exactly. With C'_d = x_d t^{d+n-1} f^(n)(t) this
/// is the variation-of-constants system with every t-power factored out, so
/// x_d must equal (-1)^d / b_{d,n}.
inline std::vector<Rational> solve_variation_system(int n) {
  const IntMatrix a = a_coeff_table(n);
  std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n + 1));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) m[r][c] = Rational(a(r, c));
  }
  m[n - 1][n] = -1;

  for (int col = 0; col < n; ++col) {
    int pivot = col;
    while (pivot < n && m[pivot][col] == 0) ++pivot;
    if (pivot == n) throw SingularSystem("variation system is singular at order " + std::to_string(n));
    std::swap(m[col], m[pivot]);
    for (int r = 0; r < n; ++r) {
      if (r == col || m[r][col] == 0) continue;
      const Rational f = m[r][col] / m[col][col];
      for (int c = col; c <= n; ++c) m[r][c] -= f * m[col][c];
    }
  }
  std::vector<Rational> x(n);
  for (int r = 0; r < n; ++r) x[r] = m[r][n] / m[r][r];
  return x;
}

/// sum_{d=1}^{n} (-1)^d a_{m,d,n} / b_{d,n}; zero for m < n and -1 for m = n.
inline Rational alternating_sum(int n, int m) {
  detail::check_index(m, n, "channel");
  const IntMatrix a = a_coeff_table(n);
  Rational s = 0;
  for (int d = 1; d <= n; ++d) {
    Rational term(a(m - 1, d - 1), b_coeff(d, n));
    s += (d % 2 == 0) ? term : Rational(-term);
  }
  return s;
}

// --- identity suite ------------------------------------------------------------

struct IdentityResult {
  std::string identity;
  int order = 0;
  bool passed = false;
  std::string detail;
};

inline std::vector<IdentityResult> check_identities(int n) {
  std::vector<IdentityResult> out;
  const GainTable table = GainTable::build(n);

  {
    bool ok = true;
    for (const auto& g : table.gains) ok = ok && g > 0 && denominator(g) == 1;
    out.push_back({"gains-positive-integral", n, ok, ""});
  }
  {
    bool ok = true;
    for (int d = 0; d < n; ++d) ok = ok && table.a(0, d) == 1;
    for (const auto& v : table.a.data) ok = ok && v > 0;
    out.push_back({"a-positive-first-row-ones", n, ok, ""});
  }
  {
    // The inhomogeneous term of the a-recurrence is the channel-m gain.
    bool ok = true;
    for (int m = 1; m < n; ++m) {
      for (int d = 1; d <= n; ++d) {
        const BigInt drive = table.a(m, d - 1) + BigInt(d + m - 1) * table.a(m - 1, d - 1);
        ok = ok && Rational(drive) == table.gains[m - 1];
      }
    }
    out.push_back({"a-recurrence-drive-equals-gain", n, ok, ""});
  }
  {
    bool ok = true;
    for (int d = 1; d <= n; ++d) ok = ok && table.b[d - 1] == factorial(n - d) * factorial(d - 1);
    out.push_back({"b-factorial-form", n, ok, ""});
  }
  {
    const CharPoly p = char_poly(n);
    const CharPoly q = shifted_rising_product(n);
    std::ostringstream detail;
    for (int k = n; k >= 0; --k) detail << p.coeffs[k] << (k ? " " : "");
    out.push_back({"charpoly-equals-rising-product", n, p == q, detail.str()});
    bool stirling = true;
    for (int k = 0; k <= n; ++k) stirling = stirling && p.coeffs[k] == unsigned_stirling_first(n + 1, k + 1);
    out.push_back({"charpoly-equals-stirling-row", n, stirling, ""});
  }
  {
    bool ok = true;
    for (int m = 1; m <= n; ++m) ok = ok && alternating_sum(n, m) == (m < n ? 0 : -1);
    out.push_back({"alternating-sum", n, ok, ""});
  }
  {
    const DetReport r = det_identity(n);
    std::ostringstream detail;
    detail << "det=" << r.det << " expected=" << r.expected;
    out.push_back({"determinant-superfactorial", n, r.holds, detail.str()});
  }
  {
    bool ok = true;
    try {
      const auto x = solve_variation_system(n);
      for (int d = 1; d <= n; ++d) {
        const Rational expect((d % 2 == 0) ? BigInt(1) : BigInt(-1), table.b[d - 1]);
        ok = ok && x[d - 1] == expect;
      }
    } catch (const SingularSystem&) {
      ok = false;
    }
    out.push_back({"variation-system-matches-b", n, ok, ""});
  }
  return out;
}

inline std::vector<IdentityResult> run_identity_suite(int max_order) {
  detail::check_order(max_order);
  std::vector<IdentityResult> all;
  for (int n = 1; n <= max_order; ++n) {
    auto part = check_identities(n);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

}  // namespace hound
