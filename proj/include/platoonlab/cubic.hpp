#ifndef PLATOONLAB_CUBIC_HPP
#define PLATOONLAB_CUBIC_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

namespace platoon {

using Complex = std::complex<double>;

inline Complex cubic_eval(Complex a2, Complex a1, Complex a0, Complex x) {
  return ((x + a2) * x + a1) * x + a0;
}

/// All roots of x^3 + a2 x^2 + a1 x + a0 with complex coefficients.
///
/// Closed-form resolvent on the depressed cubic, branch chosen to avoid
/// cancellation, followed by a few Newton polish steps per root. Roots are
/// returned sorted by real part, ties by imaginary part.
inline std::array<Complex, 3> solve_cubic(Complex a2, Complex a1, Complex a0) {
  const Complex shift = a2 / 3.0;
  const Complex p = a1 - a2 * a2 / 3.0;
  const Complex q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;

  std::array<Complex, 3> roots;
  if (std::abs(p) == 0.0 && std::abs(q) == 0.0) {
    roots = {-shift, -shift, -shift};
  } else {
    const Complex s = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
    Complex u3 = -q / 2.0 + s;
    if (std::abs(-q / 2.0 - s) > std::abs(u3)) u3 = -q / 2.0 - s;
    const Complex u = std::exp(std::log(u3) / 3.0);
    const Complex v = -p / (3.0 * u);
    const Complex w(-0.5, std::sqrt(3.0) / 2.0);  // primitive cube root of unity
    Complex uk = u, vk = v;
    for (int k = 0; k < 3; ++k) {
      roots[k] = uk + vk - shift;
      uk *= w;
      vk *= std::conj(w);
    }
  }

  for (auto& r : roots) {
    for (int it = 0; it < 3; ++it) {
      const Complex f = cubic_eval(a2, a1, a0, r);
      const Complex df = (3.0 * r + 2.0 * a2) * r + a1;
      if (std::abs(df) < 1e-300) break;
      const Complex step = f / df;
      if (!(std::abs(step) > 0.0)) break;
      r -= step;
    }
  }

  std::sort(roots.begin(), roots.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return roots;
}

}  // namespace platoon

#endif
