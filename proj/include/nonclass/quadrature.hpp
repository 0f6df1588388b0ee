#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "nonclass/char_fn.hpp"
#include "nonclass/errors.hpp"

namespace nonclass {

struct QuadratureOptions {
    double abs_tol = 1e-11;
    // Hard cutoff radius on top of the CharFn's own trust radius.
    double max_radius = std::numeric_limits<double>::infinity();
    // Extra angular bandwidth on top of the CharFn's own hint.
    double oscillation_hint = 0.0;
    int min_angular = 256;
    int max_angular = 8192;
    int max_radial_intervals = 1 << 14;
};

struct QuadratureResult {
    double value = 0.0;
    double residual = std::numeric_limits<double>::infinity();
    bool converged = false;
};

namespace detail {

inline int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

} // namespace detail

// Gaussian-smoothed phase-space value read off a characteristic function:
//
//   I = (1/pi^2) Int d^2b  phi(b) exp(-width |b|^2) exp(b* c - b c*),
//
// which is the s-parameterized distribution at point c for width = (1-s)/2,
// and a compensated-witness mean for width = a2_eff. Polar coordinates:
// periodic trapezoid in the angle (spectrally accurate), Romberg refinement
// in the radius, cutoff where the Gaussian damping has killed the integrand.
inline QuadratureResult smoothed_value(const CharFn& phi, Complex c, double width,
                                       QuadratureOptions opts = {}) {
    if (!(width > 0.0)) throw validation_error("smoothed_value: width must be > 0");
    constexpr double pi = std::numbers::pi;

    // Ring magnitude including the radial Jacobian, probed at 16 angles.
    auto ring_mag = [&](double r) {
        double m = 0.0;
        for (int j = 0; j < 16; ++j) {
            const double th = 2.0 * pi * j / 16.0;
            m = std::max(m, std::abs(phi(Complex(r * std::cos(th), r * std::sin(th)))));
        }
        return m * r * std::exp(-width * r * r);
    };

    const double radius_cap = std::min(opts.max_radius, phi.max_radius) * (1.0 - 1e-12);
    double radius = std::sqrt(std::max(34.5 / width, 4.0)); // e^-34.5 ~ 1e-15
    radius = std::min(radius, radius_cap);
    while (radius * 1.2 <= radius_cap && ring_mag(radius) > 1e-15)
        radius *= 1.2;
    const double tail_estimate = ring_mag(radius) / (radius * pi * width);

    const double band = std::abs(c) + opts.oscillation_hint + phi.oscillation_hint;
    const int n_angular = std::min(
        opts.max_angular,
        detail::next_pow2(std::max(opts.min_angular,
                                   static_cast<int>(std::ceil(5.0 * radius * band)) + 64)));

    std::vector<double> cos_t(n_angular), sin_t(n_angular);
    for (int j = 0; j < n_angular; ++j) {
        const double th = 2.0 * pi * j / n_angular;
        cos_t[j] = std::cos(th);
        sin_t[j] = std::sin(th);
    }

    // F(r) = r exp(-w r^2) * (2pi/N) sum_j phi(r e^{i th_j}) e^{i 2 r (Im c cos - Re c sin)}
    std::vector<Complex> ring_values(n_angular);
    auto ring = [&](double r) -> Complex {
        if (r == 0.0) return {0.0, 0.0};
        if (phi.eval_ring) {
            phi.eval_ring(r, cos_t, sin_t, ring_values);
        } else {
            for (int j = 0; j < n_angular; ++j)
                ring_values[j] = phi.eval(Complex(r * cos_t[j], r * sin_t[j]));
        }
        Complex acc{0.0, 0.0};
        for (int j = 0; j < n_angular; ++j) {
            const double phase = 2.0 * r * (c.imag() * cos_t[j] - c.real() * sin_t[j]);
            acc += ring_values[j] * Complex(std::cos(phase), std::sin(phase));
        }
        return acc * (r * std::exp(-width * r * r) * 2.0 * pi / static_cast<double>(n_angular));
    };

    // Romberg over [0, radius] with node reuse across doublings.
    int n_intervals = 64;
    std::vector<Complex> f_nodes(n_intervals + 1);
    for (int i = 0; i <= n_intervals; ++i)
        f_nodes[i] = ring(radius * i / n_intervals);

    auto trapezoid = [&]() {
        Complex s = 0.5 * (f_nodes.front() + f_nodes.back());
        for (std::size_t i = 1; i + 1 < f_nodes.size(); ++i) s += f_nodes[i];
        return s * (radius / static_cast<double>(f_nodes.size() - 1));
    };

    std::vector<Complex> romberg_prev{trapezoid()};
    double delta = std::numeric_limits<double>::infinity();
    Complex integral = romberg_prev[0];

    while (n_intervals < opts.max_radial_intervals) {
        n_intervals *= 2;
        std::vector<Complex> refined(n_intervals + 1);
        for (int i = 0; i <= n_intervals; ++i)
            refined[i] = (i % 2 == 0) ? f_nodes[i / 2] : ring(radius * i / n_intervals);
        f_nodes.swap(refined);

        std::vector<Complex> row{trapezoid()};
        double factor = 4.0;
        for (const Complex& prev : romberg_prev) {
            row.push_back((factor * row.back() - prev) / (factor - 1.0));
            factor *= 4.0;
        }
        delta = std::abs(row.back() - romberg_prev.back());
        integral = row.back();
        romberg_prev.swap(row);
        if (delta < 0.25 * opts.abs_tol) break;
    }

    QuadratureResult out;
    out.value = integral.real() / (pi * pi);
    out.residual = (delta + std::abs(integral.imag())) / (pi * pi) + tail_estimate;
    out.converged = out.residual < opts.abs_tol * 10.0 + 1e-13;
    return out;
}

} // namespace nonclass
