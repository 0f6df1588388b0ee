#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "nonclass/channel.hpp"
#include "nonclass/errors.hpp"
#include "nonclass/grid.hpp"
#include "nonclass/quadrature.hpp"
#include "nonclass/states.hpp"

namespace nonclass {

// Gaussian witness (1/(pi a2)) exp(-|a - center|^2 / a2). Its state mean is
// the s-parameterized distribution at the center with s = 1 - 2 a2.
struct GaussianWitness {
    double a2;
    Complex center;

    GaussianWitness(double a2_, Complex center_) : a2(a2_), center(center_) {
        if (!(a2 > 0.0)) throw validation_error("GaussianWitness: a2 must be > 0");
    }
};

// Anti-diffused witness for channel outputs: scale * normalized Gaussian of
// width a2_eff centered at center. Exists only while a2_eff > 0.
struct CompensatedGaussianWitness {
    double scale;
    double a2_eff;
    Complex center;
};

inline double gaussian_witness_value(const GaussianWitness& w, Complex alpha) {
    return std::exp(-std::norm(alpha - w.center) / w.a2) / (std::numbers::pi * w.a2);
}

inline double gaussian_witness_mean(const StateSpec& spec, const GaussianWitness& w) {
    return s_distribution(spec, w.center, 1.0 - 2.0 * w.a2);
}

// Witness whose channel-output mean reproduces the clean-state mean of w:
// undoing the channel's Gaussian smoothing on the characteristic-function
// side shrinks the width to a2_eff = eta a2 - nbar (1 - eta) and rescales
// by eta. Fails when the requested noise exceeds the witness's own thermal
// threshold nbar < eta a2 / (1 - eta).
inline CompensatedGaussianWitness compensate_gaussian(const GaussianWitness& w,
                                                      ChannelParams ch) {
    const double a2_eff = ch.eta * w.a2 - ch.nbar * (1.0 - ch.eta);
    if (!(a2_eff > 0.0))
        throw numerics_error("compensate_gaussian: no positive-definite compensated "
                             "witness, nbar " + std::to_string(ch.nbar) +
                             " >= eta a2/(1-eta) = " +
                             std::to_string(ch.eta * w.a2 / (1.0 - ch.eta)));
    return {ch.eta, a2_eff, w.center * std::sqrt(ch.eta)};
}

inline double compensated_witness_value(const CompensatedGaussianWitness& cw,
                                        Complex alpha) {
    return cw.scale * std::exp(-std::norm(alpha - cw.center) / cw.a2_eff) /
           (std::numbers::pi * cw.a2_eff);
}

namespace detail {

inline double smoothed_mean_or_throw(const CharFn& phi, Complex at, double width,
                                     double scale) {
    const QuadratureResult q = smoothed_value(phi, at, width);
    if (!q.converged)
        throw numerics_error("witness mean quadrature did not converge (residual " +
                             std::to_string(q.residual) + ")");
    return scale * q.value;
}

} // namespace detail

// Mean of the compensated witness over the channel output, computed through
// the output characteristic function (never by pointwise P-integration near
// the singular ordering). Equals gaussian_witness_mean of the clean input.
inline double compensated_witness_mean(const StateSpec& spec, ChannelParams ch,
                                       const CompensatedGaussianWitness& cw) {
    const CharFn phi_out = apply_channel_charfn(char_fn(spec), ch);
    return detail::smoothed_mean_or_throw(phi_out, cw.center, cw.a2_eff, cw.scale);
}

// Same mean for an already-noisy density matrix. Truncation limits the
// trustworthy |beta| range, so narrow witnesses on barely-damped states can
// fail to converge; the error reports the residual.
inline double compensated_witness_mean(const DensityMatrix& noisy,
                                       const CompensatedGaussianWitness& cw) {
    return detail::smoothed_mean_or_throw(char_fn(noisy), cw.center, cw.a2_eff,
                                          cw.scale);
}

// Mean of the *uncompensated* witness against the noisy state:
// (1/eta) P_in(center/sqrt(eta), s') with s' = 1 - 2(nbar(1-eta) + a2)/eta.
// Documents how fast plain Gaussian testing degrades under noise.
inline double uncompensated_noisy_mean(const StateSpec& spec, ChannelParams ch,
                                       const GaussianWitness& w) {
    if (!(ch.eta > 0.0))
        throw validation_error("uncompensated_noisy_mean: eta must be > 0");
    const double s_prime = 1.0 - 2.0 * (ch.nbar * (1.0 - ch.eta) + w.a2) / ch.eta;
    return s_distribution(spec, w.center / std::sqrt(ch.eta), s_prime) / ch.eta;
}

// Witness of the discrete Bochner test: a sum of delta functions in the
// Fourier domain, i.e. the squared modulus of a trigonometric sum here.
struct DiscreteWitness {
    std::vector<Complex> points;
    std::vector<Complex> coeffs;
};

namespace detail {

inline void check_discrete_witness(const DiscreteWitness& dw) {
    if (dw.points.empty() || dw.points.size() != dw.coeffs.size())
        throw validation_error("DiscreteWitness: points and coeffs must be nonempty "
                               "and of equal length");
    for (std::size_t k = 0; k < dw.points.size(); ++k)
        for (std::size_t l = k + 1; l < dw.points.size(); ++l)
            if (std::abs(dw.points[k] - dw.points[l]) <= 1e-12)
                throw validation_error("DiscreteWitness: points must be pairwise distinct");
    const bool any = std::any_of(dw.coeffs.begin(), dw.coeffs.end(),
                                 [](Complex c) { return std::abs(c) > 0.0; });
    if (!any) throw validation_error("DiscreteWitness: all coefficients are zero");
}

inline double max_pair_separation(const DiscreteWitness& dw) {
    double m = 0.0;
    for (std::size_t k = 0; k < dw.points.size(); ++k)
        for (std::size_t l = k + 1; l < dw.points.size(); ++l)
            m = std::max(m, std::abs(dw.points[k] - dw.points[l]));
    return m;
}

inline double min_pair_separation(const DiscreteWitness& dw) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < dw.points.size(); ++k)
        for (std::size_t l = k + 1; l < dw.points.size(); ++l)
            m = std::min(m, std::abs(dw.points[k] - dw.points[l]));
    return m;
}

} // namespace detail

// |sum_k xi_k exp(a* a_k - a a_k*)|^2, evaluated in the factored form; the
// exponents are purely imaginary so this is a nonnegative trig polynomial.
inline double discrete_witness_value(const DiscreteWitness& dw, Complex alpha) {
    detail::check_discrete_witness(dw);
    Complex acc{0.0, 0.0};
    for (std::size_t k = 0; k < dw.points.size(); ++k) {
        const double phase = 2.0 * (alpha.real() * dw.points[k].imag() -
                                    alpha.imag() * dw.points[k].real());
        acc += dw.coeffs[k] * Complex(std::cos(phase), std::sin(phase));
    }
    return std::norm(acc);
}

// Grid resolving every extremum of the evolved symbol: step an eighth of the
// fastest phase period, radius two full periods of the slowest one.
inline PhaseGrid default_discrete_witness_grid(const DiscreteWitness& dw,
                                               ChannelParams ch) {
    detail::check_discrete_witness(dw);
    if (!(ch.eta > 0.0))
        throw validation_error("default_discrete_witness_grid: eta must be > 0");
    const double root_eta = std::sqrt(ch.eta);
    const double pi = std::numbers::pi;
    const double step = pi * root_eta / (8.0 * detail::max_pair_separation(dw));
    const double radius = 2.0 * pi * root_eta / detail::min_pair_separation(dw);
    return PhaseGrid(radius, step);
}

// Minimum of the anti-diffused discrete witness symbol
//
//   sum_{k,l} xi_k xi_l* e^{nbar (1-eta)/eta |a_k - a_l|^2}
//             exp[(a*(a_k - a_l) - a (a_k - a_l)*) / sqrt(eta)]
//
// over phase space: grid scan to locate the basin (the step must resolve
// the fastest cross-phase), then a damped-Newton polish with the analytic
// gradient and Hessian, since the cross terms' amplification makes the
// infimum an honest analogue quantity rather than a grid artifact.
inline double evolved_discrete_witness_min(const DiscreteWitness& dw, ChannelParams ch,
                                           const PhaseGrid& grid) {
    detail::check_discrete_witness(dw);
    if (dw.points.size() < 2)
        throw validation_error("evolved_discrete_witness_min: need >= 2 points");
    if (!(ch.eta > 0.0))
        throw validation_error("evolved_discrete_witness_min: eta must be > 0");
    const double root_eta = std::sqrt(ch.eta);
    const double max_sep = detail::max_pair_separation(dw);
    if (grid.step > std::numbers::pi * root_eta / (4.0 * max_sep))
        throw validation_error("evolved_discrete_witness_min: grid step " +
                               std::to_string(grid.step) +
                               " too coarse for the fastest phase (need <= " +
                               std::to_string(std::numbers::pi * root_eta /
                                              (4.0 * max_sep)) + ")");

    struct PairTerm {
        double amp_re, amp_im; // 2 K Re(xi_k xi_l*), 2 K Im(xi_k xi_l*)
        double gx, gy;         // gradient of the linear phase
    };
    const double gain = ch.nbar * (1.0 - ch.eta) / ch.eta;
    double diag = 0.0;
    for (const Complex& c : dw.coeffs) diag += std::norm(c);
    std::vector<PairTerm> terms;
    for (std::size_t k = 0; k < dw.points.size(); ++k) {
        for (std::size_t l = k + 1; l < dw.points.size(); ++l) {
            const Complex d = dw.points[k] - dw.points[l];
            const Complex c = dw.coeffs[k] * std::conj(dw.coeffs[l]);
            const double amp = 2.0 * std::exp(gain * std::norm(d));
            // phase(x, y) = 2 (x Im d - y Re d) / sqrt(eta)
            terms.push_back({amp * c.real(), amp * c.imag(),
                             2.0 * d.imag() / root_eta, -2.0 * d.real() / root_eta});
        }
    }

    auto value = [&](double x, double y) {
        double f = diag;
        for (const PairTerm& t : terms) {
            const double ph = t.gx * x + t.gy * y;
            f += t.amp_re * std::cos(ph) - t.amp_im * std::sin(ph);
        }
        return f;
    };

    double best = std::numeric_limits<double>::infinity();
    double bx = 0.0, by = 0.0;
    const int n = grid.points_per_axis();
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const double f = value(grid.axis_value(ix), grid.axis_value(iy));
            if (f < best) {
                best = f;
                bx = grid.axis_value(ix);
                by = grid.axis_value(iy);
            }
        }
    }

    // Damped Newton with Levenberg regularization; the symbol is a smooth
    // trig polynomial so a handful of steps reach machine precision.
    double x = bx, y = by;
    for (int iter = 0; iter < 80; ++iter) {
        double gx = 0.0, gy = 0.0, hxx = 0.0, hxy = 0.0, hyy = 0.0;
        for (const PairTerm& t : terms) {
            const double ph = t.gx * x + t.gy * y;
            const double d1 = -t.amp_re * std::sin(ph) - t.amp_im * std::cos(ph);
            const double d2 = -t.amp_re * std::cos(ph) + t.amp_im * std::sin(ph);
            gx += d1 * t.gx;
            gy += d1 * t.gy;
            hxx += d2 * t.gx * t.gx;
            hxy += d2 * t.gx * t.gy;
            hyy += d2 * t.gy * t.gy;
        }
        const double gnorm = std::hypot(gx, gy);
        if (gnorm < 1e-14 * (1.0 + std::abs(best))) break;
        double lambda = 1e-12 * (std::abs(hxx) + std::abs(hyy) + 1.0);
        double sx = 0.0, sy = 0.0;
        bool moved = false;
        for (int attempt = 0; attempt < 20; ++attempt) {
            const double det = (hxx + lambda) * (hyy + lambda) - hxy * hxy;
            if (det > 0.0 && hxx + lambda > 0.0) {
                sx = -((hyy + lambda) * gx - hxy * gy) / det;
                sy = -((hxx + lambda) * gy - hxy * gx) / det;
            } else {
                sx = -gx / (gnorm / grid.step + lambda);
                sy = -gy / (gnorm / grid.step + lambda);
            }
            const double f_new = value(x + sx, y + sy);
            if (f_new < best) {
                x += sx;
                y += sy;
                best = f_new;
                moved = true;
                break;
            }
            lambda = std::max(lambda * 10.0, 1e-8);
        }
        if (!moved) break;
    }
    return best;
}

} // namespace nonclass
