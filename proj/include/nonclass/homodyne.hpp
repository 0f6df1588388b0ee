#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nonclass/channel.hpp"
#include "nonclass/errors.hpp"
#include "nonclass/states.hpp"
#include "nonclass/witness.hpp"

namespace nonclass {

// Photon-count distribution P_n of a displaced, inefficiently detected
// state. probs holds n = 0..dim-1; whatever the truncation cut off sits in
// tail_mass, so probs + tail_mass account for unit probability.
struct CountDistribution {
    std::vector<double> probs;
    double tail_mass = 0.0;
};

// Counting statistics after the unbalanced-homodyne beam splitter: the local
// oscillator displaces the signal by -gamma (so the reconstruction below
// lands on the phase-space point +gamma), then each photon survives the
// detector with probability eta_h (Bernoulli thinning).
inline CountDistribution count_distribution(const DensityMatrix& dm, Complex gamma,
                                            double eta_h, int dim,
                                            double tail_tol = 1e-9) {
    if (!(eta_h > 0.0 && eta_h <= 1.0))
        throw validation_error("count_distribution: eta_h must be in (0, 1]");
    if (dim < 1 || dim > dm.dim())
        throw validation_error("count_distribution: need 1 <= dim <= dm.dim()");

    const Eigen::MatrixXcd d = displacement_matrix(-gamma, dm.dim());
    const Eigen::MatrixXcd displaced = d * dm.entries() * d.adjoint();

    std::vector<double> occupation(dm.dim());
    for (int m = 0; m < dm.dim(); ++m)
        occupation[m] = std::max(0.0, displaced(m, m).real());

    CountDistribution out;
    out.probs.assign(dim, 0.0);
    if (eta_h == 1.0) {
        for (int n = 0; n < dim; ++n) out.probs[n] = occupation[n];
    } else {
        const double log_eta = std::log(eta_h);
        const double log_loss = std::log(1.0 - eta_h);
        for (int m = 0; m < dm.dim(); ++m) {
            if (occupation[m] == 0.0) continue;
            for (int n = 0; n <= m && n < dim; ++n) {
                const double log_binom = detail::log_factorial(m) -
                                         detail::log_factorial(n) -
                                         detail::log_factorial(m - n);
                out.probs[n] +=
                    occupation[m] * std::exp(log_binom + n * log_eta + (m - n) * log_loss);
            }
        }
    }

    double total = 0.0;
    for (double p : out.probs) total += p;
    out.tail_mass = std::max(0.0, 1.0 - total);
    if (out.tail_mass > tail_tol)
        throw numerics_error("count_distribution: tail mass " +
                             std::to_string(out.tail_mass) + " > tol " +
                             std::to_string(tail_tol) +
                             "; truncation too aggressive for this displacement");
    return out;
}

// One reconstruction-series evaluation. ratio is the magnitude of the
// geometric base; converged requires both ratio < 1 and the remainder bound
// under the requested tolerance. A divergent request is reported, never
// resummed: value is NaN and converged is false.
struct SeriesResult {
    double value = std::numeric_limits<double>::quiet_NaN();
    int terms_used = 0;
    double ratio = 0.0;
    bool converged = false;
    double truncation_bound = std::numeric_limits<double>::infinity();
};

namespace detail {

// prefactor * sum_n base^n P_n with base = -(1 - eta_h w)/(eta_h w).
// Summation stops once the geometric remainder bound
// prefactor * ratio^{n+1} * (remaining probability)/(1 - ratio) clears the
// tolerance; P_n <= 1 makes the bound rigorous.
inline SeriesResult geometric_reconstruction(const std::vector<double>& probs,
                                             double tail_mass, double width,
                                             double eta_h, double prefactor,
                                             double tolerance) {
    if (!(width > 0.0))
        throw validation_error("series: width must be > 0");
    if (!(eta_h > 0.0 && eta_h <= 1.0))
        throw validation_error("series: eta_h must be in (0, 1]");
    if (!(tolerance > 0.0))
        throw validation_error("series: tolerance must be > 0");

    const double base = -(1.0 - eta_h * width) / (eta_h * width);
    SeriesResult res;
    res.ratio = std::abs(base);
    if (res.ratio >= 1.0) return res; // divergent: reported, not summed

    std::vector<double> suffix(probs.size() + 1, tail_mass);
    for (int n = static_cast<int>(probs.size()) - 1; n >= 0; --n)
        suffix[n] = suffix[n + 1] + probs[n];

    double value = 0.0;
    double power = 1.0;
    double bound = std::numeric_limits<double>::infinity();
    int terms = 0;
    for (std::size_t n = 0; n < probs.size(); ++n) {
        value += prefactor * power * probs[n];
        power *= base;
        terms = static_cast<int>(n) + 1;
        bound = prefactor * std::pow(res.ratio, terms) * suffix[n + 1] / (1.0 - res.ratio);
        if (bound < tolerance) break;
    }
    res.value = value;
    res.terms_used = terms;
    res.truncation_bound = bound;
    res.converged = bound < tolerance;
    return res;
}

} // namespace detail

// Reconstruction of the Gaussian-witness mean (equivalently the
// s-parameterized distribution at the displacement point, s = 1 - 2 a2)
// from photon-count probabilities:
//   (1/(pi a2)) sum_n [-(1 - eta_h a2)/(eta_h a2)]^n P_n.
// Converges iff eta_h a2 > 1/2.
inline SeriesResult wall_series(const CountDistribution& counts, double a2,
                                double eta_h, double tolerance) {
    if (!(a2 > 0.0)) throw validation_error("wall_series: a2 must be > 0");
    return detail::geometric_reconstruction(counts.probs, counts.tail_mass, a2, eta_h,
                                            1.0 / (std::numbers::pi * a2), tolerance);
}

// Noise-compensated reconstruction: the same series with the anti-diffused
// width a2_eff = eta a2 - nbar (1 - eta) and prefactor eta/(pi a2_eff), fed
// with counts measured on the noisy state at displacement gamma sqrt(eta).
// When it converges it returns the *clean* state's witness mean.
inline SeriesResult modified_series(const CountDistribution& noisy_counts,
                                    const GaussianWitness& w, ChannelParams ch,
                                    double eta_h, double tolerance) {
    const CompensatedGaussianWitness cw = compensate_gaussian(w, ch);
    return detail::geometric_reconstruction(
        noisy_counts.probs, noisy_counts.tail_mass, cw.a2_eff, eta_h,
        cw.scale / (std::numbers::pi * cw.a2_eff), tolerance);
}

// shots i.i.d. draws from the count distribution by inverse-CDF sampling on
// raw 53-bit uniforms, so the stream depends only on (seed, shots) and not
// on any library distribution internals.
inline std::vector<std::uint64_t> sample_counts(const CountDistribution& counts,
                                                std::uint64_t shots,
                                                std::uint64_t seed) {
    if (shots < 1) throw validation_error("sample_counts: shots must be >= 1");
    if (counts.probs.empty()) throw validation_error("sample_counts: empty distribution");

    std::vector<double> cdf(counts.probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < counts.probs.size(); ++i) {
        acc += counts.probs[i];
        cdf[i] = acc;
    }

    std::mt19937_64 rng(seed);
    std::vector<std::uint64_t> histogram(counts.probs.size(), 0);
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * acc;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const std::size_t bin = it == cdf.end() ? cdf.size() - 1
                                                : static_cast<std::size_t>(it - cdf.begin());
        ++histogram[bin];
    }
    return histogram;
}

struct ShotNoiseEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::uint64_t shots = 0;
};

namespace detail {

// The series is linear in the empirical frequencies, so the multinomial
// covariance propagates to var = pref^2 (sum base^{2n} f_n - (sum base^n f_n)^2) / N.
inline ShotNoiseEstimate reconstruct_impl(const std::vector<std::uint64_t>& histogram,
                                          double width, double eta_h,
                                          double prefactor) {
    if (!(width > 0.0)) throw validation_error("reconstruct: width must be > 0");
    if (!(eta_h > 0.0 && eta_h <= 1.0))
        throw validation_error("reconstruct: eta_h must be in (0, 1]");
    const double base = -(1.0 - eta_h * width) / (eta_h * width);
    if (std::abs(base) >= 1.0)
        throw numerics_error("reconstruct: divergent-series request (ratio " +
                             std::to_string(std::abs(base)) + " >= 1)");

    std::uint64_t shots = 0;
    for (std::uint64_t h : histogram) shots += h;
    if (shots == 0) throw validation_error("reconstruct: empty histogram");

    double m1 = 0.0, m2 = 0.0;
    double power = 1.0;
    for (std::uint64_t h : histogram) {
        const double f = static_cast<double>(h) / static_cast<double>(shots);
        m1 += power * f;
        m2 += power * power * f;
        power *= base;
    }
    ShotNoiseEstimate out;
    out.shots = shots;
    out.estimate = prefactor * m1;
    out.std_error = prefactor *
                    std::sqrt(std::max(0.0, (m2 - m1 * m1) / static_cast<double>(shots)));
    return out;
}

} // namespace detail

inline ShotNoiseEstimate reconstruct_with_shot_noise(
    const std::vector<std::uint64_t>& histogram, double a2, double eta_h) {
    if (!(a2 > 0.0)) throw validation_error("reconstruct: a2 must be > 0");
    return detail::reconstruct_impl(histogram, a2, eta_h,
                                    1.0 / (std::numbers::pi * a2));
}

inline ShotNoiseEstimate reconstruct_with_shot_noise(
    const std::vector<std::uint64_t>& histogram, const GaussianWitness& w,
    ChannelParams ch, double eta_h) {
    const CompensatedGaussianWitness cw = compensate_gaussian(w, ch);
    return detail::reconstruct_impl(histogram, cw.a2_eff, eta_h,
                                    cw.scale / (std::numbers::pi * cw.a2_eff));
}

} // namespace nonclass
