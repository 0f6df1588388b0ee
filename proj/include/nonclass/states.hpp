#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nonclass/char_fn.hpp"
#include "nonclass/errors.hpp"
#include "nonclass/quadrature.hpp"

namespace nonclass {

inline constexpr int default_fock_dim = 64;
inline constexpr double default_tail_tol = 1e-10;
inline constexpr int max_mixture_depth = 64;

struct Component;

// Declarative description of a single-mode state: Fock |n>, coherent |g>,
// thermal with mean photon number nbar, or a finite convex mixture of those.
// Immutable once built; the factory functions validate the invariants
// (nonnegative photon numbers, mixture weights summing to one).
class StateSpec {
public:
    enum class Kind { fock, coherent, thermal, mixture };

    static StateSpec fock(int n);
    static StateSpec coherent(Complex amplitude);
    static StateSpec thermal(double mean_photons);
    static StateSpec mixture(std::vector<Component> components);

    Kind kind() const { return kind_; }
    int fock_n() const { return n_; }
    Complex coherent_amplitude() const { return amplitude_; }
    double thermal_mean() const { return mean_; }
    const std::vector<Component>& components() const { return components_; }

    double mean_photons() const;
    // Largest coherent displacement anywhere in the spec; the angular
    // bandwidth hint for phase-space quadratures.
    double max_coherent_amplitude() const;
    int depth() const;

private:
    StateSpec() = default;
    Kind kind_ = Kind::fock;
    int n_ = 0;
    Complex amplitude_{0.0, 0.0};
    double mean_ = 0.0;
    std::vector<Component> components_;
};

struct Component {
    double weight = 0.0;
    StateSpec state;
};

inline StateSpec StateSpec::fock(int n) {
    if (n < 0) throw validation_error("fock: photon number must be >= 0");
    StateSpec s;
    s.kind_ = Kind::fock;
    s.n_ = n;
    return s;
}

inline StateSpec StateSpec::coherent(Complex amplitude) {
    StateSpec s;
    s.kind_ = Kind::coherent;
    s.amplitude_ = amplitude;
    return s;
}

inline StateSpec StateSpec::thermal(double mean_photons) {
    if (!(mean_photons >= 0.0))
        throw validation_error("thermal: mean photon number must be >= 0");
    StateSpec s;
    s.kind_ = Kind::thermal;
    s.mean_ = mean_photons;
    return s;
}

inline StateSpec StateSpec::mixture(std::vector<Component> components) {
    if (components.empty()) throw validation_error("mixture: no components");
    double total = 0.0;
    for (const Component& c : components) {
        if (!(c.weight >= 0.0)) throw validation_error("mixture: negative weight");
        total += c.weight;
    }
    // Reject rather than renormalize: a wrong total is a caller bug.
    if (std::abs(total - 1.0) > 1e-12)
        throw validation_error("mixture: weights sum to " + std::to_string(total) +
                               ", expected 1");
    StateSpec s;
    s.kind_ = Kind::mixture;
    s.components_ = std::move(components);
    if (s.depth() > max_mixture_depth)
        throw validation_error("mixture: nesting deeper than " +
                               std::to_string(max_mixture_depth));
    return s;
}

inline double StateSpec::mean_photons() const {
    switch (kind_) {
        case Kind::fock: return static_cast<double>(n_);
        case Kind::coherent: return std::norm(amplitude_);
        case Kind::thermal: return mean_;
        case Kind::mixture: {
            double m = 0.0;
            for (const Component& c : components_) m += c.weight * c.state.mean_photons();
            return m;
        }
    }
    return 0.0;
}

inline double StateSpec::max_coherent_amplitude() const {
    switch (kind_) {
        case Kind::coherent: return std::abs(amplitude_);
        case Kind::mixture: {
            double m = 0.0;
            for (const Component& c : components_)
                m = std::max(m, c.state.max_coherent_amplitude());
            return m;
        }
        default: return 0.0;
    }
}

inline int StateSpec::depth() const {
    if (kind_ != Kind::mixture) return 1;
    int d = 0;
    for (const Component& c : components_) d = std::max(d, c.state.depth());
    return d + 1;
}

// Truncated Fock-basis density matrix. Construction enforces hermiticity;
// validate() additionally certifies the trace window and positivity.
class DensityMatrix {
public:
    explicit DensityMatrix(Eigen::MatrixXcd entries) : entries_(std::move(entries)) {
        if (entries_.rows() != entries_.cols() || entries_.rows() < 1)
            throw validation_error("DensityMatrix: entries must be square, dim >= 1");
        const double herm_dev = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
        if (herm_dev > 1e-12)
            throw validation_error("DensityMatrix: not Hermitian (deviation " +
                                   std::to_string(herm_dev) + ")");
        entries_ = 0.5 * (entries_ + entries_.adjoint().eval());
    }

    int dim() const { return static_cast<int>(entries_.rows()); }
    const Eigen::MatrixXcd& entries() const { return entries_; }
    double trace_real() const { return entries_.trace().real(); }

    void validate(double tail_tol = default_tail_tol) const {
        const double tr = trace_real();
        if (tr < 1.0 - tail_tol || tr > 1.0 + 1e-9)
            throw validation_error("DensityMatrix: trace " + std::to_string(tr) +
                                   " outside [1 - tail_tol, 1]");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(entries_,
                                                           Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10)
            throw validation_error("DensityMatrix: negative eigenvalue " +
                                   std::to_string(es.eigenvalues().minCoeff()));
    }

private:
    Eigen::MatrixXcd entries_;
};

namespace detail {

// Laguerre polynomial L_n(x) by the stable three-term recurrence.
inline double laguerre(int n, double x) {
    if (n == 0) return 1.0;
    double lkm1 = 1.0, lk = 1.0 - x;
    for (int k = 1; k < n; ++k) {
        const double lkp1 = ((2.0 * k + 1.0 - x) * lk - k * lkm1) / (k + 1.0);
        lkm1 = lk;
        lk = lkp1;
    }
    return lk;
}

// Coherent-state amplitude <m|g> = exp(-|g|^2/2) g^m / sqrt(m!), evaluated in
// log-magnitude + phase form so occupations past ~30 do not overflow.
inline Complex coherent_amplitude_entry(Complex g, int m) {
    const double r = std::abs(g);
    if (r == 0.0) return m == 0 ? Complex{1.0, 0.0} : Complex{0.0, 0.0};
    const double log_mag = -0.5 * r * r + m * std::log(r) - 0.5 * log_factorial(m);
    const double phase = m * std::arg(g);
    return std::exp(log_mag) * Complex(std::cos(phase), std::sin(phase));
}

} // namespace detail

// Fock-basis displacement operator from the associated-Laguerre closed form
//
//   <k+a|D(b)|k> = sqrt(k!/(k+a)!) b^a e^{-|b|^2/2} L_k^{(a)}(|b|^2),
//
// evaluated per diagonal band a = m - n. The degree recurrence runs on
// M_k = L_k^{(a)}(x) / binom(k+a, k), which stays O(e^{x/2}) for every band,
//
//   M_{k+1} = [(2k+1+a-x) M_k - k M_{k-1}] / (k+1+a),
//
// and the binomial is restored in log form together with the factorial
// ratio, so no intermediate overflows even for occupations in the hundreds.
// Recursing in the degree (not the order) is the numerically stable
// direction for these polynomials.
inline Eigen::MatrixXcd displacement_matrix(Complex beta, int dim) {
    if (dim < 1) throw validation_error("displacement_matrix: dim must be >= 1");
    if (beta == Complex{0.0, 0.0})
        return Eigen::MatrixXcd::Identity(dim, dim);

    const double x = std::norm(beta);
    const double log_b = std::log(std::abs(beta));
    const double arg_upper = std::arg(beta);             // phase of b^a
    const double arg_lower = std::arg(-std::conj(beta)); // phase of (-b*)^a

    Eigen::MatrixXcd d(dim, dim);
    for (int band = 0; band < dim; ++band) {
        // log of |b|^band * sqrt(k!/(k+band)!) * binom(k+band, k), k-free part
        const double log_pref = band * log_b - 0.5 * x - detail::log_factorial(band);
        double m_prev = 0.0;
        double m_cur = 1.0; // M_0
        for (int k = 0; k + band < dim; ++k) {
            const double log_ratio =
                0.5 * (detail::log_factorial(k + band) - detail::log_factorial(k));
            const double mag = std::exp(log_pref + log_ratio) * m_cur;
            d(k + band, k) = mag * Complex(std::cos(band * arg_upper),
                                           std::sin(band * arg_upper));
            if (band > 0)
                d(k, k + band) = mag * Complex(std::cos(band * arg_lower),
                                               std::sin(band * arg_lower));
            const double m_next =
                ((2.0 * k + 1.0 + band - x) * m_cur - k * m_prev) / (k + 1.0 + band);
            m_prev = m_cur;
            m_cur = m_next;
        }
    }
    return d;
}

namespace detail {

inline Eigen::MatrixXcd build_dm_impl(const StateSpec& spec, int dim) {
    using Kind = StateSpec::Kind;
    switch (spec.kind()) {
        case Kind::fock: {
            Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
            if (spec.fock_n() >= dim)
                throw numerics_error("build_density_matrix: fock(" +
                                     std::to_string(spec.fock_n()) +
                                     ") does not fit in dim " + std::to_string(dim) +
                                     " (tail mass 1)");
            m(spec.fock_n(), spec.fock_n()) = 1.0;
            return m;
        }
        case Kind::coherent: {
            Eigen::VectorXcd amps(dim);
            for (int n = 0; n < dim; ++n)
                amps(n) = coherent_amplitude_entry(spec.coherent_amplitude(), n);
            return amps * amps.adjoint();
        }
        case Kind::thermal: {
            Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
            const double nbar = spec.thermal_mean();
            const double q = nbar / (1.0 + nbar);
            double p = 1.0 / (1.0 + nbar);
            for (int n = 0; n < dim; ++n) {
                m(n, n) = p;
                p *= q;
            }
            return m;
        }
        case Kind::mixture: {
            Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
            for (const Component& c : spec.components())
                m += c.weight * build_dm_impl(c.state, dim);
            return m;
        }
    }
    throw validation_error("build_density_matrix: unknown kind");
}

} // namespace detail

// Truncated Fock representation of a spec. Fock components are exact;
// coherent entries use the Poisson-amplitude expansion; thermal entries are
// the diagonal geometric series. The truncation must leave less than
// tail_tol probability outside, otherwise the achieved tail is reported.
inline DensityMatrix build_density_matrix(const StateSpec& spec, int dim,
                                          double tail_tol = default_tail_tol) {
    if (dim < 1) throw validation_error("build_density_matrix: dim must be >= 1");
    Eigen::MatrixXcd m = detail::build_dm_impl(spec, dim);
    const double tail = 1.0 - m.trace().real();
    if (tail >= tail_tol)
        throw numerics_error("build_density_matrix: dim " + std::to_string(dim) +
                             " leaves tail mass " + std::to_string(tail) +
                             " >= tol " + std::to_string(tail_tol));
    return DensityMatrix(std::move(m));
}

// Analytic characteristic function of the P-distribution:
//   fock(n)     -> L_n(|b|^2)
//   coherent(g) -> exp(g* b - g b*)        (unit modulus)
//   thermal(m)  -> exp(-m |b|^2)
//   mixture     -> weighted sum
inline CharFn char_fn(const StateSpec& spec) {
    using Kind = StateSpec::Kind;
    CharFn out;
    out.provenance = CharFn::Provenance::analytic;
    out.oscillation_hint = spec.max_coherent_amplitude();
    switch (spec.kind()) {
        case Kind::fock: {
            const int n = spec.fock_n();
            out.eval = [n](Complex b) { return Complex(detail::laguerre(n, std::norm(b)), 0.0); };
            break;
        }
        case Kind::coherent: {
            const Complex g = spec.coherent_amplitude();
            out.eval = [g](Complex b) {
                return std::exp(std::conj(g) * b - g * std::conj(b));
            };
            break;
        }
        case Kind::thermal: {
            const double m = spec.thermal_mean();
            out.eval = [m](Complex b) { return Complex(std::exp(-m * std::norm(b)), 0.0); };
            break;
        }
        case Kind::mixture: {
            std::vector<std::pair<double, CharFn>> parts;
            parts.reserve(spec.components().size());
            for (const Component& c : spec.components())
                parts.emplace_back(c.weight, char_fn(c.state));
            out.eval = [parts](Complex b) {
                Complex acc{0.0, 0.0};
                for (const auto& [w, fn] : parts) acc += w * fn(b);
                return acc;
            };
            break;
        }
    }
    return out;
}

// Phi(b) = exp(|b|^2/2) Tr(rho D(b)). The exponential amplifies truncation
// and rounding noise in the trace, so evaluation is only allowed while
// |b|^2 <= dim/4.
inline Complex char_fn_from_dm(const DensityMatrix& dm, Complex beta) {
    const double b2 = std::norm(beta);
    if (b2 > dm.dim() / 4.0 * (1.0 + 1e-9))
        throw numerics_error("char_fn_from_dm: |beta|^2 = " + std::to_string(b2) +
                             " beyond trust radius dim/4 = " +
                             std::to_string(dm.dim() / 4.0));
    const Eigen::MatrixXcd d = displacement_matrix(beta, dm.dim());
    return std::exp(0.5 * b2) * (dm.entries() * d).trace();
}

namespace detail {

// Ring evaluator for dm-backed characteristic functions. On a circle
// |b| = r the band magnitudes depend on r alone and the angle enters only
// through per-band phases, so the trace collapses to
//
//   Phi(r e^{i th}) = C_0 + sum_band [A_band e^{i band th} + (-1)^band A_band* e^{-i band th}]
//
// with A_band = sum_k rho(k, k+band) g_band(k, r). One O(dim^2) pass feeds
// every angle of the ring at O(dim) each.
struct DmRingEvaluator {
    std::shared_ptr<const Eigen::MatrixXcd> rho;
    std::vector<double> band_weight; // max |rho| per band, to skip empty bands

    void operator()(double r, const std::vector<double>& cos_t,
                    const std::vector<double>& sin_t, std::vector<Complex>& out) const {
        const int dim = static_cast<int>(rho->rows());
        const double x = r * r;
        if (x > dim / 4.0 * (1.0 + 1e-9))
            throw numerics_error("char_fn_from_dm: |beta|^2 beyond trust radius dim/4");
        const double log_r = std::log(r);

        // g without the e^{-x/2} damping: the e^{x/2} prefactor of Phi is
        // folded in directly. Bounded by e^{x/2} <= e^{dim/8}.
        std::vector<Complex> band_sum(dim, Complex{0.0, 0.0});
        for (int band = 0; band < dim; ++band) {
            if (band_weight[band] == 0.0) continue;
            const double log_pref = band * log_r - log_factorial(band);
            double m_prev = 0.0, m_cur = 1.0;
            Complex acc{0.0, 0.0};
            for (int k = 0; k + band < dim; ++k) {
                const double g = std::exp(log_pref + 0.5 * (log_factorial(k + band) -
                                                            log_factorial(k))) *
                                 m_cur;
                acc += (*rho)(k, k + band) * g;
                const double m_next =
                    ((2.0 * k + 1.0 + band - x) * m_cur - k * m_prev) / (k + 1.0 + band);
                m_prev = m_cur;
                m_cur = m_next;
            }
            band_sum[band] = acc;
        }

        const std::size_t n = cos_t.size();
        for (std::size_t j = 0; j < n; ++j) {
            const Complex rot(cos_t[j], sin_t[j]);
            Complex acc(band_sum[0].real(), 0.0);
            Complex phase = rot;
            double sign = -1.0;
            for (int band = 1; band < dim; ++band) {
                if (band_weight[band] != 0.0) {
                    const Complex z = band_sum[band] * phase;
                    acc += z + sign * std::conj(z);
                }
                phase *= rot;
                sign = -sign;
            }
            out[j] = acc;
        }
    }
};

} // namespace detail

inline CharFn char_fn(const DensityMatrix& dm) {
    auto shared = std::make_shared<const Eigen::MatrixXcd>(dm.entries());
    const int dim = dm.dim();

    detail::DmRingEvaluator ring{shared, std::vector<double>(dim, 0.0)};
    for (int band = 0; band < dim; ++band) {
        double w = 0.0;
        for (int k = 0; k + band < dim; ++k)
            w = std::max(w, std::abs((*shared)(k, k + band)));
        ring.band_weight[band] = w > 1e-18 ? w : 0.0;
    }

    CharFn out;
    out.provenance = CharFn::Provenance::from_density_matrix;
    out.max_radius = std::sqrt(dim / 4.0);
    out.eval = [shared, dim](Complex b) {
        const double b2 = std::norm(b);
        if (b2 > dim / 4.0 * (1.0 + 1e-9))
            throw numerics_error("char_fn_from_dm: |beta|^2 = " + std::to_string(b2) +
                                 " beyond trust radius dim/4 = " +
                                 std::to_string(dim / 4.0));
        return std::exp(0.5 * b2) * ((*shared) * displacement_matrix(b, dim)).trace();
    };
    out.eval_ring = std::move(ring);
    return out;
}

// s-parameterized phase-space distribution at a point. Closed forms for the
// vacuum/coherent/thermal Gaussians and the single-photon state; a Fourier
// quadrature of Phi(b) exp(-(1-s)|b|^2/2) for higher Fock states; mixtures
// are resolved componentwise so linearity in the weights is exact.
inline double s_distribution(const StateSpec& spec, Complex alpha, double s) {
    if (!(s < 1.0))
        throw validation_error("s_distribution: s must be < 1 (the s = 1 P-function "
                               "is distributional and not pointwise evaluatable)");
    constexpr double pi = std::numbers::pi;
    const double w = 0.5 * (1.0 - s);
    using Kind = StateSpec::Kind;
    switch (spec.kind()) {
        case Kind::coherent:
            return std::exp(-std::norm(alpha - spec.coherent_amplitude()) / w) / (pi * w);
        case Kind::thermal: {
            const double c = spec.thermal_mean() + w;
            return std::exp(-std::norm(alpha) / c) / (pi * c);
        }
        case Kind::fock: {
            const int n = spec.fock_n();
            if (n == 0) return std::exp(-std::norm(alpha) / w) / (pi * w);
            if (n == 1) {
                const double one_minus_s = 1.0 - s;
                return 2.0 / (pi * one_minus_s * one_minus_s * one_minus_s) *
                       (4.0 * std::norm(alpha) - 1.0 + s * s) *
                       std::exp(-2.0 * std::norm(alpha) / one_minus_s);
            }
            const QuadratureResult q = smoothed_value(char_fn(spec), alpha, w);
            if (!q.converged)
                throw numerics_error("s_distribution: quadrature did not converge "
                                     "(residual " + std::to_string(q.residual) + ")");
            return q.value;
        }
        case Kind::mixture: {
            double acc = 0.0;
            for (const Component& c : spec.components())
                acc += c.weight * s_distribution(c.state, alpha, s);
            return acc;
        }
    }
    throw validation_error("s_distribution: unknown kind");
}

} // namespace nonclass
