#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nonclass/errors.hpp"
#include "nonclass/grid.hpp"
#include "nonclass/states.hpp"

namespace nonclass {

// Thermal-loss channel: efficiency eta in [0, 1] and mean thermal photon
// number nbar >= 0 of the admixed bath mode.
struct ChannelParams {
    double eta;
    double nbar;

    ChannelParams(double eta_, double nbar_) : eta(eta_), nbar(nbar_) {
        if (!(eta >= 0.0 && eta <= 1.0))
            throw validation_error("ChannelParams: eta must be in [0, 1]");
        if (!(nbar >= 0.0))
            throw validation_error("ChannelParams: nbar must be >= 0");
    }
};

// Canonical channel action on the characteristic function:
//   Phi_out(b) = Phi_in(b sqrt(eta)) exp(-|b|^2 nbar (1 - eta)).
// Everything else in the library (density-matrix route, diffusion law,
// compensated witnesses) is held consistent with this definition.
inline CharFn apply_channel_charfn(CharFn phi, ChannelParams ch) {
    const double root_eta = std::sqrt(ch.eta);
    const double noise = ch.nbar * (1.0 - ch.eta);
    auto inner = std::make_shared<const CharFn>(std::move(phi));
    CharFn out;
    out.provenance = inner->provenance;
    out.oscillation_hint = inner->oscillation_hint * root_eta;
    out.max_radius = root_eta > 0.0 ? inner->max_radius / root_eta
                                    : std::numeric_limits<double>::infinity();
    out.eval = [inner, root_eta, noise](Complex b) {
        return inner->eval(b * root_eta) * std::exp(-std::norm(b) * noise);
    };
    if (inner->eval_ring) {
        // Same angles, rescaled radius, then the Gaussian noise factor.
        out.eval_ring = [inner, root_eta, noise](double r, const std::vector<double>& cos_t,
                                                 const std::vector<double>& sin_t,
                                                 std::vector<Complex>& vals) {
            inner->eval_ring(r * root_eta, cos_t, sin_t, vals);
            const double damp = std::exp(-r * r * noise);
            for (Complex& v : vals) v *= damp;
        };
    }
    return out;
}

// nbar above eta/(1-eta) wipes out every trace of nonclassicality in the
// P-function sense.
inline double thermal_threshold(double eta) {
    if (!(eta >= 0.0 && eta < 1.0))
        throw validation_error(eta == 1.0
                                   ? "thermal_threshold: unbounded at eta = 1"
                                   : "thermal_threshold: eta must be in [0, 1)");
    return eta / (1.0 - eta);
}

// Ordering parameter of the output P-function when read against the input
// state: s' = 1 - 2 nbar (1 - eta) / eta. Equals -1 exactly at threshold.
inline double output_s_param(ChannelParams ch) {
    if (!(ch.eta > 0.0)) throw validation_error("output_s_param: eta must be > 0");
    return 1.0 - 2.0 * ch.nbar * (1.0 - ch.eta) / ch.eta;
}

// Smallest Fock cutoff holding a thermal state of mean nbar up to tail_tol.
inline int thermal_ancilla_dim(double nbar, double tail_tol = 1e-12) {
    if (!(nbar >= 0.0)) throw validation_error("thermal_ancilla_dim: nbar must be >= 0");
    if (nbar == 0.0) return 1;
    const double q = nbar / (1.0 + nbar);
    return static_cast<int>(std::ceil(std::log(tail_tol) / std::log(q))) + 1;
}

namespace detail {

// Two-mode beam-splitter rotation restricted to the total-photon-number
// block N, in the basis |k>_sys |N-k>_anc, k = 0..N. The generator
// theta (a+ c - a c+) is anti-Hermitian tridiagonal; exponentiated through
// the Hermitian eigendecomposition of i*G, which is exact for the block
// (no truncation artifacts, the block is closed under the rotation).
inline Eigen::MatrixXcd beam_splitter_block(int total_photons, double theta) {
    const int k = total_photons + 1;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(k, k);
    for (int j = 0; j + 1 < k; ++j) {
        const double s =
            theta * std::sqrt((j + 1.0) * static_cast<double>(total_photons - j));
        h(j + 1, j) = Complex(0.0, s);
        h(j, j + 1) = Complex(0.0, -s);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXcd rot(k);
    for (int j = 0; j < k; ++j) {
        const double lam = es.eigenvalues()(j);
        rot(j) = Complex(std::cos(lam), -std::sin(lam));
    }
    return es.eigenvectors() * rot.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace detail

// Fock-basis realization of the channel: a beam splitter of transmissivity
// eta mixes the input with a thermal ancilla of mean nbar, and the ancilla
// is traced out. ancilla_dim must hold the thermal state up to 1e-12 tail.
inline DensityMatrix apply_channel_dm(const DensityMatrix& in, ChannelParams ch,
                                      int ancilla_dim) {
    if (ancilla_dim < 1)
        throw validation_error("apply_channel_dm: ancilla_dim must be >= 1");
    if (ch.eta == 1.0) return in; // transparent channel

    const double q = ch.nbar / (1.0 + ch.nbar);
    const double anc_tail = std::pow(q, ancilla_dim);
    if (anc_tail >= 1e-12)
        throw validation_error("apply_channel_dm: ancilla_dim " +
                               std::to_string(ancilla_dim) + " leaves thermal tail " +
                               std::to_string(anc_tail) + " >= 1e-12");

    const int dim = in.dim();
    const double theta = std::acos(std::sqrt(ch.eta));
    const int n_max = dim - 1 + ancilla_dim - 1;

    std::vector<Eigen::MatrixXcd> blocks(n_max + 1);
    for (int n = 0; n <= n_max; ++n) blocks[n] = detail::beam_splitter_block(n, theta);

    std::vector<double> anc_prob(ancilla_dim);
    double p = 1.0 / (1.0 + ch.nbar);
    for (int j = 0; j < ancilla_dim; ++j) {
        anc_prob[j] = p;
        p *= q;
    }

    // rho_out[p, q] = sum_j p_j sum_{m,n} rho[m, n] R^{(m+j)}[p, m] R^{(n+j)}[q, n]*
    // with the ancilla-out occupation t = m + j - p = n + j - q forcing
    // q = p - m + n.
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    for (int j = 0; j < ancilla_dim; ++j) {
        for (int m = 0; m < dim; ++m) {
            const Eigen::MatrixXcd& bm = blocks[m + j];
            for (int n = 0; n < dim; ++n) {
                const Complex rho_mn = in.entries()(m, n);
                if (std::abs(rho_mn) < 1e-18) continue;
                const Eigen::MatrixXcd& bn = blocks[n + j];
                const Complex wmn = anc_prob[j] * rho_mn;
                const int p_lo = std::max(0, m - n);
                const int p_hi = std::min({dim - 1, m + j, dim - 1 + m - n});
                for (int pp = p_lo; pp <= p_hi; ++pp)
                    out(pp, pp - m + n) += wmn * bm(pp, m) * std::conj(bn(pp - m + n, n));
            }
        }
    }
    out = 0.5 * (out + out.adjoint().eval());
    return DensityMatrix(std::move(out));
}

// Output P-function by rescaling the input s-parameterized distribution:
//   P_out(a) = (1/eta) P_in(a / sqrt(eta), s') with s' = output_s_param.
inline double output_p_value(const StateSpec& spec, ChannelParams ch, Complex alpha) {
    if (!(ch.eta > 0.0)) throw validation_error("output_p_value: eta must be > 0");
    const double s_prime = output_s_param(ch);
    if (!(s_prime < 1.0))
        throw validation_error("output_p_value: noiseless channel leaves the "
                               "P-function distributional; evaluate s_distribution "
                               "directly instead");
    return s_distribution(spec, alpha / std::sqrt(ch.eta), s_prime) / ch.eta;
}

// Largest absolute residual of the diffusion law dP/dnbar = (1-eta) D[P]
// over the grid, where D is the mixed derivative d^2/(da da*), realized as a
// sixth-order Laplacian over (Re a, Im a) divided by four. Central
// differences in nbar; the residual carries O(d_nbar^2) + O(step^6). The
// output P-function has steep high derivatives, so a low-order stencil
// would swamp the d_nbar term at any reasonable step.
inline double diffusion_residual(const StateSpec& spec, ChannelParams ch,
                                 const PhaseGrid& grid, double d_nbar) {
    if (!(d_nbar > 0.0)) throw validation_error("diffusion_residual: d_nbar must be > 0");
    if (!(ch.eta > 0.0 && ch.eta < 1.0))
        throw validation_error("diffusion_residual: eta must be in (0, 1)");
    if (!(ch.nbar - d_nbar > 0.0))
        throw validation_error("diffusion_residual: nbar - d_nbar must stay > 0");
    const double threshold = thermal_threshold(ch.eta);
    if (!(ch.nbar + d_nbar < threshold))
        throw numerics_error("diffusion_residual: nbar + d_nbar reaches the thermal "
                             "threshold; the P-function stops being regular there");
    if (!(grid.radius <= 4.0))
        throw validation_error("diffusion_residual: grid radius must be <= 4");

    const double h = grid.step;
    const int pad = 3;
    const int n = grid.points_per_axis() + 2 * pad;
    auto field = [&](double nbar) {
        Eigen::MatrixXd f(n, n);
        ChannelParams c(ch.eta, nbar);
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix)
                f(iy, ix) = output_p_value(
                    spec, c,
                    Complex(-grid.radius + (ix - pad) * h, -grid.radius + (iy - pad) * h));
        return f;
    };

    const Eigen::MatrixXd p_minus = field(ch.nbar - d_nbar);
    const Eigen::MatrixXd p_center = field(ch.nbar);
    const Eigen::MatrixXd p_plus = field(ch.nbar + d_nbar);

    auto second_derivative = [&](const Eigen::MatrixXd& f, int iy, int ix, bool along_x) {
        auto at = [&](int k) { return along_x ? f(iy, ix + k) : f(iy + k, ix); };
        return (2.0 * (at(-3) + at(3)) - 27.0 * (at(-2) + at(2)) +
                270.0 * (at(-1) + at(1)) - 490.0 * at(0)) /
               (180.0 * h * h);
    };

    double residual = 0.0;
    for (int iy = pad; iy + pad < n; ++iy) {
        for (int ix = pad; ix + pad < n; ++ix) {
            const double dt = (p_plus(iy, ix) - p_minus(iy, ix)) / (2.0 * d_nbar);
            const double lap = second_derivative(p_center, iy, ix, true) +
                               second_derivative(p_center, iy, ix, false);
            residual = std::max(residual,
                                std::abs(dt - (1.0 - ch.eta) * 0.25 * lap));
        }
    }
    return residual;
}

} // namespace nonclass
