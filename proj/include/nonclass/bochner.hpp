#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nonclass/char_fn.hpp"
#include "nonclass/errors.hpp"

namespace nonclass {

// Outcome of the discrete positive-definiteness test on Phi(a_k - a_l).
// A negative eigenvalue certifies nonclassicality; a PSD matrix for one
// point set proves nothing, hence "inconclusive".
struct BochnerReport {
    enum class Verdict { nonclassical, inconclusive };

    std::vector<Complex> points;
    Eigen::MatrixXcd matrix;
    double min_eigenvalue = 0.0;
    Verdict verdict = Verdict::inconclusive;
    std::vector<int> worst_minor_indices;
    double worst_minor_determinant = 0.0;
};

inline const char* to_string(BochnerReport::Verdict v) {
    return v == BochnerReport::Verdict::nonclassical ? "nonclassical" : "inconclusive";
}

namespace detail {

inline void check_bochner_points(const std::vector<Complex>& points) {
    if (points.size() < 2)
        throw validation_error("bochner: need at least 2 points");
    for (std::size_t k = 0; k < points.size(); ++k)
        for (std::size_t l = k + 1; l < points.size(); ++l)
            if (std::abs(points[k] - points[l]) <= 1e-12)
                throw validation_error("bochner: points must be pairwise distinct");
}

} // namespace detail

// Gram matrix M(l, k) = Phi(a_k - a_l). A characteristic function obeys
// Phi(-b) = Phi(b)*, so the raw matrix must already be Hermitian; a
// deviation above 1e-8 signals a broken evaluator and is an error, not
// something to patch silently. The residual rounding is symmetrized away.
inline Eigen::MatrixXcd build_bochner_matrix(const CharFn& phi,
                                             const std::vector<Complex>& points) {
    detail::check_bochner_points(points);
    const int n = static_cast<int>(points.size());
    Eigen::MatrixXcd m(n, n);
    for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k)
            m(l, k) = phi(points[k] - points[l]);
    const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (dev > 1e-8)
        throw numerics_error("build_bochner_matrix: Phi(-b) = Phi(b)* violated by " +
                             std::to_string(dev) + "; the characteristic function is "
                             "not a valid one");
    return 0.5 * (m + m.adjoint().eval());
}

// Eigenvalue test as the decision procedure (a Hermitian matrix is PSD iff
// all eigenvalues are >= 0); principal 2x2/3x3 minors scanned only for the
// human-readable report.
inline BochnerReport certify(const CharFn& phi, const std::vector<Complex>& points,
                             double tol = 1e-9) {
    if (!(tol > 0.0)) throw validation_error("certify: tol must be > 0");
    BochnerReport report;
    report.points = points;
    report.matrix = build_bochner_matrix(phi, points);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(report.matrix,
                                                       Eigen::EigenvaluesOnly);
    report.min_eigenvalue = es.eigenvalues().minCoeff();
    report.verdict = report.min_eigenvalue < -tol ? BochnerReport::Verdict::nonclassical
                                                  : BochnerReport::Verdict::inconclusive;

    const int n = static_cast<int>(points.size());
    const Eigen::MatrixXcd& m = report.matrix;
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double det = (m(i, i) * m(j, j) - m(i, j) * m(j, i)).real();
            if (det < worst) {
                worst = det;
                report.worst_minor_indices = {i, j};
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            for (int k = j + 1; k < n; ++k) {
                Eigen::Matrix3cd sub;
                sub << m(i, i), m(i, j), m(i, k),
                       m(j, i), m(j, j), m(j, k),
                       m(k, i), m(k, j), m(k, k);
                const double det = sub.determinant().real();
                if (det < worst) {
                    worst = det;
                    report.worst_minor_indices = {i, j, k};
                }
            }
        }
    }
    report.worst_minor_determinant = worst;
    return report;
}

// Radii along the real axis where the two-point determinant
// 1 - |Phi(r)|^2 goes negative; the cheapest sweep for a first look.
// Coherent states sit exactly on det = 0, so rounding noise below 1e-12
// does not count as negative.
inline std::vector<std::pair<double, double>> scan_pair_radius(const CharFn& phi,
                                                               double r_min,
                                                               double r_max,
                                                               int steps) {
    if (!(0.0 < r_min && r_min < r_max))
        throw validation_error("scan_pair_radius: need 0 < r_min < r_max");
    if (steps < 1) throw validation_error("scan_pair_radius: steps must be >= 1");
    std::vector<std::pair<double, double>> hits;
    for (int i = 0; i <= steps; ++i) {
        const double r = r_min + (r_max - r_min) * i / steps;
        const double det = 1.0 - std::norm(phi(Complex(r, 0.0)));
        if (det < -1e-12) hits.emplace_back(r, det);
    }
    return hits;
}

} // namespace nonclass
