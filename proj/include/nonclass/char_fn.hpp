#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <vector>

namespace nonclass {

using Complex = std::complex<double>;

// Normally ordered characteristic function b -> Phi(b) with Phi(0) = 1.
// eval is the pointwise evaluator. eval_ring, when set, fills the values on
// a whole circle |b| = r at once given tabulated angles; density-matrix
// evaluators use it because all the heavy radial work on a ring is shared.
struct CharFn {
    enum class Provenance { analytic, from_density_matrix };

    std::function<Complex(Complex)> eval;
    std::function<void(double r, const std::vector<double>& cos_t,
                       const std::vector<double>& sin_t, std::vector<Complex>& out)>
        eval_ring;
    Provenance provenance = Provenance::analytic;
    // Quadrature metadata: angular bandwidth of the function and the radius
    // beyond which the evaluator cannot be trusted (finite for dm-backed).
    double oscillation_hint = 0.0;
    double max_radius = std::numeric_limits<double>::infinity();

    Complex operator()(Complex beta) const { return eval(beta); }
};

namespace detail {

// Memoized lgamma(n + 1); the displacement bands hit these in tight loops.
inline double log_factorial(int n) {
    static thread_local std::vector<double> table{0.0, 0.0};
    while (static_cast<int>(table.size()) <= n)
        table.push_back(std::lgamma(static_cast<double>(table.size()) + 1.0));
    return table[n];
}

} // namespace detail

} // namespace nonclass
