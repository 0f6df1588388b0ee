#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "nonclass/errors.hpp"

namespace nonclass {

using Complex = std::complex<double>;

// Square phase-space grid centered at the origin: points x + iy with x and y
// running over {-radius, -radius+step, ..., +radius}. Points are emitted in a
// deterministic row-major order (y outer, x inner) so file output is stable.
struct PhaseGrid {
    double radius = 4.0;
    double step = 0.05;

    PhaseGrid() = default;
    PhaseGrid(double radius_, double step_) : radius(radius_), step(step_) {
        if (!(radius > 0.0)) throw validation_error("PhaseGrid: radius must be > 0");
        if (!(step > 0.0)) throw validation_error("PhaseGrid: step must be > 0");
    }

    int points_per_axis() const {
        return static_cast<int>(std::floor(2.0 * radius / step + 0.5)) + 1;
    }

    double axis_value(int i) const { return -radius + i * step; }

    std::vector<Complex> points() const {
        const int n = points_per_axis();
        std::vector<Complex> out;
        out.reserve(static_cast<std::size_t>(n) * n);
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix)
                out.emplace_back(axis_value(ix), axis_value(iy));
        return out;
    }
};

} // namespace nonclass
