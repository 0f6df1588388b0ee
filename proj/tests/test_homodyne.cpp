#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "nonclass/homodyne.hpp"
#include "oracles.hpp"

using namespace nonclass;
using Catch::Matchers::ContainsSubstring;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("count distributions of reference configurations") {
    const DensityMatrix f1 = build_density_matrix(StateSpec::fock(1), 64);

    SECTION("single photon under detector loss is a Bernoulli trial") {
        const CountDistribution c = count_distribution(f1, 0.0, 0.6, 8);
        CHECK(c.probs[0] == Catch::Approx(0.4).epsilon(1e-13));
        CHECK(c.probs[1] == Catch::Approx(0.6).epsilon(1e-13));
        CHECK(c.tail_mass < 1e-12);
    }
    SECTION("undisplaced vacuum never clicks") {
        const DensityMatrix vac = build_density_matrix(StateSpec::fock(0), 16);
        const CountDistribution c = count_distribution(vac, 0.0, 0.7, 4);
        CHECK(c.probs[0] == Catch::Approx(1.0).epsilon(1e-14));
    }
    SECTION("displaced vacuum counts Poisson") {
        const DensityMatrix vac = build_density_matrix(StateSpec::fock(0), 64);
        const CountDistribution c = count_distribution(vac, Complex(1.0, 0.0), 1.0, 16);
        for (int n = 0; n < 5; ++n)
            CHECK(c.probs[n] ==
                  Catch::Approx(std::exp(-1.0) / std::tgamma(n + 1.0)).margin(1e-12));
    }
    SECTION("mean count is eta_h times the displaced photon number") {
        const StateSpec spec =
            StateSpec::mixture({{0.5, StateSpec::coherent(Complex(0.8, -0.3))},
                                {0.5, StateSpec::thermal(0.7)}});
        const DensityMatrix dm = build_density_matrix(spec, 64);
        const Complex gamma(0.5, 0.4);
        for (double eta_h : {0.6, 1.0}) {
            const CountDistribution c = count_distribution(dm, gamma, eta_h, 64);
            double mean_count = 0.0;
            for (std::size_t n = 0; n < c.probs.size(); ++n) mean_count += n * c.probs[n];
            // displaced mean photon number, computed independently
            const Eigen::MatrixXcd d = displacement_matrix(-gamma, 64);
            const Eigen::MatrixXcd disp = d * dm.entries() * d.adjoint();
            double displaced_mean = 0.0;
            for (int m = 0; m < 64; ++m) displaced_mean += m * disp(m, m).real();
            CHECK(mean_count == Catch::Approx(eta_h * displaced_mean).margin(1e-8));
        }
    }
    SECTION("validation") {
        CHECK_THROWS_AS(count_distribution(f1, 0.0, 0.0, 8), validation_error);
        CHECK_THROWS_AS(count_distribution(f1, 0.0, 1.1, 8), validation_error);
        CHECK_THROWS_AS(count_distribution(f1, 0.0, 0.5, 0), validation_error);
        CHECK_THROWS_AS(count_distribution(f1, 0.0, 0.5, 65), validation_error);
        // displacement far beyond the truncation: tail reported
        const DensityMatrix small = build_density_matrix(StateSpec::fock(0), 16);
        CHECK_THROWS_WITH(count_distribution(small, Complex(3.5, 0.0), 1.0, 16),
                          ContainsSubstring("tail"));
    }
}

TEST_CASE("reconstruction series on clean states") {
    const DensityMatrix f1 = build_density_matrix(StateSpec::fock(1), 64);
    const CountDistribution counts = count_distribution(f1, 0.0, 1.0, 64);

    SECTION("width one keeps only the vacuum term") {
        const SeriesResult r = wall_series(counts, 1.0, 1.0, 1e-9);
        CHECK(r.value == 0.0); // Husimi value of |1> at the origin
        CHECK(r.ratio == 0.0);
        CHECK(r.converged);

        const DensityMatrix vac = build_density_matrix(StateSpec::fock(0), 16);
        const SeriesResult rv =
            wall_series(count_distribution(vac, 0.0, 1.0, 16), 1.0, 1.0, 1e-9);
        CHECK(rv.value == Catch::Approx(1.0 / pi).epsilon(1e-14));
    }
    SECTION("reference value at width 0.75") {
        const SeriesResult r = wall_series(counts, 0.75, 1.0, 1e-9);
        CHECK(r.value == Catch::Approx(-0.1414710605261292).margin(1e-9));
        CHECK(r.converged);
        CHECK(r.truncation_bound < 1e-9);
    }
    SECTION("divergent request is reported, not summed") {
        const SeriesResult r = wall_series(counts, 0.4, 1.0, 1e-9);
        CHECK(r.ratio == Catch::Approx(1.5).epsilon(1e-14));
        CHECK_FALSE(r.converged);
        CHECK(std::isnan(r.value));
    }
    SECTION("validation") {
        CHECK_THROWS_AS(wall_series(counts, -0.1, 1.0, 1e-9), validation_error);
        CHECK_THROWS_AS(wall_series(counts, 0.75, 0.0, 1e-9), validation_error);
        CHECK_THROWS_AS(wall_series(counts, 0.75, 1.0, 0.0), validation_error);
    }
}

TEST_CASE("series reconstruction equals the phase-space value") {
    for (const auto& [name, spec] : oracles::catalog()) {
        const DensityMatrix dm = build_density_matrix(spec, 64);
        for (Complex gamma : {Complex(0.0, 0.0), Complex(0.7, 0.0), Complex(-0.5, 0.3)}) {
            for (double eta_h : {0.6, 1.0}) {
                for (double bump : {0.35, 0.75}) {
                    const double a2 = 0.5 / eta_h + bump;
                    INFO(name << " gamma=" << gamma << " eta_h=" << eta_h
                              << " a2=" << a2);
                    const CountDistribution counts =
                        count_distribution(dm, gamma, eta_h, 64);
                    const SeriesResult r = wall_series(counts, a2, eta_h, 1e-9);
                    REQUIRE(r.converged);
                    CHECK(r.value ==
                          Catch::Approx(s_distribution(spec, gamma, 1.0 - 2.0 * a2))
                              .margin(1e-6));
                }
            }
        }
    }
}

TEST_CASE("compensated series recovers the clean value through the noisy pipeline") {
    SECTION("reference configuration") {
        const ChannelParams ch(0.9, 0.5);
        const DensityMatrix noisy = apply_channel_dm(
            build_density_matrix(StateSpec::fock(1), 64), ch, thermal_ancilla_dim(0.5));
        const CountDistribution counts = count_distribution(noisy, 0.0, 1.0, 64);
        const SeriesResult r =
            modified_series(counts, GaussianWitness(0.8, 0.0), ch, 1.0, 1e-9);
        REQUIRE(r.converged);
        CHECK(r.value == Catch::Approx(-0.09947).margin(1e-5));
        CHECK(r.value ==
              Catch::Approx(s_distribution(StateSpec::fock(1), 0.0, -0.6)).margin(1e-6));
    }
    SECTION("identity channel reduces termwise to the direct series") {
        const ChannelParams ch(1.0, 0.0);
        const DensityMatrix dm = build_density_matrix(StateSpec::fock(1), 64);
        const CountDistribution counts = count_distribution(dm, 0.3, 0.8, 64);
        const SeriesResult direct = wall_series(counts, 0.9, 0.8, 1e-9);
        const SeriesResult compensated =
            modified_series(counts, GaussianWitness(0.9, 0.3), ch, 0.8, 1e-9);
        CHECK(compensated.value == direct.value);
        CHECK(compensated.terms_used == direct.terms_used);
        CHECK(compensated.ratio == direct.ratio);
    }
    SECTION("narrow effective width diverges") {
        const ChannelParams ch(0.8, 1.0);
        const DensityMatrix noisy = apply_channel_dm(
            build_density_matrix(StateSpec::fock(1), 64), ch, thermal_ancilla_dim(1.0));
        const CountDistribution counts = count_distribution(noisy, 0.0, 1.0, 64);
        const SeriesResult r =
            modified_series(counts, GaussianWitness(0.5, 0.0), ch, 1.0, 1e-9);
        CHECK(r.ratio == Catch::Approx(4.0).epsilon(1e-12)); // a2_eff = 0.2
        CHECK_FALSE(r.converged);
    }
    SECTION("noise past the witness threshold is rejected outright") {
        const ChannelParams ch(0.5, 1.0);
        const CountDistribution counts{std::vector<double>{1.0}, 0.0};
        CHECK_THROWS_AS(modified_series(counts, GaussianWitness(0.9, 0.0), ch, 1.0, 1e-9),
                        numerics_error);
    }
}

TEST_CASE("convergence flag flips exactly at the half-width boundary") {
    const DensityMatrix f1 = build_density_matrix(StateSpec::fock(1), 64);

    SECTION("direct series, unit detector efficiency") {
        const CountDistribution counts = count_distribution(f1, 0.0, 1.0, 64);
        double flip = -1.0;
        for (double a2 = 0.45; a2 < 0.55; a2 += 1e-3) {
            if (wall_series(counts, a2, 1.0, 1e-8).converged) {
                flip = a2;
                break;
            }
        }
        CHECK(flip == Catch::Approx(0.5).margin(1.1e-3));
    }
    SECTION("direct series on a thermal state, lossy detector") {
        const DensityMatrix th = build_density_matrix(StateSpec::thermal(0.6), 64);
        const CountDistribution counts = count_distribution(th, 0.0, 0.8, 64);
        double flip = -1.0;
        for (double a2 = 0.575; a2 < 0.675; a2 += 1e-3) {
            if (wall_series(counts, a2, 0.8, 1e-8).converged) {
                flip = a2;
                break;
            }
        }
        CHECK(flip == Catch::Approx(0.625).margin(1.1e-3));
    }
    SECTION("compensated series in the witness width") {
        const ChannelParams ch(0.8, 0.3);
        const DensityMatrix noisy =
            apply_channel_dm(f1, ch, thermal_ancilla_dim(0.3));
        const CountDistribution counts = count_distribution(noisy, 0.0, 1.0, 64);
        // eta_h (eta a2 - nbar(1-eta)) = 1/2  =>  a2* = 0.7
        double flip = -1.0;
        for (double a2 = 0.65; a2 < 0.75; a2 += 1e-3) {
            if (modified_series(counts, GaussianWitness(a2, 0.0), ch, 1.0, 1e-8)
                    .converged) {
                flip = a2;
                break;
            }
        }
        CHECK(flip == Catch::Approx(0.7).margin(1.1e-3));
    }
}

TEST_CASE("seeded sampling is deterministic and statistically sane") {
    const DensityMatrix f1 = build_density_matrix(StateSpec::fock(1), 64);
    const CountDistribution bernoulli = count_distribution(f1, 0.0, 0.6, 8);

    SECTION("validation and determinism") {
        CHECK_THROWS_AS(sample_counts(bernoulli, 0, 1), validation_error);
        const auto h1 = sample_counts(bernoulli, 10000, 77);
        const auto h2 = sample_counts(bernoulli, 10000, 77);
        CHECK(h1 == h2);
        std::uint64_t total = 0;
        for (auto c : h1) total += c;
        CHECK(total == 10000);
    }
    SECTION("empirical frequency lands within three binomial errors") {
        const auto h = sample_counts(bernoulli, 1000000, 4242);
        const double p1 = static_cast<double>(h[1]) / 1e6;
        CHECK(std::abs(p1 - 0.6) < 3.0 * std::sqrt(0.6 * 0.4 / 1e6));
    }
    SECTION("degenerate distributions sample deterministically") {
        const DensityMatrix vac = build_density_matrix(StateSpec::fock(0), 8);
        const auto h = sample_counts(count_distribution(vac, 0.0, 1.0, 8), 500, 9);
        CHECK(h[0] == 500);
    }
}

TEST_CASE("shot-noise reconstruction") {
    const DensityMatrix f1 = build_density_matrix(StateSpec::fock(1), 64);

    SECTION("exact frequencies reproduce the series value") {
        // P = {0, 1}: the empirical estimate is bit-identical with zero spread
        const CountDistribution counts = count_distribution(f1, 0.0, 1.0, 64);
        const SeriesResult exact = wall_series(counts, 0.75, 1.0, 1e-9);
        const auto h = sample_counts(counts, 100000, 3);
        const ShotNoiseEstimate est = reconstruct_with_shot_noise(h, 0.75, 1.0);
        CHECK(est.estimate == exact.value);
        CHECK(est.std_error == 0.0);
    }
    SECTION("coverage at four standard errors on a dispersive distribution") {
        const CountDistribution counts = count_distribution(f1, 0.0, 0.6, 64);
        const SeriesResult exact = wall_series(counts, 1.0, 0.6, 1e-9);
        int covered = 0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto h = sample_counts(counts, 100000, seed);
            const ShotNoiseEstimate est = reconstruct_with_shot_noise(h, 1.0, 0.6);
            if (std::abs(est.estimate - exact.value) <= 4.0 * est.std_error) ++covered;
        }
        CHECK(covered >= 19);
    }
    SECTION("alternating weights amplify the variance") {
        const CountDistribution counts =
            count_distribution(f1, Complex(0.4, 0.2), 0.9, 64);
        const auto h = sample_counts(counts, 50000, 7);
        // base magnitudes 0.9 vs 0.1 at the same data
        const ShotNoiseEstimate wide =
            reconstruct_with_shot_noise(h, 1.0 / 1.9 / 0.9, 0.9);
        const ShotNoiseEstimate tight =
            reconstruct_with_shot_noise(h, 1.0 / 1.1 / 0.9, 0.9);
        CHECK(wide.std_error > tight.std_error);
    }
    SECTION("divergent functionals are refused") {
        const auto h = sample_counts(count_distribution(f1, 0.0, 1.0, 8), 100, 1);
        CHECK_THROWS_WITH(reconstruct_with_shot_noise(h, 0.4, 1.0),
                          ContainsSubstring("divergent"));
    }
    SECTION("modified-series overload matches its prefactor") {
        const ChannelParams ch(0.9, 0.5);
        const DensityMatrix noisy = apply_channel_dm(
            build_density_matrix(StateSpec::fock(1), 64), ch, thermal_ancilla_dim(0.5));
        const CountDistribution counts = count_distribution(noisy, 0.0, 1.0, 64);
        const SeriesResult series =
            modified_series(counts, GaussianWitness(0.8, 0.0), ch, 1.0, 1e-9);
        const auto h = sample_counts(counts, 200000, 99);
        const ShotNoiseEstimate est =
            reconstruct_with_shot_noise(h, GaussianWitness(0.8, 0.0), ch, 1.0);
        CHECK(std::abs(est.estimate - series.value) <= 5.0 * est.std_error);
        CHECK(est.std_error > 0.0);
    }
}
