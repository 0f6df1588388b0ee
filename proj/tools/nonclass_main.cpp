// Command-line front end: threshold queries, phase-space grids, witness
// means, unbalanced-homodyne reconstruction, Bochner certification.
// Output is plot-ready CSV or JSON; identical invocations (including the
// seed) produce byte-identical files.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nonclass/bochner.hpp"
#include "nonclass/channel.hpp"
#include "nonclass/grid.hpp"
#include "nonclass/homodyne.hpp"
#include "nonclass/json_io.hpp"
#include "nonclass/states.hpp"
#include "nonclass/witness.hpp"

namespace {

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("NONCLASS_LOG");
        if (!env) return LogLevel::quiet;
        const std::string v(env);
        if (v == "debug") return LogLevel::debug;
        if (v == "info") return LogLevel::info;
        return LogLevel::quiet;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::info) std::cerr << "nonclass: " << msg << "\n";
}

void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::debug) std::cerr << "nonclass[debug]: " << msg << "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw nonclass::validation_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// --state accepts either a filename or an inline JSON document.
nonclass::StateSpec load_state(const std::string& arg) {
    const auto first = arg.find_first_not_of(" \t\n");
    if (first != std::string::npos && (arg[first] == '{' || arg[first] == '['))
        return nonclass::parse_state_spec(arg);
    log_debug("reading state spec from " + arg);
    return nonclass::parse_state_spec(read_file(arg));
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_output(const std::string& content, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw nonclass::validation_error("cannot write file: " + out_path);
    out << content;
    log_info("wrote " + out_path);
}

struct CommonArgs {
    std::string state_arg;
    std::string format = "json";
    std::string out_path;
    double eta = -1.0; // < 0 means "no channel given"
    double nbar = 0.0;

    bool has_channel() const { return eta >= 0.0; }
    nonclass::ChannelParams channel() const { return {eta, nbar}; }
};

void add_channel_flags(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--eta", args.eta, "channel efficiency in [0, 1]");
    cmd->add_option("--nbar", args.nbar, "mean thermal photons of the bath")
        ->check(CLI::NonNegativeNumber);
}

int run(int argc, char** argv) {
    CLI::App app{"nonclassicality tests for clean and thermal-noisy bosonic states"};
    app.require_subcommand(1);

    CommonArgs args;
    double a2 = 0.5;
    double gamma_re = 0.0, gamma_im = 0.0;
    double eta_h = 1.0;
    double s_param = 0.0;
    bool s_given = false;
    double grid_radius = 4.0, grid_step = 0.05;
    std::string points_path;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;

    auto* threshold_cmd =
        app.add_subcommand("threshold", "maximal thermal occupation that can leave "
                                        "any nonclassicality intact");
    threshold_cmd->add_option("--eta", args.eta, "channel efficiency")->required();
    threshold_cmd->add_option("--format", args.format, "json");
    threshold_cmd->add_option("--out", args.out_path, "output path (default stdout)");

    auto* pfunc_cmd = app.add_subcommand(
        "pfunc", "s-parameterized distribution on a square grid; with a channel, "
                 "the output-state P-function");
    pfunc_cmd->add_option("--state", args.state_arg, "state spec file or inline JSON")
        ->required();
    pfunc_cmd->add_option("--s", s_param, "ordering parameter, s < 1")
        ->each([&](const std::string&) { s_given = true; });
    add_channel_flags(pfunc_cmd, args);
    pfunc_cmd->add_option("--grid-radius", grid_radius, "half side of the grid");
    pfunc_cmd->add_option("--grid-step", grid_step, "grid spacing");
    pfunc_cmd->add_option("--format", args.format, "csv | json");
    pfunc_cmd->add_option("--out", args.out_path, "output path (default stdout)");

    auto* witness_cmd = app.add_subcommand(
        "witness", "Gaussian witness means: clean, noise-compensated, uncompensated");
    witness_cmd->add_option("--state", args.state_arg, "state spec file or inline JSON")
        ->required();
    witness_cmd->add_option("--a2", a2, "witness width a^2 > 0")->required();
    witness_cmd->add_option("--gamma-re", gamma_re, "witness center, real part");
    witness_cmd->add_option("--gamma-im", gamma_im, "witness center, imaginary part");
    add_channel_flags(witness_cmd, args);
    witness_cmd->add_option("--format", args.format, "json");
    witness_cmd->add_option("--out", args.out_path, "output path (default stdout)");

    auto* homodyne_cmd = app.add_subcommand(
        "homodyne", "photon-count reconstruction of the witness mean, with "
                    "optional seeded shot noise");
    homodyne_cmd->add_option("--state", args.state_arg, "state spec file or inline JSON")
        ->required();
    homodyne_cmd->add_option("--a2", a2, "witness width a^2 > 0")->required();
    homodyne_cmd->add_option("--gamma-re", gamma_re, "displacement, real part");
    homodyne_cmd->add_option("--gamma-im", gamma_im, "displacement, imaginary part");
    homodyne_cmd->add_option("--eta-h", eta_h, "homodyne detection efficiency (0, 1]");
    add_channel_flags(homodyne_cmd, args);
    homodyne_cmd->add_option("--shots", shots, "Monte Carlo shots (0 = exact only)");
    homodyne_cmd->add_option("--seed", seed, "RNG seed for the shot sampler");
    homodyne_cmd->add_option("--format", args.format, "json | csv (csv = P_n table)");
    homodyne_cmd->add_option("--out", args.out_path, "output path (default stdout)");

    auto* bochner_cmd = app.add_subcommand(
        "bochner", "discrete positive-definiteness certificate on a point set");
    bochner_cmd->add_option("--state", args.state_arg, "state spec file or inline JSON")
        ->required();
    bochner_cmd->add_option("--points", points_path, "JSON file with [{re, im}, ...]")
        ->required();
    add_channel_flags(bochner_cmd, args);
    bochner_cmd->add_option("--format", args.format, "json");
    bochner_cmd->add_option("--out", args.out_path, "output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    using nonclass::Complex;
    const Complex gamma(gamma_re, gamma_im);

    if (threshold_cmd->parsed()) {
        if (args.eta == 1.0)
            throw nonclass::validation_error("threshold: unbounded at eta = 1");
        const double value = nonclass::thermal_threshold(args.eta);
        write_output(nlohmann::json{{"nbar_max", value}}.dump() + "\n", args.out_path);
        return 0;
    }

    if (pfunc_cmd->parsed()) {
        if (s_given == args.has_channel())
            throw nonclass::validation_error(
                "pfunc: give exactly one of --s or a channel (--eta [--nbar])");
        const nonclass::StateSpec spec = load_state(args.state_arg);
        const nonclass::PhaseGrid grid(grid_radius, grid_step);
        log_info("pfunc grid " + std::to_string(grid.points_per_axis()) + "^2 points");

        auto value_at = [&](Complex alpha) {
            return args.has_channel()
                       ? nonclass::output_p_value(spec, args.channel(), alpha)
                       : nonclass::s_distribution(spec, alpha, s_param);
        };

        if (args.format == "csv") {
            std::string csv = "re,im,value\n";
            for (Complex alpha : grid.points())
                csv += format_double(alpha.real()) + "," + format_double(alpha.imag()) +
                       "," + format_double(value_at(alpha)) + "\n";
            write_output(csv, args.out_path);
        } else if (args.format == "json") {
            nlohmann::json rows = nlohmann::json::array();
            for (Complex alpha : grid.points())
                rows.push_back({alpha.real(), alpha.imag(), value_at(alpha)});
            write_output(nlohmann::json{{"rows", std::move(rows)}}.dump() + "\n",
                         args.out_path);
        } else {
            throw nonclass::validation_error("pfunc: format must be csv or json");
        }
        return 0;
    }

    if (witness_cmd->parsed()) {
        if (args.format != "json")
            throw nonclass::validation_error("witness: only json output");
        const nonclass::StateSpec spec = load_state(args.state_arg);
        const nonclass::GaussianWitness w(a2, gamma);
        nlohmann::json out{{"clean_mean", nonclass::gaussian_witness_mean(spec, w)}};
        if (args.has_channel()) {
            const nonclass::ChannelParams ch = args.channel();
            out["uncompensated_mean"] = nonclass::uncompensated_noisy_mean(spec, ch, w);
            const double a2_eff = ch.eta * a2 - ch.nbar * (1.0 - ch.eta);
            out["scondition_ok"] = a2_eff > 0.0;
            if (a2_eff > 0.0) {
                const auto cw = nonclass::compensate_gaussian(w, ch);
                out["compensated_mean"] = nonclass::compensated_witness_mean(spec, ch, cw);
            } else {
                out["compensated_mean"] = nullptr;
            }
        } else {
            out["scondition_ok"] = true;
        }
        write_output(out.dump() + "\n", args.out_path);
        return 0;
    }

    if (homodyne_cmd->parsed()) {
        const nonclass::StateSpec spec = load_state(args.state_arg);
        const nonclass::GaussianWitness w(a2, gamma);
        const int dim = nonclass::default_fock_dim;
        constexpr double series_tol = 1e-9;

        nonclass::DensityMatrix dm = nonclass::build_density_matrix(spec, dim);
        Complex displacement = gamma;
        if (args.has_channel()) {
            const nonclass::ChannelParams ch = args.channel();
            log_info("applying channel eta=" + std::to_string(ch.eta) +
                     " nbar=" + std::to_string(ch.nbar));
            dm = nonclass::apply_channel_dm(dm, ch,
                                            nonclass::thermal_ancilla_dim(ch.nbar));
            displacement = gamma * std::sqrt(ch.eta);
        }
        const nonclass::CountDistribution counts =
            nonclass::count_distribution(dm, displacement, eta_h, dim);

        if (args.format == "csv") {
            std::string csv = "n,p\n";
            for (std::size_t n = 0; n < counts.probs.size(); ++n)
                csv += std::to_string(n) + "," + format_double(counts.probs[n]) + "\n";
            write_output(csv, args.out_path);
            return 0;
        }
        if (args.format != "json")
            throw nonclass::validation_error("homodyne: format must be json or csv");

        const nonclass::SeriesResult series =
            args.has_channel()
                ? nonclass::modified_series(counts, w, args.channel(), eta_h, series_tol)
                : nonclass::wall_series(counts, a2, eta_h, series_tol);
        if (series.ratio >= 1.0)
            throw nonclass::numerics_error(
                "homodyne: series diverges (ratio " + std::to_string(series.ratio) +
                " >= 1); larger eta_h * width needed");

        nlohmann::json out{
            {"series", nonclass::to_json(series)},
            {"counts", {{"dim", counts.probs.size()}, {"tail_mass", counts.tail_mass}}},
        };
        if (shots > 0) {
            const auto histogram = nonclass::sample_counts(counts, shots, seed);
            const auto estimate =
                args.has_channel()
                    ? nonclass::reconstruct_with_shot_noise(histogram, w,
                                                            args.channel(), eta_h)
                    : nonclass::reconstruct_with_shot_noise(histogram, a2, eta_h);
            nlohmann::json sn = nonclass::to_json(estimate);
            sn["seed"] = seed;
            out["shot_noise"] = std::move(sn);
        }
        write_output(out.dump() + "\n", args.out_path);
        return 0;
    }

    if (bochner_cmd->parsed()) {
        if (args.format != "json")
            throw nonclass::validation_error("bochner: only json output");
        const nonclass::StateSpec spec = load_state(args.state_arg);
        const auto points = nonclass::parse_points(read_file(points_path));
        nonclass::CharFn phi = nonclass::char_fn(spec);
        if (args.has_channel())
            phi = nonclass::apply_channel_charfn(std::move(phi), args.channel());
        const nonclass::BochnerReport report = nonclass::certify(phi, points);
        log_info(std::string("bochner verdict: ") + nonclass::to_string(report.verdict));
        write_output(nonclass::to_json(report).dump() + "\n", args.out_path);
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    const bool json_mode = [&] {
        for (int i = 1; i + 1 < argc; ++i)
            if (std::string(argv[i]) == "--format" && std::string(argv[i + 1]) == "csv")
                return false;
        return true;
    }();

    try {
        return run(argc, argv);
    } catch (const nonclass::validation_error& e) {
        if (json_mode) std::cout << nlohmann::json{{"error", e.what()}}.dump() << "\n";
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const nonclass::numerics_error& e) {
        if (json_mode) std::cout << nlohmann::json{{"error", e.what()}}.dump() << "\n";
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        if (json_mode) std::cout << nlohmann::json{{"error", e.what()}}.dump() << "\n";
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
