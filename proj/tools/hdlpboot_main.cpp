// Command-line front end: one invocation runs one size or power
// experiment (power when --alt is given) and writes the curve as CSV
// or JSON to stdout or --out.
//
// Exit codes: 0 success, 2 configuration problem, 3 numerical failure.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hdlpboot/config_json.hpp"
#include "hdlpboot/hdlpboot.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw hdlpboot::ConfigError("config: cannot read file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
    using namespace hdlpboot;

    CLI::App app{
        "hdlpboot: bootstrap tests of high-dimensional means via lp-norm statistics.\n"
        "Runs a Monte Carlo size experiment (or power experiment when --alt is set)\n"
        "and prints the rejection-rate curve."};

    std::string config_path;
    std::string dgp_s, stat_s, method_s, cov_s, alpha_s, alt_s, out_path;
    std::string format = "csv";
    std::uint64_t d = 0, n = 0, B = 0, reps = 0, seed = 0, workers = 0;

    app.add_option("--config", config_path, "JSON config file; explicit flags override it");
    auto* o_dgp = app.add_option(
        "--dgp", dgp_s,
        "data-generating process: equicorr|toeplitz|banded|t4toeplitz|gauss[:<cov>]");
    auto* o_d = app.add_option("--d", d, "data dimension");
    auto* o_n = app.add_option("--n", n, "sample size");
    auto* o_B = app.add_option("--B", B, "Monte Carlo proxy draws per replication");
    auto* o_reps = app.add_option("--reps", reps, "number of replications");
    auto* o_stat = app.add_option(
        "--stat", stat_s,
        "statistic: l2|linf|logt|w|v|student-l2|student-linf|postsel:<p>:<B>");
    auto* o_method =
        app.add_option("--method", method_s, "proxy: gaussian|spherical[:s]|multiplier");
    auto* o_cov =
        app.add_option("--cov", cov_s, "covariance estimate: naive|threshold[:lambda]|band[:k]");
    auto* o_alpha =
        app.add_option("--alpha", alpha_s, "comma list of nominal levels, or grid99");
    auto* o_alt = app.add_option("--alt", alt_s,
                                 "alternative <s>:<delta>[:<support-seed>]; runs power");
    auto* o_seed = app.add_option("--seed", seed, "master seed");
    auto* o_workers =
        app.add_option("--workers", workers, "worker threads (default: HDLPBOOT_WORKERS or 1)");
    app.add_option("--out", out_path, "output path (default: stdout)");
    app.add_option("--format", format, "output format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        SimConfig cfg;
        bool config_file_had_workers = false;
        if (!config_path.empty()) {
            const std::string text = read_file(config_path);
            cfg = config_from_json(text);
            config_file_had_workers = text.find("\"workers\"") != std::string::npos;
        }
        if (o_dgp->count()) cfg.dgp = parse_dgp(dgp_s);
        if (o_d->count()) cfg.d = static_cast<std::size_t>(d);
        if (o_n->count()) cfg.n = static_cast<std::size_t>(n);
        if (o_B->count()) cfg.B = static_cast<std::size_t>(B);
        if (o_reps->count()) cfg.reps = static_cast<std::size_t>(reps);
        if (o_stat->count()) cfg.stat = parse_stat(stat_s);
        if (o_method->count()) cfg.method = parse_method(method_s);
        if (o_cov->count()) cfg.cov = parse_cov(cov_s);
        if (o_alpha->count()) cfg.alpha = parse_alpha(alpha_s);
        if (o_alt->count()) cfg.alt = parse_alt(alt_s);
        if (o_seed->count()) cfg.seed = seed;

        // workers precedence: flag, config file, environment, 1
        if (o_workers->count()) {
            cfg.workers = static_cast<std::size_t>(workers);
        } else if (!config_file_had_workers) {
            if (const char* env = std::getenv("HDLPBOOT_WORKERS"))
                cfg.workers = static_cast<std::size_t>(detail::parse_uint(env));
        }

        const SizeCurve curve =
            cfg.alt ? run_power_experiment(cfg) : run_size_experiment(cfg);
        const std::string text = format == "json" ? to_json(curve) : to_csv(curve);

        if (out_path.empty()) {
            std::cout << text;
        } else {
            std::ofstream out(out_path, std::ios::binary);
            if (!out) {
                std::cerr << "error: cannot write '" << out_path << "'\n";
                return 1;
            }
            out << text;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const AlphaGridError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
