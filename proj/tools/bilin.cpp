// Command line driver for the experiment tables.
//
//   bilin <experiment> [options]     experiments: weyl gauss minorarc bessel approx
//                                    sampling padic v2growth ibp iw
//   bilin --config run.cfg padic     key = value lines; flags on the command line win
//
// The table goes to --out (stdout when empty); verdict lines go to stderr.

#include <charconv>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bilin/experiments.hpp"

namespace {

template <class T>
std::vector<T> parse_list(const std::string& text, const char* what) {
    std::vector<T> out;
    std::size_t pos = 0;
    while (pos <= text.size() && !text.empty()) {
        const std::size_t end = std::min(text.find(',', pos), text.size());
        T v{};
        const char* b = text.data() + pos;
        const char* e = text.data() + end;
        while (b < e && *b == ' ') ++b;
        while (e > b && e[-1] == ' ') --e;
        auto res = std::from_chars(b, e, v);
        if (res.ec != std::errc() || res.ptr != e) throw CLI::ValidationError(what, "bad list entry in '" + text + "'");
        out.push_back(v);
        pos = end + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace bilin::exp;
    CLI::App app{"Numerical experiments for bilinear polynomial averages"};
    app.set_config("--config", "", "key = value configuration file");
    app.require_subcommand(1);

    ExperimentConfig cfg;
    std::string n_list, q_list, p_list, l_list, depth_list, format = "csv";
    unsigned c0_threshold = cfg.iw.c0_threshold;
    double rho = cfg.iw.rho;
    std::uint64_t q_cap = cfg.iw.q_cap;

    app.add_option("--out", cfg.out, "output file (stdout when omitted)");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--seed", cfg.seed, "64-bit seed");
    app.add_option("--rho", rho, "Ionescu-Wainger exponent rho in (0, 1)");
    app.add_option("--qmax", cfg.qmax, "largest denominator (gauss, iw)");
    app.add_option("--threads", cfg.threads, "worker threads")->check(CLI::Range(1u, 256u));
    // Config files split "3,5" into two values; join them back into one list.
    app.add_option("--poly", cfg.poly, "coefficients low to high, e.g. 0,0,1 for n^2")->multi_option_policy(CLI::MultiOptionPolicy::Join)->delimiter(',');
    app.add_option("--N", n_list, "comma list of scales N")->multi_option_policy(CLI::MultiOptionPolicy::Join)->delimiter(',');
    app.add_option("--q", q_list, "comma list of moduli q")->multi_option_policy(CLI::MultiOptionPolicy::Join)->delimiter(',');
    app.add_option("--p", p_list, "comma list of primes p")->multi_option_policy(CLI::MultiOptionPolicy::Join)->delimiter(',');
    app.add_option("--l", l_list, "comma list of heights l")->multi_option_policy(CLI::MultiOptionPolicy::Join)->delimiter(',');
    app.add_option("--depths", depth_list, "comma list of martingale depths")->multi_option_policy(CLI::MultiOptionPolicy::Join)->delimiter(',');
    app.add_option("--jmax", cfg.jmax, "largest exponent j of p^j");
    app.add_option("--s", cfg.s, "exponent s of the L^s norm");
    app.add_option("--shift", cfg.scale_shift, "scale offset s of the major-arc cutoffs (approx)");
    app.add_option("--modulus", cfg.modulus, "cyclic group size M (bessel, approx)");
    app.add_option("--trials", cfg.trials, "random search trials (v2growth)");
    app.add_option("--draws", cfg.draws, "random draws");
    app.add_option("--band", cfg.band, "band limit c0 in (0, 1/2) (sampling)");
    app.add_option("--c0-threshold", c0_threshold, "heights below this use the trivial branch");
    app.add_option("--qcap", q_cap, "largest enumerated denominator");
    app.add_option("--C0", cfg.C0);
    app.add_option("--C1", cfg.C1);
    app.add_option("--C2", cfg.C2);
    app.add_option("--C3", cfg.C3);

    const std::vector<std::pair<std::string, std::string>> subs = {
        {"weyl", "Weyl sums at the golden ratio and on a minor-arc grid"},
        {"gauss", "complete exponential sums for n^2 and n^3"},
        {"minorarc", "modulated-bump example: l^1 size of the average against q"},
        {"bessel", "square sums of paraproduct pieces over dyadic scales"},
        {"approx", "major-arc model residual against N"},
        {"sampling", "norm ratios of the sampling map from R x Z/QZ to Z"},
        {"padic", "counting functions of P on Z/p^jZ"},
        {"v2growth", "search for large quadratic variation of martingale projections"},
        {"ibp", "integration-by-parts identity residuals"},
        {"iw", "Ionescu-Wainger heights of reduced fractions"}};
    std::string iw_action = "heights";
    for (const auto& [name, help] : subs) {
        auto* sub = app.add_subcommand(name, help)->fallthrough();
        sub->callback([&cfg, n = name] { cfg.experiment = n; });
        if (name == "iw") sub->add_option("action", iw_action, "what to dump")->check(CLI::IsMember({"heights"}));
    }

    CLI11_PARSE(app, argc, argv);

    Table table;
    try {
        cfg.format = format == "json" ? Format::json : Format::csv;
        cfg.iw = bilin::IWConfig(rho, c0_threshold, q_cap);
        cfg.n_values = parse_list<std::int64_t>(n_list, "--N");
        cfg.q_values = parse_list<std::int64_t>(q_list, "--q");
        cfg.p_values = parse_list<std::uint64_t>(p_list, "--p");
        cfg.l_values = parse_list<unsigned>(l_list, "--l");
        cfg.depths = parse_list<unsigned>(depth_list, "--depths");
        run(cfg, table);
    } catch (const std::exception& e) {
        if (!table.columns.empty() || !table.rows.empty()) {
            if (cfg.out.empty()) {
                emit(std::cout, table, cfg);
            } else {
                std::ofstream os(cfg.out, std::ios::binary);
                emit(os, table, cfg);
            }
        }
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    if (cfg.out.empty()) {
        emit(std::cout, table, cfg);
    } else {
        std::ofstream os(cfg.out, std::ios::binary);
        if (!os) {
            std::cerr << "error: cannot open " << cfg.out << '\n';
            return 2;
        }
        emit(os, table, cfg);
    }
    write_verdicts(std::cerr, table);
    return 0;
}
