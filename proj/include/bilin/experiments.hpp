#pragma once

// Experiment configurations, result tables with per-row config hashes, CSV/JSON emitters, and the
// experiment runners behind the command line tool. Every runner is deterministic for a fixed
// config: randomness comes from counter-indexed splitmix64 streams, and parallel loops write fixed
// slots that are emitted in parameter order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "bilin/averages.hpp"
#include "bilin/iw.hpp"
#include "bilin/martingale.hpp"
#include "bilin/numbers.hpp"
#include "bilin/padic.hpp"
#include "bilin/polyops.hpp"
#include "bilin/rng.hpp"
#include "bilin/signals.hpp"
#include "bilin/spectral.hpp"
#include "bilin/variation.hpp"

namespace bilin::exp {

enum class Format { csv, json };

/// Empty lists and zero limits select each experiment's own defaults.
struct ExperimentConfig {
    std::string experiment;
    std::string poly = "0,0,1";
    std::vector<std::int64_t> n_values;
    std::vector<std::int64_t> q_values;
    std::vector<std::uint64_t> p_values;
    std::vector<unsigned> l_values;
    std::vector<unsigned> depths;
    std::int64_t qmax = 0;
    unsigned jmax = 9;
    double s = 1.8;
    int scale_shift = 1;
    std::size_t modulus = 0;
    std::size_t trials = 512;
    std::size_t draws = 100;
    double band = 0.25;
    IWConfig iw;
    std::uint64_t seed = 1;
    unsigned C0 = 2, C1 = 4, C2 = 4, C3 = 16;
    std::string out;
    Format format = Format::csv;
    unsigned threads = 1;

    void validate() const {
        static const std::vector<std::string> known = {"weyl",     "gauss",    "minorarc", "bessel", "approx",
                                                       "sampling", "padic",    "v2growth", "ibp",    "iw"};
        if (std::find(known.begin(), known.end(), experiment) == known.end()) {
            throw std::invalid_argument("unknown experiment '" + experiment + "'");
        }
        iw.validate();
        IntPolynomial::parse(poly);
        if (!(C0 < C1 && C1 <= C2 && C2 < C3)) throw std::invalid_argument("config: need C0 < C1 <= C2 < C3");
        if (jmax == 0 || jmax > 24) throw std::invalid_argument("config: jmax must lie in [1, 24]");
        if (trials == 0 || draws == 0) throw std::invalid_argument("config: trials and draws must be positive");
        if (!(band > 0 && band < 0.5)) throw std::invalid_argument("config: band must lie in (0, 1/2)");
        for (auto N : n_values) {
            if (N < 1) throw std::invalid_argument("config: N values must be positive");
        }
        for (auto q : q_values) {
            if (q < 1) throw std::invalid_argument("config: q values must be positive");
        }
        for (auto K : depths) {
            if (K > 16) throw std::invalid_argument("config: depths must be at most 16");
        }
    }

    /// u = floor(C2 2^{2 rho l}).
    int u_parameter(unsigned l) const {
        return static_cast<int>(std::floor(C2 * std::exp2(2.0 * iw.rho * l)));
    }

    /// l_(N) = floor(C0 log2 log2 N), zero for N < 4.
    unsigned l_of_N(std::int64_t N) const {
        if (N < 4) return 0;
        return static_cast<unsigned>(std::floor(C0 * std::log2(std::log2(static_cast<double>(N)))));
    }

    /// Canonical key/value list; output path and thread count do not affect results and are left out.
    std::vector<std::pair<std::string, std::string>> canonical() const {
        auto join = [](const auto& v) {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
            return s;
        };
        using detail::format_double;
        return {{"experiment", experiment},
                {"poly", IntPolynomial::parse(poly).to_string()},
                {"n", join(n_values)},
                {"q", join(q_values)},
                {"p", join(p_values)},
                {"l", join(l_values)},
                {"depths", join(depths)},
                {"qmax", std::to_string(qmax)},
                {"jmax", std::to_string(jmax)},
                {"s", format_double(s)},
                {"scale_shift", std::to_string(scale_shift)},
                {"modulus", std::to_string(modulus)},
                {"trials", std::to_string(trials)},
                {"draws", std::to_string(draws)},
                {"band", format_double(band)},
                {"rho", format_double(iw.rho)},
                {"c0_threshold", std::to_string(iw.c0_threshold)},
                {"q_cap", std::to_string(iw.q_cap)},
                {"seed", std::to_string(seed)},
                {"C0", std::to_string(C0)},
                {"C1", std::to_string(C1)},
                {"C2", std::to_string(C2)},
                {"C3", std::to_string(C3)},
                {"format", format == Format::csv ? "csv" : "json"}};
    }

    /// FNV-1a 64 over the canonical key/value lines, as 16 hex digits.
    std::string hash() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (const auto& [k, v] : canonical()) {
            for (char c : k + "=" + v + "\n") {
                h ^= static_cast<unsigned char>(c);
                h *= 0x100000001b3ULL;
            }
        }
        static constexpr char hex[] = "0123456789abcdef";
        std::string s(16, '0');
        for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = hex[h & 0xf];
        return s;
    }
};

using Cell = std::variant<std::int64_t, double, std::string>;

struct Verdict {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double bound = 0.0;
    std::size_t row_first = 0, row_last = 0;  ///< inclusive row range the check covers
    std::string note;
};

struct Table {
    std::string experiment;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<Verdict> verdicts;

    void add(std::vector<Cell> row) {
        if (row.size() != columns.size()) throw std::logic_error("Table::add: row width mismatch");
        rows.push_back(std::move(row));
    }
    std::size_t last_row() const { return rows.empty() ? 0 : rows.size() - 1; }
};

inline std::string cell_text(const Cell& c) {
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&c)) {
        if (std::isnan(*d)) return "nan";
        if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
        return detail::format_double(*d);
    }
    return std::get<std::string>(c);
}

/// Cell text quoted as in RFC 4180 when it holds a separator or quote.
inline std::string csv_field(const Cell& c) {
    std::string s = cell_text(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

inline void write_csv(std::ostream& os, const Table& t, const std::string& hash) {
    for (const auto& c : t.columns) os << c << ',';
    os << "config_hash\n";
    for (const auto& row : t.rows) {
        for (const auto& c : row) os << csv_field(c) << ',';
        os << hash << '\n';
    }
}

inline void write_verdicts(std::ostream& os, const Table& t) {
    for (const auto& v : t.verdicts) {
        os << (v.passed ? "PASS " : "FAIL ") << t.experiment << '.' << v.name << " measured=" << detail::format_double(v.measured)
           << " bound=" << detail::format_double(v.bound) << " rows=" << v.row_first << '-' << v.row_last;
        if (!v.note.empty()) os << " (" << v.note << ')';
        os << '\n';
    }
}

inline nlohmann::ordered_json to_json(const Table& t, const ExperimentConfig& cfg) {
    using json = nlohmann::ordered_json;
    const std::string hash = cfg.hash();
    auto value = [](const Cell& c) -> json {
        if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
        if (const auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? json(*d) : json(cell_text(c));
        return std::get<std::string>(c);
    };
    json j;
    j["experiment"] = t.experiment;
    j["config_hash"] = hash;
    json conf = json::object();
    for (const auto& [k, v] : cfg.canonical()) conf[k] = v;
    j["config"] = conf;
    json rows = json::array();
    for (const auto& row : t.rows) {
        json r = json::object();
        for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = value(row[i]);
        r["config_hash"] = hash;
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    json verdicts = json::array();
    for (const auto& v : t.verdicts) {
        verdicts.push_back({{"name", v.name},
                            {"pass", v.passed},
                            {"measured", std::isfinite(v.measured) ? json(v.measured) : json(cell_text(v.measured))},
                            {"bound", std::isfinite(v.bound) ? json(v.bound) : json(cell_text(v.bound))},
                            {"rows", {v.row_first, v.row_last}},
                            {"note", v.note}});
    }
    j["verdicts"] = std::move(verdicts);
    return j;
}

inline void emit(std::ostream& os, const Table& t, const ExperimentConfig& cfg) {
    if (cfg.format == Format::csv) {
        write_csv(os, t, cfg.hash());
    } else {
        os << to_json(t, cfg).dump(2) << '\n';
    }
}

struct ExperimentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Least-squares slope of log2(y) against log2(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("loglog_slope: need at least two points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) mx += std::log2(x[i]), my += std::log2(y[i]);
    mx /= static_cast<double>(n), my /= static_cast<double>(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log2(x[i]) - mx;
        sxy += dx * (std::log2(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

namespace detail {

inline std::vector<std::int64_t> dyadic_range(int lo, int hi) {
    std::vector<std::int64_t> v;
    for (int k = lo; k <= hi; ++k) v.push_back(std::int64_t{1} << k);
    return v;
}

template <class T>
std::vector<T> or_default(const std::vector<T>& v, std::vector<T> fallback) {
    return v.empty() ? fallback : v;
}

inline std::vector<Complex> random_unit_vector(std::size_t n, SplitMix64& rng) {
    std::vector<Complex> v(n);
    double norm = 0.0;
    for (auto& x : v) {
        x = Complex(rng.normal(), rng.normal());
        norm += std::norm(x);
    }
    norm = std::sqrt(norm / static_cast<double>(n));
    for (auto& x : v) x /= norm;
    return v;
}

/// psi = inverse Fourier transform of eta, tabulated on [0, 8] and linearly interpolated; zero beyond.
class PsiTable {
public:
    static const PsiTable& instance() {
        static const PsiTable t;
        return t;
    }

    double operator()(double x) const {
        x = std::abs(x);
        if (x >= kRadius) return 0.0;
        const double pos = x * kPerUnit;
        const auto i = static_cast<std::size_t>(pos);
        const double w = pos - static_cast<double>(i);
        return (1.0 - w) * table_[i] + w * table_[i + 1];
    }

    static constexpr double kRadius = 8.0;

private:
    static constexpr std::size_t kPerUnit = 2048;

    PsiTable() : table_(static_cast<std::size_t>(kRadius) * kPerUnit + 2) {
        // psi(x) = sin(pi x)/(pi x) + 2 int_{1/2}^{1} eta(xi) cos(2 pi x xi) d xi.
        for (std::size_t i = 0; i < table_.size(); ++i) {
            const double x = static_cast<double>(i) / kPerUnit;
            const double sinc = x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
            auto integrand = [x](double xi) { return Complex(bump_eta(xi) * std::cos(kTwoPi * x * xi)); };
            table_[i] = sinc + 2.0 * integrate_panels(integrand, 0.5, 1.0, 8, 1e-12).value.real();
        }
    }

    std::vector<double> table_;
};

}  // namespace detail

// ---------------------------------------------------------------------------------------------
// (a) Weyl sums at a badly approximable frequency and on a minor-arc grid.

/// xi is minor at N if |xi - a/q| > 2^l / N^d for every q <= 2^l, l = l_(N).
inline bool is_minor(double xi, std::int64_t N, int d, unsigned l) {
    const double qmax = std::ldexp(1.0, static_cast<int>(l));
    const double width = qmax / std::pow(static_cast<double>(N), d);
    for (std::int64_t q = 1; q <= static_cast<std::int64_t>(qmax); ++q) {
        const double a = std::round(xi * static_cast<double>(q));
        if (std::abs(xi - a / static_cast<double>(q)) <= width) return false;
    }
    return true;
}

inline void run_weyl(const ExperimentConfig& cfg, Table& t) {
    t = Table{"weyl", {"N", "golden_abs", "minor_sup", "minor_points", "l_N"}, {}, {}};
    const IntPolynomial P = IntPolynomial::parse(cfg.poly);
    const int d = P.degree();
    const auto Ns = detail::or_default(cfg.n_values, detail::dyadic_range(4, 12));
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    constexpr std::size_t kGrid = 512;

    struct Out {
        double golden_abs = 0, sup = 0;
        std::int64_t points = 0;
    };
    std::vector<Out> out(Ns.size());
    parallel_for(Ns.size(), cfg.threads, [&](std::size_t i) {
        const std::int64_t N = Ns[i];
        out[i].golden_abs = std::abs(linear_symbol(P, N, golden, false));
        const unsigned l = cfg.l_of_N(N);
        for (std::size_t k = 0; k < kGrid; ++k) {
            const double xi = std::fmod((static_cast<double>(k) + golden) / kGrid, 1.0);
            if (!is_minor(xi, N, d, l)) continue;
            ++out[i].points;
            out[i].sup = std::max(out[i].sup, std::abs(linear_symbol(P, N, xi, false)));
        }
    });
    for (std::size_t i = 0; i < Ns.size(); ++i) {
        t.add({Ns[i], out[i].golden_abs, out[i].sup, out[i].points, static_cast<std::int64_t>(cfg.l_of_N(Ns[i]))});
    }

    double worst = 0.0;
    bool below = true, monotone = true;
    std::size_t first_mono = 0;
    for (std::size_t i = 0; i < Ns.size(); ++i) {
        worst = std::max(worst, out[i].golden_abs);
        below = below && out[i].golden_abs < 1.0;
        if (Ns[i] <= 64) first_mono = i;
        if (i > 0 && Ns[i - 1] >= 64 && out[i].golden_abs > out[i - 1].golden_abs) monotone = false;
    }
    t.verdicts.push_back({"golden_below_one", below, worst, 1.0, 0, t.last_row(), "max |E e(P(n) xi)| at xi = golden ratio"});
    t.verdicts.push_back({"golden_nonincreasing_from_64", monotone, 0.0, 0.0, first_mono, t.last_row(), ""});
    if (Ns.size() >= 2) {
        std::vector<double> x, y;
        for (std::size_t i = 0; i < Ns.size(); ++i) {
            if (out[i].sup > 0) x.push_back(static_cast<double>(Ns[i])), y.push_back(out[i].sup);
        }
        if (x.size() >= 2) {
            const double slope = loglog_slope(x, y);
            t.verdicts.push_back({"minor_sup_decays", slope < 0, slope, 0.0, 0, t.last_row(), "fitted log-log slope"});
        }
    }
}

// ---------------------------------------------------------------------------------------------
// (b) Complete exponential sums.

inline void run_gauss(const ExperimentConfig& cfg, Table& t) {
    t = Table{"gauss", {"poly", "q", "prime", "re", "im", "abs", "min_abs", "max_abs", "q_inv_sqrt"}, {}, {}};
    const std::int64_t qmax = cfg.qmax > 0 ? cfg.qmax : 101;
    const std::vector<IntPolynomial> polys = {IntPolynomial({0, 0, 1}), IntPolynomial({0, 0, 0, 1})};
    const IntPolynomial lin({0, 1});
    auto qs = cfg.q_values;
    if (qs.empty()) {
        for (std::int64_t q = 2; q <= qmax; ++q) qs.push_back(q);
    }
    struct Out {
        Complex s;
        double lo = 0, hi = 0;
    };
    std::vector<Out> out(polys.size() * qs.size());
    parallel_for(out.size(), cfg.threads, [&](std::size_t idx) {
        const auto& P = polys[idx / qs.size()];
        const std::int64_t q = qs[idx % qs.size()];
        Out o;
        o.s = complete_sum(lin, P, q, 0, 1);
        o.lo = std::numeric_limits<double>::infinity();
        for (std::int64_t a2 = 1; a2 < q; ++a2) {
            if (std::gcd(a2, q) != 1) continue;
            for (std::int64_t a1 = 0; a1 < q; ++a1) {
                const double v = std::abs(complete_sum(lin, P, q, a1, a2));
                o.lo = std::min(o.lo, v), o.hi = std::max(o.hi, v);
            }
        }
        out[idx] = o;
    });
    double worst_sq = 0.0, worst_cube = 0.0;
    std::size_t sq_last = 0;
    for (std::size_t idx = 0; idx < out.size(); ++idx) {
        const auto& P = polys[idx / qs.size()];
        const std::int64_t q = qs[idx % qs.size()];
        const bool prime = is_prime(static_cast<std::uint64_t>(q));
        const double r = 1.0 / std::sqrt(static_cast<double>(q));
        t.add({P.to_string(), q, std::int64_t{prime}, out[idx].s.real(), out[idx].s.imag(), std::abs(out[idx].s),
               out[idx].lo, out[idx].hi, r});
        if (prime && q > 2) {
            if (P.degree() == 2) {
                worst_sq = std::max({worst_sq, std::abs(out[idx].lo - r), std::abs(out[idx].hi - r)});
                sq_last = t.last_row();
            } else {
                worst_cube = std::max(worst_cube, out[idx].hi * std::sqrt(static_cast<double>(q)));
            }
        }
    }
    t.verdicts.push_back({"square_odd_primes_magnitude", worst_sq <= 1e-9, worst_sq, 1e-9, 0, sq_last,
                          "max deviation of |S| from p^{-1/2} over odd primes"});
    t.verdicts.push_back({"cube_primes_weil", worst_cube <= 2.0 + 1e-9, worst_cube, 2.0, sq_last + 1, t.last_row(),
                          "max sqrt(p) |S| for P = n^3"});
}

// ---------------------------------------------------------------------------------------------
// (c) The explicit minor-arc example: modulated bumps at frequency -1/q.

struct MinorArcPoint {
    double ratio = 0.0;    ///< ||A_N(f,g)||_1 / (||f||_2 ||g||_2)
    double weil = 0.0;     ///< |E_{Z/qZ} e((n + P(n))/q)|
};

inline MinorArcPoint minor_arc_ratio(const IntPolynomial& P, std::int64_t N, std::int64_t q, std::uint64_t seed) {
    const int d = P.degree();
    if (d < 2) throw std::invalid_argument("minor_arc_ratio: P must have degree at least 2");
    const double Nd = std::pow(static_cast<double>(N), d);
    if (Nd > std::ldexp(1.0, 22)) throw ResourceLimitError("minor_arc_ratio: N^d exceeds 2^22");
    const auto nd = static_cast<std::int64_t>(Nd);
    const auto& psi = detail::PsiTable::instance();
    const auto R = static_cast<std::int64_t>(detail::PsiTable::kRadius);
    const std::int64_t blocks = nd / N;  // j in [N^{d-1}]

    auto rng = SplitMix64::stream(seed, 0);
    std::vector<int> eps(static_cast<std::size_t>(blocks));
    for (auto& e : eps) e = rng.sign();

    // f(n) = e(-n/q) sum_j eps_j psi((n - jN)/N), supported in [N - RN, N^d + RN].
    const std::int64_t fa = N - R * N, fb = nd + R * N + 1;
    Sequence f(fa, std::vector<Complex>(static_cast<std::size_t>(fb - fa)));
    for (std::int64_t n = fa; n < fb; ++n) {
        const std::int64_t jlo = std::max<std::int64_t>(1, (n - R * N + N - 1) / N);
        const std::int64_t jhi = std::min<std::int64_t>(blocks, (n + R * N) / N);
        double s = 0.0;
        for (std::int64_t j = jlo; j <= jhi; ++j) {
            s += eps[static_cast<std::size_t>(j - 1)] * psi(static_cast<double>(n - j * N) / static_cast<double>(N));
        }
        f.values[static_cast<std::size_t>(n - fa)] = s * expi_rational(-n, q);
    }

    // g(n) = e(-n/q) psi(n/N^d); only the window reachable from supp f enters the average.
    std::int64_t ga = std::numeric_limits<std::int64_t>::max(), gb = std::numeric_limits<std::int64_t>::min();
    for (std::int64_t n = N / 2 + 1; n <= N; ++n) {
        ga = std::min(ga, fa + n - P.eval64(n));
        gb = std::max(gb, fb + n - P.eval64(n));
    }
    Sequence g(ga, std::vector<Complex>(static_cast<std::size_t>(gb - ga)));
    for (std::int64_t n = ga; n < gb; ++n) g.values[static_cast<std::size_t>(n - ga)] = psi(n / Nd) * expi_rational(-n, q);
    double g2 = 0.0;
    for (std::int64_t n = -R * nd; n <= R * nd; ++n) {
        const double v = psi(n / Nd);
        g2 += v * v;
    }

    const Sequence avg = avg_bilinear_Z(AverageSpec{IntPolynomial({0, 1}), P, N, true}, f, g);
    MinorArcPoint res;
    res.ratio = lp_norm(avg, 1.0) / (lp_norm(f, 2.0) * std::sqrt(g2));
    res.weil = std::abs(complete_sum(IntPolynomial({0, 1}), P, q, 1, 1));
    return res;
}

inline void run_minorarc(const ExperimentConfig& cfg, Table& t) {
    t = Table{"minorarc", {"N", "q", "ratio", "weil_abs", "proxy_bound", "ratio_over_proxy"}, {}, {}};
    const IntPolynomial P = IntPolynomial::parse(cfg.poly);
    const auto Ns = detail::or_default(cfg.n_values, {std::int64_t{1} << 10});
    const auto qs = detail::or_default(cfg.q_values, {3, 5, 7, 11, 13, 17, 31, 61, 97});
    std::vector<MinorArcPoint> out(Ns.size() * qs.size());
    parallel_for(out.size(), cfg.threads, [&](std::size_t i) {
        out[i] = minor_arc_ratio(P, Ns[i / qs.size()], qs[i % qs.size()], cfg.seed);
    });
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::int64_t N = Ns[i / qs.size()];
        const double proxy = out[i].weil + std::pow(static_cast<double>(N), -0.25);
        t.add({N, qs[i % qs.size()], out[i].ratio, out[i].weil, proxy, out[i].ratio / proxy});
    }
    for (std::size_t a = 0; a < Ns.size(); ++a) {
        auto find = [&](std::int64_t q) -> std::ptrdiff_t {
            auto it = std::find(qs.begin(), qs.end(), q);
            return it == qs.end() ? -1 : it - qs.begin();
        };
        const auto i3 = find(3), i97 = find(97);
        if (i3 < 0 || i97 < 0) continue;
        const double lo = out[a * qs.size() + static_cast<std::size_t>(i3)].ratio;
        const double hi = out[a * qs.size() + static_cast<std::size_t>(i97)].ratio;
        t.verdicts.push_back({"decay_q3_to_q97_N" + std::to_string(Ns[a]), lo >= 2.0 * hi, lo / hi, 2.0, a * qs.size(),
                              (a + 1) * qs.size() - 1, "ratio(q=3) / ratio(q=97)"});
    }
}

// ---------------------------------------------------------------------------------------------
// (d) Bessel inequality for paraproduct pieces across dyadic scales.

struct BesselSetup {
    std::vector<std::int64_t> scales;
    std::vector<std::vector<double>> symbols;
    double c_eta = 0.0;  ///< max_j sum_N |symbol_N(j)|^2
};

inline BesselSetup bessel_setup(std::size_t M, std::vector<std::int64_t> scales, unsigned l, int s, int u,
                                const IWConfig& cfg) {
    BesselSetup b{std::move(scales), {}, 0.0};
    std::vector<double> overlap(M, 0.0);
    for (auto N : b.scales) {
        b.symbols.push_back(paraproduct_symbol(M, N, l, s, u, 1, cfg));
        for (std::size_t j = 0; j < M; ++j) overlap[j] += b.symbols.back()[j] * b.symbols.back()[j];
    }
    b.c_eta = *std::max_element(overlap.begin(), overlap.end());
    return b;
}

inline double bessel_ratio(const BesselSetup& b, const CyclicFn& f) {
    double total = 0.0;
    for (const auto& sym : b.symbols) {
        const double n = lp_norm(apply_symbol(f, sym), 2.0);
        total += n * n;
    }
    const double nf = lp_norm(f, 2.0);
    return total / (nf * nf);
}

inline void run_bessel(const ExperimentConfig& cfg, Table& t) {
    t = Table{"bessel", {"draw", "l", "s", "u", "ratio", "c_eta"}, {}, {}};
    const std::size_t M = cfg.modulus ? cfg.modulus : 1024;
    const auto scales = detail::or_default(cfg.n_values, detail::dyadic_range(3, 10));
    const auto ls = detail::or_default(cfg.l_values, {1u});
    double worst = -std::numeric_limits<double>::infinity();
    for (unsigned l : ls) {
        const int u = cfg.u_parameter(l);
        const BesselSetup b = bessel_setup(M, scales, l, 0, u, cfg.iw);
        std::vector<double> ratios(cfg.draws);
        parallel_for(cfg.draws, cfg.threads, [&](std::size_t i) {
            auto rng = SplitMix64::stream(cfg.seed, i);
            ratios[i] = bessel_ratio(b, CyclicFn(detail::random_unit_vector(M, rng)));
        });
        for (std::size_t i = 0; i < cfg.draws; ++i) {
            t.add({static_cast<std::int64_t>(i), std::int64_t{l}, std::int64_t{0}, std::int64_t{u}, ratios[i], b.c_eta});
            worst = std::max(worst, ratios[i] - b.c_eta);
        }
    }
    t.verdicts.push_back({"bessel_below_overlap", worst <= 1e-12, worst, 0.0, 0, t.last_row(), "max ratio - C_eta"});
}

// ---------------------------------------------------------------------------------------------
// (e) Major-arc approximation residual on Z/MZ.

struct ApproxPoint {
    double residual = 0.0;  ///< E|A_N(F, G) - B_model(f, g)| / (||f||_2 ||g||_2), averaged over draws
    double main = 0.0;      ///< E|A_N(F, G)| / (||f||_2 ||g||_2), same average
};

inline ApproxPoint approx_residual(const IntPolynomial& P, std::size_t M, std::int64_t N, unsigned l1, unsigned l2,
                                   int shift, std::size_t draws, std::uint64_t seed, const IWConfig& cfg) {
    const int d = P.degree();
    const int L = log_scale(N);
    const int k1 = -L + shift, k2 = d * (-L + shift);
    const IntPolynomial lin({0, 1});
    auto symbol = [&](double x1, double x2) {
        return eta_leq(k1, x1) * eta_leq(k2, x2) * continuous_bilinear_symbol(P, N, x1, x2);
    };
    auto arith = [&](const ArithmeticFrequency& a1, const ArithmeticFrequency& a2) {
        return arithmetic_symbol(lin, P, a1, a2);
    };
    ApproxPoint res;
    for (std::size_t i = 0; i < draws; ++i) {
        auto rng = SplitMix64::stream(seed, i);
        const CyclicFn f(detail::random_unit_vector(M, rng));
        const CyclicFn g(detail::random_unit_vector(M, rng));
        const CyclicFn F = projection_pi(f, l1, k1, cfg, ArcMode::exact);
        const CyclicFn G = projection_pi(g, l2, k2, cfg, ArcMode::exact);
        const CyclicFn phys = avg_bilinear_cyclic(AverageSpec{lin, P, N, true}, F, G);
        const CyclicFn model = model_bilinear(f, g, l1, l2, k1, k2, symbol, arith, cfg);
        std::vector<Complex> diff(M);
        for (std::size_t x = 0; x < M; ++x) diff[x] = phys.values[x] - model.values[x];
        res.residual += lp_norm(CyclicFn(std::move(diff)), 1.0);
        res.main += lp_norm(phys, 1.0);
    }
    res.residual /= static_cast<double>(draws);
    res.main /= static_cast<double>(draws);
    return res;
}

inline void run_approx(const ExperimentConfig& cfg, Table& t) {
    t = Table{"approx", {"N", "l1", "l2", "shift", "residual", "main_term"}, {}, {}};
    const IntPolynomial P = IntPolynomial::parse(cfg.poly);
    const std::size_t M = cfg.modulus ? cfg.modulus : 4096;
    const auto Ns = detail::or_default(cfg.n_values, detail::dyadic_range(6, 10));
    const auto ls = detail::or_default(cfg.l_values, {1u, 1u});
    const unsigned l1 = ls.front(), l2 = ls.size() > 1 ? ls[1] : ls.front();
    const std::size_t draws = std::min<std::size_t>(cfg.draws, 4);
    std::vector<ApproxPoint> out(Ns.size());
    parallel_for(Ns.size(), cfg.threads, [&](std::size_t i) {
        out[i] = approx_residual(P, M, Ns[i], l1, l2, cfg.scale_shift, draws, cfg.seed, cfg.iw);
    });
    std::vector<double> x, y;
    for (std::size_t i = 0; i < Ns.size(); ++i) {
        t.add({Ns[i], std::int64_t{l1}, std::int64_t{l2}, std::int64_t{cfg.scale_shift}, out[i].residual, out[i].main});
        x.push_back(static_cast<double>(Ns[i]));
        y.push_back(out[i].residual);
    }
    if (x.size() >= 2) {
        const double slope = loglog_slope(x, y);
        t.verdicts.push_back({"residual_slope", slope <= -0.8, slope, -0.8, 0, t.last_row(), "fitted log-log slope in N"});
    }
}

// ---------------------------------------------------------------------------------------------
// (f) Sampling from the finite adelic grid to Z.

inline std::vector<BandTerm> random_band_terms(std::size_t Q, double c0, std::size_t count, SplitMix64& rng) {
    std::vector<BandTerm> terms(count);
    const double band = c0 / static_cast<double>(Q);
    for (auto& term : terms) {
        term.theta = rng.uniform(-band, band);
        term.residue = static_cast<std::int64_t>(rng.below(Q));
        term.amplitude = Complex(rng.normal(), rng.normal());
    }
    return terms;
}

inline void run_sampling(const ExperimentConfig& cfg, Table& t) {
    t = Table{"sampling", {"draw", "Q", "p", "ratio", "ratio_half_h"}, {}, {}};
    const auto qs = detail::or_default(cfg.q_values, {2, 3, 5, 8, 12, 16});
    const std::vector<double> ps = {1.0, 2.0, 4.0, std::numeric_limits<double>::infinity()};
    std::vector<std::array<double, 8>> out(cfg.draws);
    parallel_for(cfg.draws, cfg.threads, [&](std::size_t i) {
        const auto Q = static_cast<std::size_t>(qs[i % qs.size()]);
        auto rng = SplitMix64::stream(cfg.seed, i);
        const auto terms = random_band_terms(Q, cfg.band, 8, rng);
        const GridFn F = make_bandlimited(Q, cfg.band, terms, GridParams{1.0 / 64, 0.0});
        const GridFn Fh = make_bandlimited(Q, cfg.band, terms, GridParams{1.0 / 128, 0.0});
        for (std::size_t k = 0; k < ps.size(); ++k) {
            out[i][k] = sampling_ratio(F, ps[k]);
            out[i][4 + k] = sampling_ratio(Fh, ps[k]);
        }
    });
    double dev2 = 0.0, lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = 0; i < cfg.draws; ++i) {
        for (std::size_t k = 0; k < ps.size(); ++k) {
            t.add({static_cast<std::int64_t>(i), qs[i % qs.size()], cell_text(ps[k]), out[i][k], out[i][4 + k]});
            if (ps[k] == 2.0) {
                dev2 = std::max(dev2, std::abs(out[i][k] - 1.0));
            } else {
                lo = std::min(lo, out[i][k]), hi = std::max(hi, out[i][k]);
            }
        }
    }
    t.verdicts.push_back({"p2_isometry", dev2 <= 1e-3, dev2, 1e-3, 0, t.last_row(), "max |ratio - 1| at p = 2"});
    t.verdicts.push_back({"p_other_lower", lo >= 1.0 / 3, lo, 1.0 / 3, 0, t.last_row(), "min ratio over p in {1, 4, inf}"});
    t.verdicts.push_back({"p_other_upper", hi <= 3.0, hi, 3.0, 0, t.last_row(), "max ratio over p in {1, 4, inf}"});
}

// ---------------------------------------------------------------------------------------------
// (g) Counting functions on Z/p^jZ.

inline void run_padic(const ExperimentConfig& cfg, Table& t) {
    t = Table{"padic", {"p", "j", "ls_norm", "max_h", "weak_fit_constant"}, {}, {}};
    const IntPolynomial P = IntPolynomial::parse(cfg.poly);
    const auto ps = detail::or_default(cfg.p_values, {3});
    const std::vector<double> lambdas = {2, 4, 8, 16};
    for (std::uint64_t p : ps) {
        std::vector<std::uint64_t> Q_of_j;
        std::uint64_t Q = 1;
        unsigned jtop = 0;
        for (unsigned j = 1; j <= cfg.jmax && Q <= kCountingCap / p; ++j) Q *= p, jtop = j;
        struct Row {
            double ls = 0, weak = 0;
            std::uint64_t maxh = 0;
        };
        std::vector<Row> rows(jtop);
        parallel_for(jtop, cfg.threads, [&](std::size_t i) {
            const auto prof = counting_fn(P, p, static_cast<unsigned>(i + 1));
            rows[i] = {ls_norm_normalized(prof, cfg.s),
                       P.degree() >= 2 ? weak_fit_constant(prof, static_cast<unsigned>(P.degree()), lambdas) : 0.0,
                       prof.max_count()};
        });
        const std::size_t first = t.rows.size();
        double top = 0.0, wlo = std::numeric_limits<double>::infinity(), whi = 0.0;
        for (unsigned j = 1; j <= jtop; ++j) {
            const auto& r = rows[j - 1];
            t.add({static_cast<std::int64_t>(p), std::int64_t{j}, r.ls, static_cast<std::int64_t>(r.maxh), r.weak});
            top = std::max(top, r.ls);
            if (r.weak > 0) wlo = std::min(wlo, r.weak), whi = std::max(whi, r.weak);
        }
        if (jtop >= 3) {
            const double at3 = rows[2].ls;
            t.verdicts.push_back({"ls_uniform_p" + std::to_string(p), top <= 2.0 * at3, top / at3, 2.0, first, t.last_row(),
                                  "max_j ls_norm / ls_norm(j = 3)"});
        }
        if (whi > 0) {
            t.verdicts.push_back({"weak_fit_stable_p" + std::to_string(p), whi <= 4.0 * wlo, whi / wlo, 4.0, first,
                                  t.last_row(), "max / min fitted weak-type constant over j"});
        }
    }
}

// ---------------------------------------------------------------------------------------------
// (h) Quadratic variation of martingale projections.

inline void run_v2growth(const ExperimentConfig& cfg, Table& t) {
    t = Table{"v2growth", {"K", "best_value", "argmax_seed_trial", "pointwise_max"}, {}, {}};
    const auto depths = detail::or_default(cfg.depths, {4u, 8u, 16u});
    const auto rows = v2_growth_search(depths, cfg.trials, cfg.seed, cfg.threads);
    bool increasing = true;
    double min_step = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        t.add({std::int64_t{rows[i].K}, rows[i].best_value, rows[i].argmax_trial, rows[i].pointwise_max});
        if (i > 0) {
            increasing = increasing && rows[i].best_value > rows[i - 1].best_value;
            min_step = std::min(min_step, rows[i].best_value - rows[i - 1].best_value);
        }
    }
    t.verdicts.push_back({"strictly_increasing", increasing, rows.size() > 1 ? min_step : 0.0, 0.0, 0, t.last_row(),
                          "smallest increment of the best L^2-averaged bold-V^2"});
}

// ---------------------------------------------------------------------------------------------
// (i) Integration-by-parts identities for the modulated paraproduct bumps.

inline void run_ibp(const ExperimentConfig& cfg, Table& t) {
    t = Table{"ibp", {"poly", "N", "s1", "s2", "u", "identity", "residual"}, {}, {}};
    const std::vector<IntPolynomial> polys = {IntPolynomial({0, 0, 1}), IntPolynomial({0, 0, 0, 1})};
    const auto Ns = detail::or_default(cfg.n_values, {32, 64, 128});
    const int u = cfg.u_parameter(0);
    struct Job {
        std::size_t poly;
        std::int64_t N;
        int s1, s2;
        IbpIdentity which;
    };
    std::vector<Job> jobs;
    for (std::size_t pi = 0; pi < polys.size(); ++pi) {
        for (auto N : Ns) {
            for (int s1 = -u; s1 <= 2; ++s1) {
                for (int s2 = -u; s2 <= 2; ++s2) {
                    if (s1 > -u) jobs.push_back({pi, N, s1, s2, IbpIdentity::first});
                    if (s2 > -u) jobs.push_back({pi, N, s1, s2, IbpIdentity::second});
                }
            }
        }
    }
    std::vector<double> res(jobs.size());
    parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
        const auto& j = jobs[i];
        res[i] = ibp_residual(polys[j.poly], j.N, j.s1, j.s2, u, j.which);
    });
    double worst = 0.0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto& j = jobs[i];
        t.add({polys[j.poly].to_string(), j.N, std::int64_t{j.s1}, std::int64_t{j.s2}, std::int64_t{u},
               std::string(j.which == IbpIdentity::first ? "first" : "second"), res[i]});
        worst = std::max(worst, res[i]);
    }
    t.verdicts.push_back({"residual_max", worst <= 1e-7, worst, 1e-7, 0, t.last_row(), ""});
}

// ---------------------------------------------------------------------------------------------
// Heights of reduced fractions.

inline void run_iw(const ExperimentConfig& cfg, Table& t) {
    t = Table{"iw", {"q", "a", "height_exponent", "naive_exponent"}, {}, {}};
    const std::int64_t qmax = cfg.qmax > 0 ? cfg.qmax : 256;
    if (static_cast<std::uint64_t>(qmax) > cfg.iw.q_cap) throw std::invalid_argument("iw: qmax exceeds q_cap");
    std::vector<unsigned> h(static_cast<std::size_t>(qmax) + 1);
    parallel_for(static_cast<std::size_t>(qmax), cfg.threads, [&](std::size_t i) {
        const auto q = static_cast<std::int64_t>(i + 1);
        h[i + 1] = height(reduce_fraction(1, q), cfg.iw);
    });
    bool dominated = true, primes_equal = true;
    std::int64_t worst_q = 0;
    for (std::int64_t q = 1; q <= qmax; ++q) {
        const auto hq = h[static_cast<std::size_t>(q)];
        const unsigned naive = ceil_log2(static_cast<std::uint64_t>(q));
        if (hq > naive && dominated) dominated = false, worst_q = q;
        if (is_prime(static_cast<std::uint64_t>(q)) && hq != naive) primes_equal = false;
        for (std::int64_t a = 0; a < q; ++a) {
            if (std::gcd(a, q) != 1) continue;
            t.add({q, a, std::int64_t{hq}, std::int64_t{naive}});
        }
    }
    t.verdicts.push_back({"height_le_naive", dominated, static_cast<double>(worst_q), 0.0, 0, t.last_row(),
                          dominated ? "" : "first q with height above naive height"});
    t.verdicts.push_back({"prime_equality", primes_equal, 0.0, 0.0, 0, t.last_row(), ""});
}

// ---------------------------------------------------------------------------------------------

/// Runs cfg.experiment into `out`; on failure `out` keeps the rows produced so far.
inline void run(const ExperimentConfig& cfg, Table& out) {
    cfg.validate();
    static const std::map<std::string, std::function<void(const ExperimentConfig&, Table&)>> runners = {
        {"weyl", run_weyl},     {"gauss", run_gauss},       {"minorarc", run_minorarc}, {"bessel", run_bessel},
        {"approx", run_approx}, {"sampling", run_sampling}, {"padic", run_padic},       {"v2growth", run_v2growth},
        {"ibp", run_ibp},       {"iw", run_iw}};
    out = Table{cfg.experiment, {}, {}, {}};
    try {
        runners.at(cfg.experiment)(cfg, out);
    } catch (const std::exception& e) {
        throw ExperimentError("experiment " + cfg.experiment + ": " + e.what());
    }
}

inline Table run(const ExperimentConfig& cfg) {
    Table t;
    run(cfg, t);
    return t;
}

}  // namespace bilin::exp
