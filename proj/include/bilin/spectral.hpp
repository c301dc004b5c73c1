#pragma once

// Exponential sums and oscillatory integrals: discrete averaging symbols, complete sums over Z/qZ,
// the continuous symbol on [1/2, 1] and the integration-by-parts identities for its modulated
// pieces.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "bilin/polyops.hpp"
#include "bilin/signals.hpp"

namespace bilin {

struct ConvergenceError : std::runtime_error {
    double achieved;
    ConvergenceError(const std::string& what, double err) : std::runtime_error(what), achieved(err) {}
};

/// floor(log2 N) for N >= 1.
inline int log_scale(std::int64_t N) {
    if (N < 1) throw std::invalid_argument("log_scale: N must be positive");
    int k = 0;
    while ((std::int64_t{2} << k) <= N) ++k;
    return k;
}

/// First n of the average: 1, or floor(N/2)+1 for the upper half.
inline std::int64_t first_term(std::int64_t N, bool upper_half) { return upper_half ? N / 2 + 1 : 1; }

/// E_{n in [N]} e(P(n) xi), restricted to n > N/2 with weight 1/N when upper_half.
inline Complex linear_symbol(const IntPolynomial& P, std::int64_t N, double xi, bool upper_half) {
    if (N < 1) throw std::invalid_argument("linear_symbol: N must be positive");
    Complex s = 0.0;
    for (std::int64_t n = first_term(N, upper_half); n <= N; ++n) s += expi(phase_frac(P.eval(n), xi));
    return s / static_cast<double>(N);
}

/// E_{n in [N]} e(P1(n) xi1 + P2(n) xi2) with the same upper-half convention.
inline Complex bilinear_symbol(const IntPolynomial& P1, const IntPolynomial& P2, std::int64_t N, double xi1,
                               double xi2, bool upper_half) {
    if (N < 1) throw std::invalid_argument("bilinear_symbol: N must be positive");
    Complex s = 0.0;
    for (std::int64_t n = first_term(N, upper_half); n <= N; ++n) {
        s += expi(phase_frac(P1.eval(n), xi1) + phase_frac(P2.eval(n), xi2));
    }
    return s / static_cast<double>(N);
}

/// E_{n in Z/qZ} e((a1 P1(n) + a2 P2(n)) / q), phases as exact residues.
inline Complex complete_sum(const IntPolynomial& P1, const IntPolynomial& P2, std::int64_t q, std::int64_t a1,
                            std::int64_t a2) {
    if (q < 1) throw std::invalid_argument("complete_sum: q must be positive");
    const auto uq = static_cast<std::uint64_t>(q);
    auto red = [q](std::int64_t a) {
        std::int64_t r = a % q;
        return static_cast<unsigned __int128>(r < 0 ? r + q : r);
    };
    const auto b1 = red(a1), b2 = red(a2);
    Complex s = 0.0;
    for (std::int64_t n = 0; n < q; ++n) {
        const auto r = (b1 * P1.eval_mod(n, uq) + b2 * P2.eval_mod(n, uq)) % uq;
        s += expi_rational(static_cast<std::int64_t>(r), q);
    }
    return s / static_cast<double>(q);
}

/// m_Zhat on two frequencies a1/q1, a2/q2, evaluated over lcm(q1, q2).
inline Complex arithmetic_symbol(const IntPolynomial& P1, const IntPolynomial& P2, const ArithmeticFrequency& alpha1,
                                 const ArithmeticFrequency& alpha2) {
    const std::int64_t q = std::lcm(alpha1.denominator(), alpha2.denominator());
    return complete_sum(P1, P2, q, alpha1.numerator() * (q / alpha1.denominator()),
                        alpha2.numerator() * (q / alpha2.denominator()));
}

namespace detail {

struct GaussRule {
    static constexpr int kOrder = 16;
    std::array<double, kOrder> nodes{};
    std::array<double, kOrder> weights{};

    GaussRule() {
        for (int i = 0; i < kOrder; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (kOrder + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= kOrder; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = kOrder * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

inline const GaussRule& gauss_rule() {
    static const GaussRule rule;
    return rule;
}

}  // namespace detail

struct QuadratureResult {
    Complex value;
    double error = 0.0;
    std::size_t panels = 0;
};

/// Composite Gauss-Legendre on [a, b], panels doubled from `initial_panels`
/// until successive values agree to `tol`.
template <class F>
QuadratureResult integrate_panels(F&& f, double a, double b, std::size_t initial_panels, double tol = 1e-11,
                                  std::size_t max_panels = std::size_t{1} << 22) {
    const auto& g = detail::gauss_rule();
    auto rule = [&](std::size_t panels) {
        const double w = (b - a) / static_cast<double>(panels);
        Complex s = 0.0;
        for (std::size_t p = 0; p < panels; ++p) {
            const double mid = a + (static_cast<double>(p) + 0.5) * w;
            Complex ps = 0.0;
            for (int i = 0; i < detail::GaussRule::kOrder; ++i) ps += g.weights[i] * f(mid + 0.5 * w * g.nodes[i]);
            s += ps;
        }
        return s * (0.5 * w);
    };
    std::size_t panels = std::max<std::size_t>(initial_panels, 1);
    Complex prev = rule(panels);
    double err = 0.0;
    while (panels < max_panels) {
        panels *= 2;
        const Complex cur = rule(panels);
        err = std::abs(cur - prev);
        if (err <= tol) return {cur, err, panels};
        prev = cur;
    }
    throw ConvergenceError("integrate_panels: no convergence within panel budget", err);
}

/// Panel count proportional to the total phase variation on [1/2, 1].
inline std::size_t phase_panels(const IntPolynomial& P, std::int64_t N, double xi1, double xi2) {
    const double n = static_cast<double>(N);
    const double var = std::abs(xi1) * n + std::abs(xi2) * (std::abs(P.eval_real(n)) + std::abs(P.eval_real(n / 2)));
    return static_cast<std::size_t>(std::ceil(var)) + 16;
}

/// int_{1/2}^1 e(xi1 N t + xi2 P(N t)) w(t) dt.
template <class W>
QuadratureResult weighted_oscillatory_integral(const IntPolynomial& P, std::int64_t N, double xi1, double xi2, W&& w) {
    const double n = static_cast<double>(N);
    auto integrand = [&](double t) { return expi(xi1 * n * t + xi2 * P.eval_real(n * t)) * w(t); };
    return integrate_panels(integrand, 0.5, 1.0, phase_panels(P, N, xi1, xi2));
}

/// int_{1/2}^1 e(xi1 N t + xi2 P(N t)) dt with estimated error.
inline QuadratureResult continuous_bilinear_symbol_detail(const IntPolynomial& P, std::int64_t N, double xi1,
                                                          double xi2) {
    if (N < 1) throw std::invalid_argument("continuous_bilinear_symbol: N must be positive");
    return weighted_oscillatory_integral(P, N, xi1, xi2, [](double) { return 1.0; });
}

inline Complex continuous_bilinear_symbol(const IntPolynomial& P, std::int64_t N, double xi1, double xi2) {
    return continuous_bilinear_symbol_detail(P, N, xi1, xi2).value;
}

/// Annular (or, at s = -u, full) bump of the paraproduct at scale N;
/// degree_factor 1 gives phi_N, degree_factor d gives the tilde version.
inline double paraproduct_bump(std::int64_t N, int s, int u, int degree_factor, double xi) {
    if (s < -u) throw std::invalid_argument("paraproduct_bump: s must be >= -u");
    const int L = log_scale(N);
    if (s == -u) return eta_leq(-degree_factor * (L + u), xi);
    return eta_leq(degree_factor * (s - L), xi) - eta_leq(degree_factor * (s - L - 1), xi);
}

enum class IbpIdentity { first, second };

/// Max over a (grid x grid) frequency lattice covering the bump supports of
/// |LHS - RHS| for the integration-by-parts identities of the modulated bumps.
inline double ibp_residual(const IntPolynomial& P, std::int64_t N, int s1, int s2, int u, IbpIdentity which,
                           int grid = 9) {
    if (N < 16) throw std::invalid_argument("ibp_residual: N must be at least 16");
    if (which == IbpIdentity::first && !(s1 > -u)) throw std::invalid_argument("ibp_residual: first identity needs s1 > -u");
    if (which == IbpIdentity::second && !(s2 > -u)) throw std::invalid_argument("ibp_residual: second identity needs s2 > -u");
    if (grid < 1) throw std::invalid_argument("ibp_residual: grid must be positive");
    const int d = static_cast<int>(P.degree());
    const IntPolynomial dP = P.derivative();
    const IntPolynomial ddP = dP.derivative();
    const double n = static_cast<double>(N);
    const double nd = std::pow(n, d);

    if (which == IbpIdentity::second) {
        const double first = dP.eval_real(n * 0.5);
        for (int i = 0; i <= 1024; ++i) {
            const double v = dP.eval_real(n * (0.5 + 0.5 * i / 1024.0));
            if (v == 0.0 || (v > 0) != (first > 0)) throw std::domain_error("ibp_residual: P'(Nt) vanishes on [1/2, 1]");
        }
    }

    const int L = log_scale(N);
    const double w1 = std::ldexp(1.0, (s1 == -u ? -L - u : s1 - L));
    const double w2 = std::ldexp(1.0, d * (s2 == -u ? -L - u : s2 - L));
    const double c1 = std::ldexp(1.0, -s1);      // 2^{-s1}
    const double c2 = std::ldexp(1.0, -d * s2);  // 2^{-d s2}
    const Complex two_pi_i(0.0, kTwoPi);

    double worst = 0.0;
    for (int a = 0; a < grid; ++a) {
        for (int b = 0; b < grid; ++b) {
            const double tau1 = grid == 1 ? 0.0 : -1.0 + 2.0 * a / (grid - 1);
            const double tau2 = grid == 1 ? 0.0 : -1.0 + 2.0 * b / (grid - 1);
            const double xi1 = tau1 * w1, xi2 = tau2 * w2;
            const double phi = paraproduct_bump(N, s1, u, 1, xi1);
            const double tphi = paraproduct_bump(N, s2, u, d, xi2);

            // Modulated families phi_{N,t,j} and tilde phi_{N,t,j}.
            auto phi_t = [&](int j, double t) -> Complex {
                if (phi == 0.0) return 0.0;
                return std::pow(c1 * n * xi1, j) * phi * expi(n * t * xi1);
            };
            auto tphi_t = [&](int j, double t) -> Complex {
                if (tphi == 0.0) return 0.0;
                return std::pow(c2 * nd * xi2, j) * tphi * expi(P.eval_real(n * t) * xi2);
            };

            const Complex lhs = phi * tphi * continuous_bilinear_symbol(P, N, xi1, xi2);
            Complex rhs = 0.0;
            if (phi != 0.0 && tphi != 0.0) {
                const std::size_t panels = phase_panels(P, N, xi1, xi2);
                if (which == IbpIdentity::first) {
                    const Complex boundary = phi_t(-1, 1.0) * tphi_t(0, 1.0) - phi_t(-1, 0.5) * tphi_t(0, 0.5);
                    const auto integral = integrate_panels(
                        [&](double t) { return phi_t(-1, t) * tphi_t(1, t) * (dP.eval_real(n * t) / std::pow(n, d - 1)); },
                        0.5, 1.0, panels);
                    rhs = c1 / two_pi_i * boundary - std::ldexp(1.0, d * s2 - s1) * integral.value;
                } else {
                    auto ratio = [&](double t) { return std::pow(n, d - 1) / dP.eval_real(n * t); };
                    const Complex boundary =
                        phi_t(0, 1.0) * tphi_t(-1, 1.0) * ratio(1.0) - phi_t(0, 0.5) * tphi_t(-1, 0.5) * ratio(0.5);
                    const auto mid = integrate_panels([&](double t) { return phi_t(1, t) * tphi_t(-1, t) * ratio(t); },
                                                      0.5, 1.0, panels);
                    const auto curv = integrate_panels(
                        [&](double t) {
                            const double p1 = dP.eval_real(n * t);
                            return phi_t(0, t) * tphi_t(-1, t) * (nd * ddP.eval_real(n * t) / (p1 * p1));
                        },
                        0.5, 1.0, panels);
                    rhs = c2 / two_pi_i * boundary - std::ldexp(1.0, s1 - d * s2) * mid.value + c2 / two_pi_i * curv.value;
                }
            }
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    return worst;
}

}  // namespace bilin
