#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qread/exec.hpp"

namespace qread::kernels {

/// Dense nonnegative pmf values over a contiguous count window.
struct CountRow {
    std::int64_t lo = 0;
    std::vector<double> p;

    std::int64_t hi() const { return lo + static_cast<std::int64_t>(p.size()) - 1; }
    double at(std::int64_t n) const {
        return (n < lo || n > hi()) ? 0.0 : p[static_cast<std::size_t>(n - lo)];
    }
    double mass() const;
    double mean() const;
};

/// Inclusive count window [lo, hi]; empty when hi < lo.
struct CountWindow {
    std::int64_t lo = 0;
    std::int64_t hi = -1;

    std::int64_t width() const { return hi < lo ? 0 : hi - lo + 1; }
    void merge(const CountWindow& other);
};

/// Bernstein-certified window holding all but <= tail_tol of the mass.
CountWindow binomial_window(std::int64_t n, double p, double tail_tol);
CountWindow poisson_window(double lambda, double tail_tol);

/// Union of binomial windows over several thinning probabilities.
CountWindow mixture_binomial_window(std::int64_t n, std::span<const double> ps,
                                    double tail_tol);

/// Poisson pmf row over a certified window (ratio recurrence from the mode).
CountRow poisson_row(double lambda, double tail_tol);

/// Total-count row of the multimode thermal law (negative binomial with
/// `modes` failures); the window is grown by a ratio scan with a geometric
/// tail bound, which stays valid for the heavy single-mode tail.
/// modes == 0 selects the Poisson limit.
CountRow negbinom_row(double mu, std::int64_t modes, double tail_tol);

/// Accumulates scale * Bin(.; n, p) into out over the given window, which
/// must lie inside out's window.
void add_binomial(CountRow& out, double scale, std::int64_t n, double p,
                  const CountWindow& window);

/// Row of sum_j w_j Bin(.; n, ps[j]) over the union of per-component windows.
CountRow binomial_mixture_row(std::int64_t n, std::span<const double> ps,
                              std::span<const double> ws, double tail_tol);

/// Row of sum_j w_j Pois(.; rates[j]) over the union of per-rate windows.
CountRow poisson_mixture_row(std::span<const double> rates,
                             std::span<const double> ws, double tail_tol);

/// sum_n min(a(n), b(n)) over the window intersection.
double min_overlap(const CountRow& a, const CountRow& b);

/// Diagnostics of a joint min-overlap reduction.
struct TmsvErrorStats {
    double min_overlap = 0.0;
    double mass0 = 0.0;
    double mass1 = 0.0;
    std::int64_t cells = 0;
    std::int64_t rows = 0;
};

/// eta = 1 path: the idler count equals the generated number n, so the joint
/// overlap reduces row by row to
///   sum_n P(n) * sum_s min(q0(s|n), q1(s|n)),
/// with q_i the signal-thinning mixtures of hypothesis i.
TmsvErrorStats tmsv_min_overlap_eta1(const CountRow& marginal,
                                     std::span<const double> taus0,
                                     std::span<const double> w0,
                                     std::span<const double> taus1,
                                     std::span<const double> w1, double row_tol,
                                     std::int64_t max_cells, Exec exec);

/// Lossy path: joint rows over the idler count are accumulated from all
/// generated numbers n feeding that row,
///   p_i(s, m) = sum_n P(n) Bin(m; n, eta) q_i(s|n),
/// then min-reduced. Phase A precomputes the signal mixtures q_i(.|n);
/// phase B walks idler rows independently.
TmsvErrorStats tmsv_min_overlap_lossy(const CountRow& marginal, double eta,
                                      std::span<const double> taus0,
                                      std::span<const double> w0,
                                      std::span<const double> taus1,
                                      std::span<const double> w1, double row_tol,
                                      std::int64_t max_cells, Exec exec);

}  // namespace qread::kernels
