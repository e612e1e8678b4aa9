#include "qread/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "qread/errors.hpp"

namespace qread::kernels {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// lgamma(n+1) with a growing per-thread cache; the row fills anchor one pmf
// value per (n, component) pair and the lossy phase-B kernel needs one
// binomial value per (idler, n) pair, so this sits on a hot path.
double lg_fact(std::int64_t n) {
    static thread_local std::vector<double> cache{0.0, 0.0};  // lgamma(1), lgamma(2)
    const auto idx = static_cast<std::size_t>(n);
    if (idx >= cache.size()) {
        std::size_t grow = std::max(cache.size() * 2, idx + 1);
        for (std::size_t i = cache.size(); i < grow; ++i) {
            cache.push_back(std::lgamma(static_cast<double>(i) + 1.0));
        }
    }
    return cache[idx];
}

double poisson_log(std::int64_t n, double lambda) {
    if (lambda == 0.0) return n == 0 ? 0.0 : kNegInf;
    return static_cast<double>(n) * std::log(lambda) - lambda - lg_fact(n);
}

double binomial_log(std::int64_t k, std::int64_t n, double p) {
    if (p == 0.0) return k == 0 ? 0.0 : kNegInf;
    if (p == 1.0) return k == n ? 0.0 : kNegInf;
    return lg_fact(n) - lg_fact(k) - lg_fact(n - k) +
           static_cast<double>(k) * std::log(p) +
           static_cast<double>(n - k) * std::log1p(-p);
}

// Half-width t with Bernstein tail exp(-t^2 / (2 (v + t/3))) <= tol/2 per side.
double bernstein_halfwidth(double v, double tail_tol) {
    const double L = std::log(2.0 / tail_tol);
    return L / 3.0 + std::sqrt(L * L / 9.0 + 2.0 * v * L);
}

}  // namespace

bool use_parallel(Exec exec, std::int64_t work_estimate) {
    switch (exec) {
        case Exec::Serial: return false;
        case Exec::Parallel: return true;
        case Exec::Auto: return work_estimate >= kParallelWorkThreshold;
    }
    return false;
}

void set_jobs(int jobs) {
    if (jobs > 0) omp_set_num_threads(jobs);
}

double CountRow::mass() const {
    double acc = 0.0;
    for (double v : p) acc += v;
    return acc;
}

double CountRow::mean() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i] * static_cast<double>(lo + static_cast<std::int64_t>(i));
    }
    return acc;
}

void CountWindow::merge(const CountWindow& other) {
    if (other.width() == 0) return;
    if (width() == 0) {
        *this = other;
        return;
    }
    lo = std::min(lo, other.lo);
    hi = std::max(hi, other.hi);
}

CountWindow binomial_window(std::int64_t n, double p, double tail_tol) {
    if (n <= 0) return {0, 0};
    if (p <= 0.0) return {0, 0};
    if (p >= 1.0) return {n, n};
    const double mean = static_cast<double>(n) * p;
    const double t = bernstein_halfwidth(mean * (1.0 - p), tail_tol);
    const auto lo = static_cast<std::int64_t>(std::floor(mean - t));
    const auto hi = static_cast<std::int64_t>(std::ceil(mean + t));
    return {std::max<std::int64_t>(0, lo), std::min(n, hi)};
}

CountWindow poisson_window(double lambda, double tail_tol) {
    if (lambda == 0.0) return {0, 0};
    const double t = bernstein_halfwidth(lambda, tail_tol);
    const auto lo = static_cast<std::int64_t>(std::floor(lambda - t));
    const auto hi = static_cast<std::int64_t>(std::ceil(lambda + t));
    return {std::max<std::int64_t>(0, lo), hi};
}

CountWindow mixture_binomial_window(std::int64_t n, std::span<const double> ps,
                                    double tail_tol) {
    CountWindow w;
    for (double p : ps) w.merge(binomial_window(n, p, tail_tol));
    return w;
}

namespace {

// Fills scale * pmf over [window.lo, window.hi] into out by multiplicative
// recurrence from an anchor value, given the pmf ratio function r(k) =
// pmf(k+1)/pmf(k).
template <typename Ratio>
void add_by_recurrence(CountRow& out, const CountWindow& window,
                       std::int64_t anchor, double anchor_value, Ratio ratio) {
    double* base = out.p.data() - out.lo;
    base[anchor] += anchor_value;
    double v = anchor_value;
    for (std::int64_t k = anchor; k < window.hi; ++k) {
        v *= ratio(k);
        base[k + 1] += v;
    }
    v = anchor_value;
    for (std::int64_t k = anchor; k > window.lo; --k) {
        const double r = ratio(k - 1);
        v = (r > 0.0) ? v / r : 0.0;
        base[k - 1] += v;
    }
}

void add_point_mass(CountRow& out, double scale, std::int64_t n) {
    if (n >= out.lo && n <= out.hi()) {
        out.p[static_cast<std::size_t>(n - out.lo)] += scale;
    }
}

}  // namespace

void add_binomial(CountRow& out, double scale, std::int64_t n, double p,
                  const CountWindow& window) {
    if (window.width() == 0) return;
    if (n == 0 || p == 0.0) {
        add_point_mass(out, scale, 0);
        return;
    }
    if (p == 1.0) {
        add_point_mass(out, scale, n);
        return;
    }
    std::int64_t anchor = static_cast<std::int64_t>(
        std::floor((static_cast<double>(n) + 1.0) * p));
    anchor = std::clamp(anchor, window.lo, window.hi);
    const double anchor_value = scale * std::exp(binomial_log(anchor, n, p));
    const double odds = p / (1.0 - p);
    add_by_recurrence(out, window, anchor, anchor_value, [n, odds](std::int64_t k) {
        return static_cast<double>(n - k) / static_cast<double>(k + 1) * odds;
    });
}

namespace {

void add_poisson(CountRow& out, double scale, double lambda,
                 const CountWindow& window) {
    if (window.width() == 0) return;
    if (lambda == 0.0) {
        add_point_mass(out, scale, 0);
        return;
    }
    std::int64_t anchor = static_cast<std::int64_t>(std::floor(lambda));
    anchor = std::clamp(anchor, window.lo, window.hi);
    const double anchor_value = scale * std::exp(poisson_log(anchor, lambda));
    add_by_recurrence(out, window, anchor, anchor_value, [lambda](std::int64_t k) {
        return lambda / static_cast<double>(k + 1);
    });
}

}  // namespace

CountRow poisson_row(double lambda, double tail_tol) {
    const CountWindow w = poisson_window(lambda, tail_tol);
    CountRow row{w.lo, std::vector<double>(static_cast<std::size_t>(w.width()), 0.0)};
    add_poisson(row, 1.0, lambda, w);
    return row;
}

CountRow negbinom_row(double mu, std::int64_t modes, double tail_tol) {
    if (modes == 0) return poisson_row(mu, tail_tol);
    if (mu == 0.0) return CountRow{0, {1.0}};
    if (modes < 0) throw config_error("mode count must be positive");

    const double m = static_cast<double>(modes);
    const double x = mu / m;
    const double q = x / (1.0 + x);
    const double log_q = std::log(q);
    const double log_1mq = -std::log1p(x);
    const auto log_pmf = [&](std::int64_t n) {
        return std::lgamma(static_cast<double>(n) + m) - lg_fact(n) -
               std::lgamma(m) + static_cast<double>(n) * log_q + m * log_1mq;
    };
    // P(n+1)/P(n); increases with n below the mode, then decays towards q.
    const auto ratio = [&](std::int64_t n) {
        return (static_cast<double>(n) + m) / (static_cast<double>(n) + 1.0) * q;
    };

    const double mode_edge = (m * q - 1.0) / (1.0 - q);
    const std::int64_t mode =
        mode_edge < 0.0 ? 0 : static_cast<std::int64_t>(std::floor(mode_edge)) + 1;
    const double half_tol = 0.5 * tail_tol;
    constexpr std::int64_t kMaxSupport = 100'000'000;

    // Right scan from the mode with a geometric tail bound (ratios beyond the
    // mode are decreasing, so tail(n) <= pmf(n) * r/(1-r) at r = ratio(n)).
    std::vector<double> right;
    right.push_back(std::exp(log_pmf(mode)));
    std::int64_t n = mode;
    while (true) {
        const double r = ratio(n);
        if (r < 1.0 && right.back() * r / (1.0 - r) < half_tol) break;
        if (n - mode > kMaxSupport) {
            throw budget_error("thermal count support exceeds the scan budget");
        }
        right.push_back(right.back() * r);
        ++n;
    }
    // Left scan from the mode; the step-down ratio P(n-1)/P(n) shrinks as n
    // decreases, so the same geometric bound certifies the left tail.
    std::vector<double> left;
    std::int64_t lo = mode;
    double v = right.front();
    while (lo > 0) {
        const double l = 1.0 / ratio(lo - 1);  // P(lo-1)/P(lo)
        if (l < 1.0 && v * l / (1.0 - l) < half_tol) break;
        v *= l;
        left.push_back(v);
        --lo;
    }

    CountRow row;
    row.lo = lo;
    row.p.reserve(left.size() + right.size());
    for (auto it = left.rbegin(); it != left.rend(); ++it) row.p.push_back(*it);
    row.p.insert(row.p.end(), right.begin(), right.end());
    return row;
}

CountRow binomial_mixture_row(std::int64_t n, std::span<const double> ps,
                              std::span<const double> ws, double tail_tol) {
    const CountWindow w = mixture_binomial_window(n, ps, tail_tol);
    CountRow row{w.lo, std::vector<double>(static_cast<std::size_t>(w.width()), 0.0)};
    for (std::size_t j = 0; j < ps.size(); ++j) {
        add_binomial(row, ws[j], n, ps[j], binomial_window(n, ps[j], tail_tol));
    }
    return row;
}

CountRow poisson_mixture_row(std::span<const double> rates,
                             std::span<const double> ws, double tail_tol) {
    CountWindow w;
    for (double r : rates) w.merge(poisson_window(r, tail_tol));
    CountRow row{w.lo, std::vector<double>(static_cast<std::size_t>(w.width()), 0.0)};
    for (std::size_t j = 0; j < rates.size(); ++j) {
        add_poisson(row, ws[j], rates[j], poisson_window(rates[j], tail_tol));
    }
    return row;
}

double min_overlap(const CountRow& a, const CountRow& b) {
    const std::int64_t lo = std::max(a.lo, b.lo);
    const std::int64_t hi = std::min(a.hi(), b.hi());
    double acc = 0.0;
    for (std::int64_t n = lo; n <= hi; ++n) {
        acc += std::min(a.p[static_cast<std::size_t>(n - a.lo)],
                        b.p[static_cast<std::size_t>(n - b.lo)]);
    }
    return acc;
}

TmsvErrorStats tmsv_min_overlap_eta1(const CountRow& marginal,
                                     std::span<const double> taus0,
                                     std::span<const double> w0,
                                     std::span<const double> taus1,
                                     std::span<const double> w1, double row_tol,
                                     std::int64_t max_cells, Exec exec) {
    const std::int64_t nrows = static_cast<std::int64_t>(marginal.p.size());

    std::int64_t cells = 0;
    for (std::int64_t i = 0; i < nrows; ++i) {
        const std::int64_t n = marginal.lo + i;
        cells += mixture_binomial_window(n, taus0, row_tol).width();
        cells += mixture_binomial_window(n, taus1, row_tol).width();
        if (cells > max_cells) {
            throw budget_error("quantum count grid exceeds the cell budget");
        }
    }

    std::vector<double> overlap(static_cast<std::size_t>(nrows), 0.0);
    std::vector<double> m0(static_cast<std::size_t>(nrows), 0.0);
    std::vector<double> m1(static_cast<std::size_t>(nrows), 0.0);
    const bool par = use_parallel(exec, cells);

#pragma omp parallel for schedule(dynamic, 16) if (par)
    for (std::int64_t i = 0; i < nrows; ++i) {
        const std::int64_t n = marginal.lo + i;
        const double pn = marginal.p[static_cast<std::size_t>(i)];
        const CountRow row0 = binomial_mixture_row(n, taus0, w0, row_tol);
        const CountRow row1 = binomial_mixture_row(n, taus1, w1, row_tol);
        overlap[static_cast<std::size_t>(i)] = pn * min_overlap(row0, row1);
        m0[static_cast<std::size_t>(i)] = pn * row0.mass();
        m1[static_cast<std::size_t>(i)] = pn * row1.mass();
    }

    TmsvErrorStats stats;
    stats.cells = cells;
    stats.rows = nrows;
    for (std::int64_t i = 0; i < nrows; ++i) {
        stats.min_overlap += overlap[static_cast<std::size_t>(i)];
        stats.mass0 += m0[static_cast<std::size_t>(i)];
        stats.mass1 += m1[static_cast<std::size_t>(i)];
    }
    return stats;
}

namespace {

struct CondRows {
    std::int64_t n_lo = 0;
    std::vector<CountRow> rows;

    const CountRow& at(std::int64_t n) const {
        return rows[static_cast<std::size_t>(n - n_lo)];
    }
};

CondRows build_cond_rows(const CountRow& marginal, std::span<const double> ps,
                         std::span<const double> ws, double row_tol, bool par) {
    CondRows out;
    out.n_lo = marginal.lo;
    out.rows.resize(marginal.p.size());
    const std::int64_t nrows = static_cast<std::int64_t>(marginal.p.size());
#pragma omp parallel for schedule(dynamic, 16) if (par)
    for (std::int64_t i = 0; i < nrows; ++i) {
        out.rows[static_cast<std::size_t>(i)] =
            binomial_mixture_row(marginal.lo + i, ps, ws, row_tol);
    }
    return out;
}

}  // namespace

TmsvErrorStats tmsv_min_overlap_lossy(const CountRow& marginal, double eta,
                                      std::span<const double> taus0,
                                      std::span<const double> w0,
                                      std::span<const double> taus1,
                                      std::span<const double> w1, double row_tol,
                                      std::int64_t max_cells, Exec exec) {
    const std::int64_t nrows = static_cast<std::int64_t>(marginal.p.size());
    const std::int64_t n_hi = marginal.hi();

    std::vector<double> ps0(taus0.size()), ps1(taus1.size());
    for (std::size_t j = 0; j < taus0.size(); ++j) ps0[j] = eta * taus0[j];
    for (std::size_t j = 0; j < taus1.size(); ++j) ps1[j] = eta * taus1[j];

    // Idler windows per generated number n, widened to be monotone in n so
    // each idler row's contributing n-range is a contiguous interval.
    std::vector<std::int64_t> ia(static_cast<std::size_t>(nrows));
    std::vector<std::int64_t> ib(static_cast<std::size_t>(nrows));
    for (std::int64_t i = 0; i < nrows; ++i) {
        const CountWindow w = binomial_window(marginal.lo + i, eta, row_tol);
        ia[static_cast<std::size_t>(i)] = w.lo;
        ib[static_cast<std::size_t>(i)] = w.hi;
    }
    for (std::int64_t i = nrows - 2; i >= 0; --i) {
        ia[static_cast<std::size_t>(i)] =
            std::min(ia[static_cast<std::size_t>(i)], ia[static_cast<std::size_t>(i + 1)]);
    }
    for (std::int64_t i = 1; i < nrows; ++i) {
        ib[static_cast<std::size_t>(i)] =
            std::max(ib[static_cast<std::size_t>(i)], ib[static_cast<std::size_t>(i - 1)]);
    }

    // Budget estimate: conditional-row storage plus the per-idler-row
    // accumulation work.
    std::int64_t cells = 0;
    std::vector<std::int64_t> width0(static_cast<std::size_t>(nrows));
    std::vector<std::int64_t> width1(static_cast<std::size_t>(nrows));
    for (std::int64_t i = 0; i < nrows; ++i) {
        width0[static_cast<std::size_t>(i)] =
            mixture_binomial_window(marginal.lo + i, ps0, row_tol).width();
        width1[static_cast<std::size_t>(i)] =
            mixture_binomial_window(marginal.lo + i, ps1, row_tol).width();
        cells += width0[static_cast<std::size_t>(i)] + width1[static_cast<std::size_t>(i)];
    }
    if (cells > max_cells) {
        throw budget_error("quantum count grid exceeds the cell budget");
    }
    {
        std::int64_t work = cells;
        for (std::int64_t i = 0; i < nrows; ++i) {
            const std::int64_t reach =
                ib[static_cast<std::size_t>(i)] - ia[static_cast<std::size_t>(i)] + 1;
            work += reach * (width0[static_cast<std::size_t>(i)] +
                             width1[static_cast<std::size_t>(i)]);
            if (work > max_cells) {
                throw budget_error("quantum count grid exceeds the cell budget");
            }
        }
        cells = work;
    }

    const bool par = use_parallel(exec, cells);
    const CondRows cond0 = build_cond_rows(marginal, ps0, w0, row_tol, par);
    const CondRows cond1 = build_cond_rows(marginal, ps1, w1, row_tol, par);

    const std::int64_t m_lo = ia.front();
    const std::int64_t m_hi = ib.back();
    const std::int64_t mrows = m_hi - m_lo + 1;
    std::vector<double> overlap(static_cast<std::size_t>(mrows), 0.0);
    std::vector<double> mass0(static_cast<std::size_t>(mrows), 0.0);
    std::vector<double> mass1(static_cast<std::size_t>(mrows), 0.0);

    const double log_eta = std::log(eta);
    const double log_1meta = eta < 1.0 ? std::log1p(-eta) : kNegInf;

#pragma omp parallel for schedule(dynamic, 8) if (par)
    for (std::int64_t mi = 0; mi < mrows; ++mi) {
        const std::int64_t m = m_lo + mi;
        // Contributing n interval: ib (monotone) >= m from the left edge,
        // ia (monotone) <= m up to the right edge.
        const auto bfirst = std::lower_bound(ib.begin(), ib.end(), m);
        if (bfirst == ib.end()) continue;
        std::int64_t n_first = marginal.lo + (bfirst - ib.begin());
        const auto alast = std::upper_bound(ia.begin(), ia.end(), m);
        std::int64_t n_last = marginal.lo + (alast - ia.begin()) - 1;
        n_first = std::max(n_first, m);
        n_last = std::min(n_last, n_hi);
        if (n_first > n_last) continue;

        CountWindow u0, u1;
        for (std::int64_t n = n_first; n <= n_last; ++n) {
            const CountRow& r0 = cond0.at(n);
            const CountRow& r1 = cond1.at(n);
            u0.merge({r0.lo, r0.hi()});
            u1.merge({r1.lo, r1.hi()});
        }
        std::vector<double> acc0(static_cast<std::size_t>(u0.width()), 0.0);
        std::vector<double> acc1(static_cast<std::size_t>(u1.width()), 0.0);

        for (std::int64_t n = n_first; n <= n_last; ++n) {
            const double pn = marginal.p[static_cast<std::size_t>(n - marginal.lo)];
            double log_bin = lg_fact(n) - lg_fact(m) - lg_fact(n - m) +
                             static_cast<double>(m) * log_eta;
            if (n > m) log_bin += static_cast<double>(n - m) * log_1meta;
            const double c = pn * std::exp(log_bin);
            if (c == 0.0) continue;

            const CountRow& r0 = cond0.at(n);
            double* dst0 = acc0.data() + (r0.lo - u0.lo);
            for (std::size_t s = 0; s < r0.p.size(); ++s) dst0[s] += c * r0.p[s];
            const CountRow& r1 = cond1.at(n);
            double* dst1 = acc1.data() + (r1.lo - u1.lo);
            for (std::size_t s = 0; s < r1.p.size(); ++s) dst1[s] += c * r1.p[s];
        }

        double ov = 0.0, ms0 = 0.0, ms1 = 0.0;
        const std::int64_t s_lo = std::max(u0.lo, u1.lo);
        const std::int64_t s_hi = std::min(u0.hi, u1.hi);
        for (std::int64_t s = s_lo; s <= s_hi; ++s) {
            ov += std::min(acc0[static_cast<std::size_t>(s - u0.lo)],
                           acc1[static_cast<std::size_t>(s - u1.lo)]);
        }
        for (double v : acc0) ms0 += v;
        for (double v : acc1) ms1 += v;
        overlap[static_cast<std::size_t>(mi)] = ov;
        mass0[static_cast<std::size_t>(mi)] = ms0;
        mass1[static_cast<std::size_t>(mi)] = ms1;
    }

    TmsvErrorStats stats;
    stats.cells = cells;
    stats.rows = mrows;
    for (std::int64_t mi = 0; mi < mrows; ++mi) {
        stats.min_overlap += overlap[static_cast<std::size_t>(mi)];
        stats.mass0 += mass0[static_cast<std::size_t>(mi)];
        stats.mass1 += mass1[static_cast<std::size_t>(mi)];
    }
    return stats;
}

}  // namespace qread::kernels
