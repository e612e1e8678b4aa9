#include "qread/counting.hpp"

#include <algorithm>
#include <cmath>

#include "qread/errors.hpp"
#include "qread/kernels.hpp"

namespace qread {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kJointMassTol = 1e-9;

CountDistribution from_row(const kernels::CountRow& row, double tail_bound) {
    CountDistribution dist;
    dist.support_min = row.lo;
    dist.support_max = row.hi();
    dist.log_pmf.resize(row.p.size());
    for (std::size_t i = 0; i < row.p.size(); ++i) {
        dist.log_pmf[i] = row.p[i] > 0.0 ? std::log(row.p[i]) : kNegInf;
    }
    dist.tail_mass_bound = tail_bound;
    return dist;
}

}  // namespace

ModeCount ModeCount::finite(std::int64_t m) {
    if (m < 1) throw config_error("mode count must be >= 1");
    return ModeCount(m);
}

std::int64_t ModeCount::value() const {
    if (is_infinite()) throw config_error("infinite mode count has no value");
    return m_;
}

ProbeParams::ProbeParams(double mu_in, ModeCount modes_in, double eta_in)
    : mu(mu_in), modes(modes_in), eta(eta_in) {
    if (!(mu >= 0.0)) throw config_error("mu must be >= 0");
    if (!(eta > 0.0 && eta <= 1.0)) throw config_error("eta must lie in (0,1]");
}

double poisson_log_pmf(std::int64_t n, double lambda) {
    if (n < 0) throw config_error("count must be >= 0");
    if (!(lambda >= 0.0)) throw config_error("rate must be >= 0");
    if (lambda == 0.0) return n == 0 ? 0.0 : kNegInf;
    return static_cast<double>(n) * std::log(lambda) - lambda -
           std::lgamma(static_cast<double>(n) + 1.0);
}

double multimode_thermal_log_pmf(std::int64_t n, double mu, ModeCount modes) {
    if (n < 0) throw config_error("count must be >= 0");
    if (!(mu >= 0.0)) throw config_error("mu must be >= 0");
    if (modes.is_infinite()) return poisson_log_pmf(n, mu);
    if (mu == 0.0) return n == 0 ? 0.0 : kNegInf;
    const double m = static_cast<double>(modes.value());
    const double x = mu / m;
    return std::lgamma(static_cast<double>(n) + m) -
           std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(m) +
           static_cast<double>(n) * (std::log(x) - std::log1p(x)) -
           m * std::log1p(x);
}

double binomial_thin_log_pmf(std::int64_t k, std::int64_t n, double p) {
    if (n < 0 || k < 0 || k > n) throw config_error("need 0 <= k <= n");
    if (!(p >= 0.0 && p <= 1.0)) throw config_error("p must lie in [0,1]");
    if (p == 0.0) return k == 0 ? 0.0 : kNegInf;
    if (p == 1.0) return k == n ? 0.0 : kNegInf;
    return std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0) +
           static_cast<double>(k) * std::log(p) +
           static_cast<double>(n - k) * std::log1p(-p);
}

double CountDistribution::mass() const {
    double acc = 0.0;
    for (double lp : log_pmf) acc += std::exp(lp);
    return acc;
}

double CountDistribution::mean() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < log_pmf.size(); ++i) {
        acc += std::exp(log_pmf[i]) *
               static_cast<double>(support_min + static_cast<std::int64_t>(i));
    }
    return acc;
}

CountDistribution poisson_counts(double lambda, double tail_tol) {
    if (!(lambda >= 0.0)) throw config_error("rate must be >= 0");
    return from_row(kernels::poisson_row(lambda, tail_tol), tail_tol);
}

CountDistribution thermal_counts(double mu, ModeCount modes, double tail_tol) {
    if (!(mu >= 0.0)) throw config_error("mu must be >= 0");
    const std::int64_t m = modes.is_infinite() ? 0 : modes.value();
    return from_row(kernels::negbinom_row(mu, m, tail_tol), tail_tol);
}

JointCountDistribution::JointCountDistribution(std::vector<Row> rows,
                                               std::int64_t cells)
    : rows_(std::move(rows)), cells_(cells) {
    double mass = 0.0, es = 0.0, ei = 0.0, esi = 0.0;
    for (const Row& row : rows_) {
        const double m = static_cast<double>(row.n_idler);
        for (std::size_t i = 0; i < row.pmf.size(); ++i) {
            const double v = row.pmf[i];
            const double s = static_cast<double>(row.ns_lo + static_cast<std::int64_t>(i));
            mass += v;
            es += v * s;
            ei += v * m;
            esi += v * s * m;
        }
    }
    total_mass_ = mass;
    mean_signal_ = es;
    mean_idler_ = ei;
    covariance_ = esi - es * ei;
    if (mass < 1.0 - kJointMassTol) {
        throw mass_deficit_error("truncated joint TMSV law lost too much mass");
    }
}

double JointCountDistribution::pmf_at(std::int64_t n_signal,
                                      std::int64_t n_idler) const {
    for (const Row& row : rows_) {
        if (row.n_idler == n_idler) {
            const std::int64_t off = n_signal - row.ns_lo;
            if (off < 0 || off >= static_cast<std::int64_t>(row.pmf.size())) return 0.0;
            return row.pmf[static_cast<std::size_t>(off)];
        }
    }
    return 0.0;
}

std::vector<double> JointCountDistribution::idler_marginal(std::int64_t& lo) const {
    lo = rows_.empty() ? 0 : rows_.front().n_idler;
    std::vector<double> out(rows_.size(), 0.0);
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        for (double v : rows_[r].pmf) out[r] += v;
    }
    return out;
}

std::vector<double> JointCountDistribution::signal_marginal(std::int64_t& lo) const {
    std::int64_t s_lo = 0, s_hi = -1;
    for (const Row& row : rows_) {
        if (row.pmf.empty()) continue;
        const std::int64_t hi = row.ns_lo + static_cast<std::int64_t>(row.pmf.size()) - 1;
        if (s_hi < s_lo) {
            s_lo = row.ns_lo;
            s_hi = hi;
        } else {
            s_lo = std::min(s_lo, row.ns_lo);
            s_hi = std::max(s_hi, hi);
        }
    }
    lo = s_lo;
    std::vector<double> out(static_cast<std::size_t>(std::max<std::int64_t>(0, s_hi - s_lo + 1)), 0.0);
    for (const Row& row : rows_) {
        for (std::size_t i = 0; i < row.pmf.size(); ++i) {
            out[static_cast<std::size_t>(row.ns_lo - s_lo) + i] += row.pmf[i];
        }
    }
    return out;
}

JointCountDistribution joint_tmsv_counts(const ProbeParams& params, double tau,
                                         std::int64_t max_cells, Exec exec) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw config_error("tau must lie in [0,1]");
    const std::int64_t m = params.modes.is_infinite() ? 0 : params.modes.value();
    const kernels::CountRow marginal =
        kernels::negbinom_row(params.mu, m, kMarginalTailTol);
    const std::int64_t nrows = static_cast<std::int64_t>(marginal.p.size());

    std::vector<JointCountDistribution::Row> rows;
    std::int64_t cells = 0;

    if (params.eta == 1.0) {
        // Idler count equals the generated number; each joint row is the
        // signal-thinning law scaled by the marginal.
        rows.resize(static_cast<std::size_t>(nrows));
        for (std::int64_t i = 0; i < nrows; ++i) {
            const std::int64_t n = marginal.lo + i;
            cells += kernels::binomial_window(n, tau, kRowTailTol).width();
            if (cells > max_cells) {
                throw budget_error("joint TMSV grid exceeds the cell budget");
            }
        }
        const bool par = kernels::use_parallel(exec, cells);
#pragma omp parallel for schedule(dynamic, 16) if (par)
        for (std::int64_t i = 0; i < nrows; ++i) {
            const std::int64_t n = marginal.lo + i;
            const double taus[1] = {tau};
            const double ws[1] = {marginal.p[static_cast<std::size_t>(i)]};
            kernels::CountRow row = kernels::binomial_mixture_row(
                n, std::span<const double>(taus), std::span<const double>(ws),
                kRowTailTol);
            rows[static_cast<std::size_t>(i)] =
                JointCountDistribution::Row{n, row.lo, std::move(row.p)};
        }
        return JointCountDistribution(std::move(rows), cells);
    }

    // Lossy case: accumulate each idler row from all generated numbers that
    // feed it, mirroring the min-overlap kernel's two-phase layout.
    const double ps[1] = {params.eta * tau};
    const double ws[1] = {1.0};
    std::vector<std::int64_t> ia(static_cast<std::size_t>(nrows));
    std::vector<std::int64_t> ib(static_cast<std::size_t>(nrows));
    for (std::int64_t i = 0; i < nrows; ++i) {
        const kernels::CountWindow w =
            kernels::binomial_window(marginal.lo + i, params.eta, kRowTailTol);
        ia[static_cast<std::size_t>(i)] = w.lo;
        ib[static_cast<std::size_t>(i)] = w.hi;
    }
    for (std::int64_t i = nrows - 2; i >= 0; --i) {
        ia[static_cast<std::size_t>(i)] = std::min(ia[static_cast<std::size_t>(i)],
                                                   ia[static_cast<std::size_t>(i + 1)]);
    }
    for (std::int64_t i = 1; i < nrows; ++i) {
        ib[static_cast<std::size_t>(i)] = std::max(ib[static_cast<std::size_t>(i)],
                                                   ib[static_cast<std::size_t>(i - 1)]);
    }

    std::vector<kernels::CountRow> cond(static_cast<std::size_t>(nrows));
    for (std::int64_t i = 0; i < nrows; ++i) {
        cells += kernels::binomial_window(marginal.lo + i, ps[0], kRowTailTol).width();
        if (cells > max_cells) {
            throw budget_error("joint TMSV grid exceeds the cell budget");
        }
    }
    {
        const bool par = kernels::use_parallel(exec, cells);
#pragma omp parallel for schedule(dynamic, 16) if (par)
        for (std::int64_t i = 0; i < nrows; ++i) {
            cond[static_cast<std::size_t>(i)] = kernels::binomial_mixture_row(
                marginal.lo + i, std::span<const double>(ps),
                std::span<const double>(ws), kRowTailTol);
        }
    }

    const std::int64_t m_lo = ia.front();
    const std::int64_t m_hi = ib.back();
    for (std::int64_t mm = m_lo; mm <= m_hi; ++mm) {
        JointCountDistribution::Row out_row;
        out_row.n_idler = mm;
        const auto bfirst = std::lower_bound(ib.begin(), ib.end(), mm);
        if (bfirst == ib.end()) continue;
        std::int64_t n_first =
            std::max<std::int64_t>(marginal.lo + (bfirst - ib.begin()), mm);
        const auto alast = std::upper_bound(ia.begin(), ia.end(), mm);
        const std::int64_t n_last =
            std::min(marginal.lo + (alast - ia.begin()) - 1, marginal.hi());
        if (n_first > n_last) continue;

        kernels::CountWindow u;
        for (std::int64_t n = n_first; n <= n_last; ++n) {
            const auto& r = cond[static_cast<std::size_t>(n - marginal.lo)];
            u.merge({r.lo, r.hi()});
        }
        cells += u.width();
        if (cells > max_cells) {
            throw budget_error("joint TMSV grid exceeds the cell budget");
        }
        out_row.ns_lo = u.lo;
        out_row.pmf.assign(static_cast<std::size_t>(u.width()), 0.0);
        for (std::int64_t n = n_first; n <= n_last; ++n) {
            const double pn = marginal.p[static_cast<std::size_t>(n - marginal.lo)];
            const double c =
                pn * std::exp(binomial_thin_log_pmf(mm, n, params.eta));
            const auto& r = cond[static_cast<std::size_t>(n - marginal.lo)];
            double* dst = out_row.pmf.data() + (r.lo - u.lo);
            for (std::size_t s = 0; s < r.p.size(); ++s) dst[s] += c * r.p[s];
        }
        rows.push_back(std::move(out_row));
    }
    return JointCountDistribution(std::move(rows), cells);
}

}  // namespace qread
