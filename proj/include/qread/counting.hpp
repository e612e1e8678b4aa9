#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "qread/exec.hpp"

namespace qread {

/// Number of signal/idler mode pairs; the infinite value selects the
/// Poisson limit of the multimode thermal photon statistics.
class ModeCount {
public:
    static ModeCount infinite() { return ModeCount(0); }
    static ModeCount finite(std::int64_t m);

    bool is_infinite() const { return m_ == 0; }
    std::int64_t value() const;

private:
    explicit ModeCount(std::int64_t m) : m_(m) {}
    std::int64_t m_;  // 0 encodes the infinite-mode limit
};

/// Probe configuration: total mean signal photons mu shared across `modes`
/// TMSV pairs, with overall optical/detection efficiency eta on each arm.
struct ProbeParams {
    double mu = 0.0;
    ModeCount modes = ModeCount::infinite();
    double eta = 1.0;

    ProbeParams() = default;
    ProbeParams(double mu, ModeCount modes, double eta);
};

/// ln P(n) for a Poisson law with mean lambda.
double poisson_log_pmf(std::int64_t n, double lambda);

/// ln P(n) for the total photon count of `modes` thermal modes with total
/// mean mu (a negative binomial); modes = 1 is the single-mode thermal law
/// mu^n/(mu+1)^(n+1) and the infinite-mode limit is Poisson(mu).
double multimode_thermal_log_pmf(std::int64_t n, double mu, ModeCount modes);

/// ln P(k) for binomial thinning: k survivors out of n trials with
/// per-photon survival probability p. Exact at p = 0 and p = 1.
double binomial_thin_log_pmf(std::int64_t k, std::int64_t n, double p);

/// A truncated count law stored as log-probabilities on a contiguous
/// support. tail_mass_bound is a certified upper bound on the probability
/// mass outside [support_min, support_max].
struct CountDistribution {
    std::int64_t support_min = 0;
    std::int64_t support_max = -1;
    std::vector<double> log_pmf;
    double tail_mass_bound = 0.0;

    double log_at(std::int64_t n) const {
        if (n < support_min || n > support_max) {
            return -std::numeric_limits<double>::infinity();
        }
        return log_pmf[static_cast<std::size_t>(n - support_min)];
    }
    double mass() const;
    double mean() const;
};

inline constexpr double kMarginalTailTol = 1e-12;
inline constexpr double kRowTailTol = 1e-14;

CountDistribution poisson_counts(double lambda, double tail_tol = kMarginalTailTol);
CountDistribution thermal_counts(double mu, ModeCount modes,
                                 double tail_tol = kMarginalTailTol);

/// Joint law of the receiver counts (n_S, n_I) for TMSV probing of a cell
/// with fixed transmittance tau: the generated pair number n follows the
/// multimode thermal law, the idler arm is thinned by eta and the signal
/// arm by eta*tau, independently given n. Stored as ragged rows indexed by
/// the idler count.
class JointCountDistribution {
public:
    struct Row {
        std::int64_t n_idler;
        std::int64_t ns_lo;
        std::vector<double> pmf;
    };

    JointCountDistribution(std::vector<Row> rows, std::int64_t cells);

    const std::vector<Row>& rows() const { return rows_; }
    std::int64_t cells() const { return cells_; }

    double pmf_at(std::int64_t n_signal, std::int64_t n_idler) const;
    double total_mass() const { return total_mass_; }
    double mean_signal() const { return mean_signal_; }
    double mean_idler() const { return mean_idler_; }
    double covariance() const { return covariance_; }
    std::vector<double> idler_marginal(std::int64_t& lo) const;
    std::vector<double> signal_marginal(std::int64_t& lo) const;

private:
    std::vector<Row> rows_;
    std::int64_t cells_ = 0;
    double total_mass_ = 0.0;
    double mean_signal_ = 0.0;
    double mean_idler_ = 0.0;
    double covariance_ = 0.0;
};

inline constexpr std::int64_t kDefaultCellBudget = 200'000'000;

/// Builds the joint TMSV count law for one transmittance value. Signals
/// mass_deficit_error if the truncated law keeps less than 1 - 1e-9 of the
/// probability, and budget_error if the count grid would exceed max_cells.
JointCountDistribution joint_tmsv_counts(const ProbeParams& params, double tau,
                                         std::int64_t max_cells = kDefaultCellBudget,
                                         Exec exec = Exec::Auto);

}  // namespace qread
