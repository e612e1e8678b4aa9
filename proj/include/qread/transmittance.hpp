#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace qread {

/// Gaussian description of one encoding level: the cell transmittance for bit
/// value i is a random variable with mean `mean` and standard deviation
/// `sigma`, both dimensionless. sigma == 0 is a perfectly written level.
struct TransmittanceSpec {
    double mean = 0.0;
    double sigma = 0.0;

    TransmittanceSpec() = default;
    TransmittanceSpec(double mean, double sigma);
};

/// Finite weighted support approximating a transmittance distribution on
/// [0,1]. Points are strictly increasing, weights positive and normalized.
class DiscreteDistribution {
public:
    struct Point {
        double tau;
        double weight;
    };

    /// Validates ordering, support range and normalization (1e-12).
    explicit DiscreteDistribution(std::vector<Point> points);

    const std::vector<Point>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    bool is_delta() const { return points_.size() == 1; }

    std::vector<double> taus() const;
    std::vector<double> weights() const;

private:
    std::vector<Point> points_;
};

/// Pair of level distributions with prior probabilities (default 1/2 each).
struct CellModel {
    DiscreteDistribution g0;
    DiscreteDistribution g1;
    double p0 = 0.5;
    double p1 = 0.5;

    CellModel(DiscreteDistribution g0, DiscreteDistribution g1, double p0 = 0.5,
              double p1 = 0.5);

    bool equal_priors() const;
};

inline constexpr int kDefaultK = 101;
inline constexpr double kDefaultNSigma = 5.0;

/// Uniform k-point discretization of the Gaussian level on
/// [max(0, mean - n_sigma*sigma), min(1, mean + n_sigma*sigma)], weights
/// proportional to the Gaussian density and renormalized. sigma == 0 gives
/// the single point (mean, 1).
DiscreteDistribution discretize(const TransmittanceSpec& spec, int k = kDefaultK,
                                double n_sigma = kDefaultNSigma);

/// Expectation sum_j w_j f(tau_j).
double expect(const DiscreteDistribution& dist,
              const std::function<double(double)>& f);

/// Irreducible discrimination error given a perfect transmittance
/// measurement: the min-density overlap of p0*g0 and p1*g1. Both supports are
/// refined onto their union grid with density-consistent weights before the
/// pointwise min.
double bayes_error_floor(const CellModel& model);

}  // namespace qread
