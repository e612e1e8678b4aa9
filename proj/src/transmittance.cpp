#include "qread/transmittance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qread/errors.hpp"

namespace qread {

namespace {

constexpr double kWeightSumTol = 1e-12;

void validate_spec(const TransmittanceSpec& spec) {
    if (!(spec.mean >= 0.0 && spec.mean <= 1.0)) {
        throw config_error("transmittance mean must lie in [0,1]");
    }
    if (!(spec.sigma >= 0.0)) {
        throw config_error("transmittance sigma must be >= 0");
    }
}

}  // namespace

TransmittanceSpec::TransmittanceSpec(double mean, double sigma)
    : mean(mean), sigma(sigma) {
    validate_spec(*this);
}

DiscreteDistribution::DiscreteDistribution(std::vector<Point> points)
    : points_(std::move(points)) {
    if (points_.empty()) {
        throw config_error("discrete distribution must have at least one point");
    }
    double sum = 0.0;
    double prev = -std::numeric_limits<double>::infinity();
    for (const Point& pt : points_) {
        if (!(pt.tau >= 0.0 && pt.tau <= 1.0)) {
            throw config_error("support point outside [0,1]");
        }
        if (!(pt.tau > prev)) {
            throw config_error("support points must be strictly increasing");
        }
        if (!(pt.weight > 0.0)) {
            throw config_error("weights must be positive");
        }
        prev = pt.tau;
        sum += pt.weight;
    }
    if (std::abs(sum - 1.0) > kWeightSumTol) {
        throw config_error("weights must sum to 1 within 1e-12");
    }
}

std::vector<double> DiscreteDistribution::taus() const {
    std::vector<double> out(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) out[i] = points_[i].tau;
    return out;
}

std::vector<double> DiscreteDistribution::weights() const {
    std::vector<double> out(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) out[i] = points_[i].weight;
    return out;
}

CellModel::CellModel(DiscreteDistribution g0_in, DiscreteDistribution g1_in,
                     double p0_in, double p1_in)
    : g0(std::move(g0_in)), g1(std::move(g1_in)), p0(p0_in), p1(p1_in) {
    if (!(p0 >= 0.0 && p1 >= 0.0)) {
        throw config_error("priors must be nonnegative");
    }
    if (std::abs(p0 + p1 - 1.0) > kWeightSumTol) {
        throw config_error("priors must sum to 1 within 1e-12");
    }
}

bool CellModel::equal_priors() const { return p0 == p1; }

DiscreteDistribution discretize(const TransmittanceSpec& spec, int k,
                                double n_sigma) {
    validate_spec(spec);
    if (k < 1) throw config_error("discretization size k must be >= 1");
    if (!(n_sigma > 0.0)) throw config_error("n_sigma must be > 0");

    if (spec.sigma == 0.0) {
        return DiscreteDistribution({{spec.mean, 1.0}});
    }

    const double lo = std::max(0.0, spec.mean - n_sigma * spec.sigma);
    const double hi = std::min(1.0, spec.mean + n_sigma * spec.sigma);
    if (!(hi >= lo)) throw config_error("clipped discretization window is empty");
    if (hi == lo || k == 1) {
        return DiscreteDistribution({{0.5 * (lo + hi), 1.0}});
    }

    const double step = (hi - lo) / static_cast<double>(k - 1);
    std::vector<double> taus;
    std::vector<double> logw;
    taus.reserve(k);
    logw.reserve(k);
    double max_logw = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
        const double tau = (j == k - 1) ? hi : lo + step * j;
        if (tau < 0.0 || tau > 1.0) continue;  // clipped window keeps this vacuous
        const double z = (tau - spec.mean) / spec.sigma;
        taus.push_back(tau);
        logw.push_back(-0.5 * z * z);
        max_logw = std::max(max_logw, logw.back());
    }
    if (taus.empty()) throw config_error("clipped discretization window is empty");

    std::vector<DiscreteDistribution::Point> points;
    points.reserve(taus.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < taus.size(); ++j) {
        const double w = std::exp(logw[j] - max_logw);
        if (w > 0.0) {
            points.push_back({taus[j], w});
            sum += w;
        }
    }
    for (auto& pt : points) pt.weight /= sum;
    return DiscreteDistribution(std::move(points));
}

double expect(const DiscreteDistribution& dist,
              const std::function<double(double)>& f) {
    double acc = 0.0;
    for (const auto& pt : dist.points()) acc += pt.weight * f(pt.tau);
    return acc;
}

namespace {

// Local cell width used to turn atom weights back into density samples.
std::vector<double> local_spacing(const std::vector<DiscreteDistribution::Point>& pts) {
    const std::size_t n = pts.size();
    std::vector<double> h(n);
    if (n == 1) {
        h[0] = 0.0;
        return h;
    }
    h[0] = pts[1].tau - pts[0].tau;
    h[n - 1] = pts[n - 1].tau - pts[n - 2].tau;
    for (std::size_t j = 1; j + 1 < n; ++j) {
        h[j] = 0.5 * (pts[j + 1].tau - pts[j - 1].tau);
    }
    return h;
}

// Piecewise-linear density interpolant from atoms; zero outside the support.
struct DensityCurve {
    std::vector<double> x;
    std::vector<double> d;

    double at(double t) const {
        if (x.empty() || t < x.front() || t > x.back()) return 0.0;
        auto it = std::upper_bound(x.begin(), x.end(), t);
        if (it == x.begin()) return d.front();
        if (it == x.end()) return d.back();
        const std::size_t i = static_cast<std::size_t>(it - x.begin());
        const double u = (t - x[i - 1]) / (x[i] - x[i - 1]);
        return d[i - 1] + u * (d[i] - d[i - 1]);
    }
};

DensityCurve density_curve(const DiscreteDistribution& dist, double prior) {
    const auto& pts = dist.points();
    const auto h = local_spacing(pts);
    DensityCurve c;
    c.x.resize(pts.size());
    c.d.resize(pts.size());
    for (std::size_t j = 0; j < pts.size(); ++j) {
        c.x[j] = pts[j].tau;
        c.d[j] = prior * pts[j].weight / h[j];
    }
    return c;
}

bool identical_support(const DiscreteDistribution& a, const DiscreteDistribution& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (a.points()[j].tau != b.points()[j].tau) return false;
    }
    return true;
}

}  // namespace

double bayes_error_floor(const CellModel& model) {
    // Coincident supports compare atom by atom; this keeps the g0 == g1
    // equal-prior case at exactly 1/2.
    if (identical_support(model.g0, model.g1)) {
        double acc = 0.0;
        for (std::size_t j = 0; j < model.g0.size(); ++j) {
            acc += std::min(model.p0 * model.g0.points()[j].weight,
                            model.p1 * model.g1.points()[j].weight);
        }
        return acc;
    }
    // A delta level against a continuous one is perfectly separable: the atom
    // carries zero overlap with any density.
    if (model.g0.is_delta() || model.g1.is_delta()) return 0.0;

    const DensityCurve c0 = density_curve(model.g0, model.p0);
    const DensityCurve c1 = density_curve(model.g1, model.p1);
    const double lo = std::max(c0.x.front(), c1.x.front());
    const double hi = std::min(c0.x.back(), c1.x.back());
    if (!(hi > lo)) return 0.0;

    std::vector<double> grid;
    grid.reserve(c0.x.size() + c1.x.size() + 2);
    grid.push_back(lo);
    for (double t : c0.x)
        if (t > lo && t < hi) grid.push_back(t);
    for (double t : c1.x)
        if (t > lo && t < hi) grid.push_back(t);
    grid.push_back(hi);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    // Trapezoid of min(d0, d1), inserting the crossing point inside any
    // segment where the two interpolants swap order.
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double a = grid[i];
        const double b = grid[i + 1];
        const double fa0 = c0.at(a), fa1 = c1.at(a);
        const double fb0 = c0.at(b), fb1 = c1.at(b);
        const double da = fa0 - fa1;
        const double db = fb0 - fb1;
        if (da * db < 0.0) {
            const double u = da / (da - db);
            const double xc = a + u * (b - a);
            const double fc = std::min(c0.at(xc), c1.at(xc));
            acc += 0.5 * (std::min(fa0, fa1) + fc) * (xc - a);
            acc += 0.5 * (fc + std::min(fb0, fb1)) * (b - xc);
        } else {
            acc += 0.5 * (std::min(fa0, fa1) + std::min(fb0, fb1)) * (b - a);
        }
    }
    return std::min(acc, 0.5);
}

}  // namespace qread
