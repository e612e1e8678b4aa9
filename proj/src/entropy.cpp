#include "qread/entropy.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

#include "qread/errors.hpp"

namespace qread {

namespace {

constexpr double kEigClipTol = 1e-10;
constexpr double kPsdTol = -1e-8;

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

}  // namespace

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw config_error("binary_entropy requires p in [0,1]");
    }
    return -xlog2x(p) - xlog2x(1.0 - p);
}

double info_from_perr(double p_err) {
    // Strategy evaluations can overshoot 1/2 by rounding; anything beyond
    // 1e-12 signals a broken decoder upstream.
    if (!(p_err >= 0.0 && p_err <= 0.5 + 1e-12)) {
        throw config_error("info_from_perr requires p_err in [0, 1/2]");
    }
    const double p = std::min(p_err, 0.5);
    return 1.0 - binary_entropy(p);
}

GramMixture::GramMixture(std::vector<double> weights_in, std::vector<double> gram_in)
    : weights(std::move(weights_in)), gram(std::move(gram_in)) {
    const std::size_t k = weights.size();
    if (k == 0) throw config_error("mixture must have at least one component");
    if (gram.size() != k * k) throw config_error("gram matrix dimension mismatch");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw config_error("mixture weights must be positive");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw config_error("mixture weights must sum to 1 within 1e-12");
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (gram[i * k + i] != 1.0) {
            throw config_error("gram diagonal must be exactly 1");
        }
        for (std::size_t j = 0; j < i; ++j) {
            const double g = gram[i * k + j];
            if (g != gram[j * k + i]) throw config_error("gram matrix must be symmetric");
            if (!(g >= 0.0 && g <= 1.0)) {
                throw config_error("gram entries must lie in [0,1]");
            }
        }
    }
}

std::vector<double> coherent_gram(const std::vector<double>& taus, double mu,
                                  Exec exec) {
    if (taus.empty()) throw config_error("coherent_gram requires a nonempty support");
    if (!(mu >= 0.0)) throw config_error("coherent_gram requires mu >= 0");
    for (double t : taus) {
        if (!(t >= 0.0 && t <= 1.0)) {
            throw config_error("coherent_gram requires tau in [0,1]");
        }
    }
    const std::int64_t k = static_cast<std::int64_t>(taus.size());
    std::vector<double> roots(taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i) roots[i] = std::sqrt(taus[i]);

    std::vector<double> g(taus.size() * taus.size());
    const bool par = kernels::use_parallel(exec, k * k);
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t i = 0; i < k; ++i) {
        g[i * k + i] = 1.0;
        for (std::int64_t j = 0; j < i; ++j) {
            const double d = roots[i] - roots[j];
            const double v = std::exp(-0.5 * mu * d * d);
            g[i * k + j] = v;
            g[j * k + i] = v;
        }
    }
    return g;
}

double mixture_entropy(const GramMixture& mix) {
    const std::size_t k = mix.dim();
    if (k == 1) return 0.0;

    Eigen::MatrixXd m(k, k);
    std::vector<double> sqw(k);
    for (std::size_t i = 0; i < k; ++i) sqw[i] = std::sqrt(mix.weights[i]);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            m(i, j) = sqw[i] * mix.gram_at(i, j) * sqw[j];
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eigendecomposition failed");
    }

    double entropy = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double lambda = solver.eigenvalues()(static_cast<Eigen::Index>(i));
        if (lambda < kPsdTol) {
            throw config_error("gram matrix is not positive semidefinite");
        }
        if (lambda < kEigClipTol) lambda = 0.0;
        if (lambda > 1.0) lambda = 1.0;
        entropy -= xlog2x(lambda);
    }
    return entropy;
}

}  // namespace qread
