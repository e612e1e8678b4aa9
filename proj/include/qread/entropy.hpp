#pragma once

#include <vector>

#include "qread/exec.hpp"

namespace qread {

/// Binary Shannon entropy in bits, with 0 log 0 = 0.
double binary_entropy(double p);

/// Information recovered from a binary decision with error probability
/// p_err <= 1/2: returns 1 - binary_entropy(p_err), in [0,1]. Values above
/// 1/2 indicate a decoder worse than guessing and are rejected.
double info_from_perr(double p_err);

/// A finite mixture of normalized pure states described only through its
/// Gram matrix of pairwise overlaps. gram is symmetric with unit diagonal
/// and entries in [0,1]; weights are positive and sum to 1.
struct GramMixture {
    std::vector<double> weights;
    std::vector<double> gram;  // row-major K x K

    GramMixture(std::vector<double> weights, std::vector<double> gram);

    std::size_t dim() const { return weights.size(); }
    double gram_at(std::size_t i, std::size_t j) const {
        return gram[i * dim() + j];
    }
};

/// Pairwise overlaps of attenuated coherent states with |alpha|^2 = mu:
/// G(i,j) = exp(-mu (sqrt(tau_i) - sqrt(tau_j))^2 / 2).
std::vector<double> coherent_gram(const std::vector<double>& taus, double mu,
                                  Exec exec = Exec::Auto);

/// Von Neumann entropy, in bits, of the mixture sum_i q_i |psi_i><psi_i|.
/// Computed from the eigenvalues of sqrt(Q) G sqrt(Q), which is similar to
/// Q G and symmetric; eigenvalues are clipped to [0,1] (tolerance 1e-10)
/// before the x log x sum. Eigenvalues below -1e-8 mean the Gram matrix was
/// not PSD and raise config_error.
double mixture_entropy(const GramMixture& mix);

}  // namespace qread
