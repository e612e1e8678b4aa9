#pragma once

#include <optional>
#include <vector>

#include "qread/exec.hpp"
#include "qread/transmittance.hpp"

namespace qread {

/// Parametric cell description kept alongside the discretized model so the
/// capacity refinement can rebuild the supports at any dimension k.
struct CellSpec {
    TransmittanceSpec level0;
    TransmittanceSpec level1;
    double p0 = 0.5;
    double p1 = 0.5;

    CellModel discretized(int k, double n_sigma = kDefaultNSigma) const;
};

struct CapacityOptions {
    int k_start = 25;
    int k_cap = 1600;
    double tol_bits = 1e-5;
};

struct CapacityResult {
    double chi_bits = 0.0;
    int k_used = 0;
    double convergence_gap = 0.0;
    bool converged = false;
    std::optional<bool> concave_on_grid;
};

/// Holevo quantity, in bits, of the coherent-probe output ensemble for a
/// model already discretized at the desired dimension: the two supports are
/// merged (coincident tau within 1e-12 add their weights) and all three
/// entropy terms go through the Gram-matrix spectrum.
double chi_coherent(const CellModel& model, double mu, Exec exec = Exec::Auto);

/// Classical capacity of the imperfect memory: chi_coherent under k-doubling
/// from k_start until the gap drops below tol_bits or k exceeds k_cap (the
/// result is then flagged as non-converged). Losses enter as effective
/// energy eta*mu.
CapacityResult chi_classical(const CellSpec& cell, double mu, double eta = 1.0,
                             const CapacityOptions& options = {},
                             Exec exec = Exec::Auto);

struct ConcavityReport {
    bool concave = false;
    // Indices i of grid triples (i-1, i, i+1) where chi dips below the chord
    // by more than the tolerance.
    std::vector<std::size_t> violations;
};

inline constexpr double kConcavityTol = 1e-7;

/// Numerical concavity of chi over an increasing mu grid (>= 3 points),
/// evaluated at fixed discretization k: every interior point must lie no
/// more than kConcavityTol bits below the chord of its neighbours.
ConcavityReport check_concavity(const CellSpec& cell,
                                const std::vector<double>& mu_grid,
                                double eta = 1.0, int k = kDefaultK,
                                double n_sigma = kDefaultNSigma,
                                Exec exec = Exec::Auto);

}  // namespace qread
