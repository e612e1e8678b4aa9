#pragma once

#include <cstdint>
#include <string>

#include "qread/capacity.hpp"
#include "qread/counting.hpp"
#include "qread/exec.hpp"
#include "qread/transmittance.hpp"

namespace qread {

enum class StrategyId { CHB, CPC, CMV, QUANTUM };

std::string to_string(StrategyId id);

struct StrategyDiagnostics {
    double mass_deficit0 = 0.0;
    double mass_deficit1 = 0.0;
    std::int64_t cells = 0;
    std::int64_t rows = 0;
    int k0 = 0;
    int k1 = 0;
};

/// Outcome of one strategy evaluation; info_bits = 1 - H(p_err) always.
struct StrategyResult {
    StrategyId strategy_id;
    double p_err = 0.5;
    double info_bits = 0.0;
    StrategyDiagnostics diagnostics;
};

struct QuantumOptions {
    double marginal_tol = kMarginalTailTol;
    double row_tol = kRowTailTol;
    std::int64_t max_cells = kDefaultCellBudget;
};

/// Helstrom-based lower bound on any classical receiver's error, averaged
/// over the two discretized level distributions. Requires equal priors.
StrategyResult classical_hb(const CellModel& model, double mu);

/// Classical coherent probe + photon counting with a maximum-likelihood
/// decision under the full mixture count laws. Losses rescale the probe
/// energy to eta*mu.
StrategyResult classical_pc(const CellModel& model, double mu, double eta = 1.0);

/// Same receiver, but the decision rule only uses the Poisson likelihoods at
/// the distribution mean transmittances; the error is still scored under the
/// true mixture laws.
StrategyResult classical_mv(const CellModel& model, double mu, double eta = 1.0);

/// TMSV probe with per-arm photon counting and maximum-likelihood decoding
/// over (n_S, n_I) pairs. Losses thin both arms rather than rescaling mu.
StrategyResult quantum_pc(const CellModel& model, const ProbeParams& params,
                          const QuantumOptions& options = {},
                          Exec exec = Exec::Auto);

enum class Benchmark { PC, HB, CHI };

std::string to_string(Benchmark b);

/// Quantum gain G = Q - C against the selected classical benchmark; may be
/// negative. The CHI benchmark runs the k-doubling capacity computation.
double quantum_gain(const CellSpec& cell, const ProbeParams& params,
                    Benchmark benchmark, int k = kDefaultK,
                    double n_sigma = kDefaultNSigma,
                    const CapacityOptions& capacity_options = {},
                    const QuantumOptions& quantum_options = {},
                    Exec exec = Exec::Auto);

}  // namespace qread
