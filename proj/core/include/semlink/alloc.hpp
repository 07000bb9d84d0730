#pragma once

#include <cstdint>

#include "semlink/importance.hpp"

namespace semlink {

// Per-frame one-to-one matching of semantics to data subcarriers. Subcarrier
// indices refer to positions in the data-subcarrier list (not raw grid bins).
struct SubcarrierAssignment {
    std::vector<int> subcarrier_of; // semantic index -> data subcarrier index
    std::vector<int> frame_of;      // semantic index -> frame id
};

struct BitAllocation {
    std::vector<int> bits; // b_i >= 1
    int budget = 0;        // B; sum(bits) <= budget

    int total() const;
    bool feasible() const;
};

// Rank-to-rank greedy matching: semantics sorted by omega descending paired
// with subcarriers sorted by gain descending. Ties resolve to the lower
// semantic / subcarrier index. Maximizes sum omega_i * gain_rho(i).
SubcarrierAssignment allocate_subcarriers(const Vec& omega, const Vec& gains);

// Even split; the B mod C remainder goes one bit each to the
// highest-importance semantics.
BitAllocation allocate_bits_eam(const Vec& omega, int budget);

// Proportional shares B*omega_i with a floor of 1, settled to sum exactly B
// by largest fractional remainder.
BitAllocation allocate_bits_rbam(const Vec& omega, int budget);

// Uniformly random composition of B into C parts, each >= 1.
BitAllocation allocate_bits_ram(int budget, int n_semantics, uint64_t seed);

// Importance-weighted squared error, summed over map entries:
// sum_i omega_i * |a_i - a'_i|^2. The assignment only selects the transmitted
// copy; with a per-frame bijection it does not change the value.
double weighted_distortion(const FeatureMaps& sent, const FeatureMaps& received,
                           const Vec& omega, const SubcarrierAssignment* rho = nullptr);

// task_perf - beta * distortion.
double objective(double task_perf, double distortion, double beta);

} // namespace semlink
