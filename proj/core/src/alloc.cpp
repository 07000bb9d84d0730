#include "semlink/alloc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "semlink/rng.hpp"

namespace semlink {

int BitAllocation::total() const {
    return std::accumulate(bits.begin(), bits.end(), 0);
}

bool BitAllocation::feasible() const {
    if (total() > budget) return false;
    for (int b : bits)
        if (b < 1) return false;
    return true;
}

namespace {

// Indices sorted by value descending, ties toward the lower index.
std::vector<int> rank_desc(const Vec& values) {
    std::vector<int> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return values[size_t(a)] > values[size_t(b)];
    });
    return idx;
}

void check_budget(int budget, size_t c) {
    if (budget < int(c))
        throw std::invalid_argument("bit allocation: budget below one bit per semantic");
    if (c == 0) throw std::invalid_argument("bit allocation: no semantics");
}

} // namespace

SubcarrierAssignment allocate_subcarriers(const Vec& omega, const Vec& gains) {
    if (omega.size() > gains.size())
        throw std::invalid_argument("allocate_subcarriers: more semantics than subcarriers");
    auto sem_rank = rank_desc(omega);
    auto sc_rank = rank_desc(gains);
    SubcarrierAssignment out;
    out.subcarrier_of.assign(omega.size(), -1);
    out.frame_of.assign(omega.size(), 0);
    for (size_t r = 0; r < sem_rank.size(); ++r) {
        out.subcarrier_of[size_t(sem_rank[r])] = sc_rank[r];
    }
    return out;
}

BitAllocation allocate_bits_eam(const Vec& omega, int budget) {
    const size_t c = omega.size();
    check_budget(budget, c);
    BitAllocation out;
    out.budget = budget;
    out.bits.assign(c, budget / int(c));
    int rem = budget % int(c);
    auto rank = rank_desc(omega);
    for (int r = 0; r < rem; ++r) out.bits[size_t(rank[size_t(r)])] += 1;
    return out;
}

BitAllocation allocate_bits_rbam(const Vec& omega, int budget) {
    const size_t c = omega.size();
    check_budget(budget, c);
    double wsum = std::accumulate(omega.begin(), omega.end(), 0.0);
    BitAllocation out;
    out.budget = budget;
    out.bits.resize(c);
    std::vector<double> share(c);
    for (size_t i = 0; i < c; ++i) {
        share[i] = wsum > 0.0 ? double(budget) * omega[i] / wsum
                              : double(budget) / double(c);
        out.bits[i] = std::max(1, int(std::floor(share[i])));
    }
    // Settle to the exact budget by largest remainder, where the remainder
    // is measured against the bits already held (share - bits). Entries
    // raised to the floor of 1 hold more than their share and so queue last;
    // this keeps b monotone in omega.
    auto deficit = [&](size_t i) { return share[i] - double(out.bits[i]); };
    int total = out.total();
    while (total < budget) {
        size_t best = 0;
        for (size_t i = 1; i < c; ++i) {
            if (deficit(i) > deficit(best)) best = i;
        }
        out.bits[best] += 1;
        ++total;
    }
    while (total > budget) {
        size_t best = c; // entry above 1 with the smallest remainder; ties
                         // give the bit back from the higher index
        for (size_t i = 0; i < c; ++i) {
            if (out.bits[i] <= 1) continue;
            if (best == c || deficit(i) <= deficit(best)) best = i;
        }
        if (best == c) throw std::logic_error("allocate_bits_rbam: cannot settle budget");
        out.bits[best] -= 1;
        --total;
    }
    return out;
}

BitAllocation allocate_bits_ram(int budget, int n_semantics, uint64_t seed) {
    check_budget(budget, size_t(n_semantics));
    BitAllocation out;
    out.budget = budget;
    out.bits.assign(size_t(n_semantics), 1);
    if (budget == n_semantics) return out;
    // Uniform composition of B into C positive parts: choose C-1 distinct
    // cut points from the B-1 interior gaps (selection sampling), parts are
    // the gap widths.
    Rng rng(seed);
    const int gaps = budget - 1;
    const int cuts = n_semantics - 1;
    std::vector<int> cut;
    cut.reserve(size_t(cuts));
    int needed = cuts;
    for (int g = 1; g <= gaps && needed > 0; ++g) {
        int remaining = gaps - g + 1;
        if (double(remaining) * rng.uniform() < double(needed)) {
            cut.push_back(g);
            --needed;
        }
    }
    int prev = 0;
    for (int i = 0; i < cuts; ++i) {
        out.bits[size_t(i)] = cut[size_t(i)] - prev;
        prev = cut[size_t(i)];
    }
    out.bits[size_t(n_semantics - 1)] = budget - prev;
    return out;
}

double weighted_distortion(const FeatureMaps& sent, const FeatureMaps& received,
                           const Vec& omega, const SubcarrierAssignment* rho) {
    if (sent.C != received.C || sent.W != received.W || sent.H != received.H)
        throw std::invalid_argument("weighted_distortion: shape mismatch");
    if (int(omega.size()) != sent.C)
        throw std::invalid_argument("weighted_distortion: omega length mismatch");
    if (rho && int(rho->subcarrier_of.size()) != sent.C)
        throw std::invalid_argument("weighted_distortion: assignment does not cover semantics");
    const int ms = sent.map_size();
    double total = 0.0;
    for (int k = 0; k < sent.C; ++k) {
        const double* a = sent.map(k);
        const double* b = received.map(k);
        double err = 0.0;
        for (int e = 0; e < ms; ++e) {
            double diff = a[e] - b[e];
            err += diff * diff;
        }
        total += omega[size_t(k)] * err;
    }
    return total;
}

double objective(double task_perf, double distortion, double beta) {
    return task_perf - beta * distortion;
}

} // namespace semlink
