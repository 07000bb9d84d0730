#include "semlink/chanest.hpp"

#include <cmath>
#include <stdexcept>

namespace semlink {

namespace {

// Gaussian elimination with partial pivoting for small complex systems
// (n_pilot x n_pilot at most). Solves A x = b in place.
std::vector<cplx> solve_dense(std::vector<std::vector<cplx>> a, std::vector<cplx> b) {
    const size_t n = b.size();
    double scale = 0.0;
    for (const auto& row : a)
        for (const cplx& v : row) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * (1.0 + scale);
    std::vector<bool> pivoted(n, false);
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        double best = std::abs(a[col][col]);
        for (size_t r = col + 1; r < n; ++r) {
            double m = std::abs(a[r][col]);
            if (m > best) {
                best = m;
                piv = r;
            }
        }
        // Rank-deficient column (e.g. a noiseless single-tap profile): leave
        // the unknown at zero; any consistent solution smooths identically.
        if (best < tol) continue;
        pivoted[col] = true;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (size_t r = col + 1; r < n; ++r) {
            cplx f = a[r][col] / a[col][col];
            for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<cplx> x(n, cplx(0.0, 0.0));
    for (size_t ri = n; ri-- > 0;) {
        if (!pivoted[ri]) continue;
        cplx acc = b[ri];
        for (size_t c = ri + 1; c < n; ++c) acc -= a[ri][c] * x[c];
        x[ri] = acc / a[ri][ri];
    }
    return x;
}

// Frequency correlation E[h_k h_j*] = sum_t p_t exp(-2πi (k-j) d_t / N).
cplx freq_corr(const PowerDelayProfile& pdp, int dk, int n_sub) {
    cplx acc(0.0, 0.0);
    for (size_t t = 0; t < pdp.delays.size(); ++t) {
        double a = -2.0 * M_PI * double(dk) * double(pdp.delays[t]) / double(n_sub);
        acc += pdp.powers[t] * cplx(std::cos(a), std::sin(a));
    }
    return acc;
}

std::vector<cplx> ls_at_pilots(const std::vector<cplx>& pilot_obs, const OfdmConfig& cfg) {
    if (std::abs(cfg.pilot_value) == 0.0)
        throw std::invalid_argument("estimate_channel: zero pilot value");
    std::vector<cplx> h(pilot_obs.size());
    for (size_t i = 0; i < pilot_obs.size(); ++i) h[i] = pilot_obs[i] / cfg.pilot_value;
    return h;
}

std::vector<cplx> interp_linear(const std::vector<cplx>& h_p, const OfdmConfig& cfg) {
    const auto& pos = cfg.pilot_positions;
    std::vector<cplx> h(static_cast<size_t>(cfg.n_sub));
    if (pos.size() == 1) {
        for (auto& v : h) v = h_p[0];
        return h;
    }
    for (int k = 0; k < cfg.n_sub; ++k) {
        // Segment [lo, hi] of pilot indices bracketing k; edges extrapolate
        // from the outermost pilot pair.
        size_t hi = 1;
        while (hi + 1 < pos.size() && pos[hi] < k) ++hi;
        size_t lo = hi - 1;
        double x0 = double(pos[lo]), x1 = double(pos[hi]);
        double t = (double(k) - x0) / (x1 - x0);
        h[size_t(k)] = h_p[lo] + (h_p[hi] - h_p[lo]) * t;
    }
    return h;
}

} // namespace

std::vector<cplx> estimate_channel(const std::vector<cplx>& pilot_obs,
                                   const OfdmConfig& cfg, ChestMethod method,
                                   const PowerDelayProfile* pdp, double noise_var) {
    cfg.validate();
    if (int(pilot_obs.size()) != cfg.n_pilot)
        throw std::invalid_argument("estimate_channel: pilot_obs length != n_pilot");
    auto h_p = ls_at_pilots(pilot_obs, cfg);
    if (method == ChestMethod::ls_interp) return interp_linear(h_p, cfg);

    if (pdp == nullptr)
        throw std::invalid_argument("estimate_channel: mmse requires a power-delay profile");
    const auto& pos = cfg.pilot_positions;
    const size_t np = pos.size();
    std::vector<std::vector<cplx>> rpp(np, std::vector<cplx>(np));
    for (size_t i = 0; i < np; ++i) {
        for (size_t j = 0; j < np; ++j) {
            rpp[i][j] = freq_corr(*pdp, pos[i] - pos[j], cfg.n_sub);
        }
        rpp[i][i] += noise_var;
    }
    // w = (Rpp + s2 I)^-1 h_p, then h_k = r_kp . w
    auto w = solve_dense(std::move(rpp), h_p);
    std::vector<cplx> h(static_cast<size_t>(cfg.n_sub));
    for (int k = 0; k < cfg.n_sub; ++k) {
        cplx acc(0.0, 0.0);
        for (size_t j = 0; j < np; ++j) acc += freq_corr(*pdp, k - pos[j], cfg.n_sub) * w[j];
        h[size_t(k)] = acc;
    }
    return h;
}

std::vector<cplx> equalize(const std::vector<cplx>& obs, const std::vector<cplx>& h,
                           bool strict) {
    if (obs.size() != h.size())
        throw std::invalid_argument("equalize: length mismatch");
    std::vector<cplx> out(obs.size());
    for (size_t k = 0; k < obs.size(); ++k) {
        cplx hk = h[k];
        double mag = std::abs(hk);
        if (mag < 1e-12) {
            if (strict) throw std::runtime_error("equalize: singular subchannel");
            hk = mag == 0.0 ? cplx(1e-6, 0.0) : hk * (1e-6 / mag);
        } else if (mag < 1e-6 && !strict) {
            hk *= 1e-6 / mag;
        }
        out[k] = obs[k] / hk;
    }
    return out;
}

} // namespace semlink
