#include "semlink/fft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>

#ifdef SEMLINK_HAVE_FFTW3
#include <fftw3.h>
#endif

namespace semlink {

namespace {

#ifndef SEMLINK_HAVE_FFTW3

struct Plan {
    int n = 0;
    std::vector<int> factors;        // smallest-prime-first factorization
    std::vector<cplx> twiddle;       // twiddle[j] = exp(-2*pi*i*j/n)
};

std::vector<int> factorize(int n) {
    std::vector<int> f;
    int m = n;
    for (int p = 2; p * p <= m; ++p) {
        while (m % p == 0) {
            f.push_back(p);
            m /= p;
        }
    }
    if (m > 1) f.push_back(m);
    return f;
}

const Plan& plan_for(int n) {
    thread_local std::map<int, Plan> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    Plan p;
    p.n = n;
    p.factors = factorize(n);
    p.twiddle.resize(n);
    for (int j = 0; j < n; ++j) {
        double a = -2.0 * M_PI * double(j) / double(n);
        p.twiddle[j] = cplx(std::cos(a), std::sin(a));
    }
    return cache.emplace(n, std::move(p)).first->second;
}

inline cplx tw(const Plan& plan, long long idx, bool inverse) {
    long long m = idx % plan.n;
    if (m < 0) m += plan.n;
    cplx w = plan.twiddle[size_t(m)];
    return inverse ? std::conj(w) : w;
}

// Recursive DIT step. `in` holds n elements spaced `stride` apart; the
// result is written contiguously into `out`. `root` provides twiddles for
// the full-size transform: exp(-2*pi*i*j/n_sub) indexed as j*(root.n/n).
// `arena` supplies per-depth scratch (one root-sized buffer per level).
void dft_rec(const cplx* in, int n, int stride, cplx* out, const Plan& root,
             size_t depth, bool inverse, std::vector<std::vector<cplx>>& arena) {
    if (n == 1) {
        out[0] = in[0];
        return;
    }
    if (depth >= root.factors.size() || root.factors[depth] == n) {
        // Direct DFT (prime leaf) with its own twiddle table and an
        // incrementally stepped index.
        const Plan& leaf = plan_for(n);
        for (int k = 0; k < n; ++k) {
            cplx acc(0.0, 0.0);
            int idx = 0;
            for (int j = 0; j < n; ++j) {
                acc += in[size_t(j) * stride] * tw(leaf, idx, inverse);
                idx += k;
                if (idx >= n) idx -= n;
            }
            out[k] = acc;
        }
        return;
    }
    const long long scale = root.n / n; // twiddle index multiplier at this size
    const int p = root.factors[depth];
    const int m = n / p;
    // p interleaved sub-transforms of size m.
    if (arena.size() <= depth) arena.resize(depth + 1);
    if (arena[depth].size() < size_t(n)) arena[depth].resize(size_t(root.n));
    cplx* sub = arena[depth].data();
    for (int j = 0; j < p; ++j) {
        dft_rec(in + size_t(j) * stride, m, stride * p, sub + size_t(j) * m, root,
                depth + 1, inverse, arena);
    }
    for (int k = 0; k < n; ++k) {
        cplx acc(0.0, 0.0);
        const int km = k % m;
        const long long step = (scale * k) % root.n;
        long long idx = 0;
        for (int j = 0; j < p; ++j) {
            acc += tw(root, idx, inverse) * sub[size_t(j) * m + km];
            idx += step;
            if (idx >= root.n) idx -= root.n;
        }
        out[k] = acc;
    }
}

#endif // !SEMLINK_HAVE_FFTW3

#ifdef SEMLINK_HAVE_FFTW3

// One cached FFTW plan pair per transform length. Plans are created with
// FFTW_ESTIMATE so results are deterministic and creation is cheap.
struct FftwPlan {
    fftw_complex* buf = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    int n = 0;

    explicit FftwPlan(int size) : n(size) {
        buf = fftw_alloc_complex(size_t(size));
        fwd = fftw_plan_dft_1d(size, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_1d(size, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;
    ~FftwPlan() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (buf) fftw_free(buf);
    }
};

std::vector<cplx> transform(const std::vector<cplx>& x, bool inverse) {
    if (x.empty()) throw std::invalid_argument("dft: empty input");
    thread_local std::map<int, std::unique_ptr<FftwPlan>> plans;
    auto it = plans.find(int(x.size()));
    if (it == plans.end()) {
        it = plans.emplace(int(x.size()), std::make_unique<FftwPlan>(int(x.size()))).first;
    }
    FftwPlan& plan = *it->second;
    for (size_t i = 0; i < x.size(); ++i) {
        plan.buf[i][0] = x[i].real();
        plan.buf[i][1] = x[i].imag();
    }
    fftw_execute(inverse ? plan.bwd : plan.fwd);
    std::vector<cplx> out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = cplx(plan.buf[i][0], plan.buf[i][1]);
    return out;
}

#else

std::vector<cplx> transform(const std::vector<cplx>& x, bool inverse) {
    if (x.empty()) throw std::invalid_argument("dft: empty input");
    const Plan& plan = plan_for(int(x.size()));
    std::vector<cplx> out(x.size());
    thread_local std::vector<std::vector<cplx>> arena;
    dft_rec(x.data(), int(x.size()), 1, out.data(), plan, 0, inverse, arena);
    return out;
}

#endif

} // namespace

std::vector<cplx> dft(const std::vector<cplx>& x) { return transform(x, false); }

std::vector<cplx> idft(const std::vector<cplx>& x) { return transform(x, true); }

std::vector<cplx> fft_forward(const std::vector<cplx>& x) {
    auto out = transform(x, false);
    const double s = 1.0 / std::sqrt(double(x.size()));
    for (auto& v : out) v *= s;
    return out;
}

std::vector<cplx> fft_inverse(const std::vector<cplx>& x) {
    auto out = transform(x, true);
    const double s = 1.0 / std::sqrt(double(x.size()));
    for (auto& v : out) v *= s;
    return out;
}

} // namespace semlink
