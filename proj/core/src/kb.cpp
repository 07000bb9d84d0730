#include "semlink/kb.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace semlink {

namespace {

constexpr uint16_t kVersion = 1;

struct Writer {
    std::vector<uint8_t> buf;
    void u16(uint16_t v) { raw(&v, 2); }
    void u32(uint32_t v) { raw(&v, 4); }
    void u64(uint64_t v) { raw(&v, 8); }
    void f64(double v) { raw(&v, 8); }
    void raw(const void* p, size_t n) {
        const auto* b = static_cast<const uint8_t*>(p);
        buf.insert(buf.end(), b, b + n);
    }
    void tag(const char* t) { raw(t, 4); }
    void vec(const Vec& v) {
        u64(v.size());
        for (double x : v) f64(x);
    }
    void mat(const Mat& m) {
        u32(uint32_t(m.rows));
        u32(uint32_t(m.cols));
        for (double x : m.a) f64(x);
    }
    void mlp(const Mlp& m) {
        u32(uint32_t(m.w.size()));
        for (size_t l = 0; l < m.w.size(); ++l) {
            mat(m.w[l]);
            vec(m.b[l]);
        }
    }
    void str(const std::string& s) {
        u32(uint32_t(s.size()));
        raw(s.data(), s.size());
    }
};

struct Reader {
    const uint8_t* p;
    const uint8_t* end;
    void need(size_t n) const {
        if (size_t(end - p) < n) throw std::runtime_error("kb: truncated file");
    }
    uint16_t u16() { return read<uint16_t>(); }
    uint32_t u32() { return read<uint32_t>(); }
    uint64_t u64() { return read<uint64_t>(); }
    double f64() { return read<double>(); }
    template <typename T>
    T read() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, p, sizeof(T));
        p += sizeof(T);
        return v;
    }
    std::string tag() {
        need(4);
        std::string t(reinterpret_cast<const char*>(p), 4);
        p += 4;
        return t;
    }
    Vec vec() {
        uint64_t n = u64();
        need(n * 8);
        Vec v(n);
        for (auto& x : v) x = f64();
        return v;
    }
    Mat mat() {
        int rows = int(u32());
        int cols = int(u32());
        Mat m(rows, cols);
        need(m.a.size() * 8);
        for (auto& x : m.a) x = f64();
        return m;
    }
    Mlp mlp() {
        Mlp m;
        uint32_t layers = u32();
        for (uint32_t l = 0; l < layers; ++l) {
            m.w.push_back(mat());
            m.b.push_back(vec());
        }
        return m;
    }
    std::string str() {
        uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(p), n);
        p += n;
        return s;
    }
};

} // namespace

const PolicyParams* KnowledgeBase::find_policy(const std::string& name) const {
    auto it = policies.find(name);
    return it == policies.end() ? nullptr : &it->second;
}

void save_kb(const KnowledgeBase& kb, const std::string& path) {
    Writer w;
    w.tag("SLNK");
    w.u16(kVersion);

    auto section = [&w](const char* t, const std::vector<uint8_t>& payload) {
        w.tag(t);
        w.u64(payload.size());
        w.raw(payload.data(), payload.size());
    };

    if (kb.codec) {
        Writer s;
        const auto& c = *kb.codec;
        s.u32(uint32_t(c.d));
        s.u32(uint32_t(c.C));
        s.u32(uint32_t(c.W));
        s.u32(uint32_t(c.H));
        s.u32(uint32_t(c.N));
        s.u64(c.seed);
        s.f64(c.final_train_accuracy);
        s.mat(c.w_enc);
        s.vec(c.b_enc);
        s.mlp(c.head);
        section("SLNK", s.buf);
    }
    if (kb.str) {
        Writer s;
        s.vec(*kb.str);
        section("STRW", s.buf);
    }
    for (const auto& [name, policy] : kb.policies) {
        Writer s;
        s.str(name);
        s.u32(uint32_t(policy.b_max));
        s.mlp(policy.actor);
        s.mlp(policy.critic);
        section("DPPO", s.buf);
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("kb: cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(w.buf.data()), std::streamsize(w.buf.size()));
    if (!out) throw std::runtime_error("kb: write failed: " + path);
}

KnowledgeBase load_kb(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("kb: cannot open: " + path);
    std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
    Reader r{buf.data(), buf.data() + buf.size()};
    if (r.tag() != "SLNK") throw std::runtime_error("kb: bad magic");
    if (r.u16() != kVersion) throw std::runtime_error("kb: unsupported version");

    KnowledgeBase kb;
    while (r.p < r.end) {
        std::string t = r.tag();
        uint64_t len = r.u64();
        r.need(len);
        Reader s{r.p, r.p + len};
        r.p += len;
        if (t == "SLNK") {
            CodecParams c;
            c.d = int(s.u32());
            c.C = int(s.u32());
            c.W = int(s.u32());
            c.H = int(s.u32());
            c.N = int(s.u32());
            c.seed = s.u64();
            c.final_train_accuracy = s.f64();
            c.w_enc = s.mat();
            c.b_enc = s.vec();
            c.head = s.mlp();
            kb.codec = std::move(c);
        } else if (t == "STRW") {
            kb.str = s.vec();
        } else if (t == "DPPO") {
            std::string name = s.str();
            PolicyParams p;
            p.b_max = int(s.u32());
            p.actor = s.mlp();
            p.critic = s.mlp();
            kb.policies.emplace(std::move(name), std::move(p));
        } else {
            // Unknown sections are skipped for forward compatibility.
        }
    }
    return kb;
}

} // namespace semlink
