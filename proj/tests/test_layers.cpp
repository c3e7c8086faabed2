#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "support.hpp"

using namespace qmpc;
using namespace qmpc::test;

namespace {

constexpr u64 m16 = 0xFFFF;

LiveSupply::Builder builder_for(double s_x, unsigned kappa) {
    return [s_x, kappa](const TableMeta& meta, std::size_t) -> PlainTable {
        switch (meta.kind) {
            case TableKind::Max: return max_table(4);
            case TableKind::Exp: return exp_table(s_x);
            case TableKind::DivSoftmax: return softmax_div_table(kappa);
            case TableKind::Relu: return relu_table(4, 16);
            case TableKind::ConvertSignExt: return sign_extend_table(4, 16);
            case TableKind::ConvertZeroExt: return zero_extend_table(4, 16);
            default: throw StructuralError("unexpected table kind in test builder");
        }
    };
}

Share2Vec share_from_p1(Session& s, std::span<const u64> vals, std::size_t n, unsigned w) {
    return s.input_share2(s.party() == 1 ? vals : std::span<const u64>{}, n, w);
}

// reference softmax pipeline on plaintext ints (mirrors the protocol exactly)
std::vector<u64> softmax_pipeline_ref(std::span<const u64> xs, double s_x, unsigned kappa) {
    PlainTable et = exp_table(s_x);
    PlainTable dt = softmax_div_table(kappa);
    u64 xo = 0;
    for (u64 v : xs) xo = std::max(xo, v);
    u64 d = 0;
    std::vector<u64> e(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        e[i] = et.apply((xs[i] - xo) & 15);
        d = (d + e[i]) & 255;
    }
    std::vector<u64> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = dt.apply2(e[i] & 15, d);
    return out;
}

}  // namespace

TEST_CASE("rss inner product: examples and random brute force") {
    auto res = run3([](Session& s) -> std::array<RssVec, 3> {
        s.handshake();
        s.set_phase(Phase::Online);
        // W=(1,-1,1), x=(3,-2,5): expect 3+2+5 = 10
        std::vector<u64> w{1, encode_signed_raw(-1, 16), 1};
        std::vector<u64> x{3, encode_signed_raw(-2, 16), 5};
        auto rw = make_rss(s.party(), 7, 0, w, 16);
        auto rx = make_rss(s.party(), 7, 1, x, 16);
        auto r1 = rss_inner_product_rows(s, rw, rx, 1, 3);

        std::vector<u64> zero(4, 0);
        auto rz = make_rss(s.party(), 7, 2, zero, 16);
        auto r2 = rss_inner_product_rows(s, rz, rz, 1, 4);

        // 1000 random length-8 pairs
        Seed root = derive_root_seed(31);
        Prg rng(root, Purpose::Test, 0);
        std::vector<u64> a = rng.draw(8000, 16), b = rng.draw(8000, 16);
        auto ra = make_rss(s.party(), 7, 3, a, 16);
        auto rb = make_rss(s.party(), 7, 4, b, 16);
        auto r3 = rss_inner_product_rows(s, ra, rb, 1000, 8);
        return {r1, r2, r3};
    });
    res.rethrow();
    auto v1 = reconstruct3({res.value[0][0], res.value[1][0], res.value[2][0]});
    CHECK(v1 == std::vector<u64>{10});
    auto v2 = reconstruct3({res.value[0][1], res.value[1][1], res.value[2][1]});
    CHECK(v2 == std::vector<u64>{0});

    Seed root = derive_root_seed(31);
    Prg rng(root, Purpose::Test, 0);
    std::vector<u64> a = rng.draw(8000, 16), b = rng.draw(8000, 16);
    auto v3 = reconstruct3({res.value[0][2], res.value[1][2], res.value[2][2]});
    for (std::size_t r = 0; r < 1000; ++r) {
        u64 expect = 0;
        for (int i = 0; i < 8; ++i) expect += a[r * 8 + i] * b[r * 8 + i];
        CHECK(v3[r] == (expect & m16));
    }
    // three ring messages of one element each per row batch, one round
    CHECK(res.stats.rounds[int(Phase::Online)] == 3);
    for (int f = 0; f < 3; ++f) {
        int to = (f + 1) % 3;
        CHECK(res.stats.msgs[int(Phase::Online)][f][to] == 3);
    }
}

TEST_CASE("fc_quantized: folded power-of-two example and zero input") {
    auto res = run3([](Session& s) -> std::array<Share2Vec, 2> {
        s.handshake();
        s.set_phase(Phase::Online);
        // folded scale 2^12, W=(1,-1) -> W' = (4096, -4096), x+ = (3,1)
        std::vector<u64> w{4096, encode_signed_raw(-4096, 16)};
        std::vector<u64> x{3, 1};
        FoldedWeights fw;
        fw.w = make_rss(s.party(), 7, 10, w, 16);
        fw.in_features = 2;
        fw.out_features = 1;
        auto rx = make_rss(s.party(), 7, 11, x, 16);
        auto o1 = fc_quantized(s, fw, rx, 1);

        std::vector<u64> zx(2, 0);
        auto rz = make_rss(s.party(), 7, 12, zx, 16);
        auto o2 = fc_quantized(s, fw, rz, 1);
        return {o1, o2};
    });
    res.rethrow();
    u64 got = (res.value[1][0].comp[0] + res.value[2][0].comp[0]) & 15;
    CHECK((got == 2 || got == 1));  // trc(0x2000,4)=2 with a possible -1 carry
    u64 gz = (res.value[1][1].comp[0] + res.value[2][1].comp[0]) & 15;
    CHECK((gz == 0 || gz == 15));
    // online cost: P0 -> P1 only, one 16-bit element per inner product
    CHECK(res.stats.bytes[int(Phase::Online)][0][1] == 2 + 2);
    CHECK(res.stats.bytes[int(Phase::Online)][0][2] == 0);
}

TEST_CASE("fc_quantized: random trials stay within the carry tolerance") {
    const std::size_t trials = 200, n = 64;
    auto res = run3([&](Session& s) -> Share2Vec {
        s.handshake();
        s.set_phase(Phase::Online);
        Seed root = derive_root_seed(33);
        Prg rng(root, Purpose::Test, 0);
        u64 fold = 3000;
        std::vector<u64> w(trials * n), x(trials * n);
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] = encode_signed_raw(rng.next(1) ? i64(fold) : -i64(fold), 16);
            x[i] = encode_signed_raw(i64(rng.next(4)) - 8, 16);
        }
        auto rw = make_rss(s.party(), 7, 20, w, 16);
        auto rx = make_rss(s.party(), 7, 21, x, 16);
        return quantized_dot_rows(s, rw, rx, trials, n, 1);
    });
    res.rethrow();

    Seed root = derive_root_seed(33);
    Prg rng(root, Purpose::Test, 0);
    u64 fold = 3000;
    std::vector<u64> w(trials * n), x(trials * n);
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = encode_signed_raw(rng.next(1) ? i64(fold) : -i64(fold), 16);
        x[i] = encode_signed_raw(i64(rng.next(4)) - 8, 16);
    }
    int exact = 0;
    for (std::size_t r = 0; r < trials; ++r) {
        u64 sum = 0;
        for (std::size_t i = 0; i < n; ++i) sum += w[r * n + i] * x[r * n + i];
        u64 t = (sum & m16) >> 12;
        u64 got = (res.value[1].comp[r] + res.value[2].comp[r]) & 15;
        CHECK((got == t || got == ((t + 15) & 15)));
        exact += got == t;
    }
    CHECK(exact > 0);  // both branches of the carry law occur in practice
    CHECK(exact < int(trials));
}

TEST_CASE("secure_max: examples, permutation invariance, exhaustive n=3") {
    auto res = run3([](Session& s) -> std::vector<Share2Vec> {
        s.handshake();
        LiveSupply supply(s, builder_for(1.0, 2));
        s.set_phase(Phase::Online);

        std::vector<u64> v1{3, 7, 1};
        auto s1 = share_from_p1(s, v1, 3, 4);
        auto o1 = secure_max_rows(s, supply, s1, 1, 3);

        std::vector<u64> v2{6, 6, 6, 6, 6};
        auto s2 = share_from_p1(s, v2, 5, 4);
        auto o2 = secure_max_rows(s, supply, s2, 1, 5);

        std::vector<u64> v3{1, 7, 3};  // permutation of v1
        auto s3 = share_from_p1(s, v3, 3, 4);
        auto o3 = secure_max_rows(s, supply, s3, 1, 3);

        // exhaustive n=3 over {0..15}^3, batched as 4096 rows
        std::vector<u64> all(4096 * 3);
        for (u64 a = 0; a < 16; ++a)
            for (u64 b = 0; b < 16; ++b)
                for (u64 c = 0; c < 16; ++c) {
                    std::size_t r = (a << 8) | (b << 4) | c;
                    all[r * 3] = a;
                    all[r * 3 + 1] = b;
                    all[r * 3 + 2] = c;
                }
        auto sall = share_from_p1(s, all, all.size(), 4);
        auto oall = secure_max_rows(s, supply, sall, 4096, 3);
        return {o1, o2, o3, oall};
    });
    res.rethrow();
    auto rec = [&](int i) {
        std::vector<u64> out(res.value[1][i].comp.size());
        for (std::size_t j = 0; j < out.size(); ++j)
            out[j] = (res.value[1][i].comp[j] + res.value[2][i].comp[j]) & 15;
        return out;
    };
    CHECK(rec(0) == std::vector<u64>{7});
    CHECK(rec(1) == std::vector<u64>{6});
    CHECK(rec(2) == rec(0));
    auto all = rec(3);
    for (u64 a = 0; a < 16; ++a)
        for (u64 b = 0; b < 16; ++b)
            for (u64 c = 0; c < 16; ++c)
                CHECK(all[(a << 8) | (b << 4) | c] == std::max(a, std::max(b, c)));
}

TEST_CASE("mid_extract: examples and exhaustive tolerance") {
    // local op; math is checked directly on share splits
    for (u64 d = 0; d < 256; ++d) {
        for (u64 s1 = 0; s1 < 256; ++s1) {
            u64 s2 = (d - s1) & 255;
            u64 got = (((s1 >> 2) & 15) + ((s2 >> 2) & 15)) & 15;
            u64 t = (d >> 2) & 15;
            CHECK((got == t || got == ((t + 15) & 15)));
            // kappa = 0 is exact
            u64 g0 = ((s1 & 15) + (s2 & 15)) & 15;
            CHECK(g0 == (d & 15));
        }
    }
    CHECK(((60u >> 2) & 15) == 15);  // d=60, kappa=2 -> 15

    auto res = run3([](Session& s) -> Share2Vec {
        s.handshake();
        s.set_phase(Phase::Online);
        std::vector<u64> d{60};
        auto sd = share_from_p1(s, d, 1, 8);
        return mid_extract(s, sd, 2);
    });
    res.rethrow();
    u64 got = (res.value[1].comp[0] + res.value[2].comp[0]) & 15;
    CHECK((got == 15 || got == 14));
}

TEST_CASE("secure_softmax: matches the plaintext pipeline exactly") {
    for (double s_x : {0.2, 0.5, 1.0}) {
        auto res = run3([&](Session& s) -> std::vector<Share2Vec> {
            s.handshake();
            LiveSupply supply(s, builder_for(s_x, 2));
            s.set_phase(Phase::Online);
            SoftmaxParams p;

            std::vector<u64> cvec{9, 9, 9, 9};
            auto s1 = share_from_p1(s, cvec, 4, 4);
            auto o1 = secure_softmax_rows(s, supply, s1, 1, 4, p);

            std::vector<u64> single{4};
            auto s2 = share_from_p1(s, single, 1, 4);
            auto o2 = secure_softmax_rows(s, supply, s2, 1, 1, p);

            std::vector<u64> dom{15, 1, 0, 2};
            auto s3 = share_from_p1(s, dom, 4, 4);
            auto o3 = secure_softmax_rows(s, supply, s3, 1, 4, p);

            Seed root = derive_root_seed(35);
            Prg rng(root, Purpose::Test, 0);
            std::vector<u64> rnd(64 * 8);
            for (auto& v : rnd) v = rng.next(4);
            auto s4 = share_from_p1(s, rnd, rnd.size(), 4);
            auto o4 = secure_softmax_rows(s, supply, s4, 64, 8, p);
            return {o1, o2, o3, o4};
        });
        res.rethrow();
        auto rec = [&](int i) {
            std::vector<u64> out(res.value[1][i].comp.size());
            for (std::size_t j = 0; j < out.size(); ++j)
                out[j] = (res.value[1][i].comp[j] + res.value[2][i].comp[j]) & 15;
            return out;
        };
        std::vector<u64> cvec{9, 9, 9, 9};
        CHECK(rec(0) == softmax_pipeline_ref(cvec, s_x, 2));
        CHECK(rec(0) == std::vector<u64>{4, 4, 4, 4});  // constant row quarters
        CHECK(rec(1) == std::vector<u64>{15});          // single element saturates

        auto dom = rec(2);
        CHECK(dom[0] >= 12);
        for (int i = 1; i < 4; ++i) CHECK(dom[i] <= 1);

        Seed root = derive_root_seed(35);
        Prg rng(root, Purpose::Test, 0);
        std::vector<u64> rnd(64 * 8);
        for (auto& v : rnd) v = rng.next(4);
        auto got = rec(3);
        for (int r = 0; r < 64; ++r) {
            auto ref = softmax_pipeline_ref(std::span<const u64>(rnd).subspan(r * 8, 8), s_x, 2);
            for (int i = 0; i < 8; ++i) CHECK(got[r * 8 + i] == ref[i]);
        }
    }
}

TEST_CASE("softmax rounds: ceil(log2 n) + exp + division, batched over rows") {
    // pregenerate so the online phase contains only the softmax itself
    auto res = run3([](Session& s) -> int {
        s.handshake();
        const std::size_t rows = 5, len = 8;
        PreparedSupply supply;
        {
            LiveSupply live(s, builder_for(0.5, 2));
            std::size_t width = len;
            while (width > 1) {
                std::size_t pairs = width / 2;
                supply.preload(live.take(TableMeta{TableKind::Max, 4, 4, 4}, pairs * rows));
                width = pairs + width % 2;
            }
            supply.preload(live.take(TableMeta{TableKind::Exp, 4, 0, 8}, rows * len));
            supply.preload_groups(
                live.take_groups(TableMeta{TableKind::DivSoftmax, 4, 8, 4}, rows, len));
        }
        s.set_phase(Phase::Online);
        std::vector<u64> xs(rows * len, 3);
        auto sh = share_from_p1(s, xs, xs.size(), 4);
        SoftmaxParams p;
        secure_softmax_rows(s, supply, sh, rows, len, p);
        CHECK(supply.drained());
        return 0;
    });
    res.rethrow();
    CHECK(res.stats.rounds[int(Phase::Online)] == 3 + 1 + 1);  // log2(8) + exp + div
    CHECK(res.stats.from_party_bytes(Phase::Online, 0) == 0);
    // opened elements: max (2*(4+2+1) per-pair streams) + exp + div (len+1 per row)
    u64 max_opened = 2 * (4 + 2 + 1) * 5;
    u64 exp_opened = 5 * 8;
    u64 div_opened = 5 * (8 + 1);
    CHECK(res.stats.opened[int(Phase::Online)] == max_opened + exp_opened + div_opened);
}

TEST_CASE("secure_relu: all sixteen inputs") {
    auto res = run3([](Session& s) -> RssVec {
        s.handshake();
        LiveSupply supply(s, builder_for(1.0, 2));
        s.set_phase(Phase::Online);
        std::vector<u64> xs(16);
        for (u64 i = 0; i < 16; ++i) xs[i] = i;
        auto sh = share_from_p1(s, xs, 16, 4);
        return secure_relu(s, supply, sh, 16);
    });
    res.rethrow();
    auto vals = reconstruct3({res.value[0], res.value[1], res.value[2]});
    for (u64 i = 0; i < 16; ++i) {
        i64 x = decode_signed(i, 4);
        CHECK(vals[i] == u64(x > 0 ? x : 0));
    }
}

TEST_CASE("secure_layernorm: constant vector and pipeline tolerance") {
    const double gamma = 1.0, beta = 0.5, eps = 2.0, s_in = 0.25, s_var = 0.5, s_out = 0.5;
    const std::size_t n = 8;
    const u64 fold_mu = 4096 / n;
    const u64 fold_var = u64(4096.0 * s_in * s_in / (s_var * n));

    auto builder = [&](const TableMeta& meta, std::size_t) -> PlainTable {
        switch (meta.kind) {
            case TableKind::ConvertSignExt: return sign_extend_table(4, 16);
            case TableKind::DivLayerNorm:
                return layernorm_table(gamma, beta, eps, s_in, s_var, s_out);
            default: throw StructuralError("unexpected kind");
        }
    };

    auto res = run3([&](Session& s) -> std::vector<Share2Vec> {
        s.handshake();
        LiveSupply supply(s, builder);
        s.set_phase(Phase::Online);
        LayerNormParams p{fold_mu, fold_var};

        std::vector<u64> cvec(n, 5);
        auto s1 = share_from_p1(s, cvec, n, 4);
        auto o1 = secure_layernorm(s, supply, s1, 1, n, p);

        Seed root = derive_root_seed(36);
        Prg rng(root, Purpose::Test, 0);
        std::vector<u64> rnd(16 * n);
        for (auto& v : rnd) v = rng.next(4);
        auto s2 = share_from_p1(s, rnd, rnd.size(), 4);
        auto o2 = secure_layernorm(s, supply, s2, 16, n, p);
        return {o1, o2};
    });
    res.rethrow();
    auto rec = [&](int i) {
        std::vector<u64> out(res.value[1][i].comp.size());
        for (std::size_t j = 0; j < out.size(); ++j)
            out[j] = (res.value[1][i].comp[j] + res.value[2][i].comp[j]) & 15;
        return out;
    };

    // constant vector: variance 0, output = clip(beta / s_out) on every channel
    auto c = rec(0);
    u64 expect = encode_signed_raw(i64(std::floor(beta / s_out)), 4);
    for (u64 v : c) CHECK(v == expect);

    // random rows: within +-1 of the exact-truncation pipeline trace
    PlainTable lnt = layernorm_table(gamma, beta, eps, s_in, s_var, s_out);
    Seed root = derive_root_seed(36);
    Prg rng(root, Purpose::Test, 0);
    std::vector<u64> rnd(16 * n);
    for (auto& v : rnd) v = rng.next(4);
    auto got = rec(1);
    for (std::size_t r = 0; r < 16; ++r) {
        u64 sum = 0;
        std::vector<u64> x16(n);
        for (std::size_t i = 0; i < n; ++i) {
            x16[i] = encode_signed_raw(decode_signed(rnd[r * n + i], 4), 16);
            sum = (sum + x16[i]) & m16;
        }
        u64 mu4 = ((sum * fold_mu) & m16) >> 12;
        u64 mu16 = encode_signed_raw(decode_signed(mu4, 4), 16);
        u64 var = 0;
        std::vector<u64> uref(n);
        for (std::size_t i = 0; i < n; ++i) {
            u64 ci = (x16[i] - mu16) & m16;
            uref[i] = ((ci << 11) & m16) >> 12;
            var = (var + ci * ci) & m16;
        }
        u64 v4 = ((var * fold_var) & m16) >> 12;
        for (std::size_t i = 0; i < n; ++i) {
            i64 ref = decode_signed(lnt.apply2(uref[i], v4), 4);
            i64 sec = decode_signed(got[r * n + i], 4);
            CHECK(std::abs(ref - sec) <= 1);
        }
    }
}
