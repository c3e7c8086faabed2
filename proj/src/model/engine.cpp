#include "qmpc/model/engine.hpp"

#include <sodium.h>

#include <cstring>
#include <fstream>
#include <map>

#include "qmpc/model/model_io.hpp"

namespace qmpc {

namespace {

constexpr u64 m16 = 0xFFFF;

// --- weight sharing -----------------------------------------------------------

RssVec share_weights(Session& s, std::span<const u64> folded_if_p0, std::size_t count) {
    u64 idx = s.alloc_weight();
    RssVec out;
    out.width = kLinearRing;
    s.mark_distribution_round();
    if (s.party() == 0) {
        std::vector<u64> c1 = s.prev_stream(Purpose::Weight, idx).draw(count, 16);
        std::vector<u64> c2 = s.next_stream(Purpose::Weight, idx).draw(count, 16);
        std::vector<u64> c0(count);
        for (std::size_t i = 0; i < count; ++i)
            c0[i] = (folded_if_p0[i] - c1[i] - c2[i]) & m16;
        s.send_elems(1, tag::WeightData, c0, 16);
        s.send_elems(2, tag::WeightData, c0, 16);
        out.next = std::move(c1);  // <w>_1
        out.prev = std::move(c2);  // <w>_2
    } else if (s.party() == 1) {
        out.next = s.prev_stream(Purpose::Weight, idx).draw(count, 16);  // <w>_2
        out.prev = s.recv_elems(0, tag::WeightData, count, 16);          // <w>_0
    } else {
        out.next = s.recv_elems(0, tag::WeightData, count, 16);          // <w>_0
        out.prev = s.next_stream(Purpose::Weight, idx).draw(count, 16);  // <w>_1
    }
    return out;
}

// transposed (in x out) folded weight block appended to `out`
void append_folded(std::vector<u64>& out, std::span<const signed char> w, std::size_t out_f,
                   std::size_t in_f, u64 fold) {
    for (std::size_t i = 0; i < in_f; ++i)
        for (std::size_t o = 0; o < out_f; ++o)
            out.push_back((w[o * in_f + i] > 0 ? fold : (0 - fold)) & m16);
}

RssVec slice_rss(const RssVec& src, std::size_t offset, std::size_t count) {
    RssVec out;
    out.width = src.width;
    out.next.assign(src.next.begin() + offset, src.next.begin() + offset + count);
    out.prev.assign(src.prev.begin() + offset, src.prev.begin() + offset + count);
    return out;
}

// --- table builders per plan step ----------------------------------------------

PlainTable build_for(const Model& m, const PlanStep& st, std::size_t ordinal) {
    switch (st.site) {
        case SiteId::ConvX:
        case SiteId::ConvQkvOut:
        case SiteId::ConvAvOut:
        case SiteId::ConvOOut:
        case SiteId::Ln1Lift:
        case SiteId::Ln1Mu:
        case SiteId::ConvFfnIn:
        case SiteId::ConvFfnOut:
        case SiteId::Ln2Lift:
        case SiteId::Ln2Mu:
        case SiteId::ConvFinal: return sign_extend_table(4, 16);
        case SiteId::ConvAttn: return zero_extend_table(4, 16);
        case SiteId::Max: return max_table(4);
        case SiteId::Relu: return relu_table(4, 16);
        case SiteId::Exp: return exp_table(layer_folds(m, st.layer).softmax_sx);
        case SiteId::DivSm: return softmax_div_table(m.cfg.kappa);
        case SiteId::Ln1Div:
        case SiteId::Ln2Div: {
            const LayerParams& p = m.layer[st.layer];
            const LnSite& ln = st.site == SiteId::Ln1Div ? p.ln1 : p.ln2;
            double s_in = st.site == SiteId::Ln1Div ? p.sy_res1 : p.sy_res2;
            std::size_t ch = ordinal % m.cfg.hidden;
            return layernorm_table(ln.gamma[ch], ln.beta[ch], m.cfg.eps, s_in, ln.s_var,
                                   ln.s_out);
        }
    }
    throw StructuralError("unhandled plan site");
}

}  // namespace

u64 model_manifest(const Model& m, unsigned seq) {
    std::string text = model_header_text(m) + "#seq=" + std::to_string(seq);
    u8 h[16];
    crypto_generichash(h, sizeof(h), reinterpret_cast<const u8*>(text.data()), text.size(),
                       nullptr, 0);
    u64 v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<u64>(h[i]) << (8 * i);
    return v;
}

OfflineBundle offline_prepare(Session& s, const Model& m, unsigned seq) {
    m.cfg.validate();
    if (seq == 0 || seq > m.cfg.seq_cap)
        throw ConfigError("sequence length outside [1, seq_cap]");
    if (s.phase() != Phase::Offline) throw StateError("offline_prepare requires the offline phase");

    OfflineBundle b;
    b.seq = seq;
    b.manifest = model_manifest(m, seq);

    const std::size_t H = m.cfg.hidden, F = m.cfg.ffn;

    // weights: one distribution step for the whole model, sliced afterwards
    std::vector<u64> folded;
    if (s.party() == 0) {
        for (unsigned l = 0; l < m.cfg.layers; ++l) {
            const LayerParams& p = m.layer[l];
            LayerFolds f = layer_folds(m, l);
            std::vector<u64> qkv;
            qkv.reserve(3 * H * H);
            // in x (q|k|v) column blocks
            for (std::size_t i = 0; i < H; ++i) {
                for (std::size_t o = 0; o < H; ++o)
                    qkv.push_back((p.wq[o * H + i] > 0 ? f.q : (0 - f.q)) & m16);
                for (std::size_t o = 0; o < H; ++o)
                    qkv.push_back((p.wk[o * H + i] > 0 ? f.k : (0 - f.k)) & m16);
                for (std::size_t o = 0; o < H; ++o)
                    qkv.push_back((p.wv[o * H + i] > 0 ? f.v : (0 - f.v)) & m16);
            }
            folded.insert(folded.end(), qkv.begin(), qkv.end());
            append_folded(folded, p.wo, H, H, f.o);
            append_folded(folded, p.w1, F, H, f.fc1);
            append_folded(folded, p.w2, H, F, f.fc2);
        }
        append_folded(folded, m.w_final, H, H, final_fold(m));
    }
    std::size_t w_count = m.cfg.layers * (4 * H * H + 2 * H * F) + H * H;
    RssVec all = share_weights(s, folded, w_count);
    std::size_t off = 0;
    for (unsigned l = 0; l < m.cfg.layers; ++l) {
        OfflineBundle::LayerW lw;
        lw.qkv = slice_rss(all, off, 3 * H * H);
        off += 3 * H * H;
        lw.o = slice_rss(all, off, H * H);
        off += H * H;
        lw.fc1 = slice_rss(all, off, H * F);
        off += H * F;
        lw.fc2 = slice_rss(all, off, F * H);
        off += F * H;
        b.w.push_back(std::move(lw));
    }
    b.w_final = slice_rss(all, off, H * H);

    // tables, one distribution step per plan entry
    std::size_t ordinal = 0;
    for (const PlanStep& st : offline_plan(m.cfg, seq)) {
        if (!st.grouped) {
            std::vector<PlainTable> plains;
            std::vector<GenSpec> specs(st.count);
            if (s.party() == 0) {
                plains.reserve(st.count);
                for (std::size_t i = 0; i < st.count; ++i)
                    plains.push_back(build_for(m, st, ordinal + i));
            }
            for (std::size_t i = 0; i < st.count; ++i) {
                specs[i].meta = st.meta;
                if (s.party() == 0) specs[i].plain = &plains[i];
            }
            b.supply.preload(gen_tables(s, specs));
        } else {
            std::vector<PlainTable> plains;
            std::vector<GroupSpec> specs(st.count);
            if (s.party() == 0) {
                plains.reserve(st.count * st.members);
                for (std::size_t i = 0; i < st.count * st.members; ++i)
                    plains.push_back(build_for(m, st, ordinal + i));
            }
            for (std::size_t g = 0; g < st.count; ++g) {
                specs[g].members.resize(st.members);
                for (std::size_t i = 0; i < st.members; ++i) {
                    specs[g].members[i].meta = st.meta;
                    if (s.party() == 0) specs[g].members[i].plain = &plains[g * st.members + i];
                }
            }
            b.supply.preload_groups(gen_table_groups(s, specs));
        }
        ordinal += st.grouped ? st.count * st.members : st.count;
    }
    return b;
}

// --- forward pass ---------------------------------------------------------------

namespace {

constexpr TableMeta kSext{TableKind::ConvertSignExt, 4, 0, 16};
constexpr TableMeta kZext{TableKind::ConvertZeroExt, 4, 0, 16};

RssVec convert_via(Session& s, PreparedSupply& supply, const TableMeta& meta,
                   const Share2Vec& xs, std::size_t count) {
    auto tables = supply.take(meta, count);
    return convert_to_rss(s, tables, xs);
}

// per-head gather into a dense matrix; identical on every party
RssVec gather_rss(const RssVec& src, std::size_t count,
                  const std::function<std::size_t(std::size_t)>& index) {
    RssVec out;
    out.width = src.width;
    out.next.resize(count);
    out.prev.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t ix = index(i);
        out.next[i] = src.next[ix];
        out.prev[i] = src.prev[ix];
    }
    return out;
}

}  // namespace

ForwardOutput secure_forward(Session& s, const Model& m, OfflineBundle& bundle,
                             const QuantTensor* input_if_p1, unsigned seq, bool audit) {
    if (bundle.consumed) throw StateError("offline bundle already consumed");
    if (bundle.seq != seq || bundle.manifest != model_manifest(m, seq))
        throw StructuralError("bundle was built for a different model/seq");
    bundle.consumed = true;
    s.set_phase(Phase::Online);

    const std::size_t S = seq, H = m.cfg.hidden, F = m.cfg.ffn, h = m.cfg.heads;
    const std::size_t d = m.cfg.head_dim();
    PreparedSupply& supply = bundle.supply;
    ForwardOutput fo;
    auto cut = [&](unsigned layer, const char* name, const Share2Vec& v) {
        if (audit)
            fo.audit.emplace_back("L" + std::to_string(layer) + "." + name, v);
    };

    // the data owner's embeddings enter as a seeded 2PC sharing (zero bytes)
    std::vector<u64> emb_ring;
    if (s.party() == 1) {
        if (!input_if_p1) throw ConfigError("party 1 requires the input tensor");
        input_if_p1->validate();
        if (input_if_p1->rows != S || input_if_p1->cols != H)
            throw StructuralError("input shape disagrees with model/seq");
        emb_ring = input_if_p1->ring();
    }
    Share2Vec xs = s.input_share2(emb_ring, S * H, 4);

    for (unsigned l = 0; l < m.cfg.layers; ++l) {
        LayerFolds f = layer_folds(m, l);

        RssVec x_rss = convert_via(s, supply, kSext, xs, S * H);
        Share2Vec qkv = quantized_matmul(s, x_rss, bundle.w[l].qkv, S, H, 3 * H, 1);
        cut(l, "qkv", qkv);
        RssVec qkv_rss = convert_via(s, supply, kSext, qkv, 3 * S * H);

        // attention scores, all heads in one truncation round
        std::vector<u64> z(h * S * S);
        for (std::size_t hd = 0; hd < h; ++hd) {
            RssVec qh = gather_rss(qkv_rss, S * d, [&](std::size_t i) {
                return (i / d) * 3 * H + hd * d + (i % d);
            });
            RssVec kth = gather_rss(qkv_rss, S * d, [&](std::size_t i) {
                return (i % S) * 3 * H + H + hd * d + (i / S);
            });
            auto zh = bilinear_matmul_local(qh, kth, S, d, S);
            std::copy(zh.begin(), zh.end(), z.begin() + hd * S * S);
        }
        Share2Vec sc = truncate_after_fold(s, std::move(z), f.scores);
        cut(l, "scores", sc);

        SoftmaxParams sp{m.cfg.kappa, m.cfg.softmax_cap};
        Share2Vec sm = secure_softmax_rows(s, supply, sc, h * S, S, sp);
        cut(l, "softmax", sm);
        RssVec attn_rss = convert_via(s, supply, kZext, sm, h * S * S);

        // attention-value mix, all heads in one truncation round
        std::vector<u64> zav(S * H);
        for (std::size_t hd = 0; hd < h; ++hd) {
            RssVec ah = gather_rss(attn_rss, S * S,
                                   [&](std::size_t i) { return hd * S * S + i; });
            RssVec vh = gather_rss(qkv_rss, S * d, [&](std::size_t i) {
                return (i / d) * 3 * H + 2 * H + hd * d + (i % d);
            });
            auto zh = bilinear_matmul_local(ah, vh, S, S, d);
            for (std::size_t srow = 0; srow < S; ++srow)
                for (std::size_t t = 0; t < d; ++t)
                    zav[srow * H + hd * d + t] = zh[srow * d + t];
        }
        Share2Vec av = truncate_after_fold(s, std::move(zav), f.av);
        cut(l, "av", av);

        RssVec av_rss = convert_via(s, supply, kSext, av, S * H);
        Share2Vec o = quantized_matmul(s, av_rss, bundle.w[l].o, S, H, H, 1);
        cut(l, "o", o);
        RssVec o_rss = convert_via(s, supply, kSext, o, S * H);

        Share2Vec res1 = residual_requant(s, o_rss, x_rss, f.res1_a, f.res1_x);
        cut(l, "res1", res1);

        LayerNormParams lp1{f.ln1_mu, f.ln1_var};
        Share2Vec ln1 = secure_layernorm(s, supply, res1, S, H, lp1);
        cut(l, "ln1", ln1);

        RssVec ln1_rss = convert_via(s, supply, kSext, ln1, S * H);
        Share2Vec ffn1 = quantized_matmul(s, ln1_rss, bundle.w[l].fc1, S, H, F, 1);
        cut(l, "ffn1", ffn1);

        RssVec relu_rss = secure_relu(s, supply, ffn1, S * F);
        cut(l, "relu", rss_to_share2(s, relu_rss));

        Share2Vec ffn2 = quantized_matmul(s, relu_rss, bundle.w[l].fc2, S, F, H, 1);
        cut(l, "ffn2", ffn2);
        RssVec ffn2_rss = convert_via(s, supply, kSext, ffn2, S * H);

        Share2Vec res2 = residual_requant(s, ffn2_rss, ln1_rss, f.res2_a, f.res2_x);
        cut(l, "res2", res2);

        LayerNormParams lp2{f.ln2_mu, f.ln2_var};
        Share2Vec ln2 = secure_layernorm(s, supply, res2, S, H, lp2);
        cut(l, "ln2", ln2);

        xs = std::move(ln2);
    }

    RssVec xf = convert_via(s, supply, kSext, xs, S * H);
    fo.logits = quantized_matmul(s, xf, bundle.w_final, S, H, H, 1);
    cut(m.cfg.layers, "logits", fo.logits);

    if (!supply.drained()) throw StateError("offline bundle not fully consumed by the plan");
    return fo;
}

std::vector<u64> reveal_logits(Session& s, const Share2Vec& logits) {
    return s.open2(logits.comp, 4, tag::OutputReveal);
}

// --- bundle persistence -----------------------------------------------------------

namespace {

void put_u64f(std::ostream& os, u64 v) {
    u8 b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<u8>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}
u64 get_u64f(std::istream& is) {
    u8 b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw ParseError("truncated bundle", static_cast<std::size_t>(is.tellg()));
    u64 v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<u64>(b[i]) << (8 * i);
    return v;
}

void write_rss(std::ostream& os, const RssVec& v) {
    put_u64f(os, v.size());
    auto n = pack_bits(v.next, 16);
    auto p = pack_bits(v.prev, 16);
    os.write(reinterpret_cast<const char*>(n.data()), static_cast<std::streamsize>(n.size()));
    os.write(reinterpret_cast<const char*>(p.data()), static_cast<std::streamsize>(p.size()));
}

RssVec read_rss(std::istream& is) {
    RssVec v;
    v.width = 16;
    std::size_t count = get_u64f(is);
    std::vector<u8> buf(packed_size(count, 16));
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!is) throw ParseError("truncated bundle weights", static_cast<std::size_t>(is.tellg()));
    v.next = unpack_bits(buf, 16, count);
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!is) throw ParseError("truncated bundle weights", static_cast<std::size_t>(is.tellg()));
    v.prev = unpack_bits(buf, 16, count);
    return v;
}

}  // namespace

void save_bundle(const std::string& path, const OfflineBundle& b, int party) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open bundle file for writing: " + path);
    os << "QBUNDLE 1\n";
    put_u64f(os, static_cast<u64>(party));
    put_u64f(os, b.seq);
    put_u64f(os, b.manifest);
    put_u64f(os, b.w.size());
    for (const auto& lw : b.w) {
        write_rss(os, lw.qkv);
        write_rss(os, lw.o);
        write_rss(os, lw.fc1);
        write_rss(os, lw.fc2);
    }
    write_rss(os, b.w_final);
    put_u64f(os, b.supply.pending_tables().size());
    for (const auto& t : b.supply.pending_tables()) write_table(os, t, party);
    put_u64f(os, b.supply.pending_groups().size());
    for (const auto& g : b.supply.pending_groups()) {
        put_u64f(os, g.tables.size());
        put_u64f(os, g.shared_off_b);
        put_u64f(os, g.wb);
        put_u64f(os, g.stream_index);
        for (const auto& t : g.tables) write_table(os, t, party);
    }
    if (!os) throw ConfigError("failed writing bundle file: " + path);
}

OfflineBundle load_bundle(const std::string& path, int party, const Model& m, unsigned seq) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open bundle file: " + path);
    std::string line;
    if (!std::getline(is, line) || line != "QBUNDLE 1")
        throw ParseError("missing QBUNDLE 1 magic", 0);
    OfflineBundle b;
    u64 fparty = get_u64f(is);
    if (fparty != static_cast<u64>(party))
        throw StructuralError("bundle belongs to party " + std::to_string(fparty));
    b.seq = static_cast<unsigned>(get_u64f(is));
    b.manifest = get_u64f(is);
    if (b.seq != seq || b.manifest != model_manifest(m, seq))
        throw StructuralError("bundle was built for a different model/seq");
    std::size_t layers = get_u64f(is);
    for (std::size_t l = 0; l < layers; ++l) {
        OfflineBundle::LayerW lw;
        lw.qkv = read_rss(is);
        lw.o = read_rss(is);
        lw.fc1 = read_rss(is);
        lw.fc2 = read_rss(is);
        b.w.push_back(std::move(lw));
    }
    b.w_final = read_rss(is);
    std::size_t ntab = get_u64f(is);
    std::vector<ShiftedTable> tabs;
    tabs.reserve(ntab);
    for (std::size_t i = 0; i < ntab; ++i) tabs.push_back(read_table(is, party));
    b.supply.preload(std::move(tabs));
    std::size_t ngr = get_u64f(is);
    std::vector<TableGroup> groups;
    groups.reserve(ngr);
    for (std::size_t i = 0; i < ngr; ++i) {
        TableGroup g;
        std::size_t members = get_u64f(is);
        g.shared_off_b = get_u64f(is);
        g.wb = static_cast<unsigned>(get_u64f(is));
        g.stream_index = get_u64f(is);
        for (std::size_t t = 0; t < members; ++t) g.tables.push_back(read_table(is, party));
        groups.push_back(std::move(g));
    }
    b.supply.preload_groups(std::move(groups));
    return b;
}

// --- verification -----------------------------------------------------------------

namespace {

std::vector<u64> rec_cut(const std::array<ForwardOutput, 3>& r, std::size_t idx) {
    const Share2Vec& a = r[1].audit[idx].second;
    const Share2Vec& b = r[2].audit[idx].second;
    u64 m = ring_mask(a.width);
    std::vector<u64> out(a.comp.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (a.comp[i] + b.comp[i]) & m;
    return out;
}

enum class Tol { Exact, Carry, PlusMinus1 };

CutCheck check(const std::string& name, std::span<const u64> ref, std::span<const u64> sec,
               Tol tol, unsigned width = 4) {
    CutCheck c;
    c.name = name;
    c.tolerance = tol == Tol::Exact ? 0 : 1;
    c.pass = ref.size() == sec.size();
    u64 m = ring_mask(width);
    for (std::size_t i = 0; c.pass && i < ref.size(); ++i) {
        u64 fwd = (ref[i] - sec[i]) & m;   // trc carry shows up as ref = sec + 1
        u64 bwd = (sec[i] - ref[i]) & m;
        i64 dev = static_cast<i64>(std::min(fwd, bwd));
        c.max_dev = std::max(c.max_dev, dev);
        switch (tol) {
            case Tol::Exact: c.pass = fwd == 0; break;
            case Tol::Carry: c.pass = fwd <= 1; break;
            case Tol::PlusMinus1: c.pass = fwd <= 1 || bwd <= 1; break;
        }
    }
    return c;
}

}  // namespace

std::vector<CutCheck> verify_cuts(const Model& m, unsigned seq, std::span<const u64> emb4,
                                  const std::array<ForwardOutput, 3>& results) {
    const std::size_t H = m.cfg.hidden, F = m.cfg.ffn, S = seq;
    std::vector<CutCheck> checks;
    std::map<std::string, std::vector<u64>> sec;
    for (std::size_t i = 0; i < results[1].audit.size(); ++i)
        sec[results[1].audit[i].first] = rec_cut(results, i);

    std::vector<u64> x(emb4.begin(), emb4.end());
    for (unsigned l = 0; l < m.cfg.layers; ++l) {
        LayerFolds f = layer_folds(m, l);
        const LayerParams& p = m.layer[l];
        std::string pre = "L" + std::to_string(l) + ".";
        auto S_ = [&](const char* n) -> std::vector<u64>& { return sec.at(pre + n); };

        // q,k,v against the oracle applied to the secure layer input
        auto rq = oracle::fc(x, true, p.wq, H, H, S, f.q, false);
        auto rk = oracle::fc(x, true, p.wk, H, H, S, f.k, false);
        auto rv = oracle::fc(x, true, p.wv, H, H, S, f.v, false);
        std::vector<u64> rqkv(S * 3 * H);
        for (std::size_t srow = 0; srow < S; ++srow)
            for (std::size_t i = 0; i < H; ++i) {
                rqkv[srow * 3 * H + i] = rq[srow * H + i];
                rqkv[srow * 3 * H + H + i] = rk[srow * H + i];
                rqkv[srow * 3 * H + 2 * H + i] = rv[srow * H + i];
            }
        checks.push_back(check(pre + "qkv", rqkv, S_("qkv"), Tol::Carry));

        // slice the secure qkv for the downstream steps
        std::vector<u64> sq(S * H), sk(S * H), sv(S * H);
        const auto& sqkv = S_("qkv");
        for (std::size_t srow = 0; srow < S; ++srow)
            for (std::size_t i = 0; i < H; ++i) {
                sq[srow * H + i] = sqkv[srow * 3 * H + i];
                sk[srow * H + i] = sqkv[srow * 3 * H + H + i];
                sv[srow * H + i] = sqkv[srow * 3 * H + 2 * H + i];
            }

        auto rsc = oracle::scores(sq, sk, S, H, m.cfg.heads, f.scores, false);
        checks.push_back(check(pre + "scores", rsc, S_("scores"), Tol::Carry));

        auto rsm = oracle::softmax(S_("scores"), m.cfg.heads * S, S, f.softmax_sx, m.cfg.kappa);
        checks.push_back(check(pre + "softmax", rsm, S_("softmax"), Tol::Exact));

        auto rav = oracle::av_mix(S_("softmax"), sv, S, H, m.cfg.heads, f.av, false);
        checks.push_back(check(pre + "av", rav, S_("av"), Tol::Carry));

        auto ro = oracle::fc(S_("av"), true, p.wo, H, H, S, f.o, false);
        checks.push_back(check(pre + "o", ro, S_("o"), Tol::Carry));

        auto rres1 = oracle::residual(S_("o"), x, f.res1_a, f.res1_x, false);
        checks.push_back(check(pre + "res1", rres1, S_("res1"), Tol::Carry));

        auto rln1 = oracle::layernorm(S_("res1"), S, H, p.ln1, m.cfg.eps, p.sy_res1, f.ln1_mu,
                                      f.ln1_var);
        checks.push_back(check(pre + "ln1", rln1, S_("ln1"), Tol::PlusMinus1));

        auto rffn1 = oracle::fc(S_("ln1"), true, p.w1, F, H, S, f.fc1, false);
        checks.push_back(check(pre + "ffn1", rffn1, S_("ffn1"), Tol::Carry));

        auto rrelu = oracle::relu16(S_("ffn1"));
        checks.push_back(check(pre + "relu", rrelu, S_("relu"), Tol::Exact, 16));

        auto rffn2 = oracle::fc_from16(S_("relu"), p.w2, H, F, S, f.fc2, false);
        checks.push_back(check(pre + "ffn2", rffn2, S_("ffn2"), Tol::Carry));

        auto rres2 = oracle::residual(S_("ffn2"), S_("ln1"), f.res2_a, f.res2_x, false);
        checks.push_back(check(pre + "res2", rres2, S_("res2"), Tol::Carry));

        auto rln2 = oracle::layernorm(S_("res2"), S, H, p.ln2, m.cfg.eps, p.sy_res2, f.ln2_mu,
                                      f.ln2_var);
        checks.push_back(check(pre + "ln2", rln2, S_("ln2"), Tol::PlusMinus1));

        x = S_("ln2");
    }
    auto rlog = oracle::fc(x, true, m.w_final, H, H, S, final_fold(m), false);
    std::string lname = "L" + std::to_string(m.cfg.layers) + ".logits";
    checks.push_back(check(lname, rlog, sec.at(lname), Tol::Carry));
    return checks;
}

}  // namespace qmpc
