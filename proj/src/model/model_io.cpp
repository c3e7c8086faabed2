#include "qmpc/model/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "qmpc/core/prg.hpp"
#include "qmpc/lut/table.hpp"

namespace qmpc {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<signed char> gen_weights(Prg& rng, std::size_t n) {
    std::vector<signed char> w(n);
    for (auto& v : w) v = rng.next(1) ? 1 : -1;
    return w;
}

// scale generator: pick the fold first, then back out the scale so the fold
// recomputes stably (the +0.5 margin keeps floor() away from the boundary)
double scale_for_fold(double s_w, double s_x_eff, u64 fold) {
    return 4096.0 * s_w * s_x_eff / (static_cast<double>(fold) + 0.5);
}

u64 pick_fold(Prg& rng, double s_w, double s_x_eff, double sy_target) {
    double f = std::floor(4096.0 * s_w * s_x_eff / sy_target);
    u64 fold = static_cast<u64>(std::min(30000.0, std::max(16.0, f)));
    // jitter so layers do not all share one fold
    fold = fold - fold / 16 + rng.next(10) % (fold / 8 + 1);
    return std::min<u64>(30000, std::max<u64>(16, fold));
}

}  // namespace

Model gen_toy_model(const ModelConfig& dims, u64 seed) {
    dims.validate();
    Model m;
    m.cfg = dims;
    Seed root = derive_subseed(derive_root_seed(seed), "toy-model");
    Prg rng(root, Purpose::Model, 0);

    const unsigned H = dims.hidden, F = dims.ffn;
    double sx = dims.s_embed;
    for (unsigned l = 0; l < dims.layers; ++l) {
        LayerParams p;
        p.wq = gen_weights(rng, std::size_t(H) * H);
        p.wk = gen_weights(rng, std::size_t(H) * H);
        p.wv = gen_weights(rng, std::size_t(H) * H);
        p.wo = gen_weights(rng, std::size_t(H) * H);
        p.w1 = gen_weights(rng, std::size_t(F) * H);
        p.w2 = gen_weights(rng, std::size_t(H) * F);

        auto pick_sy = [&](double s_w, double s_eff) {
            double target = 0.2 + 0.15 * (double(rng.next(8)) / 255.0);
            u64 fold = pick_fold(rng, s_w, s_eff, target);
            return scale_for_fold(s_w, s_eff, fold);
        };

        p.sy_q = pick_sy(p.sw_q, sx);
        p.sy_k = pick_sy(p.sw_k, sx);
        p.sy_v = pick_sy(p.sw_v, sx);
        // softmax input scale: keep it in a band where the exponent table has
        // usable resolution for 4-bit differences
        {
            double d = std::sqrt(double(dims.head_dim()));
            double target = 0.3 + 0.4 * (double(rng.next(8)) / 255.0);
            u64 fold = pick_fold(rng, 1.0, p.sy_q * p.sy_k / d, target);
            p.sy_scores = scale_for_fold(1.0, p.sy_q * p.sy_k / d, fold);
        }
        p.sy_av = pick_sy(1.0, (1.0 / 16.0) * p.sy_v);
        p.sy_o = pick_sy(p.sw_o, p.sy_av);
        // residual: output range covers the sum of both input ranges
        p.sy_res1 = p.sy_o + sx;

        auto gen_ln = [&](double s_in) {
            LnSite ln;
            ln.gamma.resize(H);
            ln.beta.resize(H);
            for (auto& g : ln.gamma) g = 0.75 + 0.5 * (double(rng.next(8)) / 255.0);
            for (auto& b : ln.beta) b = -0.5 + 1.0 * (double(rng.next(8)) / 255.0);
            // variance fold in [8, 72); output scale bounds the table slope so
            // a one-step input wiggle moves the output at most one step
            u64 fv = 8 + rng.next(6);
            ln.s_var = 4096.0 * s_in * s_in / (double(dims.hidden) * (double(fv) + 0.5));
            ln.s_out = 2.6 * s_in / std::sqrt(dims.eps);
            // keep next-layer inputs near the embedding band
            ln.s_out = std::max(0.05, std::min(0.6, ln.s_out));
            return ln;
        };
        p.ln1 = gen_ln(p.sy_res1);

        p.sy_ffn1 = pick_sy(p.sw_1, p.ln1.s_out);
        p.sy_ffn2 = pick_sy(p.sw_2, p.sy_ffn1);
        p.sy_res2 = p.sy_ffn2 + p.ln1.s_out;
        p.ln2 = gen_ln(p.sy_res2);

        sx = p.ln2.s_out;
        m.layer.push_back(std::move(p));
    }
    m.w_final = gen_weights(rng, std::size_t(H) * H);
    m.sw_final = 1;
    {
        u64 fold = pick_fold(rng, 1.0, sx, 0.25);
        m.sy_final = scale_for_fold(1.0, sx, fold);
    }

    // every fold must be representable; surface bad draws at generation time
    for (unsigned l = 0; l < dims.layers; ++l) (void)layer_folds(m, l);
    (void)final_fold(m);
    return m;
}

// --- file format --------------------------------------------------------------

namespace {

std::string ln_text(const LnSite& ln) {
    std::ostringstream os;
    os << fmt_double(ln.s_var) << ";" << fmt_double(ln.s_out) << ";";
    for (std::size_t i = 0; i < ln.gamma.size(); ++i)
        os << (i ? "," : "") << fmt_double(ln.gamma[i]);
    os << ";";
    for (std::size_t i = 0; i < ln.beta.size(); ++i)
        os << (i ? "," : "") << fmt_double(ln.beta[i]);
    return os.str();
}

std::vector<double> parse_list(const std::string& s, std::size_t offset_hint) {
    std::vector<double> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        try {
            out.push_back(std::stod(tok));
        } catch (...) {
            throw ParseError("bad numeric list entry '" + tok + "'", offset_hint);
        }
    }
    return out;
}

LnSite parse_ln(const std::string& s, std::size_t H, std::size_t offset_hint) {
    LnSite ln;
    std::istringstream is(s);
    std::string svar, sout, g, b;
    if (!std::getline(is, svar, ';') || !std::getline(is, sout, ';') ||
        !std::getline(is, g, ';') || !std::getline(is, b, ';'))
        throw ParseError("malformed layernorm record", offset_hint);
    ln.s_var = std::stod(svar);
    ln.s_out = std::stod(sout);
    ln.gamma = parse_list(g, offset_hint);
    ln.beta = parse_list(b, offset_hint);
    if (ln.gamma.size() != H || ln.beta.size() != H)
        throw ParseError("layernorm channel count disagrees with hidden size", offset_hint);
    return ln;
}

void write_blob(std::ostream& os, const std::string& name, const std::vector<signed char>& w,
                std::size_t rows, std::size_t cols) {
    os << "blob " << name << " " << rows << " " << cols << "\n";
    std::vector<u64> bits(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) bits[i] = w[i] > 0 ? 1 : 0;
    auto packed = pack_bits(bits, 1);
    os.write(reinterpret_cast<const char*>(packed.data()),
             static_cast<std::streamsize>(packed.size()));
    os << "\n";
}

std::vector<signed char> read_blob(std::istream& is, std::size_t rows, std::size_t cols) {
    std::vector<u8> packed(packed_size(rows * cols, 1));
    is.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
    if (!is) throw ParseError("truncated weight blob", static_cast<std::size_t>(is.tellg()));
    char nl;
    is.get(nl);
    if (nl != '\n') throw ParseError("missing blob terminator", static_cast<std::size_t>(is.tellg()));
    auto bits = unpack_bits(packed, 1, rows * cols);
    std::vector<signed char> w(rows * cols);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = bits[i] ? 1 : -1;
    return w;
}

}  // namespace

std::string model_header_text(const Model& m) {
    std::ostringstream os;
    os << "QMODEL 1\n";
    os << "hidden=" << m.cfg.hidden << "\n";
    os << "heads=" << m.cfg.heads << "\n";
    os << "ffn=" << m.cfg.ffn << "\n";
    os << "layers=" << m.cfg.layers << "\n";
    os << "seq_cap=" << m.cfg.seq_cap << "\n";
    os << "kappa=" << m.cfg.kappa << "\n";
    os << "softmax_cap=" << m.cfg.softmax_cap << "\n";
    os << "eps=" << fmt_double(m.cfg.eps) << "\n";
    os << "s_embed=" << fmt_double(m.cfg.s_embed) << "\n";
    for (unsigned l = 0; l < m.cfg.layers; ++l) {
        const LayerParams& p = m.layer[l];
        os << "layer." << l << ".sw=" << fmt_double(p.sw_q) << "," << fmt_double(p.sw_k) << ","
           << fmt_double(p.sw_v) << "," << fmt_double(p.sw_o) << "," << fmt_double(p.sw_1) << ","
           << fmt_double(p.sw_2) << "\n";
        os << "layer." << l << ".sy=" << fmt_double(p.sy_q) << "," << fmt_double(p.sy_k) << ","
           << fmt_double(p.sy_v) << "," << fmt_double(p.sy_scores) << "," << fmt_double(p.sy_av)
           << "," << fmt_double(p.sy_o) << "," << fmt_double(p.sy_res1) << ","
           << fmt_double(p.sy_ffn1) << "," << fmt_double(p.sy_ffn2) << ","
           << fmt_double(p.sy_res2) << "\n";
        os << "layer." << l << ".ln1=" << ln_text(p.ln1) << "\n";
        os << "layer." << l << ".ln2=" << ln_text(p.ln2) << "\n";
    }
    os << "final.sw=" << fmt_double(m.sw_final) << "\n";
    os << "final.sy=" << fmt_double(m.sy_final) << "\n";
    return os.str();
}

void save_model(const Model& m, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open model file for writing: " + path);
    os << model_header_text(m);
    os << "BLOBS\n";
    const std::size_t H = m.cfg.hidden, F = m.cfg.ffn;
    for (unsigned l = 0; l < m.cfg.layers; ++l) {
        const LayerParams& p = m.layer[l];
        write_blob(os, "wq." + std::to_string(l), p.wq, H, H);
        write_blob(os, "wk." + std::to_string(l), p.wk, H, H);
        write_blob(os, "wv." + std::to_string(l), p.wv, H, H);
        write_blob(os, "wo." + std::to_string(l), p.wo, H, H);
        write_blob(os, "w1." + std::to_string(l), p.w1, F, H);
        write_blob(os, "w2." + std::to_string(l), p.w2, H, F);
    }
    write_blob(os, "wf", m.w_final, H, H);
    os << "END\n";
    if (!os) throw ConfigError("failed writing model file: " + path);
}

Model load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open model file: " + path);
    Model m;
    std::string line;
    auto offset = [&] { return static_cast<std::size_t>(is.tellg()); };

    if (!std::getline(is, line) || line != "QMODEL 1")
        throw ParseError("missing QMODEL 1 magic", 0);

    std::vector<std::pair<std::string, std::string>> kv;
    while (std::getline(is, line)) {
        if (line == "BLOBS") break;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key=value line", offset());
        kv.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    if (line != "BLOBS") throw ParseError("missing BLOBS section", offset());

    auto get = [&](const std::string& key) -> const std::string& {
        for (auto& [k, v] : kv)
            if (k == key) return v;
        throw ParseError("missing key '" + key + "'", 0);
    };
    m.cfg.hidden = std::stoul(get("hidden"));
    m.cfg.heads = std::stoul(get("heads"));
    m.cfg.ffn = std::stoul(get("ffn"));
    m.cfg.layers = std::stoul(get("layers"));
    m.cfg.seq_cap = std::stoul(get("seq_cap"));
    m.cfg.kappa = std::stoul(get("kappa"));
    m.cfg.softmax_cap = std::stoul(get("softmax_cap"));
    m.cfg.eps = std::stod(get("eps"));
    m.cfg.s_embed = std::stod(get("s_embed"));
    m.cfg.validate();

    const std::size_t H = m.cfg.hidden, F = m.cfg.ffn;
    m.layer.resize(m.cfg.layers);
    for (unsigned l = 0; l < m.cfg.layers; ++l) {
        LayerParams& p = m.layer[l];
        std::string pre = "layer." + std::to_string(l) + ".";
        auto sw = parse_list(get(pre + "sw"), 0);
        auto sy = parse_list(get(pre + "sy"), 0);
        if (sw.size() != 6 || sy.size() != 10)
            throw ParseError("bad scale list arity in " + pre, 0);
        p.sw_q = sw[0]; p.sw_k = sw[1]; p.sw_v = sw[2];
        p.sw_o = sw[3]; p.sw_1 = sw[4]; p.sw_2 = sw[5];
        p.sy_q = sy[0]; p.sy_k = sy[1]; p.sy_v = sy[2]; p.sy_scores = sy[3];
        p.sy_av = sy[4]; p.sy_o = sy[5]; p.sy_res1 = sy[6]; p.sy_ffn1 = sy[7];
        p.sy_ffn2 = sy[8]; p.sy_res2 = sy[9];
        p.ln1 = parse_ln(get(pre + "ln1"), H, 0);
        p.ln2 = parse_ln(get(pre + "ln2"), H, 0);
    }
    m.sw_final = std::stod(get("final.sw"));
    m.sy_final = std::stod(get("final.sy"));

    auto expect_blob = [&](const std::string& name, std::size_t rows, std::size_t cols) {
        std::string head;
        if (!std::getline(is, head)) throw ParseError("missing blob header", offset());
        std::ostringstream want;
        want << "blob " << name << " " << rows << " " << cols;
        if (head != want.str())
            throw ParseError("unexpected blob header '" + head + "'", offset());
        return read_blob(is, rows, cols);
    };
    for (unsigned l = 0; l < m.cfg.layers; ++l) {
        LayerParams& p = m.layer[l];
        std::string sl = std::to_string(l);
        p.wq = expect_blob("wq." + sl, H, H);
        p.wk = expect_blob("wk." + sl, H, H);
        p.wv = expect_blob("wv." + sl, H, H);
        p.wo = expect_blob("wo." + sl, H, H);
        p.w1 = expect_blob("w1." + sl, F, H);
        p.w2 = expect_blob("w2." + sl, H, F);
    }
    m.w_final = expect_blob("wf", H, H);
    if (!std::getline(is, line) || line != "END") throw ParseError("missing END marker", offset());

    // folds must be representable for this file to be usable
    for (unsigned l = 0; l < m.cfg.layers; ++l) (void)layer_folds(m, l);
    (void)final_fold(m);
    return m;
}

QuantTensor quantize_embeddings(const std::vector<double>& values, std::size_t rows,
                                std::size_t cols, double s_x) {
    if (s_x <= 0) throw DomainError("embedding scale must be positive");
    if (values.size() != rows * cols) throw StructuralError("embedding shape mismatch");
    QuantTensor t;
    t.rows = rows;
    t.cols = cols;
    t.bits = 4;
    t.is_signed = true;
    t.scale = s_x;
    t.data.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        i64 q = static_cast<i64>(std::floor(values[i] / s_x));
        t.data[i] = clip_i64(q, -8, 7);
    }
    return t;
}

QuantTensor gen_toy_input(const ModelConfig& cfg, unsigned seq, u64 seed) {
    if (seq == 0 || seq > cfg.seq_cap) throw ConfigError("sequence length outside [1, seq_cap]");
    Seed root = derive_subseed(derive_root_seed(seed), "toy-input");
    Prg rng(root, Purpose::Model, 1);
    std::vector<double> vals(std::size_t(seq) * cfg.hidden);
    for (auto& v : vals)
        v = (double(rng.next(16)) / 65535.0 * 16.0 - 8.0) * cfg.s_embed;
    return quantize_embeddings(vals, seq, cfg.hidden, cfg.s_embed);
}

}  // namespace qmpc
