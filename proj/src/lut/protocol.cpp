#include "qmpc/lut/protocol.hpp"

#include <cstring>
#include <istream>
#include <ostream>

#include "qmpc/kernels/kernels.hpp"

namespace qmpc {

namespace {

unsigned byte_width(unsigned w) { return 8u * ((w + 7) / 8); }

// Distribution payloads are sequences of byte-aligned little-endian values.
struct ByteWriter {
    std::vector<u8> buf;
    std::size_t pos = 0;
    void reserve_total(std::size_t n) { buf.assign(n, 0); }
    void put(u64 v, unsigned width_bits) {
        unsigned n = (width_bits + 7) / 8;
        for (unsigned i = 0; i < n; ++i) buf[pos++] = static_cast<u8>(v >> (8 * i));
    }
    void put_vec(std::span<const u64> vals, unsigned width_bits) {
        for (u64 v : vals) put(v, width_bits);
    }
};

struct ByteReader {
    std::span<const u8> buf;
    std::size_t off = 0;
    u64 get(unsigned width_bits) {
        unsigned n = (width_bits + 7) / 8;
        if (off + n > buf.size()) throw DesyncError("table distribution frame truncated");
        u64 v = 0;
        for (unsigned i = 0; i < n; ++i) v |= static_cast<u64>(buf[off + i]) << (8 * i);
        off += n;
        return v;
    }
    void get_vec(std::span<u64> out, unsigned width_bits) {
        for (auto& v : out) v = get(width_bits);
    }
    void done() const {
        if (off != buf.size()) throw DesyncError("table distribution frame has trailing bytes");
    }
};

struct DealerDraw {
    u64 da = 0, db = 0;
};

DealerDraw dealer_offsets(Session& s, const GenSpec& spec, u64 idx) {
    DealerDraw d;
    Prg prg = s.dealer_stream(Purpose::DealerOffset, idx);
    d.da = prg.next(spec.meta.wa);
    if (spec.meta.wb > 0) d.db = prg.next(spec.meta.wb);
    if (spec.force_da) d.da = *spec.force_da & ring_mask(spec.meta.wa);
    if (spec.force_db && spec.meta.wb > 0) d.db = *spec.force_db & ring_mask(spec.meta.wb);
    return d;
}

void check_spec(const GenSpec& spec, int party) {
    const TableMeta& m = spec.meta;
    if (m.wa < 1 || m.wa > 8 || m.wb > 8) throw DomainError("table slot width must be in [1,8]");
    if (m.out_width < 1 || m.out_width > 64) throw DomainError("bad table output width");
    std::size_t size = std::size_t(1) << (m.wa + m.wb);
    if (party == 0) {
        if (!spec.plain || spec.plain->wa != m.wa || spec.plain->wb != m.wb ||
            spec.plain->out_width != m.out_width || spec.plain->entries.size() != size)
            throw StructuralError("dealer table does not match declared metadata");
    }
}

// Dealer-side pending state for one table between the draw pass, the batched
// shift-share kernel and payload serialization.
struct Pending {
    std::vector<u64> r;  // P0: the P0-P1 pseudorandom components
    std::vector<u64> c;  // P0: the P2 components to transmit
    u64 ca = 0, cb = 0;  // offset share components for P2
    bool send_cb = false;
};

// Generates one table on this party, deferring P0's rotate-and-share to a
// batched kernel pass. `db_override` carries a group's shared offset.
ShiftedTable gen_one(Session& s, const GenSpec& spec, bool shared_b_slot, Pending* pend,
                     std::vector<kernels::ShiftShareJob>* jobs,
                     std::optional<u64> db_override = std::nullopt) {
    check_spec(spec, s.party());
    const TableMeta& m = spec.meta;
    u64 idx = s.alloc_table();
    std::size_t size = std::size_t(1) << (m.wa + m.wb);

    ShiftedTable t;
    t.meta = m;
    t.stream_index = idx;
    t.group_shared_b = shared_b_slot;

    if (s.party() == 0) {
        DealerDraw d = dealer_offsets(s, spec, idx);
        if (db_override) d.db = *db_override;
        pend->r = s.next_stream(Purpose::TableEntry, idx).draw(size, m.out_width);
        pend->c.assign(size, 0);
        jobs->push_back(kernels::ShiftShareJob{spec.plain->entries.data(), pend->r.data(),
                                               pend->c.data(), m.wa, m.wb, m.out_width, d.da,
                                               d.db});
        Prg oprg = s.next_stream(Purpose::TableOffset, idx);
        u64 ra = oprg.next(m.wa);
        pend->ca = (d.da - ra) & ring_mask(m.wa);
        if (m.wb > 0 && !shared_b_slot) {
            u64 rb = oprg.next(m.wb);
            pend->cb = (d.db - rb) & ring_mask(m.wb);
            pend->send_cb = true;
        }
        t.off_a = d.da;  // dealer record: the plain offsets
        t.off_b = d.db;
    } else if (s.party() == 1) {
        t.entries = s.prev_stream(Purpose::TableEntry, idx).draw(size, m.out_width);
        Prg oprg = s.prev_stream(Purpose::TableOffset, idx);
        t.off_a = oprg.next(m.wa);
        if (m.wb > 0 && !shared_b_slot) t.off_b = oprg.next(m.wb);
    } else {
        t.entries.assign(size, 0);
    }
    return t;
}

void read_table_body(ByteReader& r, ShiftedTable& t) {
    r.get_vec(t.entries, byte_width(t.meta.out_width));
    t.off_a = r.get(byte_width(t.meta.wa));
    if (t.meta.wb > 0 && !t.group_shared_b) t.off_b = r.get(byte_width(t.meta.wb));
}

void write_table_body(ByteWriter& w, const TableMeta& m, const Pending& p) {
    w.put_vec(p.c, byte_width(m.out_width));
    w.put(p.ca, byte_width(m.wa));
    if (p.send_cb) w.put(p.cb, byte_width(m.wb));
}

}  // namespace

u64 table_offline_bytes(const TableMeta& m, bool group_shared_b) {
    u64 entries = u64(1) << (m.wa + m.wb);
    u64 bytes = entries * ((m.out_width + 7) / 8) + (m.wa + 7) / 8;
    if (m.wb > 0 && !group_shared_b) bytes += (m.wb + 7) / 8;
    return bytes;
}

std::vector<ShiftedTable> gen_tables(Session& s, std::span<const GenSpec> specs) {
    std::vector<ShiftedTable> out;
    out.reserve(specs.size());
    std::vector<Pending> pend(s.party() == 0 ? specs.size() : 0);
    std::vector<kernels::ShiftShareJob> jobs;

    for (std::size_t i = 0; i < specs.size(); ++i)
        out.push_back(gen_one(s, specs[i], false, s.party() == 0 ? &pend[i] : nullptr, &jobs));

    s.mark_distribution_round();
    if (s.party() == 0) {
        kernels::shift_share_tables(jobs);
        std::size_t total = 0;
        for (const auto& t : out) total += table_offline_bytes(t.meta, false);
        ByteWriter w;
        w.reserve_total(total);
        for (std::size_t i = 0; i < specs.size(); ++i) write_table_body(w, specs[i].meta, pend[i]);
        s.send_bytes(2, tag::TableData, std::move(w.buf));
    } else if (s.party() == 2) {
        auto payload = s.recv_bytes(0, tag::TableData);
        ByteReader r{payload};
        for (auto& t : out) read_table_body(r, t);
        r.done();
    }
    return out;
}

std::vector<TableGroup> gen_table_groups(Session& s, std::span<const GroupSpec> specs) {
    std::vector<TableGroup> out;
    out.reserve(specs.size());
    std::vector<std::vector<Pending>> pend(specs.size());
    std::vector<u64> shared_cb(specs.size(), 0);
    std::vector<kernels::ShiftShareJob> jobs;

    for (std::size_t gi = 0; gi < specs.size(); ++gi) {
        const GroupSpec& gs = specs[gi];
        if (gs.members.empty()) throw DomainError("empty table group");
        TableGroup g;
        g.wb = gs.members[0].meta.wb;
        if (g.wb == 0) throw StructuralError("table group requires two-input tables");
        for (const auto& m : gs.members)
            if (m.meta.wb != g.wb || m.meta.wa != gs.members[0].meta.wa)
                throw StructuralError("table group members disagree on slot widths");
        if (s.party() == 0) pend[gi].resize(gs.members.size());

        std::optional<u64> shared_db;  // P0 only
        for (std::size_t i = 0; i < gs.members.size(); ++i) {
            if (s.party() == 0 && i == 0) {
                // group offset = first member's dealer draw (or the forced one)
                GenSpec probe = gs.members[0];
                probe.force_db = gs.force_db;
                // peek the draw without consuming an index: recompute after gen_one
                ShiftedTable t0 = gen_one(s, probe, true, &pend[gi][0], &jobs);
                GenSpec tmp = gs.members[0];
                tmp.force_db = gs.force_db;
                DealerDraw d0 = dealer_offsets(s, tmp, t0.stream_index);
                shared_db = d0.db;
                t0.off_b = d0.db;
                g.stream_index = t0.stream_index;
                g.shared_off_b = d0.db;
                g.tables.push_back(std::move(t0));
                continue;
            }
            ShiftedTable t = gen_one(s, gs.members[i], true,
                                     s.party() == 0 ? &pend[gi][i] : nullptr, &jobs, shared_db);
            if (s.party() == 0) t.off_b = *shared_db;
            if (i == 0) g.stream_index = t.stream_index;
            g.tables.push_back(std::move(t));
        }

        // Shared-offset share: second draw of the first member's offset stream.
        u64 idx0 = g.stream_index;
        unsigned wa0 = g.tables[0].meta.wa;
        if (s.party() == 0) {
            Prg oprg = s.next_stream(Purpose::TableOffset, idx0);
            (void)oprg.next(wa0);
            u64 rb = oprg.next(g.wb);
            shared_cb[gi] = (g.shared_off_b - rb) & ring_mask(g.wb);
        } else if (s.party() == 1) {
            Prg oprg = s.prev_stream(Purpose::TableOffset, idx0);
            (void)oprg.next(wa0);
            g.shared_off_b = oprg.next(g.wb);
        }
        out.push_back(std::move(g));
    }

    s.mark_distribution_round();
    if (s.party() == 0) {
        kernels::shift_share_tables(jobs);
        std::size_t total = 0;
        for (const auto& g : out) {
            for (const auto& t : g.tables) total += table_offline_bytes(t.meta, true);
            total += (g.wb + 7) / 8;
        }
        ByteWriter w;
        w.reserve_total(total);
        for (std::size_t gi = 0; gi < out.size(); ++gi) {
            for (std::size_t i = 0; i < out[gi].tables.size(); ++i)
                write_table_body(w, out[gi].tables[i].meta, pend[gi][i]);
            w.put(shared_cb[gi], byte_width(out[gi].wb));
        }
        s.send_bytes(2, tag::TableData, std::move(w.buf));
    } else if (s.party() == 2) {
        auto payload = s.recv_bytes(0, tag::TableData);
        ByteReader r{payload};
        for (auto& g : out) {
            for (auto& t : g.tables) read_table_body(r, t);
            g.shared_off_b = r.get(byte_width(g.wb));
        }
        r.done();
    }
    return out;
}

TableGroup assemble_group(Session& s, std::vector<ShiftedTable> tables) {
    if (tables.empty()) throw DomainError("empty table group");
    TableGroup g;
    g.wb = tables[0].meta.wb;
    if (g.wb == 0) throw StructuralError("table group requires two-input tables");
    if (s.party() == 0) {
        for (const auto& t : tables)
            if (t.off_b != tables[0].off_b || t.meta.wb != g.wb)
                throw StructuralError("group members have mixed second-slot offsets");
    }
    for (auto& t : tables) t.group_shared_b = true;
    g.shared_off_b = tables[0].off_b;
    g.stream_index = tables[0].stream_index;
    g.tables = std::move(tables);
    return g;
}

namespace {

void check_eval_batch(std::span<ShiftedTable> tables, const Share2Vec& xs, int party,
                      bool two_input) {
    if (tables.empty()) throw DomainError("empty table batch");
    for (const auto& t : tables) {
        if (!(t.meta == tables[0].meta)) throw StructuralError("mixed table metadata in batch");
        if (t.consumed) throw StateError("shifted table reused after consumption");
        if (two_input && t.meta.wb == 0)
            throw StructuralError("two-input evaluation of a single-input table");
        if (!two_input && t.meta.wb != 0)
            throw StructuralError("single-input evaluation of a two-input table");
    }
    if (party != 0 && xs.size() != tables.size())
        throw StructuralError("input count does not match table count");
    if (party != 0 && xs.width != tables[0].meta.wa)
        throw StructuralError("input width does not match table slot");
}

}  // namespace

Share2Vec eval_single_batch(Session& s, std::span<ShiftedTable> tables, const Share2Vec& xs) {
    check_eval_batch(tables, xs, s.party(), false);
    unsigned wa = tables[0].meta.wa;
    Share2Vec out;
    out.width = tables[0].meta.out_width;
    for (auto& t : tables) t.consumed = true;

    std::vector<u64> delta;
    if (s.party() != 0) {
        delta.resize(tables.size());
        u64 m = ring_mask(wa);
        for (std::size_t i = 0; i < tables.size(); ++i)
            delta[i] = (xs.comp[i] - tables[i].off_a) & m;
    }
    auto revealed = s.open2(delta, wa, tag::OpenDelta);
    if (s.party() == 0) return out;

    out.comp.resize(tables.size());
    for (std::size_t i = 0; i < tables.size(); ++i) out.comp[i] = tables[i].entries[revealed[i]];
    return out;
}

Share2Vec eval_two_batch(Session& s, std::span<ShiftedTable> tables, const Share2Vec& a,
                         const Share2Vec& b) {
    check_eval_batch(tables, a, s.party(), true);
    unsigned wa = tables[0].meta.wa, wb = tables[0].meta.wb;
    if (s.party() != 0 && (b.size() != tables.size() || b.width != wb))
        throw StructuralError("second input does not match table slot");
    Share2Vec out;
    out.width = tables[0].meta.out_width;
    for (auto& t : tables) t.consumed = true;

    std::vector<u64> da, db;
    if (s.party() != 0) {
        da.resize(tables.size());
        db.resize(tables.size());
        u64 ma = ring_mask(wa), mb = ring_mask(wb);
        for (std::size_t i = 0; i < tables.size(); ++i) {
            da[i] = (a.comp[i] - tables[i].off_a) & ma;
            db[i] = (b.comp[i] - tables[i].off_b) & mb;
        }
    }
    OpenStream streams[2] = {{da, wa}, {db, wb}};
    auto revealed = s.open2_multi(streams, tag::OpenDelta);
    if (s.party() == 0) return out;

    out.comp.resize(tables.size());
    for (std::size_t i = 0; i < tables.size(); ++i)
        out.comp[i] = tables[i].entries[(revealed[0][i] << wb) | revealed[1][i]];
    return out;
}

std::vector<Share2Vec> eval_groups(Session& s, std::span<TableGroup> groups,
                                   std::span<const Share2Vec> a_inputs,
                                   const Share2Vec& shared_bs) {
    if (groups.empty()) throw DomainError("empty group batch");
    if (s.party() != 0 && (a_inputs.size() != groups.size() || shared_bs.size() != groups.size()))
        throw StructuralError("group inputs do not match group count");
    unsigned wa = groups[0].tables.empty() ? 0 : groups[0].tables[0].meta.wa;
    unsigned wb = groups[0].wb;

    std::vector<u64> da, db;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        auto& g = groups[gi];
        if (g.tables.empty()) throw StateError("empty table group");
        if (g.tables[0].meta.wa != wa || g.wb != wb)
            throw StructuralError("mixed slot widths across grouped batch");
        for (auto& t : g.tables) {
            if (t.consumed) throw StateError("shifted table reused after consumption");
            if (!t.group_shared_b) throw StructuralError("non-group table inside a group");
            t.consumed = true;
        }
        if (s.party() != 0) {
            const Share2Vec& a = a_inputs[gi];
            if (a.size() != g.tables.size() || a.width != wa)
                throw StructuralError("group first inputs do not match member tables");
            if (shared_bs.width != wb)
                throw StructuralError("shared input width does not match group slot");
            u64 ma = ring_mask(wa);
            for (std::size_t i = 0; i < g.tables.size(); ++i)
                da.push_back((a.comp[i] - g.tables[i].off_a) & ma);
            db.push_back((shared_bs.comp[gi] - g.shared_off_b) & ring_mask(wb));
        }
    }

    OpenStream streams[2] = {{da, wa}, {db, wb}};
    auto revealed = s.open2_multi(streams, tag::OpenDelta);

    std::vector<Share2Vec> outs(groups.size());
    for (std::size_t gi = 0; gi < groups.size(); ++gi)
        outs[gi].width = groups[gi].tables[0].meta.out_width;
    if (s.party() == 0) return outs;

    std::size_t pos = 0;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        auto& g = groups[gi];
        u64 dvb = revealed[1][gi];
        outs[gi].comp.resize(g.tables.size());
        for (std::size_t i = 0; i < g.tables.size(); ++i, ++pos)
            outs[gi].comp[i] = g.tables[i].entries[(revealed[0][pos] << g.wb) | dvb];
    }
    return outs;
}

Share2Vec eval_group(Session& s, TableGroup& g, const Share2Vec& a_inputs,
                     const Share2Vec& shared_b) {
    auto outs = eval_groups(s, std::span<TableGroup>(&g, 1),
                            std::span<const Share2Vec>(&a_inputs, 1), shared_b);
    return std::move(outs[0]);
}

Share2Vec convert_up(Session& s, std::span<ShiftedTable> tables, const Share2Vec& xs) {
    return eval_single_batch(s, tables, xs);
}

RssVec reshare_to_rss(Session& s, const Share2Vec& xs, std::size_t count) {
    u64 idx = s.alloc_reshare();
    unsigned w = xs.width;
    RssVec out;
    out.width = w;

    if (s.party() == 0) {
        // P0's pair (<x>_1, <x>_2) comes straight from the two pair seeds.
        out.next = s.prev_stream(Purpose::Reshare, idx).draw(count, w);  // <x>_1 (P0-P2 seed)
        out.prev = s.next_stream(Purpose::Reshare, idx).draw(count, w);  // <x>_2 (P0-P1 seed)
        s.open2(std::span<const u64>{}, w, tag::ReshareDelta);
        return out;
    }

    if (xs.size() != count) throw StructuralError("reshare count mismatch");
    u64 m = ring_mask(w);
    std::vector<u64> minted =
        (s.party() == 1 ? s.prev_stream(Purpose::Reshare, idx) : s.next_stream(Purpose::Reshare, idx))
            .draw(count, w);
    std::vector<u64> delta(count);
    for (std::size_t i = 0; i < count; ++i) delta[i] = (xs.comp[i] - minted[i]) & m;
    auto c0 = s.open2(delta, w, tag::ReshareDelta);  // <x>_0 = delta1 + delta2

    if (s.party() == 1) {
        out.next = std::move(minted);  // <x>_2
        out.prev = std::move(c0);      // <x>_0
    } else {
        out.next = std::move(c0);      // <x>_0
        out.prev = std::move(minted);  // <x>_1
    }
    return out;
}

RssVec convert_to_rss(Session& s, std::span<ShiftedTable> tables, const Share2Vec& xs) {
    Share2Vec lifted = convert_up(s, tables, xs);
    return reshare_to_rss(s, lifted, tables.size());
}

Share2Vec rss_to_share2(Session& s, const RssVec& x) {
    Share2Vec out;
    out.width = x.width;
    if (s.party() == 0) return out;
    u64 m = ring_mask(x.width);
    if (s.party() == 1) {
        out.comp.resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) out.comp[i] = (x.next[i] + x.prev[i]) & m;
    } else {
        out.comp = x.prev;
    }
    return out;
}

// --- persistence -------------------------------------------------------------

namespace {
void put_u64(std::ostream& os, u64 v) {
    u8 b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<u8>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}
u64 get_u64(std::istream& is) {
    u8 b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw ParseError("truncated table record", static_cast<std::size_t>(is.tellg()));
    u64 v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<u64>(b[i]) << (8 * i);
    return v;
}
}  // namespace

void write_table(std::ostream& os, const ShiftedTable& t, int party) {
    u8 head[8] = {};
    u16 kind = static_cast<u16>(t.meta.kind);
    std::memcpy(head, &kind, 2);
    head[2] = static_cast<u8>(t.meta.wa);
    head[3] = static_cast<u8>(t.meta.wb);
    head[4] = static_cast<u8>(t.meta.out_width);
    head[5] = static_cast<u8>(t.group_shared_b ? 1 : 0);
    os.write(reinterpret_cast<const char*>(head), 8);
    put_u64(os, t.stream_index);
    put_u64(os, t.off_a);
    put_u64(os, t.off_b);
    if (party != 0) {
        auto packed = pack_bits(t.entries, t.meta.out_width);
        os.write(reinterpret_cast<const char*>(packed.data()),
                 static_cast<std::streamsize>(packed.size()));
    }
}

ShiftedTable read_table(std::istream& is, int party) {
    u8 head[8];
    is.read(reinterpret_cast<char*>(head), 8);
    if (!is) throw ParseError("truncated table header", static_cast<std::size_t>(is.tellg()));
    ShiftedTable t;
    u16 kind;
    std::memcpy(&kind, head, 2);
    t.meta.kind = static_cast<TableKind>(kind);
    t.meta.wa = head[2];
    t.meta.wb = head[3];
    t.meta.out_width = head[4];
    t.group_shared_b = head[5] != 0;
    if (t.meta.wa < 1 || t.meta.wa > 8 || t.meta.wb > 8 || t.meta.out_width < 1 ||
        t.meta.out_width > 64)
        throw ParseError("implausible table metadata", static_cast<std::size_t>(is.tellg()));
    t.stream_index = get_u64(is);
    t.off_a = get_u64(is);
    t.off_b = get_u64(is);
    if (party != 0) {
        std::size_t count = std::size_t(1) << (t.meta.wa + t.meta.wb);
        std::vector<u8> packed(packed_size(count, t.meta.out_width));
        is.read(reinterpret_cast<char*>(packed.data()),
                static_cast<std::streamsize>(packed.size()));
        if (!is) throw ParseError("truncated table entries", static_cast<std::size_t>(is.tellg()));
        t.entries = unpack_bits(packed, t.meta.out_width, count);
    }
    return t;
}

}  // namespace qmpc
