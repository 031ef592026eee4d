#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "amisec/auth/auth.hpp"
#include "amisec/core/rng.hpp"
#include "amisec/core/wire.hpp"
#include "amisec/crypto/rsa.hpp"
#include "amisec/localization/localize.hpp"
#include "amisec/sequencer/sequencer.hpp"
#include "amisec/sim/scenario.hpp"

namespace amisec {

// ---------------------------------------------------------------------------
// topology

struct NodePosition {
    double x = 0.0, y = 0.0;
};

struct Topology {
    std::map<MeterId, NodePosition> positions;           // meters + concentrator
    std::map<MeterId, std::vector<MeterId>> adjacency;   // mesh + backhaul
    std::map<MeterId, std::map<MeterId, MeterId>> next_hop;  // [from][dest] -> next

    bool linked(MeterId a, MeterId b) const {
        auto it = adjacency.find(a);
        if (it == adjacency.end()) return false;
        return std::find(it->second.begin(), it->second.end(), b) != it->second.end();
    }

    bool is_mesh_link(MeterId a, MeterId b) const {
        return positions.count(a) && positions.count(b);
    }
};

// Meters on a Manhattan grid (or explicitly listed nodes); concentrator one
// spacing west of the middle of the first column unless listed; servers and
// control center behind the concentrator on dedicated backhaul links. Mesh
// links come from radio range unless the config lists explicit edges.
inline Topology build_topology(const ScenarioConfig& cfg) {
    Topology t;
    if (cfg.nodes.empty()) {
        for (int r = 0; r < cfg.grid_rows; ++r) {
            for (int c = 0; c < cfg.grid_cols; ++c) {
                MeterId id{kFirstMeterId + static_cast<uint32_t>(r * cfg.grid_cols + c)};
                t.positions[id] = {c * cfg.grid_spacing_m, r * cfg.grid_spacing_m};
            }
        }
        double mid_row = (cfg.grid_rows - 1) / 2.0;
        t.positions[kConcentrator] = {-cfg.grid_spacing_m, mid_row * cfg.grid_spacing_m};
    } else {
        for (const auto& n : cfg.nodes) t.positions[MeterId{n.id}] = {n.x, n.y};
        if (!t.positions.count(kConcentrator)) {
            double lo_x = 1e300, mid_y = 0;
            for (const auto& [id, p] : t.positions) {
                lo_x = std::min(lo_x, p.x);
                mid_y += p.y;
            }
            mid_y /= static_cast<double>(t.positions.size());
            t.positions[kConcentrator] = {lo_x - cfg.grid_spacing_m, mid_y};
        }
    }

    if (cfg.edges.empty()) {
        // mesh links by radio range
        for (auto& [a, pa] : t.positions) {
            for (auto& [b, pb] : t.positions) {
                if (a >= b) continue;
                double d = euclid(pa.x, pa.y, pb.x, pb.y);
                if (d <= cfg.radio_range_m && d > 0.0) {
                    t.adjacency[a].push_back(b);
                    t.adjacency[b].push_back(a);
                }
            }
        }
    } else {
        for (const auto& [a, b] : cfg.edges) {
            t.adjacency[MeterId{a}].push_back(MeterId{b});
            t.adjacency[MeterId{b}].push_back(MeterId{a});
        }
    }
    // dedicated backhaul
    auto link = [&t](MeterId a, MeterId b) {
        t.adjacency[a].push_back(b);
        t.adjacency[b].push_back(a);
    };
    link(kConcentrator, kControlCenter);
    link(kConcentrator, kMasterServer);
    link(kConcentrator, kAuxServer);
    link(kControlCenter, kMasterServer);
    link(kControlCenter, kAuxServer);
    link(kMasterServer, kAuxServer);

    for (auto& [id, nbrs] : t.adjacency) std::sort(nbrs.begin(), nbrs.end());

    // BFS next-hop per destination, deterministic tie-break by node id order
    for (const auto& [dest, unused] : t.adjacency) {
        std::map<MeterId, MeterId> toward;  // node -> next hop toward dest
        std::queue<MeterId> q;
        std::set<MeterId> seen{dest};
        q.push(dest);
        while (!q.empty()) {
            MeterId cur = q.front();
            q.pop();
            for (MeterId n : t.adjacency.at(cur)) {
                if (seen.insert(n).second) {
                    toward[n] = cur;
                    q.push(n);
                }
            }
        }
        for (auto& [node, next] : toward) t.next_hop[node][dest] = next;
    }
    return t;
}

// ---------------------------------------------------------------------------
// results

struct AlertRow {
    Tick tick = 0;
    MeterId verifier;
    MeterId claimed;
    double score = 0.0;
    std::string reason;
};

struct SessionOutcome {
    MeterId meter;
    uint32_t session = 0;
    bool completed = false;
    bool payload_match = false;
    Tick finished_at = 0;
};

struct SimMetrics {
    long sessions_initiated = 0;
    long sessions_completed = 0;
    long sessions_failed = 0;
    long payload_matches = 0;
    long frames_delivered = 0;
    long frames_lost = 0;
    long data_frames_seen_at_meters = 0;   // legit hop-forward opportunities
    long data_frames_forwarded = 0;        // every legit frame passed on
    long bootstrap_forwards = 0;           // subset forwarded during bootstrap
    long head_forwards = 0;                // subset with no feature (cadence reset)
    long ceased_frames = 0;
    long false_rejects = 0;                // legit frames ceased
    long rogue_frames_seen = 0;
    long rogue_frames_forwarded = 0;       // false accepts
    long rogue_frames_ceased = 0;
    long alerts = 0;
    long semi_trust_violations = 0;
    long quarantine_drops = 0;
    std::map<std::pair<uint32_t, uint32_t>, long> link_frames;
    int rogue_detection_latency = -1;      // 1-based rogue frame index of the first cease

    std::string to_csv() const {
        std::ostringstream os;
        os << "metric,value\n";
        os << "sessions_initiated," << sessions_initiated << "\n";
        os << "sessions_completed," << sessions_completed << "\n";
        os << "sessions_failed," << sessions_failed << "\n";
        os << "payload_matches," << payload_matches << "\n";
        os << "frames_delivered," << frames_delivered << "\n";
        os << "frames_lost," << frames_lost << "\n";
        os << "data_frames_seen_at_meters," << data_frames_seen_at_meters << "\n";
        os << "data_frames_forwarded," << data_frames_forwarded << "\n";
        os << "bootstrap_forwards," << bootstrap_forwards << "\n";
        os << "head_forwards," << head_forwards << "\n";
        os << "ceased_frames," << ceased_frames << "\n";
        os << "false_rejects," << false_rejects << "\n";
        os << "rogue_frames_seen," << rogue_frames_seen << "\n";
        os << "rogue_frames_forwarded," << rogue_frames_forwarded << "\n";
        os << "rogue_frames_ceased," << rogue_frames_ceased << "\n";
        os << "alerts," << alerts << "\n";
        os << "semi_trust_violations," << semi_trust_violations << "\n";
        os << "quarantine_drops," << quarantine_drops << "\n";
        os << "rogue_detection_latency," << rogue_detection_latency << "\n";
        return os.str();
    }

    std::string links_csv() const {
        std::ostringstream os;
        os << "from,to,frames\n";
        for (const auto& [k, v] : link_frames) os << k.first << "," << k.second << "," << v << "\n";
        return os.str();
    }
};

struct SimResult {
    SimMetrics metrics;
    std::vector<AlertRow> alerts;
    std::vector<std::string> trace;  // one line per delivered frame
    std::vector<SessionOutcome> outcomes;
    std::vector<std::vector<uint8_t>> eavesdropped;  // captured frames

    std::string alerts_csv() const {
        std::ostringstream os;
        os.precision(17);
        os << "tick,verifier_id,claimed_sender,score,reason\n";
        for (const auto& a : alerts)
            os << a.tick << "," << a.verifier.id << "," << a.claimed.id << "," << a.score << ","
               << a.reason << "\n";
        return os.str();
    }
};

// ---------------------------------------------------------------------------
// reassembly (Step 5)

// Rebuilds the plaintext from data-block payloads keyed by their
// transmission position. Works for any arrival order since the key is the
// seq_index carried in each header.
inline std::vector<uint8_t> reassemble_session(
    const std::map<uint16_t, std::vector<uint8_t>>& frames, uint16_t total_blocks,
    const RandomSequence& sequence, const SecretKey& sk) {
    if (frames.size() < total_blocks)
        throw std::invalid_argument("reassemble_session: missing blocks");
    TransmissionOrder order = derive_order(sequence);
    std::vector<std::vector<uint8_t>> h(total_blocks);
    for (const auto& [k, payload] : frames) {
        if (k >= total_blocks) throw std::invalid_argument("reassemble_session: bad index");
        h[k] = payload;
    }
    BlockSet blocks = invert_order(h, order);
    auto stream = unsegment(blocks);
    CipherBlob blob = cipher_from_bytes(stream);
    return decrypt(sk, blob);
}

// ---------------------------------------------------------------------------
// simulator

class Simulator {
public:
    explicit Simulator(ScenarioConfig cfg)
        : cfg_(std::move(cfg)),
          topo_(build_topology(cfg_)),
          crypto_rng_(cfg_.seed, StreamId::Crypto),
          seq_rng_(cfg_.seed, StreamId::Sequencer),
          noise_rng_(cfg_.seed, StreamId::Noise),
          pso_rng_(cfg_.seed, StreamId::Pso),
          data_rng_(cfg_.seed, StreamId::DataGen),
          control_rng_(cfg_.seed, StreamId::SimControl),
          loss_rng_(cfg_.seed, StreamId::SimLoss),
          adversary_rng_(cfg_.seed, StreamId::Adversary) {
        cfg_.validate();
    }

    SimResult run() {
        schedule_reports();
        schedule_adversaries();
        while (!events_.empty()) {
            Event ev = events_.top();
            events_.pop();
            now_ = ev.tick;
            dispatch(ev);
        }
        finalize_sessions();
        return std::move(result_);
    }

    // Frame-injection hook for tests and fault drills: deliver an arbitrary
    // frame to a node at a given tick, with a claimed link-level source and a
    // physical transmit position.
    void schedule_frame_delivery(Tick tick, MeterId to, MeterId link_from,
                                 MeterId actual_source, double tx_x, double tx_y,
                                 std::vector<uint8_t> frame) {
        Event ev;
        ev.tick = tick;
        ev.kind = EventKind::Delivery;
        ev.to = to;
        ev.link_from = link_from;
        ev.actual_source = actual_source;
        ev.tx_x = tx_x;
        ev.tx_y = tx_y;
        ev.frame = std::move(frame);
        push_event(std::move(ev));
    }

private:
    enum class EventKind { Delivery, MeterReport, FrameEmit, RogueEmit, Replay, SessionTimeout };

    struct Event {
        Tick tick = 0;
        uint64_t seq = 0;
        EventKind kind = EventKind::Delivery;
        MeterId to;          // delivery target / acting node
        MeterId link_from;   // claimed link-level transmitter
        MeterId actual_source;  // ground truth (rogue id or honest node)
        double tx_x = 0.0, tx_y = 0.0;
        std::vector<uint8_t> frame;
        uint32_t session = 0;
        int adversary_index = -1;

        bool operator>(const Event& o) const {
            return tick != o.tick ? tick > o.tick : seq > o.seq;
        }
    };

    struct MeterSession {
        uint32_t id = 0;
        enum class Phase { AwaitKey, AwaitSeqAck, Transmitting, Done, Failed } phase =
            Phase::AwaitKey;
        Tick started_at = 0;
        std::optional<PublicKey> pk;
        RandomSequence sequence;
        TransmissionOrder order;
        std::vector<std::vector<uint8_t>> ordered_blocks;
        size_t next_block = 0;
    };

    struct MeterState {
        NodePosition pos;
        uint32_t session_counter = 0;
        int sessions_left = 0;
        std::optional<MeterSession> active;
        std::optional<RandomSequence> prev_sequence;
        std::map<MeterId, NeighborHistory> histories;
        std::map<MeterId, Tick> last_rx;
        std::set<MeterId> attach_requested;
    };

    struct CcSessionBuf {
        std::optional<SecretKey> sk;
        std::optional<RandomSequence> sequence;
        std::map<uint16_t, std::vector<uint8_t>> frames;  // seq_index -> payload
        uint16_t total_blocks = 0;
        bool timeout_scheduled = false;
        bool resolved = false;
    };

    // --- scheduling ---------------------------------------------------------

    void push_event(Event ev) {
        ev.seq = event_seq_++;
        events_.push(std::move(ev));
    }

    void schedule_reports() {
        for (auto& [id, pos] : topo_.positions) {
            if (!id.is_meter()) continue;
            meters_[id].pos = pos;
            meters_[id].sessions_left = cfg_.sessions_per_meter;
            if (cfg_.sessions_per_meter > 0) {
                Tick start = 1 + static_cast<Tick>(control_rng_.uniform(0.0, 1000.0 * (id.id - kFirstMeterId + 1)));
                Event ev;
                ev.tick = start;
                ev.kind = EventKind::MeterReport;
                ev.to = id;
                push_event(std::move(ev));
            }
        }
    }

    void schedule_adversaries() {
        for (size_t i = 0; i < cfg_.adversaries.size(); ++i) {
            const auto& adv = cfg_.adversaries[i];
            if (adv.kind == AdversarySpec::Kind::RogueMeter) {
                Event ev;
                ev.tick = adv.activation;
                ev.kind = EventKind::RogueEmit;
                ev.adversary_index = static_cast<int>(i);
                push_event(std::move(ev));
            }
        }
    }

    Tick jittered_ticks(double base_s, double jitter_frac, RngStream& rng) {
        double j = jitter_frac > 0 ? rng.uniform(1.0 - jitter_frac, 1.0 + jitter_frac) : 1.0;
        Tick t = static_cast<Tick>(base_s * j * kTicksPerSecond);
        return t == 0 ? 1 : t;
    }

    // --- transmission primitives ---------------------------------------------

    // One physical hop. Loss applies to mesh links only; backhaul links are
    // dedicated wires.
    void transmit(MeterId from, MeterId to, const std::vector<uint8_t>& frame,
                  MeterId claimed_from, MeterId actual_source, double tx_x, double tx_y) {
        if (!topo_.linked(from, to)) return;  // no radio path
        bool mesh = topo_.is_mesh_link(from, to);
        if (mesh && cfg_.loss > 0.0 && loss_rng_.uniform() < cfg_.loss) {
            ++result_.metrics.frames_lost;
            return;
        }
        for (size_t i = 0; i < cfg_.adversaries.size(); ++i) {
            const auto& adv = cfg_.adversaries[i];
            bool on_link = (adv.link_a == from && adv.link_b == to) ||
                           (adv.link_a == to && adv.link_b == from);
            if (!on_link) continue;
            if (adv.kind == AdversarySpec::Kind::Eavesdropper) {
                result_.eavesdropped.push_back(frame);
            } else if (adv.kind == AdversarySpec::Kind::Replayer && now_ >= adv.activation) {
                Event rp;
                rp.tick = now_ + static_cast<Tick>(adv.delay_s * kTicksPerSecond);
                rp.kind = EventKind::Replay;
                rp.to = to;
                rp.link_from = claimed_from;
                rp.actual_source = MeterId{0xADFFu};
                rp.tx_x = (topo_.positions.at(adv.link_a).x + topo_.positions.at(adv.link_b).x) / 2;
                rp.tx_y = (topo_.positions.at(adv.link_a).y + topo_.positions.at(adv.link_b).y) / 2;
                rp.frame = frame;
                push_event(std::move(rp));
            }
        }
        Event ev;
        double delay_ms = mesh ? cfg_.mesh_delay_ms : cfg_.backhaul_delay_ms;
        ev.tick = now_ + std::max<Tick>(1, static_cast<Tick>(delay_ms));
        ev.kind = EventKind::Delivery;
        ev.to = to;
        ev.link_from = claimed_from;
        ev.actual_source = actual_source;
        ev.tx_x = tx_x;
        ev.tx_y = tx_y;
        ev.frame = frame;
        push_event(std::move(ev));
    }

    // Route one hop toward dest from node `from` (honest transmission).
    void send_toward(MeterId from, MeterId dest, const std::vector<uint8_t>& frame) {
        auto it = topo_.next_hop.find(from);
        if (it == topo_.next_hop.end()) return;
        auto hop = it->second.find(dest);
        if (hop == it->second.end()) return;
        double x = 0, y = 0;
        if (auto p = topo_.positions.find(from); p != topo_.positions.end()) {
            x = p->second.x;
            y = p->second.y;
        }
        transmit(from, hop->second, frame, from, from, x, y);
    }

    std::vector<uint8_t> make_frame(MsgType type, MeterId sender, uint32_t session,
                                    uint16_t seq_index, uint16_t total,
                                    std::span<const uint8_t> payload) {
        PacketHeader h;
        h.version = 1;
        h.msg_type = type;
        h.sender = sender;
        h.session = session;
        h.seq_index = seq_index;
        h.total_blocks = total;
        h.send_time = now_;
        return encode_frame(h, payload);
    }

    // --- event dispatch -------------------------------------------------------

    void dispatch(const Event& ev) {
        switch (ev.kind) {
            case EventKind::MeterReport: meter_start_session(ev.to); break;
            case EventKind::FrameEmit: meter_emit_frame(ev.to, ev.session); break;
            case EventKind::RogueEmit: rogue_emit(ev.adversary_index); break;
            case EventKind::Replay:
            case EventKind::Delivery: deliver(ev); break;
            case EventKind::SessionTimeout: session_timeout(ev.to, ev.session); break;
        }
    }

    void deliver(const Event& ev) {
        Frame f;
        try {
            f = decode_frame(ev.frame);
        } catch (const WireError&) {
            return;  // malformed frames die on the floor
        }
        ++result_.metrics.frames_delivered;
        ++result_.metrics.link_frames[{ev.link_from.id, ev.to.id}];
        result_.trace.push_back(trace_line(now_, ev.frame));
        check_semi_trust(ev.to, f.header.msg_type);

        if (ev.to == kMasterServer) master_handle(f);
        else if (ev.to == kAuxServer) aux_handle(f);
        else if (ev.to == kControlCenter) cc_handle(f);
        else if (ev.to == kConcentrator) forward_from_concentrator(f, ev);
        else meter_handle(ev.to, f, ev);
    }

    // Semi-trust separation: the master never sees sequence material or data;
    // the auxiliary never sees consumption data frames.
    void check_semi_trust(MeterId to, MsgType t) {
        bool violation =
            (to == kMasterServer &&
             (t == MsgType::SequenceCipher || t == MsgType::SequenceForward ||
              t == MsgType::DataBlock)) ||
            (to == kAuxServer && t == MsgType::DataBlock);
        if (violation) ++result_.metrics.semi_trust_violations;
    }

    // --- meter behaviour ------------------------------------------------------

    void meter_start_session(MeterId id) {
        MeterState& m = meters_[id];
        if (m.sessions_left <= 0) return;
        if (m.active && m.active->phase != MeterSession::Phase::Done &&
            m.active->phase != MeterSession::Phase::Failed) {
            // A key or frame got lost on the way: abandon stale handshakes so the
            // meter is not wedged forever, otherwise retry later.
            Tick stale = static_cast<Tick>(cfg_.session_timeout_s * kTicksPerSecond);
            if (now_ - m.active->started_at > stale) {
                m.active->phase = MeterSession::Phase::Failed;
            } else {
                Event ev;
                ev.tick = now_ + jittered_ticks(cfg_.report_interval_s,
                                                cfg_.report_jitter_frac, control_rng_);
                ev.kind = EventKind::MeterReport;
                ev.to = id;
                push_event(std::move(ev));
                return;
            }
        }
        --m.sessions_left;
        ++result_.metrics.sessions_initiated;
        MeterSession s;
        s.id = ++m.session_counter;
        s.phase = MeterSession::Phase::AwaitKey;
        s.started_at = now_;
        m.active = std::move(s);

        auto frame = make_frame(MsgType::KeyRequest, id, m.active->id, 0, 0, {});
        send_toward(id, kMasterServer, frame);

        if (m.sessions_left > 0) {
            Event ev;
            ev.tick = now_ + jittered_ticks(cfg_.report_interval_s, cfg_.report_jitter_frac,
                                            control_rng_);
            ev.kind = EventKind::MeterReport;
            ev.to = id;
            push_event(std::move(ev));
        }
    }

    void meter_handle(MeterId id, const Frame& f, const Event& ev) {
        MeterState& m = meters_[id];
        switch (f.header.msg_type) {
            case MsgType::PublicKey:
            case MsgType::AttachApproval: {
                // addressed by the meter id leading the payload
                MeterId target{meter_dest_of(f)};
                if (target != id) {
                    send_toward(id, target, encode_frame(f.header, f.payload));
                    return;
                }
                if (f.header.msg_type == MsgType::PublicKey) {
                    if (!m.active || m.active->phase != MeterSession::Phase::AwaitKey) return;
                    if (f.header.session != m.active->id) return;
                    m.active->pk = parse_public_key(
                        std::string(f.payload.begin() + 4, f.payload.end()));
                    meter_prepare_transmission(id);
                }
                break;
            }
            case MsgType::DataBlock: {
                hop_forward(id, f, ev);
                break;
            }
            default:
                // transit traffic (key requests, sequence ciphers, alerts)
                route_transit(id, f);
                break;
        }
    }

    // Step 2: generate S, send it encrypted to the auxiliary, and emit the
    // encrypted, segmented, reordered data blocks.
    void meter_prepare_transmission(MeterId id) {
        MeterState& m = meters_[id];
        MeterSession& s = *m.active;
        s.phase = MeterSession::Phase::AwaitSeqAck;

        s.sequence = gen_sequence(seq_rng_, cfg_.block_count,
                                  m.prev_sequence ? &*m.prev_sequence : nullptr);
        m.prev_sequence = s.sequence;
        s.order = derive_order(s.sequence);

        // encrypt S under the session public key for the auxiliary server
        CipherBlob seq_cipher = encrypt(*s.pk, s.sequence.to_bytes());
        auto seq_bytes = cipher_to_bytes(seq_cipher, cfg_.key_bits);
        auto seq_frame =
            make_frame(MsgType::SequenceCipher, id, s.id, 0, 0, seq_bytes);
        send_toward(id, kAuxServer, seq_frame);

        // consumption data for this session
        std::vector<uint8_t> data(cfg_.data_bits / 8);
        data_rng_.fill_bytes(data);
        originals_[{id, s.id}] = data;

        CipherBlob blob = encrypt(*s.pk, data);
        auto cipher_stream = cipher_to_bytes(blob, cfg_.key_bits);
        BlockSet blocks = segment(cipher_stream, cfg_.block_count);
        s.ordered_blocks = apply_order(blocks, s.order);
        s.next_block = 0;
        s.phase = MeterSession::Phase::Transmitting;

        Event ev;
        ev.tick = now_ + 1;
        ev.kind = EventKind::FrameEmit;
        ev.to = id;
        ev.session = s.id;
        push_event(std::move(ev));
    }

    void meter_emit_frame(MeterId id, uint32_t session) {
        MeterState& m = meters_[id];
        if (!m.active || m.active->id != session ||
            m.active->phase != MeterSession::Phase::Transmitting)
            return;
        MeterSession& s = *m.active;
        auto frame = make_frame(MsgType::DataBlock, id, s.id,
                                static_cast<uint16_t>(s.next_block), cfg_.block_count,
                                s.ordered_blocks[s.next_block]);
        send_toward(id, kControlCenter, frame);
        ++s.next_block;
        if (s.next_block >= s.ordered_blocks.size()) {
            s.phase = MeterSession::Phase::Done;
            return;
        }
        Event ev;
        ev.tick = now_ + jittered_ticks(cfg_.frame_gap_s, cfg_.frame_gap_jitter_frac,
                                        control_rng_);
        ev.kind = EventKind::FrameEmit;
        ev.to = id;
        ev.session = session;
        push_event(std::move(ev));
    }

    void route_transit(MeterId id, const Frame& f) {
        MeterId dest = transit_destination(f.header.msg_type);
        auto bytes = encode_frame(f.header, f.payload);
        send_toward(id, dest, bytes);
    }

    MeterId transit_destination(MsgType t) const {
        switch (t) {
            case MsgType::KeyRequest: return kMasterServer;
            case MsgType::SequenceCipher: return kAuxServer;
            default: return kControlCenter;
        }
    }

    // Step 4: hop-to-hop verification of data frames at forwarding meters.
    void hop_forward(MeterId id, const Frame& f, const Event& ev) {
        MeterState& m = meters_[id];
        bool is_rogue = ev.actual_source.id >= 0xAD00u;
        bool from_meter = ev.link_from.is_meter();

        if (from_meter) {
            if (is_rogue) ++result_.metrics.rogue_frames_seen;
            else ++result_.metrics.data_frames_seen_at_meters;
        }

        bool forward = true;
        if (cfg_.auth_mode != AuthMode::Off && from_meter) {
            forward = authenticate_hop(id, m, f, ev, is_rogue);
        }
        if (forward) {
            if (from_meter) {
                if (is_rogue) ++result_.metrics.rogue_frames_forwarded;
                else ++result_.metrics.data_frames_forwarded;
            }
            auto bytes = encode_frame(f.header, f.payload);
            send_toward(id, kControlCenter, bytes);
        }
    }

    // Runs the localization + one-class pipeline on one observed frame.
    // Returns whether the frame is forwarded.
    bool authenticate_hop(MeterId id, MeterState& m, const Frame& f, const Event& ev,
                          bool is_rogue) {
        MeterId claimed = ev.link_from;
        NeighborHistory& h = m.histories[claimed];
        if (h.records.empty()) h.sender = claimed;

        if (m.attach_requested.insert(claimed).second) {
            uint8_t payload[4] = {static_cast<uint8_t>(claimed.id >> 24),
                                  static_cast<uint8_t>(claimed.id >> 16),
                                  static_cast<uint8_t>(claimed.id >> 8),
                                  static_cast<uint8_t>(claimed.id)};
            auto frame = make_frame(MsgType::AttachRequest, id, 0, 0, 0, payload);
            send_toward(id, kControlCenter, frame);
        }

        // physical position estimate from the RSS of this transmission
        std::optional<std::pair<double, double>> est = estimate_position(ev.tx_x, ev.tx_y);

        double gap_s = -1.0;
        auto last = m.last_rx.find(claimed);
        if (last != m.last_rx.end() && now_ > last->second)
            gap_s = (now_ - last->second) / static_cast<double>(kTicksPerSecond);
        m.last_rx[claimed] = now_;

        bool cadence_reset = gap_s < 0.0 || gap_s > cfg_.burst_timeout_s;

        TransmissionRecord rec;
        rec.sender = claimed;
        rec.tick = now_;
        rec.packet_size = static_cast<double>(kHeaderSize + f.payload.size());
        if (est) {
            rec.x = est->first;
            rec.y = est->second;
        }
        rec.first = cadence_reset;
        if (!cadence_reset) rec.inter_arrival = gap_s;

        if (!est) {
            // too few receivers to localize; pass through with the bootstrap flag
            ++result_.metrics.bootstrap_forwards;
            return true;
        }

        if (!h.bootstrapped()) {
            record_transmission(h, rec);
            if (bootstrap_window_elapsed(h, cfg_.auth, now_)) bootstrap(h, cfg_.auth);
            ++result_.metrics.bootstrap_forwards;
            return true;
        }

        if (cadence_reset) {
            record_transmission(h, rec);
            ++result_.metrics.head_forwards;
            return true;
        }

        AuthDecision d = verify(h, rec);
        if (d.forward()) return true;

        ++result_.metrics.ceased_frames;
        if (is_rogue) note_rogue_ceased();
        else ++result_.metrics.false_rejects;
        emit_alert(id, claimed, kAlertOcsvmOutlier, d.score, d.feature);
        // monitor mode observes but does not gate
        return cfg_.auth_mode != AuthMode::Enforce;
    }

    void note_rogue_ceased() {
        ++result_.metrics.rogue_frames_ceased;
        if (result_.metrics.rogue_detection_latency < 0)
            result_.metrics.rogue_detection_latency =
                static_cast<int>(result_.metrics.rogue_frames_seen);
    }

    std::optional<std::pair<double, double>> estimate_position(double tx_x, double tx_y) {
        std::vector<Anchor> anchors;
        for (const auto& [mid, pos] : topo_.positions) {
            if (!mid.is_meter()) continue;
            double d = euclid(tx_x, tx_y, pos.x, pos.y);
            if (d > kMinDistance && d <= cfg_.radio_range_m)
                anchors.push_back({pos.x, pos.y, mid});
        }
        if (anchors.size() < 3) return std::nullopt;
        auto meas = simulate_rss(tx_x, tx_y, cfg_.rss, anchors, noise_rng_);
        PsoConfig pso;
        pso.swarm_size = cfg_.pso_swarm;
        pso.max_iters = cfg_.pso_iters;
        RngStream frame_rng = pso_rng_.derive(localization_count_++);
        ThetaEstimate est = localize(meas, anchors, cfg_.rss, pso, frame_rng);
        return std::make_pair(est.x, est.y);
    }

    void emit_alert(MeterId verifier, MeterId claimed, uint8_t reason, double score,
                    std::span<const double> feature) {
        auto payload = encode_alert_payload(reason, claimed, score, feature);
        auto frame = make_frame(MsgType::Alert, verifier, 0, 0, 0, payload);
        send_toward(verifier, kControlCenter, frame);
    }

    // --- concentrator -----------------------------------------------------------

    void forward_from_concentrator(const Frame& f, const Event&) {
        MeterId dest = transit_destination(f.header.msg_type);
        if (dest == kConcentrator) return;
        auto bytes = encode_frame(f.header, f.payload);
        // PUBLIC_KEY / approvals flow back into the mesh toward their meter
        if (f.header.msg_type == MsgType::PublicKey ||
            f.header.msg_type == MsgType::AttachApproval) {
            send_toward(kConcentrator, MeterId{meter_dest_of(f)}, bytes);
        } else {
            send_toward(kConcentrator, dest, bytes);
        }
    }

    static uint32_t meter_dest_of(const Frame& f) {
        // replies carry the target meter in the first payload word
        if (f.payload.size() >= 4)
            return (uint32_t(f.payload[0]) << 24) | (uint32_t(f.payload[1]) << 16) |
                   (uint32_t(f.payload[2]) << 8) | f.payload[3];
        return 0;
    }

    // --- master server (Step 1) ---------------------------------------------------

    void master_handle(const Frame& f) {
        if (f.header.msg_type != MsgType::KeyRequest) {
            if (f.header.msg_type == MsgType::PublicKey ||
                f.header.msg_type == MsgType::AttachApproval)
                return;  // not addressed here
            return;
        }
        MeterId meter = f.header.sender;
        if (!meters_.count(meter)) {
            emit_alert(kMasterServer, meter, kAlertUnregisteredMeter, 0.0, {});
            return;
        }
        KeyPair kp = keygen(cfg_.key_bits, crypto_rng_);

        auto key_payload = [meter](const std::string& text) {
            std::vector<uint8_t> p{static_cast<uint8_t>(meter.id >> 24),
                                   static_cast<uint8_t>(meter.id >> 16),
                                   static_cast<uint8_t>(meter.id >> 8),
                                   static_cast<uint8_t>(meter.id)};
            p.insert(p.end(), text.begin(), text.end());
            return p;
        };
        auto pub = key_payload(serialize_public_key(kp.pub));
        auto pub_frame = make_frame(MsgType::PublicKey, kMasterServer, f.header.session, 0, 0, pub);
        send_toward(kMasterServer, meter, pub_frame);

        auto sec = key_payload(serialize_secret_key(kp.sec));
        auto aux_frame =
            make_frame(MsgType::PrivateKeyDist, kMasterServer, f.header.session, 0, 0, sec);
        send_toward(kMasterServer, kAuxServer, aux_frame);
        auto cc_frame =
            make_frame(MsgType::PrivateKeyDist, kMasterServer, f.header.session, 0, 0, sec);
        send_toward(kMasterServer, kControlCenter, cc_frame);
    }

    // --- auxiliary server (Step 2, sequence path) -----------------------------------

    void aux_handle(const Frame& f) {
        switch (f.header.msg_type) {
            case MsgType::PrivateKeyDist: {
                MeterId meter{meter_dest_of(f)};
                aux_keys_[{meter, f.header.session}] = parse_secret_key(
                    std::string(f.payload.begin() + 4, f.payload.end()));
                auto pending = aux_pending_.find({meter, f.header.session});
                if (pending != aux_pending_.end()) {
                    auto cipher = pending->second;
                    aux_pending_.erase(pending);
                    aux_process_sequence(meter, f.header.session, cipher);
                }
                break;
            }
            case MsgType::SequenceCipher: {
                MeterId meter = f.header.sender;
                auto key = aux_keys_.find({meter, f.header.session});
                if (key == aux_keys_.end()) {
                    aux_pending_[{meter, f.header.session}] = f.payload;
                    return;
                }
                aux_process_sequence(meter, f.header.session, f.payload);
                break;
            }
            default: break;
        }
    }

    void aux_process_sequence(MeterId meter, uint32_t session,
                              const std::vector<uint8_t>& cipher_bytes) {
        const SecretKey& sk = aux_keys_.at({meter, session});
        std::optional<RandomSequence> seq;
        try {
            CipherBlob blob = cipher_from_bytes(cipher_bytes);
            auto plain = decrypt(sk, blob);
            seq = RandomSequence::from_bytes(plain);
        } catch (const std::exception&) {
            seq.reset();
        }
        if (!seq || seq->n() != cfg_.block_count) {
            // decryption yielded garbage: tamper signal
            emit_alert(kAuxServer, meter, kAlertSequenceTamper, 0.0, {});
            return;
        }
        std::vector<uint8_t> payload{static_cast<uint8_t>(meter.id >> 24),
                                     static_cast<uint8_t>(meter.id >> 16),
                                     static_cast<uint8_t>(meter.id >> 8),
                                     static_cast<uint8_t>(meter.id)};
        auto seq_bytes = seq->to_bytes();
        payload.insert(payload.end(), seq_bytes.begin(), seq_bytes.end());
        auto frame = make_frame(MsgType::SequenceForward, kAuxServer, session, 0, 0, payload);
        send_toward(kAuxServer, kControlCenter, frame);
    }

    // --- control center (Step 5) ------------------------------------------------------

    void cc_handle(const Frame& f) {
        switch (f.header.msg_type) {
            case MsgType::PrivateKeyDist: {
                MeterId meter{meter_dest_of(f)};
                auto& buf = cc_sessions_[{meter, f.header.session}];
                buf.sk = parse_secret_key(std::string(f.payload.begin() + 4, f.payload.end()));
                cc_try_complete(meter, f.header.session);
                break;
            }
            case MsgType::SequenceForward: {
                MeterId meter{meter_dest_of(f)};
                auto& buf = cc_sessions_[{meter, f.header.session}];
                try {
                    buf.sequence = RandomSequence::from_bytes(
                        std::span(f.payload).subspan(4));
                } catch (const SequencerError&) {
                    emit_cc_alert(meter, kAlertSequenceTamper, 0.0);
                    return;
                }
                cc_try_complete(meter, f.header.session);
                break;
            }
            case MsgType::DataBlock: {
                MeterId meter = f.header.sender;
                if (cc_quarantined_.count(meter)) {
                    ++result_.metrics.quarantine_drops;
                    return;
                }
                auto& buf = cc_sessions_[{meter, f.header.session}];
                if (buf.resolved) return;
                buf.total_blocks = f.header.total_blocks;
                buf.frames.emplace(f.header.seq_index, f.payload);  // duplicates ignored
                if (!buf.timeout_scheduled) {
                    buf.timeout_scheduled = true;
                    Event ev;
                    ev.tick = now_ + static_cast<Tick>(cfg_.session_timeout_s * kTicksPerSecond);
                    ev.kind = EventKind::SessionTimeout;
                    ev.to = meter;
                    ev.session = f.header.session;
                    push_event(std::move(ev));
                }
                cc_try_complete(meter, f.header.session);
                break;
            }
            case MsgType::Alert: {
                ++result_.metrics.alerts;
                try {
                    AlertPayload p = decode_alert_payload(f.payload);
                    const char* reason = p.reason_code == kAlertOcsvmOutlier ? "ocsvm-outlier"
                                         : p.reason_code == kAlertUnregisteredMeter
                                             ? "unregistered-meter"
                                             : "sequence-tamper";
                    result_.alerts.push_back({now_, f.header.sender, p.claimed, p.score, reason});
                    cc_note_alert(p.claimed);
                } catch (const WireError&) {
                }
                break;
            }
            case MsgType::AttachRequest: {
                // approve registered meters back toward the requester; the
                // approval payload leads with the requester id for routing
                MeterId subject{meter_dest_of(f)};
                if (meters_.count(subject)) {
                    MeterId requester = f.header.sender;
                    std::vector<uint8_t> payload{static_cast<uint8_t>(requester.id >> 24),
                                                 static_cast<uint8_t>(requester.id >> 16),
                                                 static_cast<uint8_t>(requester.id >> 8),
                                                 static_cast<uint8_t>(requester.id)};
                    payload.insert(payload.end(), f.payload.begin(), f.payload.end());
                    auto frame =
                        make_frame(MsgType::AttachApproval, kControlCenter, 0, 0, 0, payload);
                    send_toward(kControlCenter, requester, frame);
                } else {
                    emit_cc_alert(subject, kAlertUnregisteredMeter, 0.0);
                }
                break;
            }
            default: break;
        }
    }

    void emit_cc_alert(MeterId claimed, uint8_t reason, double score) {
        ++result_.metrics.alerts;
        const char* name = reason == kAlertUnregisteredMeter ? "unregistered-meter"
                                                             : "sequence-tamper";
        result_.alerts.push_back({now_, kControlCenter, claimed, score, name});
        cc_note_alert(claimed);
    }

    void cc_note_alert(MeterId claimed) {
        if (cfg_.quarantine_alerts <= 0) return;
        auto& times = cc_alert_times_[claimed];
        times.push_back(now_);
        Tick window = static_cast<Tick>(cfg_.quarantine_window_s * kTicksPerSecond);
        while (!times.empty() && times.front() + window < now_) times.erase(times.begin());
        if (static_cast<int>(times.size()) >= cfg_.quarantine_alerts)
            cc_quarantined_.insert(claimed);
    }

    void cc_try_complete(MeterId meter, uint32_t session) {
        auto it = cc_sessions_.find({meter, session});
        if (it == cc_sessions_.end()) return;
        CcSessionBuf& buf = it->second;
        if (buf.resolved || !buf.sk || !buf.sequence || buf.total_blocks == 0) return;
        if (buf.frames.size() < buf.total_blocks) return;

        buf.resolved = true;
        bool match = false;
        try {
            auto plain = reassemble_session(buf.frames, buf.total_blocks, *buf.sequence,
                                            *buf.sk);
            auto orig = originals_.find({meter, session});
            match = orig != originals_.end() && orig->second == plain;
        } catch (const std::exception&) {
            match = false;
        }
        ++result_.metrics.sessions_completed;
        if (match) ++result_.metrics.payload_matches;
        result_.outcomes.push_back({meter, session, true, match, now_});
    }

    void session_timeout(MeterId meter, uint32_t session) {
        auto it = cc_sessions_.find({meter, session});
        if (it == cc_sessions_.end()) return;
        if (it->second.resolved) return;
        it->second.resolved = true;
        if (!originals_.count({meter, session})) return;  // spoofed session id
        ++result_.metrics.sessions_failed;
        result_.outcomes.push_back({meter, session, false, false, now_});
    }

    void finalize_sessions() {
        for (auto& [key, buf] : cc_sessions_) {
            if (buf.resolved) continue;
            buf.resolved = true;
            if (!originals_.count(key)) continue;  // spoofed session id
            ++result_.metrics.sessions_failed;
            result_.outcomes.push_back({key.first, key.second, false, false, now_});
        }
        // sessions the control center never heard of (handshake lost en route)
        long resolved = result_.metrics.sessions_completed + result_.metrics.sessions_failed;
        if (result_.metrics.sessions_initiated > resolved)
            result_.metrics.sessions_failed += result_.metrics.sessions_initiated - resolved;
    }

    // --- adversaries ------------------------------------------------------------------

    void rogue_emit(int index) {
        const AdversarySpec& adv = cfg_.adversaries[index];
        int& sent = rogue_sent_[index];
        if (sent >= adv.frames) return;
        ++sent;

        // frame enters the mesh at the victim's usual next hop
        MeterId victim = adv.spoof_of;
        auto hop_it = topo_.next_hop.find(victim);
        if (hop_it == topo_.next_hop.end()) return;
        auto hop = hop_it->second.find(kControlCenter);
        if (hop == hop_it->second.end()) return;

        PacketHeader h;
        h.msg_type = MsgType::DataBlock;
        h.sender = victim;
        h.session = 0xAD000000u + static_cast<uint32_t>(index);
        h.total_blocks = cfg_.block_count;
        h.seq_index = static_cast<uint16_t>((sent - 1) % cfg_.block_count);
        h.send_time = now_;
        std::vector<uint8_t> payload(adv.size_bytes);
        adversary_rng_.fill_bytes(payload);
        auto frame = encode_frame(h, payload);

        MeterId rogue_id{0xAD00u + static_cast<uint32_t>(index)};
        // the rogue's radio must physically reach the hop it targets
        const NodePosition& hp = topo_.positions.at(hop->second);
        if (euclid(adv.x, adv.y, hp.x, hp.y) > cfg_.radio_range_m) return;
        Event ev;
        ev.tick = now_ + std::max<Tick>(1, static_cast<Tick>(cfg_.mesh_delay_ms));
        ev.kind = EventKind::Delivery;
        ev.to = hop->second;
        ev.link_from = victim;  // spoofed link-level identity
        ev.actual_source = rogue_id;
        ev.tx_x = adv.x;
        ev.tx_y = adv.y;
        ev.frame = frame;
        push_event(std::move(ev));

        Event next;
        next.tick = now_ + jittered_ticks(adv.rate_s, 0.05, adversary_rng_);
        next.kind = EventKind::RogueEmit;
        next.adversary_index = index;
        push_event(std::move(next));
    }

    // --- state ------------------------------------------------------------------------

    ScenarioConfig cfg_;
    Topology topo_;
    RngStream crypto_rng_, seq_rng_, noise_rng_, pso_rng_, data_rng_, control_rng_,
        loss_rng_, adversary_rng_;

    std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
    uint64_t event_seq_ = 0;
    Tick now_ = 0;
    uint64_t localization_count_ = 0;

    std::map<MeterId, MeterState> meters_;
    std::map<std::pair<MeterId, uint32_t>, SecretKey> aux_keys_;
    std::map<std::pair<MeterId, uint32_t>, std::vector<uint8_t>> aux_pending_;
    std::map<std::pair<MeterId, uint32_t>, CcSessionBuf> cc_sessions_;
    std::map<std::pair<MeterId, uint32_t>, std::vector<uint8_t>> originals_;
    std::map<MeterId, std::vector<Tick>> cc_alert_times_;
    std::set<MeterId> cc_quarantined_;
    std::map<int, int> rogue_sent_;

    SimResult result_;
};

inline SimResult run_scenario(const ScenarioConfig& cfg) {
    Simulator sim(cfg);
    return sim.run();
}

}  // namespace amisec
