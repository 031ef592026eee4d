#pragma once

#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "amisec/core/wire.hpp"
#include "amisec/ocsvm/ocsvm.hpp"
#include "amisec/ocsvm/standardize.hpp"

namespace amisec {

struct VerificationUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One observed transmission from a claimed sender, as seen by a verifying
// meter: estimated physical position, gap since the previous transmission,
// and frame size.
struct TransmissionRecord {
    MeterId sender;
    double x = 0.0;              // estimated position, m
    double y = 0.0;
    double inter_arrival = 0.0;  // seconds since previous record; invalid when first
    bool first = false;
    double packet_size = 0.0;    // bytes
    Tick tick = 0;
};

struct AuthConfig {
    double nu = 0.1;
    double kernel_sigma = 0.0;        // 0 = median heuristic at training time
    double kernel_sigma_mult = 8.0;   // widens the median width; tighter kernels
                                      // overfit the bootstrap sample and push the
                                      // fresh-traffic reject rate past nu
    size_t min_records = 20;          // below this the bootstrap window extends
    size_t target_records = 100;      // transmissions that end the bootstrap window
    Tick max_window = 7ull * 24 * 3600 * kTicksPerSecond;  // or 7 simulated days
    size_t low_confidence_below = 50; // trained but flagged
    TrainOptions train_options{};
};

struct TrainedAuthModel {
    Standardizer stats;
    OcsvmModel model;
    bool low_confidence = false;
    size_t training_exclusions = 0;  // training records the model itself rejects
};

// Per-sender record history plus the model trained at the end of bootstrap.
struct NeighborHistory {
    MeterId sender;
    std::vector<TransmissionRecord> records;
    Tick bootstrap_start = 0;
    bool bootstrap_extended = false;
    std::optional<TrainedAuthModel> model;

    bool bootstrapped() const { return model.has_value(); }
};

// The raw 4-feature vector. Node identity is not a numeric feature: it
// selects which per-sender model judges the record.
inline std::vector<double> raw_features(const TransmissionRecord& r) {
    if (r.first)
        throw std::invalid_argument("raw_features: first record carries no inter-arrival");
    return {r.x, r.y, r.inter_arrival, r.packet_size};
}

inline std::vector<double> extract_features(const TrainedAuthModel& m,
                                            const TransmissionRecord& r) {
    return m.stats.transform(raw_features(r));
}

// Appends a record, tracking first-contact flags. Feature-bearing records
// are everything after the sender's first.
inline void record_transmission(NeighborHistory& h, TransmissionRecord r) {
    if (h.records.empty()) {
        r.first = true;
        h.bootstrap_start = r.tick;
    }
    if (!h.records.empty() && h.records.back().tick > r.tick)
        throw std::invalid_argument("record_transmission: records must be time-ordered");
    h.records.push_back(std::move(r));
}

inline bool bootstrap_window_elapsed(const NeighborHistory& h, const AuthConfig& cfg,
                                     Tick now) {
    if (h.records.empty()) return false;
    size_t usable = h.records.size() > 0 ? h.records.size() - 1 : 0;  // first has no feature
    return usable >= cfg.target_records || now - h.bootstrap_start >= cfg.max_window;
}

// Trains the per-sender model from every feature-bearing record in the
// window. Too few records flags the history as bootstrap-extended instead.
inline bool bootstrap(NeighborHistory& h, const AuthConfig& cfg) {
    std::vector<std::vector<double>> feats;
    for (const auto& r : h.records) {
        if (!r.first) feats.push_back(raw_features(r));
    }
    if (feats.size() < cfg.min_records) {
        h.bootstrap_extended = true;
        return false;
    }
    TrainedAuthModel tm;
    tm.stats.fit(feats);
    auto standardized = tm.stats.transform_all(feats);
    Kernel k = Kernel::rbf(cfg.kernel_sigma > 0.0
                               ? cfg.kernel_sigma
                               : cfg.kernel_sigma_mult * median_sq_distance(standardized));
    tm.model = train(standardized, cfg.nu, k, cfg.train_options);
    for (const auto& f : standardized)
        if (decide(tm.model, f).label == -1) ++tm.training_exclusions;
    tm.low_confidence = feats.size() < cfg.low_confidence_below;
    h.bootstrap_extended = false;
    h.model = std::move(tm);
    return true;
}

struct AuthDecision {
    enum class Verdict { Forward, CeaseAndReport };
    Verdict verdict = Verdict::Forward;
    double score = 0.0;
    std::string reason;
    std::vector<double> feature;  // standardized; populated on CeaseAndReport

    bool forward() const { return verdict == Verdict::Forward; }
};

// Runs the per-sender model on one record. Accepted records join the
// history; the model is never retrained online (an adversary must not be
// able to drift it).
inline AuthDecision verify(NeighborHistory& h, const TransmissionRecord& r) {
    if (!h.model)
        throw VerificationUnavailable("verify: sender has no trained model yet");
    std::vector<double> f = extract_features(*h.model, r);
    Decision d = decide(h.model->model, f);
    AuthDecision out;
    out.score = d.score;
    if (d.label == +1) {
        out.verdict = AuthDecision::Verdict::Forward;
        record_transmission(h, r);
    } else {
        out.verdict = AuthDecision::Verdict::CeaseAndReport;
        out.reason = "ocsvm-outlier";
        out.feature = std::move(f);
    }
    return out;
}

// ALERT payload: reason code, claimed sender, score, then the standardized
// feature vector of the offending record.
inline std::vector<uint8_t> encode_alert_payload(uint8_t reason_code, MeterId claimed,
                                                 double score,
                                                 std::span<const double> feature) {
    std::vector<uint8_t> out;
    out.push_back(reason_code);
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<uint8_t>(claimed.id >> (8 * i)));
    auto put_double = [&out](double v) {
        uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        __builtin_memcpy(&bits, &v, sizeof(bits));
        for (int i = 7; i >= 0; --i) out.push_back(static_cast<uint8_t>(bits >> (8 * i)));
    };
    put_double(score);
    out.push_back(static_cast<uint8_t>(feature.size() >> 8));
    out.push_back(static_cast<uint8_t>(feature.size()));
    for (double v : feature) put_double(v);
    return out;
}

struct AlertPayload {
    uint8_t reason_code = 0;
    MeterId claimed;
    double score = 0.0;
    std::vector<double> feature;
};

inline AlertPayload decode_alert_payload(std::span<const uint8_t> b) {
    if (b.size() < 15) throw MalformedPacketError("alert payload too short");
    AlertPayload p;
    p.reason_code = b[0];
    uint32_t id = 0;
    for (size_t i = 1; i < 5; ++i) id = (id << 8) | b[i];
    p.claimed = MeterId{id};
    auto get_double = [&b](size_t off) {
        uint64_t bits = 0;
        for (size_t i = 0; i < 8; ++i) bits = (bits << 8) | b[off + i];
        double v;
        __builtin_memcpy(&v, &bits, sizeof(v));
        return v;
    };
    p.score = get_double(5);
    size_t dim = (size_t(b[13]) << 8) | b[14];
    if (b.size() < 15 + 8 * dim) throw MalformedPacketError("alert payload truncated");
    for (size_t i = 0; i < dim; ++i) p.feature.push_back(get_double(15 + 8 * i));
    return p;
}

// Alert reason codes carried on the wire.
inline constexpr uint8_t kAlertOcsvmOutlier = 1;
inline constexpr uint8_t kAlertUnregisteredMeter = 2;
inline constexpr uint8_t kAlertSequenceTamper = 3;

}  // namespace amisec
