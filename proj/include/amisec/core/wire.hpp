#pragma once

#include <compare>
#include <cstdint>
#include <cstddef>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace amisec {

// Node identifier. 0 is the control center, 1 the master server, 2 the
// auxiliary server, 3 the data concentrator; meters start at 10.
struct MeterId {
    uint32_t id = 0;

    constexpr MeterId() = default;
    constexpr explicit MeterId(uint32_t v) : id(v) {}
    constexpr auto operator<=>(const MeterId&) const = default;
    constexpr bool is_meter() const { return id >= 10; }
};

inline constexpr MeterId kControlCenter{0};
inline constexpr MeterId kMasterServer{1};
inline constexpr MeterId kAuxServer{2};
inline constexpr MeterId kConcentrator{3};
inline constexpr uint32_t kFirstMeterId = 10;

using Tick = uint64_t;

// Simulation clock resolution: one tick is a millisecond.
inline constexpr Tick kTicksPerSecond = 1000;

enum class MsgType : uint8_t {
    KeyRequest     = 0,
    PublicKey      = 1,
    PrivateKeyDist = 2,
    SequenceCipher = 3,
    SequenceForward = 4,
    DataBlock      = 5,
    AttachRequest  = 6,
    AttachApproval = 7,
    Alert          = 8,
};

inline constexpr uint8_t kMaxMsgType = 8;

inline const char* msg_type_name(MsgType t) {
    switch (t) {
        case MsgType::KeyRequest: return "KEY_REQUEST";
        case MsgType::PublicKey: return "PUBLIC_KEY";
        case MsgType::PrivateKeyDist: return "PRIVATE_KEY_DIST";
        case MsgType::SequenceCipher: return "SEQUENCE_CIPHER";
        case MsgType::SequenceForward: return "SEQUENCE_FORWARD";
        case MsgType::DataBlock: return "DATA_BLOCK";
        case MsgType::AttachRequest: return "ATTACH_REQUEST";
        case MsgType::AttachApproval: return "ATTACH_APPROVAL";
        case MsgType::Alert: return "ALERT";
    }
    return "UNKNOWN";
}

struct WireError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EncodeError : WireError {
    using WireError::WireError;
};
struct TruncationError : WireError {
    using WireError::WireError;
};
struct MalformedPacketError : WireError {
    using WireError::WireError;
};

// Fixed-size big-endian header for every simulated frame. Field order is
// authoritative; the layout is the canonical byte format of the simulated
// network ("constant packet size" is testable because framing never varies).
struct PacketHeader {
    uint8_t version = 1;
    MsgType msg_type = MsgType::KeyRequest;
    MeterId sender;
    uint32_t session = 0;
    uint16_t seq_index = 0;
    uint16_t total_blocks = 0;
    uint16_t payload_len = 0;
    Tick send_time = 0;

    bool operator==(const PacketHeader&) const = default;
};

inline constexpr size_t kHeaderSize = 24;

namespace detail {
inline void put_u16(std::vector<uint8_t>& b, uint16_t v) {
    b.push_back(static_cast<uint8_t>(v >> 8));
    b.push_back(static_cast<uint8_t>(v));
}
inline void put_u32(std::vector<uint8_t>& b, uint32_t v) {
    for (int i = 3; i >= 0; --i) b.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
inline void put_u64(std::vector<uint8_t>& b, uint64_t v) {
    for (int i = 7; i >= 0; --i) b.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
inline uint16_t get_u16(std::span<const uint8_t> b, size_t off) {
    return static_cast<uint16_t>((uint16_t(b[off]) << 8) | b[off + 1]);
}
inline uint32_t get_u32(std::span<const uint8_t> b, size_t off) {
    uint32_t v = 0;
    for (size_t i = 0; i < 4; ++i) v = (v << 8) | b[off + i];
    return v;
}
inline uint64_t get_u64(std::span<const uint8_t> b, size_t off) {
    uint64_t v = 0;
    for (size_t i = 0; i < 8; ++i) v = (v << 8) | b[off + i];
    return v;
}
}  // namespace detail

inline std::vector<uint8_t> encode_header(const PacketHeader& h) {
    if (static_cast<uint8_t>(h.msg_type) > kMaxMsgType)
        throw EncodeError("encode_header: msg_type out of range");
    if (h.msg_type == MsgType::DataBlock && h.seq_index >= h.total_blocks)
        throw EncodeError("encode_header: seq_index must be < total_blocks for DATA_BLOCK");
    std::vector<uint8_t> b;
    b.reserve(kHeaderSize);
    b.push_back(h.version);
    b.push_back(static_cast<uint8_t>(h.msg_type));
    detail::put_u32(b, h.sender.id);
    detail::put_u32(b, h.session);
    detail::put_u16(b, h.seq_index);
    detail::put_u16(b, h.total_blocks);
    detail::put_u16(b, h.payload_len);
    detail::put_u64(b, h.send_time);
    return b;
}

inline PacketHeader decode_header(std::span<const uint8_t> b) {
    if (b.size() < kHeaderSize)
        throw TruncationError("decode_header: need " + std::to_string(kHeaderSize) +
                              " bytes, got " + std::to_string(b.size()));
    if (b[1] > kMaxMsgType)
        throw MalformedPacketError("decode_header: unknown msg_type " + std::to_string(b[1]));
    PacketHeader h;
    h.version = b[0];
    h.msg_type = static_cast<MsgType>(b[1]);
    h.sender = MeterId{detail::get_u32(b, 2)};
    h.session = detail::get_u32(b, 6);
    h.seq_index = detail::get_u16(b, 10);
    h.total_blocks = detail::get_u16(b, 12);
    h.payload_len = detail::get_u16(b, 14);
    h.send_time = detail::get_u64(b, 16);
    if (h.msg_type == MsgType::DataBlock && h.seq_index >= h.total_blocks)
        throw MalformedPacketError("decode_header: seq_index >= total_blocks");
    return h;
}

struct Frame {
    PacketHeader header;
    std::vector<uint8_t> payload;

    bool operator==(const Frame&) const = default;
};

inline std::vector<uint8_t> encode_frame(PacketHeader h, std::span<const uint8_t> payload) {
    if (payload.size() > 0xffff)
        throw EncodeError("encode_frame: payload too large");
    h.payload_len = static_cast<uint16_t>(payload.size());
    std::vector<uint8_t> b = encode_header(h);
    b.insert(b.end(), payload.begin(), payload.end());
    return b;
}

inline Frame decode_frame(std::span<const uint8_t> b) {
    Frame f;
    f.header = decode_header(b);
    if (b.size() < kHeaderSize + f.header.payload_len)
        throw TruncationError("decode_frame: payload truncated");
    f.payload.assign(b.begin() + kHeaderSize, b.begin() + kHeaderSize + f.header.payload_len);
    return f;
}

inline std::string hex_encode(std::span<const uint8_t> b) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(b.size() * 2);
    for (uint8_t v : b) {
        s.push_back(digits[v >> 4]);
        s.push_back(digits[v & 0xf]);
    }
    return s;
}

inline std::vector<uint8_t> hex_decode(std::string_view s) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (s.size() % 2 != 0) throw MalformedPacketError("hex_decode: odd length");
    std::vector<uint8_t> out(s.size() / 2);
    for (size_t i = 0; i < out.size(); ++i) {
        int hi = nibble(s[2 * i]), lo = nibble(s[2 * i + 1]);
        if (hi < 0 || lo < 0) throw MalformedPacketError("hex_decode: bad digit");
        out[i] = static_cast<uint8_t>((hi << 4) | lo);
    }
    return out;
}

// Trace file line: delivery tick in decimal, a space, then the raw frame
// hex-encoded.
inline std::string trace_line(Tick tick, std::span<const uint8_t> frame) {
    return std::to_string(tick) + " " + hex_encode(frame);
}

}  // namespace amisec
