#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "amisec/core/rng.hpp"
#include "amisec/core/wire.hpp"

#include <cmath>
#include <set>

using namespace amisec;

TEST_CASE("rng determinism and stream independence") {
    RngStream a(7, StreamId::Noise), b(7, StreamId::Noise);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    RngStream c(7, StreamId::Pso);
    RngStream d(7, StreamId::Noise);
    int differ = 0;
    for (int i = 0; i < 16; ++i)
        if (c.next_u64() != d.next_u64()) ++differ;
    CHECK(differ > 0);
}

TEST_CASE("rng uniform_int is unbiased enough and in range") {
    RngStream r(11, StreamId::Test);
    std::array<int, 7> counts{};
    const int n = 70000;
    for (int i = 0; i < n; ++i) counts[r.uniform_int(7)]++;
    for (int c : counts) {
        CHECK(c > 9000);
        CHECK(c < 11000);
    }
}

TEST_CASE("rng gauss moments") {
    RngStream r(13, StreamId::Test);
    double sum = 0, sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double v = r.gauss();
        sum += v;
        sq += v * v;
    }
    double mean = sum / n;
    double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("rng derived streams are reproducible") {
    RngStream base(5, StreamId::SimControl);
    RngStream t1 = base.derive(3);
    RngStream t2 = RngStream(5, StreamId::SimControl).derive(3);
    for (int i = 0; i < 10; ++i) CHECK(t1.next_u64() == t2.next_u64());
}

TEST_CASE("header encodes to the fixed layout") {
    PacketHeader h;
    h.version = 1;
    h.msg_type = MsgType::DataBlock;
    h.sender = MeterId{10};
    h.session = 1;
    h.seq_index = 0;
    h.total_blocks = 32;
    h.payload_len = 8;
    h.send_time = 0;
    auto b = encode_header(h);
    CHECK(b.size() == kHeaderSize);
    CHECK(b[0] == 0x01);
    CHECK(b[1] == 0x05);
    CHECK(b[2] == 0x00);
    CHECK(b[3] == 0x00);
    CHECK(b[4] == 0x00);
    CHECK(b[5] == 0x0a);
    CHECK(decode_header(b) == h);
}

TEST_CASE("header decode rejects unknown msg_type and short buffers") {
    PacketHeader h;
    h.msg_type = MsgType::Alert;
    h.sender = MeterId{12};
    auto b = encode_header(h);
    b[1] = 0xff;
    CHECK_THROWS_AS(decode_header(b), MalformedPacketError);

    auto short_buf = encode_header(h);
    short_buf.pop_back();
    CHECK_THROWS_AS(decode_header(std::span<const uint8_t>(short_buf.data(), 20)),
                    TruncationError);
}

TEST_CASE("header encode validates DATA_BLOCK index invariant") {
    PacketHeader h;
    h.msg_type = MsgType::DataBlock;
    h.seq_index = 4;
    h.total_blocks = 4;
    CHECK_THROWS_AS(encode_header(h), EncodeError);
}

TEST_CASE("header fuzz corpus round-trips byte-exactly") {
    RngStream r(99, StreamId::Test);
    for (int i = 0; i < 1000; ++i) {
        PacketHeader h;
        h.version = static_cast<uint8_t>(r.uniform_int(4) + 1);
        h.msg_type = static_cast<MsgType>(r.uniform_int(kMaxMsgType + 1));
        h.sender = MeterId{r.next_u32()};
        h.session = r.next_u32();
        h.total_blocks = static_cast<uint16_t>(r.uniform_int(0xffff) + 1);
        h.seq_index = static_cast<uint16_t>(r.uniform_int(h.total_blocks));
        h.payload_len = static_cast<uint16_t>(r.uniform_int(0x10000));
        h.send_time = r.next_u64();
        auto bytes = encode_header(h);
        PacketHeader back = decode_header(bytes);
        CHECK(back == h);
        CHECK(encode_header(back) == bytes);
    }
}

TEST_CASE("frame round-trip and payload length consistency") {
    PacketHeader h;
    h.msg_type = MsgType::SequenceForward;
    h.sender = MeterId{14};
    std::vector<uint8_t> payload{1, 2, 3, 4, 5};
    auto bytes = encode_frame(h, payload);
    Frame f = decode_frame(bytes);
    CHECK(f.header.payload_len == 5);
    CHECK(f.payload == payload);

    bytes.pop_back();
    CHECK_THROWS_AS(decode_frame(bytes), TruncationError);
}

TEST_CASE("hex and trace lines") {
    std::vector<uint8_t> b{0x00, 0xff, 0x10, 0xab};
    CHECK(hex_encode(b) == "00ff10ab");
    CHECK(hex_decode("00ff10ab") == b);
    CHECK(trace_line(42, b) == "42 00ff10ab");
    CHECK_THROWS_AS(hex_decode("0q"), MalformedPacketError);
}
