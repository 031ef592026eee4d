#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "amisec/crypto/biguint.hpp"
#include "amisec/crypto/rsa.hpp"

using namespace amisec;

TEST_CASE("biguint arithmetic against frozen vectors") {
    // Reference values computed with an independent bignum implementation.
    BigUint a = BigUint::from_hex(
        "a3b8c1e9392456de3eb13b9046685257bdd640fb06671ad11c80317fa3b1799d");
    BigUint b = BigUint::from_hex("8b9d2434e465e150bd9c66b3ad3c2d6d1a3d1fa7bc8960a9");

    CHECK(a.add(b).to_hex() ==
          "a3b8c1e9392456deca4e5fc52ace33a87b72a7aeb3a3483e36bd5127603ada46");
    CHECK(a.sub(b).to_hex() ==
          "a3b8c1e9392456ddb314175b620271070039da47592aed64024311d7e72818f4");
    CHECK(a.mul(b).to_hex() ==
          "5949d0c05cecaa8de7457e3b66dac5ef3990a28b3b7521ba0af299861bdfad1d3bab2d54a9"
          "60b451cb1e341a2d5bab434f9ed259fec928a5");
    auto dm = a.divmod(b);
    CHECK(dm.quotient.to_hex() == "12c34748c9ac2d642");
    CHECK(dm.remainder.to_hex() == "2e05b60eecf7ac811ce2dbd8f5aaef0d527edbf94767480b");

    BigUint m = BigUint::from_hex("8822e8f36c031199972a846916419f83");
    CHECK(BigUint::modexp(a, BigUint(65537), m).to_hex() ==
          "7f1d0ad18e3d3ef5a43dae583fc98ff1");
    CHECK(a.to_decimal() ==
          "74053432503721897804254465035439396526862630269510585382086169539087472621981");
}

TEST_CASE("biguint divmod identity on random operands") {
    RngStream r(3, StreamId::Test);
    for (int i = 0; i < 300; ++i) {
        size_t abits = 1 + r.uniform_int(512);
        size_t bbits = 1 + r.uniform_int(300);
        BigUint a = BigUint::random_bits(r, abits);
        BigUint b = BigUint::random_bits(r, bbits);
        if (b.is_zero()) b = BigUint(1);
        auto dm = a.divmod(b);
        CHECK(dm.quotient.mul(b).add(dm.remainder) == a);
        CHECK(dm.remainder < b);
    }
}

TEST_CASE("biguint small edge cases") {
    CHECK(BigUint().to_hex() == "0");
    CHECK(BigUint().to_decimal() == "0");
    CHECK(BigUint(255).to_hex() == "ff");
    CHECK(BigUint::pow2(0) == BigUint(1));
    CHECK(BigUint::pow2(64).to_hex() == "10000000000000000");
    CHECK(BigUint::from_bytes_be(std::vector<uint8_t>{0x01, 0x00}) == BigUint(256));
    CHECK(BigUint(0x1234).to_bytes_be(4) == std::vector<uint8_t>{0, 0, 0x12, 0x34});
    CHECK_THROWS_AS(BigUint(1).divmod(BigUint(0)), std::domain_error);
    CHECK_THROWS_AS(BigUint(1).sub(BigUint(2)), std::underflow_error);
}

TEST_CASE("modinv reproduces the hand-computed toy key") {
    // p=61, q=53, e=17: lcm(60, 52) = 780 and 17*413 = 9*780 + 1.
    BigUint lambda = BigUint::lcm(BigUint(60), BigUint(52));
    CHECK(lambda == BigUint(780));
    CHECK(BigUint::modinv(BigUint(17), lambda) == BigUint(413));
    CHECK(BigUint(61).mul(BigUint(53)) == BigUint(3233));
    CHECK_THROWS_AS(BigUint::modinv(BigUint(2), BigUint(780)), std::domain_error);
}

TEST_CASE("toy modulus encrypts a known chunk") {
    // 2^17 mod 3233, checked by hand before this test was written.
    CHECK(BigUint::modexp(BigUint(2), BigUint(17), BigUint(3233)) == BigUint(1752));
}

TEST_CASE("keygen is deterministic per seed") {
    RngStream r1(7, StreamId::Crypto), r2(7, StreamId::Crypto);
    KeyPair k1 = keygen(64, r1);
    KeyPair k2 = keygen(64, r2);
    CHECK(k1.pub.n == k2.pub.n);
    CHECK(k1.pub.e == k2.pub.e);
    CHECK(k1.sec.d == k2.sec.d);

    RngStream r3(8, StreamId::Crypto);
    KeyPair k3 = keygen(64, r3);
    CHECK(k3.pub.n != k1.pub.n);
}

TEST_CASE("keygen validates arguments") {
    RngStream r(1, StreamId::Crypto);
    CHECK_THROWS_AS(keygen(32, r), std::invalid_argument);
    CHECK_THROWS_AS(keygen(65, r), std::invalid_argument);
}

TEST_CASE("encrypt/decrypt round-trips 100 random messages") {
    RngStream kr(21, StreamId::Crypto);
    KeyPair kp = keygen(128, kr);
    RngStream mr(22, StreamId::Test);
    for (int i = 0; i < 100; ++i) {
        size_t len = 1 + mr.uniform_int(200);
        std::vector<uint8_t> m(len);
        mr.fill_bytes(m);
        CipherBlob c = encrypt(kp.pub, m);
        CHECK(decrypt(kp.sec, c) == m);
    }
}

TEST_CASE("decrypt round-trip holds for messages up to 4 KiB") {
    RngStream kr(31, StreamId::Crypto);
    KeyPair kp = keygen(256, kr);
    RngStream mr(32, StreamId::Test);
    for (int i = 0; i < 50; ++i) {
        size_t len = 1 + mr.uniform_int(4096);
        std::vector<uint8_t> m(len);
        mr.fill_bytes(m);
        CHECK(decrypt(kp.sec, encrypt(kp.pub, m)) == m);
    }
}

TEST_CASE("ciphertext differs from plaintext for non-degenerate chunks") {
    RngStream kr(41, StreamId::Crypto);
    KeyPair kp = keygen(256, kr);
    RngStream mr(42, StreamId::Test);
    const size_t cw = plain_chunk_bytes(256);
    for (int i = 0; i < 200; ++i) {
        std::vector<uint8_t> m(cw);
        mr.fill_bytes(m);
        BigUint v = BigUint::from_bytes_be(m);
        if (v <= BigUint(1)) continue;
        CipherBlob c = encrypt(kp.pub, m);
        CHECK(c.chunks[0] != v);
    }
}

TEST_CASE("encrypt rejects empty input; long input spans chunks") {
    RngStream kr(51, StreamId::Crypto);
    KeyPair kp = keygen(256, kr);
    CHECK_THROWS_AS(encrypt(kp.pub, std::vector<uint8_t>{}), std::invalid_argument);

    std::vector<uint8_t> m(32, 0xab);  // 256 bits > one 31-byte chunk
    CipherBlob c = encrypt(kp.pub, m);
    CHECK(c.chunks.size() == 2);
}

TEST_CASE("zero chunk decrypts to zero bytes of recorded length") {
    RngStream kr(61, StreamId::Crypto);
    KeyPair kp = keygen(64, kr);
    CipherBlob c;
    c.chunks.push_back(BigUint());
    c.plain_len = 3;
    CHECK(decrypt(kp.sec, c) == std::vector<uint8_t>{0, 0, 0});
}

TEST_CASE("tampered chunk at or above modulus is rejected") {
    RngStream kr(71, StreamId::Crypto);
    KeyPair kp = keygen(64, kr);
    CipherBlob c = encrypt(kp.pub, std::vector<uint8_t>{0x42});
    c.chunks[0] = kp.pub.n.add(BigUint(5));
    CHECK_THROWS_AS(decrypt(kp.sec, c), CorruptCiphertext);
}

TEST_CASE("determinism: equal seeds give equal ciphertexts") {
    std::vector<uint8_t> m{1, 2, 3, 4};
    RngStream a(5, StreamId::Crypto), b(5, StreamId::Crypto);
    KeyPair ka = keygen(64, a), kb = keygen(64, b);
    CHECK(encrypt(ka.pub, m) == encrypt(kb.pub, m));
}

TEST_CASE("key text serialization round-trips") {
    RngStream kr(81, StreamId::Crypto);
    KeyPair kp = keygen(128, kr);
    PublicKey pk = parse_public_key(serialize_public_key(kp.pub));
    SecretKey sk = parse_secret_key(serialize_secret_key(kp.sec));
    CHECK(pk.n == kp.pub.n);
    CHECK(pk.e == kp.pub.e);
    CHECK(sk.d == kp.sec.d);
    std::vector<uint8_t> m{9, 9, 9};
    CHECK(decrypt(sk, encrypt(pk, m)) == m);
    CHECK_THROWS_AS(parse_public_key("n=ff"), CryptoError);
}

TEST_CASE("cipher blob byte form is self-delimiting") {
    RngStream kr(91, StreamId::Crypto);
    KeyPair kp = keygen(128, kr);
    std::vector<uint8_t> m{10, 20, 30, 40, 50};
    CipherBlob c = encrypt(kp.pub, m);
    auto bytes = cipher_to_bytes(c, kp.bits);
    // Trailing junk must not confuse the parser.
    bytes.push_back(0);
    bytes.push_back(0);
    CipherBlob back = cipher_from_bytes(bytes);
    CHECK(back == c);
    CHECK(decrypt(kp.sec, back) == m);
    CHECK_THROWS_AS(cipher_from_bytes(std::vector<uint8_t>{1, 2}), CorruptCiphertext);
}
