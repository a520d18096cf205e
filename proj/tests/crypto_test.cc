/*
 *
 * Copyright 2026 dbpaisa-sim authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#include "dbpaisa/crypto.h"

#include <gtest/gtest.h>

#include <set>
#include <string>

#include "dbpaisa/hex.h"

namespace dbpaisa {
namespace {

Bytes FromString(std::string_view s) { return Bytes(s.begin(), s.end()); }

template <size_t N>
std::array<uint8_t, N> HexArray(std::string_view hex) {
  auto bytes = from_hex(hex);
  std::array<uint8_t, N> out{};
  EXPECT_TRUE(bytes && bytes->size() == N);
  if (bytes) std::copy_n(bytes->begin(), N, out.begin());
  return out;
}

// RFC 6979 appendix A.2.5 (P-256, SHA-256).
constexpr std::string_view kRfcPrivate =
    "c9afa9d845ba75166b5c215767b1d6934e50c3db36e89b127b8a622b120f6721";
constexpr std::string_view kRfcPublicX =
    "60fed4ba255a9d31c961eb74c6356d68c049b8923b61fa6ce669622e60f29fb6";
constexpr std::string_view kRfcPublicY =
    "7903fe1008b8bc99a41ae9e95628bc64f2f1b20c2d7e9f5177a3c294d4462299";

TEST(CryptoTest, Rfc6979SampleVector) {
  PrivateKey key{HexArray<32>(kRfcPrivate)};
  Signature sig = sign(key, FromString("sample"));
  EXPECT_EQ(to_hex(sig.bytes),
            "efd48b2aacb6a8fd1140dd9cd45e81d69d2c877b56aaf991c34d0ea84eaf3716"
            "f7cb1c942d657c41d436c7a1b6e29f65f3e900dbb9aff4064dc4ab2f843acda8");
}

TEST(CryptoTest, Rfc6979TestVector) {
  PrivateKey key{HexArray<32>(kRfcPrivate)};
  Signature sig = sign(key, FromString("test"));
  EXPECT_EQ(to_hex(sig.bytes),
            "f1abb023518351cd71d881567b1ea663ed3efcf6c5132b354f28d3b0b7d38367"
            "019f4113742a2b14bd25926b49c649155f267e60d3814b4c0cc84250e46f0083");
}

TEST(CryptoTest, PublicKeyMatchesRfcVector) {
  PrivateKey key{HexArray<32>(kRfcPrivate)};
  PublicKey pub = public_key_of(key);
  EXPECT_EQ(pub.bytes[0], 0x04);
  EXPECT_EQ(to_hex(std::span(pub.bytes).subspan(1, 32)), kRfcPublicX);
  EXPECT_EQ(to_hex(std::span(pub.bytes).subspan(33, 32)), kRfcPublicY);
}

TEST(CryptoTest, SignVerifyRoundTripAndDeterminism) {
  Rng rng(1);
  SigningKeyPair kp = generate_keypair(rng);
  Bytes msg = random_bytes(50, rng);
  Signature a = sign(kp.private_key, msg);
  Signature b = sign(kp.private_key, msg);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(verify(kp.public_key, msg, a));
}

TEST(CryptoTest, SingleBitMessageMutationsRejected) {
  Rng rng(2);
  SigningKeyPair kp = generate_keypair(rng);
  Bytes msg = random_bytes(114, rng);
  Signature sig = sign(kp.private_key, msg);
  int accepts = 0;
  for (int i = 0; i < 1000; ++i) {
    Bytes mutated = msg;
    size_t bit = rng.Below(mutated.size() * 8);
    mutated[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
    accepts += verify(kp.public_key, mutated, sig);
  }
  EXPECT_EQ(accepts, 0);
}

TEST(CryptoTest, SignatureByteMutationsRejected) {
  Rng rng(3);
  SigningKeyPair kp = generate_keypair(rng);
  Bytes msg = random_bytes(40, rng);
  Signature sig = sign(kp.private_key, msg);
  int accepts = 0;
  for (int i = 0; i < 1000; ++i) {
    Signature mutated = sig;
    size_t pos = rng.Below(kSignatureSize);
    mutated.bytes[pos] ^= static_cast<uint8_t>(1 + rng.Below(255));
    accepts += verify(kp.public_key, msg, mutated);
  }
  EXPECT_EQ(accepts, 0);
}

TEST(CryptoTest, ZeroSignatureRejected) {
  Rng rng(4);
  SigningKeyPair kp = generate_keypair(rng);
  EXPECT_FALSE(verify(kp.public_key, FromString("m"), Signature{}));
}

TEST(CryptoTest, CrossKeyVerificationRejected) {
  Rng rng(5);
  SigningKeyPair a = generate_keypair(rng);
  SigningKeyPair b = generate_keypair(rng);
  Bytes msg = FromString("hello");
  EXPECT_FALSE(verify(b.public_key, msg, sign(a.private_key, msg)));
  EXPECT_FALSE(verify(a.public_key, msg, sign(b.private_key, msg)));
}

TEST(CryptoTest, MalformedPublicKeyRejectsWithoutThrowing) {
  Rng rng(6);
  SigningKeyPair kp = generate_keypair(rng);
  Bytes msg = FromString("x");
  Signature sig = sign(kp.private_key, msg);
  PublicKey bad = kp.public_key;
  bad.bytes[64] ^= 0x01;  // off-curve
  EXPECT_FALSE(verify(bad, msg, sig));
  EXPECT_FALSE(verify(PublicKey{}, msg, sig));
}

TEST(CryptoTest, InvalidScalarIsKeyError) {
  EXPECT_THROW(sign(PrivateKey{}, FromString("m")), KeyError);
  PrivateKey max;
  max.bytes.fill(0xff);
  EXPECT_THROW(public_key_of(max), KeyError);
}

TEST(CryptoTest, Sha256EmptyVector) {
  EXPECT_EQ(to_hex(hash_image({}).bytes),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(to_hex(hash_image(FromString("abc")).bytes),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(CryptoTest, HashDistinguishesTrailingZero) {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    Bytes x = random_bytes(rng.Below(64), rng);
    Bytes y = x;
    y.push_back(0);
    EXPECT_EQ(hash_image(x), hash_image(x));
    EXPECT_NE(hash_image(x), hash_image(y));
  }
}

TEST(CryptoTest, AeadRoundTripAndTamper) {
  Rng rng(8);
  SymmetricKey key{random_array<16>(rng)};
  AeadIv iv = random_array<12>(rng);
  Bytes plaintext = random_bytes(96, rng);
  Bytes aad = FromString("IM-RES");
  Bytes sealed = aead_seal(key, iv, plaintext, aad);
  ASSERT_EQ(sealed.size(), plaintext.size() + kAeadTagSize);
  auto opened = aead_open(key, iv, sealed, aad);
  ASSERT_TRUE(opened);
  EXPECT_EQ(*opened, plaintext);

  int accepts = 0;
  for (int i = 0; i < 500; ++i) {
    Bytes mutated = sealed;
    size_t bit = rng.Below(mutated.size() * 8);
    mutated[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
    accepts += aead_open(key, iv, mutated, aad).has_value();
  }
  EXPECT_EQ(accepts, 0);
  EXPECT_FALSE(aead_open(key, iv, sealed, FromString("IM-REQ")));
}

TEST(CryptoTest, AeadDistinctIvsGiveDistinctCiphertexts) {
  Rng rng(9);
  SymmetricKey key{random_array<16>(rng)};
  Bytes plaintext(96, 0x42);
  Bytes a = aead_seal(key, random_array<12>(rng), plaintext);
  Bytes b = aead_seal(key, random_array<12>(rng), plaintext);
  EXPECT_NE(a, b);
}

// NIST GCM test case 2 (McGrew & Viega): zero key, zero IV, one zero block.
TEST(CryptoTest, AesGcmKnownAnswer) {
  SymmetricKey key{};
  AeadIv iv{};
  Bytes sealed = aead_seal(key, iv, Bytes(16, 0));
  EXPECT_EQ(to_hex(sealed),
            "0388dace60b6a392f328c2b971b2fe78ab6e47d42cec13bdf53a67b21257bddf");
}

TEST(CryptoTest, PrfIsTruncatedHmacSha256) {
  SymmetricKey key{};
  key.bytes.fill(0x0b);
  // HMAC-SHA-256(0x0b * 16, "Hi There") computed independently with Python's
  // hmac module.
  PrfOutput out = prf_eval(key, FromString("Hi There"));
  EXPECT_EQ(to_hex(out.bytes), "492ce020fe2534a5789dc3848806c78f");
}

TEST(CryptoTest, PrfKeySeparation) {
  Rng rng(10);
  Bytes input = random_bytes(12, rng);
  for (int i = 0; i < 200; ++i) {
    SymmetricKey k1{random_array<16>(rng)};
    SymmetricKey k2{random_array<16>(rng)};
    EXPECT_NE(prf_eval(k1, input), prf_eval(k2, input));
    EXPECT_EQ(prf_eval(k1, input), prf_eval(k1, input));
  }
}

TEST(CryptoTest, SeededStreamsReproducible) {
  Rng a(7), b(7), c(8);
  Bytes sa = random_bytes(32, a);
  EXPECT_EQ(sa, random_bytes(32, b));
  EXPECT_NE(sa, random_bytes(32, c));
  EXPECT_EQ(random_bytes(12, a).size(), 12u);
}

}  // namespace
}  // namespace dbpaisa
