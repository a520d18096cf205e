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

#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/ec.h>
#include <openssl/ecdsa.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/obj_mac.h>
#include <openssl/param_build.h>

#include <algorithm>
#include <cstring>
#include <memory>

namespace dbpaisa {
namespace {

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

using BnPtr = std::unique_ptr<BIGNUM, Deleter<BIGNUM, BN_free>>;
using BnCtxPtr = std::unique_ptr<BN_CTX, Deleter<BN_CTX, BN_CTX_free>>;
using PointPtr = std::unique_ptr<EC_POINT, Deleter<EC_POINT, EC_POINT_free>>;
using EcdsaSigPtr =
    std::unique_ptr<ECDSA_SIG, Deleter<ECDSA_SIG, ECDSA_SIG_free>>;
using PkeyPtr = std::unique_ptr<EVP_PKEY, Deleter<EVP_PKEY, EVP_PKEY_free>>;
using PkeyCtxPtr =
    std::unique_ptr<EVP_PKEY_CTX, Deleter<EVP_PKEY_CTX, EVP_PKEY_CTX_free>>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, Deleter<EVP_MD_CTX, EVP_MD_CTX_free>>;
using CipherCtxPtr =
    std::unique_ptr<EVP_CIPHER_CTX, Deleter<EVP_CIPHER_CTX, EVP_CIPHER_CTX_free>>;
using ParamBldPtr =
    std::unique_ptr<OSSL_PARAM_BLD, Deleter<OSSL_PARAM_BLD, OSSL_PARAM_BLD_free>>;
using ParamPtr = std::unique_ptr<OSSL_PARAM, Deleter<OSSL_PARAM, OSSL_PARAM_free>>;

const EC_GROUP* P256() {
  static const EC_GROUP* group = EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1);
  return group;
}

BnPtr BnFromBytes(std::span<const uint8_t> bytes) {
  return BnPtr(BN_bin2bn(bytes.data(), static_cast<int>(bytes.size()), nullptr));
}

void BnToFixed(const BIGNUM* bn, std::span<uint8_t> out) {
  if (BN_bn2binpad(bn, out.data(), static_cast<int>(out.size())) < 0) {
    throw KeyError("bignum does not fit output buffer");
  }
}

using Hmac256 = std::array<uint8_t, 32>;

Hmac256 HmacSha256(std::span<const uint8_t> key,
                   std::initializer_list<std::span<const uint8_t>> parts) {
  Bytes joined;
  for (auto part : parts) joined.insert(joined.end(), part.begin(), part.end());
  Hmac256 out{};
  unsigned int len = 0;
  HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), joined.data(),
       joined.size(), out.data(), &len);
  return out;
}

// RFC 6979 section 3.2 candidate generator for qlen == hlen == 256.
class DeterministicNonce {
 public:
  DeterministicNonce(const PrivateKey& key, const Digest& h1, const BIGNUM* order,
                     BN_CTX* ctx) {
    // bits2octets(h1) = int(h1) mod q, re-encoded on 32 bytes.
    BnPtr h = BnFromBytes(h1.bytes);
    BnPtr reduced(BN_new());
    BN_nnmod(reduced.get(), h.get(), order, ctx);
    std::array<uint8_t, 32> h_octets{};
    BnToFixed(reduced.get(), h_octets);

    v_.fill(0x01);
    k_.fill(0x00);
    const uint8_t zero = 0x00;
    const uint8_t one = 0x01;
    k_ = HmacSha256(k_, {v_, {&zero, 1}, key.bytes, h_octets});
    v_ = HmacSha256(k_, {v_});
    k_ = HmacSha256(k_, {v_, {&one, 1}, key.bytes, h_octets});
    v_ = HmacSha256(k_, {v_});
  }

  std::array<uint8_t, 32> Next() {
    if (started_) {
      const uint8_t zero = 0x00;
      k_ = HmacSha256(k_, {v_, {&zero, 1}});
      v_ = HmacSha256(k_, {v_});
    }
    started_ = true;
    v_ = HmacSha256(k_, {v_});
    return v_;
  }

 private:
  Hmac256 v_{};
  Hmac256 k_{};
  bool started_ = false;
};

bool ScalarInRange(const BIGNUM* x, const BIGNUM* order) {
  return !BN_is_zero(x) && !BN_is_negative(x) && BN_cmp(x, order) < 0;
}

PkeyPtr ImportPublicKey(const PublicKey& key) {
  ParamBldPtr bld(OSSL_PARAM_BLD_new());
  if (!bld) return nullptr;
  if (!OSSL_PARAM_BLD_push_utf8_string(bld.get(), OSSL_PKEY_PARAM_GROUP_NAME,
                                       "prime256v1", 0) ||
      !OSSL_PARAM_BLD_push_octet_string(bld.get(), OSSL_PKEY_PARAM_PUB_KEY,
                                        key.bytes.data(), key.bytes.size())) {
    return nullptr;
  }
  ParamPtr params(OSSL_PARAM_BLD_to_param(bld.get()));
  PkeyCtxPtr ctx(EVP_PKEY_CTX_new_from_name(nullptr, "EC", nullptr));
  if (!params || !ctx || EVP_PKEY_fromdata_init(ctx.get()) <= 0) return nullptr;
  EVP_PKEY* raw = nullptr;
  if (EVP_PKEY_fromdata(ctx.get(), &raw, EVP_PKEY_PUBLIC_KEY, params.get()) <= 0) {
    return nullptr;
  }
  return PkeyPtr(raw);
}

const EVP_CIPHER* Aes128Gcm() {
  static EVP_CIPHER* cipher = EVP_CIPHER_fetch(nullptr, "AES-128-GCM", nullptr);
  return cipher;
}

}  // namespace

Rng Rng::Derive(uint64_t seed, uint64_t salt) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(salt), static_cast<uint32_t>(salt >> 32),
                    0x9e3779b9u};
  Rng out(0);
  out.engine_.seed(seq);
  return out;
}

double Rng::NextUnit() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

uint64_t Rng::Below(uint64_t bound) {
  if (bound == 0) return 0;
  return std::uniform_int_distribution<uint64_t>(0, bound - 1)(engine_);
}

void Rng::Fill(std::span<uint8_t> out) {
  size_t i = 0;
  while (i < out.size()) {
    uint64_t word = engine_();
    for (int b = 0; b < 8 && i < out.size(); ++b, ++i) {
      out[i] = static_cast<uint8_t>(word >> (8 * b));
    }
  }
}

Bytes random_bytes(size_t length, Rng& rng) {
  Bytes out(length);
  rng.Fill(out);
  return out;
}

PublicKey public_key_of(const PrivateKey& key) {
  const EC_GROUP* group = P256();
  BnCtxPtr ctx(BN_CTX_new());
  BnPtr d = BnFromBytes(key.bytes);
  if (!ScalarInRange(d.get(), EC_GROUP_get0_order(group))) {
    throw KeyError("private scalar out of range");
  }
  PointPtr point(EC_POINT_new(group));
  if (!EC_POINT_mul(group, point.get(), d.get(), nullptr, nullptr, ctx.get())) {
    throw KeyError("point multiplication failed");
  }
  PublicKey out;
  size_t len = EC_POINT_point2oct(group, point.get(), POINT_CONVERSION_UNCOMPRESSED,
                                  out.bytes.data(), out.bytes.size(), ctx.get());
  if (len != kPublicKeySize) throw KeyError("unexpected point encoding");
  return out;
}

SigningKeyPair generate_keypair(Rng& rng) {
  const BIGNUM* order = EC_GROUP_get0_order(P256());
  for (;;) {
    PrivateKey candidate;
    rng.Fill(candidate.bytes);
    BnPtr d = BnFromBytes(candidate.bytes);
    if (ScalarInRange(d.get(), order)) {
      return SigningKeyPair{public_key_of(candidate), candidate};
    }
  }
}

Signature sign(const PrivateKey& key, ByteView message) {
  const EC_GROUP* group = P256();
  const BIGNUM* order = EC_GROUP_get0_order(group);
  BnCtxPtr ctx(BN_CTX_new());
  BnPtr d = BnFromBytes(key.bytes);
  if (!ScalarInRange(d.get(), order)) throw KeyError("private scalar out of range");

  const Digest h1 = hash_image(message);
  BnPtr e = BnFromBytes(h1.bytes);
  DeterministicNonce nonces(key, h1, order, ctx.get());

  PointPtr point(EC_POINT_new(group));
  BnPtr x(BN_new()), r(BN_new()), s(BN_new()), kinv(BN_new()), tmp(BN_new());
  for (;;) {
    auto candidate = nonces.Next();
    BnPtr k = BnFromBytes(candidate);
    if (!ScalarInRange(k.get(), order)) continue;
    if (!EC_POINT_mul(group, point.get(), k.get(), nullptr, nullptr, ctx.get()) ||
        !EC_POINT_get_affine_coordinates(group, point.get(), x.get(), nullptr,
                                         ctx.get())) {
      throw KeyError("point multiplication failed");
    }
    BN_nnmod(r.get(), x.get(), order, ctx.get());
    if (BN_is_zero(r.get())) continue;
    // s = k^-1 (e + r d) mod n
    BN_mod_mul(tmp.get(), r.get(), d.get(), order, ctx.get());
    BN_mod_add(tmp.get(), tmp.get(), e.get(), order, ctx.get());
    if (!BN_mod_inverse(kinv.get(), k.get(), order, ctx.get())) {
      throw KeyError("nonce inversion failed");
    }
    BN_mod_mul(s.get(), tmp.get(), kinv.get(), order, ctx.get());
    if (BN_is_zero(s.get())) continue;
    break;
  }
  Signature out;
  BnToFixed(r.get(), std::span(out.bytes).first<32>());
  BnToFixed(s.get(), std::span(out.bytes).last<32>());
  return out;
}

bool verify(const PublicKey& key, ByteView message, const Signature& sig) {
  EcdsaSigPtr ecdsa(ECDSA_SIG_new());
  BIGNUM* r = BN_bin2bn(sig.bytes.data(), 32, nullptr);
  BIGNUM* s = BN_bin2bn(sig.bytes.data() + 32, 32, nullptr);
  if (!ecdsa || !r || !s || !ECDSA_SIG_set0(ecdsa.get(), r, s)) {
    BN_free(r);
    BN_free(s);
    return false;
  }
  const BIGNUM* order = EC_GROUP_get0_order(P256());
  if (!ScalarInRange(r, order) || !ScalarInRange(s, order)) return false;

  unsigned char* der = nullptr;
  int der_len = i2d_ECDSA_SIG(ecdsa.get(), &der);
  if (der_len <= 0) return false;
  std::unique_ptr<unsigned char, void (*)(unsigned char*)> der_owner(
      der, [](unsigned char* p) { OPENSSL_free(p); });

  PkeyPtr pkey = ImportPublicKey(key);
  if (!pkey) return false;
  MdCtxPtr md(EVP_MD_CTX_new());
  if (!md || EVP_DigestVerifyInit(md.get(), nullptr, EVP_sha256(), nullptr,
                                  pkey.get()) <= 0) {
    return false;
  }
  return EVP_DigestVerify(md.get(), der, static_cast<size_t>(der_len),
                          message.data(), message.size()) == 1;
}

Digest hash_image(ByteView image) {
  Digest out;
  unsigned int len = 0;
  if (!EVP_Digest(image.data(), image.size(), out.bytes.data(), &len, EVP_sha256(),
                  nullptr) ||
      len != kDigestSize) {
    throw KeyError("SHA-256 failed");
  }
  return out;
}

Bytes aead_seal(const SymmetricKey& key, const AeadIv& iv, ByteView plaintext,
                ByteView associated_data) {
  CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  Bytes out(plaintext.size() + kAeadTagSize);
  int len = 0;
  if (!ctx ||
      EVP_EncryptInit_ex2(ctx.get(), Aes128Gcm(), key.bytes.data(), iv.data(),
                          nullptr) != 1 ||
      (!associated_data.empty() &&
       EVP_EncryptUpdate(ctx.get(), nullptr, &len, associated_data.data(),
                         static_cast<int>(associated_data.size())) != 1) ||
      EVP_EncryptUpdate(ctx.get(), out.data(), &len, plaintext.data(),
                        static_cast<int>(plaintext.size())) != 1 ||
      EVP_EncryptFinal_ex(ctx.get(), out.data() + len, &len) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kAeadTagSize,
                          out.data() + plaintext.size()) != 1) {
    throw KeyError("AES-GCM seal failed");
  }
  return out;
}

std::optional<Bytes> aead_open(const SymmetricKey& key, const AeadIv& iv,
                               ByteView sealed, ByteView associated_data) {
  if (sealed.size() < kAeadTagSize) return std::nullopt;
  AeadTag tag{};
  std::copy(sealed.end() - kAeadTagSize, sealed.end(), tag.begin());
  AeadTrialOpener opener;
  Bytes plaintext;
  if (!opener.Open(key, iv, sealed.first(sealed.size() - kAeadTagSize), tag,
                   associated_data, plaintext)) {
    return std::nullopt;
  }
  return plaintext;
}

struct AeadTrialOpener::Impl {
  CipherCtxPtr ctx{EVP_CIPHER_CTX_new()};
};

AeadTrialOpener::AeadTrialOpener() : impl_(new Impl) {
  if (!impl_->ctx ||
      EVP_DecryptInit_ex2(impl_->ctx.get(), Aes128Gcm(), nullptr, nullptr,
                          nullptr) != 1) {
    delete impl_;
    throw KeyError("AES-GCM context setup failed");
  }
}

AeadTrialOpener::~AeadTrialOpener() { delete impl_; }

bool AeadTrialOpener::Open(const SymmetricKey& key, const AeadIv& iv,
                           ByteView ciphertext, const AeadTag& tag,
                           ByteView associated_data, Bytes& plaintext_out) {
  EVP_CIPHER_CTX* ctx = impl_->ctx.get();
  plaintext_out.resize(ciphertext.size());
  int len = 0;
  if (EVP_DecryptInit_ex2(ctx, nullptr, key.bytes.data(), iv.data(), nullptr) != 1) {
    return false;
  }
  if (!associated_data.empty() &&
      EVP_DecryptUpdate(ctx, nullptr, &len, associated_data.data(),
                        static_cast<int>(associated_data.size())) != 1) {
    return false;
  }
  if (EVP_DecryptUpdate(ctx, plaintext_out.data(), &len, ciphertext.data(),
                        static_cast<int>(ciphertext.size())) != 1) {
    return false;
  }
  AeadTag expected = tag;
  if (EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_SET_TAG, kAeadTagSize,
                          expected.data()) != 1) {
    return false;
  }
  return EVP_DecryptFinal_ex(ctx, plaintext_out.data() + len, &len) == 1;
}

PrfOutput prf_eval(const SymmetricKey& key, ByteView input) {
  std::array<uint8_t, 32> mac{};
  unsigned int len = 0;
  HMAC(EVP_sha256(), key.bytes.data(), static_cast<int>(key.bytes.size()),
       input.data(), input.size(), mac.data(), &len);
  PrfOutput out;
  std::copy_n(mac.begin(), kPrfOutputSize, out.bytes.begin());
  return out;
}

}  // namespace dbpaisa
