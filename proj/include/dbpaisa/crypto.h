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

#ifndef DBPAISA_CRYPTO_H_
#define DBPAISA_CRYPTO_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dbpaisa {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

inline constexpr size_t kPublicKeySize = 65;
inline constexpr size_t kPrivateKeySize = 32;
inline constexpr size_t kSignatureSize = 64;
inline constexpr size_t kSymmetricKeySize = 16;
inline constexpr size_t kDigestSize = 32;
inline constexpr size_t kPrfOutputSize = 16;
inline constexpr size_t kAeadIvSize = 12;
inline constexpr size_t kAeadTagSize = 16;

// Uncompressed SEC1 point: 0x04 || X || Y.
struct PublicKey {
  std::array<uint8_t, kPublicKeySize> bytes{};
  friend bool operator==(const PublicKey&, const PublicKey&) = default;
  friend auto operator<=>(const PublicKey&, const PublicKey&) = default;
};

struct PrivateKey {
  std::array<uint8_t, kPrivateKeySize> bytes{};
  friend bool operator==(const PrivateKey&, const PrivateKey&) = default;
};

struct SigningKeyPair {
  PublicKey public_key;
  PrivateKey private_key;
};

// Raw r || s, each a 32-byte big-endian integer.
struct Signature {
  std::array<uint8_t, kSignatureSize> bytes{};
  friend bool operator==(const Signature&, const Signature&) = default;
};

struct SymmetricKey {
  std::array<uint8_t, kSymmetricKeySize> bytes{};
  friend bool operator==(const SymmetricKey&, const SymmetricKey&) = default;
  friend auto operator<=>(const SymmetricKey&, const SymmetricKey&) = default;
};

struct Digest {
  std::array<uint8_t, kDigestSize> bytes{};
  friend bool operator==(const Digest&, const Digest&) = default;
};

struct PrfOutput {
  std::array<uint8_t, kPrfOutputSize> bytes{};
  friend bool operator==(const PrfOutput&, const PrfOutput&) = default;
};

using AeadIv = std::array<uint8_t, kAeadIvSize>;
using AeadTag = std::array<uint8_t, kAeadTagSize>;

// Raised for invalid private scalars and OpenSSL failures.
class KeyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Seeded byte source. Every random value in the library is drawn from one of
// these so that runs are reproducible from a single seed.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Child generator whose stream depends on this generator's seed and `salt`.
  static Rng Derive(uint64_t seed, uint64_t salt);

  uint64_t NextU64() { return engine_(); }
  double NextUnit();  // uniform in [0, 1)
  uint64_t Below(uint64_t bound);
  void Fill(std::span<uint8_t> out);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

Bytes random_bytes(size_t length, Rng& rng);

template <size_t N>
std::array<uint8_t, N> random_array(Rng& rng) {
  std::array<uint8_t, N> out{};
  rng.Fill(out);
  return out;
}

SigningKeyPair generate_keypair(Rng& rng);
PublicKey public_key_of(const PrivateKey& key);

// ECDSA P-256 over SHA-256 with an RFC 6979 deterministic nonce.
Signature sign(const PrivateKey& key, ByteView message);

// Never throws: malformed keys or signatures simply fail verification.
bool verify(const PublicKey& key, ByteView message, const Signature& sig);

Digest hash_image(ByteView image);

// AES-128-GCM. Output is ciphertext || tag.
Bytes aead_seal(const SymmetricKey& key, const AeadIv& iv, ByteView plaintext,
                ByteView associated_data = {});
std::optional<Bytes> aead_open(const SymmetricKey& key, const AeadIv& iv,
                               ByteView sealed, ByteView associated_data = {});

// Reusable AES-GCM opener for trial decryption loops. Not thread-safe; create
// one per thread.
class AeadTrialOpener {
 public:
  AeadTrialOpener();
  ~AeadTrialOpener();
  AeadTrialOpener(const AeadTrialOpener&) = delete;
  AeadTrialOpener& operator=(const AeadTrialOpener&) = delete;

  // Decrypts into `plaintext_out` (resized) and returns true iff the tag
  // verifies under `key`.
  bool Open(const SymmetricKey& key, const AeadIv& iv, ByteView ciphertext,
            const AeadTag& tag, ByteView associated_data, Bytes& plaintext_out);

 private:
  struct Impl;
  Impl* impl_;
};

// HMAC-SHA-256 truncated to 16 bytes.
PrfOutput prf_eval(const SymmetricKey& key, ByteView input);

}  // namespace dbpaisa

#endif  // DBPAISA_CRYPTO_H_
