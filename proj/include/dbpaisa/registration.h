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

#ifndef DBPAISA_REGISTRATION_H_
#define DBPAISA_REGISTRATION_H_

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dbpaisa/crypto.h"
#include "dbpaisa/sim_time.h"
#include "dbpaisa/wire.h"

namespace dbpaisa {

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ProvisioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CertRecord {
  std::string subject;
  PublicKey subject_key;
  PublicKey issuer_key;
  Signature signature;  // over cert_signed_bytes(subject, subject_key)
  friend bool operator==(const CertRecord&, const CertRecord&) = default;
};

// u16 big-endian subject length || subject || 65-byte subject key.
Bytes cert_signed_bytes(const std::string& subject, const PublicKey& subject_key);
CertRecord issue_certificate(const std::string& subject, const PublicKey& subject_key,
                             const SigningKeyPair& issuer);

struct Manifest {
  PublicKey device_public_key;
  CertRecord mfr_certificate;
  CertRecord device_certificate;
  std::string device_type;
  std::vector<std::string> sensors_actuators;
  std::string software_version;
  std::string coarse_location;
  std::string full_url;
  friend bool operator==(const Manifest&, const Manifest&) = default;
};

// Key-sorted compact JSON; keys and signatures as lowercase hex.
Bytes canonical_bytes(const Manifest& manifest);
// Rejects anything that does not re-serialize to exactly `bytes`.
std::optional<Manifest> parse_canonical_manifest(ByteView bytes);

struct Manufacturer {
  std::string name;
  SigningKeyPair keys;
  CertRecord certificate;  // self-signed
};

Manufacturer make_manufacturer(const std::string& name, Rng& rng);

struct StoredManifest {
  Bytes manifest;
  Signature signature;
  friend bool operator==(const StoredManifest&, const StoredManifest&) = default;
};

// Local stand-in for the manufacturer's URL shortener and manifest hosting.
// Concurrent readers, exclusive writers.
class ManifestStore {
 public:
  ManifestStore() = default;
  ManifestStore(const ManifestStore& other);
  ManifestStore& operator=(const ManifestStore& other);

  // False if the token is already taken; existing entries are never replaced.
  bool Insert(const UrlToken& token, StoredManifest entry);
  std::optional<StoredManifest> Resolve(const UrlToken& token) const;
  bool Contains(const UrlToken& token) const;
  size_t size() const;
  std::vector<UrlToken> Tokens() const;

  // Replaces hosted bytes in place. Models a compromised or buggy host; the
  // provisioning path never calls it.
  void Overwrite(const UrlToken& token, StoredManifest entry);

  // One file per token: "<token>.manifest" holding the hex signature on the
  // first line followed by the canonical manifest bytes.
  void Save(const std::filesystem::path& dir) const;
  static ManifestStore Load(const std::filesystem::path& dir);

 private:
  mutable std::shared_mutex mu_;
  std::map<UrlToken, StoredManifest> entries_;
};

std::optional<StoredManifest> resolve_manifest(const ManifestStore& store,
                                               const UrlToken& url);

// Manufacturer public keys trusted out of band.
class TrustStore {
 public:
  void Add(const std::string& name, const PublicKey& key);
  bool Trusts(const PublicKey& key) const;
  size_t size() const { return keys_.size(); }

  void Save(const std::filesystem::path& file) const;  // JSON
  static TrustStore Load(const std::filesystem::path& file);

 private:
  std::map<PublicKey, std::string> keys_;
};

enum class ManifestError {
  kMalformed,
  kUntrustedManufacturer,
  kBadCertificate,
  kKeyMismatch,
  kBadSignature,
};

std::string_view to_string(ManifestError e);

std::variant<Manifest, ManifestError> verify_manifest(ByteView manifest_bytes,
                                                      const Signature& signature,
                                                      const TrustStore& trust);

struct DeviceDescriptor {
  std::string subject;
  std::string device_type;
  std::vector<std::string> sensors_actuators;
  std::string software_version;
  std::string coarse_location;
  std::string full_url;
  Bytes software_image;
};

struct DeviceParams {
  SimTime t_att = from_seconds(300);
  SimTime t_gen = from_seconds(1);
  size_t pool_max = kMaxPooledNonces;
};

void validate(const DeviceParams& params);  // throws ParameterError

struct DeviceProvisioningRecord {
  SigningKeyPair keys;
  UrlToken url;
  Digest software_hash;
  DeviceParams params;
};

DeviceProvisioningRecord provision_db_device(const Manufacturer& mfr,
                                             const DeviceDescriptor& descriptor,
                                             const DeviceParams& params,
                                             ManifestStore& store, Rng& rng);

// 14 characters drawn from [0-9A-Za-z].
UrlToken random_url_token(Rng& rng);

using DeviceId = std::array<uint8_t, kDeviceIdSize>;

// Owner-side table of per-device symmetric keys.
class OwnerKeyTable {
 public:
  // Throws ProvisioningError on a duplicate device id.
  void Add(const DeviceId& id, const SymmetricKey& key);
  std::optional<SymmetricKey> Find(const DeviceId& id) const;
  size_t size() const { return entries_.size(); }
  const std::vector<std::pair<DeviceId, SymmetricKey>>& entries() const {
    return entries_;
  }

  // "DPKT" || u32 count || count * (12-byte id || 16-byte key).
  void Save(const std::filesystem::path& file) const;
  static OwnerKeyTable Load(const std::filesystem::path& file);

 private:
  std::vector<std::pair<DeviceId, SymmetricKey>> entries_;
  std::map<DeviceId, size_t> index_;
};

// Record T = pk_O || K || H_SW installed in the device's secure region.
struct ImProvisioningRecord {
  PublicKey owner_key;
  SymmetricKey key;
  Digest software_hash;
};

// Generates a fresh K and registers it in `table`.
ImProvisioningRecord provision_im_device(const PublicKey& owner_key,
                                         const DeviceId& device_id,
                                         ByteView software_image,
                                         OwnerKeyTable& table, Rng& rng);

// Same, but with K fixed by the caller (LKH leaf key).
ImProvisioningRecord provision_im_device_with_key(const PublicKey& owner_key,
                                                  const DeviceId& device_id,
                                                  ByteView software_image,
                                                  const SymmetricKey& key,
                                                  OwnerKeyTable& table);

}  // namespace dbpaisa

#endif  // DBPAISA_REGISTRATION_H_
