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

#include "dbpaisa/registration.h"

#include <json.hpp>

#include <fstream>
#include <mutex>
#include <sstream>

#include "dbpaisa/hex.h"

namespace dbpaisa {
namespace {

using nlohmann::json;

constexpr int kTokenRetries = 16;
constexpr char kBase62[] =
    "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";

template <size_t N>
std::optional<std::array<uint8_t, N>> HexField(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) return std::nullopt;
  auto bytes = from_hex(j.at(key).get<std::string>());
  if (!bytes || bytes->size() != N) return std::nullopt;
  std::array<uint8_t, N> out{};
  std::copy(bytes->begin(), bytes->end(), out.begin());
  return out;
}

json CertToJson(const CertRecord& c) {
  return json{{"issuer_key", to_hex(c.issuer_key.bytes)},
              {"signature", to_hex(c.signature.bytes)},
              {"subject", c.subject},
              {"subject_key", to_hex(c.subject_key.bytes)}};
}

std::optional<CertRecord> CertFromJson(const json& j) {
  if (!j.is_object() || j.size() != 4 || !j.contains("subject") ||
      !j.at("subject").is_string()) {
    return std::nullopt;
  }
  auto subject_key = HexField<kPublicKeySize>(j, "subject_key");
  auto issuer_key = HexField<kPublicKeySize>(j, "issuer_key");
  auto sig = HexField<kSignatureSize>(j, "signature");
  if (!subject_key || !issuer_key || !sig) return std::nullopt;
  return CertRecord{j.at("subject").get<std::string>(), PublicKey{*subject_key},
                    PublicKey{*issuer_key}, Signature{*sig}};
}

bool CertSignatureValid(const CertRecord& c) {
  return verify(c.issuer_key, cert_signed_bytes(c.subject, c.subject_key), c.signature);
}

void WriteFile(const std::filesystem::path& path, ByteView bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ProvisioningError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

Bytes ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProvisioningError("cannot read " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

Bytes cert_signed_bytes(const std::string& subject, const PublicKey& subject_key) {
  if (subject.size() > 0xffff) throw ParameterError("certificate subject too long");
  Bytes out;
  out.reserve(2 + subject.size() + kPublicKeySize);
  out.push_back(static_cast<uint8_t>(subject.size() >> 8));
  out.push_back(static_cast<uint8_t>(subject.size()));
  out.insert(out.end(), subject.begin(), subject.end());
  out.insert(out.end(), subject_key.bytes.begin(), subject_key.bytes.end());
  return out;
}

CertRecord issue_certificate(const std::string& subject, const PublicKey& subject_key,
                             const SigningKeyPair& issuer) {
  return CertRecord{subject, subject_key, issuer.public_key,
                    sign(issuer.private_key, cert_signed_bytes(subject, subject_key))};
}

Bytes canonical_bytes(const Manifest& m) {
  json j{{"coarse_location", m.coarse_location},
         {"device_certificate", CertToJson(m.device_certificate)},
         {"device_public_key", to_hex(m.device_public_key.bytes)},
         {"device_type", m.device_type},
         {"full_url", m.full_url},
         {"mfr_certificate", CertToJson(m.mfr_certificate)},
         {"sensors_actuators", m.sensors_actuators},
         {"software_version", m.software_version}};
  std::string text = j.dump();
  return Bytes(text.begin(), text.end());
}

std::optional<Manifest> parse_canonical_manifest(ByteView bytes) {
  json j = json::parse(bytes.begin(), bytes.end(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object() || j.size() != 8) return std::nullopt;
  try {
    Manifest m;
    auto device_key = HexField<kPublicKeySize>(j, "device_public_key");
    auto mfr_cert = CertFromJson(j.at("mfr_certificate"));
    auto dev_cert = CertFromJson(j.at("device_certificate"));
    if (!device_key || !mfr_cert || !dev_cert) return std::nullopt;
    m.device_public_key = PublicKey{*device_key};
    m.mfr_certificate = *mfr_cert;
    m.device_certificate = *dev_cert;
    m.device_type = j.at("device_type").get<std::string>();
    m.sensors_actuators = j.at("sensors_actuators").get<std::vector<std::string>>();
    m.software_version = j.at("software_version").get<std::string>();
    m.coarse_location = j.at("coarse_location").get<std::string>();
    m.full_url = j.at("full_url").get<std::string>();
    Bytes again = canonical_bytes(m);
    if (!std::equal(again.begin(), again.end(), bytes.begin(), bytes.end())) {
      return std::nullopt;
    }
    return m;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

Manufacturer make_manufacturer(const std::string& name, Rng& rng) {
  Manufacturer mfr;
  mfr.name = name;
  mfr.keys = generate_keypair(rng);
  mfr.certificate = issue_certificate(name, mfr.keys.public_key, mfr.keys);
  return mfr;
}

ManifestStore::ManifestStore(const ManifestStore& other) {
  std::shared_lock lock(other.mu_);
  entries_ = other.entries_;
}

ManifestStore& ManifestStore::operator=(const ManifestStore& other) {
  if (this == &other) return *this;
  std::map<UrlToken, StoredManifest> copy;
  {
    std::shared_lock lock(other.mu_);
    copy = other.entries_;
  }
  std::unique_lock lock(mu_);
  entries_ = std::move(copy);
  return *this;
}

bool ManifestStore::Insert(const UrlToken& token, StoredManifest entry) {
  std::unique_lock lock(mu_);
  return entries_.emplace(token, std::move(entry)).second;
}

std::optional<StoredManifest> ManifestStore::Resolve(const UrlToken& token) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(token);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

bool ManifestStore::Contains(const UrlToken& token) const {
  std::shared_lock lock(mu_);
  return entries_.count(token) != 0;
}

size_t ManifestStore::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::vector<UrlToken> ManifestStore::Tokens() const {
  std::shared_lock lock(mu_);
  std::vector<UrlToken> out;
  out.reserve(entries_.size());
  for (const auto& [token, entry] : entries_) out.push_back(token);
  return out;
}

void ManifestStore::Overwrite(const UrlToken& token, StoredManifest entry) {
  std::unique_lock lock(mu_);
  entries_[token] = std::move(entry);
}

void ManifestStore::Save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::shared_lock lock(mu_);
  for (const auto& [token, entry] : entries_) {
    Bytes file;
    std::string sig = to_hex(entry.signature.bytes) + "\n";
    file.insert(file.end(), sig.begin(), sig.end());
    file.insert(file.end(), entry.manifest.begin(), entry.manifest.end());
    WriteFile(dir / (token.str() + ".manifest"), file);
  }
}

ManifestStore ManifestStore::Load(const std::filesystem::path& dir) {
  ManifestStore store;
  for (const auto& item : std::filesystem::directory_iterator(dir)) {
    if (item.path().extension() != ".manifest") continue;
    Bytes file = ReadFile(item.path());
    constexpr size_t kSigHex = 2 * kSignatureSize;
    if (file.size() < kSigHex + 1 || file[kSigHex] != '\n') {
      throw ProvisioningError("bad manifest file " + item.path().string());
    }
    auto sig = from_hex(std::string_view(reinterpret_cast<const char*>(file.data()),
                                         kSigHex));
    if (!sig) throw ProvisioningError("bad signature in " + item.path().string());
    StoredManifest entry;
    std::copy(sig->begin(), sig->end(), entry.signature.bytes.begin());
    entry.manifest.assign(file.begin() + kSigHex + 1, file.end());
    UrlToken token;
    try {
      token = UrlToken::FromString(item.path().stem().string());
    } catch (const WireError&) {
      throw ProvisioningError("bad token file name " + item.path().string());
    }
    store.Insert(token, std::move(entry));
  }
  return store;
}

std::optional<StoredManifest> resolve_manifest(const ManifestStore& store,
                                               const UrlToken& url) {
  return store.Resolve(url);
}

void TrustStore::Add(const std::string& name, const PublicKey& key) {
  keys_[key] = name;
}

bool TrustStore::Trusts(const PublicKey& key) const { return keys_.count(key) != 0; }

void TrustStore::Save(const std::filesystem::path& file) const {
  json list = json::array();
  for (const auto& [key, name] : keys_) {
    list.push_back(json{{"name", name}, {"public_key", to_hex(key.bytes)}});
  }
  std::string text = json{{"manufacturers", list}}.dump(2) + "\n";
  WriteFile(file, Bytes(text.begin(), text.end()));
}

TrustStore TrustStore::Load(const std::filesystem::path& file) {
  Bytes raw = ReadFile(file);
  json j = json::parse(raw.begin(), raw.end(), nullptr, false);
  if (j.is_discarded() || !j.contains("manufacturers")) {
    throw ProvisioningError("bad trust file " + file.string());
  }
  TrustStore trust;
  for (const json& entry : j.at("manufacturers")) {
    auto key = HexField<kPublicKeySize>(entry, "public_key");
    if (!key || !entry.contains("name")) {
      throw ProvisioningError("bad trust entry in " + file.string());
    }
    trust.Add(entry.at("name").get<std::string>(), PublicKey{*key});
  }
  return trust;
}

std::string_view to_string(ManifestError e) {
  switch (e) {
    case ManifestError::kMalformed: return "malformed-manifest";
    case ManifestError::kUntrustedManufacturer: return "untrusted-manufacturer";
    case ManifestError::kBadCertificate: return "bad-certificate";
    case ManifestError::kKeyMismatch: return "device-key-mismatch";
    case ManifestError::kBadSignature: return "bad-manifest-signature";
  }
  return "unknown";
}

std::variant<Manifest, ManifestError> verify_manifest(ByteView manifest_bytes,
                                                      const Signature& signature,
                                                      const TrustStore& trust) {
  auto parsed = parse_canonical_manifest(manifest_bytes);
  if (!parsed) return ManifestError::kMalformed;
  const Manifest& m = *parsed;
  const PublicKey& mfr_key = m.mfr_certificate.subject_key;
  if (!trust.Trusts(mfr_key)) return ManifestError::kUntrustedManufacturer;
  if (m.mfr_certificate.issuer_key != mfr_key || !CertSignatureValid(m.mfr_certificate)) {
    return ManifestError::kBadCertificate;
  }
  if (m.device_certificate.issuer_key != mfr_key ||
      !CertSignatureValid(m.device_certificate)) {
    return ManifestError::kBadCertificate;
  }
  if (m.device_certificate.subject_key != m.device_public_key) {
    return ManifestError::kKeyMismatch;
  }
  if (!verify(mfr_key, manifest_bytes, signature)) return ManifestError::kBadSignature;
  return m;
}

void validate(const DeviceParams& params) {
  if (params.pool_max < 1 || params.pool_max > kMaxPooledNonces) {
    throw ParameterError("pool_max must be in [1, 129], got " +
                         std::to_string(params.pool_max));
  }
  if (params.t_att <= SimTime::zero()) throw ParameterError("t_att must be positive");
  if (params.t_gen < SimTime::zero()) throw ParameterError("t_gen must be >= 0");
}

UrlToken random_url_token(Rng& rng) {
  UrlToken token;
  for (char& c : token.chars) c = kBase62[rng.Below(62)];
  return token;
}

DeviceProvisioningRecord provision_db_device(const Manufacturer& mfr,
                                             const DeviceDescriptor& descriptor,
                                             const DeviceParams& params,
                                             ManifestStore& store, Rng& rng) {
  validate(params);
  DeviceProvisioningRecord record;
  record.params = params;
  record.keys = generate_keypair(rng);
  record.software_hash = hash_image(descriptor.software_image);

  Manifest m;
  m.device_public_key = record.keys.public_key;
  m.mfr_certificate = mfr.certificate;
  m.device_certificate =
      issue_certificate(descriptor.subject, record.keys.public_key, mfr.keys);
  m.device_type = descriptor.device_type;
  m.sensors_actuators = descriptor.sensors_actuators;
  m.software_version = descriptor.software_version;
  m.coarse_location = descriptor.coarse_location;
  m.full_url = descriptor.full_url;

  StoredManifest entry;
  entry.manifest = canonical_bytes(m);
  entry.signature = sign(mfr.keys.private_key, entry.manifest);

  for (int attempt = 0; attempt < kTokenRetries; ++attempt) {
    UrlToken token = random_url_token(rng);
    if (store.Insert(token, entry)) {
      record.url = token;
      return record;
    }
  }
  throw ProvisioningError("could not allocate a unique url token");
}

void OwnerKeyTable::Add(const DeviceId& id, const SymmetricKey& key) {
  if (!index_.emplace(id, entries_.size()).second) {
    throw ProvisioningError("device id already registered");
  }
  entries_.emplace_back(id, key);
}

std::optional<SymmetricKey> OwnerKeyTable::Find(const DeviceId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return entries_[it->second].second;
}

void OwnerKeyTable::Save(const std::filesystem::path& file) const {
  Bytes out{'D', 'P', 'K', 'T'};
  uint32_t n = static_cast<uint32_t>(entries_.size());
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<uint8_t>(n >> shift));
  for (const auto& [id, key] : entries_) {
    out.insert(out.end(), id.begin(), id.end());
    out.insert(out.end(), key.bytes.begin(), key.bytes.end());
  }
  WriteFile(file, out);
}

OwnerKeyTable OwnerKeyTable::Load(const std::filesystem::path& file) {
  Bytes raw = ReadFile(file);
  constexpr size_t kRecord = kDeviceIdSize + kSymmetricKeySize;
  if (raw.size() < 8 || !std::equal(raw.begin(), raw.begin() + 4, "DPKT")) {
    throw ProvisioningError("bad key table header in " + file.string());
  }
  uint32_t n = 0;
  for (int i = 4; i < 8; ++i) n = (n << 8) | raw[i];
  if (raw.size() != 8 + static_cast<size_t>(n) * kRecord) {
    throw ProvisioningError("key table length mismatch in " + file.string());
  }
  OwnerKeyTable table;
  for (size_t i = 0; i < n; ++i) {
    auto at = raw.begin() + 8 + static_cast<std::ptrdiff_t>(i * kRecord);
    DeviceId id{};
    SymmetricKey key;
    std::copy_n(at, kDeviceIdSize, id.begin());
    std::copy_n(at + kDeviceIdSize, kSymmetricKeySize, key.bytes.begin());
    table.Add(id, key);
  }
  return table;
}

ImProvisioningRecord provision_im_device(const PublicKey& owner_key,
                                         const DeviceId& device_id,
                                         ByteView software_image,
                                         OwnerKeyTable& table, Rng& rng) {
  return provision_im_device_with_key(owner_key, device_id, software_image,
                                      SymmetricKey{random_array<kSymmetricKeySize>(rng)},
                                      table);
}

ImProvisioningRecord provision_im_device_with_key(const PublicKey& owner_key,
                                                  const DeviceId& device_id,
                                                  ByteView software_image,
                                                  const SymmetricKey& key,
                                                  OwnerKeyTable& table) {
  table.Add(device_id, key);
  return ImProvisioningRecord{owner_key, key, hash_image(software_image)};
}

}  // namespace dbpaisa
