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

#ifndef DBPAISA_WIRE_H_
#define DBPAISA_WIRE_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dbpaisa/crypto.h"

namespace dbpaisa {

inline constexpr size_t kProtocolIdSize = 6;
inline constexpr size_t kNonceSize = 12;
inline constexpr size_t kUrlTokenSize = 14;
inline constexpr size_t kAttReportSize = 5;
inline constexpr size_t kMaxPooledNonces = 129;
inline constexpr size_t kMaxFrameBytes = 1650;
inline constexpr size_t kImPlaintextSize = 96;
inline constexpr size_t kDeviceIdSize = 12;

inline constexpr std::string_view kIdRequest = "DP-REQ";
inline constexpr std::string_view kIdResponse = "DP-RES";
inline constexpr std::string_view kIdAnnouncement = "DP-ANN";
inline constexpr std::string_view kIdImRequest = "IM-REQ";
inline constexpr std::string_view kIdImResponse = "IM-RES";

inline constexpr size_t kRequestSize = kProtocolIdSize + kNonceSize;  // 18
// id + device nonce + count + url + att report + signature, no pooled nonces.
inline constexpr size_t kResponseBaseSize = kProtocolIdSize + kNonceSize + 1 +
                                            kUrlTokenSize + kAttReportSize +
                                            kSignatureSize;  // 102
inline constexpr size_t kImRequestSize =
    kProtocolIdSize + kNonceSize + kSignatureSize;  // 82
inline constexpr size_t kImResponseBaseSize = kProtocolIdSize + kAeadIvSize +
                                              kImPlaintextSize +
                                              kAeadTagSize;  // 130

struct Nonce {
  std::array<uint8_t, kNonceSize> bytes{};
  friend bool operator==(const Nonce&, const Nonce&) = default;
  friend auto operator<=>(const Nonce&, const Nonce&) = default;
};

struct UrlToken {
  std::array<char, kUrlTokenSize> chars{};

  static UrlToken FromString(std::string_view s);  // throws WireError
  std::string str() const { return std::string(chars.begin(), chars.end()); }
  friend bool operator==(const UrlToken&, const UrlToken&) = default;
  friend auto operator<=>(const UrlToken&, const UrlToken&) = default;
};

enum class AttResult : uint8_t { kFail = 0x00, kSuccess = 0x01 };

struct AttReport {
  AttResult result = AttResult::kFail;
  uint32_t t_att = 0;  // whole seconds since the last attestation
  friend bool operator==(const AttReport&, const AttReport&) = default;
};

struct RequestMsg {
  Nonce nonce;
  friend bool operator==(const RequestMsg&, const RequestMsg&) = default;
};

struct ResponseMsg {
  Nonce device_nonce;
  std::vector<Nonce> pooled_nonces;
  UrlToken url;
  AttReport att_report;
  Signature signature;
  friend bool operator==(const ResponseMsg&, const ResponseMsg&) = default;
};

// Same layout as a response with an empty pool.
struct AnnouncementMsg {
  Nonce device_nonce;
  UrlToken url;
  AttReport att_report;
  Signature signature;
  friend bool operator==(const AnnouncementMsg&, const AnnouncementMsg&) = default;
};

struct ImRequestMsg {
  Nonce owner_nonce;
  Signature signature;
  friend bool operator==(const ImRequestMsg&, const ImRequestMsg&) = default;
};

struct ImResponseMsg {
  std::vector<PrfOutput> lkh_header;  // empty in naive retrieval mode
  AeadIv iv{};
  std::array<uint8_t, kImPlaintextSize> ciphertext{};
  AeadTag tag{};
  friend bool operator==(const ImResponseMsg&, const ImResponseMsg&) = default;
};

using WireMessage = std::variant<RequestMsg, ResponseMsg, AnnouncementMsg,
                                 ImRequestMsg, ImResponseMsg>;

enum class WireErrorKind {
  kUnrecognizedProtocol,
  kMalformed,
  kCapacity,
  kInvariant,
};

class WireError : public std::runtime_error {
 public:
  WireError(WireErrorKind kind, size_t offset, const std::string& what)
      : std::runtime_error(what), kind_(kind), offset_(offset) {}

  WireErrorKind kind() const { return kind_; }
  // Byte offset at which decoding failed (0 for encode-side errors).
  size_t offset() const { return offset_; }

 private:
  WireErrorKind kind_;
  size_t offset_;
};

std::string_view to_string(WireErrorKind kind);

Bytes encode(const WireMessage& message);
WireMessage decode(ByteView bytes);

// Bytes covered by the sender's signature: everything preceding the signature
// field for DP-RES/DP-ANN, and id || owner nonce for IM-REQ.
Bytes signed_region(const ResponseMsg& message);
Bytes signed_region(const AnnouncementMsg& message);
Bytes signed_region(const ImRequestMsg& message);

size_t response_size(size_t pooled_count);
size_t im_response_size(size_t header_levels);

// Associated data bound to an IM response ciphertext: id || header.
Bytes im_associated_data(const ImResponseMsg& message);

// Fixed 96-byte plaintext sealed inside an IM response.
struct DeviceInfo {
  std::array<uint8_t, kDeviceIdSize> device_id{};
  uint16_t type_code = 0;
  uint16_t software_version = 0;
  friend bool operator==(const DeviceInfo&, const DeviceInfo&) = default;
  friend auto operator<=>(const DeviceInfo&, const DeviceInfo&) = default;
};

struct ImPlaintext {
  Nonce owner_nonce;
  AttResult att_result = AttResult::kFail;
  DeviceInfo device_info;
  friend bool operator==(const ImPlaintext&, const ImPlaintext&) = default;
};

std::array<uint8_t, kImPlaintextSize> encode_plaintext(const ImPlaintext& p);
ImPlaintext decode_plaintext(ByteView bytes);  // throws WireError

// Human-readable field dump used by the CLI.
std::string describe(const WireMessage& message);
std::string_view protocol_id(const WireMessage& message);

}  // namespace dbpaisa

#endif  // DBPAISA_WIRE_H_
