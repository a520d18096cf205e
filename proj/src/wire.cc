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

#include "dbpaisa/wire.h"

#include <algorithm>
#include <sstream>

#include "dbpaisa/hex.h"

namespace dbpaisa {
namespace {

bool Printable(char c) { return c >= 0x20 && c <= 0x7e; }

class Writer {
 public:
  explicit Writer(size_t reserve) { out_.reserve(reserve); }

  void Id(std::string_view id) { out_.insert(out_.end(), id.begin(), id.end()); }
  template <typename Range>
  void Raw(const Range& r) {
    out_.insert(out_.end(), std::begin(r), std::end(r));
  }
  void U8(uint8_t v) { out_.push_back(v); }
  void U32(uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) {
      out_.push_back(static_cast<uint8_t>(v >> shift));
    }
  }
  void Report(const AttReport& r) {
    if (r.result != AttResult::kSuccess && r.result != AttResult::kFail) {
      throw WireError(WireErrorKind::kInvariant, 0, "att result must be 0x00 or 0x01");
    }
    U8(static_cast<uint8_t>(r.result));
    U32(r.t_att);
  }
  void Url(const UrlToken& url) {
    if (!std::all_of(url.chars.begin(), url.chars.end(), Printable)) {
      throw WireError(WireErrorKind::kInvariant, 0, "url token must be printable ASCII");
    }
    Raw(url.chars);
  }

  Bytes Take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(ByteView bytes) : bytes_(bytes) {}

  size_t offset() const { return pos_; }
  size_t remaining() const { return bytes_.size() - pos_; }

  template <size_t N>
  void Read(std::array<uint8_t, N>& out) {
    Need(N);
    std::copy_n(bytes_.begin() + pos_, N, out.begin());
    pos_ += N;
  }
  uint8_t U8() {
    Need(1);
    return bytes_[pos_++];
  }
  uint32_t U32() {
    Need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_++];
    return v;
  }
  AttReport Report() {
    size_t at = pos_;
    uint8_t flag = U8();
    if (flag > 0x01) {
      throw WireError(WireErrorKind::kMalformed, at, "att result byte is not 0x00/0x01");
    }
    AttReport r;
    r.result = static_cast<AttResult>(flag);
    r.t_att = U32();
    return r;
  }
  UrlToken Url() {
    Need(kUrlTokenSize);
    UrlToken url;
    for (size_t i = 0; i < kUrlTokenSize; ++i) {
      char c = static_cast<char>(bytes_[pos_]);
      if (!Printable(c)) {
        throw WireError(WireErrorKind::kMalformed, pos_, "non-printable url token byte");
      }
      url.chars[i] = c;
      ++pos_;
    }
    return url;
  }
  void Finish() const {
    if (pos_ != bytes_.size()) {
      throw WireError(WireErrorKind::kMalformed, pos_, "trailing bytes after message");
    }
  }

 private:
  void Need(size_t n) const {
    if (remaining() < n) {
      throw WireError(WireErrorKind::kMalformed, bytes_.size(), "message truncated");
    }
  }

  ByteView bytes_;
  size_t pos_ = kProtocolIdSize;
};

void WriteResponseBody(Writer& w, const Nonce& device_nonce,
                       const std::vector<Nonce>& pool, const UrlToken& url,
                       const AttReport& report) {
  w.Raw(device_nonce.bytes);
  w.U8(static_cast<uint8_t>(pool.size()));
  for (const Nonce& n : pool) w.Raw(n.bytes);
  w.Url(url);
  w.Report(report);
}

void CheckPool(size_t count) {
  if (count > kMaxPooledNonces) {
    throw WireError(WireErrorKind::kCapacity, 0,
                    "response carries " + std::to_string(count) +
                        " nonces, limit is 129");
  }
  if (count == 0) {
    throw WireError(WireErrorKind::kInvariant, 0,
                    "responses carry at least one pooled nonce");
  }
}

Bytes Encode(const RequestMsg& m) {
  Writer w(kRequestSize);
  w.Id(kIdRequest);
  w.Raw(m.nonce.bytes);
  return w.Take();
}

Bytes Encode(const ResponseMsg& m) {
  CheckPool(m.pooled_nonces.size());
  Writer w(response_size(m.pooled_nonces.size()));
  w.Id(kIdResponse);
  WriteResponseBody(w, m.device_nonce, m.pooled_nonces, m.url, m.att_report);
  w.Raw(m.signature.bytes);
  return w.Take();
}

Bytes Encode(const AnnouncementMsg& m) {
  Writer w(kResponseBaseSize);
  w.Id(kIdAnnouncement);
  WriteResponseBody(w, m.device_nonce, {}, m.url, m.att_report);
  w.Raw(m.signature.bytes);
  return w.Take();
}

Bytes Encode(const ImRequestMsg& m) {
  Writer w(kImRequestSize);
  w.Id(kIdImRequest);
  w.Raw(m.owner_nonce.bytes);
  w.Raw(m.signature.bytes);
  return w.Take();
}

Bytes Encode(const ImResponseMsg& m) {
  Writer w(im_response_size(m.lkh_header.size()));
  w.Id(kIdImResponse);
  for (const PrfOutput& f : m.lkh_header) w.Raw(f.bytes);
  w.Raw(m.iv);
  w.Raw(m.ciphertext);
  w.Raw(m.tag);
  return w.Take();
}

ResponseMsg DecodeResponse(ByteView bytes) {
  Reader r(bytes);
  ResponseMsg m;
  r.Read(m.device_nonce.bytes);
  size_t count_at = r.offset();
  size_t count = r.U8();
  if (count == 0 || count > kMaxPooledNonces) {
    throw WireError(WireErrorKind::kMalformed, count_at,
                    "pool count " + std::to_string(count) + " outside [1, 129]");
  }
  if (bytes.size() < response_size(count)) {
    throw WireError(WireErrorKind::kMalformed, bytes.size(),
                    "message truncated: count " + std::to_string(count) +
                        " needs " + std::to_string(response_size(count)) + " bytes");
  }
  m.pooled_nonces.resize(count);
  for (Nonce& n : m.pooled_nonces) r.Read(n.bytes);
  m.url = r.Url();
  m.att_report = r.Report();
  r.Read(m.signature.bytes);
  r.Finish();
  return m;
}

AnnouncementMsg DecodeAnnouncement(ByteView bytes) {
  Reader r(bytes);
  AnnouncementMsg m;
  r.Read(m.device_nonce.bytes);
  size_t count_at = r.offset();
  if (r.U8() != 0) {
    throw WireError(WireErrorKind::kMalformed, count_at,
                    "announcement count must be zero");
  }
  m.url = r.Url();
  m.att_report = r.Report();
  r.Read(m.signature.bytes);
  r.Finish();
  return m;
}

ImResponseMsg DecodeImResponse(ByteView bytes) {
  if (bytes.size() < kImResponseBaseSize) {
    throw WireError(WireErrorKind::kMalformed, bytes.size(), "message truncated");
  }
  size_t header_bytes = bytes.size() - kImResponseBaseSize;
  if (header_bytes % kPrfOutputSize != 0) {
    throw WireError(WireErrorKind::kMalformed, bytes.size(),
                    "header length is not a multiple of 16");
  }
  Reader r(bytes);
  ImResponseMsg m;
  m.lkh_header.resize(header_bytes / kPrfOutputSize);
  for (PrfOutput& f : m.lkh_header) r.Read(f.bytes);
  r.Read(m.iv);
  r.Read(m.ciphertext);
  r.Read(m.tag);
  r.Finish();
  return m;
}

}  // namespace

UrlToken UrlToken::FromString(std::string_view s) {
  if (s.size() != kUrlTokenSize || !std::all_of(s.begin(), s.end(), Printable)) {
    throw WireError(WireErrorKind::kInvariant, 0,
                    "url token must be 14 printable ASCII characters");
  }
  UrlToken out;
  std::copy(s.begin(), s.end(), out.chars.begin());
  return out;
}

std::string_view to_string(WireErrorKind kind) {
  switch (kind) {
    case WireErrorKind::kUnrecognizedProtocol: return "unrecognized-protocol";
    case WireErrorKind::kMalformed: return "malformed";
    case WireErrorKind::kCapacity: return "capacity-error";
    case WireErrorKind::kInvariant: return "invariant-error";
  }
  return "unknown";
}

size_t response_size(size_t pooled_count) {
  return kResponseBaseSize + kNonceSize * pooled_count;
}

size_t im_response_size(size_t header_levels) {
  return kImResponseBaseSize + kPrfOutputSize * header_levels;
}

Bytes encode(const WireMessage& message) {
  return std::visit([](const auto& m) { return Encode(m); }, message);
}

WireMessage decode(ByteView bytes) {
  if (bytes.size() < kProtocolIdSize) {
    throw WireError(WireErrorKind::kMalformed, bytes.size(),
                    "shorter than a protocol id");
  }
  std::string_view id(reinterpret_cast<const char*>(bytes.data()), kProtocolIdSize);
  if (id == kIdRequest) {
    Reader r(bytes);
    RequestMsg m;
    r.Read(m.nonce.bytes);
    r.Finish();
    return m;
  }
  if (id == kIdResponse) return DecodeResponse(bytes);
  if (id == kIdAnnouncement) return DecodeAnnouncement(bytes);
  if (id == kIdImRequest) {
    Reader r(bytes);
    ImRequestMsg m;
    r.Read(m.owner_nonce.bytes);
    r.Read(m.signature.bytes);
    r.Finish();
    return m;
  }
  if (id == kIdImResponse) return DecodeImResponse(bytes);
  throw WireError(WireErrorKind::kUnrecognizedProtocol, 0,
                  "unrecognized protocol id");
}

Bytes signed_region(const ResponseMsg& message) {
  Bytes full = encode(message);
  full.resize(full.size() - kSignatureSize);
  return full;
}

Bytes signed_region(const AnnouncementMsg& message) {
  Bytes full = encode(message);
  full.resize(full.size() - kSignatureSize);
  return full;
}

Bytes signed_region(const ImRequestMsg& message) {
  Writer w(kProtocolIdSize + kNonceSize);
  w.Id(kIdImRequest);
  w.Raw(message.owner_nonce.bytes);
  return w.Take();
}

Bytes im_associated_data(const ImResponseMsg& message) {
  Writer w(kProtocolIdSize + kPrfOutputSize * message.lkh_header.size());
  w.Id(kIdImResponse);
  for (const PrfOutput& f : message.lkh_header) w.Raw(f.bytes);
  return w.Take();
}

std::array<uint8_t, kImPlaintextSize> encode_plaintext(const ImPlaintext& p) {
  std::array<uint8_t, kImPlaintextSize> out{};
  auto it = std::copy(p.owner_nonce.bytes.begin(), p.owner_nonce.bytes.end(),
                      out.begin());
  *it++ = static_cast<uint8_t>(p.att_result);
  it = std::copy(p.device_info.device_id.begin(), p.device_info.device_id.end(), it);
  *it++ = static_cast<uint8_t>(p.device_info.type_code >> 8);
  *it++ = static_cast<uint8_t>(p.device_info.type_code);
  *it++ = static_cast<uint8_t>(p.device_info.software_version >> 8);
  *it++ = static_cast<uint8_t>(p.device_info.software_version);
  return out;
}

ImPlaintext decode_plaintext(ByteView bytes) {
  if (bytes.size() != kImPlaintextSize) {
    throw WireError(WireErrorKind::kMalformed, bytes.size(),
                    "plaintext must be 96 bytes");
  }
  ImPlaintext p;
  std::copy_n(bytes.begin(), kNonceSize, p.owner_nonce.bytes.begin());
  if (bytes[kNonceSize] > 0x01) {
    throw WireError(WireErrorKind::kMalformed, kNonceSize, "bad att result byte");
  }
  p.att_result = static_cast<AttResult>(bytes[kNonceSize]);
  auto info = bytes.subspan(kNonceSize + 1);
  std::copy_n(info.begin(), kDeviceIdSize, p.device_info.device_id.begin());
  p.device_info.type_code =
      static_cast<uint16_t>((info[kDeviceIdSize] << 8) | info[kDeviceIdSize + 1]);
  p.device_info.software_version =
      static_cast<uint16_t>((info[kDeviceIdSize + 2] << 8) | info[kDeviceIdSize + 3]);
  return p;
}

std::string_view protocol_id(const WireMessage& message) {
  struct Visitor {
    std::string_view operator()(const RequestMsg&) const { return kIdRequest; }
    std::string_view operator()(const ResponseMsg&) const { return kIdResponse; }
    std::string_view operator()(const AnnouncementMsg&) const { return kIdAnnouncement; }
    std::string_view operator()(const ImRequestMsg&) const { return kIdImRequest; }
    std::string_view operator()(const ImResponseMsg&) const { return kIdImResponse; }
  };
  return std::visit(Visitor{}, message);
}

std::string describe(const WireMessage& message) {
  std::ostringstream os;
  Bytes encoded = encode(message);
  os << "kind: " << protocol_id(message) << "\n";
  os << "length: " << encoded.size() << "\n";
  auto report = [&os](const AttReport& r) {
    os << "att_result: " << (r.result == AttResult::kSuccess ? "success" : "fail")
       << "\n";
    os << "t_att: " << r.t_att << "\n";
  };
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RequestMsg>) {
          os << "nonce: " << to_hex(m.nonce.bytes) << "\n";
        } else if constexpr (std::is_same_v<T, ResponseMsg> ||
                             std::is_same_v<T, AnnouncementMsg>) {
          os << "device_nonce: " << to_hex(m.device_nonce.bytes) << "\n";
          if constexpr (std::is_same_v<T, ResponseMsg>) {
            os << "count: " << m.pooled_nonces.size() << "\n";
            for (size_t i = 0; i < m.pooled_nonces.size(); ++i) {
              os << "pooled_nonce[" << i << "]: " << to_hex(m.pooled_nonces[i].bytes)
                 << "\n";
            }
          } else {
            os << "count: 0\n";
          }
          os << "url: " << m.url.str() << "\n";
          report(m.att_report);
          os << "signature: " << to_hex(m.signature.bytes) << "\n";
          Bytes region = signed_region(m);
          os << "signed_region (" << region.size() << " bytes): " << to_hex(region)
             << "\n";
        } else if constexpr (std::is_same_v<T, ImRequestMsg>) {
          os << "owner_nonce: " << to_hex(m.owner_nonce.bytes) << "\n";
          os << "signature: " << to_hex(m.signature.bytes) << "\n";
          Bytes region = signed_region(m);
          os << "signed_region (" << region.size() << " bytes): " << to_hex(region)
             << "\n";
        } else {
          os << "header_levels: " << m.lkh_header.size() << "\n";
          for (size_t i = 0; i < m.lkh_header.size(); ++i) {
            os << "header[" << i + 1 << "]: " << to_hex(m.lkh_header[i].bytes) << "\n";
          }
          os << "iv: " << to_hex(m.iv) << "\n";
          os << "ciphertext: " << to_hex(m.ciphertext) << "\n";
          os << "tag: " << to_hex(m.tag) << "\n";
        }
      },
      message);
  return os.str();
}

}  // namespace dbpaisa
