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

#include "dbpaisa/user_agent.h"

#include <algorithm>

namespace dbpaisa {

std::string_view to_string(ReportSource s) {
  return s == ReportSource::kResponse ? "response" : "announcement";
}

std::string_view to_string(DiscardReason r) {
  switch (r) {
    case DiscardReason::kMalformed: return "malformed";
    case DiscardReason::kStaleOrReplay: return "stale-or-replay";
    case DiscardReason::kManifestUnavailable: return "manifest-unavailable";
    case DiscardReason::kManifestInvalid: return "manifest-invalid";
    case DiscardReason::kSignatureInvalid: return "signature-invalid";
  }
  return "unknown";
}

std::pair<Bytes, PendingRequest> make_request(Rng& rng, SimTime now,
                                              RequestOptions options) {
  RequestMsg req;
  rng.Fill(req.nonce.bytes);
  return {encode(req), PendingRequest{req.nonce, now, options.scan_window}};
}

namespace {

bool HasOpenNonce(std::span<const PendingRequest> pending,
                  const std::vector<Nonce>& pooled, SimTime now) {
  for (const auto& p : pending) {
    if (!p.open_at(now)) continue;
    if (std::find(pooled.begin(), pooled.end(), p.nonce) != pooled.end()) return true;
  }
  return false;
}

template <typename Msg>
ReceiveResult Finish(const Msg& msg, ReportSource source, const ManifestStore& store,
                     const TrustStore& trust, SimTime now) {
  auto stored = resolve_manifest(store, msg.url);
  if (!stored) return DiscardReason::kManifestUnavailable;
  auto checked = verify_manifest(stored->manifest, stored->signature, trust);
  if (!std::holds_alternative<Manifest>(checked)) return DiscardReason::kManifestInvalid;
  Manifest& manifest = std::get<Manifest>(checked);
  if (!verify(manifest.device_public_key, signed_region(msg), msg.signature)) {
    return DiscardReason::kSignatureInvalid;
  }
  DeviceReport report;
  report.manifest = std::move(manifest);
  report.att_result = msg.att_report.result;
  report.att_age = msg.att_report.t_att;
  report.verified = true;
  report.received_at = now;
  report.source = source;
  report.device_nonce = msg.device_nonce;
  report.url = msg.url;
  return report;
}

}  // namespace

ReceiveResult on_response(std::span<const PendingRequest> pending, ByteView bytes,
                          const ManifestStore& store, const TrustStore& trust,
                          SimTime now, ReceiveOptions options) {
  WireMessage msg;
  try {
    msg = decode(bytes);
  } catch (const WireError&) {
    return DiscardReason::kMalformed;
  }
  if (auto* resp = std::get_if<ResponseMsg>(&msg)) {
    if (!HasOpenNonce(pending, resp->pooled_nonces, now)) {
      return DiscardReason::kStaleOrReplay;
    }
    return Finish(*resp, ReportSource::kResponse, store, trust, now);
  }
  if (auto* ann = std::get_if<AnnouncementMsg>(&msg)) {
    if (!options.accept_announcements) return DiscardReason::kStaleOrReplay;
    return Finish(*ann, ReportSource::kAnnouncement, store, trust, now);
  }
  return DiscardReason::kMalformed;
}

std::vector<DeviceReport> dedup(const std::vector<DeviceReport>& reports) {
  std::map<Nonce, size_t> latest;
  std::vector<DeviceReport> out;
  for (const auto& r : reports) {
    auto [it, inserted] = latest.emplace(r.device_nonce, out.size());
    if (inserted) {
      out.push_back(r);
    } else if (r.received_at >= out[it->second].received_at) {
      out[it->second] = r;
    }
  }
  return out;
}

UserAgent::UserAgent(const ManifestStore& store, const TrustStore& trust, Rng rng,
                     RequestOptions request_options, ReceiveOptions receive_options)
    : store_(store),
      trust_(trust),
      rng_(std::move(rng)),
      request_options_(request_options),
      receive_options_(receive_options) {}

void UserAgent::Expire(SimTime now) {
  size_t keep = 0;
  for (size_t i = 0; i < pending_.size(); ++i) {
    if (now <= pending_[i].sent_at + pending_[i].scan_window) {
      pending_[keep] = pending_[i];
      answered_[keep] = answered_[i];
      ++keep;
    }
  }
  pending_.resize(keep);
  answered_.resize(keep);
}

Bytes UserAgent::MakeRequest(SimTime now) {
  Expire(now);
  auto [bytes, pending] = make_request(rng_, now, request_options_);
  pending_.push_back(pending);
  answered_.push_back(false);
  ++requests_sent_;
  return bytes;
}

std::optional<ReceiveResult> UserAgent::OnFrame(ByteView bytes, SimTime now) {
  if (bytes.size() >= kProtocolIdSize) {
    std::string_view id(reinterpret_cast<const char*>(bytes.data()), kProtocolIdSize);
    if (id == kIdRequest || id == kIdImRequest || id == kIdImResponse) return std::nullopt;
  }
  const SimTime window = request_options_.scan_window;
  auto [it, fresh] = seen_frames_.try_emplace(hash_image(bytes).bytes, now);
  if (!fresh) {
    if (now - it->second <= window) {
      ++duplicates_;
      return std::nullopt;
    }
    it->second = now;
  }
  if (seen_frames_.size() > 4096) {
    std::erase_if(seen_frames_, [&](const auto& e) { return now - e.second > window; });
  }
  Expire(now);
  ReceiveResult result =
      on_response(pending_, bytes, store_, trust_, now, receive_options_);
  if (auto* report = std::get_if<DeviceReport>(&result)) {
    reports_.push_back(*report);
    if (report->source == ReportSource::kResponse) {
      auto msg = std::get<ResponseMsg>(decode(bytes));
      for (size_t i = 0; i < pending_.size(); ++i) {
        if (answered_[i]) continue;
        const auto& pooled = msg.pooled_nonces;
        if (std::find(pooled.begin(), pooled.end(), pending_[i].nonce) != pooled.end()) {
          answered_[i] = true;
          latency_.push_back(now - pending_[i].sent_at);
        }
      }
    }
  } else {
    ++discards_[std::get<DiscardReason>(result)];
  }
  return result;
}

}  // namespace dbpaisa
