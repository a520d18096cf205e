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

#ifndef DBPAISA_USER_AGENT_H_
#define DBPAISA_USER_AGENT_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "dbpaisa/crypto.h"
#include "dbpaisa/registration.h"
#include "dbpaisa/sim_time.h"
#include "dbpaisa/wire.h"

namespace dbpaisa {

inline constexpr SimTime kDefaultScanWindow = std::chrono::seconds(10);

struct PendingRequest {
  Nonce nonce;
  SimTime sent_at{0};
  SimTime scan_window = kDefaultScanWindow;

  bool open_at(SimTime now) const {
    return now >= sent_at && now <= sent_at + scan_window;
  }
};

enum class ReportSource { kResponse, kAnnouncement };
std::string_view to_string(ReportSource s);

struct DeviceReport {
  Manifest manifest;
  AttResult att_result = AttResult::kFail;
  uint32_t att_age = 0;  // seconds
  bool verified = false;
  SimTime received_at{0};
  ReportSource source = ReportSource::kResponse;
  Nonce device_nonce;
  UrlToken url;
};

enum class DiscardReason {
  kMalformed,
  kStaleOrReplay,
  kManifestUnavailable,
  kManifestInvalid,
  kSignatureInvalid,
};
std::string_view to_string(DiscardReason r);

using ReceiveResult = std::variant<DeviceReport, DiscardReason>;

struct RequestOptions {
  SimTime scan_window = kDefaultScanWindow;
};

std::pair<Bytes, PendingRequest> make_request(Rng& rng, SimTime now,
                                              RequestOptions options = {});

struct ReceiveOptions {
  // Announcements carry no user nonce. When false they are discarded as
  // stale-or-replay.
  bool accept_announcements = true;
};

// Full reception pipeline for one DP-RES or DP-ANN frame. Any other frame
// type is reported as malformed.
ReceiveResult on_response(std::span<const PendingRequest> pending, ByteView bytes,
                          const ManifestStore& store, const TrustStore& trust,
                          SimTime now, ReceiveOptions options = {});

// Collapses reports with the same device nonce, keeping the latest.
std::vector<DeviceReport> dedup(const std::vector<DeviceReport>& reports);

// Stateful user: tracks its own outstanding requests and reception counts.
class UserAgent {
 public:
  UserAgent(const ManifestStore& store, const TrustStore& trust, Rng rng,
            RequestOptions request_options = {}, ReceiveOptions receive_options = {});

  Bytes MakeRequest(SimTime now);
  // Returns nothing for frames a user does not consume (requests, IM frames)
  // and for exact repeats of a frame processed within the last scan window.
  std::optional<ReceiveResult> OnFrame(ByteView bytes, SimTime now);

  const std::vector<PendingRequest>& pending() const { return pending_; }
  const std::vector<DeviceReport>& reports() const { return reports_; }
  const std::map<DiscardReason, uint64_t>& discards() const { return discards_; }
  uint64_t duplicates() const { return duplicates_; }
  uint64_t requests_sent() const { return requests_sent_; }
  // Gap between each request and the first verified report answering it.
  const std::vector<SimTime>& first_report_latency() const { return latency_; }

 private:
  void Expire(SimTime now);

  const ManifestStore& store_;
  const TrustStore& trust_;
  Rng rng_;
  RequestOptions request_options_;
  ReceiveOptions receive_options_;

  std::vector<PendingRequest> pending_;
  std::vector<bool> answered_;
  std::map<std::array<uint8_t, kDigestSize>, SimTime> seen_frames_;
  std::vector<DeviceReport> reports_;
  std::map<DiscardReason, uint64_t> discards_;
  uint64_t duplicates_ = 0;
  uint64_t requests_sent_ = 0;
  std::vector<SimTime> latency_;
};

}  // namespace dbpaisa

#endif  // DBPAISA_USER_AGENT_H_
