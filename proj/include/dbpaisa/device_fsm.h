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

#ifndef DBPAISA_DEVICE_FSM_H_
#define DBPAISA_DEVICE_FSM_H_

#include <deque>
#include <optional>
#include <string_view>
#include <vector>

#include "dbpaisa/crypto.h"
#include "dbpaisa/registration.h"
#include "dbpaisa/sim_time.h"
#include "dbpaisa/wire.h"

namespace dbpaisa {

enum class DeviceState { kWait, kAtt, kRcv, kGen };
enum class DeviceMode { kPull, kPush, kBlend };

std::string_view to_string(DeviceState s);
std::string_view to_string(DeviceMode m);

// Threshold-triggered switch from Pull to Push.
struct BlendPolicy {
  size_t switch_threshold = 20;            // requests in the trailing window
  SimTime window = from_seconds(5);
  SimTime push_period = from_seconds(30);
  SimTime announce_interval = from_seconds(5);
};

void validate(const BlendPolicy& policy);  // throws ParameterError

struct RandomDeletionPolicy {
  bool enabled = false;
  size_t cap = 0;  // 0 means 2 * pool_max
};

struct DeviceConfig {
  DeviceProvisioningRecord provisioning;
  Bytes memory_image;
  SimTime t_res = from_seconds(0.233);
  SimTime t_att_exec = from_seconds(0.001);
  DeviceMode mode = DeviceMode::kPull;
  SimTime push_interval = from_seconds(1);  // T_ann in pure Push mode
  BlendPolicy blend;
  RandomDeletionPolicy deletion;
};

struct DeviceCounters {
  SimTime busy{0};
  SimTime busy_end{0};  // end of the latest busy interval
  uint64_t signatures = 0;
  uint64_t attestations = 0;  // periodic T_att events, boot measurement excluded
  uint64_t responses = 0;
  uint64_t announcements = 0;
  uint64_t requests_received = 0;
  uint64_t frames_ignored = 0;
  uint64_t nonces_dropped = 0;
  uint64_t push_activations = 0;
  size_t max_pool_tmp = 0;
  std::vector<SimTime> response_times;
  std::vector<SimTime> announcement_times;
  std::vector<SimTime> attestation_times;
  std::vector<AttReport> reported;  // att report of every emitted message
};

// Frames handed to the radio at one instant.
struct DeviceOutput {
  std::vector<Bytes> responses;
  std::vector<Bytes> announcements;
  bool empty() const { return responses.empty() && announcements.empty(); }
};

// DB-PAISA trusted software on one device. Single-threaded; the owner drives
// it with frames and timer callbacks in non-decreasing time order.
//
// Response generation is split in two: the response is composed and signed
// when Gen is entered and handed to the radio t_res later. Requests that
// arrive in between go to the temporary pool.
class DeviceFsm {
 public:
  DeviceFsm(DeviceConfig config, Rng rng, SimTime boot_time = SimTime::zero());

  DeviceOutput on_frame(ByteView payload, SimTime now);
  // Processes every deadline that is due at or before `now`. Calls with no
  // due deadline are no-ops.
  DeviceOutput on_timer(SimTime now);
  // Earliest pending deadline, if any.
  std::optional<SimTime> next_deadline() const;

  AttResult attest_now(SimTime now);

  DeviceState state() const { return state_; }
  DeviceMode mode() const { return config_.mode; }
  bool push_active(SimTime now) const;
  const std::vector<Nonce>& pool() const { return pool_; }
  const std::vector<Nonce>& pool_tmp() const { return pool_tmp_; }
  std::optional<SimTime> gen_deadline() const { return gen_deadline_; }
  SimTime next_att_time() const { return next_att_time_; }
  SimTime last_att_time() const { return last_att_time_; }
  AttResult att_result() const { return att_result_; }
  const DeviceCounters& counters() const { return counters_; }
  const DeviceConfig& config() const { return config_; }
  size_t deletion_cap() const;

  // Normal-world memory; malware may rewrite it at any time.
  Bytes& memory_image() { return config_.memory_image; }

 private:
  enum class InFlight { kNone, kResponse, kAnnouncement };

  void BeginResponse(SimTime now);
  void BeginAnnouncement(SimTime now);
  void FinishGen(SimTime now, DeviceOutput& out);
  void RunAttestationTick(SimTime now);
  void BlendStep(SimTime now);
  void RandomDelete();
  void AddBusy(SimTime now, SimTime duration);
  AttReport CurrentReport(SimTime now) const;

  DeviceConfig config_;
  Rng rng_;

  DeviceState state_ = DeviceState::kWait;
  std::vector<Nonce> pool_;
  std::vector<Nonce> pool_tmp_;
  std::optional<SimTime> gen_deadline_;
  std::optional<SimTime> stashed_gen_deadline_;
  SimTime last_att_time_{0};
  SimTime next_att_time_{0};
  AttResult att_result_ = AttResult::kFail;

  InFlight in_flight_ = InFlight::kNone;
  Bytes in_flight_bytes_;
  std::optional<SimTime> gen_done_at_;

  std::optional<SimTime> next_announce_at_;
  std::optional<SimTime> push_until_;
  std::deque<SimTime> recent_requests_;

  DeviceCounters counters_;
};

}  // namespace dbpaisa

#endif  // DBPAISA_DEVICE_FSM_H_
