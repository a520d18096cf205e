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

#ifndef DBPAISA_IM_PROTOCOL_H_
#define DBPAISA_IM_PROTOCOL_H_

#include <memory>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "dbpaisa/crypto.h"
#include "dbpaisa/key_retrieval.h"
#include "dbpaisa/registration.h"
#include "dbpaisa/sim_time.h"
#include "dbpaisa/wire.h"

namespace dbpaisa {

enum class ImDeviceState { kWait, kVerify, kAtt, kGen };
std::string_view to_string(ImDeviceState s);

struct ImDeviceConfig {
  ImProvisioningRecord record;
  Bytes memory_image;
  DeviceInfo info;
  std::vector<SymmetricKey> lkh_keys;  // empty: naive retrieval deployment
  SimTime t_verify = from_seconds(0.010);
  SimTime t_res = from_seconds(0.233);
};

struct ImDeviceCounters {
  uint64_t verifications = 0;
  uint64_t wasted_verifications = 0;  // requests dropped after Verify
  uint64_t attestations = 0;
  uint64_t responses = 0;
  uint64_t frames_ignored = 0;
  SimTime busy{0};
};

struct ImEmission {
  Bytes frame;
  SimTime ready_at{0};  // when the radio gets it
};

// IM-PAISA trusted software on one device. Requests are served one at a time;
// a request arriving while busy starts when the previous one finishes.
class ImDevice {
 public:
  ImDevice(ImDeviceConfig config, Rng rng);

  std::optional<ImEmission> OnFrame(ByteView bytes, SimTime now);

  ImDeviceState state() const { return state_; }
  // States visited while handling the most recent frame.
  const std::vector<ImDeviceState>& trace() const { return trace_; }
  const ImDeviceCounters& counters() const { return counters_; }
  const ImDeviceConfig& config() const { return config_; }
  Bytes& memory_image() { return config_.memory_image; }

 private:
  void Enter(ImDeviceState s);

  ImDeviceConfig config_;
  Rng rng_;
  ImDeviceState state_ = ImDeviceState::kWait;
  std::vector<ImDeviceState> trace_;
  SimTime busy_until_{0};
  ImDeviceCounters counters_;
};

enum class OwnerReject { kForgedOrForeign, kReplay, kMalformed };
std::string_view to_string(OwnerReject r);

struct OwnerReceipt {
  DeviceId device_id{};
  AttResult att_result = AttResult::kFail;
  DeviceInfo info;
  uint64_t key_trials = 0;  // AEAD trials (naive) or PRF evaluations (LKH)
};

using OwnerResult = std::variant<OwnerReceipt, OwnerReject>;

enum class RetrievalMode { kNaive, kNaiveParallel, kLkh };

class Owner {
 public:
  Owner(SigningKeyPair keys, OwnerKeyTable table, Rng rng);

  // Switches to LKH retrieval. `leaf_ids[i]` is the device holding leaf i.
  void EnableLkh(std::shared_ptr<const KeyTree> tree, std::vector<DeviceId> leaf_ids);
  void set_mode(RetrievalMode mode) { mode_ = mode; }
  RetrievalMode mode() const { return mode_; }

  Bytes MakeRequest();
  std::optional<Nonce> outstanding() const { return outstanding_; }
  OwnerResult Receive(ByteView bytes) const;

  const PublicKey& public_key() const { return keys_.public_key; }
  const OwnerKeyTable& table() const { return table_; }

 private:
  SigningKeyPair keys_;
  OwnerKeyTable table_;
  std::vector<SymmetricKey> flat_keys_;
  Rng rng_;
  RetrievalMode mode_ = RetrievalMode::kNaive;
  std::shared_ptr<const KeyTree> tree_;
  std::vector<DeviceId> leaf_ids_;
  std::optional<Nonce> outstanding_;
};

// Owner plus n provisioned devices sharing one software image.
struct ImFleet {
  std::unique_ptr<Owner> owner;
  std::vector<ImDevice> devices;
  std::shared_ptr<const KeyTree> tree;  // null in naive deployments
};

struct ImFleetOptions {
  size_t devices = 10;
  bool lkh = false;
  size_t arity = 2;
  size_t image_size = 1024;
  SimTime t_verify = from_seconds(0.010);
  SimTime t_res = from_seconds(0.233);
};

ImFleet make_im_fleet(const ImFleetOptions& options, Rng& rng);

}  // namespace dbpaisa

#endif  // DBPAISA_IM_PROTOCOL_H_
