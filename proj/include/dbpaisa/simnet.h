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

#ifndef DBPAISA_SIMNET_H_
#define DBPAISA_SIMNET_H_

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbpaisa/crypto.h"
#include "dbpaisa/device_fsm.h"
#include "dbpaisa/im_protocol.h"
#include "dbpaisa/registration.h"
#include "dbpaisa/sim_time.h"
#include "dbpaisa/user_agent.h"
#include "dbpaisa/wire.h"

namespace dbpaisa::sim {

using NodeId = size_t;
using LinkAddress = std::array<uint8_t, 6>;
using Uuid = std::array<uint8_t, 16>;

struct LinkConfig {
  double p_loss = 0;
  SimTime latency_min = std::chrono::milliseconds(1);
  SimTime latency_max = std::chrono::milliseconds(10);
  bool randomize_addresses = true;
  int retransmit_count = 10;
  SimTime retransmit_gap = std::chrono::milliseconds(30);
  // Added to user-visible latency only; manifests resolve instantly in sim.
  SimTime manifest_fetch_delay = from_seconds(1.3);
};

void validate(const LinkConfig& link);  // throws ParameterError

struct Frame {
  NodeId sender = 0;
  LinkAddress src_addr{};
  Uuid uuid{};
  Bytes payload;
  size_t on_air_bytes = 0;  // payload plus any padding
  SimTime sent_at{0};
};

// Base counters the world keeps for every node.
struct LinkCounters {
  uint64_t frames_tx = 0;
  uint64_t bytes_tx = 0;
  uint64_t frames_rx = 0;
  uint64_t bytes_rx = 0;
  uint64_t frames_lost = 0;  // deliveries to this node dropped by the link
};

class World;

class Node {
 public:
  virtual ~Node() = default;
  virtual std::string kind() const = 0;
  virtual void OnStart(World&) {}
  virtual void OnFrame(World&, const Frame&) {}
  virtual void OnTimer(World&, uint64_t) {}
  // Node-specific metrics; must be deterministic.
  virtual nlohmann::ordered_json Metrics(const World&) const { return nlohmann::ordered_json::object(); }

  NodeId id() const { return id_; }
  int domain() const { return domain_; }
  const std::string& name() const { return name_; }
  Rng& rng() { return *rng_; }

 private:
  friend class World;
  NodeId id_ = 0;
  int domain_ = 0;
  std::string name_;
  std::unique_ptr<Rng> rng_;
};

// Deterministic discrete-event broadcast medium. Strictly single-threaded.
class World {
 public:
  World(uint64_t seed, LinkConfig link = {});

  // Nodes get their RNG from (seed, id). Returns the node id.
  NodeId AddNode(std::unique_ptr<Node> node, std::string name, int domain = 0);
  template <typename T>
  T& node(NodeId id) { return dynamic_cast<T&>(*nodes_.at(id)); }
  template <typename T>
  const T& node(NodeId id) const { return dynamic_cast<const T&>(*nodes_.at(id)); }
  size_t node_count() const { return nodes_.size(); }

  // Sends now. Throws WireError(kCapacity) above the frame budget. `pad_to`
  // raises the on-air size without changing the payload.
  void Broadcast(NodeId sender, Bytes payload, size_t pad_to = 0);
  // Sends at `at` (>= now).
  void BroadcastAt(NodeId sender, SimTime at, Bytes payload, size_t pad_to = 0);
  // Ten copies 30 ms apart under the default link config.
  void BroadcastWithRetransmit(NodeId sender, Bytes payload);
  void SetTimer(NodeId node, SimTime at, uint64_t tag);

  void RunUntil(SimTime horizon);
  SimTime now() const { return now_; }
  SimTime horizon() const { return horizon_; }
  uint64_t seed() const { return seed_; }
  const LinkConfig& link() const { return link_; }
  const LinkCounters& counters(NodeId id) const { return counters_.at(id); }
  uint64_t events_processed() const { return events_processed_; }

  // Full deterministic metrics document.
  nlohmann::ordered_json Metrics() const;
  // One row per node with the link counters and busy fraction when present.
  std::string MetricsCsv() const;

 private:
  enum class Kind : uint8_t { kDeliver = 0, kTimer = 1, kNodeAction = 2 };
  struct Event {
    SimTime time;
    Kind kind;
    uint64_t seq;
    NodeId target;
    uint64_t tag = 0;
    std::shared_ptr<const Frame> frame;
    bool operator>(const Event& o) const {
      if (time != o.time) return time > o.time;
      if (kind != o.kind) return kind > o.kind;
      return seq > o.seq;
    }
  };

  void Push(Event e);
  void Transmit(NodeId sender, Bytes payload, size_t pad_to);

  uint64_t seed_;
  LinkConfig link_;
  Rng link_rng_;
  SimTime now_{0};
  SimTime horizon_{0};
  bool started_ = false;
  uint64_t seq_ = 0;
  uint64_t events_processed_ = 0;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::vector<LinkCounters> counters_;
  std::vector<LinkAddress> fixed_addr_;
};

// ---- Nodes ----

// Busy seconds that fall inside [0, horizon].
double busy_within(SimTime busy, SimTime busy_end, SimTime horizon);

struct DbDeviceOptions {
  size_t announcement_pad = 0;  // on-air padding for DP-ANN frames
  std::optional<SimTime> tamper_at;  // flip one image byte at this time
};

class DbDeviceNode : public Node {
 public:
  DbDeviceNode(DeviceConfig config, DbDeviceOptions options = {});
  std::string kind() const override { return "db-device"; }
  void OnStart(World& w) override;
  void OnFrame(World& w, const Frame& f) override;
  void OnTimer(World& w, uint64_t tag) override;
  nlohmann::ordered_json Metrics(const World& w) const override;

  const DeviceFsm& fsm() const { return *fsm_; }
  double busy_fraction(const World& w) const;

 private:
  void Emit(World& w, DeviceOutput out);
  void Rearm(World& w);

  DeviceConfig config_;
  DbDeviceOptions options_;
  std::unique_ptr<DeviceFsm> fsm_;
  uint64_t generation_ = 0;
  std::optional<SimTime> armed_;
  static constexpr uint64_t kTamperTag = ~uint64_t{0};
};

struct Arrival {
  enum class Model { kNone, kPeriodic, kPoisson, kBurst };
  Model model = Model::kNone;
  SimTime start{0};
  SimTime period = from_seconds(10);  // periodic
  double rate_per_hour = 10;          // poisson
  size_t burst_count = 0;             // burst
  SimTime burst_spacing = std::chrono::microseconds(500);
  std::optional<SimTime> stop;
};

struct Shared {
  ManifestStore store;
  TrustStore trust;
};

class UserNode : public Node {
 public:
  UserNode(std::shared_ptr<const Shared> shared, Arrival arrival,
           RequestOptions request = {}, ReceiveOptions receive = {});
  std::string kind() const override { return "user"; }
  void OnStart(World& w) override;
  void OnFrame(World& w, const Frame& f) override;
  void OnTimer(World& w, uint64_t tag) override;
  nlohmann::ordered_json Metrics(const World& w) const override;

  const UserAgent& agent() const { return *agent_; }
  // Request from outside the arrival model.
  void RequestNow(World& w);

 private:
  void ScheduleNext(World& w, SimTime after);

  std::shared_ptr<const Shared> shared_;
  Arrival arrival_;
  RequestOptions request_;
  ReceiveOptions receive_;
  std::unique_ptr<UserAgent> agent_;
  size_t burst_sent_ = 0;
};

enum class Behavior { kFlood, kReplay, kForgeResponse, kForgeRequest, kEavesdrop };
std::string_view to_string(Behavior b);

struct AdversaryConfig {
  Behavior behavior = Behavior::kEavesdrop;
  double rate = 1;  // frames per second for flood and forge
  SimTime start{0};
  std::optional<SimTime> stop;
  // Replay: recorded frames are re-sent at these times.
  std::vector<SimTime> replay_at;
  // Frames heard after this time are not recorded.
  std::optional<SimTime> record_until;
};

class AdversaryNode : public Node {
 public:
  explicit AdversaryNode(AdversaryConfig config);
  std::string kind() const override { return "adversary"; }
  void OnStart(World& w) override;
  void OnFrame(World& w, const Frame& f) override;
  void OnTimer(World& w, uint64_t tag) override;
  nlohmann::ordered_json Metrics(const World& w) const override;

  // Every frame heard (up to record_until), in arrival order.
  const std::vector<Frame>& recorded() const { return recorded_; }
  uint64_t sent() const { return sent_; }

 private:
  Bytes ForgeResponse();
  Bytes ForgeRequest();

  AdversaryConfig config_;
  std::vector<Frame> recorded_;
  std::optional<ResponseMsg> template_;
  uint64_t sent_ = 0;
  size_t replay_index_ = 0;
};

class ImDeviceNode : public Node {
 public:
  explicit ImDeviceNode(ImDevice device);
  std::string kind() const override { return "im-device"; }
  void OnFrame(World& w, const Frame& f) override;
  nlohmann::ordered_json Metrics(const World& w) const override;
  const ImDevice& device() const { return device_; }
  ImDevice& device() { return device_; }

 private:
  ImDevice device_;
};

struct OwnerSchedule {
  SimTime start = from_seconds(1);
  SimTime interval = from_seconds(1);
  size_t rounds = 1;
};

class OwnerNode : public Node {
 public:
  OwnerNode(std::unique_ptr<Owner> owner, OwnerSchedule schedule);
  std::string kind() const override { return "owner"; }
  void OnStart(World& w) override;
  void OnFrame(World& w, const Frame& f) override;
  void OnTimer(World& w, uint64_t tag) override;
  nlohmann::ordered_json Metrics(const World& w) const override;

  const Owner& owner() const { return *owner_; }
  Owner& owner() { return *owner_; }
  const std::vector<OwnerReceipt>& receipts() const { return receipts_; }
  const std::map<OwnerReject, uint64_t>& rejects() const { return rejects_; }

 private:
  std::unique_ptr<Owner> owner_;
  OwnerSchedule schedule_;
  size_t rounds_done_ = 0;
  std::vector<OwnerReceipt> receipts_;
  std::map<OwnerReject, uint64_t> rejects_;
};

}  // namespace dbpaisa::sim

#endif  // DBPAISA_SIMNET_H_
