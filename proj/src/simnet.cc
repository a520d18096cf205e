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

#include "dbpaisa/simnet.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dbpaisa::sim {

using nlohmann::ordered_json;

namespace {

bool HasId(const Bytes& payload, std::string_view id) {
  return payload.size() >= kProtocolIdSize &&
         std::equal(id.begin(), id.end(), payload.begin());
}

}  // namespace

void validate(const LinkConfig& link) {
  if (!(link.p_loss >= 0 && link.p_loss <= 1)) {
    throw ParameterError("p_loss must lie in [0, 1]");
  }
  if (link.latency_min < SimTime::zero() || link.latency_max < link.latency_min) {
    throw ParameterError("latency bounds must satisfy 0 <= min <= max");
  }
  if (link.retransmit_count < 1) throw ParameterError("retransmit_count must be >= 1");
  if (link.retransmit_gap < SimTime::zero()) throw ParameterError("retransmit gap must be >= 0");
}

World::World(uint64_t seed, LinkConfig link)
    : seed_(seed), link_(link), link_rng_(Rng::Derive(seed, ~uint64_t{0})) {
  validate(link_);
}

NodeId World::AddNode(std::unique_ptr<Node> node, std::string name, int domain) {
  if (started_) throw std::logic_error("nodes must be added before the run starts");
  NodeId id = nodes_.size();
  node->id_ = id;
  node->domain_ = domain;
  node->name_ = std::move(name);
  node->rng_ = std::make_unique<Rng>(Rng::Derive(seed_, id));
  LinkAddress addr{};
  link_rng_.Fill(addr);
  fixed_addr_.push_back(addr);
  nodes_.push_back(std::move(node));
  counters_.emplace_back();
  return id;
}

void World::Push(Event e) {
  if (e.time < now_) throw std::logic_error("event scheduled in the past");
  e.seq = seq_++;
  queue_.push(std::move(e));
}

void World::Transmit(NodeId sender, Bytes payload, size_t pad_to) {
  if (payload.size() > kMaxFrameBytes) {
    throw WireError(WireErrorKind::kCapacity, 0,
                    "frame of " + std::to_string(payload.size()) + " bytes exceeds budget");
  }
  auto frame = std::make_shared<Frame>();
  frame->sender = sender;
  if (link_.randomize_addresses) {
    link_rng_.Fill(frame->src_addr);
    link_rng_.Fill(frame->uuid);
  } else {
    frame->src_addr = fixed_addr_[sender];
    std::copy(frame->src_addr.begin(), frame->src_addr.end(), frame->uuid.begin());
  }
  frame->on_air_bytes = std::max(payload.size(), pad_to);
  frame->payload = std::move(payload);
  frame->sent_at = now_;

  LinkCounters& tx = counters_[sender];
  ++tx.frames_tx;
  tx.bytes_tx += frame->on_air_bytes;

  const uint64_t spread =
      static_cast<uint64_t>((link_.latency_max - link_.latency_min).count());
  for (NodeId to = 0; to < nodes_.size(); ++to) {
    if (to == sender || nodes_[to]->domain_ != nodes_[sender]->domain_) continue;
    bool lost = link_.p_loss > 0 && link_rng_.NextUnit() < link_.p_loss;
    SimTime latency = link_.latency_min + SimTime(link_rng_.Below(spread + 1));
    if (lost) {
      ++counters_[to].frames_lost;
      continue;
    }
    Push(Event{now_ + latency, Kind::kDeliver, 0, to, 0, frame});
  }
}

void World::Broadcast(NodeId sender, Bytes payload, size_t pad_to) {
  Transmit(sender, std::move(payload), pad_to);
}

void World::BroadcastAt(NodeId sender, SimTime at, Bytes payload, size_t pad_to) {
  if (payload.size() > kMaxFrameBytes) {
    throw WireError(WireErrorKind::kCapacity, 0, "frame exceeds budget");
  }
  auto frame = std::make_shared<Frame>();
  frame->payload = std::move(payload);
  frame->on_air_bytes = pad_to;
  Push(Event{std::max(at, now_), Kind::kNodeAction, 0, sender, 0, std::move(frame)});
}

void World::BroadcastWithRetransmit(NodeId sender, Bytes payload) {
  for (int k = 1; k < link_.retransmit_count; ++k) {
    BroadcastAt(sender, now_ + k * link_.retransmit_gap, payload);
  }
  Transmit(sender, std::move(payload), 0);
}

void World::SetTimer(NodeId node, SimTime at, uint64_t tag) {
  Push(Event{std::max(at, now_), Kind::kTimer, 0, node, tag, nullptr});
}

void World::RunUntil(SimTime horizon) {
  horizon_ = std::max(horizon_, horizon);
  if (!started_) {
    started_ = true;
    for (auto& n : nodes_) n->OnStart(*this);
  }
  while (!queue_.empty() && queue_.top().time <= horizon) {
    Event e = queue_.top();
    queue_.pop();
    now_ = e.time;
    ++events_processed_;
    switch (e.kind) {
      case Kind::kDeliver:
        ++counters_[e.target].frames_rx;
        counters_[e.target].bytes_rx += e.frame->on_air_bytes;
        nodes_[e.target]->OnFrame(*this, *e.frame);
        break;
      case Kind::kTimer:
        nodes_[e.target]->OnTimer(*this, e.tag);
        break;
      case Kind::kNodeAction:
        Transmit(e.target, e.frame->payload, e.frame->on_air_bytes);
        break;
    }
  }
  now_ = std::max(now_, horizon);
}

ordered_json World::Metrics() const {
  ordered_json doc;
  doc["seed"] = seed_;
  doc["horizon_s"] = to_seconds(horizon_);
  doc["events"] = events_processed_;
  ordered_json nodes = ordered_json::array();
  for (const auto& n : nodes_) {
    const LinkCounters& c = counters_[n->id()];
    ordered_json j;
    j["id"] = n->id();
    j["name"] = n->name();
    j["kind"] = n->kind();
    j["domain"] = n->domain();
    j["frames_tx"] = c.frames_tx;
    j["bytes_tx"] = c.bytes_tx;
    j["frames_rx"] = c.frames_rx;
    j["bytes_rx"] = c.bytes_rx;
    j["frames_lost"] = c.frames_lost;
    double h = to_seconds(horizon_);
    j["tx_bps"] = h > 0 ? 8.0 * static_cast<double>(c.bytes_tx) / h : 0.0;
    j.update(n->Metrics(*this));
    nodes.push_back(std::move(j));
  }
  doc["nodes"] = std::move(nodes);
  return doc;
}

std::string World::MetricsCsv() const {
  std::ostringstream out;
  out << "id,name,kind,frames_tx,bytes_tx,frames_rx,bytes_rx,frames_lost,busy_fraction,"
         "signatures,attestations\n";
  ordered_json doc = Metrics();
  for (const auto& j : doc["nodes"]) {
    out << j["id"].get<size_t>() << "," << j["name"].get<std::string>() << ","
        << j["kind"].get<std::string>() << "," << j["frames_tx"] << "," << j["bytes_tx"]
        << "," << j["frames_rx"] << "," << j["bytes_rx"] << "," << j["frames_lost"] << ","
        << j.value("busy_fraction", 0.0) << "," << j.value("signatures", uint64_t{0}) << ","
        << j.value("attestations", uint64_t{0}) << "\n";
  }
  return out.str();
}

double busy_within(SimTime busy, SimTime busy_end, SimTime horizon) {
  SimTime overrun = std::max(SimTime::zero(), busy_end - horizon);
  return std::max(0.0, to_seconds(busy - overrun));
}

// ---- DB device ----

DbDeviceNode::DbDeviceNode(DeviceConfig config, DbDeviceOptions options)
    : config_(std::move(config)), options_(options) {}

void DbDeviceNode::OnStart(World& w) {
  fsm_ = std::make_unique<DeviceFsm>(config_, Rng(rng().NextU64()), w.now());
  if (options_.tamper_at) w.SetTimer(id(), *options_.tamper_at, kTamperTag);
  Rearm(w);
}

void DbDeviceNode::Rearm(World& w) {
  auto d = fsm_->next_deadline();
  if (!d || d == armed_) return;
  armed_ = d;
  w.SetTimer(id(), *d, ++generation_);
}

void DbDeviceNode::Emit(World& w, DeviceOutput out) {
  for (auto& r : out.responses) w.BroadcastWithRetransmit(id(), std::move(r));
  for (auto& a : out.announcements) w.Broadcast(id(), std::move(a), options_.announcement_pad);
}

void DbDeviceNode::OnFrame(World& w, const Frame& f) {
  Emit(w, fsm_->on_frame(f.payload, w.now()));
  Rearm(w);
}

void DbDeviceNode::OnTimer(World& w, uint64_t tag) {
  if (tag == kTamperTag) {
    Bytes& image = fsm_->memory_image();
    if (!image.empty()) image[image.size() / 2] ^= 0x01;
    return;
  }
  if (tag != generation_) return;  // superseded
  armed_.reset();
  Emit(w, fsm_->on_timer(w.now()));
  Rearm(w);
}

double DbDeviceNode::busy_fraction(const World& w) const {
  double h = to_seconds(w.horizon());
  if (h <= 0 || !fsm_) return 0;
  return busy_within(fsm_->counters().busy, fsm_->counters().busy_end, w.horizon()) / h;
}

ordered_json DbDeviceNode::Metrics(const World& w) const {
  ordered_json j;
  if (!fsm_) return j;
  const DeviceCounters& c = fsm_->counters();
  j["mode"] = std::string(to_string(fsm_->mode()));
  j["busy_s"] = busy_within(c.busy, c.busy_end, w.horizon());
  j["busy_fraction"] = busy_fraction(w);
  j["signatures"] = c.signatures;
  j["attestations"] = c.attestations;
  j["responses"] = c.responses;
  j["announcements"] = c.announcements;
  j["requests_received"] = c.requests_received;
  j["frames_ignored"] = c.frames_ignored;
  j["nonces_dropped"] = c.nonces_dropped;
  j["push_activations"] = c.push_activations;
  j["max_pool_tmp"] = c.max_pool_tmp;
  j["att_result"] = fsm_->att_result() == AttResult::kSuccess ? "success" : "fail";
  return j;
}

// ---- User ----

UserNode::UserNode(std::shared_ptr<const Shared> shared, Arrival arrival,
                   RequestOptions request, ReceiveOptions receive)
    : shared_(std::move(shared)), arrival_(arrival), request_(request), receive_(receive) {}

void UserNode::OnStart(World& w) {
  agent_ = std::make_unique<UserAgent>(shared_->store, shared_->trust,
                                       Rng(rng().NextU64()), request_, receive_);
  switch (arrival_.model) {
    case Arrival::Model::kNone:
      break;
    case Arrival::Model::kPeriodic:
    case Arrival::Model::kBurst:
      w.SetTimer(id(), arrival_.start, 0);
      break;
    case Arrival::Model::kPoisson:
      ScheduleNext(w, arrival_.start);
      break;
  }
}

void UserNode::ScheduleNext(World& w, SimTime after) {
  SimTime next = after;
  switch (arrival_.model) {
    case Arrival::Model::kNone:
      return;
    case Arrival::Model::kPeriodic:
      next = after + arrival_.period;
      break;
    case Arrival::Model::kBurst:
      if (burst_sent_ >= arrival_.burst_count) return;
      next = after + arrival_.burst_spacing;
      break;
    case Arrival::Model::kPoisson: {
      double rate = arrival_.rate_per_hour / 3600;
      if (rate <= 0) return;
      double gap = -std::log(1 - rng().NextUnit()) / rate;
      next = after + std::max(SimTime(1), from_seconds(gap));
      break;
    }
  }
  if (arrival_.stop && next > *arrival_.stop) return;
  w.SetTimer(id(), next, 0);
}

void UserNode::RequestNow(World& w) { w.Broadcast(id(), agent_->MakeRequest(w.now())); }

void UserNode::OnTimer(World& w, uint64_t) {
  if (arrival_.model == Arrival::Model::kBurst && burst_sent_ >= arrival_.burst_count) return;
  RequestNow(w);
  ++burst_sent_;
  ScheduleNext(w, w.now());
}

void UserNode::OnFrame(World& w, const Frame& f) { agent_->OnFrame(f.payload, w.now()); }

ordered_json UserNode::Metrics(const World& w) const {
  ordered_json j;
  if (!agent_) return j;
  uint64_t from_resp = 0, from_ann = 0;
  for (const auto& r : agent_->reports()) {
    (r.source == ReportSource::kResponse ? from_resp : from_ann)++;
  }
  j["requests_sent"] = agent_->requests_sent();
  j["reports"] = agent_->reports().size();
  j["reports_response"] = from_resp;
  j["reports_announcement"] = from_ann;
  j["distinct_devices"] = dedup(agent_->reports()).size();
  j["duplicate_frames"] = agent_->duplicates();
  ordered_json discards = ordered_json::object();
  for (auto [reason, count] : agent_->discards()) discards[std::string(to_string(reason))] = count;
  j["discards"] = std::move(discards);
  const auto& lat = agent_->first_report_latency();
  j["answered_requests"] = lat.size();
  if (!lat.empty()) {
    double sum = 0, worst = 0;
    for (SimTime t : lat) {
      double s = to_seconds(t + w.link().manifest_fetch_delay);
      sum += s;
      worst = std::max(worst, s);
    }
    j["latency_mean_s"] = sum / static_cast<double>(lat.size());
    j["latency_max_s"] = worst;
  }
  return j;
}

// ---- Adversary ----

std::string_view to_string(Behavior b) {
  switch (b) {
    case Behavior::kFlood: return "flood";
    case Behavior::kReplay: return "replay";
    case Behavior::kForgeResponse: return "forge-response";
    case Behavior::kForgeRequest: return "forge-request";
    case Behavior::kEavesdrop: return "eavesdrop";
  }
  return "unknown";
}

AdversaryNode::AdversaryNode(AdversaryConfig config) : config_(std::move(config)) {}

void AdversaryNode::OnStart(World& w) {
  switch (config_.behavior) {
    case Behavior::kFlood:
    case Behavior::kForgeResponse:
    case Behavior::kForgeRequest:
      if (config_.rate > 0) w.SetTimer(id(), config_.start, 0);
      break;
    case Behavior::kReplay:
      for (size_t i = 0; i < config_.replay_at.size(); ++i) {
        w.SetTimer(id(), config_.replay_at[i], i);
      }
      break;
    case Behavior::kEavesdrop:
      break;
  }
}

void AdversaryNode::OnFrame(World& w, const Frame& f) {
  if (config_.record_until && w.now() > *config_.record_until) return;
  recorded_.push_back(f);
  if (config_.behavior == Behavior::kForgeResponse && HasId(f.payload, kIdResponse)) {
    try {
      template_ = std::get<ResponseMsg>(decode(f.payload));
    } catch (const WireError&) {
    }
  }
}

Bytes AdversaryNode::ForgeResponse() {
  ResponseMsg msg;
  if (template_) {
    msg = *template_;
  } else {
    msg.pooled_nonces.resize(1);
    rng().Fill(msg.pooled_nonces[0].bytes);
    msg.url = random_url_token(rng());
  }
  rng().Fill(msg.device_nonce.bytes);
  msg.att_report = {AttResult::kSuccess, 0};
  rng().Fill(msg.signature.bytes);
  return encode(msg);
}

Bytes AdversaryNode::ForgeRequest() {
  ImRequestMsg msg;
  rng().Fill(msg.owner_nonce.bytes);
  rng().Fill(msg.signature.bytes);
  return encode(msg);
}

void AdversaryNode::OnTimer(World& w, uint64_t tag) {
  if (config_.behavior == Behavior::kReplay) {
    std::set<Bytes> sent;
    for (; replay_index_ < recorded_.size(); ++replay_index_) {
      const Bytes& p = recorded_[replay_index_].payload;
      if (!HasId(p, kIdResponse) && !HasId(p, kIdAnnouncement) && !HasId(p, kIdImResponse)) {
        continue;
      }
      if (!sent.insert(p).second) continue;
      w.Broadcast(id(), p);
      ++sent_;
    }
    return;
  }
  if (config_.stop && w.now() >= *config_.stop) return;
  switch (config_.behavior) {
    case Behavior::kFlood: {
      RequestMsg req;
      rng().Fill(req.nonce.bytes);
      w.Broadcast(id(), encode(req));
      break;
    }
    case Behavior::kForgeResponse:
      w.Broadcast(id(), ForgeResponse());
      break;
    case Behavior::kForgeRequest:
      w.Broadcast(id(), ForgeRequest());
      break;
    default:
      return;
  }
  ++sent_;
  // Integer schedule avoids drift at high rates.
  uint64_t k = tag + 1;
  SimTime next = config_.start + SimTime(static_cast<int64_t>(std::llround(k * 1e6 / config_.rate)));
  w.SetTimer(id(), next, k);
}

ordered_json AdversaryNode::Metrics(const World&) const {
  ordered_json j;
  j["behavior"] = std::string(to_string(config_.behavior));
  j["frames_sent"] = sent_;
  j["frames_recorded"] = recorded_.size();
  return j;
}

// ---- IM ----

ImDeviceNode::ImDeviceNode(ImDevice device) : device_(std::move(device)) {}

void ImDeviceNode::OnFrame(World& w, const Frame& f) {
  if (auto em = device_.OnFrame(f.payload, w.now())) {
    w.BroadcastAt(id(), em->ready_at, std::move(em->frame));
  }
}

ordered_json ImDeviceNode::Metrics(const World& w) const {
  const ImDeviceCounters& c = device_.counters();
  ordered_json j;
  double h = to_seconds(w.horizon());
  double busy = std::min(to_seconds(c.busy), h);
  j["busy_s"] = busy;
  j["busy_fraction"] = h > 0 ? busy / h : 0.0;
  j["verifications"] = c.verifications;
  j["wasted_verifications"] = c.wasted_verifications;
  j["attestations"] = c.attestations;
  j["responses"] = c.responses;
  return j;
}

OwnerNode::OwnerNode(std::unique_ptr<Owner> owner, OwnerSchedule schedule)
    : owner_(std::move(owner)), schedule_(schedule) {}

void OwnerNode::OnStart(World& w) {
  if (schedule_.rounds > 0) w.SetTimer(id(), schedule_.start, 0);
}

void OwnerNode::OnTimer(World& w, uint64_t) {
  w.Broadcast(id(), owner_->MakeRequest());
  if (++rounds_done_ < schedule_.rounds) w.SetTimer(id(), w.now() + schedule_.interval, 0);
}

void OwnerNode::OnFrame(World&, const Frame& f) {
  if (!HasId(f.payload, kIdImResponse)) return;
  auto result = owner_->Receive(f.payload);
  if (auto* r = std::get_if<OwnerReceipt>(&result)) {
    receipts_.push_back(*r);
  } else {
    ++rejects_[std::get<OwnerReject>(result)];
  }
}

ordered_json OwnerNode::Metrics(const World&) const {
  ordered_json j;
  std::set<DeviceId> devices;
  uint64_t trials = 0, fails = 0;
  for (const auto& r : receipts_) {
    devices.insert(r.device_id);
    trials += r.key_trials;
    if (r.att_result != AttResult::kSuccess) ++fails;
  }
  j["rounds"] = rounds_done_;
  j["receipts"] = receipts_.size();
  j["distinct_devices"] = devices.size();
  j["attestation_failures"] = fails;
  j["key_trials"] = trials;
  ordered_json rejects = ordered_json::object();
  for (auto [reason, count] : rejects_) rejects[std::string(to_string(reason))] = count;
  j["rejects"] = std::move(rejects);
  return j;
}

}  // namespace dbpaisa::sim
