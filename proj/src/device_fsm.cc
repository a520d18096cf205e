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

#include "dbpaisa/device_fsm.h"

#include <algorithm>
#include <chrono>

namespace dbpaisa {

std::string_view to_string(DeviceState s) {
  switch (s) {
    case DeviceState::kWait: return "wait";
    case DeviceState::kAtt: return "att";
    case DeviceState::kRcv: return "rcv";
    case DeviceState::kGen: return "gen";
  }
  return "unknown";
}

std::string_view to_string(DeviceMode m) {
  switch (m) {
    case DeviceMode::kPull: return "pull";
    case DeviceMode::kPush: return "push";
    case DeviceMode::kBlend: return "blend";
  }
  return "unknown";
}

void validate(const BlendPolicy& policy) {
  if (policy.switch_threshold == 0 || policy.window <= SimTime::zero() ||
      policy.push_period <= SimTime::zero() ||
      policy.announce_interval <= SimTime::zero()) {
    throw ParameterError("blend policy values must all be positive");
  }
}

DeviceFsm::DeviceFsm(DeviceConfig config, Rng rng, SimTime boot_time)
    : config_(std::move(config)), rng_(std::move(rng)) {
  validate(config_.provisioning.params);
  if (config_.mode == DeviceMode::kBlend) validate(config_.blend);
  if (config_.mode == DeviceMode::kPush && config_.push_interval <= SimTime::zero()) {
    throw ParameterError("push interval must be positive");
  }
  // Boot-time measurement seeds the first report; periodic ticks follow.
  att_result_ = hash_image(config_.memory_image) == config_.provisioning.software_hash
                    ? AttResult::kSuccess
                    : AttResult::kFail;
  last_att_time_ = boot_time;
  next_att_time_ = boot_time + config_.provisioning.params.t_att;
  if (config_.mode == DeviceMode::kPush) {
    next_announce_at_ = boot_time + config_.push_interval;
  }
}

size_t DeviceFsm::deletion_cap() const {
  return config_.deletion.cap != 0 ? config_.deletion.cap
                                   : 2 * config_.provisioning.params.pool_max;
}

bool DeviceFsm::push_active(SimTime now) const {
  switch (config_.mode) {
    case DeviceMode::kPull: return false;
    case DeviceMode::kPush: return true;
    case DeviceMode::kBlend: return push_until_ && now < *push_until_;
  }
  return false;
}

void DeviceFsm::AddBusy(SimTime now, SimTime duration) {
  counters_.busy += duration;
  counters_.busy_end = std::max(counters_.busy_end, now + duration);
}

AttReport DeviceFsm::CurrentReport(SimTime now) const {
  auto age = std::chrono::duration_cast<std::chrono::seconds>(now - last_att_time_);
  return AttReport{att_result_, static_cast<uint32_t>(std::max<int64_t>(0, age.count()))};
}

AttResult DeviceFsm::attest_now(SimTime now) {
  att_result_ = hash_image(config_.memory_image) == config_.provisioning.software_hash
                    ? AttResult::kSuccess
                    : AttResult::kFail;
  last_att_time_ = now;
  AddBusy(now, config_.t_att_exec);
  return att_result_;
}

void DeviceFsm::RunAttestationTick(SimTime now) {
  attest_now(now);
  ++counters_.attestations;
  counters_.attestation_times.push_back(now);
  // Ticks missed while Gen ran are dropped, not queued.
  while (next_att_time_ <= now) next_att_time_ += config_.provisioning.params.t_att;
}

void DeviceFsm::BeginResponse(SimTime now) {
  ResponseMsg msg;
  rng_.Fill(msg.device_nonce.bytes);
  msg.pooled_nonces = std::move(pool_);
  pool_.clear();
  msg.url = config_.provisioning.url;
  msg.att_report = CurrentReport(now);
  msg.signature = sign(config_.provisioning.keys.private_key, signed_region(msg));
  counters_.reported.push_back(msg.att_report);
  ++counters_.signatures;

  in_flight_bytes_ = encode(msg);
  in_flight_ = InFlight::kResponse;
  gen_deadline_.reset();
  state_ = DeviceState::kGen;
  gen_done_at_ = now + config_.t_res;
  AddBusy(now, config_.t_res);
}

void DeviceFsm::BeginAnnouncement(SimTime now) {
  AnnouncementMsg msg;
  rng_.Fill(msg.device_nonce.bytes);
  msg.url = config_.provisioning.url;
  msg.att_report = CurrentReport(now);
  msg.signature = sign(config_.provisioning.keys.private_key, signed_region(msg));
  counters_.reported.push_back(msg.att_report);
  ++counters_.signatures;

  in_flight_bytes_ = encode(msg);
  in_flight_ = InFlight::kAnnouncement;
  stashed_gen_deadline_ = gen_deadline_;
  gen_deadline_.reset();
  state_ = DeviceState::kGen;
  gen_done_at_ = now + config_.t_res;
  AddBusy(now, config_.t_res);

  SimTime interval = config_.mode == DeviceMode::kPush ? config_.push_interval
                                                       : config_.blend.announce_interval;
  SimTime next = *next_announce_at_ + interval;
  if (next <= now) next = now + interval;
  if (config_.mode == DeviceMode::kBlend && (!push_until_ || next >= *push_until_)) {
    next_announce_at_.reset();
  } else {
    next_announce_at_ = next;
  }
}

void DeviceFsm::FinishGen(SimTime now, DeviceOutput& out) {
  if (in_flight_ == InFlight::kResponse) {
    out.responses.push_back(std::move(in_flight_bytes_));
    ++counters_.responses;
    counters_.response_times.push_back(now);
  } else {
    out.announcements.push_back(std::move(in_flight_bytes_));
    ++counters_.announcements;
    counters_.announcement_times.push_back(now);
    gen_deadline_ = stashed_gen_deadline_;
    stashed_gen_deadline_.reset();
  }
  in_flight_bytes_.clear();
  in_flight_ = InFlight::kNone;
  gen_done_at_.reset();
  state_ = DeviceState::kWait;

  // An attestation tick suppressed by Gen runs now.
  if (next_att_time_ <= now) RunAttestationTick(now);

  const size_t pool_max = config_.provisioning.params.pool_max;
  size_t room = pool_max - std::min(pool_max, pool_.size());
  size_t moved = std::min(room, pool_tmp_.size());
  pool_.insert(pool_.end(), pool_tmp_.begin(), pool_tmp_.begin() + moved);
  pool_tmp_.erase(pool_tmp_.begin(), pool_tmp_.begin() + moved);

  if (pool_.size() >= pool_max) {
    BeginResponse(now);
  } else if (!pool_.empty() && !gen_deadline_) {
    gen_deadline_ = now + config_.provisioning.params.t_gen;
  }
}

void DeviceFsm::RandomDelete() {
  const size_t cap = deletion_cap();
  while (pool_tmp_.size() > cap) {
    pool_tmp_.erase(pool_tmp_.begin() +
                    static_cast<std::ptrdiff_t>(rng_.Below(pool_tmp_.size())));
    ++counters_.nonces_dropped;
  }
}

void DeviceFsm::BlendStep(SimTime now) {
  const BlendPolicy& policy = config_.blend;
  recent_requests_.push_back(now);
  while (!recent_requests_.empty() && recent_requests_.front() < now - policy.window) {
    recent_requests_.pop_front();
  }
  if (push_active(now)) return;
  if (recent_requests_.size() > policy.switch_threshold) {
    push_until_ = now + policy.push_period;
    next_announce_at_ = now;
    ++counters_.push_activations;
    recent_requests_.clear();
  }
}

DeviceOutput DeviceFsm::on_frame(ByteView payload, SimTime now) {
  DeviceOutput out;
  const bool is_request =
      payload.size() == kRequestSize &&
      std::equal(kIdRequest.begin(), kIdRequest.end(), payload.begin());
  if (!is_request || config_.mode == DeviceMode::kPush) {
    ++counters_.frames_ignored;
    return out;
  }
  RequestMsg req = std::get<RequestMsg>(decode(payload));
  ++counters_.requests_received;
  if (config_.mode == DeviceMode::kBlend) BlendStep(now);

  if (state_ == DeviceState::kGen) {
    pool_tmp_.push_back(req.nonce);
    if (config_.deletion.enabled) RandomDelete();
    counters_.max_pool_tmp = std::max(counters_.max_pool_tmp, pool_tmp_.size());
    return out;
  }

  state_ = DeviceState::kRcv;
  pool_.push_back(req.nonce);
  if (pool_.size() == 1) {
    gen_deadline_ = now + config_.provisioning.params.t_gen;
  }
  if (pool_.size() >= config_.provisioning.params.pool_max) {
    BeginResponse(now);
  } else {
    state_ = DeviceState::kWait;
  }
  // A zero-length Gen completes in the same instant.
  if (gen_done_at_ && *gen_done_at_ <= now) {
    DeviceOutput more = on_timer(now);
    out.responses.insert(out.responses.end(), more.responses.begin(),
                         more.responses.end());
    out.announcements.insert(out.announcements.end(), more.announcements.begin(),
                             more.announcements.end());
  }
  return out;
}

DeviceOutput DeviceFsm::on_timer(SimTime now) {
  DeviceOutput out;
  for (;;) {
    if (state_ == DeviceState::kGen) {
      if (gen_done_at_ && *gen_done_at_ <= now) {
        FinishGen(now, out);
        continue;
      }
      break;
    }
    if (gen_deadline_ && *gen_deadline_ <= now) {
      // Gen takes priority; a simultaneous attestation tick waits for it.
      BeginResponse(now);
      continue;
    }
    if (next_att_time_ <= now) {
      state_ = DeviceState::kAtt;
      RunAttestationTick(now);
      state_ = DeviceState::kWait;
      continue;
    }
    if (next_announce_at_ && *next_announce_at_ <= now && push_active(now)) {
      BeginAnnouncement(now);
      continue;
    }
    if (next_announce_at_ && !push_active(now)) next_announce_at_.reset();
    break;
  }
  return out;
}

std::optional<SimTime> DeviceFsm::next_deadline() const {
  if (state_ == DeviceState::kGen) return gen_done_at_;
  SimTime best = next_att_time_;
  if (gen_deadline_) best = std::min(best, *gen_deadline_);
  if (next_announce_at_) best = std::min(best, *next_announce_at_);
  return best;
}

}  // namespace dbpaisa
