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

#include "dbpaisa/im_protocol.h"

#include <algorithm>

namespace dbpaisa {

std::string_view to_string(ImDeviceState s) {
  switch (s) {
    case ImDeviceState::kWait: return "wait";
    case ImDeviceState::kVerify: return "verify";
    case ImDeviceState::kAtt: return "att";
    case ImDeviceState::kGen: return "gen";
  }
  return "unknown";
}

std::string_view to_string(OwnerReject r) {
  switch (r) {
    case OwnerReject::kForgedOrForeign: return "forged-or-foreign";
    case OwnerReject::kReplay: return "replay";
    case OwnerReject::kMalformed: return "malformed";
  }
  return "unknown";
}

ImDevice::ImDevice(ImDeviceConfig config, Rng rng)
    : config_(std::move(config)), rng_(std::move(rng)) {}

void ImDevice::Enter(ImDeviceState s) {
  state_ = s;
  trace_.push_back(s);
}

std::optional<ImEmission> ImDevice::OnFrame(ByteView bytes, SimTime now) {
  trace_.clear();
  ImRequestMsg req;
  try {
    auto msg = decode(bytes);
    if (!std::holds_alternative<ImRequestMsg>(msg)) {
      ++counters_.frames_ignored;
      return std::nullopt;
    }
    req = std::get<ImRequestMsg>(msg);
  } catch (const WireError&) {
    ++counters_.frames_ignored;
    return std::nullopt;
  }

  SimTime start = std::max(now, busy_until_);
  Enter(ImDeviceState::kVerify);
  ++counters_.verifications;
  counters_.busy += config_.t_verify;
  busy_until_ = start + config_.t_verify;
  if (!verify(config_.record.owner_key, signed_region(req), req.signature)) {
    ++counters_.wasted_verifications;
    Enter(ImDeviceState::kWait);
    return std::nullopt;
  }

  Enter(ImDeviceState::kAtt);
  ++counters_.attestations;
  AttResult result = hash_image(config_.memory_image) == config_.record.software_hash
                         ? AttResult::kSuccess
                         : AttResult::kFail;

  Enter(ImDeviceState::kGen);
  std::vector<PrfOutput> header;
  if (!config_.lkh_keys.empty()) header = build_header(config_.lkh_keys, req.owner_nonce);
  AeadIv iv;
  rng_.Fill(iv);
  ImResponseMsg resp = seal_response(config_.record.key, std::move(header), iv,
                                     {req.owner_nonce, result, config_.info});
  counters_.busy += config_.t_res;
  busy_until_ += config_.t_res;
  ++counters_.responses;
  Enter(ImDeviceState::kWait);
  return ImEmission{encode(resp), busy_until_};
}

Owner::Owner(SigningKeyPair keys, OwnerKeyTable table, Rng rng)
    : keys_(keys), table_(std::move(table)), rng_(std::move(rng)) {
  flat_keys_.reserve(table_.size());
  for (const auto& [id, key] : table_.entries()) flat_keys_.push_back(key);
}

void Owner::EnableLkh(std::shared_ptr<const KeyTree> tree, std::vector<DeviceId> leaf_ids) {
  if (!tree || leaf_ids.size() != tree->n()) {
    throw ParameterError("LKH tree and leaf id list disagree");
  }
  tree_ = std::move(tree);
  leaf_ids_ = std::move(leaf_ids);
  mode_ = RetrievalMode::kLkh;
}

Bytes Owner::MakeRequest() {
  ImRequestMsg req;
  rng_.Fill(req.owner_nonce.bytes);
  req.signature = sign(keys_.private_key, signed_region(req));
  outstanding_ = req.owner_nonce;
  return encode(req);
}

OwnerResult Owner::Receive(ByteView bytes) const {
  ImResponseMsg msg;
  try {
    auto decoded = decode(bytes);
    if (!std::holds_alternative<ImResponseMsg>(decoded)) return OwnerReject::kMalformed;
    msg = std::get<ImResponseMsg>(decoded);
  } catch (const WireError&) {
    return OwnerReject::kMalformed;
  }

  OwnerReceipt receipt;
  std::optional<SymmetricKey> key;
  if (mode_ == RetrievalMode::kLkh) {
    if (!tree_ || !outstanding_) return OwnerReject::kForgedOrForeign;
    LkhResult walk = retrieve_lkh(*tree_, msg.lkh_header, *outstanding_);
    receipt.key_trials = walk.prf_evals;
    if (!walk.device) return OwnerReject::kForgedOrForeign;
    receipt.device_id = leaf_ids_[*walk.device];
    key = table_.Find(receipt.device_id);
  } else {
    NaiveResult found = mode_ == RetrievalMode::kNaiveParallel
                            ? retrieve_naive_parallel(flat_keys_, msg)
                            : retrieve_naive(flat_keys_, msg);
    receipt.key_trials = found.trials;
    if (!found.index) return OwnerReject::kForgedOrForeign;
    receipt.device_id = table_.entries()[*found.index].first;
    key = flat_keys_[*found.index];
  }
  if (!key) return OwnerReject::kForgedOrForeign;

  Bytes sealed(msg.ciphertext.begin(), msg.ciphertext.end());
  sealed.insert(sealed.end(), msg.tag.begin(), msg.tag.end());
  auto plaintext = aead_open(*key, msg.iv, sealed, im_associated_data(msg));
  if (!plaintext) return OwnerReject::kForgedOrForeign;
  ImPlaintext pt;
  try {
    pt = decode_plaintext(*plaintext);
  } catch (const WireError&) {
    return OwnerReject::kMalformed;
  }
  if (!outstanding_ || pt.owner_nonce != *outstanding_) return OwnerReject::kReplay;
  receipt.att_result = pt.att_result;
  receipt.info = pt.device_info;
  return receipt;
}

ImFleet make_im_fleet(const ImFleetOptions& options, Rng& rng) {
  ImFleet fleet;
  SigningKeyPair owner_keys = generate_keypair(rng);
  Bytes image = random_bytes(options.image_size, rng);
  OwnerKeyTable table;
  std::vector<DeviceId> ids(options.devices);
  for (auto& id : ids) rng.Fill(id);

  std::shared_ptr<KeyTree> tree;
  if (options.lkh) tree = std::make_shared<KeyTree>(options.devices, options.arity, rng);

  for (size_t i = 0; i < options.devices; ++i) {
    ImDeviceConfig cfg;
    if (tree) {
      cfg.lkh_keys = device_key_vector(*tree, i);
      cfg.record = provision_im_device_with_key(owner_keys.public_key, ids[i], image,
                                                tree->device_key(i), table);
    } else {
      cfg.record = provision_im_device(owner_keys.public_key, ids[i], image, table, rng);
    }
    cfg.memory_image = image;
    cfg.info.device_id = ids[i];
    cfg.info.type_code = static_cast<uint16_t>(1 + i % 7);
    cfg.info.software_version = 0x0102;
    cfg.t_verify = options.t_verify;
    cfg.t_res = options.t_res;
    fleet.devices.emplace_back(std::move(cfg), Rng(rng.NextU64()));
  }
  fleet.owner = std::make_unique<Owner>(owner_keys, std::move(table), Rng(rng.NextU64()));
  if (tree) fleet.owner->EnableLkh(tree, ids);
  fleet.tree = tree;
  return fleet;
}

}  // namespace dbpaisa
