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

#ifndef DBPAISA_KEY_RETRIEVAL_H_
#define DBPAISA_KEY_RETRIEVAL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dbpaisa/crypto.h"
#include "dbpaisa/wire.h"

namespace dbpaisa {

// Complete p-ary key tree in heap order: node v has children p*v+1 .. p*v+p.
// The device count is padded up to a power of p with dummy leaves so every
// device holds exactly depth() keys.
class KeyTree {
 public:
  KeyTree(size_t n, size_t p, Rng& rng);  // throws ParameterError

  size_t n() const { return n_; }
  size_t arity() const { return p_; }
  size_t depth() const { return depth_; }
  size_t leaf_count() const { return leaf_count_; }
  size_t node_count() const { return keys_.size(); }
  size_t first_leaf() const { return first_leaf_; }

  const SymmetricKey& node_key(size_t node) const { return keys_.at(node); }
  size_t leaf_node(size_t device) const;  // throws std::out_of_range
  const SymmetricKey& device_key(size_t device) const {
    return keys_[leaf_node(device)];
  }

 private:
  size_t n_;
  size_t p_;
  size_t depth_ = 0;
  size_t leaf_count_ = 1;
  size_t first_leaf_ = 0;
  std::vector<SymmetricKey> keys_;
};

// Keys on the path from level 1 down to the device's leaf. The last entry is
// the device's encryption key.
std::vector<SymmetricKey> device_key_vector(const KeyTree& tree, size_t device);

std::vector<PrfOutput> build_header(std::span<const SymmetricKey> key_vector,
                                    const Nonce& owner_nonce);

struct LkhResult {
  std::optional<size_t> device;  // empty when the walk lands on a dummy leaf
  uint64_t prf_evals = 0;
  std::vector<size_t> path;  // child slot chosen at each level
};

// Owner-side walk. Binary trees test only the left child per level; p-ary
// trees test up to p-1 children and fall through to the last.
LkhResult retrieve_lkh(const KeyTree& tree, std::span<const PrfOutput> header,
                       const Nonce& owner_nonce);

struct NaiveResult {
  std::optional<size_t> index;  // smallest key index whose tag verifies
  uint64_t trials = 0;
};

// Trial AEAD opens of `msg` under every key until one verifies.
NaiveResult retrieve_naive(std::span<const SymmetricKey> keys, const ImResponseMsg& msg);
// OpenMP version; returns the same index as the serial scan.
NaiveResult retrieve_naive_parallel(std::span<const SymmetricKey> keys,
                                    const ImResponseMsg& msg);

// AEAD-seals `plaintext` under `key` with the header bound as associated data.
ImResponseMsg seal_response(const SymmetricKey& key, std::vector<PrfOutput> header,
                            const AeadIv& iv, const ImPlaintext& plaintext);

// Oracle sweep over a grid of tree shapes. In every trial a random device
// seals a response; LKH and naive retrieval must both name that device and
// the PRF count must stay within (p-1) * depth.
struct SweepParams {
  std::vector<size_t> device_counts;
  std::vector<size_t> arities{2, 4, 8};
  size_t nonces_per_cell = 100;
  uint64_t seed = 1;
};

struct SweepStats {
  uint64_t trials = 0;
  uint64_t lkh_mismatches = 0;
  uint64_t naive_mismatches = 0;
  uint64_t bound_violations = 0;
  uint64_t prf_evals = 0;
  uint64_t naive_trials = 0;
  friend bool operator==(const SweepStats&, const SweepStats&) = default;
};

SweepStats lkh_sweep(const SweepParams& params);           // serial reference
SweepStats lkh_sweep_parallel(const SweepParams& params);  // OpenMP over cells

struct StorageCounts {
  uint64_t device_keys = 0;
  uint64_t owner_keys = 0;  // root excluded
  uint64_t header_bytes = 0;
  friend bool operator==(const StorageCounts&, const StorageCounts&) = default;
};

StorageCounts storage_counts(const KeyTree& tree);
StorageCounts storage_counts(size_t n, size_t p);

}  // namespace dbpaisa

#endif  // DBPAISA_KEY_RETRIEVAL_H_
