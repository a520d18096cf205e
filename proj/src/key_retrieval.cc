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

#include "dbpaisa/key_retrieval.h"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <limits>
#include <stdexcept>

#include "dbpaisa/registration.h"

namespace dbpaisa {

KeyTree::KeyTree(size_t n, size_t p, Rng& rng) : n_(n), p_(p) {
  if (p < 2) throw ParameterError("tree arity must be at least 2");
  if (n < 2) throw ParameterError("key tree needs at least two devices");
  while (leaf_count_ < n) {
    leaf_count_ *= p;
    ++depth_;
  }
  first_leaf_ = (leaf_count_ - 1) / (p - 1);
  keys_.resize(first_leaf_ + leaf_count_);
  for (auto& k : keys_) rng.Fill(k.bytes);
}

size_t KeyTree::leaf_node(size_t device) const {
  if (device >= n_) throw std::out_of_range("device index out of range");
  return first_leaf_ + device;
}

std::vector<SymmetricKey> device_key_vector(const KeyTree& tree, size_t device) {
  std::vector<SymmetricKey> out(tree.depth());
  size_t node = tree.leaf_node(device);
  for (size_t level = tree.depth(); level > 0; --level) {
    out[level - 1] = tree.node_key(node);
    node = (node - 1) / tree.arity();
  }
  return out;
}

std::vector<PrfOutput> build_header(std::span<const SymmetricKey> key_vector,
                                    const Nonce& owner_nonce) {
  std::vector<PrfOutput> header;
  header.reserve(key_vector.size());
  for (const auto& k : key_vector) header.push_back(prf_eval(k, owner_nonce.bytes));
  return header;
}

LkhResult retrieve_lkh(const KeyTree& tree, std::span<const PrfOutput> header,
                       const Nonce& owner_nonce) {
  LkhResult result;
  if (header.size() != tree.depth()) return result;
  const size_t p = tree.arity();
  size_t node = 0;
  for (size_t level = 0; level < tree.depth(); ++level) {
    size_t slot = p - 1;
    for (size_t c = 0; c + 1 < p; ++c) {
      ++result.prf_evals;
      if (prf_eval(tree.node_key(p * node + 1 + c), owner_nonce.bytes) == header[level]) {
        slot = c;
        break;
      }
    }
    result.path.push_back(slot);
    node = p * node + 1 + slot;
  }
  size_t leaf = node - tree.first_leaf();
  if (leaf < tree.n()) result.device = leaf;
  return result;
}

namespace {

bool TryKey(AeadTrialOpener& opener, const SymmetricKey& key, const ImResponseMsg& msg,
            ByteView aad, Bytes& scratch) {
  return opener.Open(key, msg.iv, msg.ciphertext, msg.tag, aad, scratch);
}

}  // namespace

NaiveResult retrieve_naive(std::span<const SymmetricKey> keys, const ImResponseMsg& msg) {
  NaiveResult result;
  Bytes aad = im_associated_data(msg);
  AeadTrialOpener opener;
  Bytes scratch;
  for (size_t i = 0; i < keys.size(); ++i) {
    ++result.trials;
    if (TryKey(opener, keys[i], msg, aad, scratch)) {
      result.index = i;
      break;
    }
  }
  return result;
}

NaiveResult retrieve_naive_parallel(std::span<const SymmetricKey> keys,
                                    const ImResponseMsg& msg) {
  constexpr size_t kNone = std::numeric_limits<size_t>::max();
  const Bytes aad = im_associated_data(msg);
  const int64_t n = static_cast<int64_t>(keys.size());
  std::atomic<size_t> best{kNone};
  uint64_t trials = 0;

#pragma omp parallel reduction(+ : trials)
  {
    AeadTrialOpener opener;
    Bytes scratch;
    const int64_t threads = omp_get_num_threads();
    const int64_t t = omp_get_thread_num();
    const int64_t begin = n * t / threads;
    const int64_t end = n * (t + 1) / threads;
    for (int64_t i = begin; i < end; ++i) {
      // A lower index already matched; nothing here can beat it.
      if (static_cast<size_t>(i) > best.load(std::memory_order_relaxed)) break;
      ++trials;
      if (TryKey(opener, keys[i], msg, aad, scratch)) {
        size_t cur = best.load();
        while (static_cast<size_t>(i) < cur &&
               !best.compare_exchange_weak(cur, static_cast<size_t>(i))) {
        }
        break;
      }
    }
  }

  NaiveResult result;
  result.trials = trials;
  if (best.load() != kNone) result.index = best.load();
  return result;
}

ImResponseMsg seal_response(const SymmetricKey& key, std::vector<PrfOutput> header,
                            const AeadIv& iv, const ImPlaintext& plaintext) {
  ImResponseMsg msg;
  msg.lkh_header = std::move(header);
  msg.iv = iv;
  Bytes sealed = aead_seal(key, iv, encode_plaintext(plaintext), im_associated_data(msg));
  std::copy_n(sealed.begin(), kImPlaintextSize, msg.ciphertext.begin());
  std::copy_n(sealed.begin() + kImPlaintextSize, kAeadTagSize, msg.tag.begin());
  return msg;
}

namespace {

struct Cell {
  size_t n;
  size_t p;
};

std::vector<Cell> Cells(const SweepParams& params) {
  std::vector<Cell> cells;
  for (size_t p : params.arities) {
    for (size_t n : params.device_counts) cells.push_back({n, p});
  }
  return cells;
}

SweepStats RunCell(const SweepParams& params, const Cell& cell) {
  SweepStats s;
  Rng rng = Rng::Derive(params.seed, cell.n * 64 + cell.p);
  KeyTree tree(cell.n, cell.p, rng);
  std::vector<SymmetricKey> leaf_keys;
  leaf_keys.reserve(cell.n);
  for (size_t i = 0; i < cell.n; ++i) leaf_keys.push_back(tree.device_key(i));
  const uint64_t bound = (cell.p - 1) * tree.depth();

  for (size_t t = 0; t < params.nonces_per_cell; ++t) {
    size_t device = rng.Below(cell.n);
    ImPlaintext pt;
    rng.Fill(pt.owner_nonce.bytes);
    AeadIv iv;
    rng.Fill(iv);
    auto header = build_header(device_key_vector(tree, device), pt.owner_nonce);
    ImResponseMsg msg = seal_response(leaf_keys[device], header, iv, pt);

    LkhResult lkh = retrieve_lkh(tree, msg.lkh_header, pt.owner_nonce);
    NaiveResult naive = retrieve_naive(leaf_keys, msg);
    ++s.trials;
    if (lkh.device != device) ++s.lkh_mismatches;
    if (naive.index != device) ++s.naive_mismatches;
    if (lkh.prf_evals > bound) ++s.bound_violations;
    s.prf_evals += lkh.prf_evals;
    s.naive_trials += naive.trials;
  }
  return s;
}

void Add(SweepStats& into, const SweepStats& s) {
  into.trials += s.trials;
  into.lkh_mismatches += s.lkh_mismatches;
  into.naive_mismatches += s.naive_mismatches;
  into.bound_violations += s.bound_violations;
  into.prf_evals += s.prf_evals;
  into.naive_trials += s.naive_trials;
}

}  // namespace

SweepStats lkh_sweep(const SweepParams& params) {
  SweepStats total;
  for (const Cell& c : Cells(params)) Add(total, RunCell(params, c));
  return total;
}

SweepStats lkh_sweep_parallel(const SweepParams& params) {
  const std::vector<Cell> cells = Cells(params);
  std::vector<SweepStats> per_cell(cells.size());
  const int64_t count = static_cast<int64_t>(cells.size());
#pragma omp parallel for schedule(dynamic)
  for (int64_t i = 0; i < count; ++i) per_cell[i] = RunCell(params, cells[i]);
  SweepStats total;
  for (const auto& s : per_cell) Add(total, s);
  return total;
}

StorageCounts storage_counts(size_t n, size_t p) {
  if (p < 2 || n < 2) throw ParameterError("storage counts need n >= 2 and p >= 2");
  uint64_t leaves = 1;
  uint64_t depth = 0;
  while (leaves < n) {
    leaves *= p;
    ++depth;
  }
  StorageCounts c;
  c.device_keys = depth;
  c.owner_keys = (p * leaves - 1) / (p - 1) - 1;
  c.header_bytes = depth * kPrfOutputSize;
  return c;
}

StorageCounts storage_counts(const KeyTree& tree) {
  StorageCounts c;
  c.device_keys = tree.depth();
  c.owner_keys = tree.node_count() - 1;
  c.header_bytes = tree.depth() * kPrfOutputSize;
  return c;
}

}  // namespace dbpaisa
