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

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "dbpaisa/registration.h"

namespace dbpaisa {
namespace {

ImResponseMsg Seal(const SymmetricKey& key, std::vector<PrfOutput> header, Rng& rng) {
  ImResponseMsg msg;
  msg.lkh_header = std::move(header);
  rng.Fill(msg.iv);
  ImPlaintext pt;
  rng.Fill(pt.owner_nonce.bytes);
  Bytes sealed = aead_seal(key, msg.iv, encode_plaintext(pt), im_associated_data(msg));
  std::copy_n(sealed.begin(), kImPlaintextSize, msg.ciphertext.begin());
  std::copy_n(sealed.begin() + kImPlaintextSize, kAeadTagSize, msg.tag.begin());
  return msg;
}

Nonce RandomNonce(Rng& rng) {
  Nonce n;
  rng.Fill(n.bytes);
  return n;
}

TEST(KeyTreeTest, StorageCounts) {
  EXPECT_EQ(storage_counts(256, 2), (StorageCounts{8, 510, 128}));
  EXPECT_EQ(storage_counts(256, 4), (StorageCounts{4, 340, 64}));
  EXPECT_EQ(storage_counts(2, 2), (StorageCounts{1, 2, 16}));
  Rng rng(1);
  for (auto [n, p] : {std::pair<size_t, size_t>{256, 2}, {256, 4}, {2, 2}, {100, 3}, {9, 8}}) {
    KeyTree tree(n, p, rng);
    EXPECT_EQ(storage_counts(tree), storage_counts(n, p)) << n << "," << p;
    EXPECT_EQ(tree.node_count(), (p * tree.leaf_count() - 1) / (p - 1));
  }
}

TEST(KeyTreeTest, RejectsDegenerate) {
  Rng rng(1);
  EXPECT_THROW(KeyTree(1, 2, rng), ParameterError);
  EXPECT_THROW(KeyTree(8, 1, rng), ParameterError);
  KeyTree tree(5, 2, rng);
  EXPECT_EQ(tree.depth(), 3u);
  EXPECT_EQ(tree.leaf_count(), 8u);
  EXPECT_THROW(tree.leaf_node(5), std::out_of_range);
}

TEST(KeyTreeTest, NodeKeysDistinct) {
  Rng rng(2);
  KeyTree tree(1024, 2, rng);
  std::set<SymmetricKey> keys;
  for (size_t v = 0; v < tree.node_count(); ++v) keys.insert(tree.node_key(v));
  EXPECT_EQ(keys.size(), tree.node_count());
}

TEST(KeyTreeTest, SharedPrefixFollowsCommonAncestor) {
  Rng rng(3);
  KeyTree tree(8, 2, rng);
  auto v0 = device_key_vector(tree, 0);
  auto v1 = device_key_vector(tree, 1);
  auto v2 = device_key_vector(tree, 2);
  auto v7 = device_key_vector(tree, 7);
  ASSERT_EQ(v0.size(), 3u);
  EXPECT_EQ(v0[0], v1[0]);
  EXPECT_EQ(v0[1], v1[1]);
  EXPECT_NE(v0[2], v1[2]);
  EXPECT_EQ(v0[0], v2[0]);
  EXPECT_NE(v0[1], v2[1]);
  EXPECT_NE(v0[0], v7[0]);
  EXPECT_EQ(v2.back(), tree.device_key(2));
  for (size_t i = 0; i < 8; ++i) EXPECT_EQ(device_key_vector(tree, i).size(), 3u);
}

TEST(KeyTreeTest, HeaderShape) {
  Rng rng(4);
  KeyTree tree(256, 2, rng);
  Nonce a = RandomNonce(rng), b = RandomNonce(rng);
  auto h1 = build_header(device_key_vector(tree, 17), a);
  auto h2 = build_header(device_key_vector(tree, 17), b);
  EXPECT_EQ(h1.size() * kPrfOutputSize, 128u);
  for (size_t l = 0; l < h1.size(); ++l) {
    EXPECT_NE(h1[l], h2[l]);
    EXPECT_EQ(h1[l], prf_eval(device_key_vector(tree, 17)[l], a.bytes));
  }
  auto h3 = build_header(device_key_vector(tree, 18), a);
  EXPECT_EQ(h1[0], h3[0]);
}

TEST(LkhTest, WalkthroughDeviceTwo) {
  Rng rng(5);
  KeyTree tree(8, 2, rng);
  Nonce n = RandomNonce(rng);
  auto r = retrieve_lkh(tree, build_header(device_key_vector(tree, 2), n), n);
  ASSERT_TRUE(r.device);
  EXPECT_EQ(*r.device, 2u);
  EXPECT_EQ(r.path, (std::vector<size_t>{0, 1, 0}));
  EXPECT_LE(r.prf_evals, 3u);
}

TEST(LkhTest, AllDevicesSeveralArities) {
  Rng rng(6);
  for (size_t p : {2, 3, 4, 8}) {
    for (size_t n : {2, 7, 64, 100}) {
      KeyTree tree(n, p, rng);
      for (size_t i = 0; i < n; ++i) {
        Nonce nonce = RandomNonce(rng);
        auto r = retrieve_lkh(tree, build_header(device_key_vector(tree, i), nonce), nonce);
        ASSERT_EQ(r.device, i) << "n=" << n << " p=" << p;
        EXPECT_LE(r.prf_evals, (p - 1) * tree.depth());
      }
    }
  }
}

TEST(LkhTest, GarbageHeaderNeverMisidentifiesSilently) {
  Rng rng(7);
  KeyTree tree(5, 2, rng);
  int dummy = 0;
  for (int t = 0; t < 200; ++t) {
    std::vector<PrfOutput> header(tree.depth());
    for (auto& h : header) rng.Fill(h.bytes);
    auto r = retrieve_lkh(tree, header, RandomNonce(rng));
    if (!r.device) ++dummy;
  }
  // Random headers always fall through to the right; that lands on a dummy leaf.
  EXPECT_EQ(dummy, 200);
  EXPECT_FALSE(retrieve_lkh(tree, {}, RandomNonce(rng)).device);
}

TEST(LkhTest, CrossDecryptionMatrixIsDiagonal) {
  Rng rng(8);
  KeyTree tree(8, 2, rng);
  std::vector<SymmetricKey> keys;
  for (size_t i = 0; i < 8; ++i) keys.push_back(tree.device_key(i));
  for (size_t i = 0; i < 8; ++i) {
    auto msg = Seal(keys[i], {}, rng);
    Bytes sealed(msg.ciphertext.begin(), msg.ciphertext.end());
    sealed.insert(sealed.end(), msg.tag.begin(), msg.tag.end());
    for (size_t j = 0; j < 8; ++j) {
      EXPECT_EQ(aead_open(keys[j], msg.iv, sealed, im_associated_data(msg)).has_value(),
                i == j);
    }
  }
}

TEST(NaiveTest, SingleKeyOneTrial) {
  Rng rng(9);
  std::vector<SymmetricKey> keys(1);
  rng.Fill(keys[0].bytes);
  auto r = retrieve_naive(keys, Seal(keys[0], {}, rng));
  EXPECT_EQ(r.index, 0u);
  EXPECT_EQ(r.trials, 1u);
}

TEST(NaiveTest, NoMatchScansEverything) {
  Rng rng(10);
  std::vector<SymmetricKey> keys(50);
  for (auto& k : keys) rng.Fill(k.bytes);
  SymmetricKey other;
  rng.Fill(other.bytes);
  auto r = retrieve_naive(keys, Seal(other, {}, rng));
  EXPECT_FALSE(r.index);
  EXPECT_EQ(r.trials, 50u);
  EXPECT_FALSE(retrieve_naive_parallel(keys, Seal(other, {}, rng)).index);
}

TEST(NaiveTest, MeanTrialsNearHalf) {
  Rng rng(11);
  const size_t n = 1000;
  std::vector<SymmetricKey> keys(n);
  for (auto& k : keys) rng.Fill(k.bytes);
  double total = 0;
  const int runs = 1000;
  for (int t = 0; t < runs; ++t) {
    size_t target = rng.Below(n);
    auto r = retrieve_naive(keys, Seal(keys[target], {}, rng));
    ASSERT_EQ(r.index, target);
    total += static_cast<double>(r.trials);
  }
  double mean = total / runs;
  EXPECT_NEAR(mean, n / 2.0, 0.05 * n / 2.0);
}

TEST(NaiveTest, ParallelMatchesSerialSmallestIndex) {
  Rng rng(12);
  std::vector<SymmetricKey> keys(5000);
  for (auto& k : keys) rng.Fill(k.bytes);
  keys[4000] = keys[1234];
  auto msg = Seal(keys[1234], {}, rng);
  EXPECT_EQ(retrieve_naive(keys, msg).index, 1234u);
  EXPECT_EQ(retrieve_naive_parallel(keys, msg).index, 1234u);
  for (int t = 0; t < 20; ++t) {
    size_t target = rng.Below(keys.size());
    auto m = Seal(keys[target], {}, rng);
    EXPECT_EQ(retrieve_naive_parallel(keys, m).index,
              retrieve_naive(keys, m).index);
  }
}

TEST(SweepTest, ParallelMatchesSerialReference) {
  SweepParams params{.device_counts = {2, 3, 8, 30, 64}, .arities = {2, 3, 4},
                     .nonces_per_cell = 10, .seed = 5};
  SweepStats serial = lkh_sweep(params);
  EXPECT_EQ(serial.trials, 150u);
  EXPECT_EQ(serial.lkh_mismatches, 0u);
  EXPECT_EQ(serial.naive_mismatches, 0u);
  EXPECT_EQ(serial.bound_violations, 0u);
  EXPECT_EQ(lkh_sweep_parallel(params), serial);
}

TEST(SweepTest, SealedResponseOpensUnderKey) {
  Rng rng(13);
  SymmetricKey key;
  rng.Fill(key.bytes);
  ImPlaintext pt;
  rng.Fill(pt.owner_nonce.bytes);
  pt.att_result = AttResult::kSuccess;
  AeadIv iv{};
  auto msg = seal_response(key, {PrfOutput{}}, iv, pt);
  Bytes sealed(msg.ciphertext.begin(), msg.ciphertext.end());
  sealed.insert(sealed.end(), msg.tag.begin(), msg.tag.end());
  auto opened = aead_open(key, iv, sealed, im_associated_data(msg));
  ASSERT_TRUE(opened);
  EXPECT_EQ(decode_plaintext(*opened), pt);
  EXPECT_FALSE(aead_open(key, iv, sealed, Bytes{}));
}

}  // namespace
}  // namespace dbpaisa
