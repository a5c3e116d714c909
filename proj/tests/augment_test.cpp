/*
 * Copyright 2026 The Robustmix Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "robustmix/augment.hpp"

#include <gtest/gtest.h>

#include <numeric>

#include "oracle.hpp"

namespace robustmix {
namespace {

AugmentConfig config(Policy policy = Policy::Robustmix, double alpha = 0.4, double tau = 0.0) {
  AugmentConfig cfg;
  cfg.policy = policy;
  cfg.alpha = alpha;
  cfg.tau = tau;
  return cfg;
}

Tensor one_hot(std::size_t n, std::size_t k) {
  Tensor t({n, k});
  for (std::size_t i = 0; i < n; ++i) t[i * k + i % k] = 1.0f;
  return t;
}

TEST(MixTest, ScalarExample) {
  const Tensor a({2}, {1.0f, 0.0f});
  const Tensor b({2}, {0.0f, 1.0f});
  const Tensor m = mix(a, b, 0.25);
  EXPECT_FLOAT_EQ(m[0], 0.25f);
  EXPECT_FLOAT_EQ(m[1], 0.75f);
  EXPECT_EQ(mix(a, b, 1.0), a);
  EXPECT_EQ(mix(a, b, 0.0), b);
  EXPECT_THROW(mix(a, Tensor({3}), 0.5), Error);
}

TEST(MixupTest, SingleItemBatchIsUnchanged) {
  const Tensor x = oracle::random_tensor({1, 4, 4, 3}, 1);
  const Tensor y = one_hot(1, 3);
  Rng rng(0);
  const MixedBatch out = mixup_batch(x, y, config(Policy::Mixup), rng);
  EXPECT_LT(max_abs_diff(out.images, x), 1e-6);
  EXPECT_LT(max_abs_diff(out.labels, y), 1e-6);
}

TEST(MixupTest, PairsByReversal) {
  Tensor x({2, 1, 1, 1}, {1.0f, 0.0f});
  const Tensor y({2, 2}, {1.0f, 0.0f, 0.0f, 1.0f});
  Rng rng(0);
  const MixedBatch out = mixup_batch(x, y, config(Policy::Mixup), rng, DrawOverride{0.3, std::nullopt, std::nullopt});
  EXPECT_FLOAT_EQ(out.images[0], 0.3f);
  EXPECT_FLOAT_EQ(out.images[1], 0.7f);
  EXPECT_FLOAT_EQ(out.labels[0], 0.3f);
  EXPECT_FLOAT_EQ(out.labels[1], 0.7f);
  EXPECT_FLOAT_EQ(out.labels[2], 0.7f);
  EXPECT_FLOAT_EQ(out.labels[3], 0.3f);
}

TEST(RobustmixTest, EqualLambdasCollapseToMixup) {
  const Tensor x = oracle::random_tensor({6, 8, 8, 3}, 2);
  const Tensor y = oracle::random_labels(6, 5, 3);
  for (double lambda : {0.0, 0.2, 0.7, 1.0}) {
    for (double c : {0.0, 0.3, 1.0}) {
      Rng r1(5), r2(5);
      const MixedBatch rm = robustmix_batch(x, y, config(), r1, {lambda, lambda, c});
      const MixedBatch mu = mixup_batch(x, y, config(Policy::Mixup), r2, DrawOverride{lambda, std::nullopt, std::nullopt});
      EXPECT_LT(max_abs_diff(rm.images, mu.images), 1e-4) << lambda << " " << c;
      EXPECT_LT(max_abs_diff(rm.labels, mu.labels), 1e-6) << lambda << " " << c;
    }
  }
}

TEST(RobustmixTest, TauOneCollapsesToMixup) {
  const Tensor x = oracle::random_tensor({4, 8, 8, 1}, 4);
  const Tensor y = oracle::random_labels(4, 3, 5);
  Rng rng(11);
  const MixedBatch out = robustmix_batch(x, y, config(Policy::Robustmix, 0.4, 1.0), rng);
  EXPECT_EQ(out.draw.cutoff, 1.0);
  EXPECT_EQ(out.draw.energy_weight, 1.0);
  const DrawOverride same{out.draw.lambda_low, std::nullopt, std::nullopt};
  Rng other(0);
  const MixedBatch ref = mixup_batch(x, y, config(Policy::Mixup), other, same);
  EXPECT_LT(max_abs_diff(out.images, ref.images), 1e-4);
  EXPECT_LT(max_abs_diff(out.labels, ref.labels), 1e-6);
}

TEST(RobustmixTest, MatchesDirectDefinition) {
  for (unsigned trial = 0; trial < 5; ++trial) {
    const Tensor x = oracle::random_tensor({3 + trial % 2, 8, 8, 2}, 100 + trial);
    const Tensor y = oracle::random_labels(x.dim(0), 4, 200 + trial);
    Rng rng(trial);
    const MixedBatch out = robustmix_batch(x, y, config(), rng);
    const std::size_t keep = BandMask::keep_count(8, out.draw.cutoff);
    const auto ref = oracle::naive_band_mix(x, y, out.draw.lambda_low, out.draw.lambda_high, keep, true, 0.0);
    EXPECT_LT(max_abs_diff(out.images, ref.images), 1e-4);
    EXPECT_LT(max_abs_diff(out.labels, ref.labels), 1e-6);
    EXPECT_NEAR(out.draw.energy_weight, oracle::naive_band_energy_fraction(x, keep), 1e-5);
  }
}

TEST(RobustmixTest, LabelsStayOnSimplex) {
  const Tensor x = oracle::random_tensor({8, 8, 8, 1}, 7);
  const Tensor y = oracle::random_labels(8, 6, 8);
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const MixedBatch out = robustmix_batch(x, y, config(), rng);
    for (std::size_t r = 0; r < 8; ++r) {
      double sum = 0.0;
      for (std::size_t j = 0; j < 6; ++j) {
        EXPECT_GE(out.labels[r * 6 + j], 0.0f);
        sum += out.labels[r * 6 + j];
      }
      EXPECT_NEAR(sum, 1.0, 1e-6);
    }
  }
}

TEST(RobustmixTest, OddBatchMiddleRowMixesWithItself) {
  const Tensor x = oracle::random_tensor({5, 4, 4, 1}, 9);
  const Tensor y = one_hot(5, 5);
  Rng rng(1);
  const MixedBatch out = robustmix_batch(x, y, config(), rng);
  for (std::size_t j = 0; j < 16; ++j) EXPECT_NEAR(out.images[2 * 16 + j], x[2 * 16 + j], 1e-5);
  EXPECT_NEAR(out.labels[2 * 5 + 2], 1.0f, 1e-6);
}

TEST(RobustmixTest, ReversedBatchWithComplementLambdasIsUnchanged) {
  // Reversing the batch swaps each row's roles as sample and partner, which
  // complementing both lambdas undoes.
  const Tensor x = oracle::random_tensor({4, 8, 8, 1}, 12);
  const Tensor y = oracle::random_labels(4, 3, 13);
  Rng r1(2), r2(2);
  const MixedBatch a = robustmix_batch(x, y, config(), r1, {0.3, 0.8, 0.5});
  const MixedBatch b = robustmix_batch(reverse_rows(x), reverse_rows(y), config(), r2, {0.7, 0.2, 0.5});
  EXPECT_LT(max_abs_diff(a.images, b.images), 1e-5);
  EXPECT_LT(max_abs_diff(a.labels, b.labels), 1e-6);
}

TEST(RobustmixTest, SameSeedIsBitIdenticalAcrossThreads) {
  const Tensor x = oracle::random_tensor({8, 16, 16, 3}, 14);
  const Tensor y = oracle::random_labels(8, 4, 15);
  AugmentConfig one = config();
  AugmentConfig many = config();
  many.threads = 4;
  Rng r1(77), r2(77);
  const MixedBatch a = robustmix_batch(x, y, one, r1);
  const MixedBatch b = robustmix_batch(x, y, many, r2);
  EXPECT_EQ(a.images, b.images);
  EXPECT_EQ(a.labels, b.labels);
}

TEST(RobustmixTest, RandomPairingIsAPermutation) {
  const Tensor x = oracle::random_tensor({6, 4, 4, 1}, 16);
  const Tensor y = one_hot(6, 6);
  AugmentConfig cfg = config();
  cfg.pairing = Pairing::RandomPermutation;
  Rng rng(4);
  const MixedBatch out = robustmix_batch(x, y, cfg, rng, {1.0, 1.0, 0.5});
  EXPECT_LT(max_abs_diff(out.images, x), 1e-5);
  // With lambda 0 every row becomes its partner; column sums of the one-hot
  // labels then show each partner is used exactly once.
  Rng again(4);
  const MixedBatch swapped = robustmix_batch(x, y, cfg, again, {0.0, 0.0, 0.5});
  for (std::size_t j = 0; j < 6; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < 6; ++i) col += swapped.labels[i * 6 + j];
    EXPECT_NEAR(col, 1.0, 1e-6);
  }
}

TEST(RobustmixTest, RejectsBadInput) {
  Rng rng(0);
  const Tensor y = one_hot(2, 2);
  try {
    robustmix_batch(Tensor({2, 4, 6, 1}), y, config(), rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonSquarePlane);
  }
  EXPECT_THROW(robustmix_batch(Tensor({2, 4, 4}), y, config(), rng), Error);
  EXPECT_THROW(robustmix_batch(Tensor({3, 4, 4, 1}), y, config(), rng), Error);
  try {
    robustmix_batch(Tensor({2, 4, 4, 1}), y, config(), rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroEnergyBatch);
  }
  try {
    robustmix_batch(oracle::random_tensor({2, 4, 4, 1}, 1), y, config(Policy::Robustmix, 0.0), rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidAlpha);
  }
  try {
    robustmix_batch(oracle::random_tensor({2, 4, 4, 1}, 1), y, config(Policy::Robustmix, 0.4, 2.0), rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidTau);
  }
}

TEST(AblationTest, NoEnergyWeightUsesCutoff) {
  const Tensor x = oracle::random_tensor({4, 8, 8, 1}, 20);
  const Tensor y = oracle::random_labels(4, 3, 21);
  Rng r1(6), r2(6);
  const MixedBatch out = robustmix_no_energy_weight_batch(x, y, config(), r1, {0.2, 0.9, 0.5});
  const auto ref = oracle::naive_band_mix(x, y, 0.2, 0.9, 4, false, 0.5);
  EXPECT_LT(max_abs_diff(out.images, ref.images), 1e-4);
  EXPECT_LT(max_abs_diff(out.labels, ref.labels), 1e-6);
  // Images are the same as the full method's; only labels differ.
  const MixedBatch full = robustmix_batch(x, y, config(), r2, {0.2, 0.9, 0.5});
  EXPECT_EQ(out.images, full.images);
}

TEST(AblationTest, ConstantBatchLabelsFollowCutoffNotEnergy) {
  // All energy of a constant image sits in DC, so the energy weight is 1
  // while the cutoff weight is 0.5.
  Tensor x({2, 4, 4, 1});
  for (std::size_t i = 0; i < 16; ++i) {
    x[i] = 1.0f;
    x[16 + i] = 3.0f;
  }
  const Tensor y({2, 2}, {1.0f, 0.0f, 0.0f, 1.0f});
  Rng r1(0), r2(0);
  const MixedBatch full = robustmix_batch(x, y, config(), r1, {1.0, 0.0, 0.5});
  const MixedBatch abl = robustmix_no_energy_weight_batch(x, y, config(), r2, {1.0, 0.0, 0.5});
  EXPECT_NEAR(full.draw.energy_weight, 1.0, 1e-12);
  EXPECT_NEAR(full.labels[0], 1.0f, 1e-6);
  EXPECT_NEAR(abl.labels[0], 0.5f, 1e-6);
  EXPECT_NEAR(abl.labels[1], 0.5f, 1e-6);
}

TEST(AblationTest, NoInbandSwapsBands) {
  const Tensor x = oracle::random_tensor({2, 8, 8, 1}, 30);
  const Tensor y = one_hot(2, 2);
  const DctPlan plan(8);
  for (double c : {0.0, 0.5, 1.0}) {
    Rng rng(9);
    const MixedBatch out = robustmix_no_inband_mix_batch(x, y, config(), rng, {0.4, 0.6, c});
    EXPECT_EQ(out.draw.lambda_low, 1.0);
    EXPECT_EQ(out.draw.lambda_high, 0.0);
    // Row 0 is Low(x0) + High(x1).
    const Tensor expect = subtract(low_pass(x, c, plan), reverse_rows(low_pass(x, c, plan)));
    const Tensor partner = reverse_rows(x);
    for (std::size_t j = 0; j < 64; ++j) EXPECT_NEAR(out.images[j], expect[j] + partner[j], 1e-5) << c;
    EXPECT_NEAR(out.labels[0], out.draw.energy_weight, 1e-6) << c;
  }
}

TEST(AugmenterTest, DispatchesAndBaselineIsIdentity) {
  const Tensor x = oracle::random_tensor({4, 8, 8, 1}, 40);
  const Tensor y = one_hot(4, 2);
  Rng rng(1);
  Augmenter base(config(Policy::Baseline));
  const MixedBatch out = base(x, y, rng);
  EXPECT_EQ(out.images, x);
  EXPECT_EQ(out.labels, y);
  Rng untouched(1);
  EXPECT_EQ(rng.next_u64(), untouched.next_u64());

  for (Policy p : {Policy::Mixup, Policy::Robustmix, Policy::RobustmixNoEnergyWeight,
                   Policy::RobustmixNoInbandMix}) {
    Rng a(3), b(3);
    Augmenter aug(config(p));
    EXPECT_EQ(aug(x, y, a).images, augment_batch(x, y, config(p), b).images) << to_string(p);
    EXPECT_EQ(parse_policy(to_string(p)), p);
  }
  EXPECT_THROW(parse_policy("cutmix"), Error);
}

}  // namespace
}  // namespace robustmix
