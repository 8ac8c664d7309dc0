/* Copyright 2026 The Dualguard Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Exercises the shared library through its C header only.

#include "dualguard/dualguard.h"

#include <cmath>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("dualguard_capi_" + name);
  std::filesystem::remove_all(p);
  return p;
}

TEST(CApi, VersionAndDsr) {
  EXPECT_STREQ(dg_version(), "1.0.0");
  double dsr = 0.0;
  ASSERT_EQ(dg_compute_dsr(100, 5, &dsr), DG_OK);
  EXPECT_DOUBLE_EQ(dsr, 95.0);
  EXPECT_EQ(dg_compute_dsr(0, 0, &dsr), DG_ERR_NUMERIC);
  EXPECT_NE(std::string(dg_last_error()), "");
  EXPECT_EQ(dg_compute_dsr(1, 1, nullptr), DG_ERR_ARGUMENT);
}

TEST(CApi, TensorRoundTrip) {
  const size_t dims[] = {2, 2};
  const float data[] = {3, 0, 0, 4};
  dg_tensor* t = nullptr;
  ASSERT_EQ(dg_tensor_create(dims, 2, data, &t), DG_OK);
  EXPECT_DOUBLE_EQ(dg_tensor_frobenius(t), 5.0);
  const auto dir = scratch("tensor");
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "t.dtvt").string();
  ASSERT_EQ(dg_tensor_write(t, path.c_str()), DG_OK);
  dg_tensor* back = nullptr;
  ASSERT_EQ(dg_tensor_read(path.c_str(), &back), DG_OK);
  EXPECT_EQ(dg_tensor_ndim(back), 2u);
  EXPECT_EQ(dg_tensor_dim(back, 1), 2u);
  EXPECT_EQ(dg_tensor_data(back)[3], 4.0f);
  dg_tensor_free(back);
  dg_tensor_free(t);

  const float nan[] = {NAN};
  const size_t one[] = {1};
  EXPECT_EQ(dg_tensor_create(one, 1, nan, &t), DG_ERR_DATA);
  EXPECT_EQ(t, nullptr);
  EXPECT_EQ(dg_tensor_read((dir / "missing.dtvt").string().c_str(), &t), DG_ERR_DATA);
  std::filesystem::remove_all(dir);
}

TEST(CApi, ConfigErrors) {
  dg_config* cfg = nullptr;
  ASSERT_EQ(dg_config_load(nullptr, &cfg), DG_OK);
  EXPECT_EQ(dg_config_set(cfg, "nonsense.key=1"), DG_ERR_CONFIG);
  EXPECT_EQ(dg_config_set(cfg, "textual.lambda=0.5"), DG_OK);
  EXPECT_EQ(dg_config_set(cfg, "textual.lambda=-3"), DG_OK);  // checked on validate
  EXPECT_EQ(dg_config_validate(cfg), DG_ERR_CONFIG);
  char* json = nullptr;
  ASSERT_EQ(dg_config_to_json(cfg, &json), DG_OK);
  EXPECT_NE(std::string(json).find("-3"), std::string::npos);
  dg_string_free(json);
  dg_config_free(cfg);
  EXPECT_EQ(dg_config_load("/no/such/config.json", &cfg), DG_ERR_CONFIG);
  EXPECT_EQ(dg_config_validate(nullptr), DG_ERR_ARGUMENT);
}

TEST(CApi, TrainLoadAndApply) {
  const auto out = scratch("pipeline");
  dg_config* cfg = nullptr;
  ASSERT_EQ(dg_config_load(nullptr, &cfg), DG_OK);
  ASSERT_EQ(dg_config_set_out_dir(cfg, out.string().c_str()), DG_OK);
  ASSERT_EQ(dg_config_set(cfg, "synthetic.pairs_per_category=16"), DG_OK);
  ASSERT_EQ(dg_config_set(cfg, "pipeline.steps=3"), DG_OK);
  char* summary = nullptr;
  ASSERT_EQ(dg_cmd_synth_embed(cfg, &summary), DG_OK) << dg_last_error();
  dg_string_free(summary);
  ASSERT_EQ(dg_cmd_train_directions(cfg, &summary), DG_OK) << dg_last_error();
  EXPECT_NE(std::string(summary).find("\"validation\":\"pass\""), std::string::npos);
  dg_string_free(summary);
  ASSERT_EQ(dg_cmd_train_visual_steering(cfg, nullptr), DG_OK) << dg_last_error();

  dg_bank* bank = nullptr;
  ASSERT_EQ(dg_bank_load((out / "bank").string().c_str(), &bank), DG_OK);
  EXPECT_EQ(dg_bank_categories(bank), 3u);
  EXPECT_EQ(dg_bank_dim(bank), 64u);
  std::vector<float> x(8 * 64);
  for (size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.37 * static_cast<double>(i));
  const size_t dims[] = {8, 64};
  dg_tensor* in = nullptr;
  ASSERT_EQ(dg_tensor_create(dims, 2, x.data(), &in), DG_OK);
  dg_tensor* purified = nullptr;
  char* trace = nullptr;
  ASSERT_EQ(dg_bank_purify(bank, in, 1.0, 0.1, &purified, &trace), DG_OK);
  EXPECT_NE(std::string(trace).find("cap_factor"), std::string::npos);
  double change = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    change += std::pow(dg_tensor_data(purified)[i] - x[i], 2);
  }
  EXPECT_LE(std::sqrt(change), 0.1 * dg_tensor_frobenius(in) * (1 + 1e-6));
  dg_tensor* rejected = purified;
  EXPECT_EQ(dg_bank_purify(bank, in, -1.0, 0.1, &rejected, nullptr), DG_ERR_CONFIG);
  EXPECT_EQ(rejected, nullptr);
  dg_string_free(trace);
  dg_tensor_free(in);

  dg_steering* steering = nullptr;
  ASSERT_EQ(dg_steering_load((out / "visual_steering").string().c_str(), &steering), DG_OK);
  const size_t fdims[] = {16, 32};
  std::vector<float> h(16 * 32, 0.25f);
  dg_tensor* feats = nullptr;
  ASSERT_EQ(dg_tensor_create(fdims, 2, h.data(), &feats), DG_OK);
  dg_tensor* suppressed = nullptr;
  ASSERT_EQ(dg_steering_suppress(steering, 3, 0, feats, 0.0, &suppressed), DG_OK);
  for (size_t i = 0; i < h.size(); ++i) ASSERT_EQ(dg_tensor_data(suppressed)[i], h[i]);
  dg_tensor_free(suppressed);
  EXPECT_EQ(dg_steering_suppress(steering, 1, 0, purified, 2.0, &suppressed), DG_ERR_DATA);

  dg_tensor_free(feats);
  dg_tensor_free(purified);
  dg_steering_free(steering);
  dg_bank_free(bank);
  dg_config_free(cfg);
  std::filesystem::remove_all(out);
}

}  // namespace
