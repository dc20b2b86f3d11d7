// Copyright 2026 The abcboost Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "abcboost/boosting.hpp"
#include "abcboost/model.hpp"

namespace abcboost {
namespace {

Dataset blobs(std::size_t n, int K, std::size_t D, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Dataset d;
  d.features = RealMatrix(n, D);
  d.num_classes = K;
  for (int k = 0; k < K; ++k) d.class_names.push_back("c" + std::to_string(k));
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % static_cast<std::size_t>(K));
    d.labels.push_back(y);
    for (std::size_t f = 0; f < D; ++f) d.features(i, f) = std::sin(2.1 * y + static_cast<double>(f)) + g(rng);
  }
  return d;
}

TrainResult fit(Variant v, int M = 12, bool recenter = false, std::uint64_t seed = 1) {
  TrainConfig c;
  c.variant = v;
  c.leaves = 6;
  c.rounds = M;
  c.recenter = recenter;
  return train(blobs(300, 4, 3, seed), c);
}

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "abcboost_model_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

TEST(Variant, NamesAndParsing) {
  EXPECT_EQ(Variant::mart().name(), "mart");
  EXPECT_EQ(Variant::abc().name(), "abc");
  EXPECT_EQ(Variant::mb().name(), "mb");
  EXPECT_EQ(Variant::fixed(7).name(), "b7");
  EXPECT_EQ(Variant::parse("b1"), Variant::fixed(1));
  EXPECT_EQ(Variant::parse("fixed_base", 4), Variant::fixed(4));
  EXPECT_THROW(Variant::parse("fixed_base"), Error);
  EXPECT_THROW(Variant::parse("bx"), Error);
  EXPECT_THROW(Variant::parse("adaboost"), Error);
  EXPECT_TRUE(Variant::mb().uses_base());
  EXPECT_FALSE(Variant::mb().abc_derivatives());
  EXPECT_FALSE(Variant::fixed(0).adaptive_base());
}

TEST(PredictScores, ZeroRoundsGivesZeros) {
  TrainResult r = fit(Variant::abc());
  auto s = predict_scores(r.model, blobs(1, 4, 3, 9).features.row(0), 0);
  for (double v : s) EXPECT_EQ(v, 0.0);
}

TEST(PredictScores, ReplayMatchesTrainingState) {
  Dataset d = blobs(300, 4, 3, 1);
  for (Variant v : {Variant::mart(), Variant::abc(), Variant::mb(), Variant::fixed(2)}) {
    for (bool recenter : {false, true}) {
      TrainConfig c;
      c.variant = v;
      c.leaves = 6;
      c.rounds = 12;
      c.recenter = recenter;
      TrainResult r = train(d, c);
      for (std::size_t i = 0; i < d.size(); ++i) {
        auto s = predict_scores(r.model, d.features.row(i));
        for (std::size_t k = 0; k < 4; ++k) {
          ASSERT_NEAR(s[k], r.state.scores(i, k), 1e-9) << v.name();
          EXPECT_EQ(s[k], r.state.scores(i, k)) << v.name() << " replay is not bit-identical";
        }
      }
    }
  }
}

TEST(PredictScores, BaseFamilySumsToZero) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-4, 4);
  for (Variant v : {Variant::abc(), Variant::mb(), Variant::fixed(0)}) {
    TrainResult r = fit(v);
    for (int t = 0; t < 100; ++t) {
      std::vector<double> x{u(rng), u(rng), u(rng)};
      double sum = 0;
      for (double s : predict_scores(r.model, x)) sum += s;
      EXPECT_NEAR(sum, 0.0, 1e-9);
    }
  }
}

TEST(PredictScores, PrefixConsistent) {
  TrainResult r = fit(Variant::mart());
  Dataset d = blobs(20, 4, 3, 5);
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto x = d.features.row(i);
    for (std::size_t m = 0; m < r.model.round_count(); ++m) {
      auto before = predict_scores(r.model, x, m);
      r.model.apply_round(m, x, before);
      EXPECT_EQ(before, predict_scores(r.model, x, m + 1));
    }
  }
}

TEST(PredictScores, RejectsBadInput) {
  TrainResult r = fit(Variant::abc());
  std::vector<double> short_x{1.0, 2.0};
  EXPECT_THROW(predict_scores(r.model, short_x), Error);
  std::vector<double> x{1.0, 2.0, 3.0};
  EXPECT_THROW(predict_scores(r.model, x, r.model.round_count() + 1), Error);
}

TEST(PredictClass, Argmax) {
  EXPECT_EQ(argmax(std::vector<double>{1, 3, 2}), 1);
  EXPECT_EQ(argmax(std::vector<double>{0, 0, 0}), 0);
  EXPECT_EQ(argmax(std::vector<double>{-1, 2, 2}), 1);
}

TEST(PredictClass, UntrainedModelPredictsClassZero) {
  Model m;
  m.num_classes = 3;
  m.dims = 2;
  m.class_names = {"a", "b", "c"};
  std::vector<double> x{5, 6};
  EXPECT_EQ(predict_class(m, x), 0);
}

TEST(PredictClass, ScoresAndProbabilitiesAgree) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0, 3);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> s(static_cast<std::size_t>(2 + t % 9));
    for (double& v : s) v = g(rng);
    EXPECT_EQ(argmax(s), argmax(softmax_row(s)));
  }
}

TEST(Serialization, RoundTripIsPredictionIdentical) {
  Dataset probe = blobs(100, 4, 3, 6);
  for (Variant v : {Variant::mart(), Variant::abc(), Variant::mb(), Variant::fixed(3)}) {
    TrainResult r = fit(v, 12, v == Variant::mart());
    auto path = temp_path("roundtrip_" + v.name() + ".json");
    save_model(r.model, path.string());
    Model back = load_model(path.string());
    EXPECT_EQ(back, r.model) << v.name();
    for (std::size_t i = 0; i < probe.size(); ++i) {
      EXPECT_EQ(predict_scores(back, probe.features.row(i)), predict_scores(r.model, probe.features.row(i)));
      EXPECT_EQ(predict_class(back, probe.features.row(i)), predict_class(r.model, probe.features.row(i)));
    }
  }
}

TEST(Serialization, VersionFieldPresent) {
  auto j = model_to_json(fit(Variant::abc(), 2).model);
  EXPECT_EQ(j.at("version").get<int>(), 1);
  auto path = temp_path("version.json");
  save_model(fit(Variant::mart(), 2).model, path.string());
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_NE(text.find("\"version\":1"), std::string::npos);
}

TEST(Serialization, TruncatedFileIsAnError) {
  auto full = temp_path("full.json");
  save_model(fit(Variant::abc(), 4).model, full.string());
  std::ifstream in(full);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  for (std::size_t cut : {std::size_t{0}, std::size_t{1}, text.size() / 3, text.size() / 2, text.size() - 3}) {
    auto p = temp_path("cut.json");
    std::ofstream(p) << text.substr(0, cut);
    EXPECT_THROW(load_model(p.string()), Error) << "cut at " << cut;
  }
  EXPECT_THROW(load_model(temp_path("does_not_exist.json").string()), Error);
}

TEST(Serialization, SchemaViolationsAreErrors) {
  auto good = model_to_json(fit(Variant::abc(), 3).model);
  auto bad_version = good;
  bad_version["version"] = 2;
  EXPECT_THROW(model_from_json(bad_version), Error);
  auto wrong_trees = good;
  wrong_trees["rounds"][0]["trees"].push_back(wrong_trees["rounds"][0]["trees"][0]);
  EXPECT_THROW(model_from_json(wrong_trees), Error);
  auto no_base = good;
  no_base["rounds"][1]["base"] = nullptr;
  EXPECT_THROW(model_from_json(no_base), Error);
  auto bad_feature = good;
  bad_feature["D"] = 0;
  EXPECT_THROW(model_from_json(bad_feature), Error);
  auto wrong_type = good;
  wrong_type["nu"] = "fast";
  EXPECT_THROW(model_from_json(wrong_type), Error);
}

}  // namespace
}  // namespace abcboost
