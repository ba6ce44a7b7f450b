#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "ifmsan/privacy.hpp"
#include "ifmsan/toy.hpp"

namespace {

using ifmsan::Model;
using ifmsan::PrivacyBudget;
using ifmsan::Tensor;

TEST(EpsilonLowerBound, IsGammaTimesLn2) {
  EXPECT_DOUBLE_EQ(ifmsan::epsilon_lower_bound(0.0), 0.0);
  EXPECT_NEAR(ifmsan::epsilon_lower_bound(1.0), 0.693147, 1e-6);
  EXPECT_NEAR(ifmsan::epsilon_lower_bound(2.0), 1.386294, 1e-6);
  EXPECT_DOUBLE_EQ(ifmsan::epsilon_lower_bound(3.5), 3.5 * std::numbers::ln2);
  EXPECT_THROW(ifmsan::epsilon_lower_bound(-0.1), ifmsan::ParameterError);
}

TEST(EpsilonLowerBound, BudgetDerivesNeverStores) {
  const PrivacyBudget budget{1.5};
  EXPECT_DOUBLE_EQ(budget.epsilon_lower(), 1.5 * std::numbers::ln2);
}

TEST(MeetsDegree, ComparesAgainstTheHalvedProbability) {
  EXPECT_TRUE(ifmsan::meets_degree(0.8, 0.4, 1.0));
  EXPECT_FALSE(ifmsan::meets_degree(0.8, 0.41, 1.0));
  for (const double p : {0.001, 0.4, 1.0}) {
    EXPECT_TRUE(ifmsan::meets_degree(p, p, 0.0));
  }
  EXPECT_THROW(ifmsan::meets_degree(0.0, 0.1, 1.0), ifmsan::ParameterError);
  EXPECT_THROW(ifmsan::meets_degree(0.5, -0.1, 1.0), ifmsan::ParameterError);
  EXPECT_THROW(ifmsan::meets_degree(0.5, 0.1, -1.0), ifmsan::ParameterError);
}

TEST(MeetsDegree, IsMonotoneInTheSanitizedProbability) {
  const double p = 0.7;
  const double gamma = 1.3;
  bool failed_before = false;
  for (double q = 0.0; q <= 1.0; q += 0.01) {
    const bool ok = ifmsan::meets_degree(p, q, gamma);
    if (failed_before) {
      EXPECT_FALSE(ok) << "bound held again at q=" << q;
    }
    failed_before = failed_before || !ok;
  }
}

TEST(ObservedPrivacyLoss, IsTheLogRatio) {
  EXPECT_DOUBLE_EQ(ifmsan::observed_privacy_loss(0.5, 0.5), 0.0);
  EXPECT_NEAR(ifmsan::observed_privacy_loss(0.8, 0.4), std::numbers::ln2, 1e-12);
  EXPECT_NEAR(ifmsan::observed_privacy_loss(0.4, 0.8), -std::numbers::ln2, 1e-12);
  EXPECT_THROW(ifmsan::observed_privacy_loss(0.0, 0.5), ifmsan::ParameterError);
  EXPECT_THROW(ifmsan::observed_privacy_loss(0.5, 0.0), ifmsan::ParameterError);
}

TEST(ControlSanitize, GammaZeroIsTheIdentity) {
  const Model model = ifmsan::make_toy_model(3);
  const Tensor input = ifmsan::make_toy_input(3);
  const auto result =
      ifmsan::control_sanitize(model, input, "fc1", PrivacyBudget{0.0}, 64);
  EXPECT_EQ(result.window_size, 1u);
  EXPECT_DOUBLE_EQ(result.p_sanitized, result.p_original);
  EXPECT_DOUBLE_EQ(result.observed_epsilon, 0.0);
  EXPECT_TRUE(result.trace.empty());
}

TEST(ControlSanitize, FirstHitVerifiedByExhaustiveSweep) {
  const Model model = ifmsan::make_toy_model(3);
  const Tensor input = ifmsan::make_toy_input(3);
  const auto probabilities = ifmsan::infer(model, input);
  const auto top = ifmsan::top_class(probabilities);

  for (const double gamma : {0.5, 1.0, 2.0}) {
    const auto result =
        ifmsan::control_sanitize(model, input, "fc1", PrivacyBudget{gamma}, 512);

    EXPECT_NEAR(result.p_original, top.probability, 1e-12);
    EXPECT_TRUE(ifmsan::meets_degree(result.p_original, result.p_sanitized, gamma));
    EXPECT_GE(result.observed_epsilon,
              ifmsan::epsilon_lower_bound(gamma) - 1e-9);

    // The trace covers 2..window_size and every earlier point fails the bound.
    ASSERT_EQ(result.trace.size(), result.window_size - 1);
    for (std::size_t i = 0; i < result.trace.size(); ++i) {
      EXPECT_EQ(result.trace[i].window_size, i + 2);
      if (result.trace[i].window_size < result.window_size) {
        EXPECT_FALSE(ifmsan::meets_degree(result.p_original,
                                          result.trace[i].probability, gamma));
      }
    }

    // Independent re-sweep reproduces both the probabilities and the hit.
    ifmsan::SanitizationPlan plan;
    std::size_t first_hit = 0;
    for (std::size_t n = 2; n <= result.window_size; ++n) {
      plan.set("fc1", n);
      const auto swept = ifmsan::infer(model, input, plan);
      const double p = swept[top.index];
      EXPECT_DOUBLE_EQ(p, result.trace[n - 2].probability);
      if (first_hit == 0 && ifmsan::meets_degree(top.probability, p, gamma)) {
        first_hit = n;
      }
    }
    EXPECT_EQ(first_hit, result.window_size);
  }
}

TEST(ControlSanitize, AllZeroLayerInputNeverMeetsAPositiveBudget) {
  Model model;
  model.input_dims = {1, 2, 2};
  model.layers.push_back({"relu1", ifmsan::LayerKind::relu, {}, {}, {}});
  ifmsan::FcParams f;
  f.out_features = 2;
  model.layers.push_back({"fc1", ifmsan::LayerKind::fullyconnected, f,
                          Tensor({2, 4}, {1, -1, 2, 0, 0, 3, -2, 1}),
                          Tensor({2}, {0.1f, -0.1f})});
  model.layers.push_back({"prob", ifmsan::LayerKind::softmax, {}, {}, {}});
  const Tensor input({1, 2, 2}, {-1, -2, -3, -4});

  try {
    ifmsan::control_sanitize(model, input, "fc1", PrivacyBudget{1.0}, 16);
    FAIL() << "expected BudgetUnreachableError";
  } catch (const ifmsan::BudgetUnreachableError& e) {
    EXPECT_EQ(e.trace().size(), 15u);
    for (const auto& record : e.trace()) {
      EXPECT_DOUBLE_EQ(record.probability, e.p_original());
    }
  }
}

TEST(ControlSanitize, ValidatesItsArguments) {
  const Model model = ifmsan::make_toy_model(3);
  const Tensor input = ifmsan::make_toy_input(3);
  EXPECT_THROW(
      ifmsan::control_sanitize(model, input, "nope", PrivacyBudget{1.0}, 8),
      ifmsan::ConfigError);
  EXPECT_THROW(
      ifmsan::control_sanitize(model, input, "fc1", PrivacyBudget{-1.0}, 8),
      ifmsan::ParameterError);
  EXPECT_THROW(
      ifmsan::control_sanitize(model, input, "fc1", PrivacyBudget{1.0}, 1),
      ifmsan::ParameterError);
}

}  // namespace
