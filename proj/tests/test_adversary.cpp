#include <gtest/gtest.h>

#include <cmath>

#include "prl/adversary.hpp"
#include "prl/error.hpp"
#include "prl/synthetic.hpp"

using namespace prl;

namespace {

Dataset blobs(std::size_t per_class, std::uint64_t seed, double sigma = 0.1) {
  MixtureSpec spec;
  spec.k = 3;
  spec.d = 4;
  spec.means = {0.2, 0.2, 0.5, 0.5, 0.8, 0.5, 0.2, 0.5, 0.5, 0.8, 0.8, 0.2};
  spec.sigma = sigma;
  spec.samples_per_class = {per_class, per_class, per_class};
  Rng rng(seed);
  return gen_mixture(spec, rng);
}

Mlp small_net(std::uint64_t seed, std::vector<std::size_t> dims = {4, 16, 3}) {
  Rng rng(seed);
  return Mlp::create(dims, 0.0, rng);
}

}  // namespace

TEST(AttackSpec, StepSizeRuleAndValidation) {
  const auto s = AttackSpec::linf(0.1, 10);
  EXPECT_NEAR(s.step_size, 0.025, 1e-15);
  AttackSpec bad = s;
  bad.epsilon = -1;
  EXPECT_THROW(bad.validate(), NumericError);
  bad = s;
  bad.restarts = 0;
  EXPECT_THROW(bad.validate(), NumericError);
  bad = s;
  bad.targeted = true;
  EXPECT_THROW(bad.validate(), NumericError);
  AttackSpec::linf(0.0, 10).validate();
}

TEST(Pgd, ZeroEpsilonIsIdentity) {
  const Dataset data = blobs(10, 1);
  const Mlp net = small_net(2);
  const Tensor x = data.to_tensor();
  EXPECT_EQ(pgd_attack(net, x, data.labels, AttackSpec::linf(0.0, 10), 3), x);
}

TEST(Pgd, LinearSingleStepClosedForm) {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const Mlp net = small_net(10 + t, {5, 4});
    Tensor x = Tensor::matrix(6, 5);
    for (double& v : x.values()) v = rng.uniform();
    std::vector<std::uint16_t> y(6);
    for (auto& v : y) v = static_cast<std::uint16_t>(rng.below(4));
    const double eps = 0.03 + 0.1 * rng.uniform();
    AttackSpec spec = AttackSpec::linf(eps, 1, 1, false);
    spec.step_size = 0.5 * eps + eps * rng.uniform();
    const Tensor xa = pgd_attack(net, x, y, spec, 5);

    const Layer& L = net.layers[0];
    for (std::size_t r = 0; r < 6; ++r) {
      std::vector<double> z(4), p(4);
      double m = -1e300, s = 0;
      for (std::size_t o = 0; o < 4; ++o) {
        z[o] = L.bias[o];
        for (std::size_t i = 0; i < 5; ++i) z[o] += L.weight(o, i) * x(r, i);
        m = std::max(m, z[o]);
      }
      for (std::size_t o = 0; o < 4; ++o) s += p[o] = std::exp(z[o] - m);
      for (double& v : p) v /= s;
      for (std::size_t i = 0; i < 5; ++i) {
        double g = 0;
        for (std::size_t o = 0; o < 4; ++o) g += L.weight(o, i) * (p[o] - (o == y[r] ? 1.0 : 0.0));
        const double sign = g > 0 ? 1.0 : (g < 0 ? -1.0 : 0.0);
        const double lo = std::max(0.0, x(r, i) - eps), hi = std::min(1.0, x(r, i) + eps);
        const double expect = std::clamp(x(r, i) + spec.step_size * sign, lo, hi);
        EXPECT_NEAR(xa(r, i), expect, 1e-12);
      }
    }
  }
}

TEST(Pgd, IteratesStayFeasible) {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const Mlp net = small_net(100 + t);
    Tensor x = Tensor::matrix(4, 4);
    for (double& v : x.values()) v = rng.bernoulli(0.2) ? std::round(rng.uniform()) : rng.uniform();
    std::vector<std::uint16_t> y(4);
    for (auto& v : y) v = static_cast<std::uint16_t>(rng.below(3));
    const double eps = rng.uniform(0.0, 0.3);
    const auto spec = AttackSpec::linf(eps, 1 + static_cast<int>(rng.below(10)),
                                       1 + static_cast<int>(rng.below(3)), rng.bernoulli(0.5));
    const Tensor xa = pgd_attack(net, x, y, spec, t);
    for (std::size_t i = 0; i < x.size(); ++i) {
      ASSERT_LE(std::abs(xa[i] - x[i]), eps);
      ASSERT_GE(xa[i], 0.0);
      ASSERT_LE(xa[i], 1.0);
    }
  }
}

TEST(Pgd, IncreasesLossAndRestartsNeverHurt) {
  const Dataset data = blobs(40, 6);
  Mlp net = small_net(7);
  TrainSpec ts;
  ts.epochs = 20;
  Rng rng(8);
  fit(net, data, ts, rng);
  const Tensor x = data.to_tensor();
  const auto clean = per_example_xent(predict_logits(net, x), data.labels);
  const Tensor one = pgd_attack(net, x, data.labels, AttackSpec::linf(0.1, 10, 1), 9);
  const Tensor many = pgd_attack(net, x, data.labels, AttackSpec::linf(0.1, 10, 4), 9);
  const auto l1 = per_example_xent(predict_logits(net, one), data.labels);
  const auto l4 = per_example_xent(predict_logits(net, many), data.labels);
  double c = 0, a = 0;
  for (std::size_t i = 0; i < data.n; ++i) {
    c += clean[i];
    a += l1[i];
  }
  EXPECT_GT(a, c);
  // restart 0 uses the same start as the single-restart attack
  const auto p1 = predict(net, one), p4 = predict(net, many);
  for (std::size_t i = 0; i < data.n; ++i) {
    const bool wrong1 = p1[i] != data.labels[i], wrong4 = p4[i] != data.labels[i];
    EXPECT_TRUE(wrong4 || !wrong1);
    if (wrong1 == wrong4) EXPECT_GE(l4[i], l1[i]);
  }
}

TEST(Pgd, DeterministicInSeed) {
  const Dataset data = blobs(10, 1);
  const Mlp net = small_net(2);
  const Tensor x = data.to_tensor();
  const auto spec = AttackSpec::linf(0.05, 5, 2);
  EXPECT_EQ(pgd_attack(net, x, data.labels, spec, 11), pgd_attack(net, x, data.labels, spec, 11));
  EXPECT_NE(pgd_attack(net, x, data.labels, spec, 11), pgd_attack(net, x, data.labels, spec, 12));
}

TEST(AdversarialTrain, ZeroEpsilonEqualsPlainFit) {
  const Dataset data = blobs(20, 3);
  AdvTrainSpec spec;
  spec.train_attack = AttackSpec::linf(0.0, 10);
  spec.train.epochs = 3;
  spec.train.batch_size = 16;
  Mlp a = small_net(4), b = small_net(4);
  adversarial_train(a, data, spec, 77);
  Rng rng(derive_seed(77, "train"));
  fit(b, data, spec.train, rng);
  for (std::size_t l = 0; l < a.layers.size(); ++l) EXPECT_EQ(a.layers[l].weight, b.layers[l].weight);
}

TEST(AdversarialTrain, ImprovesRobustAccuracy) {
  const Dataset train = blobs(100, 5, 0.08), test = blobs(100, 6, 0.08);
  AdvTrainSpec spec;
  spec.train_attack = AttackSpec::linf(0.1, 5);
  spec.train.epochs = 30;
  Mlp plain = small_net(1), robust = small_net(1);
  Rng rng(2);
  fit(plain, train, spec.train, rng);
  adversarial_train(robust, train, spec, 3);
  const auto eval = AttackSpec::linf(0.1, 20);
  EXPECT_GT(robust_accuracy(robust, test, eval, 4), robust_accuracy(plain, test, eval, 4));
}

TEST(RobustAccuracy, BoundedByCleanAccuracy) {
  const Dataset data = blobs(30, 1);
  Mlp net = small_net(2);
  TrainSpec ts;
  ts.epochs = 10;
  Rng rng(3);
  fit(net, data, ts, rng);
  const double clean = 1.0 - error_rate(net, data);
  EXPECT_DOUBLE_EQ(robust_accuracy(net, data, AttackSpec::linf(0.0, 10), 1), clean);
  EXPECT_LE(robust_accuracy(net, data, AttackSpec::linf(0.05, 10), 1), clean);
}

TEST(AdversarialPretrain, LastLayerModeFreezesBody) {
  const Dataset source = blobs(30, 1), target = blobs(20, 2);
  AdvPretrainConfig cfg;
  cfg.hidden = {8};
  cfg.pretrain.train.epochs = 2;
  cfg.finetune.train.epochs = 2;
  cfg.mode = FinetuneMode::last_layer;
  Mlp net = adversarial_pretrain(source, cfg, 5);
  const Layer body = net.layers[0];
  adversarial_finetune(net, target, cfg, 6);
  EXPECT_EQ(net.layers[0].weight, body.weight);
  EXPECT_EQ(net.output_dim(), 3u);
  cfg.mode = FinetuneMode::all;
  Mlp all = adversarial_pretrain(source, cfg, 5);
  adversarial_finetune(all, target, cfg, 6);
  EXPECT_NE(all.layers[0].weight, body.weight);
}
