#include "chal/lrp.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "chal/rng.hpp"

using namespace chal;

namespace {

Network single_dense(std::size_t in, std::size_t out, std::vector<double> w,
                     std::vector<double> b) {
  std::vector<LayerParams> params(1);
  params[0].weight = Tensor({in, out}, std::move(w));
  params[0].bias = Tensor({out}, std::move(b));
  return Network({DenseSpec{in, out}}, {in}, std::move(params));
}

double relevance_sum(const RelevanceMap& m) {
  const auto vals = m.relevance.values();
  return std::accumulate(vals.begin(), vals.end(), 0.0);
}

// positive-weight networks keep every denominator strictly positive on
// positive inputs, which makes the conservation identity exact at eps = 0
Network positive_net(Rng& rng, std::vector<LayerSpec> specs,
                     const std::vector<std::size_t>& input_shape) {
  Network net = build_network(std::move(specs), input_shape, rng.next_u64());
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    if (!layer_has_params(net.spec(i))) continue;
    for (double& v : net.params(i).weight.values()) v = std::abs(v) + 1e-3;
    for (double& v : net.params(i).bias.values()) v = 0.01;
  }
  return net;
}

}  // namespace

TEST_CASE("identity weights give each logit its own feature back") {
  Network net = single_dense(2, 2, {1, 0, 0, 1}, {0, 0});
  Tensor x({1, 2}, {2, 3});
  ForwardTrace trace = forward_traced(net, x);

  EpsilonRuleConfig cfg{.epsilon = 0.0};
  RelevanceMap r0 = lrp_epsilon(net, trace, 0, cfg);
  RelevanceMap r1 = lrp_epsilon(net, trace, 1, cfg);
  CHECK(r0.relevance[0] == doctest::Approx(2.0));
  CHECK(r0.relevance[1] == 0.0);
  CHECK(r1.relevance[0] == 0.0);
  CHECK(r1.relevance[1] == doctest::Approx(3.0));
  CHECK(r0.class_index == 0);
  CHECK(r0.epsilon == 0.0);
}

TEST_CASE("single output neuron splits its logit by contribution") {
  // z = [1*2, 1*2], sum 4, seed logit 4: each input carries half
  Network net = single_dense(2, 1, {2, 2}, {0});
  ForwardTrace trace = forward_traced(net, Tensor({1, 2}, {1, 1}));
  RelevanceMap r = lrp_epsilon(net, trace, 0, EpsilonRuleConfig{.epsilon = 0.0});
  CHECK(r.relevance[0] == doctest::Approx(2.0));
  CHECK(r.relevance[1] == doctest::Approx(2.0));
}

TEST_CASE("zero denominator is stabilized to a finite split") {
  // w = [1, -1] cancels on x = [1, 1]; the bias keeps the logit at 1 and the
  // stabilizer (sign(0) treated as +) turns 0 into +eps
  Network net = single_dense(2, 1, {1, -1}, {1});
  ForwardTrace trace = forward_traced(net, Tensor({1, 2}, {1, 1}));
  RelevanceMap r = lrp_epsilon(net, trace, 0, EpsilonRuleConfig{.epsilon = 1e-2});
  CHECK(std::isfinite(r.relevance[0]));
  CHECK(r.relevance[0] == doctest::Approx(100.0));
  CHECK(r.relevance[1] == doctest::Approx(-100.0));
  CHECK(std::abs(relevance_sum(r)) <= 1.0);  // |sum| bounded by |logit|

  // with eps = 0 the unit distributes nothing instead of dividing by zero
  RelevanceMap skipped =
      lrp_epsilon(net, trace, 0, EpsilonRuleConfig{.epsilon = 0.0});
  CHECK(skipped.relevance[0] == 0.0);
  CHECK(skipped.relevance[1] == 0.0);
}

TEST_CASE("all-zero input gets all-zero relevance") {
  Rng rng(31);
  Network net = build_network({DenseSpec{4, 3}, ReluSpec{}, DenseSpec{3, 2}},
                              {4}, rng.next_u64());
  net.params(0).bias[0] = 0.7;  // nonzero logits, still no input contribution
  ForwardTrace trace = forward_traced(net, Tensor({1, 4}));
  RelevanceMap r = lrp_epsilon(net, trace, 1);
  for (double v : r.relevance.values()) CHECK(v == 0.0);
}

TEST_CASE("zero-activation features receive zero relevance") {
  Network net = single_dense(3, 2, {1, 2, 3, 4, 5, 6}, {0, 0});
  ForwardTrace trace = forward_traced(net, Tensor({1, 3}, {0.5, 0.0, 1.5}));
  RelevanceMap r = lrp_epsilon(net, trace, 0);
  CHECK(r.relevance[1] == 0.0);
  CHECK(r.relevance[0] != 0.0);
}

TEST_CASE("conservation holds on positive networks at eps zero") {
  Rng rng(404);
  EpsilonRuleConfig cfg{.epsilon = 0.0};
  for (int trial = 0; trial < 10; ++trial) {
    Network net =
        trial % 2 == 0
            ? positive_net(rng,
                           {DenseSpec{6, 5}, ReluSpec{}, DenseSpec{5, 3}}, {6})
            : positive_net(rng,
                           {Conv2DSpec{1, 2, 3, 3}, ReluSpec{},
                            MaxPool2Spec{}, FlattenSpec{}, DenseSpec{8, 3}},
                           {1, 6, 6});
    std::vector<std::size_t> dims{1};
    for (std::size_t d : net.input_shape()) dims.push_back(d);
    Tensor x(dims);
    for (double& v : x.values()) v = 0.05 + rng.uniform();
    ForwardTrace trace = forward_traced(net, x);
    for (std::size_t k = 0; k < net.class_count(); ++k) {
      RelevanceMap r = lrp_epsilon(net, trace, k, cfg);
      const double logit = trace.logits.row(0)[k];
      REQUIRE(logit > 0.0);
      CHECK(relevance_sum(r) ==
            doctest::Approx(logit).epsilon(1e-9));
    }
  }
}

TEST_CASE("positive epsilon shrinks total relevance") {
  Rng rng(405);
  Network net = positive_net(
      rng, {DenseSpec{6, 8}, ReluSpec{}, DenseSpec{8, 3}}, {6});
  Tensor x({1, 6});
  for (double& v : x.values()) v = 0.1 + rng.uniform();
  ForwardTrace trace = forward_traced(net, x);
  for (double eps : {1e-3, 1e-1, 1.0}) {
    RelevanceMap r = lrp_epsilon(net, trace, 0, EpsilonRuleConfig{.epsilon = eps});
    const double total = relevance_sum(r);
    CHECK(total >= 0.0);
    CHECK(total <= trace.logits.row(0)[0] + 1e-12);
  }
}

TEST_CASE("literal stabilizer differs from the signed one") {
  // denominator -0.5: signed gives -0.51, literal gives -0.49
  Network net = single_dense(1, 1, {-0.5}, {2});
  ForwardTrace trace = forward_traced(net, Tensor({1, 1}, {1}));
  EpsilonRuleConfig signed_cfg{.epsilon = 0.01};
  EpsilonRuleConfig literal_cfg{.epsilon = 0.01, .sign_stabilization = false};
  const double logit = trace.logits[0];  // 1.5
  CHECK(lrp_epsilon(net, trace, 0, signed_cfg).relevance[0] ==
        doctest::Approx(-0.5 / -0.51 * logit));
  CHECK(lrp_epsilon(net, trace, 0, literal_cfg).relevance[0] ==
        doctest::Approx(-0.5 / -0.49 * logit));
}

TEST_CASE("softmax seeding scales the map by the class probability") {
  Network net = single_dense(2, 2, {1, 0, 0, 1}, {0, 0});
  ForwardTrace trace = forward_traced(net, Tensor({1, 2}, {2, 3}));
  EpsilonRuleConfig cfg{.epsilon = 0.0, .seed_from_softmax = true};
  RelevanceMap r = lrp_epsilon(net, trace, 0, cfg);
  const double p0 = std::exp(2.0) / (std::exp(2.0) + std::exp(3.0));
  CHECK(r.relevance[0] == doctest::Approx(p0));
}

TEST_CASE("batched attribution equals independent per-sample calls") {
  Rng rng(777);
  Network net = build_network(
      {Conv2DSpec{1, 2, 2, 2}, ReluSpec{}, FlattenSpec{}, DenseSpec{18, 4}},
      {1, 4, 4}, rng.next_u64());
  Tensor batch({4, 1, 4, 4});
  for (double& v : batch.values()) v = rng.normal();
  const std::vector<std::size_t> classes{3, 0, 2, 0};

  ForwardTrace trace = forward_traced(net, batch);
  const auto maps = batch_lrp(net, trace, classes);
  REQUIRE(maps.size() == 4);

  for (std::size_t b = 0; b < 4; ++b) {
    Tensor one({1, 1, 4, 4}, std::vector<double>(batch.row(b).begin(),
                                                 batch.row(b).end()));
    ForwardTrace single = forward_traced(net, one);
    RelevanceMap want = lrp_epsilon(net, single, classes[b]);
    REQUIRE(maps[b].relevance.same_shape(want.relevance));
    for (std::size_t i = 0; i < want.relevance.size(); ++i) {
      CHECK(maps[b].relevance[i] == want.relevance[i]);  // bit-exact
    }
    CHECK(maps[b].class_index == classes[b]);
  }
}

TEST_CASE("lrp rejects bad arguments") {
  Network net = single_dense(2, 2, {1, 0, 0, 1}, {0, 0});
  ForwardTrace trace = forward_traced(net, Tensor({2, 2}, {1, 2, 3, 4}));
  CHECK_THROWS_AS(lrp_epsilon(net, trace, 0), std::invalid_argument);
  CHECK_THROWS_AS(batch_lrp(net, trace, {0}), std::invalid_argument);
  CHECK_THROWS_AS(batch_lrp(net, trace, {0, 2}), std::invalid_argument);
  CHECK_THROWS_AS(
      batch_lrp(net, trace, {0, 0}, EpsilonRuleConfig{.epsilon = -1.0}),
      std::invalid_argument);
}
