#include <gtest/gtest.h>

#include <thread>

#include "fairprobe/error.hpp"
#include "fairprobe/external_model.hpp"
#include "fairprobe/fairness.hpp"
#include "helpers.hpp"

using namespace fairprobe;
using namespace fairprobe::testing;

namespace {

std::string adapter(const std::string& args) {
  return std::string("python3 ") + FAIRPROBE_TEST_ADAPTER + " " + args;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

std::string join(const std::vector<Value>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

InputDomain four_params() {
  return InputDomain({param("age", 17, 90), param("edu", 1, 16), param("gender", 0, 1, true), param("hours", 1, 99)});
}

}  // namespace

TEST(External, ConstantAdapter) {
  const auto d = four_params();
  const auto m = connect_external(adapter("--model const:1 --params 4"), d);
  EXPECT_EQ(m->kind(), ModelKind::external);
  EXPECT_EQ(m->alphabet(), (Alphabet{-1, 1}));
  Rng rng(1);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(m->predict(sample_uniform(d, rng)), 1);
  std::vector<PointInput> batch;
  for (int i = 0; i < 300; ++i) batch.push_back(sample_uniform(d, rng));
  EXPECT_EQ(m->predict_batch(batch), std::vector<Label>(300, 1));
  EXPECT_TRUE(m->predict_batch({}).empty());
  EXPECT_FALSE(check_discriminatory(*m, batch[0], d, {}).has_value());
}

TEST(External, DescriptionAndDigest) {
  const auto d = four_params();
  const auto cmd = adapter("--model const:-1 --params 4");
  const auto m = std::make_shared<ExternalModel>(cmd, d);
  EXPECT_EQ(m->description(), "const:-1");
  EXPECT_EQ(m->command(), cmd);
  EXPECT_EQ(m->digest(), ExternalModel(cmd, d).digest());
  EXPECT_NE(m->digest(), ExternalModel(adapter("--model const:1 --params 4"), d).digest());
}

TEST(External, MatchesNativeLogisticOnThousandInputs) {
  const auto d = four_params();
  const std::vector<double> w{1.7, -2.25, 0.8, 0.3333333333333333};
  const double b = -0.125;
  const LogisticModel native(d, w, b);
  std::vector<Value> mins, maxs;
  for (const auto& p : d.params()) {
    mins.push_back(p.min_value);
    maxs.push_back(p.max_value);
  }
  const auto m = connect_external(
      adapter("--params 4 --model linear:" + join(w) + ":" + format_double(b) + ":" + join(mins) + ":" + join(maxs)), d);
  Rng rng(2);
  std::vector<PointInput> xs;
  for (int i = 0; i < 1000; ++i) xs.push_back(sample_uniform(d, rng));
  const auto labels = m->predict_batch(xs);
  std::size_t agree = 0, positives = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    agree += labels[i] == native.predict(xs[i]);
    positives += labels[i] == 1;
  }
  EXPECT_EQ(agree, 1000u);
  EXPECT_GT(positives, 0u);
  EXPECT_LT(positives, 1000u);
}

TEST(External, HandshakeParamMismatch) {
  EXPECT_THROW(connect_external(adapter("--model const:1 --params 3"), four_params()), ProtocolError);
}

TEST(External, HandshakeBadAlphabet) {
  EXPECT_THROW(connect_external(adapter("--model const:1 --params 4 --alphabet 1,1"), four_params()),
               ProtocolError);
}

TEST(External, SpawnFailureIsTransportError) {
  EXPECT_THROW(connect_external("/nonexistent/adapter-binary", four_params()), TransportError);
  EXPECT_THROW(connect_external("exit 0", four_params()), TransportError);
}

TEST(External, NonJsonHandshake) {
  EXPECT_THROW(connect_external("echo hello; cat >/dev/null", four_params()), ProtocolError);
}

TEST(External, MalformedRepliesAreProtocolErrors) {
  const auto d = four_params();
  const auto x = pt({30, 5, 1, 40});
  for (const char* fault : {"garbage", "short", "label", "reject"}) {
    const auto m = connect_external(adapter(std::string("--model const:1 --params 4 --fault ") + fault), d);
    const std::vector<PointInput> two{x, x};
    EXPECT_THROW(m->predict_batch(two), ProtocolError) << fault;
  }
}

TEST(External, FaultAfterSomeRequests) {
  const auto d = four_params();
  const auto m = connect_external(adapter("--model const:1 --params 4 --fault reject --fault-after 3"), d);
  const auto x = pt({30, 5, 1, 40});
  for (int i = 0; i < 3; ++i) EXPECT_EQ(m->predict(x), 1);
  EXPECT_THROW(m->predict(x), ProtocolError);
}

TEST(External, ChildExitIsTransportError) {
  const auto d = four_params();
  const auto m = connect_external(adapter("--model const:1 --params 4 --fault die --fault-after 1"), d);
  const auto x = pt({30, 5, 1, 40});
  EXPECT_EQ(m->predict(x), 1);
  EXPECT_THROW(m->predict(x), TransportError);
  EXPECT_THROW(m->predict(x), TransportError);
}

TEST(External, WrongArityIsContractError) {
  const auto m = connect_external(adapter("--model const:1 --params 4"), four_params());
  EXPECT_THROW(m->predict(pt({1, 2})), ContractError);
}

TEST(External, ConcurrentCallersAreSerialized) {
  const auto d = four_params();
  const auto m = connect_external(adapter("--model linear:1,1,1,1:-2:17,1,0,1:90,16,1,99 --params 4"), d);
  const LogisticModel native(d, {1, 1, 1, 1}, -2);
  std::vector<std::thread> threads;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 4; ++t)
    threads.emplace_back([&, t] {
      Rng rng(static_cast<std::uint64_t>(100 + t));
      for (int i = 0; i < 50; ++i) {
        std::vector<PointInput> xs;
        for (int k = 0; k < 7; ++k) xs.push_back(sample_uniform(d, rng));
        const auto labels = m->predict_batch(xs);
        for (std::size_t k = 0; k < xs.size(); ++k)
          if (labels[k] != native.predict(xs[k])) ++mismatches;
      }
    });
  for (auto& th : threads) th.join();
  EXPECT_EQ(mismatches.load(), 0);
}
