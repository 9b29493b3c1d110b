#include <gtest/gtest.h>

#include <set>

#include "frobtwist/frobtwist.hpp"
#include "oracles.hpp"

using namespace frobtwist;

namespace {

CurveRecord with_traces(std::vector<std::int32_t> ap, std::uint64_t hash, std::string label = "c") {
  ap.resize(kSmallPrimeCount, 1);
  CurveRecord c;
  c.label = std::move(label);
  c.conductor = 1;
  c.traces = TraceTable(100, std::move(ap));
  c.stored_hash = hash;
  return c;
}

std::vector<std::int8_t> entries_of(std::initializer_list<int> head) {
  std::vector<std::int8_t> v(head.begin(), head.end());
  v.resize(kSignLength, 1);
  return v;
}

}  // namespace

TEST(SignVector, PaperExample) {
  const auto c = with_traces({-2, 0, 4, -3, 4, -5}, 0);
  const auto v = sign_vector(*c.traces, 97);
  const std::vector<int> head{-1, 0, 1, -1, 1, -1};
  for (std::size_t i = 0; i < head.size(); ++i) EXPECT_EQ(v[i], head[i]);
  EXPECT_EQ(v.size(), 24u);
  const auto z = sign_vector(TraceTable(100, std::vector<std::int32_t>(25, 0)), 2);
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_EQ(z[i], 0);
}

TEST(SignVector, ExcludesTargetPrime) {
  std::vector<std::int32_t> ap(25, 1);
  ap[2] = -3;  // a_5
  const auto v = sign_vector(TraceTable(100, ap), 5);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], 1);
  EXPECT_THROW(sign_vector(TraceTable(100, ap), 4), std::invalid_argument);
  EXPECT_THROW(sign_vector(TraceTable(50, std::vector<std::int32_t>(15, 1)), 5), std::invalid_argument);
}

TEST(RelativePattern, PaperExampleSquaresAndSymmetry) {
  const SignVector u(5, entries_of({-1, 0, -1, 1, -1}));
  const SignVector one(5, entries_of({1, 1, 1, 1, 1}));
  EXPECT_EQ(relative_pattern(u, one), RelativePattern(entries_of({-1, 0, -1, 1, -1})));

  SplitMix64 rng(3);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::int8_t> a(kSignLength), b(kSignLength);
    for (auto& x : a) x = static_cast<std::int8_t>(static_cast<int>(rng.below(3)) - 1);
    for (auto& x : b) x = static_cast<std::int8_t>(static_cast<int>(rng.below(3)) - 1);
    const SignVector sa(7, a), sb(7, b);
    ASSERT_EQ(relative_pattern(sa, sb), relative_pattern(sb, sa));
    const auto sq = relative_pattern(sa, sa);
    const auto ab = relative_pattern(sa, sb);
    for (std::size_t i = 0; i < kSignLength; ++i) {
      ASSERT_EQ(sq[i], a[i] == 0 ? 0 : 1);
      ASSERT_EQ(ab[i], a[i] * b[i]);
    }
  }
  EXPECT_THROW(relative_pattern(SignVector(5, entries_of({})), SignVector(7, entries_of({}))), std::invalid_argument);
}

TEST(EmpiricalDistribution, Counting) {
  std::vector<CurveRecord> train{with_traces({1}, 0), with_traces({1}, 0), with_traces({-1}, 0)};
  const auto d = empirical_distribution(train, 2);
  EXPECT_NEAR(d.weight(1), 2.0 / 3, 1e-12);
  EXPECT_NEAR(d.weight(-1), 1.0 / 3, 1e-12);
  EXPECT_NEAR(d.weight(1) + d.weight(-1), 1.0, 1e-12);
  const auto single = empirical_distribution(std::span(train).first(1), 2);
  EXPECT_EQ(single.weight(1), 1.0);
  EXPECT_THROW(empirical_distribution(std::span<const CurveRecord>(), 2), EmptyTraining);
}

TEST(BuildIndex, PaperPair) {
  std::vector<CurveRecord> train{with_traces({-2, 0, 4, -3, 4, -5}, 7), with_traces({2, 1, -4, 3, 4, 5}, 7)};
  const auto index = build_index(train, TwistHashKey{}, 5);
  EXPECT_EQ(index.total_pairs(), 1u);
  const auto* hist = index.find(RelativePattern(entries_of({-1, 0, -1, 1, -1})));
  ASSERT_NE(hist, nullptr);
  EXPECT_EQ(hist->of(-1), 1u);
  EXPECT_EQ(hist->total(), 1u);
}

TEST(BuildIndex, DistinctKeysGiveEmptyIndex) {
  std::vector<CurveRecord> train{with_traces({1}, 1), with_traces({1}, 2), with_traces({-1}, 3)};
  EXPECT_TRUE(build_index(train, TwistHashKey{}, 3).empty());
}

TEST(BuildIndex, ExpansionEqualsFlatPairList) {
  oracle::SyntheticOptions o;
  o.families = 10;
  o.zero_probability = 0.25;
  o.sign_noise = 0.2;
  o.seed = 17;
  const auto curves = oracle::synthetic_families(o);
  ASSERT_EQ(curves.size(), 50u);
  for (std::uint32_t p : {2u, 13u, 97u}) {
    const auto index = build_index(curves, TwistHashKey{}, p);
    std::map<std::pair<std::vector<int>, int>, std::uint64_t> flat;
    std::uint64_t pairs = 0;
    for (std::size_t i = 0; i < curves.size(); ++i)
      for (std::size_t j = i + 1; j < curves.size(); ++j) {
        if (curves[i].stored_hash != curves[j].stored_hash) continue;
        auto pat = oracle::product(oracle::signs_excluding(curves[i], p), oracle::signs_excluding(curves[j], p));
        ++flat[{pat, oracle::sign_of(curves[i].traces->at(p)) * oracle::sign_of(curves[j].traces->at(p))}];
        ++pairs;
      }
    std::map<std::pair<std::vector<int>, int>, std::uint64_t> expanded;
    for (const auto& [pattern, s, n] : index.expand()) {
      const auto e = pattern.entries();
      expanded[{std::vector<int>(e.begin(), e.end()), s}] += n;
    }
    EXPECT_EQ(expanded, flat) << "p=" << p;
    EXPECT_EQ(index.total_pairs(), pairs);
  }
}

TEST(ProxyKey, Examples) {
  std::vector<std::int32_t> ap(25, 0);
  ap[23] = -8;  // a_89
  ap[24] = 3;   // a_97
  ap[22] = 5;   // a_83
  const TraceTable t(100, ap);
  EXPECT_EQ(proxy_key(t, 2, 5).values(), (std::vector<int>{3, 8}));
  EXPECT_EQ(proxy_key(t, 2, 97).values(), (std::vector<int>{8, 5}));
  EXPECT_THROW(proxy_key(t, 17, 5), std::invalid_argument);
}

TEST(ProxyKey, TwistPairsShareKeys) {
  for (const auto& f : oracle::fixture_curves()) {
    if (f.conductor > 100) continue;
    const auto e = oracle::make_curve(f);
    const auto tw = quadratic_twist(e, -1);
    const auto te = build_trace_table(e, 100), tt = build_trace_table(tw, 100);
    ASSERT_EQ(proxy_key(te, 16, 2), proxy_key(tt, 16, 2)) << f.label;
  }
}

TEST(ProxyKey, BlindToSigns) {
  const auto c = build_trace_table(oracle::make_curve(oracle::fixture_curves()[3]), 100);
  std::vector<std::int32_t> neg(c.values().begin(), c.values().end());
  for (auto& a : neg) a = -a;
  const TraceTable n(100, neg);
  for (int k = kProxyMinK; k <= kProxyMaxK; ++k) EXPECT_EQ(proxy_key(c, k, 7), proxy_key(n, k, 7));
}

TEST(Predict, PaperVoteExample) {
  // Training curve E_X with a_5 = -4, test curve with the same key.
  std::vector<CurveRecord> train{with_traces({1, 1, -4}, 9, "X")};
  const TrainingSet training(std::span<const CurveRecord>(train), TwistHashKey{}, 5);
  const auto test = with_traces({1, -1, 4}, 9, "T");
  SignIndex index(5);
  const auto pattern = relative_pattern(sign_vector(*test.traces, 5), training.member(0).signs);
  index.insert(pattern, -1, 80);
  index.insert(pattern, 0, 20);
  const auto rec = predict(test, training, index, empirical_distribution(train, 5), 1, 0);
  EXPECT_EQ(rec.predicted, 4);
  EXPECT_EQ(rec.provenance, Provenance::DeterministicVote);
  EXPECT_EQ(rec.truth, 4);
}

TEST(Predict, GlobalAndClassFallbacks) {
  std::vector<CurveRecord> train{with_traces({1, 1, -4}, 9), with_traces({1, 1, 2}, 9)};
  const SignMatcher m(train, TwistHashKey{}, 5);
  const auto unseen = m.predict_one(with_traces({0, 0, 2}, 10), 1, 0);
  EXPECT_EQ(unseen.provenance, Provenance::GlobalFallback);
  EXPECT_TRUE(unseen.predicted == -4 || unseen.predicted == 2);
  // Same key, but its pattern against both members never occurs among indexed pairs.
  const auto odd = m.predict_one(with_traces({-1, 1, 2, -1}, 9), 1, 0);
  EXPECT_EQ(odd.provenance, Provenance::ClassDistributionFallback);
}

TEST(Predict, TieSampledFromMarginal) {
  // A and B differ only in the sign of a_5, so the test curve receives one vote each for 2 and -2.
  std::vector<CurveRecord> train{with_traces({1, 1, 2}, 1, "A"), with_traces({1, 1, -2}, 1, "B"),
                                 with_traces({1, 1, 2}, 2), with_traces({1, 1, 2}, 3), with_traces({1, 1, 2}, 4)};
  const SignMatcher m(train, TwistHashKey{}, 5);
  int twos = 0;
  const int runs = 2000;
  for (int seed = 0; seed < runs; ++seed) {
    const auto r = m.predict_one(with_traces({1, 1, 2}, 1), static_cast<std::uint64_t>(seed), 0);
    ASSERT_EQ(r.provenance, Provenance::TieSampled);
    twos += r.predicted == 2;
  }
  // Marginal weights 4 : 1 renormalized over the tied pair.
  EXPECT_NEAR(twos / double(runs), 0.8, 0.03);
}

TEST(Predict, SyntheticTwistRecovery) {
  oracle::SyntheticOptions o;
  o.families = 20;
  o.members_per_family = 32;
  o.seed = 5;
  auto curves = oracle::synthetic_families(o);
  std::vector<CurveRecord> train, test;
  for (std::size_t i = 0; i < curves.size(); ++i) (i % 32 == 0 ? test : train).push_back(curves[i]);
  for (std::uint32_t p : {3u, 29u, 97u}) {
    const SignMatcher m(train, TwistHashKey{}, p);
    for (const auto& r : m.predict_all(test, 11)) {
      ASSERT_EQ(r.provenance, Provenance::DeterministicVote) << r.label;
      ASSERT_EQ(r.predicted, *r.truth) << r.label;
    }
  }
}

TEST(Predict, CompressedIndexMatchesFlatList) {
  const auto curves = oracle::mixed_synthetic(23);
  std::vector<CurveRecord> train, test;
  for (std::size_t i = 0; i < curves.size(); ++i) (i % 4 == 0 ? test : train).push_back(curves[i]);
  test.push_back(with_traces({1, 2, 3}, 999999, "stranger"));
  std::map<Provenance, int> seen;
  for (std::uint32_t p : {2u, 11u, 53u, 97u}) {
    const SignMatcher m(train, TwistHashKey{}, p);
    const oracle::FlatMatcher flat(train, p);
    const auto preds = m.predict_all(test, 77);
    for (std::size_t i = 0; i < test.size(); ++i) {
      ASSERT_EQ(preds[i], flat.predict(test[i], 77, i)) << test[i].label.value() << " p=" << p;
      ++seen[preds[i].provenance];
    }
  }
  EXPECT_EQ(seen.size(), 4u);
}

TEST(Predict, ParallelEqualsSerial) {
  oracle::SyntheticOptions o;
  o.families = 25;
  o.zero_probability = 0.2;
  o.sign_noise = 0.2;
  const auto curves = oracle::synthetic_families(o);
  std::vector<CurveRecord> train(curves.begin(), curves.begin() + 90), test(curves.begin() + 90, curves.end());
  const SignMatcher serial(train, TwistHashKey{}, 7, {0, 1});
  const SignMatcher parallel(train, TwistHashKey{}, 7, {0, 4});
  EXPECT_EQ(serial.predict_all(test, 3), parallel.predict_all(test, 3));
}

TEST(Predict, ValuesComeFromCandidatesOrSupport) {
  oracle::SyntheticOptions o;
  o.families = 30;
  o.zero_probability = 0.3;
  o.sign_noise = 0.3;
  o.seed = 8;
  const auto curves = oracle::synthetic_families(o);
  std::vector<CurveRecord> train(curves.begin(), curves.begin() + 120), test(curves.begin() + 120, curves.end());
  const std::uint32_t p = 13;
  const SignMatcher m(train, TwistHashKey{}, p);
  std::set<std::int32_t> allowed;
  for (const auto& c : train) {
    allowed.insert(c.traces->at(p));
    allowed.insert(-c.traces->at(p));
    allowed.insert(0);
  }
  for (const auto& r : m.predict_all(test, 1)) EXPECT_TRUE(allowed.count(r.predicted)) << r.predicted;
}

TEST(Provenance, RoundTrip) {
  for (auto p : {Provenance::DeterministicVote, Provenance::TieSampled, Provenance::ClassDistributionFallback,
                 Provenance::GlobalFallback})
    EXPECT_EQ(parse_provenance(to_string(p)), p);
  EXPECT_FALSE(parse_provenance("nope").has_value());
}
