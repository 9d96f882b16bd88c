#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "faultrank/szz.hpp"
#include "fixture_repo.hpp"
#include "synthetic.hpp"

using namespace faultrank;
using namespace faultrank::szz;
using faultrank::testing::lines;
using faultrank::testing::RepoBuilder;
using faultrank::testing::TempDir;

namespace {

constexpr Timestamp T0 = 1'600'000'000;

issues::IssueRecord bug(std::string key, Timestamp created) {
  return {std::move(key), issues::IssueKind::Bug, created, created + 10, "Fixed"};
}

}  // namespace

TEST(CosmeticLines, Classification) {
  EXPECT_TRUE(is_cosmetic_line(""));
  EXPECT_TRUE(is_cosmetic_line("   \t"));
  EXPECT_TRUE(is_cosmetic_line("  // note"));
  EXPECT_TRUE(is_cosmetic_line("/* block"));
  EXPECT_TRUE(is_cosmetic_line(" * middle"));
  EXPECT_TRUE(is_cosmetic_line(" */"));
  EXPECT_FALSE(is_cosmetic_line("x = a * b; // trailing"));
  EXPECT_FALSE(is_cosmetic_line("}"));
}

TEST(IdentifyInducing, PlantedLine) {
  TempDir tmp;
  RepoBuilder r(tmp.path() / "repo");
  r.commit({{"A.java", lines({"class A {", "}"})}}, "C0", T0);
  r.commit({{"A.java", lines({"class A {", "int broken;", "}"})}}, "C1 plant", T0 + 10);
  r.commit({{"B.java", lines({"class B {}"})}}, "C2", T0 + 20);
  r.commit({{"A.java", lines({"class A {", "// gone", "int fixed;", "}"})}}, "ABC-1 fix", T0 + 30);
  auto h = r.finish();
  miner::History hist(miner::extract_history(tmp.path() / "repo"));
  auto cands = identify_inducing(hist.at(h[3]), bug("ABC-1", T0 + 15), hist);
  ASSERT_EQ(cands.size(), 1u);
  EXPECT_EQ(cands[0], (InducingCandidate{"ABC-1", h[3], h[1], "A.java", 2, false}));
}

TEST(IdentifyInducing, AddOnlyFixHasNoCandidates) {
  TempDir tmp;
  RepoBuilder r(tmp.path() / "repo");
  r.commit({{"A.java", lines({"a"})}}, "C0", T0);
  r.commit({{"A.java", lines({"a", "b"})}}, "ABC-1", T0 + 10);
  auto h = r.finish();
  miner::History hist(miner::extract_history(tmp.path() / "repo"));
  EXPECT_TRUE(identify_inducing(hist.at(h[1]), bug("ABC-1", T0 + 5), hist).empty());
}

TEST(IdentifyInducing, CosmeticDeletionsIgnored) {
  TempDir tmp;
  RepoBuilder r(tmp.path() / "repo");
  r.commit({{"A.java", lines({"a", "// c", "", "b"})}}, "C0", T0);
  r.commit({{"A.java", lines({"a", "b"})}}, "ABC-1", T0 + 10);
  auto h = r.finish();
  miner::History hist(miner::extract_history(tmp.path() / "repo"));
  EXPECT_TRUE(identify_inducing(hist.at(h[1]), bug("ABC-1", T0 + 5), hist).empty());
}

TEST(IdentifyInducing, PostdatingCandidateIsFiltered) {
  TempDir tmp;
  RepoBuilder r(tmp.path() / "repo");
  r.commit({{"A.java", lines({"a"})}}, "C0", T0);
  r.commit({{"A.java", lines({"a", "late"})}}, "C1", T0 + 100);
  r.commit({{"A.java", lines({"a"})}}, "ABC-1", T0 + 200);
  auto h = r.finish();
  miner::History hist(miner::extract_history(tmp.path() / "repo"));
  auto cands = identify_inducing(hist.at(h[2]), bug("ABC-1", T0 + 50), hist);
  ASSERT_EQ(cands.size(), 1u);
  EXPECT_EQ(cands[0].inducing_commit, h[1]);
  EXPECT_TRUE(cands[0].date_filtered);
  auto labels = label_commits(hist.commits(), cands);
  EXPECT_TRUE(std::none_of(labels.begin(), labels.end(), [](const FaultLabel& l) { return l.inducing; }));
}

TEST(IdentifyInducing, RootFixIsEmpty) {
  TempDir tmp;
  RepoBuilder r(tmp.path() / "repo");
  r.commit({{"A.java", lines({"a"})}}, "ABC-1", T0);
  auto h = r.finish();
  miner::History hist(miner::extract_history(tmp.path() / "repo"));
  EXPECT_TRUE(identify_inducing(hist.at(h[0]), bug("ABC-1", T0), hist).empty());
}

TEST(IdentifyInducing, CollapsesPerCommitAndFile) {
  TempDir tmp;
  RepoBuilder r(tmp.path() / "repo");
  r.commit({{"A.java", lines({"x", "y", "z"})}, {"B.java", lines({"p"})}}, "C0", T0);
  r.commit({{"A.java", lines({"q"})}, {"B.java", lines({"r"})}}, "ABC-1", T0 + 10);
  auto h = r.finish();
  miner::History hist(miner::extract_history(tmp.path() / "repo"));
  auto cands = identify_inducing(hist.at(h[1]), bug("ABC-1", T0 + 5), hist);
  ASSERT_EQ(cands.size(), 2u);
  EXPECT_EQ(cands[0].file, "A.java");
  EXPECT_EQ(cands[0].line, 1u);
  EXPECT_EQ(cands[1].file, "B.java");
}

TEST(IdentifyInducing, SyntheticScenarios) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    TempDir tmp;
    bool filtered = seed % 4 == 3;
    auto s = faultrank::testing::make_szz_scenario(tmp.path() / "repo", seed, filtered);
    miner::History hist(miner::extract_history(tmp.path() / "repo"));
    auto cands = identify_inducing(hist.at(s.fix), s.issue, hist);
    ASSERT_EQ(cands.size(), 1u) << "seed " << seed;
    EXPECT_EQ(cands[0].inducing_commit, s.planted) << "seed " << seed;
    EXPECT_EQ(cands[0].date_filtered, filtered) << "seed " << seed;
  }
}

TEST(LabelCommits, NoCandidates) {
  std::vector<miner::CommitRecord> all(3);
  for (int i = 0; i < 3; ++i) all[i].hash = "c" + std::to_string(i);
  auto labels = label_commits(all, {});
  ASSERT_EQ(labels.size(), 3u);
  for (const auto& l : labels) {
    EXPECT_FALSE(l.inducing);
    EXPECT_TRUE(l.issue_keys.empty());
  }
}

TEST(LabelCommits, DirectMappingAndTwoIssues) {
  std::vector<miner::CommitRecord> all(3);
  for (int i = 0; i < 3; ++i) all[i].hash = "c" + std::to_string(i);
  std::vector<InducingCandidate> one{{"ABC-1", "c2", "c0", "f", 1, false}};
  auto labels = label_commits(all, one);
  EXPECT_EQ(labels[0], (FaultLabel{"c0", true, {"ABC-1"}}));
  EXPECT_FALSE(labels[1].inducing);

  std::vector<InducingCandidate> two{{"ABC-10", "c2", "c0", "f", 1, false},
                                     {"ABC-2", "c2", "c0", "g", 4, false},
                                     {"ABC-2", "c2", "c0", "f", 2, false}};
  labels = label_commits(all, two);
  EXPECT_EQ(labels[0], (FaultLabel{"c0", true, {"ABC-2", "ABC-10"}}));
  EXPECT_EQ(std::count_if(labels.begin(), labels.end(), [](const FaultLabel& l) { return l.inducing; }), 1);
}

TEST(LabelCommits, UnknownCommitIsFatal) {
  std::vector<miner::CommitRecord> all(1);
  all[0].hash = "c0";
  std::vector<InducingCandidate> bad{{"ABC-1", "c0", "zz", "f", 1, false}};
  EXPECT_THROW(label_commits(all, bad), ConsistencyError);
}

TEST(LabelCommits, IdempotentAndOrderIndependent) {
  std::mt19937_64 rng(11);
  std::vector<miner::CommitRecord> all(20);
  for (int i = 0; i < 20; ++i) all[i].hash = "c" + std::to_string(i);
  std::vector<InducingCandidate> cands;
  for (int i = 0; i < 40; ++i) {
    cands.push_back({"K-" + std::to_string(rng() % 9), "c19", "c" + std::to_string(rng() % 19), "f", 1,
                     rng() % 5 == 0});
  }
  auto ref = label_commits(all, cands);
  for (int t = 0; t < 5; ++t) {
    std::shuffle(cands.begin(), cands.end(), rng);
    EXPECT_EQ(label_commits(all, cands), ref);
  }
  auto doubled = cands;
  doubled.insert(doubled.end(), cands.begin(), cands.end());
  EXPECT_EQ(label_commits(all, doubled), ref);
  for (const auto& l : ref) EXPECT_EQ(l.inducing, !l.issue_keys.empty());
}
