#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "faultrank/issues.hpp"

using namespace faultrank;
using namespace faultrank::issues;
using miner::CommitRecord;

namespace {

IssueRecord fixed_bug(std::string key) {
  return {std::move(key), IssueKind::Bug, 100, 200, "Fixed"};
}

CommitRecord commit(std::string hash, std::string message) {
  CommitRecord c;
  c.hash = std::move(hash);
  c.message = std::move(message);
  return c;
}

}  // namespace

TEST(ParseIssues, HeaderOnlyIsEmpty) {
  auto p = parse_issues_text("key,kind,created,resolved,resolution\n");
  EXPECT_TRUE(p.items.empty());
  EXPECT_TRUE(p.warnings.empty());
}

TEST(ParseIssues, SingleRow) {
  auto p = parse_issues_text("key,kind,created,resolved,resolution\nX-1,BUG,100,200,Fixed\n");
  ASSERT_EQ(p.items.size(), 1u);
  EXPECT_EQ(p.items[0], (IssueRecord{"X-1", IssueKind::Bug, 100, 200, "Fixed"}));
}

TEST(ParseIssues, ResolvedBeforeCreatedSkipped) {
  auto p = parse_issues_text("key,kind,created,resolved,resolution\nX-1,BUG,300,200,Fixed\nX-2,BUG,1,2,Fixed\n");
  ASSERT_EQ(p.items.size(), 1u);
  EXPECT_EQ(p.items[0].key, "X-2");
  ASSERT_EQ(p.warnings.size(), 1u);
  EXPECT_NE(p.warnings[0].find("line 2"), std::string::npos);
}

TEST(ParseIssues, MalformedRowsReported) {
  auto p = parse_issues_text(
      "key,kind,created,resolved,resolution\n"
      "x-1,BUG,1,2,Fixed\n"
      "X-2,BUG,yesterday,,\n"
      "X-3,BUG,1\n"
      "X-4,Improvement,2015-12-12,,\n");
  ASSERT_EQ(p.items.size(), 1u);
  EXPECT_EQ(p.items[0].kind, IssueKind::Other);
  EXPECT_FALSE(p.items[0].resolved.has_value());
  EXPECT_EQ(p.warnings.size(), 3u);
}

TEST(ParseIssues, JsonForm) {
  auto p = parse_issues_text(
      R"([{"key":"AMBARI-123","kind":"BUG","created":"2015-12-12T00:00:00Z","resolved":1449878500,"resolution":"Fixed"},
          {"key":"bad"}, 3])");
  ASSERT_EQ(p.items.size(), 1u);
  EXPECT_EQ(p.items[0].created, 1449878400);
  EXPECT_EQ(p.items[0].resolved, 1449878500);
  EXPECT_EQ(p.warnings.size(), 2u);
}

TEST(ParseIssues, UnreadableFileIsFatal) {
  EXPECT_THROW(parse_issues("/nonexistent/issues.csv"), InputError);
}

TEST(IssueKeys, Validity) {
  EXPECT_TRUE(is_valid_issue_key("AMBARI-123"));
  EXPECT_TRUE(is_valid_issue_key("A2B-0"));
  EXPECT_FALSE(is_valid_issue_key("ambari-1"));
  EXPECT_FALSE(is_valid_issue_key("AB-"));
  EXPECT_FALSE(is_valid_issue_key("1AB-2"));
  EXPECT_FALSE(is_valid_issue_key("AB-2x"));
}

TEST(IssueKeys, NumericOrder) {
  EXPECT_TRUE(issue_key_less("ABC-2", "ABC-10"));
  EXPECT_FALSE(issue_key_less("ABC-10", "ABC-2"));
  EXPECT_TRUE(issue_key_less("ABC-99", "ABD-1"));
}

TEST(IssueKeys, WordBoundaries) {
  EXPECT_EQ(mentioned_keys("Fix ABC-12 NPE in parser"), std::vector<std::string>{"ABC-12"});
  EXPECT_EQ(mentioned_keys("Fix ABC-123"), std::vector<std::string>{"ABC-123"});
  EXPECT_TRUE(mentioned_keys("xABC-1 ABC-1x abc-1 ABC-").empty());
  EXPECT_EQ(mentioned_keys("[ABC-1] and (ABC-2)."), (std::vector<std::string>{"ABC-1", "ABC-2"}));
}

TEST(LinkFixes, ExactKeyLinks) {
  std::vector<CommitRecord> cs{commit("c1", "Fix ABC-12 NPE in parser")};
  std::vector<IssueRecord> is{fixed_bug("ABC-12")};
  auto links = link_fixes(cs, is);
  ASSERT_EQ(links.size(), 1u);
  EXPECT_EQ(links[0], (FixLink{"ABC-12", {"c1"}}));
}

TEST(LinkFixes, LongerKeyDoesNotMatch) {
  std::vector<CommitRecord> cs{commit("c1", "Fix ABC-123")};
  std::vector<IssueRecord> is{fixed_bug("ABC-12")};
  EXPECT_TRUE(link_fixes(cs, is).empty());
}

TEST(LinkFixes, CommitNamingTwoKeys) {
  std::vector<CommitRecord> cs{commit("c1", "ABC-1, ABC-2: shared root cause"), commit("c2", "ABC-2 follow-up")};
  std::vector<IssueRecord> is{fixed_bug("ABC-1"), fixed_bug("ABC-2")};
  auto links = link_fixes(cs, is);
  ASSERT_EQ(links.size(), 2u);
  EXPECT_EQ(links[0], (FixLink{"ABC-1", {"c1"}}));
  EXPECT_EQ(links[1], (FixLink{"ABC-2", {"c1", "c2"}}));
}

TEST(LinkFixes, OnlyFixedBugs) {
  std::vector<CommitRecord> cs{commit("c1", "A-1 A-2 A-3 A-4")};
  std::vector<IssueRecord> is{fixed_bug("A-1"), {"A-2", IssueKind::Other, 1, 2, "Fixed"},
                              {"A-3", IssueKind::Bug, 1, 2, "Won't Fix"}, {"A-4", IssueKind::Bug, 1, {}, "Fixed"}};
  auto links = link_fixes(cs, is);
  ASSERT_EQ(links.size(), 1u);
  EXPECT_EQ(links[0].issue_key, "A-1");
}

TEST(LinkFixes, IndependentOfInputOrder) {
  std::mt19937_64 rng(3);
  std::vector<CommitRecord> cs;
  std::vector<IssueRecord> is;
  for (int i = 0; i < 30; ++i) is.push_back(fixed_bug("P-" + std::to_string(i)));
  for (int i = 0; i < 60; ++i) {
    cs.push_back(commit("h" + std::to_string(i), "P-" + std::to_string(rng() % 40) + " and P-" +
                                                     std::to_string(rng() % 40)));
  }
  auto ref = link_fixes(cs, is);
  EXPECT_FALSE(ref.empty());
  for (int t = 0; t < 10; ++t) {
    std::shuffle(cs.begin(), cs.end(), rng);
    std::shuffle(is.begin(), is.end(), rng);
    EXPECT_EQ(link_fixes(cs, is), ref);
  }
  for (const auto& l : ref) {
    for (const auto& h : l.fix_commits) {
      auto it = std::find_if(cs.begin(), cs.end(), [&](const CommitRecord& c) { return c.hash == h; });
      auto keys = mentioned_keys(it->message);
      EXPECT_NE(std::find(keys.begin(), keys.end(), l.issue_key), keys.end());
    }
  }
}

TEST(LinkFixes, CsvRoundTrip) {
  std::vector<FixLink> links{{"A-2", {"x", "y"}}, {"A-10", {"z"}}};
  std::ostringstream out;
  write_fixlinks_csv(out, links);
  EXPECT_EQ(out.str(), "issue_key,commit_hash\nA-2,x\nA-2,y\nA-10,z\n");
}
