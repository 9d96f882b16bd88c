#include <gtest/gtest.h>

#include <map>
#include <random>
#include <sstream>

#include "faultrank/miner.hpp"
#include "fixture_repo.hpp"

using namespace faultrank;
using namespace faultrank::miner;
using faultrank::testing::CommitSpec;
using faultrank::testing::lines;
using faultrank::testing::RepoBuilder;
using faultrank::testing::TempDir;

namespace {

constexpr Timestamp T0 = 1'600'000'000;

struct Linear {
  TempDir tmp;
  std::vector<std::string> h;
  Linear() {
    RepoBuilder r(repo());
    r.commit({{"a.txt", lines({"one", "two", "three"})}}, "C1 initial", T0);
    r.commit({{"a.txt", lines({"one", "TWO", "three", "four"})}}, "C2 edit", T0 + 100);
    r.commit({{"b.txt", lines({"bee"})}}, "C3 add b", T0 + 200);
    h = r.finish();
  }
  std::filesystem::path repo() const { return tmp.path() / "repo"; }
};

std::vector<std::string> hashes_of(const std::vector<CommitRecord>& cs) {
  std::vector<std::string> out;
  for (const auto& c : cs) out.push_back(c.hash);
  return out;
}

}  // namespace

TEST(ExtractHistory, EmptyRepository) {
  TempDir tmp;
  RepoBuilder r(tmp.path() / "repo");
  r.finish();
  EXPECT_TRUE(extract_history(tmp.path() / "repo").empty());
}

TEST(ExtractHistory, ThreeLinearCommits) {
  Linear f;
  auto cs = extract_history(f.repo());
  ASSERT_EQ(hashes_of(cs), f.h);
  EXPECT_TRUE(cs[0].is_root());
  EXPECT_EQ(cs[1].parents, std::vector<std::string>{f.h[0]});
  EXPECT_EQ(cs[1].timestamp, T0 + 100);
  EXPECT_EQ(cs[1].author, "dev@example.com");
  EXPECT_EQ(cs[1].message, "C2 edit");

  ASSERT_EQ(cs[1].diffs.size(), 1u);
  const auto& d = cs[1].diffs[0];
  EXPECT_EQ(d.old_path, "a.txt");
  EXPECT_EQ(d.new_path, "a.txt");
  EXPECT_EQ(d.deleted, (std::vector<DiffLine>{{2, "two"}}));
  EXPECT_EQ(d.added, (std::vector<DiffLine>{{2, "TWO"}, {4, "four"}}));

  ASSERT_EQ(cs[2].diffs.size(), 1u);
  EXPECT_TRUE(cs[2].diffs[0].old_path.empty());
  EXPECT_EQ(cs[2].diffs[0].new_path, "b.txt");
}

TEST(ExtractHistory, UntilBoundary) {
  Linear f;
  auto cs = extract_history(f.repo(), T0 + 150);
  EXPECT_EQ(hashes_of(cs), (std::vector<std::string>{f.h[0], f.h[1]}));
  EXPECT_EQ(extract_history(f.repo(), T0 + 100).size(), 2u);
  EXPECT_TRUE(extract_history(f.repo(), T0 - 1).empty());
}

TEST(ExtractHistory, UnreadableRepository) {
  TempDir tmp;
  EXPECT_THROW(extract_history(tmp.path() / "missing"), InputError);
  EXPECT_THROW(extract_history(tmp.path()), InputError);
}

TEST(ExtractHistory, Deterministic) {
  Linear f;
  std::ostringstream a, b;
  auto c1 = extract_history(f.repo());
  auto c2 = extract_history(f.repo());
  write_commits_jsonl(a, c1, "p");
  write_commits_jsonl(b, c2, "p");
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(c1, c2);
}

TEST(ExtractHistory, PureRenameHasNoLineChanges) {
  TempDir tmp;
  RepoBuilder r(tmp.path() / "repo");
  r.commit({{"old.txt", lines({"x", "y", "z"})}}, "add", T0);
  r.commit({{"old.txt", std::nullopt}, {"new.txt", lines({"x", "y", "z"})}}, "move", T0 + 1);
  r.finish();
  auto cs = extract_history(tmp.path() / "repo");
  ASSERT_EQ(cs.size(), 2u);
  ASSERT_EQ(cs[1].diffs.size(), 1u);
  EXPECT_EQ(cs[1].diffs[0].old_path, "old.txt");
  EXPECT_EQ(cs[1].diffs[0].new_path, "new.txt");
  EXPECT_TRUE(cs[1].diffs[0].added.empty());
  EXPECT_TRUE(cs[1].diffs[0].deleted.empty());
}

TEST(ExtractHistory, DissimilarMoveIsDeleteAndAdd) {
  TempDir tmp;
  RepoBuilder r(tmp.path() / "repo");
  r.commit({{"old.txt", lines({"a", "b", "c", "d"})}}, "add", T0);
  r.commit({{"old.txt", std::nullopt}, {"new.txt", lines({"a", "q", "r", "s"})}}, "move", T0 + 1);
  r.finish();
  auto cs = extract_history(tmp.path() / "repo");
  ASSERT_EQ(cs[1].diffs.size(), 2u);
}

TEST(ExtractHistory, BinaryFilesSkipped) {
  TempDir tmp;
  RepoBuilder r(tmp.path() / "repo");
  r.commit({{"img.bin", std::string("PK\0\1\2", 5)}, {"t.txt", lines({"t"})}}, "add", T0);
  r.finish();
  auto cs = extract_history(tmp.path() / "repo");
  ASSERT_EQ(cs[0].diffs.size(), 1u);
  EXPECT_EQ(cs[0].diffs[0].new_path, "t.txt");
}

TEST(ExtractHistory, MergeDiffedAgainstFirstParent) {
  TempDir tmp;
  RepoBuilder r(tmp.path() / "repo");
  int base = r.commit({{"a.txt", lines({"1"})}}, "base", T0);
  CommitSpec side;
  side.changes = {{"b.txt", lines({"side"})}};
  side.timestamp = T0 + 10;
  side.parents = std::vector<int>{base};
  int s = r.commit(side);
  CommitSpec main;
  main.changes = {{"a.txt", lines({"1", "2"})}};
  main.timestamp = T0 + 20;
  main.parents = std::vector<int>{base};
  int m = r.commit(main);
  CommitSpec merge;
  merge.changes = {{"b.txt", lines({"side"})}};
  merge.timestamp = T0 + 30;
  merge.parents = std::vector<int>{m, s};
  merge.message = "merge";
  r.commit(merge);
  auto h = r.finish();
  auto cs = extract_history(tmp.path() / "repo");
  ASSERT_EQ(cs.size(), 4u);
  EXPECT_EQ(cs[0].hash, h[0]);
  EXPECT_EQ(cs[1].hash, h[1]);  // earlier timestamp first among siblings
  EXPECT_EQ(cs[3].parents, (std::vector<std::string>{h[2], h[1]}));
  ASSERT_EQ(cs[3].diffs.size(), 1u);
  EXPECT_EQ(cs[3].diffs[0].new_path, "b.txt");
  EXPECT_EQ(cs[3].diffs[0].added.size(), 1u);
}

TEST(History, BlameExamples) {
  TempDir tmp;
  RepoBuilder r(tmp.path() / "repo");
  r.commit({{"a.txt", lines({"keep", "rewrite", "tail"})}}, "C1", T0);
  r.commit({{"a.txt", lines({"keep", "rewritten", "tail"})}}, "C2", T0 + 1);
  r.commit({{"z.txt", lines({"other"})}}, "C3", T0 + 2);
  auto h = r.finish();
  History hist(extract_history(tmp.path() / "repo"));
  EXPECT_EQ(hist.line_blame("a.txt", 1, h[2]), h[0]);
  EXPECT_EQ(hist.line_blame("a.txt", 2, h[2]), h[1]);
  EXPECT_EQ(hist.line_blame("a.txt", 3, h[2]), h[0]);
  EXPECT_THROW(hist.line_blame("a.txt", 4, h[2]), RangeError);
  EXPECT_THROW(hist.line_blame("nope.txt", 1, h[2]), NotFoundError);
  EXPECT_THROW(hist.line_blame("a.txt", 1, "deadbeef"), NotFoundError);
}

TEST(History, BlameFollowsRename) {
  TempDir tmp;
  RepoBuilder r(tmp.path() / "repo");
  r.commit({{"a.txt", lines({"l1", "l2", "l3"})}}, "C1", T0);
  r.commit({{"a.txt", std::nullopt}, {"b.txt", lines({"l1", "l2", "l3"})}}, "C2 rename", T0 + 1);
  r.commit({{"c.txt", lines({"c"})}}, "C3", T0 + 2);
  auto h = r.finish();
  History hist(extract_history(tmp.path() / "repo"));
  auto res = hist.blame_lines("b.txt", std::vector<std::size_t>{2}, h[2]);
  ASSERT_EQ(res.size(), 1u);
  EXPECT_EQ(res[0].commit, h[0]);
  EXPECT_EQ(res[0].path, "a.txt");
  EXPECT_EQ(res[0].line, 2u);
}

// Random edit sequences: replaying diffs reproduces every snapshot and blame
// never points into the future.
TEST(History, ReplayReconstructsEveryCommit) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    std::mt19937_64 rng(seed);
    TempDir tmp;
    RepoBuilder r(tmp.path() / "repo");
    std::map<std::string, std::vector<std::string>> files;
    std::vector<std::map<std::string, std::vector<std::string>>> expected;
    int counter = 0;
    for (int c = 0; c < 15; ++c) {
      faultrank::testing::Changes ch;
      std::string path = "f" + std::to_string(rng() % 3) + ".txt";
      auto& f = files[path];
      int edits = 1 + static_cast<int>(rng() % 4);
      for (int e = 0; e < edits; ++e) {
        auto op = rng() % 3;
        if (f.empty() || op == 0) {
          f.insert(f.begin() + static_cast<long>(rng() % (f.size() + 1)), "line " + std::to_string(counter++ % 9));
        } else if (op == 1) {
          f.erase(f.begin() + static_cast<long>(rng() % f.size()));
        } else {
          f[rng() % f.size()] = "line " + std::to_string(counter++ % 9);
        }
      }
      if (f.empty()) {
        files.erase(path);
        ch[path] = std::nullopt;
      } else {
        ch[path] = lines(f);
      }
      r.commit(ch, "c" + std::to_string(c), T0 + c);
      expected.push_back(files);
    }
    auto h = r.finish();
    History hist(extract_history(tmp.path() / "repo"));
    for (std::size_t i = 0; i < h.size(); ++i) {
      auto snap = hist.snapshot(h[i]);
      EXPECT_EQ(snap, expected[i]) << "seed " << seed << " commit " << i;
      for (const auto& [path, content] : snap) {
        for (std::size_t ln = 1; ln <= content.size(); ++ln) {
          auto who = hist.line_blame(path, ln, h[i]);
          EXPECT_LE(hist.at(who).timestamp, hist.at(h[i]).timestamp);
        }
      }
    }
  }
}

TEST(History, JsonlRoundTrip) {
  Linear f;
  auto cs = extract_history(f.repo());
  std::stringstream io;
  write_commits_jsonl(io, cs, "alpha");
  write_commits_jsonl(io, std::span<const CommitRecord>(cs).subspan(0, 1), "beta");
  auto back = read_commits_jsonl(io);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].project, "alpha");
  EXPECT_EQ(back[0].commits, cs);
  EXPECT_EQ(back[1].project, "beta");
  EXPECT_EQ(back[1].commits.size(), 1u);
}

TEST(History, RejectsChildBeforeParent) {
  Linear f;
  auto cs = extract_history(f.repo());
  std::swap(cs[0], cs[1]);
  EXPECT_THROW(History{std::move(cs)}, ConsistencyError);
}
