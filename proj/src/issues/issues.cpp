#include "faultrank/issues.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <variant>

#include "json.hpp"

#include "faultrank/csv.hpp"

namespace faultrank::issues {

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

IssueKind parse_kind(std::string_view text) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::toupper(c); });
  return t == "BUG" ? IssueKind::Bug : IssueKind::Other;
}

// Validates one row's fields; returns an error message or the record.
std::variant<IssueRecord, std::string> make_record(const std::string& key, const std::string& kind,
                                                   const std::string& created,
                                                   const std::string& resolved,
                                                   const std::string& resolution) {
  IssueRecord r;
  r.key = trim(key);
  if (!is_valid_issue_key(r.key)) return "invalid issue key '" + r.key + "'";
  if (trim(kind).empty()) return std::string("missing kind");
  r.kind = parse_kind(kind);
  auto c = parse_timestamp(created);
  if (!c) return "bad created timestamp '" + created + "'";
  r.created = *c;
  if (!trim(resolved).empty()) {
    auto res = parse_timestamp(resolved);
    if (!res) return "bad resolved timestamp '" + resolved + "'";
    if (*res < r.created) return std::string("resolved before created");
    r.resolved = *res;
  }
  r.resolution = trim(resolution);
  return r;
}

std::string json_field(const nlohmann::json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end() || it->is_null()) return {};
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  return it->dump();
}

Parsed<IssueRecord> parse_json(std::string_view text) {
  Parsed<IssueRecord> out;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed issues JSON: ") + e.what());
  }
  if (!doc.is_array()) throw InputError("issues JSON must be an array of objects");
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& obj = doc[i];
    if (!obj.is_object()) {
      out.warnings.push_back("issue " + std::to_string(i) + ": not an object");
      continue;
    }
    auto r = make_record(json_field(obj, "key"), json_field(obj, "kind"), json_field(obj, "created"),
                         json_field(obj, "resolved"), json_field(obj, "resolution"));
    if (auto* err = std::get_if<std::string>(&r)) {
      out.warnings.push_back("issue " + std::to_string(i) + ": " + *err);
    } else {
      out.items.push_back(std::get<IssueRecord>(std::move(r)));
    }
  }
  return out;
}

Parsed<IssueRecord> parse_csv(std::string_view text) {
  Parsed<IssueRecord> out;
  csv::Table table = csv::parse(text);
  if (table.header.empty()) return out;
  const char* names[] = {"key", "kind", "created", "resolved", "resolution"};
  std::size_t cols[5];
  for (int i = 0; i < 5; ++i) {
    cols[i] = table.column(names[i]);
    if (cols[i] == csv::Table::npos) throw InputError(std::string("issues.csv lacks column ") + names[i]);
  }
  for (const auto& row : table.rows) {
    auto field = [&](int i) -> std::string {
      return cols[i] < row.fields.size() ? row.fields[cols[i]] : std::string();
    };
    if (row.fields.size() != table.header.size()) {
      out.warnings.push_back("line " + std::to_string(row.line) + ": expected " +
                             std::to_string(table.header.size()) + " fields");
      continue;
    }
    auto r = make_record(field(0), field(1), field(2), field(3), field(4));
    if (auto* err = std::get_if<std::string>(&r)) {
      out.warnings.push_back("line " + std::to_string(row.line) + ": " + *err);
    } else {
      out.items.push_back(std::get<IssueRecord>(std::move(r)));
    }
  }
  return out;
}

}  // namespace

bool is_valid_issue_key(std::string_view key) {
  std::size_t i = 0;
  if (i >= key.size() || !is_upper(key[i])) return false;
  ++i;
  while (i < key.size() && (is_upper(key[i]) || is_digit(key[i]))) ++i;
  if (i >= key.size() || key[i] != '-') return false;
  ++i;
  if (i >= key.size()) return false;
  while (i < key.size() && is_digit(key[i])) ++i;
  return i == key.size();
}

bool issue_key_less(std::string_view a, std::string_view b) {
  auto split = [](std::string_view k) {
    std::size_t dash = k.rfind('-');
    std::string_view prefix = k.substr(0, dash);
    std::string_view num = dash == std::string_view::npos ? std::string_view() : k.substr(dash + 1);
    return std::pair{prefix, num};
  };
  auto [pa, na] = split(a);
  auto [pb, nb] = split(b);
  if (pa != pb) return pa < pb;
  if (na.size() != nb.size()) return na.size() < nb.size();
  return na < nb;
}

Parsed<IssueRecord> parse_issues_text(std::string_view text) {
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '[') return parse_json(text);
  return parse_csv(text);
}

Parsed<IssueRecord> parse_issues(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read issues file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_issues_text(buf.str());
}

std::vector<std::string> mentioned_keys(std::string_view message) {
  std::vector<std::string> keys;
  const std::size_t n = message.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_upper(message[i]) || (i > 0 && is_word_char(message[i - 1]))) continue;
    std::size_t j = i + 1;
    while (j < n && (is_upper(message[j]) || is_digit(message[j]))) ++j;
    if (j >= n || message[j] != '-') continue;
    std::size_t k = j + 1;
    while (k < n && is_digit(message[k])) ++k;
    if (k == j + 1) continue;
    if (k < n && is_word_char(message[k])) continue;
    keys.emplace_back(message.substr(i, k - i));
    i = k - 1;
  }
  return keys;
}

std::vector<FixLink> link_fixes(std::span<const miner::CommitRecord> commits,
                                std::span<const IssueRecord> issues) {
  std::set<std::string> fixed_bugs;
  for (const auto& issue : issues) {
    if (issue.kind == IssueKind::Bug && issue.resolved && issue.resolution == "Fixed") {
      fixed_bugs.insert(issue.key);
    }
  }
  std::map<std::string, std::set<std::string>> linked;
  for (const auto& c : commits) {
    for (const auto& key : mentioned_keys(c.message)) {
      if (fixed_bugs.count(key)) linked[key].insert(c.hash);
    }
  }
  std::vector<FixLink> links;
  links.reserve(linked.size());
  for (auto& [key, hashes] : linked) {
    links.push_back({key, std::vector<std::string>(hashes.begin(), hashes.end())});
  }
  std::sort(links.begin(), links.end(),
            [](const FixLink& a, const FixLink& b) { return issue_key_less(a.issue_key, b.issue_key); });
  return links;
}

void write_fixlinks_csv(std::ostream& out, std::span<const FixLink> links) {
  csv::Writer w(out);
  w.row({"issue_key", "commit_hash"});
  for (const auto& link : links) {
    for (const auto& h : link.fix_commits) w.row({link.issue_key, h});
  }
}

std::vector<FixLink> read_fixlinks_csv(const std::filesystem::path& path) {
  csv::Table table = csv::read(path);
  std::size_t kc = table.column("issue_key"), hc = table.column("commit_hash");
  if (kc == csv::Table::npos || hc == csv::Table::npos) {
    throw InputError(path.string() + ": expected columns issue_key,commit_hash");
  }
  std::map<std::string, std::set<std::string>> linked;
  for (const auto& row : table.rows) {
    if (row.fields.size() <= std::max(kc, hc)) {
      throw InputError(path.string() + " line " + std::to_string(row.line) + ": too few fields");
    }
    linked[row.fields[kc]].insert(row.fields[hc]);
  }
  std::vector<FixLink> links;
  for (auto& [key, hashes] : linked) {
    links.push_back({key, std::vector<std::string>(hashes.begin(), hashes.end())});
  }
  std::sort(links.begin(), links.end(),
            [](const FixLink& a, const FixLink& b) { return issue_key_less(a.issue_key, b.issue_key); });
  return links;
}

}  // namespace faultrank::issues
