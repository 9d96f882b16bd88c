#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "faultrank/csv.hpp"
#include "faultrank/miner.hpp"
#include "faultrank/pipeline.hpp"

namespace faultrank::pipeline {

using learners::ModelKind;

PipelineConfig::PipelineConfig()
    : until(miner::kNoLimit), models(learners::kAllModelKinds.begin(), learners::kAllModelKinds.end()) {}

namespace {

fs::path resolve(std::string_view value, const fs::path& base_dir) {
  fs::path p{std::string(value)};
  if (p.is_relative()) p = base_dir / p;
  return p.lexically_normal();
}

bool valid_project_name(std::string_view name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
  std::string t = trim(value);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw InputError(std::string(key) + ": expected a non-negative integer, got '" + t + "'");
  }
  return v;
}

int parse_small_int(std::string_view key, std::string_view value) {
  std::uint64_t v = parse_u64(key, value);
  if (v > 1'000'000'000) throw InputError(std::string(key) + ": value too large");
  return static_cast<int>(v);
}

double parse_real(std::string_view key, std::string_view value) {
  try {
    return csv::parse_double(value);
  } catch (const InputError&) {
    throw InputError(std::string(key) + ": expected a number, got '" + trim(value) + "'");
  }
}

}  // namespace

void apply_setting(PipelineConfig& cfg, std::string_view key, std::string_view value,
                   const fs::path& base_dir) {
  const std::string k = trim(key);
  const std::string v = trim(value);
  if (k.rfind("project.", 0) == 0) {
    auto dot = k.rfind('.');
    std::string name = k.substr(8, dot > 8 ? dot - 8 : 0);
    std::string field = k.substr(dot + 1);
    if (dot <= 8 || !valid_project_name(name) || (field != "repo" && field != "issues")) {
      throw InputError("bad project key '" + k + "' (want project.<name>.repo or project.<name>.issues)");
    }
    auto it = std::find_if(cfg.projects.begin(), cfg.projects.end(),
                           [&](const ProjectInput& p) { return p.name == name; });
    if (it == cfg.projects.end()) {
      cfg.projects.push_back({name, {}, {}});
      std::sort(cfg.projects.begin(), cfg.projects.end(),
                [](const ProjectInput& a, const ProjectInput& b) { return a.name < b.name; });
      it = std::find_if(cfg.projects.begin(), cfg.projects.end(),
                        [&](const ProjectInput& p) { return p.name == name; });
    }
    (field == "repo" ? it->repo : it->issues) = resolve(v, base_dir);
  } else if (k == "violations") {
    cfg.violations = resolve(v, base_dir);
  } else if (k == "rules") {
    cfg.rules = resolve(v, base_dir);
  } else if (k == "out") {
    cfg.out = resolve(v, base_dir);
  } else if (k == "until") {
    if (v.empty() || v == "none") {
      cfg.until = miner::kNoLimit;
    } else {
      auto t = parse_timestamp(v);
      if (!t) throw InputError("until: not a timestamp: '" + v + "'");
      cfg.until = *t;
    }
  } else if (k == "k") {
    cfg.k = parse_u64(k, v);
  } else if (k == "seed") {
    cfg.train.seed = parse_u64(k, v);
  } else if (k == "models") {
    std::vector<ModelKind> kinds;
    if (v == "all") {
      kinds.assign(learners::kAllModelKinds.begin(), learners::kAllModelKinds.end());
    } else {
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        auto kind = learners::parse_model_kind(trim(item));
        if (!kind) throw InputError("models: unknown model '" + trim(item) + "'");
        if (std::find(kinds.begin(), kinds.end(), *kind) == kinds.end()) kinds.push_back(*kind);
      }
      std::sort(kinds.begin(), kinds.end());
    }
    cfg.models = std::move(kinds);
  } else if (k == "train.n_estimators") {
    cfg.train.n_estimators = parse_small_int(k, v);
  } else if (k == "train.learning_rate") {
    cfg.train.learning_rate = parse_real(k, v);
  } else if (k == "train.max_depth") {
    if (v.empty() || v == "none") {
      cfg.train.max_depth.reset();
    } else {
      cfg.train.max_depth = parse_small_int(k, v);
    }
  } else if (k == "train.l2_lambda") {
    cfg.train.l2_lambda = parse_real(k, v);
  } else if (k == "train.logistic_l2") {
    cfg.train.logistic_l2 = parse_real(k, v);
  } else {
    throw InputError("unknown config key '" + k + "'");
  }
}

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
  PipelineConfig cfg;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1), base_dir);
    } catch (const InputError& e) {
      throw InputError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  fs::path base = path.parent_path();
  if (base.empty()) base = ".";
  return parse_config(ss.str(), base);
}

void PipelineConfig::validate() const {
  if (projects.empty()) throw InputError("config names no project");
  for (const auto& p : projects) {
    if (p.repo.empty()) throw InputError("project " + p.name + " has no repo");
    if (p.issues.empty()) throw InputError("project " + p.name + " has no issues file");
    if (!fs::is_directory(p.repo)) throw InputError("project " + p.name + ": repository not found: " + p.repo.string());
    if (!fs::is_regular_file(p.issues)) {
      throw InputError("project " + p.name + ": issues file not found: " + p.issues.string());
    }
  }
  if (violations.empty() || !fs::is_regular_file(violations)) {
    throw InputError("violations file not found: " + violations.string());
  }
  if (rules.empty() || !fs::is_regular_file(rules)) throw InputError("rules file not found: " + rules.string());
  if (k < 2) throw InputError("k must be at least 2");
  if (models.empty()) throw InputError("no models selected");
  for (auto kind : models) train.validate(kind);
}

}  // namespace faultrank::pipeline
