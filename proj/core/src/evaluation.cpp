#include "lexbridge/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "lexbridge/corpus.hpp"
#include "lexbridge/error.hpp"

namespace lexbridge {

namespace fs = std::filesystem;

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

bool passes_sheet_filters(const std::string& original, const std::vector<std::string>& translations) {
  auto ok = [](const std::string& text) {
    const auto tokens = tokenize(text, false);
    if (tokens.empty()) return false;
    std::size_t non_alpha = 0;
    for (const auto& t : tokens) {
      if (std::none_of(t.begin(), t.end(), [](unsigned char c) { return std::isalpha(c) || c >= 0x80; })) {
        ++non_alpha;
      }
    }
    return 2 * non_alpha <= tokens.size();
  };
  return ok(original) && std::all_of(translations.begin(), translations.end(), ok);
}

ExportedSheets export_eval_sheets(const std::vector<std::string>& originals,
                                  const std::vector<SystemOutput>& systems, const SheetOptions& opts,
                                  const fs::path& out_dir) {
  if (systems.empty()) fail(ErrorCode::kPreconditionViolation, "at least one configuration is required");
  if (opts.sets == 0 || opts.evaluators == 0) fail(ErrorCode::kInvalidConfig, "sets and evaluators must be >= 1");
  for (const auto& s : systems) {
    if (s.lines.size() != originals.size()) {
      fail(ErrorCode::kDimensionMismatch, "configuration '" + s.config + "' has " + std::to_string(s.lines.size()) +
                                              " lines, expected " + std::to_string(originals.size()));
    }
  }
  ExportedSheets res;
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < originals.size(); ++i) {
    std::vector<std::string> tr;
    for (const auto& s : systems) tr.push_back(s.lines[i]);
    if (passes_sheet_filters(originals[i], tr)) candidates.push_back(i);
    else ++res.filtered_out;
  }
  if (candidates.size() < opts.sets) {
    fail(ErrorCode::kNotEnoughSentences, "requested " + std::to_string(opts.sets) + " sets but only " +
                                             std::to_string(candidates.size()) + " sentences pass the filters");
  }
  std::mt19937_64 rng(opts.seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  candidates.resize(opts.sets);
  res.selected = candidates;

  const std::size_t k = systems.size();
  std::vector<std::vector<std::size_t>> label_to_system(opts.sets);
  for (auto& perm : label_to_system) {
    perm.resize(k);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
  }

  fs::create_directories(out_dir);
  res.key_file = out_dir / "key.csv";
  {
    std::ofstream key(res.key_file);
    if (!key) fail(ErrorCode::kIoError, "cannot write " + res.key_file.string());
    key << "set,line,label,config\n";
    for (std::size_t s = 0; s < opts.sets; ++s) {
      for (std::size_t l = 0; l < k; ++l) {
        key << s + 1 << ',' << candidates[s] + 1 << ",T" << l + 1 << ','
            << csv_escape(systems[label_to_system[s][l]].config) << '\n';
      }
    }
  }
  for (std::size_t e = 0; e < opts.evaluators; ++e) {
    std::vector<std::size_t> order(opts.sets);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    const auto path = out_dir / ("evaluator_" + std::to_string(e + 1) + ".csv");
    std::ofstream out(path);
    if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
    out << "set,original";
    for (std::size_t l = 0; l < k; ++l) out << ",T" << l + 1;
    out << '\n';
    for (auto s : order) {
      out << s + 1 << ',' << csv_escape(originals[candidates[s]]);
      for (std::size_t l = 0; l < k; ++l) out << ',' << csv_escape(systems[label_to_system[s][l]].lines[candidates[s]]);
      out << '\n';
    }
    res.evaluator_files.push_back(path);
  }
  return res;
}

std::vector<ScoreRow> read_scores(std::istream& in, const std::string& name) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<ScoreRow> rows;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = csv_split(line);
    if (header) {
      header = false;
      if (!f.empty() && f[0] == "evaluator") continue;
    }
    if (f.size() != 6) {
      fail(ErrorCode::kMalformedRow, name + ":" + std::to_string(lineno) + ": expected 6 fields");
    }
    ScoreRow r{f[0], f[1], f[2], f[3], f[4], 0};
    if (r.kind != "correctness" && r.kind != "readability") {
      fail(ErrorCode::kMalformedRow, name + ":" + std::to_string(lineno) + ": unknown kind '" + r.kind + "'");
    }
    std::size_t used = 0;
    try {
      r.score = std::stod(f[5], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0) fail(ErrorCode::kMalformedRow, name + ":" + std::to_string(lineno) + ": bad score");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ScoreRow> load_scores(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  return read_scores(in, path.string());
}

namespace {

MosStat stat(const std::vector<double>& v) {
  MosStat s;
  s.n = v.size();
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

}  // namespace

MosReport mos_summarize(const std::vector<ScoreRow>& rows, double gate) {
  MosReport report;
  report.gate = gate;
  std::map<std::string, std::map<std::string, std::vector<double>>> correctness;  // config -> sentence
  for (const auto& r : rows) {
    if (!(r.score >= 1.0 && r.score <= 5.0)) {
      fail(ErrorCode::kScoreOutOfRange, "score " + std::to_string(r.score) + " from evaluator '" + r.evaluator +
                                            "' is outside 1-5");
    }
    if (r.kind == "correctness") correctness[r.config][r.sentence].push_back(r.score);
  }
  std::map<std::string, std::map<std::string, std::vector<double>>> readability;  // config -> group
  for (const auto& r : rows) {
    if (r.kind != "readability") continue;
    auto c = correctness.find(r.config);
    if (c == correctness.end()) continue;
    auto s = c->second.find(r.sentence);
    if (s == c->second.end()) continue;
    if (stat(s->second).mean >= gate) readability[r.config][r.group].push_back(r.score);
  }
  for (const auto& [config, sentences] : correctness) {
    ConfigMos m;
    std::vector<double> all;
    for (const auto& [sentence, scores] : sentences) {
      all.insert(all.end(), scores.begin(), scores.end());
      ++m.sentences;
      if (stat(scores).mean >= gate) ++m.passing_sentences;
    }
    m.correctness = stat(all);
    for (const auto& [group, scores] : readability[config]) m.readability[group] = stat(scores);
    report.configs[config] = std::move(m);
  }
  return report;
}

std::string MosReport::to_json() const {
  nlohmann::ordered_json j;
  j["gate"] = gate;
  auto stat_json = [](const MosStat& s) { return nlohmann::ordered_json{{"mean", s.mean}, {"std", s.std}, {"n", s.n}}; };
  for (const auto& [config, m] : configs) {
    nlohmann::ordered_json c;
    c["correctness"] = stat_json(m.correctness);
    c["sentences"] = m.sentences;
    c["passing_sentences"] = m.passing_sentences;
    c["readability"] = nlohmann::ordered_json::object();
    for (const auto& [group, s] : m.readability) c["readability"][group] = stat_json(s);
    j["configs"][config] = c;
  }
  return j.dump(2);
}

}  // namespace lexbridge
