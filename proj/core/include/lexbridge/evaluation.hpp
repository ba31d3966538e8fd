#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace lexbridge {

/// One system's output, line-aligned with the originals.
struct SystemOutput {
  std::string config;
  std::vector<std::string> lines;
};

struct SheetOptions {
  std::size_t sets = 20;
  std::size_t evaluators = 1;
  std::uint64_t seed = 1;
};

struct ExportedSheets {
  std::vector<std::filesystem::path> evaluator_files;
  std::filesystem::path key_file;
  /// Original line numbers (0-based) of the selected sets.
  std::vector<std::size_t> selected;
  std::size_t filtered_out = 0;
};

/// True when a set passes the mechanical filters: no empty text and at most
/// half of the tokens without any letter, in every text of the set.
bool passes_sheet_filters(const std::string& original, const std::vector<std::string>& translations);

/// Draws `sets` sentence sets, writes evaluator_<n>.csv (set, original,
/// T1..Tk with per-set shuffled labels, rows in per-evaluator order) and
/// key.csv (set, label, config). Throws kNotEnoughSentences when fewer sets
/// survive the filters than requested.
ExportedSheets export_eval_sheets(const std::vector<std::string>& originals,
                                  const std::vector<SystemOutput>& systems, const SheetOptions& opts,
                                  const std::filesystem::path& out_dir);

struct ScoreRow {
  std::string evaluator;
  std::string group;
  std::string sentence;
  std::string config;
  std::string kind;  ///< "correctness" or "readability"
  double score = 0;
};

/// Long-format CSV with header `evaluator,group,sentence,config,kind,score`.
std::vector<ScoreRow> read_scores(std::istream& in, const std::string& name = "scores");
std::vector<ScoreRow> load_scores(const std::filesystem::path& path);

struct MosStat {
  double mean = 0;
  double std = 0;  ///< sample standard deviation, 0 for a single score
  std::size_t n = 0;
};

struct ConfigMos {
  MosStat correctness;
  /// Per evaluator group, over (config, sentence) items whose mean
  /// correctness is >= the gate.
  std::map<std::string, MosStat> readability;
  std::size_t sentences = 0;
  std::size_t passing_sentences = 0;
};

struct MosReport {
  double gate = 4.0;
  std::map<std::string, ConfigMos> configs;
  std::string to_json() const;
};

/// Scores outside [1, 5] raise kScoreOutOfRange.
MosReport mos_summarize(const std::vector<ScoreRow>& rows, double gate = 4.0);

/// Minimal RFC 4180 helpers.
std::string csv_escape(const std::string& field);
std::vector<std::string> csv_split(const std::string& line);

}  // namespace lexbridge
