#include "lexbridge/smt/metrics.hpp"

#include <cmath>
#include <map>

#include "lexbridge/error.hpp"

namespace lexbridge::smt {

namespace {

std::map<std::vector<std::string>, int> ngrams(const Sentence& s, std::size_t n) {
  std::map<std::vector<std::string>, int> out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    ++out[std::vector<std::string>(s.begin() + static_cast<std::ptrdiff_t>(i),
                                   s.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return out;
}

}  // namespace

BleuScore corpus_bleu(const std::vector<Sentence>& hypotheses, const std::vector<Sentence>& references) {
  require(hypotheses.size() == references.size(), "hypothesis and reference counts differ");
  require(!hypotheses.empty(), "BLEU of an empty corpus");
  std::array<double, 4> matched{}, total{};
  BleuScore out;
  for (std::size_t k = 0; k < hypotheses.size(); ++k) {
    out.hypothesis_length += hypotheses[k].size();
    out.reference_length += references[k].size();
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto h = ngrams(hypotheses[k], n);
      const auto r = ngrams(references[k], n);
      for (const auto& [g, c] : h) {
        total[n - 1] += c;
        auto it = r.find(g);
        if (it != r.end()) matched[n - 1] += std::min(c, it->second);
      }
    }
  }
  double log_sum = 0;
  bool zero = false;
  for (std::size_t n = 0; n < 4; ++n) {
    out.precisions[n] = total[n] > 0 ? matched[n] / total[n] : 0.0;
    if (out.precisions[n] <= 0) zero = true;
    else log_sum += std::log(out.precisions[n]);
  }
  const double c = static_cast<double>(out.hypothesis_length);
  const double r = static_cast<double>(out.reference_length);
  out.brevity_penalty = c >= r ? 1.0 : (c > 0 ? std::exp(1 - r / c) : 0.0);
  out.bleu = zero ? 0.0 : 100.0 * out.brevity_penalty * std::exp(log_sum / 4);
  return out;
}

double exact_match(const std::vector<Sentence>& hypotheses, const std::vector<Sentence>& references) {
  require(hypotheses.size() == references.size(), "hypothesis and reference counts differ");
  require(!hypotheses.empty(), "exact match of an empty corpus");
  std::size_t hits = 0;
  for (std::size_t k = 0; k < hypotheses.size(); ++k) hits += hypotheses[k] == references[k];
  return static_cast<double>(hits) / static_cast<double>(hypotheses.size());
}

}  // namespace lexbridge::smt
