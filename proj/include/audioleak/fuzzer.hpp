#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <audioleak/core.hpp>

// Wake-word fuzzing: pick dictionary words whose phoneme count is close to
// the target wake-word, drive an activation oracle, and analyze discovered
// words by phonetic (Metaphone code) edit distance.

namespace audioleak {

struct PronunciationEntry {
  std::string word;                   // lowercase, alternate marker stripped
  std::vector<std::string> phonemes;  // ARPAbet, stress digits stripped
};

struct DictParseReport {
  std::size_t entries = 0;
  std::size_t skipped = 0;
};

// CMU pronouncing-dictionary format: "WORD  PH1 PH2 ...", ";;;" comments,
// alternates spelled "WORD(2)". Alternates stay as separate entries.
inline std::vector<PronunciationEntry> load_dictionary(std::istream& in,
                                                       DictParseReport* report = nullptr) {
  std::vector<PronunciationEntry> entries;
  DictParseReport local;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.rfind(";;;", 0) == 0) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    PronunciationEntry e;
    std::string phone;
    while (ls >> phone) {
      while (!phone.empty() && std::isdigit(static_cast<unsigned char>(phone.back())))
        phone.pop_back();
      if (!phone.empty()) e.phonemes.push_back(phone);
    }
    if (word.empty() || e.phonemes.empty()) {
      ++local.skipped;
      continue;
    }
    auto paren = word.find('(');
    if (paren != std::string::npos) word.resize(paren);
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    e.word = std::move(word);
    entries.push_back(std::move(e));
    ++local.entries;
  }
  if (report) *report = local;
  return entries;
}

inline std::vector<PronunciationEntry> load_dictionary(const std::string& path,
                                                       DictParseReport* report = nullptr) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open dictionary: " + path);
  return load_dictionary(in, report);
}

// Original (1990) Metaphone. One deliberate variant: any leading vowel is
// folded to 'A', so "olexa" and "alexa" share a code. Rule summary:
//   initial AE/GN/KN/PN/WR drop the first letter, X- becomes S, WH- becomes W
//   duplicate adjacent letters collapse (except C)
//   vowels survive only in first position
//   B silent in final -MB; C -> X before IA/H (SCH -> K), S before E/I/Y,
//   else K; D -> J before GE/GI/GY else T; G silent in -GH?- (H not final or
//   pre-vowel), final -GN(ED), and after D before E/I/Y, -> J before E/I/Y,
//   else K; H silent after vowel without following vowel and after C/S/P/T/G;
//   K silent after C; P -> F before H; Q -> K; S -> X before H/IO/IA;
//   T -> X before IO/IA, -> 0 before H, silent in -TCH-; V -> F; W and Y
//   survive only before vowels; X -> KS; Z -> S.
inline std::string metaphone(std::string_view input) {
  std::string w;
  for (char c : input)
    if (std::isalpha(static_cast<unsigned char>(c)))
      w.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (w.empty()) return "";

  auto is_vowel = [](char c) {
    return c == 'A' || c == 'E' || c == 'I' || c == 'O' || c == 'U';
  };
  auto is_front = [](char c) { return c == 'E' || c == 'I' || c == 'Y'; };

  if (w.size() >= 2) {
    std::string_view head(w.data(), 2);
    if (head == "AE" || head == "GN" || head == "KN" || head == "PN" ||
        head == "WR")
      w.erase(0, 1);
    else if (w[0] == 'X')
      w[0] = 'S';
    else if (head == "WH")
      w.erase(1, 1);
  } else if (w[0] == 'X') {
    w[0] = 'S';
  }

  std::string out;
  const std::size_t n = w.size();
  for (std::size_t i = 0; i < n; ++i) {
    char c = w[i];
    char prev = i > 0 ? w[i - 1] : '\0';
    char nxt = i + 1 < n ? w[i + 1] : '\0';
    char nxt2 = i + 2 < n ? w[i + 2] : '\0';

    if (c == prev && c != 'C') continue;

    switch (c) {
      case 'A': case 'E': case 'I': case 'O': case 'U':
        if (i == 0) out.push_back('A');
        break;
      case 'B':
        if (!(i == n - 1 && prev == 'M')) out.push_back('B');
        break;
      case 'C':
        if (nxt == 'I' && nxt2 == 'A')
          out.push_back('X');
        else if (nxt == 'H')
          out.push_back(prev == 'S' ? 'K' : 'X');
        else if (is_front(nxt))
          out.push_back('S');
        else
          out.push_back('K');
        break;
      case 'D':
        if (nxt == 'G' && is_front(nxt2))
          out.push_back('J');
        else
          out.push_back('T');
        break;
      case 'F': out.push_back('F'); break;
      case 'G':
        if (nxt == 'H' && i + 2 < n && !is_vowel(nxt2))
          break;  // -GH- with consonant after
        if (nxt == 'N' && (i + 2 == n || w.compare(i + 1, n - i - 1, "NED") == 0))
          break;  // final -GN / -GNED
        if (prev == 'D' && is_front(nxt)) break;  // -DGE-, D already said J
        if (is_front(nxt) && prev != 'G')
          out.push_back('J');
        else
          out.push_back('K');
        break;
      case 'H':
        if (is_vowel(prev) && !is_vowel(nxt)) break;
        if (prev == 'C' || prev == 'S' || prev == 'P' || prev == 'T' || prev == 'G')
          break;
        out.push_back('H');
        break;
      case 'J': out.push_back('J'); break;
      case 'K':
        if (prev != 'C') out.push_back('K');
        break;
      case 'L': case 'M': case 'N': case 'R':
        out.push_back(c);
        break;
      case 'P': out.push_back(nxt == 'H' ? 'F' : 'P'); break;
      case 'Q': out.push_back('K'); break;
      case 'S':
        if (nxt == 'H' || (nxt == 'I' && (nxt2 == 'O' || nxt2 == 'A')))
          out.push_back('X');
        else
          out.push_back('S');
        break;
      case 'T':
        if (nxt == 'I' && (nxt2 == 'O' || nxt2 == 'A'))
          out.push_back('X');
        else if (nxt == 'H')
          out.push_back('0');
        else if (!(nxt == 'C' && nxt2 == 'H'))
          out.push_back('T');
        break;
      case 'V': out.push_back('F'); break;
      case 'W':
        if (is_vowel(nxt)) out.push_back('W');
        break;
      case 'X':
        out += "KS";
        break;
      case 'Y':
        if (is_vowel(nxt)) out.push_back('Y');
        break;
      case 'Z': out.push_back('S'); break;
      default: break;
    }
  }
  return out;
}

inline int levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<int> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    int diag = row[0];
    row[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      int sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      diag = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
    }
  }
  return row[b.size()];
}

struct WakeWordCandidate {
  std::string word;
  std::vector<std::string> phonemes;
  int phoneme_count = 0;
  std::string metaphone_code;
  int distance = 0;  // Levenshtein between Metaphone codes, vs the target
  int trials = 0;
  int activations = 0;
};

namespace fuzz_detail {

inline const PronunciationEntry* find_word(const std::vector<PronunciationEntry>& dict,
                                           const std::string& word) {
  for (const auto& e : dict)
    if (e.word == word) return &e;
  return nullptr;
}

inline std::string nearest_spellings(const std::vector<PronunciationEntry>& dict,
                                     const std::string& word) {
  std::vector<std::pair<int, std::string>> near;
  for (const auto& e : dict) {
    int d = levenshtein(e.word, word);
    if (d <= 2) near.emplace_back(d, e.word);
  }
  std::sort(near.begin(), near.end());
  near.erase(std::unique(near.begin(), near.end()), near.end());
  std::string out;
  for (std::size_t i = 0; i < near.size() && i < 5; ++i)
    out += (i ? ", " : "") + near[i].second;
  return out.empty() ? "none" : out;
}

inline std::vector<WakeWordCandidate> build_candidates(
    const std::vector<PronunciationEntry>& dict, const std::string& target,
    const std::string& target_code,
    const std::function<bool(int)>& count_ok) {
  std::vector<WakeWordCandidate> out;
  for (const auto& e : dict) {
    int count = static_cast<int>(e.phonemes.size());
    if (!count_ok(count)) continue;
    WakeWordCandidate c;
    c.word = e.word;
    c.phonemes = e.phonemes;
    c.phoneme_count = count;
    c.metaphone_code = metaphone(e.word);
    c.distance = levenshtein(c.metaphone_code, target_code);
    out.push_back(std::move(c));
  }
  (void)target;
  return out;
}

}  // namespace fuzz_detail

inline std::vector<WakeWordCandidate> select_candidates(
    const std::vector<PronunciationEntry>& dict, const std::string& target,
    int tolerance) {
  if (tolerance < 0) throw ParameterError("tolerance must be non-negative");
  const auto* t = fuzz_detail::find_word(dict, target);
  if (!t)
    throw ParameterError("target word '" + target + "' not in dictionary; near: " +
                         fuzz_detail::nearest_spellings(dict, target));
  const int want = static_cast<int>(t->phonemes.size());
  return fuzz_detail::build_candidates(
      dict, target, metaphone(target),
      [want, tolerance](int c) { return std::abs(c - want) <= tolerance; });
}

inline std::vector<WakeWordCandidate> select_candidates_by_counts(
    const std::vector<PronunciationEntry>& dict, const std::string& target,
    const std::set<int>& counts) {
  if (counts.empty()) throw ParameterError("phoneme count set must be non-empty");
  if (!fuzz_detail::find_word(dict, target))
    throw ParameterError("target word '" + target + "' not in dictionary; near: " +
                         fuzz_detail::nearest_spellings(dict, target));
  return fuzz_detail::build_candidates(
      dict, target, metaphone(target),
      [&counts](int c) { return counts.count(c) > 0; });
}

enum class TrialOutcome { Activated, NotActivated, Timeout };

// Reports whether the device under test reacted to one utterance within the
// observation window (the fixed few seconds an indicator stays lit).
class ActivationOracle {
 public:
  virtual ~ActivationOracle() = default;
  virtual TrialOutcome probe(const std::string& word) = 0;
};

inline constexpr double kObservationWindowSeconds = 2.0;

// Bernoulli oracle over a measured per-word activation table. Words missing
// from the table never activate. timeout_rate injects flaky trials.
class SimulatorOracle : public ActivationOracle {
 public:
  SimulatorOracle(std::map<std::string, double> probabilities, std::uint64_t seed,
                  double timeout_rate = 0.0)
      : probs_(std::move(probabilities)), eng_(seed), timeout_rate_(timeout_rate) {
    for (const auto& [word, p] : probs_)
      if (p < 0.0 || p > 1.0)
        throw ParameterError("activation probability out of range for '" + word + "'");
    if (timeout_rate_ < 0.0 || timeout_rate_ >= 1.0)
      throw ParameterError("timeout rate must be in [0,1)");
  }

  TrialOutcome probe(const std::string& word) override {
    if (timeout_rate_ > 0.0 && std::bernoulli_distribution(timeout_rate_)(eng_))
      return TrialOutcome::Timeout;
    auto it = probs_.find(word);
    double p = it == probs_.end() ? 0.0 : it->second;
    return std::bernoulli_distribution(p)(eng_) ? TrialOutcome::Activated
                                                : TrialOutcome::NotActivated;
  }

 private:
  std::map<std::string, double> probs_;
  std::mt19937_64 eng_;
  double timeout_rate_;
};

// Replays a recorded activation-sensor log. Lines are
//   <seconds> EMIT <word>
//   <seconds> ACTIVATE
// probe(word) consumes the next EMIT of that word; the trial counts as
// activated when an ACTIVATE follows within the observation window.
class SensorLogOracle : public ActivationOracle {
 public:
  explicit SensorLogOracle(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      double t;
      std::string kind, word;
      if (!(ls >> t >> kind)) throw FormatError("bad sensor log line: " + line);
      if (kind == "EMIT") {
        if (!(ls >> word)) throw FormatError("EMIT line without word: " + line);
        std::transform(word.begin(), word.end(), word.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        emits_.push_back({t, word});
      } else if (kind == "ACTIVATE") {
        activations_.push_back(t);
      } else {
        throw FormatError("unknown sensor log record: " + line);
      }
    }
  }

  TrialOutcome probe(const std::string& word) override {
    for (std::size_t i = cursor_; i < emits_.size(); ++i) {
      if (emits_[i].word != word) continue;
      cursor_ = i + 1;
      for (double a : activations_)
        if (a > emits_[i].t && a <= emits_[i].t + kObservationWindowSeconds)
          return TrialOutcome::Activated;
      return TrialOutcome::NotActivated;
    }
    return TrialOutcome::Timeout;  // ran out of recorded emissions
  }

 private:
  struct Emit {
    double t;
    std::string word;
  };
  std::vector<Emit> emits_;
  std::vector<double> activations_;
  std::size_t cursor_ = 0;
};

struct CampaignOptions {
  int trials_per_word = 10;
  int min_activations = 2;  // lowest activation count that counts as discovered
  int max_retries = 2;      // extra attempts after a timed-out trial
};

struct CampaignResult {
  std::string target;
  std::string target_code;
  std::vector<WakeWordCandidate> words;  // unique words, with trial stats
  std::vector<std::string> discovered;   // excludes the target itself
  std::map<int, int> histogram;          // distance -> discovered word count
};

inline std::map<int, int> distance_histogram(
    std::span<const WakeWordCandidate> words, const std::string& target,
    int min_activations) {
  std::map<int, int> hist;
  for (const auto& c : words)
    if (c.word != target && c.activations >= min_activations) ++hist[c.distance];
  return hist;
}

inline CampaignResult run_campaign(std::span<const WakeWordCandidate> candidates,
                                   const std::string& target,
                                   ActivationOracle& oracle,
                                   const CampaignOptions& options = {}) {
  if (options.trials_per_word < 1)
    throw ParameterError("trials_per_word must be >= 1");
  if (options.min_activations < 1)
    throw ParameterError("min_activations must be >= 1");

  CampaignResult result;
  result.target = target;
  result.target_code = metaphone(target);

  for (const auto& candidate : candidates) {
    bool dup = false;
    for (const auto& seen : result.words)
      if (seen.word == candidate.word) dup = true;
    if (dup) continue;  // alternate pronunciation of a word already probed

    WakeWordCandidate c = candidate;
    c.trials = 0;
    c.activations = 0;
    for (int t = 0; t < options.trials_per_word; ++t) {
      TrialOutcome outcome = oracle.probe(c.word);
      for (int r = 0; r < options.max_retries && outcome == TrialOutcome::Timeout; ++r)
        outcome = oracle.probe(c.word);
      if (outcome == TrialOutcome::Timeout) continue;  // trial not counted
      ++c.trials;
      if (outcome == TrialOutcome::Activated) ++c.activations;
    }
    result.words.push_back(std::move(c));
  }

  for (const auto& c : result.words)
    if (c.word != target && c.activations >= options.min_activations)
      result.discovered.push_back(c.word);
  result.histogram =
      distance_histogram(result.words, target, options.min_activations);
  return result;
}

}  // namespace audioleak
