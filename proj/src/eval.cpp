#include "icd/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "icd/binary_io.hpp"

namespace icd {

ScoredPairs::ScoredPairs(std::vector<ScoredPair> entries) : entries_(std::move(entries)) {
  std::set<std::pair<std::string_view, std::string_view>> seen;
  for (const auto& e : entries_) {
    if (!std::isfinite(e.score)) {
      throw ValidationError("non-finite score for pair (" + e.query_id + ", " + e.reference_id + ")");
    }
    if (!seen.emplace(e.query_id, e.reference_id).second) {
      throw ValidationError("duplicate pair (" + e.query_id + ", " + e.reference_id + ")");
    }
  }
}

double micro_ap(const ScoredPairs& pairs, const GroundTruth& gt) {
  if (gt.empty()) throw DomainError("micro_ap: ground truth is empty");
  std::vector<const ScoredPair*> ranked;
  ranked.reserve(pairs.size());
  for (const auto& e : pairs.entries()) ranked.push_back(&e);
  std::sort(ranked.begin(), ranked.end(), [](const ScoredPair* a, const ScoredPair* b) {
    if (a->score != b->score) return a->score > b->score;
    if (a->query_id != b->query_id) return a->query_id < b->query_id;
    return a->reference_id < b->reference_id;
  });

  // Extended precision keeps hand fixtures such as (1 + 2/3) / 2 exact to the last double bit.
  long double precision_sum = 0.0L;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < ranked.size(); ++rank) {
    if (!gt.contains(ranked[rank]->query_id, ranked[rank]->reference_id)) continue;
    ++hits;
    precision_sum += static_cast<long double>(hits) / static_cast<long double>(rank + 1);
  }
  return static_cast<double>(precision_sum / static_cast<long double>(gt.size()));
}

void write_scored_pairs(const ScoredPairs& pairs, std::ostream& out) {
  out << "query_id,reference_id,score\n";
  char buf[64];
  for (const auto& e : pairs.entries()) {
    std::snprintf(buf, sizeof buf, "%.9g", e.score);
    out << e.query_id << ',' << e.reference_id << ',' << buf << '\n';
  }
}

ScoredPairs parse_scored_pairs(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("scored pairs CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "query_id,reference_id,score") {
    throw FormatError("scored pairs CSV must start with header 'query_id,reference_id,score'");
  }
  std::vector<ScoredPair> entries;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos) {
      throw FormatError("scored pairs line " + std::to_string(lineno) + ": expected 3 fields");
    }
    ScoredPair e{line.substr(0, c1), line.substr(c1 + 1, c2 - c1 - 1), 0.0};
    const char* first = line.data() + c2 + 1;
    const char* last = line.data() + line.size();
    const auto [ptr, ec] = std::from_chars(first, last, e.score);
    if (ec != std::errc() || ptr != last) {
      throw FormatError("scored pairs line " + std::to_string(lineno) + ": bad score");
    }
    entries.push_back(std::move(e));
  }
  return ScoredPairs(std::move(entries));
}

void save_scored_pairs(const ScoredPairs& pairs, const std::string& path) {
  std::ostringstream ss;
  write_scored_pairs(pairs, ss);
  binary::write_file(path, ss.str());
}

ScoredPairs load_scored_pairs(const std::string& path) {
  std::istringstream ss(binary::read_file(path));
  return parse_scored_pairs(ss);
}

}  // namespace icd
