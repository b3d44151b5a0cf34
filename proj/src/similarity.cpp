#include "deplearn/similarity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace deplearn {

std::vector<ItemId> SimilarityProvider::top_k(const ItemId& target, const std::vector<ItemId>& pool,
                                              std::size_t k) const {
  std::vector<std::pair<double, ItemId>> scored;
  bool has_target = false;
  for (const auto& p : pool) {
    if (p == target) {
      has_target = true;
      continue;
    }
    scored.emplace_back(similarity(target, p), p);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  // Duplicates in the pool collapse to one entry.
  scored.erase(std::unique(scored.begin(), scored.end(),
                           [](const auto& a, const auto& b) { return a.second == b.second; }),
               scored.end());
  std::vector<ItemId> out;
  for (const auto& [s, item] : scored) {
    if (out.size() == k) break;
    out.push_back(item);
  }
  if (has_target && out.size() < k) out.push_back(target);
  return out;
}

std::map<std::string, int> LexicalSimilarity::trigrams(const std::string& name) {
  std::map<std::string, int> grams;
  std::size_t start = 0;
  while (start <= name.size()) {
    std::size_t end = name.find('_', start);
    if (end == std::string::npos) end = name.size();
    if (end > start) {
      std::string tok = "#";
      for (std::size_t i = start; i < end; ++i) {
        tok.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(name[i]))));
      }
      tok.push_back('#');
      for (std::size_t i = 0; i + 3 <= tok.size(); ++i) ++grams[tok.substr(i, 3)];
    }
    start = end + 1;
  }
  return grams;
}

double LexicalSimilarity::similarity(const ItemId& a, const ItemId& b) const {
  if (a == b) return 1.0;
  if (b < a) return similarity(b, a);
  const auto ga = trigrams(a.str());
  const auto gb = trigrams(b.str());
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [g, n] : ga) {
    na += double(n) * n;
    auto it = gb.find(g);
    if (it != gb.end()) dot += double(n) * it->second;
  }
  for (const auto& [g, n] : gb) nb += double(n) * n;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

}  // namespace deplearn
