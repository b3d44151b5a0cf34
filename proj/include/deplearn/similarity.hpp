#pragma once

#include <map>
#include <string>
#include <vector>

#include "deplearn/item.hpp"

namespace deplearn {

class SimilarityProvider {
 public:
  virtual ~SimilarityProvider() = default;

  /// Score in [0, 1]; 1 for identical names, symmetric.
  virtual double similarity(const ItemId& a, const ItemId& b) const = 0;

  /// Up to k pool members ordered by descending similarity, ties by name.
  /// The target itself is only returned when nothing else is left to fill k.
  std::vector<ItemId> top_k(const ItemId& target, const std::vector<ItemId>& pool,
                            std::size_t k) const;
};

/// Cosine similarity of character-trigram counts. Each underscore-separated
/// token is padded with '#' before trigrams are taken.
class LexicalSimilarity final : public SimilarityProvider {
 public:
  double similarity(const ItemId& a, const ItemId& b) const override;

  static std::map<std::string, int> trigrams(const std::string& name);
};

}  // namespace deplearn
