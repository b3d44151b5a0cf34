#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "deplearn/item.hpp"
#include "deplearn/rng.hpp"
#include "deplearn/similarity.hpp"
#include "deplearn/textworld.hpp"

namespace deplearn {

struct Exemplar {
  ItemId item;
  RequirementSet requirements;
};

struct OperationExemplar {
  ItemId item;
  OperationKind op;
};

struct FailedTransition {
  RequirementSet original_prediction;
  Inventory inventory;
  Subgoal failed_subgoal;
};

class ProviderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed but parseable answer, e.g. a zero quantity.
class SchemaError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

class KnowledgeProvider {
 public:
  virtual ~KnowledgeProvider() = default;

  virtual RequirementSet predict_requirements(const ItemId& item,
                                              std::span<const Exemplar> exemplars) = 0;

  /// Must return a member of `candidates` (non-empty).
  virtual OperationKind select_operation(const ItemId& item,
                                         std::span<const OperationExemplar> exemplars,
                                         std::span<const OperationKind> candidates) = 0;

  virtual RequirementSet revise_requirements(const ItemId& item, const FailedTransition& failed,
                                             std::span<const Exemplar> exemplars) = 0;
};

struct NoiseProfile {
  double p_hallucinate_item = 0.08;
  double p_omit = 0.3;
  double p_extra = 0.5;
  double quantity_mean = -0.55;
  double quantity_sd = 2.74;
  double p_wrong_op = 0.3;

  static NoiseProfile zero() { return {0.0, 0.0, 0.0, 0.0, 0.0, 0.0}; }
  void validate() const;
};

/// LLM stand-in that perturbs the ground truth of a reference tech tree.
/// Predictions are memoized per item; every draw is seeded from
/// (seed, item) so replays are exact.
class OracleProvider final : public KnowledgeProvider {
 public:
  OracleProvider(const WorldSpec& knowledge, NoiseProfile profile, std::uint64_t seed,
                 const SimilarityProvider& similarity);

  RequirementSet predict_requirements(const ItemId& item,
                                      std::span<const Exemplar> exemplars) override;
  OperationKind select_operation(const ItemId& item, std::span<const OperationExemplar> exemplars,
                                 std::span<const OperationKind> candidates) override;
  RequirementSet revise_requirements(const ItemId& item, const FailedTransition& failed,
                                     std::span<const Exemplar> exemplars) override;

  const NoiseProfile& profile() const noexcept { return profile_; }
  bool knows(const ItemId& item) const noexcept { return known_.count(item) > 0; }

 private:
  RequirementSet draw(const ItemId& item, Rng& rng) const;
  std::vector<ItemId> neighbours(const ItemId& anchor, std::size_t k) const;

  const SimilarityProvider& similarity_;
  NoiseProfile profile_;
  std::uint64_t seed_;
  DependencyGraph truth_;
  std::map<ItemId, OperationKind> operations_;
  std::set<ItemId> known_;
  std::vector<ItemId> known_list_;
  std::map<ItemId, RequirementSet> memo_;
  std::map<ItemId, std::uint64_t> revisions_;
  Rng op_rng_;
};

/// Prefixes used for invented item names.
std::span<const std::string_view> hallucination_adjectives();

struct CalibrationReport {
  std::size_t predictions = 0;
  double correct_item_set = 0.0;    // item set equals truth, quantities ignored
  double exact = 0.0;               // items and quantities equal truth
  double hallucinated = 0.0;        // contains an item absent from the spec
  double unnecessary_included = 0.0;
  double required_omitted = 0.0;
  double quantity_mae = 0.0;        // over correctly named entries
  double quantity_mean_error = 0.0;
  double quantity_sd = 0.0;
};

/// Runs `seeds` fresh oracles over `items` and compares with the truth.
CalibrationReport calibrate_oracle(const WorldSpec& spec, const NoiseProfile& profile,
                                   const std::vector<ItemId>& items, int seeds,
                                   std::uint64_t base_seed = 0);

/// The 67 goal items plus the intermediates most often referenced by them,
/// 75 in total for the shipped tech tree.
std::vector<ItemId> calibration_items(const WorldSpec& spec, std::size_t count = 75);

}  // namespace deplearn
