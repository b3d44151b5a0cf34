#include "deplearn/knowledge.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace deplearn {

namespace {
constexpr std::array<std::string_view, 8> kAdjectives = {
    "ancient", "enchanted", "mystic", "reinforced", "crystal", "shadow", "glowing", "refined"};

bool chance(Rng& rng, double p) {
  if (p <= 0.0) return false;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

template <class T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}
}  // namespace

std::span<const std::string_view> hallucination_adjectives() { return kAdjectives; }

void NoiseProfile::validate() const {
  for (double p : {p_hallucinate_item, p_omit, p_extra, p_wrong_op}) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("noise probability outside [0,1]");
  }
  if (!(quantity_sd >= 0.0)) throw std::invalid_argument("negative quantity noise sd");
}

OracleProvider::OracleProvider(const WorldSpec& knowledge, NoiseProfile profile, std::uint64_t seed,
                               const SimilarityProvider& similarity)
    : similarity_(similarity),
      profile_(profile),
      seed_(seed),
      truth_(knowledge.truth_graph()),
      op_rng_(derive_seed(seed, "select_operation")) {
  profile_.validate();
  for (const auto& r : knowledge.items) {
    operations_.emplace(r.name, r.true_operation);
    known_.insert(r.name);
    known_list_.push_back(r.name);
  }
}

std::vector<ItemId> OracleProvider::neighbours(const ItemId& anchor, std::size_t k) const {
  return similarity_.top_k(anchor, known_list_, k);
}

RequirementSet OracleProvider::draw(const ItemId& item, Rng& rng) const {
  RequirementSet base;
  if (known_.count(item)) {
    base = truth_.requirements(item);
  } else {
    const auto near = neighbours(item, 3);
    if (!near.empty()) base = truth_.requirements(pick(rng, near));
    base.erase(item);
  }

  RequirementSet out;
  for (const auto& [u, q] : base) {
    if (chance(rng, profile_.p_omit)) continue;
    double noise = profile_.quantity_mean;
    if (profile_.quantity_sd > 0.0) {
      noise = std::normal_distribution<double>(profile_.quantity_mean, profile_.quantity_sd)(rng);
    }
    out.set(u, std::max(1, q + static_cast<int>(std::lround(noise))));
  }

  std::vector<ItemId> anchors;
  for (const auto& [u, q] : base) anchors.push_back(u);
  anchors.push_back(item);

  if (chance(rng, profile_.p_extra)) {
    std::vector<ItemId> pool;
    for (const auto& cand : neighbours(pick(rng, anchors), 5)) {
      if (cand != item && !base.contains(cand) && !out.contains(cand)) pool.push_back(cand);
    }
    if (!pool.empty()) out.set(pick(rng, pool), std::uniform_int_distribution<int>(1, 4)(rng));
  }

  if (chance(rng, profile_.p_hallucinate_item)) {
    const ItemId& anchor = pick(rng, anchors);
    const std::size_t first = std::uniform_int_distribution<std::size_t>(0, kAdjectives.size() - 1)(rng);
    for (std::size_t i = 0; i < kAdjectives.size(); ++i) {
      ItemId name(std::string(kAdjectives[(first + i) % kAdjectives.size()]) + "_" + anchor.str());
      if (known_.count(name) || name == item || out.contains(name)) continue;
      out.set(name, std::uniform_int_distribution<int>(1, 3)(rng));
      break;
    }
  }
  return out;
}

RequirementSet OracleProvider::predict_requirements(const ItemId& item,
                                                    std::span<const Exemplar> /*exemplars*/) {
  if (auto it = memo_.find(item); it != memo_.end()) return it->second;
  Rng rng(derive_seed(seed_, "predict", item.str()));
  RequirementSet r = draw(item, rng);
  memo_.emplace(item, r);
  return r;
}

OperationKind OracleProvider::select_operation(const ItemId& item,
                                               std::span<const OperationExemplar> /*exemplars*/,
                                               std::span<const OperationKind> candidates) {
  if (candidates.empty()) throw std::invalid_argument("select_operation needs candidates");
  std::vector<OperationKind> cands(candidates.begin(), candidates.end());
  auto truth = operations_.find(item);
  if (truth != operations_.end() &&
      std::find(cands.begin(), cands.end(), truth->second) != cands.end()) {
    if (!chance(op_rng_, profile_.p_wrong_op)) return truth->second;
    std::vector<OperationKind> others;
    for (auto op : cands) {
      if (op != truth->second) others.push_back(op);
    }
    if (others.empty()) return truth->second;
    return pick(op_rng_, others);
  }
  return pick(op_rng_, cands);
}

RequirementSet OracleProvider::revise_requirements(const ItemId& item,
                                                   const FailedTransition& /*failed*/,
                                                   std::span<const Exemplar> /*exemplars*/) {
  Rng rng(derive_seed(seed_, "revise", item.str(), ++revisions_[item]));
  return draw(item, rng);
}

std::vector<ItemId> calibration_items(const WorldSpec& spec, std::size_t count) {
  std::vector<ItemId> out = spec.goal_items();
  std::set<ItemId> chosen(out.begin(), out.end());
  std::map<ItemId, int> refs;
  for (const auto& g : out) {
    if (const auto* rec = spec.find(g)) {
      for (const auto& req : rec->requirements) {
        if (!chosen.count(req.item)) ++refs[req.item];
      }
    }
  }
  std::vector<std::pair<int, ItemId>> ranked;
  for (const auto& [item, n] : refs) ranked.emplace_back(n, item);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (const auto& [n, item] : ranked) {
    if (out.size() >= count) break;
    out.push_back(item);
    chosen.insert(item);
  }
  for (const auto& r : spec.items) {
    if (out.size() >= count) break;
    if (chosen.insert(r.name).second) out.push_back(r.name);
  }
  return out;
}

CalibrationReport calibrate_oracle(const WorldSpec& spec, const NoiseProfile& profile,
                                   const std::vector<ItemId>& items, int seeds,
                                   std::uint64_t base_seed) {
  LexicalSimilarity sim;
  const DependencyGraph truth = spec.truth_graph();
  const std::set<ItemId> names = spec.item_names();
  CalibrationReport rep;
  std::size_t correct = 0, exact = 0, halluc = 0, extra = 0, omitted = 0;
  double abs_sum = 0.0, signed_sum = 0.0, sq_sum = 0.0;
  std::size_t qn = 0;
  for (int s = 0; s < seeds; ++s) {
    OracleProvider oracle(spec, profile, base_seed + static_cast<std::uint64_t>(s), sim);
    for (const auto& item : items) {
      const RequirementSet pred = oracle.predict_requirements(item, {});
      const RequirementSet& want = truth.requirements(item);
      ++rep.predictions;
      if (pred.items() == want.items()) ++correct;
      if (pred == want) ++exact;
      bool has_halluc = false, has_extra = false, has_omit = false;
      for (const auto& [u, q] : pred) {
        if (!names.count(u)) has_halluc = true;
        if (!want.contains(u)) {
          has_extra = true;
        } else {
          const double err = q - want.quantity(u);
          abs_sum += std::abs(err);
          signed_sum += err;
          sq_sum += err * err;
          ++qn;
        }
      }
      for (const auto& [u, q] : want) {
        if (!pred.contains(u)) has_omit = true;
      }
      halluc += has_halluc;
      extra += has_extra;
      omitted += has_omit;
    }
  }
  const double n = static_cast<double>(std::max<std::size_t>(rep.predictions, 1));
  rep.correct_item_set = correct / n;
  rep.exact = exact / n;
  rep.hallucinated = halluc / n;
  rep.unnecessary_included = extra / n;
  rep.required_omitted = omitted / n;
  if (qn > 0) {
    rep.quantity_mae = abs_sum / qn;
    rep.quantity_mean_error = signed_sum / qn;
    rep.quantity_sd = std::sqrt(std::max(0.0, sq_sum / qn - rep.quantity_mean_error * rep.quantity_mean_error));
  }
  return rep;
}

}  // namespace deplearn
