#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace deplearn {

/// Name of an item, e.g. "iron_pickaxe". Non-empty, lowercase letters,
/// digits and underscores only.
class ItemId {
 public:
  explicit ItemId(std::string name);
  ItemId(const char* name) : ItemId(std::string(name)) {}

  const std::string& str() const noexcept { return name_; }

  auto operator<=>(const ItemId&) const = default;
  bool operator==(const ItemId&) const = default;

  /// True when `name` would be accepted by the constructor.
  static bool is_valid(std::string_view name) noexcept;

  /// Lowercases and maps spaces/dashes to underscores; used when parsing
  /// free-form provider output.
  static std::string normalize(std::string_view raw);

 private:
  std::string name_;
};

std::ostream& operator<<(std::ostream& os, const ItemId& id);

enum class OperationKind { kMine = 0, kCraft = 1, kSmelt = 2 };

inline constexpr std::array<OperationKind, 3> kAllOperations = {
    OperationKind::kMine, OperationKind::kCraft, OperationKind::kSmelt};

std::string_view to_string(OperationKind op) noexcept;
std::optional<OperationKind> parse_operation(std::string_view text) noexcept;

/// Item -> positive quantity. The incoming edges of one node.
class RequirementSet {
 public:
  using Map = std::map<ItemId, int>;

  RequirementSet() = default;
  RequirementSet(std::initializer_list<std::pair<const ItemId, int>> entries);

  /// Throws std::invalid_argument for quantity < 1.
  void set(const ItemId& item, int quantity);
  void erase(const ItemId& item) { entries_.erase(item); }

  int quantity(const ItemId& item) const noexcept;
  bool contains(const ItemId& item) const noexcept { return entries_.count(item) > 0; }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  const Map& entries() const noexcept { return entries_; }
  std::set<ItemId> items() const;

  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  bool operator==(const RequirementSet&) const = default;

 private:
  Map entries_;
};

std::ostream& operator<<(std::ostream& os, const RequirementSet& r);

/// Item -> non-negative count. Absent key reads as 0; zero counts are not stored.
class Inventory {
 public:
  Inventory() = default;
  Inventory(std::initializer_list<std::pair<const ItemId, int>> entries);

  int count(const ItemId& item) const noexcept;
  void add(const ItemId& item, int n);
  /// Throws std::logic_error when fewer than `n` are held.
  void remove(const ItemId& item, int n);
  bool empty() const noexcept { return counts_.empty(); }
  const std::map<ItemId, int>& counts() const noexcept { return counts_; }

  auto begin() const noexcept { return counts_.begin(); }
  auto end() const noexcept { return counts_.end(); }

  bool operator==(const Inventory&) const = default;

 private:
  std::map<ItemId, int> counts_;
};

/// post - pre, zero entries dropped.
std::map<ItemId, int> inventory_delta(const Inventory& pre, const Inventory& post);

/// (op, quantity, item): obtain `quantity` more units of `item` using `op`.
struct Subgoal {
  OperationKind op;
  int quantity;
  ItemId item;

  bool operator==(const Subgoal&) const = default;
};

std::string to_string(const Subgoal& s);

}  // namespace deplearn

template <>
struct std::hash<deplearn::ItemId> {
  std::size_t operator()(const deplearn::ItemId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
