#include "deplearn/item.hpp"

#include <cctype>
#include <ostream>
#include <sstream>

namespace deplearn {

ItemId::ItemId(std::string name) : name_(std::move(name)) {
  if (!is_valid(name_)) {
    throw std::invalid_argument("invalid item name: '" + name_ + "'");
  }
}

bool ItemId::is_valid(std::string_view name) noexcept {
  if (name.empty()) return false;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}

std::string ItemId::normalize(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    if (c == ' ' || c == '-') {
      out.push_back('_');
    } else {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  // Trim underscores produced by leading/trailing whitespace.
  const auto first = out.find_first_not_of('_');
  if (first == std::string::npos) return {};
  const auto last = out.find_last_not_of('_');
  return out.substr(first, last - first + 1);
}

std::ostream& operator<<(std::ostream& os, const ItemId& id) { return os << id.str(); }

std::string_view to_string(OperationKind op) noexcept {
  switch (op) {
    case OperationKind::kMine: return "mine";
    case OperationKind::kCraft: return "craft";
    case OperationKind::kSmelt: return "smelt";
  }
  return "?";
}

std::optional<OperationKind> parse_operation(std::string_view text) noexcept {
  if (text == "mine") return OperationKind::kMine;
  if (text == "craft") return OperationKind::kCraft;
  if (text == "smelt") return OperationKind::kSmelt;
  return std::nullopt;
}

RequirementSet::RequirementSet(std::initializer_list<std::pair<const ItemId, int>> entries) {
  for (const auto& [item, q] : entries) set(item, q);
}

void RequirementSet::set(const ItemId& item, int quantity) {
  if (quantity < 1) {
    throw std::invalid_argument("requirement quantity must be >= 1 for " + item.str());
  }
  entries_.insert_or_assign(item, quantity);
}

int RequirementSet::quantity(const ItemId& item) const noexcept {
  auto it = entries_.find(item);
  return it == entries_.end() ? 0 : it->second;
}

std::set<ItemId> RequirementSet::items() const {
  std::set<ItemId> out;
  for (const auto& [item, q] : entries_) out.insert(item);
  return out;
}

std::ostream& operator<<(std::ostream& os, const RequirementSet& r) {
  os << '{';
  bool first = true;
  for (const auto& [item, q] : r) {
    if (!first) os << ", ";
    first = false;
    os << item << ':' << q;
  }
  return os << '}';
}

Inventory::Inventory(std::initializer_list<std::pair<const ItemId, int>> entries) {
  for (const auto& [item, n] : entries) add(item, n);
}

int Inventory::count(const ItemId& item) const noexcept {
  auto it = counts_.find(item);
  return it == counts_.end() ? 0 : it->second;
}

void Inventory::add(const ItemId& item, int n) {
  if (n < 0) throw std::invalid_argument("negative inventory add");
  if (n == 0) return;
  counts_[item] += n;
}

void Inventory::remove(const ItemId& item, int n) {
  if (n < 0) throw std::invalid_argument("negative inventory remove");
  if (n == 0) return;
  auto it = counts_.find(item);
  if (it == counts_.end() || it->second < n) {
    throw std::logic_error("inventory underflow for " + item.str());
  }
  it->second -= n;
  if (it->second == 0) counts_.erase(it);
}

std::map<ItemId, int> inventory_delta(const Inventory& pre, const Inventory& post) {
  std::map<ItemId, int> delta;
  for (const auto& [item, n] : post) delta[item] += n;
  for (const auto& [item, n] : pre) delta[item] -= n;
  std::erase_if(delta, [](const auto& kv) { return kv.second == 0; });
  return delta;
}

std::string to_string(const Subgoal& s) {
  std::ostringstream os;
  os << to_string(s.op) << ' ' << s.quantity << ' ' << s.item;
  return os.str();
}

}  // namespace deplearn
