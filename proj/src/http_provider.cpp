#include "deplearn/http_provider.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace deplearn {

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void replace_all(std::string& s, std::string_view key, std::string_view value) {
  for (auto pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos + value.size())) {
    s.replace(pos, key.size(), value);
  }
}

// Splits at the "[Example]" block so it can be repeated.
struct Parts {
  std::string head, block, tail;
};

Parts split_example(const std::string& tmpl) {
  const auto a = tmpl.find("[Example]");
  const auto b = tmpl.find("[Your turn]");
  if (a == std::string::npos || b == std::string::npos || b < a) return {tmpl, "", ""};
  return {tmpl.substr(0, a), tmpl.substr(a, b - a), tmpl.substr(b)};
}

std::string inventory_json(const Inventory& inv) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [item, n] : inv) j[item.str()] = n;
  return j.dump();
}

std::string render_exemplars(const std::string& tmpl, std::span<const Exemplar> exemplars,
                             Parts& parts) {
  parts = split_example(tmpl);
  std::string out = parts.head;
  for (const auto& ex : exemplars) {
    std::string b = parts.block;
    replace_all(b, "{experienced_item}", ex.item.str());
    replace_all(b, "{experienced_requirement_set}", requirements_json(ex.requirements));
    out += b;
  }
  return out;
}

std::optional<nlohmann::json> first_object(const std::string& text) {
  for (auto start = text.find('{'); start != std::string::npos; start = text.find('{', start + 1)) {
    int depth = 0;
    for (auto i = start; i < text.size(); ++i) {
      if (text[i] == '{') ++depth;
      if (text[i] == '}' && --depth == 0) {
        auto j = nlohmann::json::parse(text.substr(start, i - start + 1), nullptr, false);
        if (!j.is_discarded() && j.is_object()) return j;
        break;
      }
    }
  }
  return std::nullopt;
}

}  // namespace

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  return {read_file(dir / "predict_requirements.txt"), read_file(dir / "plan_operation.txt"),
          read_file(dir / "revise_requirements.txt")};
}

std::string requirements_json(const RequirementSet& set) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [item, q] : set) j[item.str()] = q;
  return j.dump();
}

std::string subgoal_json(OperationKind op, const ItemId& item) {
  nlohmann::ordered_json j;
  j[std::string(to_string(op))] = item.str();
  return j.dump();
}

std::string render_predict_prompt(const std::string& tmpl, const ItemId& item,
                                  std::span<const Exemplar> exemplars) {
  Parts parts;
  std::string out = render_exemplars(tmpl, exemplars, parts) + parts.tail;
  replace_all(out, "{item_name}", item.str());
  return out;
}

std::string render_plan_prompt(const std::string& tmpl, const ItemId& item,
                               std::span<const OperationExemplar> exemplars,
                               std::span<const OperationKind> candidates) {
  const auto parts = split_example(tmpl);
  std::string out = parts.head;
  for (const auto& ex : exemplars) {
    std::string b = parts.block;
    replace_all(b, "{similar_item}", ex.item.str());
    replace_all(b, "{successful_subgoal}", subgoal_json(ex.op, ex.item));
    out += b;
  }
  std::string tail = parts.tail;
  std::string options;
  for (auto op : candidates) options += subgoal_json(op, item) + "\n";
  if (!options.empty()) options.pop_back();
  replace_all(tail, "{subgoal_options}", options);
  replace_all(tail, "{subgoal_item}", item.str());
  return out + tail;
}

std::string render_revise_prompt(const std::string& tmpl, const ItemId& item,
                                 const FailedTransition& failed,
                                 std::span<const Exemplar> exemplars) {
  Parts parts;
  std::string out = render_exemplars(tmpl, exemplars, parts) + parts.tail;
  replace_all(out, "{item_name}", item.str());
  replace_all(out, "{original_prediction}", requirements_json(failed.original_prediction));
  replace_all(out, "{inventory}", inventory_json(failed.inventory));
  replace_all(out, "{failed_subgoal}",
              subgoal_json(failed.failed_subgoal.op, failed.failed_subgoal.item));
  return out;
}

RequirementSet parse_requirements_answer(const std::string& text) {
  auto obj = first_object(text);
  if (!obj) throw ProviderError("no JSON object in answer");
  RequirementSet out;
  for (const auto& [key, val] : obj->items()) {
    const std::string name = ItemId::normalize(key);
    if (!ItemId::is_valid(name)) throw SchemaError("bad item name '" + key + "'");
    if (!val.is_number_integer() || val.get<long long>() < 1 || val.get<long long>() > 1'000'000) {
      throw SchemaError("bad quantity for " + name + ": " + val.dump());
    }
    out.set(ItemId(name), val.get<int>());
  }
  return out;
}

OperationKind parse_operation_answer(const std::string& text,
                                     std::span<const OperationKind> candidates) {
  auto allowed = [&](OperationKind op) {
    return std::find(candidates.begin(), candidates.end(), op) != candidates.end();
  };
  if (auto obj = first_object(text)) {
    for (const auto& [key, val] : obj->items()) {
      if (auto op = parse_operation(key); op && allowed(*op)) return *op;
    }
  }
  std::size_t best = std::string::npos;
  std::optional<OperationKind> found;
  for (auto op : candidates) {
    auto pos = text.find(to_string(op));
    if (pos < best) {
      best = pos;
      found = op;
    }
  }
  if (!found) throw ProviderError("no candidate operation in answer");
  return *found;
}

void HttpConfig::apply_env() {
  if (const char* v = std::getenv("DEPLEARN_LLM_ENDPOINT")) endpoint = v;
  if (const char* v = std::getenv("DEPLEARN_LLM_MODEL")) model = v;
  if (const char* v = std::getenv("DEPLEARN_LLM_API_KEY")) api_key = v;
}

HttpProvider::HttpProvider(HttpConfig config)
    : config_(std::move(config)), templates_(PromptTemplates::load(config_.prompts_dir)) {
  if (config_.endpoint.rfind("http://", 0) != 0) {
    throw std::invalid_argument("endpoint must be an http:// URL: " + config_.endpoint);
  }
  if (config_.retries < 1) throw std::invalid_argument("retries must be >= 1");
  const auto slash = config_.endpoint.find('/', 7);
  base_ = config_.endpoint.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : config_.endpoint.substr(slash);
}

std::string HttpProvider::complete(const std::string& prompt) {
  httplib::Client cli(base_);
  const auto secs = static_cast<time_t>(config_.timeout_s);
  const auto usecs = static_cast<time_t>((config_.timeout_s - secs) * 1e6);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
  const nlohmann::json body = {
      {"model", config_.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
  ++requests_;
  auto res = cli.Post(path_, headers, body.dump(), "application/json");
  if (!res) throw ProviderError("request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw ProviderError("HTTP " + std::to_string(res->status));
  auto doc = nlohmann::json::parse(res->body, nullptr, false);
  if (doc.is_discarded()) throw ProviderError("response is not JSON");
  try {
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw ProviderError("response has no choices[0].message.content");
  }
}

template <class Parse>
auto HttpProvider::ask(const std::string& prompt, Parse parse) -> decltype(parse(std::string{})) {
  for (int attempt = 1;; ++attempt) {
    try {
      return parse(complete(prompt));
    } catch (const ProviderError&) {
      if (attempt >= config_.retries) throw;
    }
  }
}

RequirementSet HttpProvider::predict_requirements(const ItemId& item,
                                                  std::span<const Exemplar> exemplars) {
  return ask(render_predict_prompt(templates_.predict, item, exemplars),
             [](const std::string& t) { return parse_requirements_answer(t); });
}

OperationKind HttpProvider::select_operation(const ItemId& item,
                                             std::span<const OperationExemplar> exemplars,
                                             std::span<const OperationKind> candidates) {
  if (candidates.empty()) throw std::invalid_argument("select_operation: no candidates");
  return ask(render_plan_prompt(templates_.plan, item, exemplars, candidates),
             [&](const std::string& t) { return parse_operation_answer(t, candidates); });
}

RequirementSet HttpProvider::revise_requirements(const ItemId& item,
                                                 const FailedTransition& failed,
                                                 std::span<const Exemplar> exemplars) {
  return ask(render_revise_prompt(templates_.revise, item, failed, exemplars),
             [](const std::string& t) { return parse_requirements_answer(t); });
}

}  // namespace deplearn
