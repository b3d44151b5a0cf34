#pragma once

#include <filesystem>
#include <string>

#include "deplearn/knowledge.hpp"

namespace deplearn {

struct PromptTemplates {
  std::string predict;
  std::string plan;
  std::string revise;

  static PromptTemplates load(const std::filesystem::path& dir);
};

/// Fills the requirement-prediction template; the example block is repeated
/// once per exemplar.
std::string render_predict_prompt(const std::string& tmpl, const ItemId& item,
                                  std::span<const Exemplar> exemplars);
std::string render_plan_prompt(const std::string& tmpl, const ItemId& item,
                               std::span<const OperationExemplar> exemplars,
                               std::span<const OperationKind> candidates);
std::string render_revise_prompt(const std::string& tmpl, const ItemId& item,
                                 const FailedTransition& failed,
                                 std::span<const Exemplar> exemplars);

/// {"a": 1, "b": 2} with keys in name order.
std::string requirements_json(const RequirementSet& set);
/// {"craft": "stick"}
std::string subgoal_json(OperationKind op, const ItemId& item);

/// First JSON object in `text` as a requirement set. Throws SchemaError on
/// non-positive or non-integer quantities and bad names, ProviderError when
/// no object can be parsed.
RequirementSet parse_requirements_answer(const std::string& text);
/// First JSON object whose key is an operation in `candidates`, else the first
/// candidate named in the text. Throws ProviderError when nothing matches.
OperationKind parse_operation_answer(const std::string& text,
                                     std::span<const OperationKind> candidates);

struct HttpConfig {
  std::string endpoint = "http://127.0.0.1:8000/v1/chat/completions";
  std::string model = "qwen2.5-vl-7b";
  std::string api_key;
  double timeout_s = 60.0;
  int retries = 3;
  std::filesystem::path prompts_dir = DEPLEARN_DATA_DIR "/prompts";

  /// DEPLEARN_LLM_ENDPOINT, DEPLEARN_LLM_MODEL and DEPLEARN_LLM_API_KEY win
  /// over the configured values.
  void apply_env();
};

/// Chat-completion client: posts {model, messages:[{role:"user", content}]}
/// and reads choices[0].message.content. Plain http only.
class HttpProvider final : public KnowledgeProvider {
 public:
  explicit HttpProvider(HttpConfig config);

  RequirementSet predict_requirements(const ItemId& item,
                                      std::span<const Exemplar> exemplars) override;
  OperationKind select_operation(const ItemId& item, std::span<const OperationExemplar> exemplars,
                                 std::span<const OperationKind> candidates) override;
  RequirementSet revise_requirements(const ItemId& item, const FailedTransition& failed,
                                     std::span<const Exemplar> exemplars) override;

  int requests() const noexcept { return requests_; }

 private:
  std::string complete(const std::string& prompt);
  template <class Parse>
  auto ask(const std::string& prompt, Parse parse) -> decltype(parse(std::string{}));

  HttpConfig config_;
  PromptTemplates templates_;
  std::string base_;
  std::string path_;
  int requests_ = 0;
};

}  // namespace deplearn
