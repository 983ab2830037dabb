#include "workbench/schema.hpp"

#include <algorithm>
#include <set>

#include "assets.hpp"
#include "workbench/error.hpp"

namespace workbench {

namespace {

std::size_t utf8_length(const std::string& s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

bool has_type(const Json& doc, const std::string& type) {
  if (type == "object") return doc.is_object();
  if (type == "array") return doc.is_array();
  if (type == "string") return doc.is_string();
  if (type == "integer") return doc.is_number_integer();
  if (type == "number") return doc.is_number();
  if (type == "boolean") return doc.is_boolean();
  if (type == "null") return doc.is_null();
  return false;
}

std::optional<std::string> check(const Json& schema, const Json& doc, const std::string& path) {
  const std::string where = path.empty() ? "$" : path;
  if (auto t = schema.find("type"); t != schema.end()) {
    if (!has_type(doc, t->get<std::string>())) {
      return where + ": expected " + t->get<std::string>();
    }
  }
  if (auto e = schema.find("enum"); e != schema.end()) {
    bool ok = false;
    for (const auto& allowed : *e) {
      if (doc.is_string() && allowed.is_string()) {
        ok = trim(doc.get<std::string>()) == allowed.get<std::string>();
      } else {
        ok = doc == allowed;
      }
      if (ok) break;
    }
    if (!ok) return where + ": value " + doc.dump() + " is not one of the allowed values";
  }
  if (doc.is_string()) {
    if (auto m = schema.find("minLength"); m != schema.end()) {
      if (utf8_length(doc.get<std::string>()) < m->get<std::size_t>()) {
        return where + ": string shorter than " + std::to_string(m->get<std::size_t>());
      }
    }
  }
  if (doc.is_object()) {
    const auto props = schema.find("properties");
    if (auto r = schema.find("required"); r != schema.end()) {
      for (const auto& name : *r) {
        if (!doc.contains(name.get<std::string>())) {
          return where + ": missing required field \"" + name.get<std::string>() + "\"";
        }
      }
    }
    if (auto a = schema.find("additionalProperties"); a != schema.end() && a->is_boolean() && !a->get<bool>()) {
      for (const auto& [key, value] : doc.items()) {
        if (props == schema.end() || !props->contains(key)) {
          return where + ": unexpected field \"" + key + "\"";
        }
      }
    }
    if (props != schema.end()) {
      for (const auto& [key, sub] : props->items()) {
        if (auto it = doc.find(key); it != doc.end()) {
          if (auto v = check(sub, *it, where + "." + key)) return v;
        }
      }
    }
  }
  if (doc.is_array()) {
    if (auto m = schema.find("minItems"); m != schema.end() && doc.size() < m->get<std::size_t>()) {
      return where + ": fewer than " + std::to_string(m->get<std::size_t>()) + " items";
    }
    if (auto m = schema.find("maxItems"); m != schema.end() && doc.size() > m->get<std::size_t>()) {
      return where + ": more than " + std::to_string(m->get<std::size_t>()) + " items";
    }
    if (auto items = schema.find("items"); items != schema.end()) {
      for (std::size_t i = 0; i < doc.size(); ++i) {
        if (auto v = check(*items, doc[i], where + "[" + std::to_string(i) + "]")) return v;
      }
    }
  }
  return std::nullopt;
}

Json parse_document(std::string_view raw) {
  Json doc;
  try {
    doc = Json::parse(raw);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::MalformedJson, std::string("model output is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::SchemaViolation, "$: expected a single JSON object");
  return doc;
}

void require_conforming(const SchemaValidator& schema, const Json& doc) {
  if (auto v = schema.first_violation(doc)) fail(ErrorCode::SchemaViolation, *v);
}

}  // namespace

SchemaValidator::SchemaValidator(Json schema) : schema_(std::move(schema)) {}

std::optional<std::string> SchemaValidator::first_violation(const Json& document) const {
  return check(schema_, document, "");
}

const SchemaValidator& stage_one_schema() {
  static const SchemaValidator v(Json::parse(assets::verified("docs/schemas/stage1_output.schema.json")));
  return v;
}

const SchemaValidator& stage_two_schema() {
  static const SchemaValidator v(Json::parse(assets::verified("docs/schemas/stage2_output.schema.json")));
  return v;
}

StageOneResult parse_stage_one_output(std::string_view raw, const CitationContext& context) {
  const Json doc = parse_document(raw);
  require_conforming(stage_one_schema(), doc);

  StageOneResult result = stage_one_from_json(doc);
  if (result.citing_paper != context.citing_paper) {
    fail(ErrorCode::IdentifierMismatch,
         "citing_paper \"" + result.citing_paper + "\" does not match context " + context.id);
  }
  std::set<std::string> seen;
  for (const auto& reading : result.cited_papers) {
    if (!context.cites(reading.cited_paper)) {
      fail(ErrorCode::IdentifierMismatch,
           "cited_paper \"" + reading.cited_paper + "\" is not cited in context " + context.id);
    }
    if (!seen.insert(reading.cited_paper).second) {
      fail(ErrorCode::SchemaViolation, "cited_paper \"" + reading.cited_paper + "\" appears twice");
    }
  }
  return result;
}

StageTwoResult parse_stage_two_output(std::string_view raw, PromptSetting setting) {
  const Json doc = parse_document(raw);

  static constexpr std::string_view kSections[] = {"expectation_check", "lexical_cues", "extended_context"};
  for (std::string_view section : kSections) {
    const bool present = doc.contains(std::string(section));
    if (setting.base == BasePrompt::OneStep && present) {
      fail(ErrorCode::SectionMismatch, "1-step output must not contain " + std::string(section));
    }
    if (setting.base == BasePrompt::FourStep && !present) {
      fail(ErrorCode::SectionMismatch, "4-step output is missing " + std::string(section));
    }
  }
  if (auto it = doc.find("alternative_hypotheses"); it != doc.end() && it->is_array() &&
                                                    it->size() != kHypothesesPerRun) {
    fail(ErrorCode::CardinalityError,
         "expected exactly 5 alternative hypotheses, got " + std::to_string(it->size()));
  }
  require_conforming(stage_two_schema(), doc);

  for (const auto& h : doc.at("alternative_hypotheses")) {
    if (trim(h.at("hypothesis").get<std::string>()).empty() ||
        trim(h.at("justification").get<std::string>()).empty()) {
      fail(ErrorCode::SchemaViolation, "hypothesis and justification must not be blank");
    }
  }

  Json record{{"run_id", ""}, {"setting", setting_label(setting)}, {"seed_stage_one", ""}};
  record["output"] = doc;
  return stage_two_from_json(record);
}

}  // namespace workbench
