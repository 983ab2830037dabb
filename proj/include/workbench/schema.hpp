#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "workbench/domain.hpp"

namespace workbench {

// Validator for the JSON-Schema subset used by docs/schemas: type, properties,
// required, additionalProperties=false, items, enum, minItems, maxItems,
// minLength. Enum comparison trims surrounding whitespace.
class SchemaValidator {
 public:
  explicit SchemaValidator(Json schema);

  // First violation as "path: reason", or nullopt when the document conforms.
  std::optional<std::string> first_violation(const Json& document) const;

 private:
  Json schema_;
};

const SchemaValidator& stage_one_schema();
const SchemaValidator& stage_two_schema();

// Errors: MalformedJson, SchemaViolation, IdentifierMismatch.
StageOneResult parse_stage_one_output(std::string_view raw, const CitationContext& context);

// Errors: MalformedJson, SchemaViolation, CardinalityError, SectionMismatch.
// run_id and seed_stage_one are left empty for the caller to fill in.
StageTwoResult parse_stage_two_output(std::string_view raw, PromptSetting setting);

}  // namespace workbench
