#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "workbench/domain.hpp"

namespace workbench {

enum class Stage { StageOne, StageTwo };
enum class MediaKind { Pdf, PlainText };

std::string_view stage_label(Stage stage) noexcept;

// A full-text document handed to the model alongside the prompt. The name
// must equal the citing_paper / cited_paper identifier it stands for.
struct Attachment {
  std::string name;
  std::string bytes;
  MediaKind media_kind = MediaKind::PlainText;
};

struct PromptBundle {
  Stage stage = Stage::StageOne;
  std::string system_or_role_text;
  std::string input_payload;
  std::vector<Attachment> attachments;
  // Setting the bundle was rendered for (stage two only).
  std::optional<PromptSetting> setting;
};

struct NudgeParagraph {
  Nudge nudge;
  std::string_view text;  // empty for NoNudge
};

NudgeParagraph nudge_paragraph(Nudge nudge);

// Verbatim base template for stage two (the No-nudge render).
std::string_view base_template(BasePrompt base);
// Chubin & Moitra category definitions used as the stage-one scheme text.
std::string_view classification_scheme();

// Role text for a setting: the base template with the nudge paragraph
// inserted as its own paragraph right after the opening role paragraph.
std::string render_role_text(PromptSetting setting);

// Errors: EmptyContext.
PromptBundle build_stage_one_prompt(const CitationContext& context, std::string_view scheme_doc);

// Errors: MissingAttachment, TemplateCorruption.
PromptBundle build_stage_two_prompt(PromptSetting setting, const StageOneResult& seed,
                                    std::span<const Attachment> attachments);

// Stage-two input JSON: expectation fields are included only for 4-step.
Json stage_two_payload(BasePrompt base, const StageOneResult& seed);

// Loads every regular file in a directory as an attachment named after the
// file stem; ".pdf" files are MediaKind::Pdf, everything else plain text.
std::vector<Attachment> load_attachments(const std::string& directory);

}  // namespace workbench
