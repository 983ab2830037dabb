#include "workbench/prompts.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "assets.hpp"
#include "workbench/error.hpp"

namespace workbench {

namespace {

constexpr std::string_view kRoleAnchor = "extend beyond their surface appearance.";
constexpr std::string_view kSchemeSlot = "{{classification_scheme}}";

// Golden files end with a single newline that is not part of the paragraph.
std::string_view strip_final_newline(std::string_view text) {
  if (!text.empty() && text.back() == '\n') text.remove_suffix(1);
  return text;
}

}  // namespace

std::string_view stage_label(Stage stage) noexcept {
  return stage == Stage::StageOne ? "stage-1" : "stage-2";
}

NudgeParagraph nudge_paragraph(Nudge nudge) {
  switch (nudge) {
    case Nudge::Toward:
      return {nudge, strip_final_newline(assets::verified("prompts/nudge_toward.txt"))};
    case Nudge::Away:
      return {nudge, strip_final_newline(assets::verified("prompts/nudge_away.txt"))};
    case Nudge::NoNudge:
      break;
  }
  return {Nudge::NoNudge, {}};
}

std::string_view base_template(BasePrompt base) {
  return assets::verified(base == BasePrompt::FourStep ? "prompts/stage2_4step.txt"
                                                        : "prompts/stage2_1step.txt");
}

std::string_view classification_scheme() {
  return strip_final_newline(assets::verified("prompts/scheme_chubin_moitra.txt"));
}

std::string render_role_text(PromptSetting setting) {
  std::string text(base_template(setting.base));
  const NudgeParagraph nudge = nudge_paragraph(setting.nudge);
  if (nudge.text.empty()) return text;
  const auto at = text.find(kRoleAnchor);
  if (at == std::string::npos) {
    fail(ErrorCode::TemplateCorruption, "stage-two template lost its role paragraph anchor");
  }
  std::string inserted = "\n\n";
  inserted += nudge.text;
  text.insert(at + kRoleAnchor.size(), inserted);
  return text;
}

PromptBundle build_stage_one_prompt(const CitationContext& context, std::string_view scheme_doc) {
  context.validate();
  std::string role(assets::verified("prompts/stage1.txt"));
  const auto slot = role.find(kSchemeSlot);
  if (slot == std::string::npos) {
    fail(ErrorCode::TemplateCorruption, "stage-one template lost its scheme slot");
  }
  role.replace(slot, kSchemeSlot.size(), scheme_doc);

  const Json payload{{"citation_context", context.text},
                     {"citing_paper", context.citing_paper},
                     {"cited_papers", context.cited_papers}};
  PromptBundle bundle;
  bundle.stage = Stage::StageOne;
  bundle.system_or_role_text = std::move(role);
  bundle.input_payload = payload.dump(2);
  return bundle;
}

Json stage_two_payload(BasePrompt base, const StageOneResult& seed) {
  Json cited = Json::array();
  for (const auto& r : seed.cited_papers) {
    Json item{{"cited_paper", r.cited_paper},
              {"classification_category", category_label(r.classification_category)},
              {"classification_explanation", r.classification_explanation}};
    if (base == BasePrompt::FourStep) {
      item["content_expectation"] = r.content_expectation;
      item["citation_expectation"] = r.citation_expectation;
    }
    cited.push_back(std::move(item));
  }
  return Json{{"citation_context", seed.citation_context},
              {"citing_paper", seed.citing_paper},
              {"cited_papers", std::move(cited)}};
}

PromptBundle build_stage_two_prompt(PromptSetting setting, const StageOneResult& seed,
                                    std::span<const Attachment> attachments) {
  auto find = [&](const std::string& name) -> const Attachment& {
    const auto it = std::find_if(attachments.begin(), attachments.end(),
                                 [&](const Attachment& a) { return a.name == name; });
    if (it == attachments.end()) {
      fail(ErrorCode::MissingAttachment, "no full text attached for \"" + name + "\"");
    }
    return *it;
  };

  PromptBundle bundle;
  bundle.stage = Stage::StageTwo;
  bundle.setting = setting;
  bundle.system_or_role_text = render_role_text(setting);
  bundle.input_payload = stage_two_payload(setting.base, seed).dump(2);
  bundle.attachments.push_back(find(seed.citing_paper));
  for (const auto& r : seed.cited_papers) bundle.attachments.push_back(find(r.cited_paper));
  return bundle;
}

std::vector<Attachment> load_attachments(const std::string& directory) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(directory, ec)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  if (ec) fail(ErrorCode::Io, "cannot read attachment directory " + directory + ": " + ec.message());
  std::sort(files.begin(), files.end());

  std::vector<Attachment> out;
  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream bytes;
    bytes << in.rdbuf();
    out.push_back(Attachment{path.stem().string(), bytes.str(),
                             path.extension() == ".pdf" ? MediaKind::Pdf : MediaKind::PlainText});
  }
  return out;
}

}  // namespace workbench
