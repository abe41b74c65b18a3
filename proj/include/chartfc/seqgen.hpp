#pragma once
// Turns positioned chart text into one flat token sequence, either by
// straight concatenation in reading order or through record templates.

#include <string>
#include <vector>

#include "chartfc/reader.hpp"

namespace chartfc {

enum class TemplateKind { Concat, Tmp1, Tmp2, Tmp3 };

std::string to_string(TemplateKind t);
TemplateKind template_from_string(const std::string& s);

// Alignment value for tokens that come from the template itself rather
// than a chart region (separators, counters, "is"/"when" glue).
inline constexpr int kScaffoldOrigin = -1;

struct SequenceResult {
  std::vector<std::string> tokens;
  std::vector<int> alignment;  // per token: region index, or kScaffoldOrigin

  // Tokens joined with single spaces; ";" is an ordinary token, so the
  // join renders separators as " ; ".
  std::string text() const;
};

struct RecordPair {
  std::string category_text;
  std::string value_text;
  int num = 1;          // 1-based counter in category-axis order
  int cat_region = -1;  // region indices into the classified read output
  int val_region = -1;
};

// Region texts in reading order joined with ";" tokens.
SequenceResult seq_concat(const ReadOutput& output);

// One record per bar: the category tick text paired with the bar's value.
// The value comes from the annotation text when it parses as a number;
// otherwise it is estimated from the annotation's position against the
// value-axis gridline labels and rounded to their precision. Throws
// UnpairedRegions when some bar's value cannot be recovered at all.
std::vector<RecordPair> pair_records(const ClassifyResult& classified);
std::vector<RecordPair> pair_records(const ReadOutput& output);

// Records filled into the chosen template and joined with ";" tokens:
//   tmp1  "entry one: <cat title> is <cat> ; <val title> is <val>"
//   tmp2  "row 0: <cat title> is <cat> ; <val title> is <val>"
//   tmp3  "<cat title> is <cat> when <val title> is <val>"
// tmp1 spells its counter as a word from one, tmp2 counts from 0.
SequenceResult seq_template(const ClassifyResult& classified, TemplateKind tmpl);
SequenceResult seq_template(const ReadOutput& output, TemplateKind tmpl);

}  // namespace chartfc
