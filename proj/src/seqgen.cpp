#include "chartfc/seqgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "chartfc/errors.hpp"
#include "chartfc/font.hpp"
#include "chartfc/text.hpp"

namespace chartfc {
namespace {

const char* kNumberWords[] = {
    "one",     "two",     "three",    "four",     "five",    "six",     "seven",
    "eight",   "nine",    "ten",      "eleven",   "twelve",  "thirteen", "fourteen",
    "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty"};

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

void emit(SequenceResult& seq, const std::string& text, int origin) {
  for (auto& tok : split_ws(text)) {
    seq.tokens.push_back(std::move(tok));
    seq.alignment.push_back(origin);
  }
}

bool parseable(const std::string& s, double* out) {
  const std::optional<double> v = parse_decimal(s);
  if (!v) return false;
  if (out) *out = *v;
  return true;
}

int decimals_of(const std::string& s) {
  auto dot = s.find('.');
  return dot == std::string::npos ? 0 : static_cast<int>(s.size() - dot - 1);
}

// Least-squares line v = a*p + b through gridline labels at axis
// positions p. Returns false when the fit is degenerate.
bool fit_axis(const std::vector<std::pair<double, double>>& pts, double* a, double* b) {
  if (pts.size() < 2) return false;
  double sp = 0, sv = 0, spp = 0, spv = 0;
  for (auto [p, v] : pts) {
    sp += p;
    sv += v;
    spp += p * p;
    spv += p * v;
  }
  double n = static_cast<double>(pts.size());
  double denom = n * spp - sp * sp;
  if (std::abs(denom) < 1e-9) return false;
  *a = (n * spv - sp * sv) / denom;
  *b = (sv - *a * sp) / n;
  return true;
}

std::string round_to_decimals(double v, int d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", d, v);
  return format_decimal(parse_decimal(buf).value());
}

}  // namespace

std::string to_string(TemplateKind t) {
  switch (t) {
    case TemplateKind::Concat: return "concat";
    case TemplateKind::Tmp1: return "tmp1";
    case TemplateKind::Tmp2: return "tmp2";
    default: return "tmp3";
  }
}

TemplateKind template_from_string(const std::string& s) {
  if (s == "concat") return TemplateKind::Concat;
  if (s == "tmp1") return TemplateKind::Tmp1;
  if (s == "tmp2") return TemplateKind::Tmp2;
  if (s == "tmp3") return TemplateKind::Tmp3;
  throw InputError("unknown template: " + s);
}

std::string SequenceResult::text() const {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

SequenceResult seq_concat(const ReadOutput& output) {
  if (output.regions.empty()) throw EmptyReadOutput("nothing was read from the chart");
  SequenceResult seq;
  for (size_t i = 0; i < output.regions.size(); ++i) {
    if (i > 0) emit(seq, ";", kScaffoldOrigin);
    emit(seq, output.regions[i].text, static_cast<int>(i));
  }
  return seq;
}

std::vector<RecordPair> pair_records(const ClassifyResult& classified) {
  bool horizontal = classified.orientation == Orientation::Horizontal;
  const auto& regs = classified.regions;

  std::map<int, int> cat_by_bar;
  std::map<int, std::vector<int>> anns_by_bar;
  std::vector<std::pair<double, double>> grid_pts;
  for (size_t i = 0; i < regs.size(); ++i) {
    const auto& cr = regs[i];
    if (cr.role == RegionRole::TickCategory && cr.bar_index) {
      cat_by_bar.emplace(*cr.bar_index, static_cast<int>(i));
    } else if (cr.role == RegionRole::TickValue && cr.gridline) {
      double v;
      if (parseable(cr.region.text, &v)) {
        double p = horizontal ? cr.region.x_center() : cr.region.y_center();
        grid_pts.push_back({p, v});
      }
    } else if (cr.role == RegionRole::TickValue && cr.bar_index) {
      anns_by_bar[*cr.bar_index].push_back(static_cast<int>(i));
    }
  }

  double a = 0, b = 0;
  bool have_axis = fit_axis(grid_pts, &a, &b);
  int precision = 0;
  for (const auto& cr : regs)
    if (cr.gridline) precision = std::max(precision, decimals_of(cr.region.text));

  std::vector<RecordPair> out;
  int recoverable = 0;
  for (const auto& [bar, cat_idx] : cat_by_bar) {
    RecordPair rec;
    rec.category_text = regs[cat_idx].region.text;
    rec.cat_region = cat_idx;
    rec.num = static_cast<int>(out.size()) + 1;

    auto it = anns_by_bar.find(bar);
    if (it != anns_by_bar.end()) {
      // Prefer an annotation whose text already parses; otherwise
      // estimate the value from the first one's position.
      int chosen = it->second.front();
      for (int idx : it->second) {
        if (parseable(regs[idx].region.text, nullptr)) {
          chosen = idx;
          break;
        }
      }
      const TextRegion& ann = regs[chosen].region;
      rec.val_region = chosen;
      if (parseable(ann.text, nullptr)) {
        rec.value_text = ann.text;
        ++recoverable;
      } else if (have_axis) {
        // The annotation sits one pad away from the bar end; evaluate
        // the axis fit at the bar's tip.
        double p = horizontal ? ann.x - kChartPad
                              : ann.y + kFontHeight + kChartPad;
        rec.value_text = round_to_decimals(a * p + b, precision);
        ++recoverable;
      }
    }
    out.push_back(std::move(rec));
  }

  if (recoverable < static_cast<int>(out.size()))
    throw UnpairedRegions(std::to_string(out.size()) + " categories, " +
                          std::to_string(recoverable) + " recoverable values");
  return out;
}

std::vector<RecordPair> pair_records(const ReadOutput& output) {
  if (output.regions.empty()) throw EmptyReadOutput("nothing was read from the chart");
  return pair_records(classify_roles(output));
}

SequenceResult seq_template(const ClassifyResult& classified, TemplateKind tmpl) {
  if (tmpl == TemplateKind::Concat)
    throw InputError("concat mode has no template; use seq_concat");

  int title_x = -1, title_y = -1;
  for (size_t i = 0; i < classified.regions.size(); ++i) {
    if (classified.regions[i].role == RegionRole::AxisTitleX) title_x = static_cast<int>(i);
    if (classified.regions[i].role == RegionRole::AxisTitleY) title_y = static_cast<int>(i);
  }
  bool horizontal = classified.orientation == Orientation::Horizontal;
  // The category axis is y on horizontal charts, x on vertical ones.
  int cat_title = horizontal ? title_y : title_x;
  int val_title = horizontal ? title_x : title_y;
  if (cat_title < 0 || val_title < 0 ||
      split_ws(classified.regions[cat_title].region.text).empty() ||
      split_ws(classified.regions[val_title].region.text).empty())
    throw MissingAxisTitle("template needs both axis titles");

  const std::string& cat_title_text = classified.regions[cat_title].region.text;
  const std::string& val_title_text = classified.regions[val_title].region.text;

  auto records = pair_records(classified);
  SequenceResult seq;
  for (const auto& rec : records) {
    if (rec.num > 1) emit(seq, ";", kScaffoldOrigin);
    if (tmpl == TemplateKind::Tmp1) {
      if (rec.num > 20) throw InputError("more records than spelled counters");
      emit(seq, "entry", kScaffoldOrigin);
      emit(seq, std::string(kNumberWords[rec.num - 1]) + ":", kScaffoldOrigin);
    } else if (tmpl == TemplateKind::Tmp2) {
      emit(seq, "row", kScaffoldOrigin);
      emit(seq, std::to_string(rec.num - 1) + ":", kScaffoldOrigin);
    }
    emit(seq, cat_title_text, cat_title);
    emit(seq, "is", kScaffoldOrigin);
    emit(seq, rec.category_text, rec.cat_region);
    emit(seq, tmpl == TemplateKind::Tmp3 ? "when" : ";", kScaffoldOrigin);
    emit(seq, val_title_text, val_title);
    emit(seq, "is", kScaffoldOrigin);
    emit(seq, rec.value_text, rec.val_region);
  }
  return seq;
}

SequenceResult seq_template(const ReadOutput& output, TemplateKind tmpl) {
  if (output.regions.empty()) throw EmptyReadOutput("nothing was read from the chart");
  return seq_template(classify_roles(output), tmpl);
}

}  // namespace chartfc
