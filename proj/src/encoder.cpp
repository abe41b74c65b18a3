#include "chartfc/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"

#include "chartfc/errors.hpp"
#include "chartfc/text.hpp"

namespace chartfc {
namespace {

using nlohmann::json;

std::string lower(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c += 32;
  return out;
}

}  // namespace

Vocab::Vocab() : tokens{"[PAD]", "[UNK]", "[CLS]", "[SEP]", ";"} {
  for (int i = 0; i < static_cast<int>(tokens.size()); ++i) ids[tokens[i]] = i;
}

int Vocab::id(const std::string& token) const {
  auto it = ids.find(token);
  return it == ids.end() ? kUnk : it->second;
}

std::string Vocab::to_json() const {
  json doc = {{"schema_version", 1}, {"tokens", tokens}};
  return doc.dump();
}

Vocab Vocab::from_json(const std::string& text) {
  try {
    json doc = json::parse(text);
    auto toks = doc.at("tokens").get<std::vector<std::string>>();
    Vocab v;
    if (toks.size() < v.tokens.size() ||
        !std::equal(v.tokens.begin(), v.tokens.end(), toks.begin()))
      throw InputError("vocab file does not start with the reserved tokens");
    for (size_t i = v.tokens.size(); i < toks.size(); ++i) {
      if (v.ids.count(toks[i])) throw InputError("vocab file has duplicate tokens");
      v.ids[toks[i]] = static_cast<int>(i);
      v.tokens.push_back(toks[i]);
    }
    return v;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed vocab file: ") + e.what());
  }
}

Vocab build_vocab(const std::vector<std::vector<std::string>>& corpus, int min_count) {
  Vocab v;
  std::map<std::string, long long> counts;
  for (const auto& seq : corpus)
    for (const auto& tok : seq) {
      std::string t = lower(tok);
      if (!v.ids.count(t)) ++counts[t];
    }
  std::vector<std::pair<std::string, long long>> order(counts.begin(), counts.end());
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [tok, count] : order) {
    if (count < min_count) continue;
    v.ids[tok] = static_cast<int>(v.tokens.size());
    v.tokens.push_back(tok);
  }
  return v;
}

int quantize_coord(double pixel, double extent, int buckets) {
  double frac = pixel / extent;
  frac = std::clamp(frac, 0.0, 1.0 - 1e-9);
  return 1 + static_cast<int>(std::floor(frac * buckets));
}

EncodedInput encode(const Claim& claim, const SequenceResult& seq, const ReadOutput& read,
                    const Vocab& vocab, int max_len) {
  return encode(claim, seq, read, nullptr, vocab, max_len);
}

EncodedInput encode(const Claim& claim, const SequenceResult& seq, const ReadOutput& read,
                    const ClassifyResult* roles, const Vocab& vocab, int max_len) {
  if (seq.tokens.size() != seq.alignment.size())
    throw ShapeMismatch("sequence alignment does not cover its tokens");
  for (int origin : seq.alignment) {
    if (origin != kScaffoldOrigin &&
        (origin < 0 || origin >= static_cast<int>(read.regions.size())))
      throw ShapeMismatch("sequence alignment points outside the read output");
  }

  std::vector<std::string> claim_tokens = tokenize_lemmatize(claim.text).tokens;
  int claim_len = static_cast<int>(claim_tokens.size());
  if (claim_len > max_len - 3)
    throw ClaimTooLong("claim has " + std::to_string(claim_len) + " tokens, limit " +
                       std::to_string(max_len - 3));

  int chart_total = static_cast<int>(seq.tokens.size());
  int chart_keep = std::min(chart_total, max_len - claim_len - 3);

  ClassifyResult local_roles;
  const ClassifyResult* cls = roles;
  bool need_roles = false;
  for (int j = 0; j < chart_keep; ++j)
    if (seq.alignment[j] != kScaffoldOrigin) need_roles = true;
  if (need_roles && !cls) {
    local_roles = classify_roles(read);
    cls = &local_roles;
  }

  EncodedInput enc;
  enc.gold = claim.label;
  auto push = [&enc](int tok, int seg, int xb, int yb, int lab, int mask) {
    enc.token_ids.push_back(tok);
    enc.segment_ids.push_back(seg);
    enc.position_ids.push_back(static_cast<int>(enc.position_ids.size()));
    enc.x_bucket_ids.push_back(xb);
    enc.y_bucket_ids.push_back(yb);
    enc.label_ids.push_back(lab);
    enc.attention_mask.push_back(mask);
  };

  push(Vocab::kCls, 0, 0, 0, 0, 1);
  for (const auto& tok : claim_tokens) push(vocab.id(lower(tok)), 0, 0, 0, 0, 1);
  push(Vocab::kSep, 0, 0, 0, 0, 1);

  for (int j = 0; j < chart_keep; ++j) {
    int tok_id = vocab.id(lower(seq.tokens[j]));
    int origin = seq.alignment[j];
    int xb = 0, yb = 0, lab = 0;
    if (origin != kScaffoldOrigin) {
      const ClassifiedRegion& cr = cls->regions[origin];
      xb = quantize_coord(cr.region.x_center(), read.canvas_w, kCoordBuckets);
      yb = quantize_coord(cr.region.y_center(), read.canvas_h, kCoordBuckets);
      if (cr.role == RegionRole::AxisTitleX) lab = 1;
      if (cr.role == RegionRole::AxisTitleY) lab = 2;
    }
    push(tok_id, 1, xb, yb, lab, 1);
  }
  if (chart_keep > 0) push(Vocab::kSep, 1, 0, 0, 0, 1);

  while (enc.length() < max_len) push(Vocab::kPad, 0, 0, 0, 0, 0);
  return enc;
}

}  // namespace chartfc
