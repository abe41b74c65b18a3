#include "doctest.h"

#include <algorithm>

#include "helpers/fixtures.hpp"

#include "chartfc/chart.hpp"
#include "chartfc/encoder.hpp"
#include "chartfc/errors.hpp"
#include "chartfc/reader.hpp"
#include "chartfc/seqgen.hpp"

using namespace chartfc;
using testutil::athlete_spec;

namespace {

ReadOutput fixture_read(Orientation o, int rows = 2) {
  const ChartArtifact art = render(athlete_spec(o, rows));
  ReadOutput out;
  out.canvas_w = art.spec.canvas_w;
  out.canvas_h = art.spec.canvas_h;
  for (const auto& r : art.layout.regions)
    out.regions.push_back({r.text, r.x, r.y, r.w, r.h});
  sort_reading_order(out.regions);
  return out;
}

Claim make_claim(const std::string& text, Label label = Label::Supports) {
  Claim c;
  c.id = "c";
  c.text = text;
  c.label = label;
  return c;
}

}  // namespace

TEST_CASE("the vocabulary reserves five special ids") {
  const Vocab v;
  CHECK(v.size() == 5);
  CHECK(v.id("[PAD]") == Vocab::kPad);
  CHECK(v.id("[UNK]") == Vocab::kUnk);
  CHECK(v.id("[CLS]") == Vocab::kCls);
  CHECK(v.id("[SEP]") == Vocab::kSep);
  CHECK(v.id(";") == Vocab::kSemi);
  CHECK(v.id("anything else") == Vocab::kUnk);
}

TEST_CASE("build_vocab sorts by frequency then alphabetically") {
  const Vocab v = build_vocab({{"b", "a", "b"}, {"c", "a", "b"}}, 1);
  CHECK(v.size() == 8);
  CHECK(v.id("b") == 5);  // 3 occurrences
  CHECK(v.id("a") == 6);  // 2 occurrences
  CHECK(v.id("c") == 7);  // 1 occurrence
}

TEST_CASE("build_vocab applies the min count and lowercases") {
  const Vocab v = build_vocab({{"Rare", "Common", "common"}}, 2);
  CHECK(v.id("common") != Vocab::kUnk);
  CHECK(v.id("rare") == Vocab::kUnk);
}

TEST_CASE("vocab json round trips and rejects corruption") {
  const Vocab v = build_vocab({{"alpha", "beta"}}, 1);
  const Vocab w = Vocab::from_json(v.to_json());
  CHECK(w.tokens == v.tokens);
  CHECK(w.id("alpha") == v.id("alpha"));
  CHECK_THROWS_AS(Vocab::from_json("{}"), InputError);
  CHECK_THROWS_AS(Vocab::from_json("{\"tokens\":[\"a\"]}"), InputError);
}

TEST_CASE("coordinate buckets stay in 1..32 and grow monotonically") {
  CHECK(quantize_coord(0, 640, kCoordBuckets) == 1);
  CHECK(quantize_coord(639.999, 640, kCoordBuckets) == kCoordBuckets);
  CHECK(quantize_coord(1000, 640, kCoordBuckets) == kCoordBuckets);  // clamped
  int prev = 0;
  for (int px = 0; px < 640; px += 16) {
    const int b = quantize_coord(px, 640, kCoordBuckets);
    CHECK(b >= prev);
    CHECK(b >= 1);
    CHECK(b <= kCoordBuckets);
    prev = b;
  }
}

TEST_CASE("encoding starts with cls claim sep and pads to max_len") {
  const ReadOutput read = fixture_read(Orientation::Horizontal);
  const SequenceResult seq = seq_template(read, TemplateKind::Tmp1);
  const Vocab vocab = build_vocab({{"usain", "bolt", "is", "ranked", "athlete", "rank"}}, 1);
  const Claim claim = make_claim("usain bolt is ranked 1", Label::Refutes);

  const EncodedInput enc = encode(claim, seq, read, vocab, 64);
  CHECK(enc.length() == 64);
  CHECK(enc.gold == Label::Refutes);
  CHECK(enc.token_ids[0] == Vocab::kCls);
  CHECK(enc.segment_ids[0] == 0);
  CHECK(enc.token_ids[6] == Vocab::kSep);  // after the five claim tokens
  for (int i = 0; i < 7; ++i) {
    CHECK(enc.segment_ids[i] == 0);
    CHECK(enc.x_bucket_ids[i] == 0);
    CHECK(enc.y_bucket_ids[i] == 0);
  }
  for (int i = 7; i < 7 + static_cast<int>(seq.tokens.size()); ++i)
    CHECK(enc.segment_ids[i] == 1);
  for (int i = 0; i < enc.length(); ++i) {
    CHECK(enc.position_ids[i] == i);
    CHECK((enc.attention_mask[i] == 0 || enc.attention_mask[i] == 1));
    if (enc.token_ids[i] == Vocab::kPad) CHECK(enc.attention_mask[i] == 0);
  }
}

TEST_CASE("chart tokens carry buckets and axis title labels") {
  const ReadOutput read = fixture_read(Orientation::Horizontal);
  const ClassifyResult roles = classify_roles(read);
  const SequenceResult seq = seq_template(roles, TemplateKind::Tmp1);
  const Vocab vocab;
  const EncodedInput enc = encode(make_claim("x"), seq, read, &roles, vocab, 80);

  bool saw_label1 = false, saw_label2 = false, saw_bucket = false;
  for (int i = 0; i < enc.length(); ++i) {
    if (enc.label_ids[i] == 1) saw_label1 = true;
    if (enc.label_ids[i] == 2) saw_label2 = true;
    if (enc.x_bucket_ids[i] > 0) {
      saw_bucket = true;
      CHECK(enc.segment_ids[i] == 1);
      CHECK(enc.x_bucket_ids[i] <= kCoordBuckets);
      CHECK(enc.y_bucket_ids[i] >= 1);
      CHECK(enc.y_bucket_ids[i] <= kCoordBuckets);
    }
  }
  CHECK(saw_label1);  // "rank" titles the value axis on a horizontal chart
  CHECK(saw_label2);  // "athlete" titles the category axis
  CHECK(saw_bucket);
}

TEST_CASE("scaffold tokens carry no geometry") {
  const ReadOutput read = fixture_read(Orientation::Horizontal);
  const SequenceResult seq = seq_template(read, TemplateKind::Tmp1);
  const Vocab vocab;
  const EncodedInput enc = encode(make_claim("x"), seq, read, vocab, 80);
  // 3 = cls + "x" + sep; chart tokens start after
  for (size_t j = 0; j < seq.tokens.size(); ++j) {
    const int i = 3 + static_cast<int>(j);
    if (seq.alignment[j] == kScaffoldOrigin) {
      CHECK(enc.x_bucket_ids[i] == 0);
      CHECK(enc.y_bucket_ids[i] == 0);
      CHECK(enc.label_ids[i] == 0);
    }
  }
}

TEST_CASE("long chart sequences truncate, long claims do not") {
  const ReadOutput read = fixture_read(Orientation::Horizontal, 5);
  const SequenceResult seq = seq_template(read, TemplateKind::Tmp1);
  const Vocab vocab;

  const EncodedInput enc = encode(make_claim("a short claim"), seq, read, vocab, 16);
  CHECK(enc.length() == 16);

  std::string long_claim;
  for (int i = 0; i < 20; ++i) long_claim += "word ";
  CHECK_THROWS_AS(encode(make_claim(long_claim), seq, read, vocab, 16), ClaimTooLong);
}

TEST_CASE("an empty sequence encodes the claim alone") {
  const SequenceResult empty_seq;
  const ReadOutput empty_read;
  const Vocab vocab = build_vocab({{"only", "claim", "words"}}, 1);
  const EncodedInput enc =
      encode(make_claim("only claim words"), empty_seq, empty_read, vocab, 12);
  CHECK(enc.length() == 12);
  CHECK(enc.token_ids[0] == Vocab::kCls);
  CHECK(enc.token_ids[4] == Vocab::kSep);
  for (int i = 5; i < 12; ++i) CHECK(enc.token_ids[i] == Vocab::kPad);
  CHECK(std::count(enc.segment_ids.begin(), enc.segment_ids.end(), 1) == 0);
}

TEST_CASE("a broken alignment is a shape mismatch") {
  const ReadOutput read = fixture_read(Orientation::Horizontal);
  SequenceResult seq = seq_template(read, TemplateKind::Tmp1);
  seq.alignment.pop_back();
  const Vocab vocab;
  CHECK_THROWS_AS(encode(make_claim("x"), seq, read, vocab, 64), ShapeMismatch);
  seq.alignment.push_back(10000);
  CHECK_THROWS_AS(encode(make_claim("x"), seq, read, vocab, 64), ShapeMismatch);
}
