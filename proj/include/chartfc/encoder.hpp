#pragma once
// Builds fixed-length model inputs: token/segment/position ids plus the
// structural ids (coordinate buckets and axis-title marks) that tell the
// model where each chart token sat on the canvas.

#include <string>
#include <unordered_map>
#include <vector>

#include "chartfc/core.hpp"
#include "chartfc/reader.hpp"
#include "chartfc/seqgen.hpp"

namespace chartfc {

// Coordinate buckets per axis; bucket id 0 means "not from the chart",
// so the embedding tables hold kCoordBuckets+1 rows.
inline constexpr int kCoordBuckets = 32;

struct Vocab {
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;
  static constexpr int kSemi = 4;

  std::vector<std::string> tokens;  // id -> token, reserved entries first
  std::unordered_map<std::string, int> ids;

  Vocab();
  int id(const std::string& token) const;  // [UNK] when absent
  int size() const { return static_cast<int>(tokens.size()); }

  std::string to_json() const;
  static Vocab from_json(const std::string& text);
};

// Deterministic: tokens with count >= min_count, most frequent first,
// ties broken lexicographically. ";" stays on its reserved id.
Vocab build_vocab(const std::vector<std::vector<std::string>>& corpus, int min_count);

// Bucket ids 1..buckets over [0, extent); out-of-range pixels clamp.
int quantize_coord(double pixel, double extent, int buckets);

struct EncodedInput {
  std::vector<int> token_ids;
  std::vector<int> segment_ids;   // 0 claim side, 1 chart side
  std::vector<int> position_ids;  // 0..max_len-1
  std::vector<int> x_bucket_ids;  // 0 for claim/scaffold/pad tokens
  std::vector<int> y_bucket_ids;
  std::vector<int> label_ids;     // 1 x-axis title, 2 y-axis title, else 0
  std::vector<int> attention_mask;
  Label gold = Label::Supports;

  int length() const { return static_cast<int>(token_ids.size()); }
  bool operator==(const EncodedInput&) const = default;
};

// Lays out [CLS] claim [SEP] chart-sequence [SEP] padded to max_len.
// Chart tokens inherit their region's center buckets through the
// sequence alignment; axis-title tokens get label ids. When the input
// overflows, the chart tail is dropped first; a claim that cannot fit
// even alone raises ClaimTooLong. Pass roles when the caller already
// classified the read output; otherwise it is classified on demand.
EncodedInput encode(const Claim& claim, const SequenceResult& seq, const ReadOutput& read,
                    const Vocab& vocab, int max_len);
EncodedInput encode(const Claim& claim, const SequenceResult& seq, const ReadOutput& read,
                    const ClassifyResult* roles, const Vocab& vocab, int max_len);

}  // namespace chartfc
