#pragma once
// Canonical data types, dataset manifest persistence, split assignment, and
// the reasoning-type taxonomy.
//
// Seed format: a directory holding tables.jsonl and claims.jsonl, one JSON
// record per line. Tables: {"id", "headers": [...], "rows": [[...], ...]}.
// Claims: {"id", "text", "label", "table_id"}; label tokens are matched
// case-insensitively.
//
// Manifest format: UTF-8, line-delimited JSON. First line is a header record
// {"schema_version": N}; each following line is one sample with fields
// {id, claim, label, subtable_ref, image_path, sidecar_path, split,
//  reasoning_types[]}. Readers reject unknown schema versions and unknown
// enum tokens instead of guessing.

#include <array>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "chartfc/errors.hpp"

namespace chartfc {

enum class Label { Supports, Refutes };

// Case-insensitive; throws MalformedSeed on unknown tokens.
Label parse_label(const std::string& token);
const char* to_string(Label l);

enum class Split { Train, Valid, Test };
const char* to_string(Split s);

enum class ReasoningType {
    RetrieveValue,
    Filter,
    ComputeDerivedValue,
    FindExtremum,
    DetermineRange,
    FindAnomalies,
    Compare,
};

inline constexpr std::array<ReasoningType, 7> kAllReasoningTypes = {
    ReasoningType::RetrieveValue,   ReasoningType::Filter,
    ReasoningType::ComputeDerivedValue, ReasoningType::FindExtremum,
    ReasoningType::DetermineRange,  ReasoningType::FindAnomalies,
    ReasoningType::Compare,
};

const char* to_string(ReasoningType t);
std::optional<ReasoningType> parse_reasoning_type(const std::string& name);

struct Table {
    std::string id;
    std::vector<std::string> headers;
    std::vector<std::vector<std::string>> rows;

    // Rectangularity, header count >= 1, no empty header.
    void validate() const;
};

struct Claim {
    std::string id;
    std::string text;
    Label label = Label::Supports;
};

struct Sample {
    Claim claim;
    std::string subtable_ref;
    std::string image_path;    // relative to the dataset root
    std::string sidecar_path;  // relative to the dataset root
    Split split = Split::Train;
    std::set<ReasoningType> reasoning_types;

    bool operator==(const Sample& o) const {
        return claim.id == o.claim.id && claim.text == o.claim.text &&
               claim.label == o.claim.label && subtable_ref == o.subtable_ref &&
               image_path == o.image_path && sidecar_path == o.sidecar_path &&
               split == o.split && reasoning_types == o.reasoning_types;
    }
};

struct SeedData {
    std::vector<Table> tables;
    std::vector<std::pair<Claim, std::string>> claims;  // (claim, table id)
};

// Loads tables.jsonl + claims.jsonl from a seed directory. Every claim must
// reference an existing table id; parse is loss-free.
SeedData load_seed(const std::string& dir);

struct SplitRatio {
    int train = 8;
    int valid = 1;
    int test = 1;
};

// Assigns a split to every sample, deterministically for a given seed.
// Stratified by label by default so each split keeps the global class ratio
// within 2 percentage points.
void assign_splits(std::vector<Sample>& samples, SplitRatio ratio, uint64_t seed,
                   bool stratified = true);

inline constexpr int kManifestSchemaVersion = 1;

void write_manifest(const std::vector<Sample>& samples, const std::string& path);
std::vector<Sample> read_manifest(const std::string& path);

}  // namespace chartfc
