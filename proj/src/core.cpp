#include "chartfc/core.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "chartfc/image.hpp"
#include "chartfc/rng.hpp"

using nlohmann::json;

namespace chartfc {

const char* to_string(RejectReason r) {
    switch (r) {
        case RejectReason::TooManyColumns: return "too_many_columns";
        case RejectReason::TooManyRows: return "too_many_rows";
        case RejectReason::NonNumeric: return "non_numeric";
        case RejectReason::Underlinked: return "underlinked";
    }
    return "unknown";
}

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

json parse_json_line(const std::string& line, const std::string& context) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw MalformedSeed("invalid JSON record in " + context);
    return j;
}

}  // namespace

Label parse_label(const std::string& token) {
    std::string t = lower(token);
    if (t == "supports") return Label::Supports;
    if (t == "refutes") return Label::Refutes;
    throw MalformedSeed("unknown label token: " + token);
}

const char* to_string(Label l) {
    return l == Label::Supports ? "supports" : "refutes";
}

const char* to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Valid: return "valid";
        case Split::Test: return "test";
    }
    return "unknown";
}

const char* to_string(ReasoningType t) {
    switch (t) {
        case ReasoningType::RetrieveValue: return "retrieve_value";
        case ReasoningType::Filter: return "filter";
        case ReasoningType::ComputeDerivedValue: return "compute_derived_value";
        case ReasoningType::FindExtremum: return "find_extremum";
        case ReasoningType::DetermineRange: return "determine_range";
        case ReasoningType::FindAnomalies: return "find_anomalies";
        case ReasoningType::Compare: return "compare";
    }
    return "unknown";
}

std::optional<ReasoningType> parse_reasoning_type(const std::string& name) {
    for (ReasoningType t : kAllReasoningTypes)
        if (name == to_string(t)) return t;
    return std::nullopt;
}

void Table::validate() const {
    if (headers.empty()) throw MalformedSeed("table " + id + ": no headers");
    for (const auto& h : headers)
        if (h.empty()) throw MalformedSeed("table " + id + ": empty header");
    for (const auto& row : rows)
        if (row.size() != headers.size())
            throw MalformedSeed("table " + id + ": row length mismatch");
}

SeedData load_seed(const std::string& dir) {
    SeedData out;
    std::map<std::string, size_t> table_index;

    {
        std::ifstream in(dir + "/tables.jsonl");
        if (!in) throw MalformedSeed("missing tables file: " + dir + "/tables.jsonl");
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json j = parse_json_line(line, "tables.jsonl");
            Table t;
            try {
                t.id = j.at("id").get<std::string>();
                t.headers = j.at("headers").get<std::vector<std::string>>();
                t.rows = j.at("rows").get<std::vector<std::vector<std::string>>>();
            } catch (const json::exception& e) {
                throw MalformedSeed(std::string("bad table record: ") + e.what());
            }
            t.validate();
            if (table_index.count(t.id))
                throw MalformedSeed("duplicate table id: " + t.id);
            table_index[t.id] = out.tables.size();
            out.tables.push_back(std::move(t));
        }
    }

    {
        std::ifstream in(dir + "/claims.jsonl");
        if (!in) throw MalformedSeed("missing claims file: " + dir + "/claims.jsonl");
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json j = parse_json_line(line, "claims.jsonl");
            Claim c;
            std::string table_id;
            try {
                c.id = j.at("id").get<std::string>();
                c.text = j.at("text").get<std::string>();
                c.label = parse_label(j.at("label").get<std::string>());
                table_id = j.at("table_id").get<std::string>();
            } catch (const json::exception& e) {
                throw MalformedSeed(std::string("bad claim record: ") + e.what());
            }
            if (c.text.empty()) throw MalformedSeed("claim " + c.id + ": empty text");
            if (!table_index.count(table_id))
                throw MalformedSeed("claim " + c.id + " references unknown table id: " +
                                    table_id);
            out.claims.emplace_back(std::move(c), std::move(table_id));
        }
    }
    return out;
}

namespace {

// Largest-remainder allocation of n items to the three splits.
std::array<size_t, 3> split_counts(size_t n, SplitRatio ratio) {
    double total = ratio.train + ratio.valid + ratio.test;
    std::array<double, 3> exact = {n * ratio.train / total, n * ratio.valid / total,
                                   n * ratio.test / total};
    std::array<size_t, 3> counts;
    std::array<std::pair<double, int>, 3> rem;
    size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        counts[i] = static_cast<size_t>(exact[i]);
        rem[i] = {exact[i] - counts[i], i};
        assigned += counts[i];
    }
    std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (size_t k = 0; assigned < n; ++k, ++assigned) counts[rem[k % 3].second]++;
    return counts;
}

void assign_group(std::vector<Sample*>& group, SplitRatio ratio, Rng& rng) {
    rng.shuffle(group);
    auto counts = split_counts(group.size(), ratio);
    size_t i = 0;
    for (size_t k = 0; k < counts[0]; ++k) group[i++]->split = Split::Train;
    for (size_t k = 0; k < counts[1]; ++k) group[i++]->split = Split::Valid;
    for (size_t k = 0; k < counts[2]; ++k) group[i++]->split = Split::Test;
}

}  // namespace

void assign_splits(std::vector<Sample>& samples, SplitRatio ratio, uint64_t seed,
                   bool stratified) {
    if (samples.empty()) throw InputError("assign_splits: no samples");
    if (ratio.train <= 0 || ratio.valid <= 0 || ratio.test <= 0)
        throw InputError("assign_splits: ratio parts must be positive");

    if (stratified) {
        std::vector<Sample*> supports, refutes;
        for (auto& s : samples)
            (s.claim.label == Label::Supports ? supports : refutes).push_back(&s);
        Rng rng_s(mix_seed(seed, 1));
        Rng rng_r(mix_seed(seed, 2));
        if (!supports.empty()) assign_group(supports, ratio, rng_s);
        if (!refutes.empty()) assign_group(refutes, ratio, rng_r);
    } else {
        std::vector<Sample*> all;
        for (auto& s : samples) all.push_back(&s);
        Rng rng(mix_seed(seed, 0));
        assign_group(all, ratio, rng);
    }
}

namespace {

json sample_to_json(const Sample& s) {
    json types = json::array();
    for (ReasoningType t : s.reasoning_types) types.push_back(to_string(t));
    return json{{"id", s.claim.id},
                {"claim", s.claim.text},
                {"label", to_string(s.claim.label)},
                {"subtable_ref", s.subtable_ref},
                {"image_path", s.image_path},
                {"sidecar_path", s.sidecar_path},
                {"split", to_string(s.split)},
                {"reasoning_types", types}};
}

Sample sample_from_json(const json& j) {
    Sample s;
    try {
        s.claim.id = j.at("id").get<std::string>();
        s.claim.text = j.at("claim").get<std::string>();
        std::string label = j.at("label").get<std::string>();
        if (label == "supports")
            s.claim.label = Label::Supports;
        else if (label == "refutes")
            s.claim.label = Label::Refutes;
        else
            throw SchemaVersionMismatch("unknown label token: " + label);
        s.subtable_ref = j.at("subtable_ref").get<std::string>();
        s.image_path = j.at("image_path").get<std::string>();
        s.sidecar_path = j.at("sidecar_path").get<std::string>();
        std::string split = j.at("split").get<std::string>();
        if (split == "train")
            s.split = Split::Train;
        else if (split == "valid")
            s.split = Split::Valid;
        else if (split == "test")
            s.split = Split::Test;
        else
            throw SchemaVersionMismatch("unknown split token: " + split);
        for (const auto& name : j.at("reasoning_types")) {
            auto t = parse_reasoning_type(name.get<std::string>());
            if (!t) throw SchemaVersionMismatch("unknown reasoning type: " +
                                                name.get<std::string>());
            s.reasoning_types.insert(*t);
        }
    } catch (const json::exception& e) {
        throw SchemaVersionMismatch(std::string("bad manifest record: ") + e.what());
    }
    return s;
}

}  // namespace

void write_manifest(const std::vector<Sample>& samples, const std::string& path) {
    std::ostringstream out;
    out << json{{"schema_version", kManifestSchemaVersion}}.dump() << "\n";
    for (const Sample& s : samples) out << sample_to_json(s).dump() << "\n";
    write_file_text(path, out.str());
}

std::vector<Sample> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open manifest: " + path);
    std::string line;
    if (!std::getline(in, line)) throw SchemaVersionMismatch("empty manifest: " + path);
    json header = json::parse(line, nullptr, false);
    if (header.is_discarded() || !header.is_object() || !header.contains("schema_version"))
        throw SchemaVersionMismatch("manifest missing schema header");
    if (header["schema_version"] != kManifestSchemaVersion)
        throw SchemaVersionMismatch("unsupported manifest schema version");
    std::vector<Sample> samples;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw SchemaVersionMismatch("invalid manifest record");
        samples.push_back(sample_from_json(j));
    }
    return samples;
}

}  // namespace chartfc
