#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace declab::corpus {

enum class Language { dart, swift };
enum class Provenance { natural, synthetic };
enum class Optimization { aot_default, o0 };
enum class Split { train, test, test_natural };

std::string to_string(Language v);
std::string to_string(Provenance v);
std::string to_string(Optimization v);
std::string to_string(Split v);
Language language_from_string(std::string_view s);
Provenance provenance_from_string(std::string_view s);
Optimization optimization_from_string(std::string_view s);
Split split_from_string(std::string_view s);

// One assembly<->source pair. `reasoning` holds an optional chain-of-thought
// trace and is only legal on synthetic records.
struct FunctionRecord {
    std::string id;
    Language language = Language::dart;
    std::string source;
    std::string assembly;
    Provenance provenance = Provenance::natural;
    std::string origin;
    Optimization optimization = Optimization::aot_default;
    std::optional<std::string> reasoning;
    Split split = Split::train;

    bool operator==(const FunctionRecord&) const = default;
};

struct CompositionKey {
    Language language;
    Provenance provenance;
    Split split;

    auto operator<=>(const CompositionKey&) const = default;
};

// Manifest key rendered as "language/provenance/split" on disk.
std::string to_string(const CompositionKey& key);
CompositionKey composition_key_from_string(std::string_view s);

struct Corpus {
    std::vector<FunctionRecord> records;
    std::map<CompositionKey, std::int64_t> manifest;
};

struct CompositionSummary {
    std::map<CompositionKey, std::int64_t> counts;
    std::map<Split, std::int64_t> split_totals;
    std::int64_t total = 0;
};

using ValidationReport = std::vector<std::string>;

// Line-delimited JSON, manifest object first, one record object per line,
// canonical field order, unknown fields rejected. Throws Error(data) with
// the offending line number and field name.
Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::string_view text, std::string_view origin_label = "<memory>");

void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
std::string serialize_corpus(const Corpus& corpus);

// Violations are data, not failures: each broken FunctionRecord invariant
// appears exactly once in the report; an empty report means valid.
ValidationReport validate_record(const FunctionRecord& record);

// Per-record violations (prefixed with the record id) plus manifest
// consistency checks.
ValidationReport validate_corpus(const Corpus& corpus);

CompositionSummary summarize_composition(const Corpus& corpus);

// Recomputes the manifest from the actual records.
std::map<CompositionKey, std::int64_t> tally_records(const Corpus& corpus);

} // namespace declab::corpus
