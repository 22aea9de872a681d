#include "declab/corpus.hpp"

#include "declab/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <unordered_map>

namespace declab::corpus {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kRecordFields[] = {
    "id",       "language",     "source",    "assembly", "provenance",
    "origin",   "optimization", "reasoning", "split",
};

[[noreturn]] void line_error(std::string_view origin, std::size_t line_no,
                             std::string_view what) {
    std::ostringstream os;
    os << origin << ":" << line_no << ": " << what;
    throw data_error(os.str());
}

std::string require_string(const ordered_json& obj, const char* field,
                           std::string_view origin, std::size_t line_no) {
    auto it = obj.find(field);
    if (it == obj.end()) {
        line_error(origin, line_no, std::string("missing field '") + field + "'");
    }
    if (!it->is_string()) {
        line_error(origin, line_no, std::string("field '") + field + "' must be a string");
    }
    return it->get<std::string>();
}

FunctionRecord parse_record_line(const ordered_json& obj, std::string_view origin,
                                 std::size_t line_no) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* f : kRecordFields) {
            if (it.key() == f) {
                known = true;
                break;
            }
        }
        if (!known) {
            line_error(origin, line_no, "unknown field '" + it.key() + "'");
        }
    }

    FunctionRecord rec;
    rec.id = require_string(obj, "id", origin, line_no);
    try {
        rec.language = language_from_string(require_string(obj, "language", origin, line_no));
        rec.provenance =
            provenance_from_string(require_string(obj, "provenance", origin, line_no));
        rec.optimization =
            optimization_from_string(require_string(obj, "optimization", origin, line_no));
        rec.split = split_from_string(require_string(obj, "split", origin, line_no));
    } catch (const Error& e) {
        line_error(origin, line_no, e.what());
    }
    rec.source = require_string(obj, "source", origin, line_no);
    rec.assembly = require_string(obj, "assembly", origin, line_no);
    rec.origin = require_string(obj, "origin", origin, line_no);

    auto reasoning = obj.find("reasoning");
    if (reasoning == obj.end()) {
        line_error(origin, line_no, "missing field 'reasoning'");
    }
    if (reasoning->is_null()) {
        rec.reasoning = std::nullopt;
    } else if (reasoning->is_string()) {
        rec.reasoning = reasoning->get<std::string>();
    } else {
        line_error(origin, line_no, "field 'reasoning' must be a string or null");
    }
    return rec;
}

ordered_json record_to_json(const FunctionRecord& rec) {
    ordered_json obj;
    obj["id"] = rec.id;
    obj["language"] = to_string(rec.language);
    obj["source"] = rec.source;
    obj["assembly"] = rec.assembly;
    obj["provenance"] = to_string(rec.provenance);
    obj["origin"] = rec.origin;
    obj["optimization"] = to_string(rec.optimization);
    if (rec.reasoning) {
        obj["reasoning"] = *rec.reasoning;
    } else {
        obj["reasoning"] = nullptr;
    }
    obj["split"] = to_string(rec.split);
    return obj;
}

} // namespace

std::string to_string(Language v) {
    return v == Language::dart ? "dart" : "swift";
}

std::string to_string(Provenance v) {
    return v == Provenance::natural ? "natural" : "synthetic";
}

std::string to_string(Optimization v) {
    return v == Optimization::aot_default ? "aot-default" : "O0";
}

std::string to_string(Split v) {
    switch (v) {
    case Split::train:
        return "train";
    case Split::test:
        return "test";
    case Split::test_natural:
        return "test-natural";
    }
    return "train";
}

Language language_from_string(std::string_view s) {
    if (s == "dart") return Language::dart;
    if (s == "swift") return Language::swift;
    throw data_error("unknown language '" + std::string(s) + "'");
}

Provenance provenance_from_string(std::string_view s) {
    if (s == "natural") return Provenance::natural;
    if (s == "synthetic") return Provenance::synthetic;
    throw data_error("unknown provenance '" + std::string(s) + "'");
}

Optimization optimization_from_string(std::string_view s) {
    if (s == "aot-default") return Optimization::aot_default;
    if (s == "O0") return Optimization::o0;
    throw data_error("unknown optimization '" + std::string(s) + "'");
}

Split split_from_string(std::string_view s) {
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    if (s == "test-natural") return Split::test_natural;
    throw data_error("unknown split '" + std::string(s) + "'");
}

std::string to_string(const CompositionKey& key) {
    return to_string(key.language) + "/" + to_string(key.provenance) + "/" +
           to_string(key.split);
}

CompositionKey composition_key_from_string(std::string_view s) {
    const auto first = s.find('/');
    const auto second = s.find('/', first == std::string_view::npos ? 0 : first + 1);
    if (first == std::string_view::npos || second == std::string_view::npos) {
        throw data_error("malformed manifest key '" + std::string(s) +
                         "', expected language/provenance/split");
    }
    CompositionKey key;
    key.language = language_from_string(s.substr(0, first));
    key.provenance = provenance_from_string(s.substr(first + 1, second - first - 1));
    key.split = split_from_string(s.substr(second + 1));
    return key;
}

Corpus parse_corpus(std::string_view text, std::string_view origin_label) {
    Corpus corpus;
    if (text.empty()) {
        return corpus;
    }

    std::unordered_map<std::string, std::size_t> seen_ids;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool manifest_seen = false;

    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = (eol == std::string_view::npos)
                                    ? text.substr(pos)
                                    : text.substr(pos, eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++line_no;
        if (line.empty()) {
            continue;
        }

        ordered_json obj = ordered_json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            line_error(origin_label, line_no, "line is not a JSON object");
        }

        if (!manifest_seen) {
            auto type = obj.find("type");
            if (type == obj.end() || !type->is_string() ||
                type->get<std::string>() != "manifest") {
                line_error(origin_label, line_no,
                           "first line must be a manifest object with type=\"manifest\"");
            }
            auto counts = obj.find("counts");
            if (counts == obj.end() || !counts->is_object()) {
                line_error(origin_label, line_no, "manifest missing 'counts' object");
            }
            for (auto it = counts->begin(); it != counts->end(); ++it) {
                if (!it.value().is_number_integer() || it.value().get<std::int64_t>() < 0) {
                    line_error(origin_label, line_no,
                               "manifest count for '" + it.key() +
                                   "' must be a non-negative integer");
                }
                CompositionKey key;
                try {
                    key = composition_key_from_string(it.key());
                } catch (const Error& e) {
                    line_error(origin_label, line_no, e.what());
                }
                corpus.manifest[key] = it.value().get<std::int64_t>();
            }
            manifest_seen = true;
            continue;
        }

        FunctionRecord rec = parse_record_line(obj, origin_label, line_no);
        auto [it, inserted] = seen_ids.emplace(rec.id, line_no);
        if (!inserted) {
            std::ostringstream os;
            os << origin_label << ":" << line_no << ": duplicate id '" << rec.id
               << "' (first occurrence at line " << it->second << ")";
            throw data_error(os.str());
        }
        corpus.records.push_back(std::move(rec));
    }
    return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw data_error("cannot open corpus file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_corpus(buf.str(), path.string());
}

std::string serialize_corpus(const Corpus& corpus) {
    std::string out;
    ordered_json manifest;
    manifest["type"] = "manifest";
    ordered_json counts = ordered_json::object();
    // std::map ordering keeps the manifest byte-stable across round trips.
    for (const auto& [key, count] : corpus.manifest) {
        counts[to_string(key)] = count;
    }
    manifest["counts"] = counts;
    out += manifest.dump();
    out += '\n';
    for (const auto& rec : corpus.records) {
        out += record_to_json(rec).dump();
        out += '\n';
    }
    return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw data_error("cannot write corpus file " + path.string());
    }
    out << serialize_corpus(corpus);
}

ValidationReport validate_record(const FunctionRecord& record) {
    ValidationReport report;
    if (record.id.empty()) {
        report.push_back("id must be non-empty");
    }
    if (record.source.empty()) {
        report.push_back("source must be non-empty");
    }
    if (record.assembly.empty()) {
        report.push_back("assembly must be non-empty");
    }
    if (record.language == Language::dart &&
        record.optimization != Optimization::aot_default) {
        report.push_back("language=dart requires optimization=aot-default");
    }
    if (record.language == Language::swift && record.optimization != Optimization::o0) {
        report.push_back("language=swift requires optimization=O0");
    }
    if (record.reasoning && !record.reasoning->empty() &&
        record.provenance != Provenance::synthetic) {
        report.push_back("reasoning trace is only allowed on synthetic records");
    }
    return report;
}

ValidationReport validate_corpus(const Corpus& corpus) {
    ValidationReport report;
    for (const auto& rec : corpus.records) {
        for (auto& violation : validate_record(rec)) {
            report.push_back("record '" + rec.id + "': " + violation);
        }
    }
    const auto actual = tally_records(corpus);
    for (const auto& [key, declared] : corpus.manifest) {
        auto it = actual.find(key);
        const std::int64_t have = (it == actual.end()) ? 0 : it->second;
        if (have != declared) {
            std::ostringstream os;
            os << "manifest declares " << declared << " records for " << to_string(key)
               << " but corpus contains " << have;
            report.push_back(os.str());
        }
    }
    for (const auto& [key, have] : actual) {
        if (!corpus.manifest.contains(key)) {
            std::ostringstream os;
            os << "corpus contains " << have << " records for " << to_string(key)
               << " not declared in the manifest";
            report.push_back(os.str());
        }
    }
    return report;
}

std::map<CompositionKey, std::int64_t> tally_records(const Corpus& corpus) {
    std::map<CompositionKey, std::int64_t> counts;
    for (const auto& rec : corpus.records) {
        ++counts[CompositionKey{rec.language, rec.provenance, rec.split}];
    }
    return counts;
}

CompositionSummary summarize_composition(const Corpus& corpus) {
    CompositionSummary summary;
    summary.counts = tally_records(corpus);
    for (const auto& [key, count] : summary.counts) {
        summary.split_totals[key.split] += count;
        summary.total += count;
    }
    return summary;
}

} // namespace declab::corpus
