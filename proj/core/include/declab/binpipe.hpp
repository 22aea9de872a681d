#pragma once

#include "declab/corpus.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace declab::binpipe {

// External tool paths plus the scratch area compiles run in. Paths are
// checked for existence up front; environment variables DECLAB_DART_COMPILER,
// DECLAB_SWIFT_COMPILER and DECLAB_DISASSEMBLER override their respective
// entries.
struct ToolchainConfig {
    std::filesystem::path dart_compiler;
    std::filesystem::path swift_compiler;
    std::filesystem::path disassembler;
    std::filesystem::path scratch_root;
    double timeout_secs = 60.0;

    // Applies env overrides, resolves each tool against PATH, verifies the
    // scratch root is creatable and timeout positive.
    static ToolchainConfig validated(ToolchainConfig raw);
};

struct BinaryArtifact {
    std::filesystem::path path;
    corpus::Language language = corpus::Language::dart;
    corpus::Optimization optimization = corpus::Optimization::aot_default;
    std::string compiler_diagnostics;
};

struct AssemblyFunction {
    std::string symbol;
    std::string body; // normalized listing
    std::size_t byte_length = 0;
};

// Annotates every top-level Dart function with the entry-point pragma so
// ahead-of-time tree shaking cannot drop it, and appends a minimal entry
// function when the unit has none. Throws Error(data) with parser
// diagnostics when the source does not parse.
std::string prepare_dart_unit(std::string_view source);

// Compiles one unit in a fresh scratch subdirectory derived from unit_id.
// Dart uses the AOT snapshot pipeline at default optimization; Swift is
// compiled to an object file with optimization disabled. The scratch
// directory is removed on success and retained for inspection on failure.
// Throws Error(external_tool) on compiler failure or timeout, message
// prefixed with the failing stage.
BinaryArtifact compile_source(std::string_view source, corpus::Language language,
                              const ToolchainConfig& cfg, std::string_view unit_id);

// Full-listing disassembly (Intel syntax requested from the external tool).
std::string disassemble(const BinaryArtifact& artifact, const ToolchainConfig& cfg);

// Strips addresses and encoding columns, rewrites in-listing jump targets
// to .L<n> labels in order of first appearance, and keeps symbol labels.
// Idempotent.
std::string normalize_listing(std::string_view listing);

// Function labels present in a normalized listing, in listing order.
std::vector<std::string> list_symbols(std::string_view normalized);

// Cuts the half-open region from `symbol`'s label to the next function
// label (or end of listing). Throws Error(data) when the symbol is absent
// or the region is empty.
AssemblyFunction extract_function(std::string_view listing, std::string_view symbol);

// compile -> disassemble -> extract -> record; stage failures carry the
// stage name. The result satisfies every FunctionRecord invariant.
corpus::FunctionRecord build_pair(std::string_view source, std::string_view symbol,
                                  corpus::Language language,
                                  corpus::Provenance provenance,
                                  const ToolchainConfig& cfg, std::string_view id,
                                  std::string_view origin, corpus::Split split);

} // namespace declab::binpipe
