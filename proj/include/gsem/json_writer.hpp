#pragma once
// Canonical JSON text output: reals always as fixed 9-decimal numbers,
// keys emitted in tree insertion order, stable byte-for-byte across runs.
// Parsing stays on nlohmann; only serialization is custom.

#include <string>
#include <string_view>

#include <json.hpp>

namespace gsem {

// indent > 0: pretty-printed with that many spaces per level.
// indent < 0: single-line compact form (JSONL records).
std::string dump_canonical(const nlohmann::ordered_json& value, int indent = 2);

// Fixed 9-decimal rendering used for every real in external artifacts.
std::string format_real(double x);

// Strict parse; wraps nlohmann errors (which carry the byte position)
// into gsem::ParseError.
nlohmann::json parse_json(std::string_view text, std::string_view what);

// Best-effort extraction of a JSON value from a model reply: tries the
// raw text, then strips markdown fences, then slices from the first
// '{'/'[' to the matching last bracket. Returns std::nullopt when
// nothing parses.
std::optional<nlohmann::json> parse_json_lenient(std::string_view reply);

}  // namespace gsem
