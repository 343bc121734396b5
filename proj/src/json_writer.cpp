#include "gsem/json_writer.hpp"

#include <cmath>
#include <cstdio>

#include "gsem/error.hpp"

namespace gsem {

std::string format_real(double x) {
    if (!std::isfinite(x)) throw ValidationError("cannot serialize non-finite real");
    if (x == 0.0) x = 0.0;  // fold -0 into 0
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9f", x);
    return buf;
}

namespace {

void escape_string(const std::string& s, std::string& out) {
    out.push_back('"');
    for (unsigned char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (c < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out.push_back(static_cast<char>(c));
                }
        }
    }
    out.push_back('"');
}

void dump_value(const nlohmann::ordered_json& v, int indent, int depth, std::string& out) {
    const bool pretty = indent > 0;
    auto newline_pad = [&](int d) {
        if (pretty) {
            out.push_back('\n');
            out.append(static_cast<std::size_t>(indent) * d, ' ');
        }
    };
    switch (v.type()) {
        case nlohmann::ordered_json::value_t::null:
            out += "null";
            break;
        case nlohmann::ordered_json::value_t::boolean:
            out += v.get<bool>() ? "true" : "false";
            break;
        case nlohmann::ordered_json::value_t::number_integer:
            out += std::to_string(v.get<std::int64_t>());
            break;
        case nlohmann::ordered_json::value_t::number_unsigned:
            out += std::to_string(v.get<std::uint64_t>());
            break;
        case nlohmann::ordered_json::value_t::number_float:
            out += format_real(v.get<double>());
            break;
        case nlohmann::ordered_json::value_t::string:
            escape_string(v.get<std::string>(), out);
            break;
        case nlohmann::ordered_json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                break;
            }
            out.push_back('[');
            bool first = true;
            for (const auto& item : v) {
                if (!first) out.push_back(',');
                first = false;
                newline_pad(depth + 1);
                dump_value(item, indent, depth + 1, out);
            }
            newline_pad(depth);
            out.push_back(']');
            break;
        }
        case nlohmann::ordered_json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                break;
            }
            out.push_back('{');
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) out.push_back(',');
                first = false;
                newline_pad(depth + 1);
                escape_string(it.key(), out);
                out += pretty ? ": " : ":";
                dump_value(it.value(), indent, depth + 1, out);
            }
            newline_pad(depth);
            out.push_back('}');
            break;
        }
        default:
            throw ValidationError("unsupported JSON value type");
    }
}

}  // namespace

std::string dump_canonical(const nlohmann::ordered_json& value, int indent) {
    std::string out;
    dump_value(value, indent, 0, out);
    return out;
}

nlohmann::json parse_json(std::string_view text, std::string_view what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

std::optional<nlohmann::json> parse_json_lenient(std::string_view reply) {
    auto try_parse = [](std::string_view s) -> std::optional<nlohmann::json> {
        if (s.empty()) return std::nullopt;
        auto parsed = nlohmann::json::parse(s, nullptr, /*allow_exceptions=*/false);
        if (parsed.is_discarded()) return std::nullopt;
        return parsed;
    };

    if (auto direct = try_parse(reply)) return direct;

    // Markdown fences: keep only the content between the first pair of ```.
    std::string_view body = reply;
    if (auto open = body.find("```"); open != std::string_view::npos) {
        auto start = body.find('\n', open);
        if (start != std::string_view::npos) {
            auto close = body.find("```", start);
            if (close != std::string_view::npos) {
                if (auto fenced = try_parse(body.substr(start + 1, close - start - 1)))
                    return fenced;
            }
        }
    }

    // Slice from first opening bracket to last matching-style closer.
    auto first_obj = reply.find('{');
    auto first_arr = reply.find('[');
    std::size_t first = std::min(first_obj, first_arr);
    if (first == std::string_view::npos) return std::nullopt;
    char closer = (first == first_arr) ? ']' : '}';
    auto last = reply.rfind(closer);
    if (last == std::string_view::npos || last <= first) return std::nullopt;
    return try_parse(reply.substr(first, last - first + 1));
}

}  // namespace gsem
