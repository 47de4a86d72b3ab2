#include "driftloc/config.hpp"

#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace driftloc {

namespace {

class TomlParser {
public:
    explicit TomlParser(std::string_view text) : s_(text) {}

    nlohmann::json parse() {
        nlohmann::json root = nlohmann::json::object();
        nlohmann::json* table = &root;
        while (true) {
            skip_blank_lines();
            if (eof()) break;
            if (peek() == '[') {
                table = header(root);
            } else {
                key_value(*table);
            }
            end_of_line();
        }
        return root;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;

    [[noreturn]] void fail(const std::string& what) const {
        throw std::runtime_error("toml line " + std::to_string(line_) + ": " + what);
    }
    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return eof() ? '\0' : s_[pos_]; }
    char get() {
        if (eof()) fail("unexpected end of input");
        const char c = s_[pos_++];
        if (c == '\n') ++line_;
        return c;
    }
    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        get();
    }

    void skip_spaces() {
        while (peek() == ' ' || peek() == '\t') get();
    }
    void skip_comment() {
        if (peek() == '#')
            while (!eof() && peek() != '\n') get();
    }
    void skip_blank_lines() {
        while (!eof()) {
            skip_spaces();
            skip_comment();
            if (peek() == '\n' || peek() == '\r') get();
            else break;
        }
    }
    // Whitespace, comments and newlines inside arrays.
    void skip_any() {
        while (!eof()) {
            skip_spaces();
            skip_comment();
            if (peek() == '\n' || peek() == '\r') get();
            else break;
        }
    }
    void end_of_line() {
        skip_spaces();
        skip_comment();
        if (peek() == '\r') get();
        if (!eof() && peek() != '\n') fail("unexpected trailing characters");
        if (!eof()) get();
    }

    std::string bare_or_quoted_key() {
        skip_spaces();
        if (peek() == '"') return basic_string();
        std::string k;
        while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-') k += get();
        if (k.empty()) fail("expected a key");
        return k;
    }
    std::vector<std::string> dotted_key() {
        std::vector<std::string> parts{bare_or_quoted_key()};
        skip_spaces();
        while (peek() == '.') {
            get();
            parts.push_back(bare_or_quoted_key());
            skip_spaces();
        }
        return parts;
    }

    nlohmann::json* descend(nlohmann::json* node, const std::string& key) {
        auto& child = (*node)[key];
        if (child.is_null()) child = nlohmann::json::object();
        if (child.is_array() && !child.empty() && child.back().is_object()) return &child.back();
        if (!child.is_object()) fail("key '" + key + "' is not a table");
        return &child;
    }

    nlohmann::json* header(nlohmann::json& root) {
        expect('[');
        const bool array = peek() == '[';
        if (array) get();
        const auto parts = dotted_key();
        expect(']');
        if (array) expect(']');
        nlohmann::json* node = &root;
        for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = descend(node, parts[i]);
        auto& last = (*node)[parts.back()];
        if (array) {
            if (last.is_null()) last = nlohmann::json::array();
            if (!last.is_array()) fail("key '" + parts.back() + "' is not an array of tables");
            last.push_back(nlohmann::json::object());
            return &last.back();
        }
        if (last.is_null()) last = nlohmann::json::object();
        if (!last.is_object()) fail("key '" + parts.back() + "' is not a table");
        return &last;
    }

    void key_value(nlohmann::json& table) {
        const auto parts = dotted_key();
        skip_spaces();
        expect('=');
        skip_spaces();
        nlohmann::json* node = &table;
        for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = descend(node, parts[i]);
        if (node->contains(parts.back())) fail("duplicate key '" + parts.back() + "'");
        (*node)[parts.back()] = value();
    }

    std::string basic_string() {
        expect('"');
        std::string out;
        while (true) {
            const char c = get();
            if (c == '"') break;
            if (c == '\n') fail("newline in string");
            if (c != '\\') {
                out += c;
                continue;
            }
            switch (const char e = get()) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: fail(std::string("unsupported escape \\") + e);
            }
        }
        return out;
    }
    std::string literal_string() {
        expect('\'');
        std::string out;
        while (peek() != '\'') {
            if (peek() == '\n' || eof()) fail("unterminated string");
            out += get();
        }
        get();
        return out;
    }

    nlohmann::json value() {
        const char c = peek();
        if (c == '"') return basic_string();
        if (c == '\'') return literal_string();
        if (c == '[') return array();
        if (c == '{') return inline_table();
        std::string token;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                          peek() == '.' || peek() == '_'))
            token += get();
        if (token == "true") return true;
        if (token == "false") return false;
        if (token.empty()) fail("expected a value");
        std::string digits;
        for (char ch : token)
            if (ch != '_') digits += ch;
        if (digits == "inf" || digits == "+inf") return std::numeric_limits<double>::infinity();
        if (digits == "-inf") return -std::numeric_limits<double>::infinity();
        const bool is_float = digits.find_first_of(".eE") != std::string::npos;
        std::size_t used = 0;
        try {
            if (is_float) {
                const double d = std::stod(digits, &used);
                if (used == digits.size()) return d;
            } else {
                const long long i = std::stoll(digits, &used);
                if (used == digits.size()) return i;
            }
        } catch (const std::exception&) {
        }
        fail("invalid value '" + token + "'");
    }

    nlohmann::json array() {
        expect('[');
        auto arr = nlohmann::json::array();
        skip_any();
        while (peek() != ']') {
            arr.push_back(value());
            skip_any();
            if (peek() == ',') {
                get();
                skip_any();
            } else if (peek() != ']') {
                fail("expected ',' or ']' in array");
            }
        }
        get();
        return arr;
    }

    nlohmann::json inline_table() {
        expect('{');
        auto obj = nlohmann::json::object();
        skip_spaces();
        while (peek() != '}') {
            key_value(obj);
            skip_spaces();
            if (peek() == ',') {
                get();
                skip_spaces();
            } else if (peek() != '}') {
                fail("expected ',' or '}' in inline table");
            }
        }
        get();
        return obj;
    }
};

}  // namespace

nlohmann::json parse_toml(std::string_view text) { return TomlParser(text).parse(); }

nlohmann::json load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        if (path.extension() == ".toml") return parse_toml(buf.str());
        return nlohmann::json::parse(buf.str());
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

}  // namespace driftloc
