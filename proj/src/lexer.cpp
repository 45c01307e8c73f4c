#include "snipex/lexer.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>

#include "snipex/errors.hpp"

namespace snipex {

namespace {

const std::unordered_set<std::string> kKeywords = {
    "False", "None",   "True",   "and",    "as",     "assert", "break",
    "class", "continue", "def",  "del",    "elif",   "else",   "except",
    "finally", "for",  "from",   "global", "if",     "import", "in",
    "is",    "lambda", "not",    "or",     "pass",   "raise",  "return",
    "try",   "while",  "with",
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_cont(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

struct Lexer {
    const std::string& src;
    size_t pos = 0;
    int line = 1;
    int col = 1;
    int paren_depth = 0;
    bool at_line_start = true;
    std::vector<int> indents{0};
    std::vector<Token> out;

    explicit Lexer(const std::string& s) : src(s) {}

    char peek(size_t off = 0) const { return pos + off < src.size() ? src[pos + off] : '\0'; }
    bool done() const { return pos >= src.size(); }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line, col); }

    void advance() {
        if (src[pos] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    }

    void push(Tok t, std::string text, int l, int c, int el) {
        Token tok;
        tok.type = t;
        tok.text = std::move(text);
        tok.line = l;
        tok.col = c;
        tok.end_line = el;
        out.push_back(std::move(tok));
    }

    void run() {
        while (!done()) {
            if (at_line_start && paren_depth == 0) {
                if (!handle_indentation()) continue;  // blank/comment line consumed
                at_line_start = false;
            }
            char c = peek();
            if (c == '\n') {
                advance();
                if (paren_depth == 0) {
                    if (!out.empty() && out.back().type != Tok::Newline &&
                        out.back().type != Tok::Indent && out.back().type != Tok::Dedent) {
                        push(Tok::Newline, "", line - 1, 1, line - 1);
                    }
                    at_line_start = true;
                }
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r') {
                advance();
                continue;
            }
            if (c == '#') {
                while (!done() && peek() != '\n') advance();
                continue;
            }
            if (c == '\\' && peek(1) == '\n') {
                advance();
                advance();
                continue;
            }
            lex_token();
        }
        if (!out.empty() && out.back().type != Tok::Newline) push(Tok::Newline, "", line, col, line);
        while (indents.back() > 0) {
            indents.pop_back();
            push(Tok::Dedent, "", line, 1, line);
        }
        push(Tok::End, "", line, col, line);
    }

    // Returns false if the physical line was blank or comment-only (consumed).
    bool handle_indentation() {
        size_t scan = pos;
        int width = 0;
        while (scan < src.size() && (src[scan] == ' ' || src[scan] == '\t')) {
            width += src[scan] == '\t' ? 8 - width % 8 : 1;
            ++scan;
        }
        if (scan >= src.size() || src[scan] == '\n' || src[scan] == '#' || src[scan] == '\r') {
            // Skip the whole blank/comment line without emitting tokens.
            while (!done() && peek() != '\n') advance();
            if (!done()) advance();
            return false;
        }
        while (pos < scan) advance();
        if (width > indents.back()) {
            indents.push_back(width);
            push(Tok::Indent, "", line, 1, line);
        } else {
            while (width < indents.back()) {
                indents.pop_back();
                push(Tok::Dedent, "", line, 1, line);
            }
            if (width != indents.back()) fail("unindent does not match any outer indentation level");
        }
        return true;
    }

    void lex_token() {
        char c = peek();
        int l = line, co = col;
        if (ident_start(c)) {
            lex_name_or_string_prefix(l, co);
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            lex_number(l, co);
            return;
        }
        if (c == '\'' || c == '"') {
            lex_string(l, co, false, false);
            return;
        }
        lex_operator(l, co);
    }

    void lex_name_or_string_prefix(int l, int co) {
        size_t start = pos;
        while (!done() && ident_cont(peek())) advance();
        std::string word = src.substr(start, pos - start);
        if ((peek() == '\'' || peek() == '"') && word.size() <= 2) {
            std::string low = word;
            std::transform(low.begin(), low.end(), low.begin(), ::tolower);
            bool raw = low.find('r') != std::string::npos;
            bool bytes = low.find('b') != std::string::npos;
            if (low.find('f') != std::string::npos) fail("f-string literals are not supported");
            if (low == "r" || low == "b" || low == "rb" || low == "br") {
                lex_string(l, co, raw, bytes);
                return;
            }
        }
        if (kKeywords.count(word)) {
            push(Tok::Keyword, word, l, co, line);
        } else {
            push(Tok::Name, word, l, co, line);
        }
    }

    void lex_number(int l, int co) {
        size_t start = pos;
        bool is_float = false;
        if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
            advance();
            advance();
            while (!done() && (std::isxdigit(static_cast<unsigned char>(peek())) || peek() == '_')) advance();
        } else {
            while (!done() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '_')) advance();
            if (peek() == '.' && peek(1) != '.') {
                is_float = true;
                advance();
                while (!done() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '_')) advance();
            }
            if (peek() == 'e' || peek() == 'E') {
                size_t save = pos;
                advance();
                if (peek() == '+' || peek() == '-') advance();
                if (std::isdigit(static_cast<unsigned char>(peek()))) {
                    is_float = true;
                    while (!done() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
                } else {
                    pos = save;  // 'e' belongs to a following identifier
                }
            }
        }
        std::string text = src.substr(start, pos - start);
        std::string clean;
        for (char ch : text)
            if (ch != '_') clean.push_back(ch);
        Token tok;
        tok.text = text;
        tok.line = l;
        tok.col = co;
        tok.end_line = line;
        if (is_float) {
            tok.type = Tok::Float;
            tok.fval = std::stod(clean);
        } else {
            tok.type = Tok::Int;
            tok.ival = std::stoll(clean, nullptr, 0);
        }
        out.push_back(std::move(tok));
    }

    void lex_string(int l, int co, bool raw, bool bytes) {
        char quote = peek();
        bool triple = peek(1) == quote && peek(2) == quote;
        advance();
        if (triple) {
            advance();
            advance();
        }
        std::string value;
        while (true) {
            if (done()) fail("unterminated string literal");
            char c = peek();
            if (c == quote) {
                if (!triple) {
                    advance();
                    break;
                }
                if (peek(1) == quote && peek(2) == quote) {
                    advance();
                    advance();
                    advance();
                    break;
                }
                value.push_back(c);
                advance();
                continue;
            }
            if (c == '\n' && !triple) fail("newline in single-quoted string");
            if (c == '\\' && !raw) {
                advance();
                if (done()) fail("unterminated string literal");
                char e = peek();
                advance();
                switch (e) {
                    case 'n': value.push_back('\n'); break;
                    case 't': value.push_back('\t'); break;
                    case 'r': value.push_back('\r'); break;
                    case '0': value.push_back('\0'); break;
                    case '\\': value.push_back('\\'); break;
                    case '\'': value.push_back('\''); break;
                    case '"': value.push_back('"'); break;
                    case '\n': break;  // line continuation inside the literal
                    case 'x': {
                        std::string hex;
                        for (int i = 0; i < 2 && !done(); ++i) {
                            hex.push_back(peek());
                            advance();
                        }
                        if (hex.size() != 2) fail("truncated \\x escape");
                        value.push_back(static_cast<char>(std::stoi(hex, nullptr, 16)));
                        break;
                    }
                    default:
                        value.push_back('\\');
                        value.push_back(e);
                }
                continue;
            }
            value.push_back(c);
            advance();
        }
        Token tok;
        tok.type = bytes ? Tok::Bytes : Tok::Str;
        tok.payload = std::move(value);
        tok.line = l;
        tok.col = co;
        tok.end_line = line;
        out.push_back(std::move(tok));
    }

    void lex_operator(int l, int co) {
        static const char* three[] = {"**=", "//=", "<<=", ">>=", "..."};
        static const char* two[] = {"**", "//", "<<", ">>", "<=", ">=", "==", "!=",
                                    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "->"};
        for (const char* op : three) {
            if (src.compare(pos, 3, op) == 0) {
                push(Tok::Op, op, l, co, line);
                advance();
                advance();
                advance();
                return;
            }
        }
        for (const char* op : two) {
            if (src.compare(pos, 2, op) == 0) {
                push(Tok::Op, op, l, co, line);
                advance();
                advance();
                return;
            }
        }
        char c = peek();
        static const std::string singles = "+-*/%<>=&|^~()[]{},:.;@";
        if (singles.find(c) == std::string::npos) fail(std::string("unexpected character '") + c + "'");
        if (c == '(' || c == '[' || c == '{') ++paren_depth;
        if (c == ')' || c == ']' || c == '}') {
            if (paren_depth == 0) fail("unbalanced closing bracket");
            --paren_depth;
        }
        push(Tok::Op, std::string(1, c), l, co, line);
        advance();
    }
};

}  // namespace

std::vector<Token> tokenize(const std::string& source) {
    Lexer lx(source);
    lx.run();
    return lx.out;
}

std::vector<int> countable_lines(const std::string& source) {
    std::set<int> lines;
    for (const Token& t : tokenize(source)) {
        if (t.type == Tok::Newline || t.type == Tok::Indent || t.type == Tok::Dedent ||
            t.type == Tok::End)
            continue;
        for (int l = t.line; l <= t.end_line; ++l) lines.insert(l);
    }
    return {lines.begin(), lines.end()};
}

}  // namespace snipex
