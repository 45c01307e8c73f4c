#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace snipex {

enum class Tok {
    End,
    Newline,
    Indent,
    Dedent,
    Name,
    Int,
    Float,
    Str,      // payload holds decoded value
    Bytes,    // payload holds decoded value
    Keyword,  // payload holds the keyword itself
    Op,       // payload holds the operator spelling
};

struct Token {
    Tok type = Tok::End;
    std::string text;     // name / operator / keyword spelling
    std::string payload;  // decoded string or bytes content
    long long ival = 0;
    double fval = 0.0;
    int line = 0;      // 1-based start line
    int col = 0;       // 1-based start column
    int end_line = 0;  // last physical line the token touches

    bool is_op(const char* s) const { return type == Tok::Op && text == s; }
    bool is_kw(const char* s) const { return type == Tok::Keyword && text == s; }
};

// Tokenizes a whole snippet. Handles indentation blocks, implicit line joins
// inside brackets, explicit backslash joins, comments, and string prefixes
// r/b (f-strings are rejected). Throws ParseError on malformed input.
std::vector<Token> tokenize(const std::string& source);

// 1-based physical lines that contain at least one non-comment token. This is
// the denominator set for line coverage: blank lines and full-line comments
// are excluded, lines with trailing comments are kept, and every physical
// line spanned by a multi-line token (triple-quoted strings) counts.
std::vector<int> countable_lines(const std::string& source);

}  // namespace snipex
