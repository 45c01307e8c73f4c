#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "snipex/errors.hpp"
#include "snipex/lexer.hpp"
#include "snipex/parser.hpp"
#include "snipex/unparse.hpp"

using namespace snipex;

TEST_CASE("countable lines skip blanks and full-line comments") {
    std::string src =
        "x = 1\n"
        "\n"
        "# comment only\n"
        "y = 2  # trailing comment\n"
        "   \n"
        "z = 3\n";
    auto lines = countable_lines(src);
    CHECK(lines == std::vector<int>{1, 4, 6});
}

TEST_CASE("countable lines include every physical line of a triple-quoted string") {
    std::string src = "s = '''a\nb\nc'''\nt = 1\n";
    auto lines = countable_lines(src);
    CHECK(lines == std::vector<int>{1, 2, 3, 4});
}

TEST_CASE("tokenizer handles implicit joins inside brackets") {
    std::string src = "x = [1,\n     2,\n     3]\ny = 4\n";
    auto toks = tokenize(src);
    int newlines = 0;
    for (auto& t : toks)
        if (t.type == Tok::Newline) ++newlines;
    CHECK(newlines == 2);
}

TEST_CASE("f-strings are rejected") {
    CHECK_THROWS_AS(tokenize("x = f'hi {name}'\n"), ParseError);
}

TEST_CASE("parse and unparse round-trips simple statements onto their lines") {
    std::string src =
        "a = 1\n"
        "b = a + 2\n"
        "\n"
        "print(a, b)\n";
    ast::Module m = parse_module(src);
    std::string out = unparse(m);
    CHECK(out == "a = 1\nb = a + 2\n\nprint(a, b)\n");
}

TEST_CASE("multi-line statements collapse but later lines stay put") {
    std::string src =
        "x = (1 +\n"
        "     2)\n"
        "y = 3\n";
    ast::Module m = parse_module(src);
    std::string out = unparse(m);
    // x lands on line 1, its continuation line is blank, y stays on line 3
    CHECK(out == "x = 1 + 2\n\ny = 3\n");
}

TEST_CASE("compound statements keep structure and clause lines") {
    std::string src =
        "if a:\n"
        "    b = 1\n"
        "elif c:\n"
        "    b = 2\n"
        "else:\n"
        "    b = 3\n";
    ast::Module m = parse_module(src);
    std::string out = unparse(m);
    CHECK(out == src);
    ast::Module again = parse_module(out);
    CHECK(again.body.size() == 1);
}

TEST_CASE("operator precedence survives reparsing") {
    for (const char* expr :
         {"a + b * c", "(a + b) * c", "-x ** 2", "(-x) ** 2", "a or b and not c",
          "a < b < c", "x if c else y", "lambda x, y=1: x + y", "a.b.c(1, k=2)[3]",
          "{1: 'x', 2: 'y'}", "[i * i for i in xs if i]", "not a in b"}) {
        std::string src = std::string("r = ") + expr + "\n";
        std::string once = unparse(parse_module(src));
        std::string twice = unparse(parse_module(once));
        CHECK(once == twice);
    }
}

TEST_CASE("inline suites stay inline") {
    std::string src = "if x: y = 1\n";
    CHECK(unparse(parse_module(src)) == src);
}

TEST_CASE("parse errors carry locations") {
    try {
        parse_module("def f(:\n    pass\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
    }
}

TEST_CASE("try/except/else/finally round-trips") {
    std::string src =
        "try:\n"
        "    risky()\n"
        "except ValueError as e:\n"
        "    handle(e)\n"
        "except:\n"
        "    pass\n"
        "else:\n"
        "    ok()\n"
        "finally:\n"
        "    done()\n";
    CHECK(unparse(parse_module(src)) == src);
}

TEST_CASE("strings and bytes render with escapes") {
    std::string src = "s = \"a\\nb\"\nt = b\"\\x00hi\"\n";
    std::string out = unparse(parse_module(src));
    CHECK(out.find("\\n") != std::string::npos);
    CHECK(out.find("b\"") != std::string::npos);
    CHECK(unparse(parse_module(out)) == out);
}
