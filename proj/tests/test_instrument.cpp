#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <nlohmann/json.hpp>

#include "snipex/errors.hpp"
#include "snipex/instrument.hpp"
#include "snipex/parser.hpp"

using namespace snipex;

namespace {

int count_kind(const InstrumentedProgram& p, HookKind k) {
    int n = 0;
    for (const auto& [iid, site] : p.sites)
        if (site.kind == k) ++n;
    return n;
}

// Independent visitor: counts the AST nodes the hooks should cover.
struct NodeCounter {
    int names = 0, attrs = 0, calls = 0;

    void expr(const ast::Expr& e, bool load) {
        using namespace ast;
        if (is<Name>(e)) {
            if (load) ++names;
        } else if (is<Attribute>(e)) {
            if (load) {
                ++attrs;
                expr(*as<Attribute>(e).base, true);
            }
        } else if (is<Call>(e)) {
            ++calls;
            expr(*as<Call>(e).callee, true);
            for (const auto& a : as<Call>(e).args) expr(*a.value, true);
        } else if (is<BinExpr>(e)) {
            expr(*as<BinExpr>(e).lhs, true);
            expr(*as<BinExpr>(e).rhs, true);
        } else if (is<Subscript>(e)) {
            expr(*as<Subscript>(e).base, true);
            expr(*as<Subscript>(e).index, true);
        } else if (is<TupleExpr>(e)) {
            for (const auto& v : as<TupleExpr>(e).items) expr(*v, load);
        }
    }

    void run(const ast::Module& m) {
        using namespace ast;
        for (const auto& sp : m.body) {
            if (is<Assign>(*sp)) {
                expr(*as<Assign>(*sp).value, true);
            } else if (is<ExprStmt>(*sp)) {
                expr(*as<ExprStmt>(*sp).value, true);
            }
        }
    }
};

}  // namespace

TEST_CASE("variable read row: Var1 = Var2 + 1") {
    auto prog = instrument(SourceSnippet::from_text("Var1 = Var2 + 1\n"));
    CHECK(prog.instrumented_text == "Var1 = _n_(1, \"Var2\", lambda: Var2) + 1\n");
    REQUIRE(prog.sites.size() == 1);
    const HookSite& site = prog.sites.at(1);
    CHECK(site.kind == HookKind::variable_read);
    CHECK(site.name == "Var2");
    CHECK(site.line_no == 1);
    CHECK(site.original_line_text == "Var1 = Var2 + 1");
}

TEST_CASE("attribute read row: Opt1.Attr1 = Opt2.Attr2") {
    auto prog = instrument(SourceSnippet::from_text("Opt1.Attr1 = Opt2.Attr2\n"));
    // the write side stays untouched; the read side nests a name hook
    CHECK(prog.instrumented_text ==
          "Opt1.Attr1 = _a_(2, _n_(1, \"Opt2\", lambda: Opt2), \"Attr2\")\n");
    CHECK(count_kind(prog, HookKind::variable_read) == 1);
    CHECK(count_kind(prog, HookKind::attribute_read) == 1);
}

TEST_CASE("call row: Var = Foo()") {
    auto prog = instrument(SourceSnippet::from_text("Var = Foo()\n"));
    CHECK(prog.instrumented_text == "Var = _c_(2, _n_(1, \"Foo\", lambda: Foo))\n");
    CHECK(count_kind(prog, HookKind::call) == 1);
}

TEST_CASE("method call nests call over attribute over name") {
    auto prog = instrument(SourceSnippet::from_text("r = o.m(x)\n"));
    CHECK(prog.instrumented_text ==
          "r = _c_(4, _a_(2, _n_(1, \"o\", lambda: o), \"m\"), _n_(3, \"x\", lambda: x))\n");
}

TEST_CASE("empty program instruments to zero sites") {
    auto prog = instrument(SourceSnippet::from_text(""));
    CHECK(prog.sites.empty());
    CHECK(prog.instrumented_text.empty());
}

TEST_CASE("unparsable text raises ParseError") {
    CHECK_THROWS_AS(instrument(SourceSnippet::from_text("def broken(:\n")), ParseError);
}

TEST_CASE("chained attributes wrap innermost-out") {
    auto prog = instrument(SourceSnippet::from_text("v = a.b.c\n"));
    CHECK(prog.instrumented_text ==
          "v = _a_(3, _a_(2, _n_(1, \"a\", lambda: a), \"b\"), \"c\")\n");
}

TEST_CASE("site accounting matches an independent node count") {
    std::string src =
        "x = alpha + beta\n"
        "y = obj.field\n"
        "z = fn(x, y)\n"
        "q = arr[idx]\n";
    auto prog = instrument(SourceSnippet::from_text(src));
    NodeCounter counter;
    ast::Module m = parse_module(src);
    counter.run(m);
    CHECK(count_kind(prog, HookKind::variable_read) == counter.names);
    CHECK(count_kind(prog, HookKind::attribute_read) == counter.attrs);
    CHECK(count_kind(prog, HookKind::call) == counter.calls);
}

TEST_CASE("write targets are not hooked") {
    auto prog = instrument(SourceSnippet::from_text("a = 1\na.b = 2\na[0] = 3\na += 4\n"));
    // only reads: none (subscript/attr store bases stay untouched, aug-assign untouched)
    for (const auto& [iid, site] : prog.sites) {
        CHECK(site.kind != HookKind::variable_read);
    }
    CHECK(prog.sites.empty());
}

TEST_CASE("locate returns the stored site and rejects unknown iids") {
    auto prog = instrument(SourceSnippet::from_text("Var1 = Var2 + 1\n"));
    const HookSite& site = locate(prog, 1);
    CHECK(site.name == "Var2");
    CHECK(site.line_no == 1);
    CHECK_THROWS_AS(locate(prog, 99), UnknownIid);
}

TEST_CASE("locate on one-line snippet always reports line 1") {
    auto prog = instrument(SourceSnippet::from_text("r = f(g(h))\n"));
    for (const auto& [iid, site] : prog.sites) CHECK(locate(prog, iid).line_no == 1);
}

TEST_CASE("round-trip: original_line_text is a line of the source") {
    std::string src =
        "total = base + extra\n"
        "result = compute(total)\n";
    auto prog = instrument(SourceSnippet::from_text(src));
    for (const auto& [iid, site] : prog.sites) {
        CHECK(src.find(site.original_line_text) != std::string::npos);
    }
}

TEST_CASE("instrumented text parses and iids are unique") {
    std::string src =
        "def f(a, b=default_width):\n"
        "    return a + helper(b)\n"
        "out = f(value_one, value_two)\n"
        "print(out.magnitude)\n";
    auto prog = instrument(SourceSnippet::from_text(src));
    CHECK_NOTHROW(parse_module(prog.instrumented_text));
    std::set<int> seen;
    for (const auto& [iid, site] : prog.sites) {
        CHECK(seen.insert(iid).second);
        CHECK(iid == site.iid);
    }
}

TEST_CASE("site map serializes with the documented schema") {
    auto prog = instrument(SourceSnippet::from_text("Var1 = Var2 + 1\n"));
    auto j = nlohmann::json::parse(prog.site_map_json());
    REQUIRE(j.contains("sites"));
    REQUIRE(j["sites"].size() == 1);
    CHECK(j["sites"][0]["iid"] == 1);
    CHECK(j["sites"][0]["kind"] == "variable_read");
    CHECK(j["sites"][0]["name"] == "Var2");
    CHECK(j["sites"][0]["line"] == 1);
    CHECK(j["sites"][0]["text"] == "Var1 = Var2 + 1");
}

TEST_CASE("straight-line snippet has zero branches") {
    auto table = count_branches(SourceSnippet::from_text("a = 1\nb = 2\nc = a + b\n"));
    CHECK(table.arms.empty());
}

TEST_CASE("if/else yields two arms; bare if also yields two") {
    auto table = count_branches(
        SourceSnippet::from_text("if c:\n    a = 1\nelse:\n    a = 2\n"));
    REQUIRE(table.arms.size() == 2);
    CHECK(table.arms[0].id == "L1:if:then");
    CHECK(table.arms[1].id == "L1:if:else");

    auto bare = count_branches(SourceSnippet::from_text("if c:\n    a = 1\n"));
    CHECK(bare.arms.size() == 2);  // taken / fall-through
}

TEST_CASE("loops, handlers and conditional expressions contribute arms") {
    std::string src =
        "for i in xs:\n"
        "    pass\n"
        "while c:\n"
        "    break\n"
        "try:\n"
        "    pass\n"
        "except ValueError:\n"
        "    pass\n"
        "v = 1 if c else 2\n";
    auto table = count_branches(SourceSnippet::from_text(src));
    std::vector<std::string> ids;
    for (auto& a : table.arms) ids.push_back(a.id);
    CHECK(std::count(ids.begin(), ids.end(), "L1:loop:body") == 1);
    CHECK(std::count(ids.begin(), ids.end(), "L1:loop:exit") == 1);
    CHECK(std::count(ids.begin(), ids.end(), "L3:loop:body") == 1);
    CHECK(std::count(ids.begin(), ids.end(), "L7:except:enter") == 1);
    CHECK(std::count(ids.begin(), ids.end(), "L9:ifexp0:then") == 1);
    CHECK(std::count(ids.begin(), ids.end(), "L9:ifexp0:else") == 1);
}

TEST_CASE("two conditional expressions on one line get distinct ids") {
    auto table =
        count_branches(SourceSnippet::from_text("v = (1 if a else 2) + (3 if b else 4)\n"));
    std::set<std::string> ids;
    for (auto& a : table.arms) ids.insert(a.id);
    CHECK(ids.count("L1:ifexp0:then"));
    CHECK(ids.count("L1:ifexp1:then"));
}

TEST_CASE("reads inside comprehensions and lambdas are hooked") {
    auto prog = instrument(SourceSnippet::from_text("ys = [f(x) for x in xs]\ng = lambda: q\n"));
    int names = count_kind(prog, HookKind::variable_read);
    // xs, f (callee name hook), x (as call argument), q; the target x is a write
    CHECK(names == 4);
    CHECK(count_kind(prog, HookKind::call) == 1);
}
