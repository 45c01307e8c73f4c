#include "snipex/parser.hpp"

#include "snipex/errors.hpp"
#include "snipex/lexer.hpp"

namespace snipex {

using namespace ast;

namespace {

struct Parser {
    std::vector<Token> toks;
    size_t pos = 0;

    const Token& cur() const { return toks[pos]; }
    const Token& peek(size_t off = 1) const {
        return toks[std::min(pos + off, toks.size() - 1)];
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, cur().line, cur().col);
    }

    bool at_op(const char* s) const { return cur().is_op(s); }
    bool at_kw(const char* s) const { return cur().is_kw(s); }

    Token take() { return toks[pos++]; }

    void expect_op(const char* s) {
        if (!at_op(s)) fail(std::string("expected '") + s + "'");
        ++pos;
    }
    void expect_kw(const char* s) {
        if (!at_kw(s)) fail(std::string("expected '") + s + "'");
        ++pos;
    }
    void expect_newline() {
        if (cur().type != Tok::Newline) fail("expected end of statement");
        ++pos;
    }

    template <class T>
    ExprP mk(int line, int col, int end_line, T&& node) {
        auto e = std::make_shared<Expr>();
        e->line = line;
        e->col = col;
        e->end_line = end_line;
        e->node = std::forward<T>(node);
        return e;
    }

    int last_end_line() const { return toks[pos ? pos - 1 : 0].end_line; }

    // ---- expressions ----

    ExprP parse_test() {
        if (at_kw("lambda")) return parse_lambda();
        ExprP e = parse_or();
        if (at_kw("if")) {
            int l = e->line, c = e->col;
            ++pos;
            ExprP cond = parse_or();
            expect_kw("else");
            ExprP orelse = parse_test();
            return mk(l, c, last_end_line(), IfExpr{cond, e, orelse});
        }
        return e;
    }

    ExprP parse_lambda() {
        int l = cur().line, c = cur().col;
        expect_kw("lambda");
        std::vector<Param> params;
        if (!at_op(":")) params = parse_param_list(false);
        expect_op(":");
        ExprP body = parse_test();
        return mk(l, c, last_end_line(), Lambda{std::move(params), body});
    }

    ExprP parse_or() {
        ExprP e = parse_and();
        if (!at_kw("or")) return e;
        std::vector<ExprP> vals{e};
        while (at_kw("or")) {
            ++pos;
            vals.push_back(parse_and());
        }
        return mk(e->line, e->col, last_end_line(), BoolExpr{false, std::move(vals)});
    }

    ExprP parse_and() {
        ExprP e = parse_not();
        if (!at_kw("and")) return e;
        std::vector<ExprP> vals{e};
        while (at_kw("and")) {
            ++pos;
            vals.push_back(parse_not());
        }
        return mk(e->line, e->col, last_end_line(), BoolExpr{true, std::move(vals)});
    }

    ExprP parse_not() {
        if (at_kw("not")) {
            int l = cur().line, c = cur().col;
            ++pos;
            ExprP operand = parse_not();
            return mk(l, c, last_end_line(), UnExpr{UnOp::Not, operand});
        }
        return parse_comparison();
    }

    ExprP parse_comparison() {
        ExprP first = parse_bitor();
        std::vector<CmpOp> ops;
        std::vector<ExprP> rest;
        while (true) {
            CmpOp op;
            if (at_op("==")) op = CmpOp::Eq;
            else if (at_op("!=")) op = CmpOp::Ne;
            else if (at_op("<")) op = CmpOp::Lt;
            else if (at_op("<=")) op = CmpOp::Le;
            else if (at_op(">")) op = CmpOp::Gt;
            else if (at_op(">=")) op = CmpOp::Ge;
            else if (at_kw("in")) op = CmpOp::In;
            else if (at_kw("not") && peek().is_kw("in")) { ++pos; op = CmpOp::NotIn; }
            else if (at_kw("is") && peek().is_kw("not")) { ++pos; op = CmpOp::IsNot; }
            else if (at_kw("is")) op = CmpOp::Is;
            else break;
            ++pos;
            ops.push_back(op);
            rest.push_back(parse_bitor());
        }
        if (ops.empty()) return first;
        return mk(first->line, first->col, last_end_line(),
                  CompareExpr{first, std::move(ops), std::move(rest)});
    }

    ExprP bin_chain(ExprP (Parser::*next)(), std::initializer_list<std::pair<const char*, BinOp>> table) {
        ExprP e = (this->*next)();
        while (true) {
            bool matched = false;
            for (auto& [sym, op] : table) {
                if (at_op(sym)) {
                    ++pos;
                    ExprP rhs = (this->*next)();
                    e = mk(e->line, e->col, last_end_line(), BinExpr{op, e, rhs});
                    matched = true;
                    break;
                }
            }
            if (!matched) return e;
        }
    }

    ExprP parse_bitor() { return bin_chain(&Parser::parse_bitxor, {{"|", BinOp::BitOr}}); }
    ExprP parse_bitxor() { return bin_chain(&Parser::parse_bitand, {{"^", BinOp::BitXor}}); }
    ExprP parse_bitand() { return bin_chain(&Parser::parse_shift, {{"&", BinOp::BitAnd}}); }
    ExprP parse_shift() {
        return bin_chain(&Parser::parse_arith, {{"<<", BinOp::LShift}, {">>", BinOp::RShift}});
    }
    ExprP parse_arith() {
        return bin_chain(&Parser::parse_term, {{"+", BinOp::Add}, {"-", BinOp::Sub}});
    }
    ExprP parse_term() {
        return bin_chain(&Parser::parse_factor, {{"*", BinOp::Mul},
                                                 {"/", BinOp::Div},
                                                 {"//", BinOp::FloorDiv},
                                                 {"%", BinOp::Mod}});
    }

    ExprP parse_factor() {
        if (at_op("-") || at_op("+") || at_op("~")) {
            int l = cur().line, c = cur().col;
            UnOp op = at_op("-") ? UnOp::Neg : at_op("+") ? UnOp::Pos : UnOp::Invert;
            ++pos;
            ExprP operand = parse_factor();
            return mk(l, c, last_end_line(), UnExpr{op, operand});
        }
        return parse_power();
    }

    ExprP parse_power() {
        ExprP base = parse_postfix();
        if (at_op("**")) {
            ++pos;
            ExprP exp = parse_factor();  // right associative
            return mk(base->line, base->col, last_end_line(), BinExpr{BinOp::Pow, base, exp});
        }
        return base;
    }

    ExprP parse_postfix() {
        ExprP e = parse_atom();
        while (true) {
            if (at_op(".")) {
                ++pos;
                if (cur().type != Tok::Name) fail("expected attribute name");
                std::string attr = take().text;
                e = mk(e->line, e->col, last_end_line(), Attribute{e, std::move(attr)});
            } else if (at_op("(")) {
                ++pos;
                std::vector<CallArg> args = parse_call_args();
                expect_op(")");
                e = mk(e->line, e->col, last_end_line(), Call{e, std::move(args)});
            } else if (at_op("[")) {
                ++pos;
                ExprP index = parse_subscript_index();
                expect_op("]");
                e = mk(e->line, e->col, last_end_line(), Subscript{e, index});
            } else {
                return e;
            }
        }
    }

    ExprP parse_subscript_index() {
        int l = cur().line, c = cur().col;
        ExprP lower, upper, step;
        bool is_slice = false;
        if (!at_op(":")) lower = parse_test();
        if (at_op(":")) {
            is_slice = true;
            ++pos;
            if (!at_op(":") && !at_op("]")) upper = parse_test();
            if (at_op(":")) {
                ++pos;
                if (!at_op("]")) step = parse_test();
            }
        }
        if (!is_slice) return lower;
        return mk(l, c, last_end_line(), SliceExpr{lower, upper, step});
    }

    std::vector<CallArg> parse_call_args() {
        std::vector<CallArg> args;
        while (!at_op(")")) {
            CallArg arg;
            if (at_op("*")) {
                ++pos;
                arg.star = true;
                arg.value = parse_test();
            } else if (at_op("**")) {
                ++pos;
                arg.dstar = true;
                arg.value = parse_test();
            } else if (cur().type == Tok::Name && peek().is_op("=")) {
                arg.keyword = take().text;
                ++pos;
                arg.value = parse_test();
            } else {
                arg.value = parse_test();
            }
            args.push_back(std::move(arg));
            if (at_op(",")) ++pos;
            else break;
        }
        return args;
    }

    // Comprehension clauses after `expr for ...`.
    std::vector<CompClause> parse_comp_clauses() {
        std::vector<CompClause> clauses;
        while (at_kw("for")) {
            ++pos;
            ExprP target = parse_target_list();
            expect_kw("in");
            ExprP iter = parse_or();
            CompClause cl{target, iter, {}};
            while (at_kw("if")) {
                ++pos;
                cl.conds.push_back(parse_or());
            }
            clauses.push_back(std::move(cl));
        }
        return clauses;
    }

    ExprP parse_target_list() {
        ExprP first = parse_postfix();
        if (!at_op(",")) return first;
        std::vector<ExprP> items{first};
        while (at_op(",")) {
            ++pos;
            if (at_kw("in")) break;
            items.push_back(parse_postfix());
        }
        return mk(first->line, first->col, last_end_line(), TupleExpr{std::move(items)});
    }

    ExprP parse_atom() {
        const Token& t = cur();
        int l = t.line, c = t.col;
        switch (t.type) {
            case Tok::Int: {
                ++pos;
                return mk(l, c, t.end_line, IntLit{t.ival});
            }
            case Tok::Float: {
                ++pos;
                return mk(l, c, t.end_line, FloatLit{t.fval});
            }
            case Tok::Str: {
                std::string v = t.payload;
                int el = t.end_line;
                ++pos;
                while (cur().type == Tok::Str) {  // adjacent literal concatenation
                    v += cur().payload;
                    el = cur().end_line;
                    ++pos;
                }
                return mk(l, c, el, StrLit{std::move(v)});
            }
            case Tok::Bytes: {
                std::string v = t.payload;
                int el = t.end_line;
                ++pos;
                while (cur().type == Tok::Bytes) {
                    v += cur().payload;
                    el = cur().end_line;
                    ++pos;
                }
                return mk(l, c, el, BytesLit{std::move(v)});
            }
            case Tok::Name: {
                ++pos;
                return mk(l, c, t.end_line, Name{t.text});
            }
            case Tok::Keyword:
                if (t.text == "None") { ++pos; return mk(l, c, t.end_line, NoneLit{}); }
                if (t.text == "True") { ++pos; return mk(l, c, t.end_line, BoolLit{true}); }
                if (t.text == "False") { ++pos; return mk(l, c, t.end_line, BoolLit{false}); }
                if (t.text == "lambda") return parse_lambda();
                fail("unexpected keyword '" + t.text + "'");
            case Tok::Op:
                if (t.text == "(") return parse_paren();
                if (t.text == "[") return parse_list_display();
                if (t.text == "{") return parse_brace_display();
                fail("unexpected token '" + t.text + "'");
            default:
                fail("unexpected token");
        }
    }

    ExprP parse_paren() {
        int l = cur().line, c = cur().col;
        expect_op("(");
        if (at_op(")")) {
            ++pos;
            return mk(l, c, last_end_line(), TupleExpr{{}});
        }
        ExprP first = parse_test();
        if (at_kw("for")) {
            auto clauses = parse_comp_clauses();
            expect_op(")");
            return mk(l, c, last_end_line(), Comprehension{3, first, nullptr, std::move(clauses)});
        }
        if (at_op(",")) {
            std::vector<ExprP> items{first};
            while (at_op(",")) {
                ++pos;
                if (at_op(")")) break;
                items.push_back(parse_test());
            }
            expect_op(")");
            return mk(l, c, last_end_line(), TupleExpr{std::move(items)});
        }
        expect_op(")");
        return first;  // plain grouping
    }

    ExprP parse_list_display() {
        int l = cur().line, c = cur().col;
        expect_op("[");
        if (at_op("]")) {
            ++pos;
            return mk(l, c, last_end_line(), ListExpr{{}});
        }
        ExprP first = parse_test();
        if (at_kw("for")) {
            auto clauses = parse_comp_clauses();
            expect_op("]");
            return mk(l, c, last_end_line(), Comprehension{0, first, nullptr, std::move(clauses)});
        }
        std::vector<ExprP> items{first};
        while (at_op(",")) {
            ++pos;
            if (at_op("]")) break;
            items.push_back(parse_test());
        }
        expect_op("]");
        return mk(l, c, last_end_line(), ListExpr{std::move(items)});
    }

    ExprP parse_brace_display() {
        int l = cur().line, c = cur().col;
        expect_op("{");
        if (at_op("}")) {
            ++pos;
            return mk(l, c, last_end_line(), DictExpr{{}, {}});
        }
        ExprP first = parse_test();
        if (at_op(":")) {
            ++pos;
            ExprP value = parse_test();
            if (at_kw("for")) {
                auto clauses = parse_comp_clauses();
                expect_op("}");
                return mk(l, c, last_end_line(), Comprehension{2, first, value, std::move(clauses)});
            }
            std::vector<ExprP> keys{first}, values{value};
            while (at_op(",")) {
                ++pos;
                if (at_op("}")) break;
                keys.push_back(parse_test());
                expect_op(":");
                values.push_back(parse_test());
            }
            expect_op("}");
            return mk(l, c, last_end_line(), DictExpr{std::move(keys), std::move(values)});
        }
        if (at_kw("for")) {
            auto clauses = parse_comp_clauses();
            expect_op("}");
            return mk(l, c, last_end_line(), Comprehension{1, first, nullptr, std::move(clauses)});
        }
        std::vector<ExprP> items{first};
        while (at_op(",")) {
            ++pos;
            if (at_op("}")) break;
            items.push_back(parse_test());
        }
        expect_op("}");
        return mk(l, c, last_end_line(), SetExpr{std::move(items)});
    }

    // testlist: one or more tests separated by commas (bare tuple).
    ExprP parse_testlist() {
        ExprP first = parse_test();
        if (!at_op(",")) return first;
        std::vector<ExprP> items{first};
        while (at_op(",")) {
            ++pos;
            if (cur().type == Tok::Newline || at_op("=") || at_op(")") || at_op("]") ||
                cur().type == Tok::End || at_op(":") || at_op(";"))
                break;
            items.push_back(parse_test());
        }
        return mk(first->line, first->col, last_end_line(), TupleExpr{std::move(items)});
    }

    // ---- statements ----

    std::vector<Param> parse_param_list(bool parens) {
        std::vector<Param> params;
        while (true) {
            if (parens && at_op(")")) break;
            if (!parens && at_op(":")) break;
            Param p;
            if (at_op("*")) {
                ++pos;
                p.star = true;
            } else if (at_op("**")) {
                ++pos;
                p.dstar = true;
            }
            if (cur().type != Tok::Name) fail("expected parameter name");
            p.name = take().text;
            if (at_op("=")) {
                ++pos;
                p.default_value = parse_test();
            }
            params.push_back(std::move(p));
            if (at_op(",")) ++pos;
            else break;
        }
        return params;
    }

    template <class T>
    StmtP mkstmt(int line, int span_end, T&& node) {
        auto s = std::make_shared<Stmt>();
        s->line = line;
        s->span_end = span_end;
        s->node = std::forward<T>(node);
        return s;
    }

    Block parse_suite() {
        if (cur().type == Tok::Newline) {
            ++pos;
            if (cur().type != Tok::Indent) fail("expected an indented block");
            ++pos;
            Block body;
            while (cur().type != Tok::Dedent && cur().type != Tok::End) {
                parse_statement(body);
            }
            if (cur().type == Tok::Dedent) ++pos;
            return body;
        }
        // Inline suite: simple statements separated by ';' on the header line.
        Block body;
        parse_simple_statement_line(body);
        return body;
    }

    void parse_statement(Block& out) {
        if (at_kw("if")) { out.push_back(parse_if()); return; }
        if (at_kw("while")) { out.push_back(parse_while()); return; }
        if (at_kw("for")) { out.push_back(parse_for()); return; }
        if (at_kw("def")) { out.push_back(parse_def()); return; }
        if (at_kw("class")) { out.push_back(parse_class()); return; }
        if (at_kw("try")) { out.push_back(parse_try()); return; }
        if (at_kw("with")) { out.push_back(parse_with()); return; }
        parse_simple_statement_line(out);
    }

    void parse_simple_statement_line(Block& out) {
        while (true) {
            out.push_back(parse_simple_statement());
            if (at_op(";")) {
                ++pos;
                if (cur().type == Tok::Newline) break;
                continue;
            }
            break;
        }
        expect_newline();
    }

    StmtP parse_simple_statement() {
        int l = cur().line;
        if (at_kw("return")) {
            ++pos;
            ExprP v;
            if (cur().type != Tok::Newline && !at_op(";")) v = parse_testlist();
            return mkstmt(l, last_end_line(), Return{v});
        }
        if (at_kw("pass")) { ++pos; return mkstmt(l, l, Pass{}); }
        if (at_kw("break")) { ++pos; return mkstmt(l, l, Break{}); }
        if (at_kw("continue")) { ++pos; return mkstmt(l, l, Continue{}); }
        if (at_kw("raise")) {
            ++pos;
            ExprP exc;
            if (cur().type != Tok::Newline && !at_op(";")) {
                exc = parse_test();
                if (at_kw("from")) {  // raise X from Y: cause is dropped
                    ++pos;
                    parse_test();
                }
            }
            return mkstmt(l, last_end_line(), Raise{exc});
        }
        if (at_kw("import")) {
            ++pos;
            Import imp;
            while (true) {
                std::string mod = parse_dotted_name();
                std::string asname;
                if (at_kw("as")) {
                    ++pos;
                    asname = take().text;
                }
                imp.names.emplace_back(mod, asname);
                if (at_op(",")) { ++pos; continue; }
                break;
            }
            return mkstmt(l, last_end_line(), std::move(imp));
        }
        if (at_kw("from")) {
            ++pos;
            FromImport imp;
            imp.module = parse_dotted_name();
            expect_kw("import");
            if (at_op("*")) fail("wildcard imports are not supported");
            bool parens = at_op("(");
            if (parens) ++pos;
            while (true) {
                if (cur().type != Tok::Name) fail("expected import name");
                std::string name = take().text;
                std::string asname;
                if (at_kw("as")) {
                    ++pos;
                    asname = take().text;
                }
                imp.names.emplace_back(name, asname);
                if (at_op(",")) { ++pos; continue; }
                break;
            }
            if (parens) expect_op(")");
            return mkstmt(l, last_end_line(), std::move(imp));
        }
        if (at_kw("global")) {
            ++pos;
            Global g;
            while (true) {
                if (cur().type != Tok::Name) fail("expected name after global");
                g.names.push_back(take().text);
                if (at_op(",")) { ++pos; continue; }
                break;
            }
            return mkstmt(l, last_end_line(), std::move(g));
        }
        if (at_kw("assert")) {
            ++pos;
            Assert a;
            a.test = parse_test();
            if (at_op(",")) {
                ++pos;
                a.msg = parse_test();
            }
            return mkstmt(l, last_end_line(), std::move(a));
        }
        if (at_kw("del")) {
            ++pos;
            Delete d;
            while (true) {
                d.targets.push_back(parse_postfix());
                if (at_op(",")) { ++pos; continue; }
                break;
            }
            return mkstmt(l, last_end_line(), std::move(d));
        }
        // expression statement / assignment / augmented assignment
        ExprP first = parse_testlist();
        static const std::pair<const char*, BinOp> aug_table[] = {
            {"+=", BinOp::Add},      {"-=", BinOp::Sub},    {"*=", BinOp::Mul},
            {"/=", BinOp::Div},      {"//=", BinOp::FloorDiv}, {"%=", BinOp::Mod},
            {"**=", BinOp::Pow},     {"&=", BinOp::BitAnd}, {"|=", BinOp::BitOr},
            {"^=", BinOp::BitXor},   {"<<=", BinOp::LShift}, {">>=", BinOp::RShift},
        };
        for (auto& [sym, op] : aug_table) {
            if (at_op(sym)) {
                ++pos;
                ExprP value = parse_testlist();
                return mkstmt(l, last_end_line(), AugAssign{first, op, value});
            }
        }
        if (at_op("=")) {
            Assign a;
            a.targets.push_back(first);
            while (at_op("=")) {
                ++pos;
                a.targets.push_back(parse_testlist());
            }
            a.value = a.targets.back();
            a.targets.pop_back();
            return mkstmt(l, last_end_line(), std::move(a));
        }
        return mkstmt(l, last_end_line(), ExprStmt{first});
    }

    std::string parse_dotted_name() {
        if (cur().type != Tok::Name) fail("expected module name");
        std::string name = take().text;
        while (at_op(".")) {
            ++pos;
            if (cur().type != Tok::Name) fail("expected name after '.'");
            name += "." + take().text;
        }
        return name;
    }

    StmtP parse_if() {
        int l = cur().line;
        expect_kw("if");
        ExprP cond = parse_test();
        int header_end = cur().line;
        expect_op(":");
        Block body = parse_suite();
        If node{cond, std::move(body), {}, 0};
        if (at_kw("elif")) {
            // Desugar to a nested If placed at the elif line.
            int elif_line = cur().line;
            toks[pos].text = "if";
            StmtP nested = parse_if();
            node.else_line = elif_line;
            node.orelse.push_back(nested);
        } else if (at_kw("else")) {
            node.else_line = cur().line;
            ++pos;
            expect_op(":");
            node.orelse = parse_suite();
        }
        return mkstmt(l, header_end, std::move(node));
    }

    StmtP parse_while() {
        int l = cur().line;
        expect_kw("while");
        ExprP cond = parse_test();
        int header_end = cur().line;
        expect_op(":");
        Block body = parse_suite();
        return mkstmt(l, header_end, While{cond, std::move(body)});
    }

    StmtP parse_for() {
        int l = cur().line;
        expect_kw("for");
        ExprP target = parse_target_list();
        expect_kw("in");
        ExprP iter = parse_testlist();
        int header_end = cur().line;
        expect_op(":");
        Block body = parse_suite();
        return mkstmt(l, header_end, For{target, iter, std::move(body)});
    }

    StmtP parse_def() {
        int l = cur().line;
        expect_kw("def");
        if (cur().type != Tok::Name) fail("expected function name");
        std::string name = take().text;
        expect_op("(");
        std::vector<Param> params = parse_param_list(true);
        expect_op(")");
        if (at_op("->")) {  // return annotation: parsed and dropped
            ++pos;
            parse_test();
        }
        int header_end = cur().line;
        expect_op(":");
        Block body = parse_suite();
        return mkstmt(l, header_end, FuncDef{std::move(name), std::move(params), std::move(body)});
    }

    StmtP parse_class() {
        int l = cur().line;
        expect_kw("class");
        if (cur().type != Tok::Name) fail("expected class name");
        std::string name = take().text;
        std::vector<ExprP> bases;
        if (at_op("(")) {
            ++pos;
            while (!at_op(")")) {
                bases.push_back(parse_test());
                if (at_op(",")) ++pos;
                else break;
            }
            expect_op(")");
        }
        int header_end = cur().line;
        expect_op(":");
        Block body = parse_suite();
        return mkstmt(l, header_end, ClassDef{std::move(name), std::move(bases), std::move(body)});
    }

    StmtP parse_try() {
        int l = cur().line;
        expect_kw("try");
        int header_end = cur().line;
        expect_op(":");
        Try node;
        node.body = parse_suite();
        while (at_kw("except")) {
            ExceptHandler h;
            h.line = cur().line;
            ++pos;
            if (!at_op(":")) {
                h.type = parse_test();
                if (at_kw("as")) {
                    ++pos;
                    if (cur().type != Tok::Name) fail("expected name after 'as'");
                    h.name = take().text;
                }
            }
            expect_op(":");
            h.body = parse_suite();
            node.handlers.push_back(std::move(h));
        }
        if (at_kw("else")) {
            if (node.handlers.empty()) fail("try/else without except");
            node.else_line = cur().line;
            ++pos;
            expect_op(":");
            node.orelse = parse_suite();
        }
        if (at_kw("finally")) {
            node.finally_line = cur().line;
            ++pos;
            expect_op(":");
            node.finalbody = parse_suite();
        }
        if (node.handlers.empty() && node.finalbody.empty())
            fail("try statement needs except or finally");
        return mkstmt(l, header_end, std::move(node));
    }

    StmtP parse_with() {
        int l = cur().line;
        expect_kw("with");
        With node;
        while (true) {
            WithItem item;
            item.ctx = parse_test();
            if (at_kw("as")) {
                ++pos;
                item.target = parse_postfix();
            }
            node.items.push_back(std::move(item));
            if (at_op(",")) { ++pos; continue; }
            break;
        }
        int header_end = cur().line;
        expect_op(":");
        node.body = parse_suite();
        return mkstmt(l, header_end, std::move(node));
    }

    Module parse_module_body() {
        Module m;
        while (cur().type != Tok::End) {
            if (cur().type == Tok::Newline) {
                ++pos;
                continue;
            }
            parse_statement(m.body);
        }
        return m;
    }
};

}  // namespace

ast::Module parse_module(const std::string& source) {
    Parser p{tokenize(source)};
    return p.parse_module_body();
}

ast::ExprP parse_expression(const std::string& source) {
    Parser p{tokenize(source)};
    ExprP e = p.parse_testlist();
    return e;
}

}  // namespace snipex
