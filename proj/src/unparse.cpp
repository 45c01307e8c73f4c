#include "snipex/unparse.hpp"

#include <cmath>
#include <charconv>
#include <cstdio>

namespace snipex {

using namespace ast;

namespace {

// Precedence levels, higher binds tighter.
constexpr int kPrecTest = 0;     // lambda, ternary
constexpr int kPrecOr = 2;
constexpr int kPrecAnd = 3;
constexpr int kPrecNot = 4;
constexpr int kPrecCmp = 5;
constexpr int kPrecBitOr = 6;
constexpr int kPrecBitXor = 7;
constexpr int kPrecBitAnd = 8;
constexpr int kPrecShift = 9;
constexpr int kPrecArith = 10;
constexpr int kPrecTerm = 11;
constexpr int kPrecUnary = 12;
constexpr int kPrecPower = 13;
constexpr int kPrecPostfix = 14;

struct OpInfo {
    const char* text;
    int prec;
};

OpInfo binop_info(BinOp op) {
    switch (op) {
        case BinOp::Add: return {"+", kPrecArith};
        case BinOp::Sub: return {"-", kPrecArith};
        case BinOp::Mul: return {"*", kPrecTerm};
        case BinOp::Div: return {"/", kPrecTerm};
        case BinOp::FloorDiv: return {"//", kPrecTerm};
        case BinOp::Mod: return {"%", kPrecTerm};
        case BinOp::Pow: return {"**", kPrecPower};
        case BinOp::LShift: return {"<<", kPrecShift};
        case BinOp::RShift: return {">>", kPrecShift};
        case BinOp::BitAnd: return {"&", kPrecBitAnd};
        case BinOp::BitOr: return {"|", kPrecBitOr};
        case BinOp::BitXor: return {"^", kPrecBitXor};
    }
    return {"?", 0};
}

const char* cmp_text(CmpOp op) {
    switch (op) {
        case CmpOp::Eq: return "==";
        case CmpOp::Ne: return "!=";
        case CmpOp::Lt: return "<";
        case CmpOp::Le: return "<=";
        case CmpOp::Gt: return ">";
        case CmpOp::Ge: return ">=";
        case CmpOp::Is: return "is";
        case CmpOp::IsNot: return "is not";
        case CmpOp::In: return "in";
        case CmpOp::NotIn: return "not in";
    }
    return "?";
}

std::string quote_string(const std::string& s, bool bytes) {
    std::string out = bytes ? "b\"" : "\"";
    for (unsigned char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (c < 0x20 || c == 0x7f) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\x%02x", c);
                    out += buf;
                } else {
                    out += static_cast<char>(c);
                }
        }
    }
    out += '"';
    return out;
}

std::string float_text(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, end);
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
        s += ".0";
    return s;
}

struct ExprWriter {
    std::string render(const Expr& e, int parent_prec) const {
        auto [text, prec] = render_raw(e);
        if (prec < parent_prec) return "(" + text + ")";
        return text;
    }

    std::string params_text(const std::vector<Param>& params) const {
        std::string out;
        for (size_t i = 0; i < params.size(); ++i) {
            if (i) out += ", ";
            const Param& p = params[i];
            if (p.star) out += "*";
            if (p.dstar) out += "**";
            out += p.name;
            if (p.default_value) out += "=" + render(*p.default_value, kPrecTest);
        }
        return out;
    }

    std::string call_args_text(const std::vector<CallArg>& args) const {
        std::string out;
        for (size_t i = 0; i < args.size(); ++i) {
            if (i) out += ", ";
            const CallArg& a = args[i];
            if (a.star) out += "*";
            if (a.dstar) out += "**";
            if (!a.keyword.empty()) out += a.keyword + "=";
            out += render(*a.value, kPrecTest);
        }
        return out;
    }

    std::pair<std::string, int> render_raw(const Expr& e) const {
        if (is<NoneLit>(e)) return {"None", kPrecPostfix};
        if (is<BoolLit>(e)) return {as<BoolLit>(e).value ? "True" : "False", kPrecPostfix};
        if (is<IntLit>(e)) return {std::to_string(as<IntLit>(e).value), kPrecPostfix};
        if (is<FloatLit>(e)) return {float_text(as<FloatLit>(e).value), kPrecPostfix};
        if (is<StrLit>(e)) return {quote_string(as<StrLit>(e).value, false), kPrecPostfix};
        if (is<BytesLit>(e)) return {quote_string(as<BytesLit>(e).value, true), kPrecPostfix};
        if (is<Name>(e)) return {as<Name>(e).id, kPrecPostfix};
        if (is<Attribute>(e)) {
            const auto& a = as<Attribute>(e);
            return {render(*a.base, kPrecPostfix) + "." + a.attr, kPrecPostfix};
        }
        if (is<Subscript>(e)) {
            const auto& s = as<Subscript>(e);
            return {render(*s.base, kPrecPostfix) + "[" + render(*s.index, kPrecTest) + "]",
                    kPrecPostfix};
        }
        if (is<SliceExpr>(e)) {
            const auto& s = as<SliceExpr>(e);
            std::string out;
            if (s.lower) out += render(*s.lower, kPrecTest);
            out += ":";
            if (s.upper) out += render(*s.upper, kPrecTest);
            if (s.step) out += ":" + render(*s.step, kPrecTest);
            return {out, kPrecTest};
        }
        if (is<Call>(e)) {
            const auto& c = as<Call>(e);
            return {render(*c.callee, kPrecPostfix) + "(" + call_args_text(c.args) + ")",
                    kPrecPostfix};
        }
        if (is<BinExpr>(e)) {
            const auto& b = as<BinExpr>(e);
            OpInfo info = binop_info(b.op);
            if (b.op == BinOp::Pow) {
                // Right associative; unary minus on the left needs parens.
                return {render(*b.lhs, kPrecPower + 1) + " " + info.text + " " +
                            render(*b.rhs, kPrecPower),
                        kPrecPower};
            }
            return {render(*b.lhs, info.prec) + " " + info.text + " " +
                        render(*b.rhs, info.prec + 1),
                    info.prec};
        }
        if (is<UnExpr>(e)) {
            const auto& u = as<UnExpr>(e);
            if (u.op == UnOp::Not) return {"not " + render(*u.operand, kPrecNot), kPrecNot};
            const char* sym = u.op == UnOp::Neg ? "-" : u.op == UnOp::Pos ? "+" : "~";
            return {sym + render(*u.operand, kPrecUnary), kPrecUnary};
        }
        if (is<BoolExpr>(e)) {
            const auto& b = as<BoolExpr>(e);
            int prec = b.is_and ? kPrecAnd : kPrecOr;
            std::string out;
            for (size_t i = 0; i < b.values.size(); ++i) {
                if (i) out += b.is_and ? " and " : " or ";
                out += render(*b.values[i], prec + 1);
            }
            return {out, prec};
        }
        if (is<CompareExpr>(e)) {
            const auto& c = as<CompareExpr>(e);
            std::string out = render(*c.first, kPrecCmp + 1);
            for (size_t i = 0; i < c.ops.size(); ++i) {
                out += std::string(" ") + cmp_text(c.ops[i]) + " " +
                       render(*c.rest[i], kPrecCmp + 1);
            }
            return {out, kPrecCmp};
        }
        if (is<IfExpr>(e)) {
            const auto& x = as<IfExpr>(e);
            return {render(*x.then, kPrecOr) + " if " + render(*x.cond, kPrecOr) + " else " +
                        render(*x.orelse, kPrecTest),
                    kPrecTest};
        }
        if (is<ListExpr>(e)) {
            const auto& l = as<ListExpr>(e);
            std::string out = "[";
            for (size_t i = 0; i < l.items.size(); ++i) {
                if (i) out += ", ";
                out += render(*l.items[i], kPrecTest);
            }
            return {out + "]", kPrecPostfix};
        }
        if (is<TupleExpr>(e)) {
            const auto& t = as<TupleExpr>(e);
            if (t.items.empty()) return {"()", kPrecPostfix};
            std::string out = "(";
            for (size_t i = 0; i < t.items.size(); ++i) {
                if (i) out += ", ";
                out += render(*t.items[i], kPrecTest);
            }
            if (t.items.size() == 1) out += ",";
            return {out + ")", kPrecPostfix};
        }
        if (is<SetExpr>(e)) {
            const auto& s = as<SetExpr>(e);
            std::string out = "{";
            for (size_t i = 0; i < s.items.size(); ++i) {
                if (i) out += ", ";
                out += render(*s.items[i], kPrecTest);
            }
            return {out + "}", kPrecPostfix};
        }
        if (is<DictExpr>(e)) {
            const auto& d = as<DictExpr>(e);
            std::string out = "{";
            for (size_t i = 0; i < d.keys.size(); ++i) {
                if (i) out += ", ";
                out += render(*d.keys[i], kPrecTest) + ": " + render(*d.values[i], kPrecTest);
            }
            return {out + "}", kPrecPostfix};
        }
        if (is<Comprehension>(e)) {
            const auto& c = as<Comprehension>(e);
            std::string body = render(*c.elt, kPrecOr);
            if (c.kind == 2) body += ": " + render(*c.elt_value, kPrecTest);
            for (const CompClause& cl : c.clauses) {
                body += " for " + render(*cl.target, kPrecOr) + " in " + render(*cl.iter, kPrecOr);
                for (const ExprP& cond : cl.conds) body += " if " + render(*cond, kPrecOr);
            }
            switch (c.kind) {
                case 0: return {"[" + body + "]", kPrecPostfix};
                case 1: return {"{" + body + "}", kPrecPostfix};
                case 2: return {"{" + body + "}", kPrecPostfix};
                default: return {"(" + body + ")", kPrecPostfix};
            }
        }
        if (is<Lambda>(e)) {
            const auto& l = as<Lambda>(e);
            std::string out = "lambda";
            if (!l.params.empty()) out += " " + params_text(l.params);
            out += ": " + render(*l.body, kPrecTest);
            return {out, kPrecTest};
        }
        if (is<HookExpr>(e)) {
            const auto& h = as<HookExpr>(e);
            std::string out;
            switch (h.hook) {
                case 0:
                    out = "_n_(" + std::to_string(h.iid) + ", " + quote_string(h.name, false) +
                          ", lambda: " + render(*h.inner, kPrecTest) + ")";
                    break;
                case 1:
                    out = "_a_(" + std::to_string(h.iid) + ", " + render(*h.inner, kPrecTest) +
                          ", " + quote_string(h.name, false) + ")";
                    break;
                default:
                    out = "_c_(" + std::to_string(h.iid) + ", " + render(*h.inner, kPrecTest);
                    if (!h.args.empty()) out += ", " + call_args_text(h.args);
                    out += ")";
            }
            return {out, kPrecPostfix};
        }
        return {"<?>", kPrecPostfix};
    }
};

struct Writer {
    std::string out;
    int cur_line = 1;
    ExprWriter ew;

    void pad_to(int line) {
        while (cur_line < line) {
            out += '\n';
            ++cur_line;
        }
    }

    void emit_line(int line, int indent, const std::string& text) {
        pad_to(line);
        out += std::string(indent, ' ') + text + "\n";
        ++cur_line;
    }

    std::string expr(const Expr& e) const { return ew.render(e, kPrecTest); }

    std::string simple_text(const Stmt& s) const {
        if (is<ExprStmt>(s)) return expr(*as<ExprStmt>(s).value);
        if (is<Assign>(s)) {
            const auto& a = as<Assign>(s);
            std::string t;
            for (const ExprP& target : a.targets) t += render_target(*target) + " = ";
            return t + expr(*a.value);
        }
        if (is<AugAssign>(s)) {
            const auto& a = as<AugAssign>(s);
            return render_target(*a.target) + " " + binop_info(a.op).text + "= " + expr(*a.value);
        }
        if (is<Return>(s)) {
            const auto& r = as<Return>(s);
            return r.value ? "return " + expr(*r.value) : "return";
        }
        if (is<Raise>(s)) {
            const auto& r = as<Raise>(s);
            return r.exc ? "raise " + expr(*r.exc) : "raise";
        }
        if (is<Pass>(s)) return "pass";
        if (is<Break>(s)) return "break";
        if (is<Continue>(s)) return "continue";
        if (is<Import>(s)) {
            std::string t = "import ";
            const auto& names = as<Import>(s).names;
            for (size_t i = 0; i < names.size(); ++i) {
                if (i) t += ", ";
                t += names[i].first;
                if (!names[i].second.empty()) t += " as " + names[i].second;
            }
            return t;
        }
        if (is<FromImport>(s)) {
            const auto& f = as<FromImport>(s);
            std::string t = "from " + f.module + " import ";
            for (size_t i = 0; i < f.names.size(); ++i) {
                if (i) t += ", ";
                t += f.names[i].first;
                if (!f.names[i].second.empty()) t += " as " + f.names[i].second;
            }
            return t;
        }
        if (is<Global>(s)) {
            std::string t = "global ";
            const auto& names = as<Global>(s).names;
            for (size_t i = 0; i < names.size(); ++i) {
                if (i) t += ", ";
                t += names[i];
            }
            return t;
        }
        if (is<Assert>(s)) {
            const auto& a = as<Assert>(s);
            std::string t = "assert " + expr(*a.test);
            if (a.msg) t += ", " + expr(*a.msg);
            return t;
        }
        if (is<Delete>(s)) {
            const auto& d = as<Delete>(s);
            std::string t = "del ";
            for (size_t i = 0; i < d.targets.size(); ++i) {
                if (i) t += ", ";
                t += render_target(*d.targets[i]);
            }
            return t;
        }
        return "pass";
    }

    // Assignment targets render without the always-parenthesize-tuple rule so
    // that `a, b = v` round-trips naturally.
    std::string render_target(const Expr& e) const {
        if (is<TupleExpr>(e)) {
            const auto& t = as<TupleExpr>(e);
            if (t.items.empty()) return "()";
            std::string out;
            for (size_t i = 0; i < t.items.size(); ++i) {
                if (i) out += ", ";
                out += ew.render(*t.items[i], kPrecTest);
            }
            if (t.items.size() == 1) out += ",";
            return out;
        }
        return ew.render(e, kPrecTest);
    }

    bool is_compound(const Stmt& s) const {
        return is<If>(s) || is<While>(s) || is<For>(s) || is<FuncDef>(s) || is<ClassDef>(s) ||
               is<Try>(s) || is<With>(s);
    }

    void emit_suite(int header_line, int indent, const std::string& header, const Block& body) {
        bool inline_suite = !body.empty();
        for (const StmtP& st : body) {
            if (st->line != header_line || is_compound(*st)) inline_suite = false;
        }
        if (inline_suite) {
            std::string text = header + ": ";
            for (size_t i = 0; i < body.size(); ++i) {
                if (i) text += "; ";
                text += simple_text(*body[i]);
            }
            emit_line(header_line, indent, text);
            return;
        }
        emit_line(header_line, indent, header + ":");
        emit_block(body, indent + 4);
    }

    void emit_stmt(const Stmt& s, int indent) {
        if (is<If>(s)) {
            emit_if(s, as<If>(s), indent);
            return;
        }
        if (is<While>(s)) {
            const auto& w = as<While>(s);
            emit_suite(s.line, indent, "while " + expr(*w.cond), w.body);
            return;
        }
        if (is<For>(s)) {
            const auto& f = as<For>(s);
            emit_suite(s.line, indent,
                       "for " + render_target(*f.target) + " in " + expr(*f.iter), f.body);
            return;
        }
        if (is<FuncDef>(s)) {
            const auto& d = as<FuncDef>(s);
            emit_suite(s.line, indent, "def " + d.name + "(" + ew.params_text(d.params) + ")",
                       d.body);
            return;
        }
        if (is<ClassDef>(s)) {
            const auto& c = as<ClassDef>(s);
            std::string header = "class " + c.name;
            if (!c.bases.empty()) {
                header += "(";
                for (size_t i = 0; i < c.bases.size(); ++i) {
                    if (i) header += ", ";
                    header += expr(*c.bases[i]);
                }
                header += ")";
            }
            emit_suite(s.line, indent, header, c.body);
            return;
        }
        if (is<Try>(s)) {
            const auto& t = as<Try>(s);
            emit_suite(s.line, indent, "try", t.body);
            for (const ExceptHandler& h : t.handlers) {
                std::string header = "except";
                if (h.type) {
                    header += " " + expr(*h.type);
                    if (!h.name.empty()) header += " as " + h.name;
                }
                emit_suite(h.line, indent, header, h.body);
            }
            if (!t.orelse.empty()) emit_suite(t.else_line, indent, "else", t.orelse);
            if (!t.finalbody.empty()) emit_suite(t.finally_line, indent, "finally", t.finalbody);
            return;
        }
        if (is<With>(s)) {
            const auto& w = as<With>(s);
            std::string header = "with ";
            for (size_t i = 0; i < w.items.size(); ++i) {
                if (i) header += ", ";
                header += expr(*w.items[i].ctx);
                if (w.items[i].target) header += " as " + ew.render(*w.items[i].target, kPrecTest);
            }
            emit_suite(s.line, indent, header, w.body);
            return;
        }
        emit_line(s.line, indent, simple_text(s));
    }

    void emit_if(const Stmt& s, const If& node, int indent, bool as_elif = false) {
        emit_suite_header_only(s.line, indent, (as_elif ? "elif " : "if ") + expr(*node.cond),
                               node.body);
        if (node.orelse.empty()) return;
        // elif chain: single nested If sitting exactly on the recorded else line
        if (node.orelse.size() == 1 && is<If>(*node.orelse[0]) &&
            node.else_line == node.orelse[0]->line) {
            emit_if(*node.orelse[0], as<If>(*node.orelse[0]), indent, true);
            return;
        }
        emit_suite(node.else_line, indent, "else", node.orelse);
    }

    void emit_suite_header_only(int line, int indent, const std::string& header,
                                const Block& body) {
        emit_suite(line, indent, header, body);
    }

    void emit_block(const Block& body, int indent) {
        for (const StmtP& st : body) emit_stmt(*st, indent);
    }
};

}  // namespace

std::string unparse(const Module& module) {
    Writer w;
    w.emit_block(module.body, 0);
    return w.out;
}

std::string unparse_expr(const Expr& expr) {
    ExprWriter ew;
    return ew.render(expr, kPrecTest);
}

}  // namespace snipex
