#include "snipex/instrument.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "snipex/errors.hpp"
#include "snipex/lexer.hpp"
#include "snipex/parser.hpp"
#include "snipex/unparse.hpp"

namespace snipex {

using namespace ast;

const char* hook_kind_name(HookKind k) {
    switch (k) {
        case HookKind::variable_read: return "variable_read";
        case HookKind::attribute_read: return "attribute_read";
        case HookKind::call: return "call";
    }
    return "?";
}

const char* hook_kind_display(HookKind k) {
    switch (k) {
        case HookKind::variable_read: return "variable";
        case HookKind::attribute_read: return "attribute";
        case HookKind::call: return "function";
    }
    return "?";
}

SourceSnippet SourceSnippet::from_text(std::string text, std::string origin) {
    SourceSnippet s;
    s.text = std::move(text);
    s.origin = std::move(origin);
    s.line_count = static_cast<int>(countable_lines(s.text).size());
    return s;
}

SourceSnippet SourceSnippet::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str(), path);
}

namespace {

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    lines.push_back(cur);
    return lines;
}

std::string strip(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Rewriter {
    std::vector<std::string> lines;
    int next_iid = 1;
    std::map<int, HookSite>* sites;

    int add_site(HookKind kind, const std::string& name, int line) {
        HookSite site;
        site.iid = next_iid++;
        site.kind = kind;
        site.name = name;
        site.line_no = line;
        if (line >= 1 && line <= static_cast<int>(lines.size()))
            site.original_line_text = strip(lines[line - 1]);
        (*sites)[site.iid] = site;
        return site.iid;
    }

    template <class T>
    ExprP mk(const Expr& src, T&& node) {
        auto e = std::make_shared<Expr>();
        e->line = src.line;
        e->col = src.col;
        e->end_line = src.end_line;
        e->node = std::forward<T>(node);
        return e;
    }

    // Store targets are left untouched end to end: wrapping a write position
    // would change binding semantics.
    ExprP store(const ExprP& e) { return e; }

    std::vector<CallArg> load_args(const std::vector<CallArg>& args) {
        std::vector<CallArg> out;
        out.reserve(args.size());
        for (const CallArg& a : args) {
            CallArg n = a;
            n.value = load(a.value);
            out.push_back(std::move(n));
        }
        return out;
    }

    ExprP load(const ExprP& ep) {
        if (!ep) return ep;
        const Expr& e = *ep;
        if (is<Name>(e)) {
            int iid = add_site(HookKind::variable_read, as<Name>(e).id, e.line);
            return mk(e, HookExpr{0, iid, as<Name>(e).id, ep, {}});
        }
        if (is<Attribute>(e)) {
            const auto& a = as<Attribute>(e);
            ExprP base = load(a.base);
            int iid = add_site(HookKind::attribute_read, a.attr, e.line);
            return mk(e, HookExpr{1, iid, a.attr, base, {}});
        }
        if (is<Call>(e)) {
            const auto& c = as<Call>(e);
            std::string name = "<expr>";
            if (is<Name>(*c.callee)) name = as<Name>(*c.callee).id;
            else if (is<Attribute>(*c.callee)) name = as<Attribute>(*c.callee).attr;
            ExprP callee = load(c.callee);
            std::vector<CallArg> args = load_args(c.args);
            int iid = add_site(HookKind::call, name, e.line);
            return mk(e, HookExpr{2, iid, name, callee, std::move(args)});
        }
        if (is<Subscript>(e)) {
            const auto& s = as<Subscript>(e);
            return mk(e, Subscript{load(s.base), load(s.index)});
        }
        if (is<SliceExpr>(e)) {
            const auto& s = as<SliceExpr>(e);
            return mk(e, SliceExpr{load(s.lower), load(s.upper), load(s.step)});
        }
        if (is<BinExpr>(e)) {
            const auto& b = as<BinExpr>(e);
            ExprP lhs = load(b.lhs);
            return mk(e, BinExpr{b.op, lhs, load(b.rhs)});
        }
        if (is<UnExpr>(e)) {
            const auto& u = as<UnExpr>(e);
            return mk(e, UnExpr{u.op, load(u.operand)});
        }
        if (is<BoolExpr>(e)) {
            const auto& b = as<BoolExpr>(e);
            BoolExpr n{b.is_and, {}};
            for (const ExprP& v : b.values) n.values.push_back(load(v));
            return mk(e, std::move(n));
        }
        if (is<CompareExpr>(e)) {
            const auto& c = as<CompareExpr>(e);
            CompareExpr n{load(c.first), c.ops, {}};
            for (const ExprP& v : c.rest) n.rest.push_back(load(v));
            return mk(e, std::move(n));
        }
        if (is<IfExpr>(e)) {
            const auto& x = as<IfExpr>(e);
            ExprP then = load(x.then);
            ExprP cond = load(x.cond);
            return mk(e, IfExpr{cond, then, load(x.orelse)});
        }
        if (is<ListExpr>(e)) {
            ListExpr n;
            for (const ExprP& v : as<ListExpr>(e).items) n.items.push_back(load(v));
            return mk(e, std::move(n));
        }
        if (is<TupleExpr>(e)) {
            TupleExpr n;
            for (const ExprP& v : as<TupleExpr>(e).items) n.items.push_back(load(v));
            return mk(e, std::move(n));
        }
        if (is<SetExpr>(e)) {
            SetExpr n;
            for (const ExprP& v : as<SetExpr>(e).items) n.items.push_back(load(v));
            return mk(e, std::move(n));
        }
        if (is<DictExpr>(e)) {
            const auto& d = as<DictExpr>(e);
            DictExpr n;
            for (size_t i = 0; i < d.keys.size(); ++i) {
                n.keys.push_back(load(d.keys[i]));
                n.values.push_back(load(d.values[i]));
            }
            return mk(e, std::move(n));
        }
        if (is<Comprehension>(e)) {
            const auto& c = as<Comprehension>(e);
            Comprehension n{c.kind, nullptr, nullptr, {}};
            for (const CompClause& cl : c.clauses) {
                CompClause nc{store(cl.target), load(cl.iter), {}};
                for (const ExprP& cond : cl.conds) nc.conds.push_back(load(cond));
                n.clauses.push_back(std::move(nc));
            }
            n.elt = load(c.elt);
            n.elt_value = load(c.elt_value);
            return mk(e, std::move(n));
        }
        if (is<Lambda>(e)) {
            const auto& l = as<Lambda>(e);
            Lambda n;
            for (const Param& p : l.params) {
                Param np = p;
                np.default_value = load(p.default_value);
                n.params.push_back(std::move(np));
            }
            n.body = load(l.body);
            return mk(e, std::move(n));
        }
        return ep;  // literals
    }

    Block block(const Block& b) {
        Block out;
        out.reserve(b.size());
        for (const StmtP& s : b) out.push_back(stmt(s));
        return out;
    }

    template <class T>
    StmtP mkstmt(const Stmt& src, T&& node) {
        auto s = std::make_shared<Stmt>();
        s->line = src.line;
        s->span_end = src.span_end;
        s->node = std::forward<T>(node);
        return s;
    }

    StmtP stmt(const StmtP& sp) {
        const Stmt& s = *sp;
        if (is<ExprStmt>(s)) return mkstmt(s, ExprStmt{load(as<ExprStmt>(s).value)});
        if (is<Assign>(s)) {
            const auto& a = as<Assign>(s);
            Assign n;
            for (const ExprP& t : a.targets) n.targets.push_back(store(t));
            n.value = load(a.value);
            return mkstmt(s, std::move(n));
        }
        if (is<AugAssign>(s)) {
            const auto& a = as<AugAssign>(s);
            return mkstmt(s, AugAssign{store(a.target), a.op, load(a.value)});
        }
        if (is<If>(s)) {
            const auto& n = as<If>(s);
            If out{load(n.cond), block(n.body), block(n.orelse), n.else_line};
            return mkstmt(s, std::move(out));
        }
        if (is<While>(s)) {
            const auto& n = as<While>(s);
            return mkstmt(s, While{load(n.cond), block(n.body)});
        }
        if (is<For>(s)) {
            const auto& n = as<For>(s);
            return mkstmt(s, For{store(n.target), load(n.iter), block(n.body)});
        }
        if (is<FuncDef>(s)) {
            const auto& n = as<FuncDef>(s);
            FuncDef out{n.name, {}, block(n.body)};
            for (const Param& p : n.params) {
                Param np = p;
                np.default_value = load(p.default_value);
                out.params.push_back(std::move(np));
            }
            return mkstmt(s, std::move(out));
        }
        if (is<ClassDef>(s)) {
            const auto& n = as<ClassDef>(s);
            ClassDef out{n.name, {}, block(n.body)};
            for (const ExprP& b : n.bases) out.bases.push_back(load(b));
            return mkstmt(s, std::move(out));
        }
        if (is<Return>(s)) return mkstmt(s, Return{load(as<Return>(s).value)});
        if (is<Raise>(s)) return mkstmt(s, Raise{load(as<Raise>(s).exc)});
        if (is<Try>(s)) {
            const auto& n = as<Try>(s);
            Try out;
            out.body = block(n.body);
            for (const ExceptHandler& h : n.handlers) {
                ExceptHandler nh{load(h.type), h.name, block(h.body), h.line};
                out.handlers.push_back(std::move(nh));
            }
            out.orelse = block(n.orelse);
            out.finalbody = block(n.finalbody);
            out.else_line = n.else_line;
            out.finally_line = n.finally_line;
            return mkstmt(s, std::move(out));
        }
        if (is<With>(s)) {
            const auto& n = as<With>(s);
            With out;
            for (const WithItem& item : n.items)
                out.items.push_back(WithItem{load(item.ctx), store(item.target)});
            out.body = block(n.body);
            return mkstmt(s, std::move(out));
        }
        if (is<Assert>(s)) {
            const auto& n = as<Assert>(s);
            return mkstmt(s, Assert{load(n.test), load(n.msg)});
        }
        // Import / FromImport / Global / Pass / Break / Continue / Delete
        return sp;
    }
};

void collect_spans(const Block& b, std::map<int, int>& spans) {
    for (const StmtP& sp : b) {
        const Stmt& s = *sp;
        auto it = spans.find(s.line);
        if (it == spans.end() || it->second < s.span_end) spans[s.line] = s.span_end;
        if (is<If>(s)) {
            collect_spans(as<If>(s).body, spans);
            collect_spans(as<If>(s).orelse, spans);
        } else if (is<While>(s)) {
            collect_spans(as<While>(s).body, spans);
        } else if (is<For>(s)) {
            collect_spans(as<For>(s).body, spans);
        } else if (is<FuncDef>(s)) {
            collect_spans(as<FuncDef>(s).body, spans);
        } else if (is<ClassDef>(s)) {
            collect_spans(as<ClassDef>(s).body, spans);
        } else if (is<Try>(s)) {
            const auto& t = as<Try>(s);
            collect_spans(t.body, spans);
            for (const ExceptHandler& h : t.handlers) collect_spans(h.body, spans);
            collect_spans(t.orelse, spans);
            collect_spans(t.finalbody, spans);
        } else if (is<With>(s)) {
            collect_spans(as<With>(s).body, spans);
        }
    }
}

struct BranchWalk {
    BranchTable table;
    std::map<int, int> ifexp_seq;

    void add(int line, const std::string& kind, int seq, const std::string& arm) {
        table.arms.push_back({branch_arm_id(line, kind, seq, arm), line, kind, arm});
    }

    void expr(ExprP& ep) {
        if (!ep) return;
        Expr& e = *ep;
        if (is<IfExpr>(e)) {
            auto& x = as<IfExpr>(e);
            x.seq = ifexp_seq[e.line]++;
            add(e.line, "ifexp", x.seq, "then");
            add(e.line, "ifexp", x.seq, "else");
            expr(x.cond);
            expr(x.then);
            expr(x.orelse);
            return;
        }
        if (is<Attribute>(e)) { expr(as<Attribute>(e).base); return; }
        if (is<Subscript>(e)) { expr(as<Subscript>(e).base); expr(as<Subscript>(e).index); return; }
        if (is<SliceExpr>(e)) {
            auto& s = as<SliceExpr>(e);
            expr(s.lower); expr(s.upper); expr(s.step);
            return;
        }
        if (is<Call>(e)) {
            auto& c = as<Call>(e);
            expr(c.callee);
            for (CallArg& a : c.args) expr(a.value);
            return;
        }
        if (is<BinExpr>(e)) { expr(as<BinExpr>(e).lhs); expr(as<BinExpr>(e).rhs); return; }
        if (is<UnExpr>(e)) { expr(as<UnExpr>(e).operand); return; }
        if (is<BoolExpr>(e)) {
            for (ExprP& v : as<BoolExpr>(e).values) expr(v);
            return;
        }
        if (is<CompareExpr>(e)) {
            auto& c = as<CompareExpr>(e);
            expr(c.first);
            for (ExprP& v : c.rest) expr(v);
            return;
        }
        if (is<ListExpr>(e)) { for (ExprP& v : as<ListExpr>(e).items) expr(v); return; }
        if (is<TupleExpr>(e)) { for (ExprP& v : as<TupleExpr>(e).items) expr(v); return; }
        if (is<SetExpr>(e)) { for (ExprP& v : as<SetExpr>(e).items) expr(v); return; }
        if (is<DictExpr>(e)) {
            auto& d = as<DictExpr>(e);
            for (size_t i = 0; i < d.keys.size(); ++i) {
                expr(d.keys[i]);
                expr(d.values[i]);
            }
            return;
        }
        if (is<Comprehension>(e)) {
            auto& c = as<Comprehension>(e);
            for (CompClause& cl : c.clauses) {
                expr(cl.iter);
                for (ExprP& cond : cl.conds) expr(cond);
            }
            expr(c.elt);
            expr(c.elt_value);
            return;
        }
        if (is<Lambda>(e)) {
            auto& l = as<Lambda>(e);
            for (Param& p : l.params) expr(p.default_value);
            expr(l.body);
            return;
        }
    }

    void block(Block& b) {
        for (StmtP& s : b) stmt(*s);
    }

    void stmt(Stmt& s) {
        if (is<If>(s)) {
            auto& n = as<If>(s);
            add(s.line, "if", 0, "then");
            add(s.line, "if", 0, "else");
            expr(n.cond);
            block(n.body);
            block(n.orelse);
            return;
        }
        if (is<While>(s)) {
            auto& n = as<While>(s);
            add(s.line, "loop", 0, "body");
            add(s.line, "loop", 0, "exit");
            expr(n.cond);
            block(n.body);
            return;
        }
        if (is<For>(s)) {
            auto& n = as<For>(s);
            add(s.line, "loop", 0, "body");
            add(s.line, "loop", 0, "exit");
            expr(n.iter);
            block(n.body);
            return;
        }
        if (is<Try>(s)) {
            auto& n = as<Try>(s);
            block(n.body);
            for (ExceptHandler& h : n.handlers) {
                add(h.line, "except", 0, "enter");
                expr(h.type);
                block(h.body);
            }
            block(n.orelse);
            block(n.finalbody);
            return;
        }
        if (is<ExprStmt>(s)) { expr(as<ExprStmt>(s).value); return; }
        if (is<Assign>(s)) {
            auto& a = as<Assign>(s);
            for (ExprP& t : a.targets) expr(t);
            expr(a.value);
            return;
        }
        if (is<AugAssign>(s)) {
            expr(as<AugAssign>(s).target);
            expr(as<AugAssign>(s).value);
            return;
        }
        if (is<FuncDef>(s)) {
            auto& f = as<FuncDef>(s);
            for (Param& p : f.params) expr(p.default_value);
            block(f.body);
            return;
        }
        if (is<ClassDef>(s)) {
            auto& c = as<ClassDef>(s);
            for (ExprP& b : c.bases) expr(b);
            block(c.body);
            return;
        }
        if (is<Return>(s)) { expr(as<Return>(s).value); return; }
        if (is<Raise>(s)) { expr(as<Raise>(s).exc); return; }
        if (is<With>(s)) {
            auto& w = as<With>(s);
            for (WithItem& item : w.items) expr(item.ctx);
            block(w.body);
            return;
        }
        if (is<Assert>(s)) {
            expr(as<Assert>(s).test);
            expr(as<Assert>(s).msg);
            return;
        }
    }
};

}  // namespace

std::string branch_arm_id(int line, const std::string& kind, int seq, const std::string& arm) {
    if (kind == "ifexp") return "L" + std::to_string(line) + ":ifexp" + std::to_string(seq) + ":" + arm;
    return "L" + std::to_string(line) + ":" + kind + ":" + arm;
}

InstrumentedProgram instrument(const SourceSnippet& snippet) {
    Module mod = parse_module(snippet.text);

    InstrumentedProgram out;
    out.original = snippet;
    collect_spans(mod.body, out.stmt_spans);

    Rewriter rw;
    rw.lines = split_lines(snippet.text);
    rw.sites = &out.sites;
    Module instrumented;
    instrumented.body = rw.block(mod.body);

    out.instrumented_text = unparse(instrumented);
    return out;
}

const HookSite& locate(const InstrumentedProgram& program, int iid) {
    auto it = program.sites.find(iid);
    if (it == program.sites.end()) throw UnknownIid(iid);
    return it->second;
}

BranchTable collect_branches(Module& module) {
    BranchWalk walk;
    walk.block(module.body);
    return walk.table;
}

BranchTable count_branches(const SourceSnippet& snippet) {
    Module mod = parse_module(snippet.text);
    return collect_branches(mod);
}

std::string InstrumentedProgram::site_map_json() const {
    nlohmann::json j;
    j["sites"] = nlohmann::json::array();
    for (const auto& [iid, site] : sites) {
        j["sites"].push_back({{"iid", site.iid},
                              {"kind", hook_kind_name(site.kind)},
                              {"name", site.name},
                              {"line", site.line_no},
                              {"text", site.original_line_text}});
    }
    return j.dump(2);
}

}  // namespace snipex
