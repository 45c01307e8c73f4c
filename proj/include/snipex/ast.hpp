#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace snipex::ast {

struct Expr;
struct Stmt;
using ExprP = std::shared_ptr<Expr>;
using StmtP = std::shared_ptr<Stmt>;
using Block = std::vector<StmtP>;

enum class BinOp { Add, Sub, Mul, Div, FloorDiv, Mod, Pow, LShift, RShift, BitAnd, BitOr, BitXor };
enum class UnOp { Neg, Pos, Invert, Not };
enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge, Is, IsNot, In, NotIn };

// ---- expressions ----

struct NoneLit {};
struct BoolLit { bool value; };
struct IntLit { long long value; };
struct FloatLit { double value; };
struct StrLit { std::string value; };
struct BytesLit { std::string value; };

struct Name { std::string id; };
struct Attribute { ExprP base; std::string attr; };
struct Subscript { ExprP base; ExprP index; };
struct SliceExpr { ExprP lower, upper, step; };  // any may be null

struct CallArg {
    std::string keyword;  // empty for positional
    bool star = false;    // *expr
    bool dstar = false;   // **expr
    ExprP value;
};
struct Call { ExprP callee; std::vector<CallArg> args; };

struct BinExpr { BinOp op; ExprP lhs, rhs; };
struct UnExpr { UnOp op; ExprP operand; };
struct BoolExpr { bool is_and; std::vector<ExprP> values; };
struct CompareExpr { ExprP first; std::vector<CmpOp> ops; std::vector<ExprP> rest; };
// seq numbers conditional expressions within their line (set by the branch
// walk) so that arm ids stay unique and stable across reparses.
struct IfExpr { ExprP cond, then, orelse; int seq = -1; };

struct ListExpr { std::vector<ExprP> items; };
struct TupleExpr { std::vector<ExprP> items; };
struct SetExpr { std::vector<ExprP> items; };
struct DictExpr { std::vector<ExprP> keys, values; };

struct CompClause { ExprP target; ExprP iter; std::vector<ExprP> conds; };
// kind: 0 list, 1 set, 2 dict, 3 generator (evaluated eagerly)
struct Comprehension { int kind; ExprP elt; ExprP elt_value; std::vector<CompClause> clauses; };

struct Param {
    std::string name;
    ExprP default_value;  // may be null
    bool star = false;    // *args
    bool dstar = false;   // **kwargs
};
struct Lambda { std::vector<Param> params; ExprP body; };

// Hook-call wrapper inserted by the instrumenter. Kept as an explicit node so
// passes can recognize hooks without string matching; renders as a plain call.
struct HookExpr {
    int hook;  // 0 = _n_, 1 = _a_, 2 = _c_
    int iid;
    std::string name;           // element name ("Var2" / attr / callee name)
    ExprP inner;                // _n_: thunk-free original name expr; _a_/_c_: wrapped base/callee
    std::vector<CallArg> args;  // _c_ only: instrumented call arguments
};

struct Expr {
    int line = 0;
    int col = 0;
    int end_line = 0;
    std::variant<NoneLit, BoolLit, IntLit, FloatLit, StrLit, BytesLit, Name, Attribute,
                 Subscript, SliceExpr, Call, BinExpr, UnExpr, BoolExpr, CompareExpr, IfExpr,
                 ListExpr, TupleExpr, SetExpr, DictExpr, Comprehension, Lambda, HookExpr>
        node;
};

// ---- statements ----

struct ExprStmt { ExprP value; };
struct Assign { std::vector<ExprP> targets; ExprP value; };
struct AugAssign { ExprP target; BinOp op; ExprP value; };
struct If { ExprP cond; Block body; Block orelse; int else_line = 0; };
struct While { ExprP cond; Block body; };
struct For { ExprP target; ExprP iter; Block body; };
struct FuncDef { std::string name; std::vector<Param> params; Block body; };
struct ClassDef { std::string name; std::vector<ExprP> bases; Block body; };
struct Return { ExprP value; };  // may be null
struct Raise { ExprP exc; };     // null = bare re-raise
struct ExceptHandler { ExprP type; std::string name; Block body; int line = 0; };
struct Try {
    Block body;
    std::vector<ExceptHandler> handlers;
    Block orelse;
    Block finalbody;
    int else_line = 0;
    int finally_line = 0;
};
struct WithItem { ExprP ctx; ExprP target; };  // target may be null
struct With { std::vector<WithItem> items; Block body; };
struct Import { std::vector<std::pair<std::string, std::string>> names; };  // (module, asname)
struct FromImport { std::string module; std::vector<std::pair<std::string, std::string>> names; };
struct Global { std::vector<std::string> names; };
struct Pass {};
struct Break {};
struct Continue {};
struct Assert { ExprP test; ExprP msg; };
struct Delete { std::vector<ExprP> targets; };

struct Stmt {
    int line = 0;
    // Last physical line of the statement's own text: for simple statements
    // the full extent, for compound statements the end of the header clause.
    int span_end = 0;
    std::variant<ExprStmt, Assign, AugAssign, If, While, For, FuncDef, ClassDef, Return, Raise,
                 Try, With, Import, FromImport, Global, Pass, Break, Continue, Assert, Delete>
        node;
};

struct Module {
    Block body;
};

template <class T>
bool is(const Expr& e) {
    return std::holds_alternative<T>(e.node);
}
template <class T>
bool is(const Stmt& s) {
    return std::holds_alternative<T>(s.node);
}
template <class T>
T& as(Expr& e) {
    return std::get<T>(e.node);
}
template <class T>
const T& as(const Expr& e) {
    return std::get<T>(e.node);
}
template <class T>
T& as(Stmt& s) {
    return std::get<T>(s.node);
}
template <class T>
const T& as(const Stmt& s) {
    return std::get<T>(s.node);
}

}  // namespace snipex::ast
