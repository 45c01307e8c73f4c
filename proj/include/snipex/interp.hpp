#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>

#include "snipex/ast.hpp"
#include "snipex/value.hpp"

namespace snipex {

struct Env {
    EnvP parent;  // lexical chain (function frames and class bodies)
    NameTable slots;
    bool is_function = false;
    bool is_class = false;
    std::shared_ptr<std::vector<std::string>> local_names;
    std::shared_ptr<std::vector<std::string>> global_decls;

    bool is_local(const std::string& n) const {
        if (!local_names) return false;
        for (const std::string& x : *local_names)
            if (x == n) return true;
        return false;
    }
    bool is_global_decl(const std::string& n) const {
        if (!global_decls) return false;
        for (const std::string& x : *global_decls)
            if (x == n) return true;
        return false;
    }
};

// A raised subject-language exception (carries the exception instance).
struct PyRaise {
    Value exc;
    int line = 0;
};

// Wall-clock budget exceeded.
struct TimeoutSignal {};

// Coverage events collected while executing. `spans` maps a statement start
// line to its last physical line in the original source so multi-line
// statements credit all the lines they occupy.
struct Trace {
    std::set<int> lines;
    std::set<std::string> branches;
    int last_line = 0;
    const std::map<int, int>* spans = nullptr;

    void credit(int line) {
        if (line <= 0) return;
        last_line = line;
        int end = line;
        if (spans) {
            auto it = spans->find(line);
            if (it != spans->end() && it->second > end) end = it->second;
        }
        for (int l = line; l <= end; ++l) lines.insert(l);
    }
    void credit_point(int line) {
        if (line <= 0) return;
        last_line = line;
        lines.insert(line);
    }
    void touch(int line) {
        if (line > 0) last_line = line;
    }
    void branch(const std::string& id) { branches.insert(id); }
};

class Interp {
public:
    struct Options {
        double timeout_s = 10.0;
        int max_depth = 200;
        bool third_party_modules = true;  // torch / numpy / pandas shims
    };

    Interp() : Interp(Options{}) {}
    explicit Interp(Options opt);
    ~Interp();

    EnvP globals() { return genv_; }
    std::string& out() { return stdout_; }
    Trace& trace() { return trace_; }

    void register_builtin(const std::string& name, Value v);
    Value builtin(const std::string& name) const;

    // Runs a module body in the global namespace. PyRaise and TimeoutSignal
    // escape to the caller. The module is retained: function values keep
    // pointers into their defining AST.
    void exec_module(std::shared_ptr<const ast::Module> m);

    // Parses and executes source in the global namespace (checker / injected
    // definition code). Throws ParseError on bad input.
    void exec_source(const std::string& code);

    // Execution primitives reused by the hooks and the value checker.
    Value eval_in(const ast::Expr& e, const EnvP& env);
    void exec_block_in(const ast::Block& b, const EnvP& env);
    Value eval_source_expr(const std::string& expr_text);

    Value call_value(const Value& callee, CallArgs args, int line);
    Value getattr_value(const Value& base, const std::string& attr, int line);
    void setattr_value(const Value& base, const std::string& attr, Value v, int line);
    Value subscript_get(const Value& base, const Value& index, int line);

    Value make_iterator(const Value& v, int line);
    std::optional<Value> iterator_next(const Value& it, int line);
    std::vector<Value> iterate_all(const Value& v, int line);

    Value str_value(const Value& v);
    Value repr_value(const Value& v);
    bool py_lt(const Value& a, const Value& b, int line);

    // Exception utilities.
    [[noreturn]] void raise_error(const std::string& cls, const std::string& msg, int line);
    Value exception_class(const std::string& name) const;
    bool isinstance_of(const Value& v, const Value& cls) const;
    bool exception_matches(const Value& exc, const std::string& class_name) const;
    static std::string exception_class_name(const Value& exc);
    static std::string exception_message(const Value& exc);
    // "NameError: name 'x' is not defined"
    static std::string format_exception(const Value& exc);

    int current_line() const { return cur_line_; }
    void reset_deadline();

private:
    friend struct Evaluator;
    struct Impl;
    std::unique_ptr<Impl> impl_;
    EnvP genv_;
    std::string stdout_;
    Trace trace_;
    Options opt_;
    std::chrono::steady_clock::time_point deadline_;
    long long op_counter_ = 0;
    int depth_ = 0;
    int cur_line_ = 0;
};

// Implemented in builtins.cpp: per-kind methods on built-in values (returns
// null when the kind has no such method), the global builtin table, and the
// bundled module shims (os, sys, math, torch, numpy, pandas).
Value lookup_builtin_method(Interp& interp, const Value& base, const std::string& attr);
void install_global_builtins(Interp& interp);
Value build_module(Interp& interp, const std::string& name, bool third_party);

}  // namespace snipex
