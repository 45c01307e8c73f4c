#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace snipex {

class Interp;
struct Obj;
using Value = std::shared_ptr<Obj>;

enum class VK {
    None,
    Bool,
    Int,
    Float,
    Str,
    Bytes,
    List,
    Tuple,
    Dict,
    Set,
    Range,
    Slice,
    Builtin,      // native function
    Function,     // user def / lambda
    BoundMethod,  // self + function
    Class,        // user or builtin-exception class
    Instance,
    Module,
    Dummy,          // opaque placeholder: any attribute, callable, no operators
    DummyResource,  // context-manager placeholder with no-op read/write
    Tensor,
    Array,
    Frame,
    Iterator,
};

// Namespace table preserving insertion order (checker scans rely on it).
class NameTable {
public:
    bool has(const std::string& k) const { return index_.count(k) > 0; }
    Value* find(const std::string& k) {
        auto it = index_.find(k);
        return it == index_.end() ? nullptr : &entries_[it->second].second;
    }
    const Value* find(const std::string& k) const {
        auto it = index_.find(k);
        return it == index_.end() ? nullptr : &entries_[it->second].second;
    }
    void set(const std::string& k, Value v) {
        auto it = index_.find(k);
        if (it == index_.end()) {
            index_[k] = entries_.size();
            entries_.emplace_back(k, std::move(v));
        } else {
            entries_[it->second].second = std::move(v);
        }
    }
    bool erase(const std::string& k) {
        auto it = index_.find(k);
        if (it == index_.end()) return false;
        entries_[it->second].second = nullptr;  // tombstone keeps indices stable
        index_.erase(it);
        return true;
    }
    const std::vector<std::pair<std::string, Value>>& entries() const { return entries_; }

private:
    std::vector<std::pair<std::string, Value>> entries_;
    std::unordered_map<std::string, size_t> index_;
};

struct CallArgs {
    std::vector<Value> pos;
    std::vector<std::pair<std::string, Value>> kw;
};

using NativeFn = std::function<Value(Interp&, CallArgs&)>;

namespace ast {
struct Expr;
struct Stmt;
struct Param;
}  // namespace ast

struct Env;
using EnvP = std::shared_ptr<Env>;

struct FunctionInfo {
    std::string name;
    const void* code = nullptr;  // FuncDef body block or Lambda body expr
    bool is_lambda = false;
    std::vector<Value> defaults;          // evaluated at definition time
    const std::vector<ast::Param>* params = nullptr;
    EnvP closure;
    std::shared_ptr<std::vector<std::string>> local_names;   // assigned-in-body scan
    std::shared_ptr<std::vector<std::string>> global_decls;  // `global` declarations
    std::shared_ptr<const void> owner;  // keeps the defining AST alive across interpreters
};

struct Obj {
    VK kind = VK::None;

    bool b = false;
    long long i = 0;
    double f = 0.0;
    std::string s;  // str/bytes payload; name for functions, classes, modules

    std::vector<Value> items;                      // list/tuple/set/array elements
    std::vector<std::pair<Value, Value>> entries;  // dict entries, insertion-ordered

    long long r_start = 0, r_stop = 0, r_step = 1;  // range / slice bounds
    bool slice_has_start = false, slice_has_stop = false, slice_has_step = false;

    NativeFn native;
    std::shared_ptr<FunctionInfo> fn;

    Value self;  // bound method receiver
    Value func;  // bound method target

    std::vector<Value> bases;  // class bases
    NameTable attrs;           // class dict / instance dict / module dict
    Value cls;                 // instance's class

    // iterator state
    Value iter_src;
    size_t iter_pos = 0;
    long long iter_cur = 0;

    std::vector<long long> shape;  // tensor shape
};

// ---- constructors ----
Value make_none();
Value make_bool(bool v);
Value make_int(long long v);
Value make_float(double v);
Value make_str(std::string v);
Value make_bytes(std::string v);
Value make_list(std::vector<Value> items = {});
Value make_tuple(std::vector<Value> items = {});
Value make_set(std::vector<Value> items = {});
Value make_dict();
Value make_builtin(std::string name, NativeFn fn);
Value make_dummy();
Value make_dummy_call();
Value make_dummy_resource();
Value make_module(std::string name);

// ---- inspection ----
bool truthy(const Value& v);
bool is_callable(const Value& v);
std::string type_name(const Value& v);  // Python-style: 'int', 'NoneType', class name
bool py_eq(const Value& a, const Value& b);
std::string repr(const Value& v);
std::string str_of(const Value& v);
bool is_dummy_family(const Value& v);

// Element lookup in a dict by Python equality. Returns entry index or npos.
size_t dict_find(const Obj& dict, const Value& key);

}  // namespace snipex
