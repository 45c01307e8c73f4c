#include "snipex/value.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace snipex {

namespace {

Value make(VK kind) {
    auto v = std::make_shared<Obj>();
    v->kind = kind;
    return v;
}

}  // namespace

Value make_none() {
    static Value none = make(VK::None);
    return none;
}

Value make_bool(bool v) {
    static Value t = [] { auto x = make(VK::Bool); x->b = true; x->i = 1; return x; }();
    static Value f = [] { auto x = make(VK::Bool); x->b = false; x->i = 0; return x; }();
    return v ? t : f;
}

Value make_int(long long v) {
    auto x = make(VK::Int);
    x->i = v;
    return x;
}

Value make_float(double v) {
    auto x = make(VK::Float);
    x->f = v;
    return x;
}

Value make_str(std::string v) {
    auto x = make(VK::Str);
    x->s = std::move(v);
    return x;
}

Value make_bytes(std::string v) {
    auto x = make(VK::Bytes);
    x->s = std::move(v);
    return x;
}

Value make_list(std::vector<Value> items) {
    auto x = make(VK::List);
    x->items = std::move(items);
    return x;
}

Value make_tuple(std::vector<Value> items) {
    auto x = make(VK::Tuple);
    x->items = std::move(items);
    return x;
}

Value make_set(std::vector<Value> items) {
    auto x = make(VK::Set);
    for (Value& v : items) {
        bool dup = false;
        for (const Value& existing : x->items) {
            if (py_eq(existing, v)) {
                dup = true;
                break;
            }
        }
        if (!dup) x->items.push_back(std::move(v));
    }
    return x;
}

Value make_dict() { return make(VK::Dict); }

Value make_builtin(std::string name, NativeFn fn) {
    auto x = make(VK::Builtin);
    x->s = std::move(name);
    x->native = std::move(fn);
    return x;
}

Value make_dummy() { return make(VK::Dummy); }

Value make_dummy_call() {
    auto x = make_builtin("DummyCall", [](Interp&, CallArgs&) { return make_dummy(); });
    x->b = true;  // marks the dummy-call placeholder
    return x;
}

Value make_dummy_resource() { return make(VK::DummyResource); }

Value make_module(std::string name) {
    auto x = make(VK::Module);
    x->s = std::move(name);
    return x;
}

bool truthy(const Value& v) {
    switch (v->kind) {
        case VK::None: return false;
        case VK::Bool: return v->b;
        case VK::Int: return v->i != 0;
        case VK::Float: return v->f != 0.0;
        case VK::Str:
        case VK::Bytes: return !v->s.empty();
        case VK::List:
        case VK::Tuple:
        case VK::Set:
        case VK::Array: return !v->items.empty();
        case VK::Dict:
        case VK::Frame: return !v->entries.empty();
        case VK::Range: {
            if (v->r_step > 0) return v->r_start < v->r_stop;
            return v->r_start > v->r_stop;
        }
        default: return true;
    }
}

bool is_callable(const Value& v) {
    switch (v->kind) {
        case VK::Builtin:
        case VK::Function:
        case VK::BoundMethod:
        case VK::Class:
        case VK::Dummy:
            return true;
        case VK::Instance: {
            for (Value c = v->cls; c;) {
                if (c->attrs.has("__call__")) return true;
                if (c->bases.empty()) break;
                c = c->bases[0];
            }
            return false;
        }
        default:
            return false;
    }
}

std::string type_name(const Value& v) {
    switch (v->kind) {
        case VK::None: return "NoneType";
        case VK::Bool: return "bool";
        case VK::Int: return "int";
        case VK::Float: return "float";
        case VK::Str: return "str";
        case VK::Bytes: return "bytes";
        case VK::List: return "list";
        case VK::Tuple: return "tuple";
        case VK::Dict: return "dict";
        case VK::Set: return "set";
        case VK::Range: return "range";
        case VK::Slice: return "slice";
        case VK::Builtin: return "builtin_function_or_method";
        case VK::Function: return "function";
        case VK::BoundMethod: return "method";
        case VK::Class: return "type";
        case VK::Instance: return v->cls ? v->cls->s : "object";
        case VK::Module: return "module";
        case VK::Dummy: return "DummyObject";
        case VK::DummyResource: return "DummyResource";
        case VK::Tensor: return "Tensor";
        case VK::Array: return "ndarray";
        case VK::Frame: return "DataFrame";
        case VK::Iterator: return "iterator";
    }
    return "object";
}

bool is_dummy_family(const Value& v) {
    return v->kind == VK::Dummy || v->kind == VK::DummyResource ||
           (v->kind == VK::Builtin && v->b && v->s == "DummyCall");
}

namespace {

bool num_eq(const Value& a, const Value& b) {
    auto as_f = [](const Value& v) {
        return v->kind == VK::Float ? v->f : static_cast<double>(v->i);
    };
    if (a->kind == VK::Float || b->kind == VK::Float) return as_f(a) == as_f(b);
    return a->i == b->i;
}

bool is_num(const Value& v) {
    return v->kind == VK::Int || v->kind == VK::Bool || v->kind == VK::Float;
}

}  // namespace

bool py_eq(const Value& a, const Value& b) {
    if (a.get() == b.get()) return true;
    if (is_num(a) && is_num(b)) return num_eq(a, b);
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case VK::None: return true;
        case VK::Str:
        case VK::Bytes: return a->s == b->s;
        case VK::List:
        case VK::Tuple: {
            if (a->items.size() != b->items.size()) return false;
            for (size_t i = 0; i < a->items.size(); ++i)
                if (!py_eq(a->items[i], b->items[i])) return false;
            return true;
        }
        case VK::Set: {
            if (a->items.size() != b->items.size()) return false;
            for (const Value& x : a->items) {
                bool found = false;
                for (const Value& y : b->items)
                    if (py_eq(x, y)) {
                        found = true;
                        break;
                    }
                if (!found) return false;
            }
            return true;
        }
        case VK::Dict: {
            if (a->entries.size() != b->entries.size()) return false;
            for (const auto& [k, v] : a->entries) {
                size_t idx = dict_find(*b, k);
                if (idx == static_cast<size_t>(-1)) return false;
                if (!py_eq(v, b->entries[idx].second)) return false;
            }
            return true;
        }
        default:
            return false;  // identity-based kinds
    }
}

size_t dict_find(const Obj& dict, const Value& key) {
    for (size_t i = 0; i < dict.entries.size(); ++i)
        if (py_eq(dict.entries[i].first, key)) return i;
    return static_cast<size_t>(-1);
}

namespace {

std::string float_repr(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, end);
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos) s += ".0";
    return s;
}

std::string str_repr(const std::string& s, bool bytes) {
    bool has_single = s.find('\'') != std::string::npos;
    bool has_double = s.find('"') != std::string::npos;
    char quote = (has_single && !has_double) ? '"' : '\'';
    std::string out;
    if (bytes) out += 'b';
    out += quote;
    for (unsigned char c : s) {
        if (c == static_cast<unsigned char>(quote)) {
            out += '\\';
            out += quote;
        } else if (c == '\\') {
            out += "\\\\";
        } else if (c == '\n') {
            out += "\\n";
        } else if (c == '\t') {
            out += "\\t";
        } else if (c == '\r') {
            out += "\\r";
        } else if (c < 0x20 || c == 0x7f || (bytes && c >= 0x80)) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\x%02x", c);
            out += buf;
        } else {
            out += static_cast<char>(c);
        }
    }
    out += quote;
    return out;
}

}  // namespace

std::string repr(const Value& v) {
    switch (v->kind) {
        case VK::None: return "None";
        case VK::Bool: return v->b ? "True" : "False";
        case VK::Int: return std::to_string(v->i);
        case VK::Float: return float_repr(v->f);
        case VK::Str: return str_repr(v->s, false);
        case VK::Bytes: return str_repr(v->s, true);
        case VK::List: {
            std::string out = "[";
            for (size_t i = 0; i < v->items.size(); ++i) {
                if (i) out += ", ";
                out += repr(v->items[i]);
            }
            return out + "]";
        }
        case VK::Tuple: {
            std::string out = "(";
            for (size_t i = 0; i < v->items.size(); ++i) {
                if (i) out += ", ";
                out += repr(v->items[i]);
            }
            if (v->items.size() == 1) out += ",";
            return out + ")";
        }
        case VK::Set: {
            if (v->items.empty()) return "set()";
            std::string out = "{";
            for (size_t i = 0; i < v->items.size(); ++i) {
                if (i) out += ", ";
                out += repr(v->items[i]);
            }
            return out + "}";
        }
        case VK::Dict: {
            std::string out = "{";
            for (size_t i = 0; i < v->entries.size(); ++i) {
                if (i) out += ", ";
                out += repr(v->entries[i].first) + ": " + repr(v->entries[i].second);
            }
            return out + "}";
        }
        case VK::Range: {
            std::string out = "range(" + std::to_string(v->r_start) + ", " + std::to_string(v->r_stop);
            if (v->r_step != 1) out += ", " + std::to_string(v->r_step);
            return out + ")";
        }
        case VK::Slice:
            return "slice(...)";
        case VK::Builtin: return "<built-in function " + v->s + ">";
        case VK::Function: return "<function " + v->s + ">";
        case VK::BoundMethod: return "<bound method " + (v->func ? v->func->s : "?") + ">";
        case VK::Class: return "<class '" + v->s + "'>";
        case VK::Instance: return "<" + type_name(v) + " object>";
        case VK::Module: return "<module '" + v->s + "'>";
        case VK::Dummy: return "<DummyObject>";
        case VK::DummyResource: return "<DummyResource>";
        case VK::Tensor: {
            std::string out = "tensor(";
            if (!v->items.empty()) out += repr(v->items[0]);
            return out + ")";
        }
        case VK::Array: {
            std::string out = "array([";
            for (size_t i = 0; i < v->items.size(); ++i) {
                if (i) out += ", ";
                out += repr(v->items[i]);
            }
            return out + "])";
        }
        case VK::Frame: {
            std::string out = "DataFrame({";
            for (size_t i = 0; i < v->entries.size(); ++i) {
                if (i) out += ", ";
                out += repr(v->entries[i].first) + ": " + repr(v->entries[i].second);
            }
            return out + "})";
        }
        case VK::Iterator: return "<iterator>";
    }
    return "<object>";
}

std::string str_of(const Value& v) {
    if (v->kind == VK::Str) return v->s;
    return repr(v);
}

}  // namespace snipex
