#include <algorithm>
#include <cmath>

#include "snipex/interp.hpp"

namespace snipex {

namespace {

bool is_int_like(const Value& v) { return v->kind == VK::Int || v->kind == VK::Bool; }
bool numeric(const Value& v) { return is_int_like(v) || v->kind == VK::Float; }
long long as_ll(const Value& v) { return v->kind == VK::Bool ? (v->b ? 1 : 0) : v->i; }
double as_f(const Value& v) {
    return v->kind == VK::Float ? v->f : static_cast<double>(as_ll(v));
}

[[noreturn]] void arg_error(Interp& I, const std::string& fn, const std::string& what) {
    I.raise_error("TypeError", fn + "() " + what, 0);
}

Value arg_at(Interp& I, CallArgs& a, size_t i, const std::string& fn) {
    if (i >= a.pos.size())
        arg_error(I, fn, "missing required argument (" + std::to_string(i + 1) + " expected)");
    return a.pos[i];
}

Value kw_or(CallArgs& a, const std::string& name, Value def) {
    for (auto& [k, v] : a.kw)
        if (k == name) return v;
    return def;
}

long long int_arg(Interp& I, const Value& v, const std::string& fn) {
    if (!is_int_like(v))
        I.raise_error("TypeError",
                      "'" + type_name(v) + "' object cannot be interpreted as an integer", 0);
    return as_ll(v);
}

// ---------------------------------------------------------------- methods --

Value method(const std::string& name, NativeFn fn) { return make_builtin(name, std::move(fn)); }

Value str_method(Interp& interp, const Value& self, const std::string& attr) {
    const std::string& s = self->s;
    if (attr == "upper" || attr == "lower") {
        bool up = attr == "upper";
        return method(attr, [self, up](Interp&, CallArgs&) {
            std::string out = self->s;
            std::transform(out.begin(), out.end(), out.begin(),
                           [&](unsigned char c) { return up ? std::toupper(c) : std::tolower(c); });
            return make_str(out);
        });
    }
    if (attr == "capitalize") {
        return method(attr, [self](Interp&, CallArgs&) {
            std::string out = self->s;
            std::transform(out.begin(), out.end(), out.begin(),
                           [](unsigned char c) { return std::tolower(c); });
            if (!out.empty()) out[0] = std::toupper(static_cast<unsigned char>(out[0]));
            return make_str(out);
        });
    }
    if (attr == "strip" || attr == "lstrip" || attr == "rstrip") {
        bool left = attr != "rstrip", right = attr != "lstrip";
        return method(attr, [self, left, right](Interp& I, CallArgs& a) {
            std::string chars = " \t\n\r\v\f";
            if (!a.pos.empty() && a.pos[0]->kind == VK::Str) chars = a.pos[0]->s;
            std::string out = self->s;
            if (left) {
                size_t b = out.find_first_not_of(chars);
                out = b == std::string::npos ? "" : out.substr(b);
            }
            if (right) {
                size_t e = out.find_last_not_of(chars);
                out = e == std::string::npos ? "" : out.substr(0, e + 1);
            }
            return make_str(out);
        });
    }
    if (attr == "split") {
        return method(attr, [self](Interp& I, CallArgs& a) {
            std::vector<Value> parts;
            if (a.pos.empty() || a.pos[0]->kind == VK::None) {
                std::string cur;
                for (char c : self->s) {
                    if (std::isspace(static_cast<unsigned char>(c))) {
                        if (!cur.empty()) parts.push_back(make_str(cur));
                        cur.clear();
                    } else {
                        cur += c;
                    }
                }
                if (!cur.empty()) parts.push_back(make_str(cur));
            } else {
                if (a.pos[0]->kind != VK::Str)
                    I.raise_error("TypeError", "must be str or None", 0);
                const std::string& sep = a.pos[0]->s;
                if (sep.empty()) I.raise_error("ValueError", "empty separator", 0);
                size_t start = 0;
                while (true) {
                    size_t hit = self->s.find(sep, start);
                    if (hit == std::string::npos) {
                        parts.push_back(make_str(self->s.substr(start)));
                        break;
                    }
                    parts.push_back(make_str(self->s.substr(start, hit - start)));
                    start = hit + sep.size();
                }
            }
            return make_list(std::move(parts));
        });
    }
    if (attr == "join") {
        return method(attr, [self](Interp& I, CallArgs& a) {
            Value it = arg_at(I, a, 0, "join");
            std::string out;
            size_t i = 0;
            for (const Value& v : I.iterate_all(it, 0)) {
                if (v->kind != VK::Str)
                    I.raise_error("TypeError",
                                  "sequence item " + std::to_string(i) + ": expected str instance, " +
                                      type_name(v) + " found",
                                  0);
                if (i++) out += self->s;
                out += v->s;
            }
            return make_str(out);
        });
    }
    if (attr == "replace") {
        return method(attr, [self](Interp& I, CallArgs& a) {
            Value oldv = arg_at(I, a, 0, "replace");
            Value newv = arg_at(I, a, 1, "replace");
            if (oldv->kind != VK::Str || newv->kind != VK::Str)
                I.raise_error("TypeError", "replace() argument must be str", 0);
            if (oldv->s.empty()) return make_str(self->s);
            std::string out;
            size_t start = 0;
            while (true) {
                size_t hit = self->s.find(oldv->s, start);
                if (hit == std::string::npos) {
                    out += self->s.substr(start);
                    break;
                }
                out += self->s.substr(start, hit - start) + newv->s;
                start = hit + oldv->s.size();
            }
            return make_str(out);
        });
    }
    if (attr == "startswith" || attr == "endswith") {
        bool starts = attr == "startswith";
        return method(attr, [self, starts](Interp& I, CallArgs& a) {
            Value pre = arg_at(I, a, 0, starts ? "startswith" : "endswith");
            if (pre->kind != VK::Str)
                I.raise_error("TypeError", "argument must be str", 0);
            const std::string& s = self->s;
            const std::string& p = pre->s;
            if (p.size() > s.size()) return make_bool(false);
            return make_bool(starts ? s.compare(0, p.size(), p) == 0
                                    : s.compare(s.size() - p.size(), p.size(), p) == 0);
        });
    }
    if (attr == "find" || attr == "index") {
        bool raising = attr == "index";
        return method(attr, [self, raising](Interp& I, CallArgs& a) -> Value {
            Value sub = arg_at(I, a, 0, "find");
            size_t hit = self->s.find(sub->s);
            if (hit == std::string::npos) {
                if (raising) I.raise_error("ValueError", "substring not found", 0);
                return make_int(-1);
            }
            return make_int(static_cast<long long>(hit));
        });
    }
    if (attr == "count") {
        return method(attr, [self](Interp& I, CallArgs& a) {
            Value sub = arg_at(I, a, 0, "count");
            if (sub->s.empty()) return make_int(static_cast<long long>(self->s.size() + 1));
            long long n = 0;
            size_t start = 0;
            while ((start = self->s.find(sub->s, start)) != std::string::npos) {
                ++n;
                start += sub->s.size();
            }
            return make_int(n);
        });
    }
    if (attr == "isdigit" || attr == "isalpha" || attr == "isspace") {
        std::string which = attr;
        return method(attr, [self, which](Interp&, CallArgs&) {
            if (self->s.empty()) return make_bool(false);
            for (unsigned char c : self->s) {
                bool ok = which == "isdigit" ? std::isdigit(c) != 0
                          : which == "isalpha" ? std::isalpha(c) != 0
                                               : std::isspace(c) != 0;
                if (!ok) return make_bool(false);
            }
            return make_bool(true);
        });
    }
    if (attr == "encode") {
        return method(attr, [self](Interp&, CallArgs&) { return make_bytes(self->s); });
    }
    if (attr == "zfill") {
        return method(attr, [self](Interp& I, CallArgs& a) {
            long long width = int_arg(I, arg_at(I, a, 0, "zfill"), "zfill");
            std::string out = self->s;
            while (static_cast<long long>(out.size()) < width) out.insert(out.begin(), '0');
            return make_str(out);
        });
    }
    (void)interp;
    (void)s;
    return Value();
}

Value bytes_method(Interp& interp, const Value& self, const std::string& attr) {
    if (attr == "replace") {
        return method(attr, [self](Interp& I, CallArgs& a) {
            Value oldv = arg_at(I, a, 0, "replace");
            Value newv = arg_at(I, a, 1, "replace");
            // both arguments must themselves be bytes
            for (const Value& v : {oldv, newv}) {
                if (v->kind != VK::Bytes)
                    I.raise_error("TypeError",
                                  "a bytes-like object is required, not '" + type_name(v) + "'", 0);
            }
            if (oldv->s.empty()) return make_bytes(self->s);
            std::string out;
            size_t start = 0;
            while (true) {
                size_t hit = self->s.find(oldv->s, start);
                if (hit == std::string::npos) {
                    out += self->s.substr(start);
                    break;
                }
                out += self->s.substr(start, hit - start) + newv->s;
                start = hit + oldv->s.size();
            }
            return make_bytes(out);
        });
    }
    if (attr == "decode") {
        return method(attr, [self](Interp&, CallArgs&) { return make_str(self->s); });
    }
    if (attr == "startswith" || attr == "endswith") {
        bool starts = attr == "startswith";
        return method(attr, [self, starts](Interp& I, CallArgs& a) {
            Value pre = arg_at(I, a, 0, "startswith");
            if (pre->kind != VK::Bytes)
                I.raise_error("TypeError",
                              "a bytes-like object is required, not '" + type_name(pre) + "'", 0);
            const std::string& s = self->s;
            const std::string& p = pre->s;
            if (p.size() > s.size()) return make_bool(false);
            return make_bool(starts ? s.compare(0, p.size(), p) == 0
                                    : s.compare(s.size() - p.size(), p.size(), p) == 0);
        });
    }
    (void)interp;
    return Value();
}

Value list_method(Interp& interp, const Value& self, const std::string& attr) {
    if (attr == "append") {
        return method(attr, [self](Interp& I, CallArgs& a) {
            self->items.push_back(arg_at(I, a, 0, "append"));
            return make_none();
        });
    }
    if (attr == "extend") {
        return method(attr, [self](Interp& I, CallArgs& a) {
            for (Value& v : I.iterate_all(arg_at(I, a, 0, "extend"), 0))
                self->items.push_back(std::move(v));
            return make_none();
        });
    }
    if (attr == "insert") {
        return method(attr, [self](Interp& I, CallArgs& a) {
            long long idx = int_arg(I, arg_at(I, a, 0, "insert"), "insert");
            long long n = static_cast<long long>(self->items.size());
            if (idx < 0) idx = std::max(0LL, idx + n);
            idx = std::min(idx, n);
            self->items.insert(self->items.begin() + idx, arg_at(I, a, 1, "insert"));
            return make_none();
        });
    }
    if (attr == "pop") {
        return method(attr, [self](Interp& I, CallArgs& a) {
            if (self->items.empty()) I.raise_error("IndexError", "pop from empty list", 0);
            long long idx = a.pos.empty() ? static_cast<long long>(self->items.size()) - 1
                                          : int_arg(I, a.pos[0], "pop");
            if (idx < 0) idx += static_cast<long long>(self->items.size());
            if (idx < 0 || idx >= static_cast<long long>(self->items.size()))
                I.raise_error("IndexError", "pop index out of range", 0);
            Value v = self->items[idx];
            self->items.erase(self->items.begin() + idx);
            return v;
        });
    }
    if (attr == "remove") {
        return method(attr, [self](Interp& I, CallArgs& a) {
            Value target = arg_at(I, a, 0, "remove");
            for (size_t i = 0; i < self->items.size(); ++i) {
                if (py_eq(self->items[i], target)) {
                    self->items.erase(self->items.begin() + i);
                    return make_none();
                }
            }
            I.raise_error("ValueError", "list.remove(x): x not in list", 0);
        });
    }
    if (attr == "index" || attr == "count") {
        bool counting = attr == "count";
        return method(attr, [self, counting](Interp& I, CallArgs& a) -> Value {
            Value target = arg_at(I, a, 0, counting ? "count" : "index");
            long long n = 0;
            for (size_t i = 0; i < self->items.size(); ++i) {
                if (py_eq(self->items[i], target)) {
                    if (!counting) return make_int(static_cast<long long>(i));
                    ++n;
                }
            }
            if (counting) return make_int(n);
            I.raise_error("ValueError", repr(target) + " is not in list", 0);
        });
    }
    if (attr == "sort") {
        return method(attr, [self](Interp& I, CallArgs& a) {
            bool rev = truthy(kw_or(a, "reverse", make_bool(false)));
            std::stable_sort(self->items.begin(), self->items.end(),
                             [&](const Value& x, const Value& y) { return I.py_lt(x, y, 0); });
            if (rev) std::reverse(self->items.begin(), self->items.end());
            return make_none();
        });
    }
    if (attr == "reverse") {
        return method(attr, [self](Interp&, CallArgs&) {
            std::reverse(self->items.begin(), self->items.end());
            return make_none();
        });
    }
    if (attr == "clear") {
        return method(attr, [self](Interp&, CallArgs&) {
            self->items.clear();
            return make_none();
        });
    }
    if (attr == "copy") {
        return method(attr, [self](Interp&, CallArgs&) { return make_list(self->items); });
    }
    (void)interp;
    return Value();
}

Value dict_method(Interp& interp, const Value& self, const std::string& attr) {
    if (attr == "get") {
        return method(attr, [self](Interp& I, CallArgs& a) {
            Value key = arg_at(I, a, 0, "get");
            size_t idx = dict_find(*self, key);
            if (idx != static_cast<size_t>(-1)) return self->entries[idx].second;
            return a.pos.size() > 1 ? a.pos[1] : make_none();
        });
    }
    if (attr == "keys" || attr == "values") {
        bool keys = attr == "keys";
        return method(attr, [self, keys](Interp&, CallArgs&) {
            std::vector<Value> out;
            for (const auto& [k, v] : self->entries) out.push_back(keys ? k : v);
            return make_list(std::move(out));
        });
    }
    if (attr == "items") {
        return method(attr, [self](Interp&, CallArgs&) {
            std::vector<Value> out;
            for (const auto& [k, v] : self->entries) out.push_back(make_tuple({k, v}));
            return make_list(std::move(out));
        });
    }
    if (attr == "pop") {
        return method(attr, [self](Interp& I, CallArgs& a) {
            Value key = arg_at(I, a, 0, "pop");
            size_t idx = dict_find(*self, key);
            if (idx == static_cast<size_t>(-1)) {
                if (a.pos.size() > 1) return a.pos[1];
                I.raise_error("KeyError", repr(key), 0);
            }
            Value v = self->entries[idx].second;
            self->entries.erase(self->entries.begin() + idx);
            return v;
        });
    }
    if (attr == "update") {
        return method(attr, [self](Interp& I, CallArgs& a) {
            Value other = arg_at(I, a, 0, "update");
            if (other->kind != VK::Dict)
                I.raise_error("TypeError", "update() argument must be a dict", 0);
            for (const auto& [k, v] : other->entries) {
                size_t idx = dict_find(*self, k);
                if (idx == static_cast<size_t>(-1)) self->entries.emplace_back(k, v);
                else self->entries[idx].second = v;
            }
            return make_none();
        });
    }
    if (attr == "setdefault") {
        return method(attr, [self](Interp& I, CallArgs& a) {
            Value key = arg_at(I, a, 0, "setdefault");
            size_t idx = dict_find(*self, key);
            if (idx != static_cast<size_t>(-1)) return self->entries[idx].second;
            Value def = a.pos.size() > 1 ? a.pos[1] : make_none();
            self->entries.emplace_back(key, def);
            return def;
        });
    }
    if (attr == "clear") {
        return method(attr, [self](Interp&, CallArgs&) {
            self->entries.clear();
            return make_none();
        });
    }
    if (attr == "copy") {
        return method(attr, [self](Interp&, CallArgs&) {
            Value d = make_dict();
            d->entries = self->entries;
            return d;
        });
    }
    (void)interp;
    return Value();
}

Value set_method(Interp& interp, const Value& self, const std::string& attr) {
    if (attr == "add") {
        return method(attr, [self](Interp& I, CallArgs& a) {
            Value v = arg_at(I, a, 0, "add");
            for (const Value& x : self->items)
                if (py_eq(x, v)) return make_none();
            self->items.push_back(v);
            return make_none();
        });
    }
    if (attr == "remove" || attr == "discard") {
        bool raising = attr == "remove";
        return method(attr, [self, raising](Interp& I, CallArgs& a) {
            Value v = arg_at(I, a, 0, "remove");
            for (size_t i = 0; i < self->items.size(); ++i) {
                if (py_eq(self->items[i], v)) {
                    self->items.erase(self->items.begin() + i);
                    return make_none();
                }
            }
            if (raising) I.raise_error("KeyError", repr(v), 0);
            return make_none();
        });
    }
    if (attr == "union" || attr == "intersection" || attr == "difference") {
        std::string which = attr;
        return method(attr, [self, which](Interp& I, CallArgs& a) {
            std::vector<Value> other = I.iterate_all(arg_at(I, a, 0, which), 0);
            std::vector<Value> out;
            auto in_other = [&](const Value& x) {
                return std::any_of(other.begin(), other.end(),
                                   [&](const Value& y) { return py_eq(x, y); });
            };
            if (which == "union") {
                out = self->items;
                out.insert(out.end(), other.begin(), other.end());
            } else if (which == "intersection") {
                for (const Value& x : self->items)
                    if (in_other(x)) out.push_back(x);
            } else {
                for (const Value& x : self->items)
                    if (!in_other(x)) out.push_back(x);
            }
            return make_set(std::move(out));
        });
    }
    if (attr == "clear") {
        return method(attr, [self](Interp&, CallArgs&) {
            self->items.clear();
            return make_none();
        });
    }
    (void)interp;
    return Value();
}

Value tuple_method(Interp& interp, const Value& self, const std::string& attr) {
    if (attr == "index" || attr == "count") {
        bool counting = attr == "count";
        return method(attr, [self, counting](Interp& I, CallArgs& a) -> Value {
            Value target = arg_at(I, a, 0, counting ? "count" : "index");
            long long n = 0;
            for (size_t i = 0; i < self->items.size(); ++i) {
                if (py_eq(self->items[i], target)) {
                    if (!counting) return make_int(static_cast<long long>(i));
                    ++n;
                }
            }
            if (counting) return make_int(n);
            I.raise_error("ValueError", "tuple.index(x): x not in tuple", 0);
        });
    }
    (void)interp;
    return Value();
}

Value array_method(Interp& interp, const Value& self, const std::string& attr) {
    if (attr == "tolist") {
        return method(attr, [self](Interp&, CallArgs&) { return make_list(self->items); });
    }
    if (attr == "sum") {
        return method(attr, [self](Interp&, CallArgs&) {
            double total = 0;
            bool any_float = false;
            for (const Value& v : self->items) {
                if (v->kind == VK::Float) any_float = true;
                total += as_f(v);
            }
            return any_float ? make_float(total) : make_int(static_cast<long long>(total));
        });
    }
    (void)interp;
    return Value();
}

// ---------------------------------------------------------------- modules --

Value build_os(Interp& I) {
    Value os = make_module("os");
    Value path = make_module("os.path");
    path->attrs.set("abspath", make_builtin("abspath", [](Interp& I, CallArgs& a) {
        Value p = arg_at(I, a, 0, "abspath");
        if (p->kind != VK::Str) I.raise_error("TypeError", "expected str", 0);
        if (!p->s.empty() && p->s[0] == '/') return make_str(p->s);
        return make_str("/work/" + p->s);
    }));
    path->attrs.set("join", make_builtin("join", [](Interp& I, CallArgs& a) {
        std::string out;
        for (size_t i = 0; i < a.pos.size(); ++i) {
            const Value& p = a.pos[i];
            if (p->kind != VK::Str) I.raise_error("TypeError", "expected str", 0);
            if (!p->s.empty() && p->s[0] == '/') out = p->s;
            else if (out.empty() || out.back() == '/') out += p->s;
            else out += "/" + p->s;
        }
        return make_str(out);
    }));
    path->attrs.set("basename", make_builtin("basename", [](Interp& I, CallArgs& a) {
        const std::string& s = arg_at(I, a, 0, "basename")->s;
        size_t pos = s.find_last_of('/');
        return make_str(pos == std::string::npos ? s : s.substr(pos + 1));
    }));
    path->attrs.set("dirname", make_builtin("dirname", [](Interp& I, CallArgs& a) {
        const std::string& s = arg_at(I, a, 0, "dirname")->s;
        size_t pos = s.find_last_of('/');
        return make_str(pos == std::string::npos ? "" : s.substr(0, pos));
    }));
    path->attrs.set("exists", make_builtin("exists", [](Interp&, CallArgs&) {
        return make_bool(false);  // sandboxed: no real filesystem probing
    }));
    path->attrs.set("isfile", make_builtin("isfile", [](Interp&, CallArgs&) {
        return make_bool(false);
    }));
    os->attrs.set("path", path);
    os->attrs.set("sep", make_str("/"));
    os->attrs.set("linesep", make_str("\n"));
    os->attrs.set("name", make_str("posix"));
    os->attrs.set("environ", make_dict());
    os->attrs.set("getcwd", make_builtin("getcwd", [](Interp&, CallArgs&) {
        return make_str("/work");
    }));
    (void)I;
    return os;
}

Value build_sys(Interp& I) {
    Value sys = make_module("sys");
    sys->attrs.set("version", make_str("3.10.0 (embedded)"));
    sys->attrs.set("platform", make_str("linux"));
    sys->attrs.set("maxsize", make_int(9223372036854775807LL));
    sys->attrs.set("argv", make_list({make_str("snippet.py")}));
    sys->attrs.set("path", make_list({make_str("")}));
    Value stdout_obj = make_module("sys.stdout");
    stdout_obj->attrs.set("write", make_builtin("write", [](Interp& I, CallArgs& a) {
        Value s = arg_at(I, a, 0, "write");
        if (s->kind != VK::Str) I.raise_error("TypeError", "write() argument must be str", 0);
        I.out() += s->s;
        return make_int(static_cast<long long>(s->s.size()));
    }));
    stdout_obj->attrs.set("flush", make_builtin("flush", [](Interp&, CallArgs&) {
        return make_none();
    }));
    sys->attrs.set("stdout", stdout_obj);
    (void)I;
    return sys;
}

Value build_math(Interp& I) {
    Value m = make_module("math");
    m->attrs.set("pi", make_float(3.141592653589793));
    m->attrs.set("e", make_float(2.718281828459045));
    m->attrs.set("inf", make_float(HUGE_VAL));
    m->attrs.set("nan", make_float(NAN));
    auto unary = [&](const char* name, double (*fn)(double), bool domain_positive) {
        m->attrs.set(name, make_builtin(name, [fn, domain_positive, name](Interp& I, CallArgs& a) {
            Value v = arg_at(I, a, 0, name);
            if (!numeric(v))
                I.raise_error("TypeError", "must be real number, not " + type_name(v), 0);
            double x = as_f(v);
            if (domain_positive && x < 0) I.raise_error("ValueError", "math domain error", 0);
            return make_float(fn(x));
        }));
    };
    unary("sqrt", std::sqrt, true);
    unary("exp", std::exp, false);
    unary("sin", std::sin, false);
    unary("cos", std::cos, false);
    unary("tan", std::tan, false);
    unary("fabs", std::fabs, false);
    m->attrs.set("log", make_builtin("log", [](Interp& I, CallArgs& a) {
        double x = as_f(arg_at(I, a, 0, "log"));
        if (x <= 0) I.raise_error("ValueError", "math domain error", 0);
        if (a.pos.size() > 1) return make_float(std::log(x) / std::log(as_f(a.pos[1])));
        return make_float(std::log(x));
    }));
    m->attrs.set("floor", make_builtin("floor", [](Interp& I, CallArgs& a) {
        return make_int(static_cast<long long>(std::floor(as_f(arg_at(I, a, 0, "floor")))));
    }));
    m->attrs.set("ceil", make_builtin("ceil", [](Interp& I, CallArgs& a) {
        return make_int(static_cast<long long>(std::ceil(as_f(arg_at(I, a, 0, "ceil")))));
    }));
    m->attrs.set("pow", make_builtin("pow", [](Interp& I, CallArgs& a) {
        return make_float(std::pow(as_f(arg_at(I, a, 0, "pow")), as_f(arg_at(I, a, 1, "pow"))));
    }));
    m->attrs.set("isnan", make_builtin("isnan", [](Interp& I, CallArgs& a) {
        Value v = arg_at(I, a, 0, "isnan");
        return make_bool(v->kind == VK::Float && std::isnan(v->f));
    }));
    m->attrs.set("isinf", make_builtin("isinf", [](Interp& I, CallArgs& a) {
        Value v = arg_at(I, a, 0, "isinf");
        return make_bool(v->kind == VK::Float && std::isinf(v->f));
    }));
    m->attrs.set("factorial", make_builtin("factorial", [](Interp& I, CallArgs& a) {
        long long n = int_arg(I, arg_at(I, a, 0, "factorial"), "factorial");
        if (n < 0) I.raise_error("ValueError", "factorial() not defined for negative values", 0);
        long long out = 1;
        for (long long k = 2; k <= n; ++k) out *= k;
        return make_int(out);
    }));
    m->attrs.set("gcd", make_builtin("gcd", [](Interp& I, CallArgs& a) {
        long long x = std::llabs(int_arg(I, arg_at(I, a, 0, "gcd"), "gcd"));
        long long y = std::llabs(int_arg(I, arg_at(I, a, 1, "gcd"), "gcd"));
        while (y) {
            long long t = x % y;
            x = y;
            y = t;
        }
        return make_int(x);
    }));
    (void)I;
    return m;
}

Value make_tensor_value(Value nested) {
    auto t = std::make_shared<Obj>();
    t->kind = VK::Tensor;
    t->items.push_back(std::move(nested));
    return t;
}

Value build_torch(Interp& I) {
    Value m = make_module("torch");
    m->attrs.set("tensor", make_builtin("tensor", [](Interp& I, CallArgs& a) {
        return make_tensor_value(arg_at(I, a, 0, "tensor"));
    }));
    (void)I;
    return m;
}

Value build_numpy(Interp& I) {
    Value m = make_module("numpy");
    m->attrs.set("array", make_builtin("array", [](Interp& I, CallArgs& a) {
        Value src = arg_at(I, a, 0, "array");
        auto arr = std::make_shared<Obj>();
        arr->kind = VK::Array;
        arr->items = I.iterate_all(src, 0);
        return arr;
    }));
    m->attrs.set("zeros", make_builtin("zeros", [](Interp& I, CallArgs& a) {
        long long n = int_arg(I, arg_at(I, a, 0, "zeros"), "zeros");
        auto arr = std::make_shared<Obj>();
        arr->kind = VK::Array;
        for (long long i = 0; i < n; ++i) arr->items.push_back(make_float(0.0));
        return arr;
    }));
    m->attrs.set("mean", make_builtin("mean", [](Interp& I, CallArgs& a) {
        std::vector<Value> items = I.iterate_all(arg_at(I, a, 0, "mean"), 0);
        double total = 0;
        for (const Value& v : items) total += as_f(v);
        return make_float(items.empty() ? 0.0 : total / static_cast<double>(items.size()));
    }));
    (void)I;
    return m;
}

Value build_pandas(Interp& I) {
    Value m = make_module("pandas");
    m->attrs.set("DataFrame", make_builtin("DataFrame", [](Interp& I, CallArgs& a) {
        auto frame = std::make_shared<Obj>();
        frame->kind = VK::Frame;
        if (!a.pos.empty()) {
            Value d = a.pos[0];
            if (d->kind != VK::Dict)
                I.raise_error("TypeError", "DataFrame data must be a dict", 0);
            for (const auto& [k, v] : d->entries) {
                auto col = std::make_shared<Obj>();
                col->kind = VK::Array;
                if (v->kind == VK::List || v->kind == VK::Tuple || v->kind == VK::Array)
                    col->items = v->items;
                else
                    col->items.push_back(v);  // scalar broadcasts to a 1-row column
                frame->entries.emplace_back(k, col);
            }
        }
        return frame;
    }));
    (void)I;
    return m;
}

}  // namespace

Value lookup_builtin_method(Interp& interp, const Value& base, const std::string& attr) {
    switch (base->kind) {
        case VK::Str: return str_method(interp, base, attr);
        case VK::Bytes: return bytes_method(interp, base, attr);
        case VK::List: return list_method(interp, base, attr);
        case VK::Dict: return dict_method(interp, base, attr);
        case VK::Set: return set_method(interp, base, attr);
        case VK::Tuple: return tuple_method(interp, base, attr);
        case VK::Array: return array_method(interp, base, attr);
        case VK::Tensor:
            if (attr == "shape") return make_tuple({make_int(1), make_int(1)});
            if (attr == "item") {
                Value self = base;
                return method("item", [self](Interp&, CallArgs&) {
                    Value v = self->items.empty() ? make_float(1.0) : self->items[0];
                    while ((v->kind == VK::List || v->kind == VK::Tuple) && !v->items.empty())
                        v = v->items[0];
                    return v;
                });
            }
            return Value();
        case VK::DummyResource: {
            Value self = base;
            if (attr == "read")
                return method("read", [](Interp&, CallArgs&) { return make_str(""); });
            if (attr == "write" || attr == "flush" || attr == "close")
                return method(attr, [](Interp&, CallArgs&) { return make_none(); });
            if (attr == "__enter__")
                return method("__enter__", [self](Interp&, CallArgs&) { return self; });
            if (attr == "__exit__")
                return method("__exit__", [](Interp&, CallArgs&) { return make_none(); });
            return Value();
        }
        default:
            return Value();
    }
}

void install_global_builtins(Interp& I) {
    auto def = [&](const std::string& name, NativeFn fn) {
        I.register_builtin(name, make_builtin(name, std::move(fn)));
    };

    def("print", [](Interp& I, CallArgs& a) {
        std::string sep = " ", end = "\n";
        Value sep_v = kw_or(a, "sep", Value());
        Value end_v = kw_or(a, "end", Value());
        if (sep_v) sep = sep_v->kind == VK::None ? " " : sep_v->s;
        if (end_v) end = end_v->kind == VK::None ? "\n" : end_v->s;
        for (size_t i = 0; i < a.pos.size(); ++i) {
            if (i) I.out() += sep;
            I.out() += I.str_value(a.pos[i])->s;
        }
        I.out() += end;
        return make_none();
    });

    def("len", [](Interp& I, CallArgs& a) -> Value {
        Value v = arg_at(I, a, 0, "len");
        switch (v->kind) {
            case VK::Str:
            case VK::Bytes: return make_int(static_cast<long long>(v->s.size()));
            case VK::List:
            case VK::Tuple:
            case VK::Set:
            case VK::Array: return make_int(static_cast<long long>(v->items.size()));
            case VK::Dict:
            case VK::Frame: return make_int(static_cast<long long>(v->entries.size()));
            case VK::Range: {
                long long span = v->r_step > 0 ? v->r_stop - v->r_start : v->r_start - v->r_stop;
                long long step = std::llabs(v->r_step);
                return make_int(span <= 0 ? 0 : (span + step - 1) / step);
            }
            case VK::Instance: {
                Value m = I.getattr_value(v, "__len__", 0);
                Value n = I.call_value(m, {}, 0);
                return n;
            }
            default:
                I.raise_error("TypeError", "object of type '" + type_name(v) + "' has no len()", 0);
        }
    });

    def("range", [](Interp& I, CallArgs& a) {
        auto r = std::make_shared<Obj>();
        r->kind = VK::Range;
        if (a.pos.size() == 1) {
            r->r_stop = int_arg(I, a.pos[0], "range");
        } else if (a.pos.size() >= 2) {
            r->r_start = int_arg(I, a.pos[0], "range");
            r->r_stop = int_arg(I, a.pos[1], "range");
            if (a.pos.size() >= 3) {
                r->r_step = int_arg(I, a.pos[2], "range");
                if (r->r_step == 0)
                    I.raise_error("ValueError", "range() arg 3 must not be zero", 0);
            }
        } else {
            arg_error(I, "range", "expected at least 1 argument, got 0");
        }
        return r;
    });

    def("abs", [](Interp& I, CallArgs& a) -> Value {
        Value v = arg_at(I, a, 0, "abs");
        if (is_int_like(v)) return make_int(std::llabs(as_ll(v)));
        if (v->kind == VK::Float) return make_float(std::fabs(v->f));
        I.raise_error("TypeError", "bad operand type for abs(): '" + type_name(v) + "'", 0);
    });

    def("round", [](Interp& I, CallArgs& a) -> Value {
        Value v = arg_at(I, a, 0, "round");
        if (!numeric(v))
            I.raise_error("TypeError",
                          "type " + type_name(v) + " doesn't define __round__ method", 0);
        if (a.pos.size() > 1) {
            long long nd = int_arg(I, a.pos[1], "round");
            double scale = std::pow(10.0, static_cast<double>(nd));
            double r = std::nearbyint(as_f(v) * scale) / scale;
            return make_float(r);
        }
        if (is_int_like(v)) return make_int(as_ll(v));
        double x = v->f;
        double r = std::nearbyint(x);  // banker's rounding matches Python
        return make_int(static_cast<long long>(r));
    });

    def("divmod", [](Interp& I, CallArgs& a) {
        long long x = int_arg(I, arg_at(I, a, 0, "divmod"), "divmod");
        long long y = int_arg(I, arg_at(I, a, 1, "divmod"), "divmod");
        if (y == 0) I.raise_error("ZeroDivisionError", "integer division or modulo by zero", 0);
        long long q = x / y, r = x % y;
        if (r != 0 && ((r < 0) != (y < 0))) {
            --q;
            r += y;
        }
        return make_tuple({make_int(q), make_int(r)});
    });

    auto min_max = [](bool is_min) {
        return [is_min](Interp& I, CallArgs& a) -> Value {
            const char* name = is_min ? "min" : "max";
            std::vector<Value> items;
            if (a.pos.size() == 1) items = I.iterate_all(a.pos[0], 0);
            else items = a.pos;
            if (items.empty()) {
                if (a.pos.size() == 1)
                    I.raise_error("ValueError",
                                  std::string(name) + "() arg is an empty sequence", 0);
                arg_error(I, name, "expected at least 1 argument, got 0");
            }
            Value best = items[0];
            for (size_t i = 1; i < items.size(); ++i) {
                bool lt = I.py_lt(items[i], best, 0);
                if (is_min == lt) best = items[i];
            }
            return best;
        };
    };
    def("min", min_max(true));
    def("max", min_max(false));

    def("sum", [](Interp& I, CallArgs& a) -> Value {
        std::vector<Value> items = I.iterate_all(arg_at(I, a, 0, "sum"), 0);
        Value acc = a.pos.size() > 1 ? a.pos[1] : make_int(0);
        for (const Value& v : items) {
            if (!numeric(acc) || !numeric(v))
                I.raise_error("TypeError",
                              "unsupported operand type(s) for +: '" + type_name(acc) + "' and '" +
                                  type_name(v) + "'",
                              0);
            if (acc->kind == VK::Float || v->kind == VK::Float)
                acc = make_float(as_f(acc) + as_f(v));
            else
                acc = make_int(as_ll(acc) + as_ll(v));
        }
        return acc;
    });

    def("sorted", [](Interp& I, CallArgs& a) {
        std::vector<Value> items = I.iterate_all(arg_at(I, a, 0, "sorted"), 0);
        std::stable_sort(items.begin(), items.end(),
                         [&](const Value& x, const Value& y) { return I.py_lt(x, y, 0); });
        if (truthy(kw_or(a, "reverse", make_bool(false))))
            std::reverse(items.begin(), items.end());
        return make_list(std::move(items));
    });

    def("enumerate", [](Interp& I, CallArgs& a) {
        long long start = 0;
        if (a.pos.size() > 1) start = int_arg(I, a.pos[1], "enumerate");
        Value sv = kw_or(a, "start", Value());
        if (sv) start = int_arg(I, sv, "enumerate");
        std::vector<Value> out;
        for (Value& v : I.iterate_all(arg_at(I, a, 0, "enumerate"), 0))
            out.push_back(make_tuple({make_int(start++), std::move(v)}));
        return make_list(std::move(out));
    });

    def("zip", [](Interp& I, CallArgs& a) {
        std::vector<std::vector<Value>> cols;
        for (Value& v : a.pos) cols.push_back(I.iterate_all(v, 0));
        size_t n = cols.empty() ? 0 : cols[0].size();
        for (const auto& c : cols) n = std::min(n, c.size());
        std::vector<Value> out;
        for (size_t i = 0; i < n; ++i) {
            std::vector<Value> row;
            for (auto& c : cols) row.push_back(c[i]);
            out.push_back(make_tuple(std::move(row)));
        }
        return make_list(std::move(out));
    });

    def("map", [](Interp& I, CallArgs& a) {
        Value fn = arg_at(I, a, 0, "map");
        std::vector<Value> out;
        for (Value& v : I.iterate_all(arg_at(I, a, 1, "map"), 0)) {
            CallArgs call;
            call.pos.push_back(std::move(v));
            out.push_back(I.call_value(fn, std::move(call), 0));
        }
        return make_list(std::move(out));
    });

    def("filter", [](Interp& I, CallArgs& a) {
        Value fn = arg_at(I, a, 0, "filter");
        std::vector<Value> out;
        for (Value& v : I.iterate_all(arg_at(I, a, 1, "filter"), 0)) {
            bool keep;
            if (fn->kind == VK::None) {
                keep = truthy(v);
            } else {
                CallArgs call;
                call.pos.push_back(v);
                keep = truthy(I.call_value(fn, std::move(call), 0));
            }
            if (keep) out.push_back(std::move(v));
        }
        return make_list(std::move(out));
    });

    def("list", [](Interp& I, CallArgs& a) {
        if (a.pos.empty()) return make_list();
        return make_list(I.iterate_all(a.pos[0], 0));
    });
    def("tuple", [](Interp& I, CallArgs& a) {
        if (a.pos.empty()) return make_tuple({});
        return make_tuple(I.iterate_all(a.pos[0], 0));
    });
    def("set", [](Interp& I, CallArgs& a) {
        if (a.pos.empty()) return make_set({});
        return make_set(I.iterate_all(a.pos[0], 0));
    });
    def("dict", [](Interp& I, CallArgs& a) {
        Value d = make_dict();
        if (!a.pos.empty()) {
            Value src = a.pos[0];
            if (src->kind == VK::Dict) {
                d->entries = src->entries;
            } else {
                for (const Value& pair : I.iterate_all(src, 0)) {
                    std::vector<Value> kv = I.iterate_all(pair, 0);
                    if (kv.size() != 2)
                        I.raise_error("ValueError", "dictionary update sequence element has wrong length", 0);
                    size_t idx = dict_find(*d, kv[0]);
                    if (idx == static_cast<size_t>(-1)) d->entries.emplace_back(kv[0], kv[1]);
                    else d->entries[idx].second = kv[1];
                }
            }
        }
        for (auto& [k, v] : a.kw) {
            Value key = make_str(k);
            size_t idx = dict_find(*d, key);
            if (idx == static_cast<size_t>(-1)) d->entries.emplace_back(key, v);
            else d->entries[idx].second = v;
        }
        return d;
    });

    def("str", [](Interp& I, CallArgs& a) {
        if (a.pos.empty()) return make_str("");
        return I.str_value(a.pos[0]);
    });
    def("repr", [](Interp& I, CallArgs& a) { return I.repr_value(arg_at(I, a, 0, "repr")); });

    def("int", [](Interp& I, CallArgs& a) -> Value {
        if (a.pos.empty()) return make_int(0);
        Value v = a.pos[0];
        if (is_int_like(v)) return make_int(as_ll(v));
        if (v->kind == VK::Float) return make_int(static_cast<long long>(v->f));
        if (v->kind == VK::Str) {
            std::string t = v->s;
            size_t b = t.find_first_not_of(" \t\n");
            size_t e = t.find_last_not_of(" \t\n");
            if (b != std::string::npos) t = t.substr(b, e - b + 1);
            try {
                size_t used = 0;
                long long out = std::stoll(t, &used, 10);
                if (used == t.size() && !t.empty()) return make_int(out);
            } catch (...) {
            }
            I.raise_error("ValueError",
                          "invalid literal for int() with base 10: " + repr(v), 0);
        }
        I.raise_error("TypeError",
                      "int() argument must be a string, a bytes-like object or a real number, not '" +
                          type_name(v) + "'",
                      0);
    });

    def("float", [](Interp& I, CallArgs& a) -> Value {
        if (a.pos.empty()) return make_float(0.0);
        Value v = a.pos[0];
        if (numeric(v)) return make_float(as_f(v));
        if (v->kind == VK::Str) {
            std::string t = v->s;
            size_t b = t.find_first_not_of(" \t\n");
            size_t e = t.find_last_not_of(" \t\n");
            if (b != std::string::npos) t = t.substr(b, e - b + 1);
            try {
                size_t used = 0;
                double out = std::stod(t, &used);
                if (used == t.size() && !t.empty()) return make_float(out);
            } catch (...) {
            }
            I.raise_error("ValueError", "could not convert string to float: " + repr(v), 0);
        }
        I.raise_error("TypeError",
                      "float() argument must be a string or a real number, not '" + type_name(v) +
                          "'",
                      0);
    });

    def("bool", [](Interp&, CallArgs& a) {
        return make_bool(!a.pos.empty() && truthy(a.pos[0]));
    });

    def("bytes", [](Interp& I, CallArgs& a) -> Value {
        if (a.pos.empty()) return make_bytes("");
        Value v = a.pos[0];
        if (v->kind == VK::Bytes) return make_bytes(v->s);
        if (v->kind == VK::Str) {
            if (a.pos.size() < 2)
                I.raise_error("TypeError", "string argument without an encoding", 0);
            return make_bytes(v->s);
        }
        if (is_int_like(v)) return make_bytes(std::string(as_ll(v), '\0'));
        I.raise_error("TypeError", "cannot convert '" + type_name(v) + "' object to bytes", 0);
    });

    def("ord", [](Interp& I, CallArgs& a) -> Value {
        Value v = arg_at(I, a, 0, "ord");
        if (v->kind != VK::Str || v->s.size() != 1)
            I.raise_error("TypeError",
                          "ord() expected a character, but string of length " +
                              std::to_string(v->kind == VK::Str ? v->s.size() : 0) + " found",
                          0);
        return make_int(static_cast<unsigned char>(v->s[0]));
    });
    def("chr", [](Interp& I, CallArgs& a) {
        long long c = int_arg(I, arg_at(I, a, 0, "chr"), "chr");
        if (c < 0 || c > 255) I.raise_error("ValueError", "chr() arg not in range(256)", 0);
        return make_str(std::string(1, static_cast<char>(c)));
    });

    def("callable", [](Interp& I, CallArgs& a) {
        return make_bool(is_callable(arg_at(I, a, 0, "callable")));
    });

    def("type", [](Interp& I, CallArgs& a) -> Value {
        Value v = arg_at(I, a, 0, "type");
        if (v->kind == VK::Instance && v->cls) return v->cls;
        std::string canonical;
        switch (v->kind) {
            case VK::None: canonical = "NoneType"; break;
            case VK::Bool: canonical = "bool"; break;
            case VK::Int: canonical = "int"; break;
            case VK::Float: canonical = "float"; break;
            case VK::Str: canonical = "str"; break;
            case VK::Bytes: canonical = "bytes"; break;
            case VK::List: canonical = "list"; break;
            case VK::Tuple: canonical = "tuple"; break;
            case VK::Dict: canonical = "dict"; break;
            case VK::Set: canonical = "set"; break;
            case VK::Class: canonical = "type"; break;
            default: canonical = type_name(v); break;
        }
        if (Value b = I.builtin(canonical)) return b;
        return make_builtin(canonical, [canonical](Interp& I, CallArgs&) -> Value {
            I.raise_error("TypeError", "cannot create '" + canonical + "' instances", 0);
        });
    });

    def("isinstance", [](Interp& I, CallArgs& a) -> Value {
        Value v = arg_at(I, a, 0, "isinstance");
        Value cls = arg_at(I, a, 1, "isinstance");
        std::function<bool(const Value&)> check = [&](const Value& c) -> bool {
            if (c->kind == VK::Tuple) {
                for (const Value& x : c->items)
                    if (check(x)) return true;
                return false;
            }
            if (c->kind == VK::Class) {
                if (c->s == "object" && c->bases.empty() && c->attrs.entries().empty() && !c->b)
                    return true;  // everything is an object
                return I.isinstance_of(v, c);
            }
            if (c->kind == VK::Builtin) {
                const std::string& n = c->s;
                if (n == "int") return v->kind == VK::Int || v->kind == VK::Bool;
                if (n == "bool") return v->kind == VK::Bool;
                if (n == "float") return v->kind == VK::Float;
                if (n == "str") return v->kind == VK::Str;
                if (n == "bytes") return v->kind == VK::Bytes;
                if (n == "list") return v->kind == VK::List;
                if (n == "tuple") return v->kind == VK::Tuple;
                if (n == "dict") return v->kind == VK::Dict;
                if (n == "set") return v->kind == VK::Set;
                if (n == "type") return v->kind == VK::Class;
                if (n == "range") return v->kind == VK::Range;
                return false;
            }
            I.raise_error("TypeError",
                          "isinstance() arg 2 must be a type or tuple of types", 0);
        };
        return make_bool(check(cls));
    });

    def("issubclass", [](Interp& I, CallArgs& a) -> Value {
        Value sub = arg_at(I, a, 0, "issubclass");
        Value sup = arg_at(I, a, 1, "issubclass");
        if (sub->kind != VK::Class)
            I.raise_error("TypeError", "issubclass() arg 1 must be a class", 0);
        std::vector<Value> queue{sub};
        while (!queue.empty()) {
            Value c = queue.back();
            queue.pop_back();
            if (c.get() == sup.get()) return make_bool(true);
            for (const Value& b : c->bases) queue.push_back(b);
        }
        return make_bool(false);
    });

    def("getattr", [](Interp& I, CallArgs& a) -> Value {
        Value base = arg_at(I, a, 0, "getattr");
        Value name = arg_at(I, a, 1, "getattr");
        if (name->kind != VK::Str)
            I.raise_error("TypeError", "attribute name must be string", 0);
        if (a.pos.size() > 2) {
            try {
                return I.getattr_value(base, name->s, 0);
            } catch (PyRaise& r) {
                if (I.exception_matches(r.exc, "AttributeError")) return a.pos[2];
                throw;
            }
        }
        return I.getattr_value(base, name->s, 0);
    });
    def("setattr", [](Interp& I, CallArgs& a) {
        Value base = arg_at(I, a, 0, "setattr");
        Value name = arg_at(I, a, 1, "setattr");
        I.setattr_value(base, name->s, arg_at(I, a, 2, "setattr"), 0);
        return make_none();
    });
    def("hasattr", [](Interp& I, CallArgs& a) -> Value {
        Value base = arg_at(I, a, 0, "hasattr");
        Value name = arg_at(I, a, 1, "hasattr");
        try {
            I.getattr_value(base, name->s, 0);
            return make_bool(true);
        } catch (PyRaise& r) {
            if (I.exception_matches(r.exc, "AttributeError")) return make_bool(false);
            throw;
        }
    });

    def("iter", [](Interp& I, CallArgs& a) { return I.make_iterator(arg_at(I, a, 0, "iter"), 0); });
    def("next", [](Interp& I, CallArgs& a) -> Value {
        Value it = arg_at(I, a, 0, "next");
        if (it->kind != VK::Iterator && it->kind != VK::Instance)
            I.raise_error("TypeError", "'" + type_name(it) + "' object is not an iterator", 0);
        Value real = it->kind == VK::Iterator ? it : I.make_iterator(it, 0);
        auto v = I.iterator_next(real, 0);
        if (v) return *v;
        if (a.pos.size() > 1) return a.pos[1];
        I.raise_error("StopIteration", "", 0);
    });

    def("any", [](Interp& I, CallArgs& a) {
        for (const Value& v : I.iterate_all(arg_at(I, a, 0, "any"), 0))
            if (truthy(v)) return make_bool(true);
        return make_bool(false);
    });
    def("all", [](Interp& I, CallArgs& a) {
        for (const Value& v : I.iterate_all(arg_at(I, a, 0, "all"), 0))
            if (!truthy(v)) return make_bool(false);
        return make_bool(true);
    });

    def("reversed", [](Interp& I, CallArgs& a) {
        Value v = arg_at(I, a, 0, "reversed");
        std::vector<Value> items = I.iterate_all(v, 0);
        std::reverse(items.begin(), items.end());
        return I.make_iterator(make_list(std::move(items)), 0);
    });
}

Value build_module(Interp& interp, const std::string& name, bool third_party) {
    if (name == "os") return build_os(interp);
    if (name == "sys") return build_sys(interp);
    if (name == "math") return build_math(interp);
    if (third_party) {
        if (name == "torch") return build_torch(interp);
        if (name == "numpy") return build_numpy(interp);
        if (name == "pandas") return build_pandas(interp);
    }
    return Value();
}

}  // namespace snipex
