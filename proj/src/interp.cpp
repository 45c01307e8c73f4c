#include "snipex/interp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "snipex/errors.hpp"
#include "snipex/instrument.hpp"
#include "snipex/parser.hpp"

namespace snipex {

using namespace ast;

namespace {

struct FlowReturn {
    Value v;
};
struct FlowBreak {};
struct FlowContinue {};

long long floor_div_ll(long long a, long long b) {
    long long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

long long py_mod_ll(long long a, long long b) {
    long long m = a % b;
    if (m != 0 && ((m < 0) != (b < 0))) m += b;
    return m;
}

double py_mod_f(double a, double b) {
    double m = std::fmod(a, b);
    if (m != 0.0 && ((m < 0) != (b < 0))) m += b;
    return m;
}

bool is_int_like(const Value& v) { return v->kind == VK::Int || v->kind == VK::Bool; }
bool numeric(const Value& v) { return is_int_like(v) || v->kind == VK::Float; }
long long as_ll(const Value& v) { return v->kind == VK::Bool ? (v->b ? 1 : 0) : v->i; }
double as_f(const Value& v) {
    return v->kind == VK::Float ? v->f : static_cast<double>(as_ll(v));
}

void collect_target_names(const Expr& e, std::vector<std::string>& out) {
    if (is<Name>(e)) {
        out.push_back(as<Name>(e).id);
    } else if (is<TupleExpr>(e)) {
        for (const ExprP& item : as<TupleExpr>(e).items) collect_target_names(*item, out);
    } else if (is<ListExpr>(e)) {
        for (const ExprP& item : as<ListExpr>(e).items) collect_target_names(*item, out);
    }
}

// Names assigned anywhere in a function body are local everywhere in it.
// Does not descend into nested def/class bodies (their own scope).
void scan_assigned(const Block& body, std::vector<std::string>& names,
                   std::vector<std::string>& globals) {
    for (const StmtP& sp : body) {
        const Stmt& s = *sp;
        if (is<Assign>(s)) {
            for (const ExprP& t : as<Assign>(s).targets) collect_target_names(*t, names);
        } else if (is<AugAssign>(s)) {
            collect_target_names(*as<AugAssign>(s).target, names);
        } else if (is<For>(s)) {
            collect_target_names(*as<For>(s).target, names);
            scan_assigned(as<For>(s).body, names, globals);
        } else if (is<If>(s)) {
            scan_assigned(as<If>(s).body, names, globals);
            scan_assigned(as<If>(s).orelse, names, globals);
        } else if (is<While>(s)) {
            scan_assigned(as<While>(s).body, names, globals);
        } else if (is<FuncDef>(s)) {
            names.push_back(as<FuncDef>(s).name);
        } else if (is<ClassDef>(s)) {
            names.push_back(as<ClassDef>(s).name);
        } else if (is<Try>(s)) {
            const auto& t = as<Try>(s);
            scan_assigned(t.body, names, globals);
            for (const ExceptHandler& h : t.handlers) {
                if (!h.name.empty()) names.push_back(h.name);
                scan_assigned(h.body, names, globals);
            }
            scan_assigned(t.orelse, names, globals);
            scan_assigned(t.finalbody, names, globals);
        } else if (is<With>(s)) {
            for (const WithItem& item : as<With>(s).items)
                if (item.target) collect_target_names(*item.target, names);
            scan_assigned(as<With>(s).body, names, globals);
        } else if (is<Import>(s)) {
            for (const auto& [mod, asname] : as<Import>(s).names)
                names.push_back(!asname.empty() ? asname : mod.substr(0, mod.find('.')));
        } else if (is<FromImport>(s)) {
            for (const auto& [name, asname] : as<FromImport>(s).names)
                names.push_back(asname.empty() ? name : asname);
        } else if (is<Global>(s)) {
            for (const std::string& n : as<Global>(s).names) globals.push_back(n);
        } else if (is<Delete>(s)) {
            for (const ExprP& t : as<Delete>(s).targets) collect_target_names(*t, names);
        }
    }
}

const char* binop_symbol(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Div: return "/";
        case BinOp::FloorDiv: return "//";
        case BinOp::Mod: return "%";
        case BinOp::Pow: return "** or pow()";
        case BinOp::LShift: return "<<";
        case BinOp::RShift: return ">>";
        case BinOp::BitAnd: return "&";
        case BinOp::BitOr: return "|";
        case BinOp::BitXor: return "^";
    }
    return "?";
}

}  // namespace

struct Interp::Impl {
    NameTable builtins;
    std::map<std::string, Value> exc_classes;
    std::map<std::string, Value> modules;
    std::vector<std::shared_ptr<const Module>> owned_modules;
    std::vector<ExprP> owned_exprs;
    std::shared_ptr<const void> current_owner;  // module currently executing
    Value current_exc;  // innermost handled exception, for bare `raise`
    Value object_class;
};

// ===========================================================================

struct Evaluator {
    Interp& I;
    Interp::Impl& M;

    Evaluator(Interp& interp) : I(interp), M(*interp.impl_) {}

    void check_budget(int line) {
        if ((++I.op_counter_ & 255) == 0) {
            if (std::chrono::steady_clock::now() > I.deadline_) throw TimeoutSignal{};
        }
        if (line > 0) I.cur_line_ = line;
    }

    [[noreturn]] void raise(const std::string& cls, const std::string& msg, int line) {
        if (line <= 0) line = I.cur_line_;
        throw PyRaise{make_exception(cls, msg), line};
    }

    Value make_exception(const std::string& cls, const std::string& msg) {
        auto it = M.exc_classes.find(cls);
        Value cls_v = it != M.exc_classes.end() ? it->second : M.exc_classes.at("Exception");
        auto inst = std::make_shared<Obj>();
        inst->kind = VK::Instance;
        inst->cls = cls_v;
        inst->attrs.set("args", msg.empty() ? make_tuple({}) : make_tuple({make_str(msg)}));
        return inst;
    }

    bool is_exception_class(const Value& cls) {
        if (!cls || cls->kind != VK::Class) return false;
        for (const Value& c : mro(cls))
            if (c->b) return true;  // builtin exception flag
        return false;
    }

    // ---- name resolution ----

    Env* root_env(Env* e) {
        while (e->parent) e = e->parent.get();
        return e;
    }

    Value load_name(const std::string& name, int line, const EnvP& env) {
        Env* e = env.get();
        bool innermost = true;
        while (e) {
            if (e->is_function && e->is_global_decl(name)) {
                Env* g = root_env(e);
                if (Value* v = g->slots.find(name)) return *v;
                break;
            }
            if (e->is_function) {
                if (e->is_local(name)) {
                    if (Value* v = e->slots.find(name)) return *v;
                    if (innermost)
                        raise("UnboundLocalError",
                              "local variable '" + name + "' referenced before assignment", line);
                    // closure read of an enclosing frame's unbound local
                    raise("NameError",
                          "free variable '" + name + "' referenced before assignment in enclosing scope",
                          line);
                }
            } else if (innermost || !e->is_class) {
                if (Value* v = e->slots.find(name)) return *v;
            }
            innermost = false;
            e = e->parent.get();
        }
        if (Value* v = M.builtins.find(name)) return *v;
        raise("NameError", "name '" + name + "' is not defined", line);
    }

    void store_name(const std::string& name, Value v, const EnvP& env) {
        Env* e = env.get();
        if (e->is_function && e->is_global_decl(name)) {
            root_env(e)->slots.set(name, std::move(v));
            return;
        }
        e->slots.set(name, std::move(v));
    }

    void delete_name(const std::string& name, int line, const EnvP& env) {
        Env* e = env.get();
        if (e->is_function && e->is_global_decl(name)) {
            if (!root_env(e)->slots.erase(name))
                raise("NameError", "name '" + name + "' is not defined", line);
            return;
        }
        if (!e->slots.erase(name))
            raise("NameError", "name '" + name + "' is not defined", line);
    }

    // ---- classes, attributes ----

    std::vector<Value> mro(const Value& cls) {
        std::vector<Value> order;
        std::vector<Value> queue{cls};
        while (!queue.empty()) {
            Value c = queue.front();
            queue.erase(queue.begin());
            bool seen = false;
            for (const Value& x : order)
                if (x.get() == c.get()) seen = true;
            if (seen || !c || c->kind != VK::Class) continue;
            order.push_back(c);
            for (const Value& b : c->bases) queue.push_back(b);
        }
        return order;
    }

    Value* class_lookup(const Value& cls, const std::string& name) {
        for (const Value& c : mro(cls))
            if (Value* v = c->attrs.find(name)) return v;
        return nullptr;
    }

    Value bind_if_method(const Value& v, const Value& self) {
        if (v->kind == VK::Function || v->kind == VK::Builtin) {
            auto bm = std::make_shared<Obj>();
            bm->kind = VK::BoundMethod;
            bm->self = self;
            bm->func = v;
            return bm;
        }
        return v;
    }

    std::optional<Value> find_method(const Value& inst, const std::string& name) {
        if (inst->kind != VK::Instance || !inst->cls) return std::nullopt;
        if (Value* v = class_lookup(inst->cls, name)) return bind_if_method(*v, inst);
        return std::nullopt;
    }

    Value getattr(const Value& base, const std::string& attr, int line) {
        switch (base->kind) {
            case VK::Instance: {
                if (Value* v = base->attrs.find(attr)) return *v;
                if (base->cls)
                    if (Value* v = class_lookup(base->cls, attr)) return bind_if_method(*v, base);
                if (attr == "__class__" && base->cls) return base->cls;
                raise("AttributeError",
                      "'" + type_name(base) + "' object has no attribute '" + attr + "'", line);
            }
            case VK::Class: {
                if (Value* v = class_lookup(base, attr)) return *v;
                if (attr == "__name__") return make_str(base->s);
                raise("AttributeError",
                      "type object '" + base->s + "' has no attribute '" + attr + "'", line);
            }
            case VK::Module: {
                if (Value* v = base->attrs.find(attr)) return *v;
                raise("AttributeError", "module '" + base->s + "' has no attribute '" + attr + "'",
                      line);
            }
            case VK::Dummy:
                return make_dummy();
            case VK::Builtin:
                if (attr == "__name__") return make_str(base->s);
                break;
            case VK::Function:
                if (attr == "__name__") return make_str(base->fn ? base->fn->name : base->s);
                break;
            case VK::Frame: {
                for (const auto& [k, v] : base->entries)
                    if (k->kind == VK::Str && k->s == attr) return v;
                break;
            }
            default:
                break;
        }
        if (Value m = lookup_builtin_method(I, base, attr)) return m;
        raise("AttributeError", "'" + type_name(base) + "' object has no attribute '" + attr + "'",
              line);
    }

    void setattr(const Value& base, const std::string& attr, Value v, int line) {
        switch (base->kind) {
            case VK::Instance:
            case VK::Class:
            case VK::Module:
                base->attrs.set(attr, std::move(v));
                return;
            case VK::Dummy:
                return;  // placeholder swallows writes
            default:
                raise("AttributeError",
                      "'" + type_name(base) + "' object has no attribute '" + attr + "'", line);
        }
    }

    // ---- calls ----

    Value call(const Value& callee, CallArgs args, int line) {
        check_budget(line);
        switch (callee->kind) {
            case VK::Builtin:
                return callee->native(I, args);
            case VK::Function:
                return call_function(callee, args, line);
            case VK::BoundMethod: {
                CallArgs with_self;
                with_self.pos.reserve(args.pos.size() + 1);
                with_self.pos.push_back(callee->self);
                for (Value& v : args.pos) with_self.pos.push_back(std::move(v));
                with_self.kw = std::move(args.kw);
                return call(callee->func, std::move(with_self), line);
            }
            case VK::Class:
                return instantiate(callee, args, line);
            case VK::Dummy:
                return make_dummy();
            case VK::Instance: {
                if (auto m = find_method(callee, "__call__")) return call(*m, std::move(args), line);
                raise("TypeError", "'" + type_name(callee) + "' object is not callable", line);
            }
            default:
                raise("TypeError", "'" + type_name(callee) + "' object is not callable", line);
        }
    }

    Value call_function(const Value& f, CallArgs& args, int line) {
        const FunctionInfo& info = *f->fn;
        const std::vector<Param>& params = *info.params;

        if (++I.depth_ > I.opt_.max_depth) {
            --I.depth_;
            raise("RecursionError", "maximum recursion depth exceeded", line);
        }
        struct DepthGuard {
            int& d;
            ~DepthGuard() { --d; }
        } guard{I.depth_};

        auto env = std::make_shared<Env>();
        env->parent = info.closure;
        env->is_function = true;
        env->local_names = info.local_names;
        env->global_decls = info.global_decls;

        // Split parameter list.
        std::vector<const Param*> pos_params, kwonly;
        const Param* vararg = nullptr;
        const Param* kwarg = nullptr;
        for (const Param& p : params) {
            if (p.dstar) kwarg = &p;
            else if (p.star) vararg = &p;
            else if (vararg) kwonly.push_back(&p);
            else pos_params.push_back(&p);
        }

        std::vector<std::pair<const Param*, Value>> bound;
        auto find_bound = [&](const std::string& n) -> Value* {
            for (auto& [p, v] : bound)
                if (p->name == n) return &v;
            return nullptr;
        };

        size_t np = std::min(args.pos.size(), pos_params.size());
        for (size_t i = 0; i < np; ++i) bound.emplace_back(pos_params[i], args.pos[i]);
        std::vector<Value> extra_pos;
        for (size_t i = np; i < args.pos.size(); ++i) extra_pos.push_back(args.pos[i]);
        if (!extra_pos.empty() && !vararg) {
            size_t required = 0;
            for (const Param* p : pos_params)
                if (!p->default_value) ++required;
            std::string takes =
                required == pos_params.size()
                    ? std::to_string(pos_params.size())
                    : "from " + std::to_string(required) + " to " + std::to_string(pos_params.size());
            raise("TypeError",
                  info.name + "() takes " + takes + " positional argument" +
                      (pos_params.size() == 1 && required == pos_params.size() ? "" : "s") +
                      " but " + std::to_string(args.pos.size()) + " were given",
                  line);
        }

        std::vector<std::pair<std::string, Value>> extra_kw;
        for (auto& [name, v] : args.kw) {
            const Param* target = nullptr;
            for (const Param* p : pos_params)
                if (p->name == name) target = p;
            for (const Param* p : kwonly)
                if (p->name == name) target = p;
            if (!target) {
                if (kwarg) {
                    extra_kw.emplace_back(name, v);
                    continue;
                }
                raise("TypeError",
                      info.name + "() got an unexpected keyword argument '" + name + "'", line);
            }
            if (find_bound(name))
                raise("TypeError", info.name + "() got multiple values for argument '" + name + "'",
                      line);
            bound.emplace_back(target, v);
        }

        // Defaults, then check for missing.
        std::vector<std::string> missing;
        auto fill = [&](const std::vector<const Param*>& list) {
            for (size_t i = 0; i < list.size(); ++i) {
                const Param* p = list[i];
                if (find_bound(p->name)) continue;
                if (info.defaults[p - params.data()])
                    bound.emplace_back(p, info.defaults[p - params.data()]);
                else
                    missing.push_back(p->name);
            }
        };
        fill(pos_params);
        fill(kwonly);
        if (!missing.empty()) {
            std::string names;
            for (size_t i = 0; i < missing.size(); ++i) {
                if (i) names += missing.size() == 2 ? " and " : (i + 1 == missing.size() ? ", and " : ", ");
                names += "'" + missing[i] + "'";
            }
            raise("TypeError",
                  info.name + "() missing " + std::to_string(missing.size()) +
                      " required positional argument" + (missing.size() == 1 ? "" : "s") + ": " +
                      names,
                  line);
        }

        for (auto& [p, v] : bound) env->slots.set(p->name, v);
        if (vararg) env->slots.set(vararg->name, make_tuple(std::move(extra_pos)));
        if (kwarg) {
            Value d = make_dict();
            for (auto& [k, v] : extra_kw) d->entries.emplace_back(make_str(k), v);
            env->slots.set(kwarg->name, d);
        }

        if (info.is_lambda) {
            return eval(*static_cast<const Expr*>(info.code), env);
        }
        try {
            exec_block(*static_cast<const Block*>(info.code), env);
        } catch (FlowReturn& r) {
            return r.v;
        }
        return make_none();
    }

    Value instantiate(const Value& cls, CallArgs& args, int line) {
        auto inst = std::make_shared<Obj>();
        inst->kind = VK::Instance;
        inst->cls = cls;
        if (Value* init = class_lookup(cls, "__init__")) {
            CallArgs with_self;
            with_self.pos.push_back(inst);
            for (Value& v : args.pos) with_self.pos.push_back(std::move(v));
            with_self.kw = std::move(args.kw);
            call(*init, std::move(with_self), line);
            return inst;
        }
        if (is_exception_class(cls)) {
            inst->attrs.set("args", make_tuple(args.pos));
            return inst;
        }
        if (!args.pos.empty() || !args.kw.empty())
            raise("TypeError", cls->s + "() takes no arguments", line);
        return inst;
    }

    // ---- operators ----

    [[noreturn]] void binop_type_error(BinOp op, const Value& a, const Value& b, int line) {
        if (op == BinOp::Add) {
            if (a->kind == VK::Str)
                raise("TypeError",
                      "can only concatenate str (not \"" + type_name(b) + "\") to str", line);
            if (a->kind == VK::List)
                raise("TypeError",
                      "can only concatenate list (not \"" + type_name(b) + "\") to list", line);
            if (a->kind == VK::Tuple)
                raise("TypeError",
                      "can only concatenate tuple (not \"" + type_name(b) + "\") to tuple", line);
            if (a->kind == VK::Bytes && b->kind == VK::Str)
                raise("TypeError", "can't concat str to bytes", line);
        }
        raise("TypeError",
              std::string("unsupported operand type(s) for ") + binop_symbol(op) + ": '" +
                  type_name(a) + "' and '" + type_name(b) + "'",
              line);
    }

    Value binop(BinOp op, const Value& a, const Value& b, int line) {
        check_budget(line);
        switch (op) {
            case BinOp::Add: {
                if (numeric(a) && numeric(b)) {
                    if (a->kind == VK::Float || b->kind == VK::Float)
                        return make_float(as_f(a) + as_f(b));
                    return make_int(as_ll(a) + as_ll(b));
                }
                if (a->kind == VK::Str && b->kind == VK::Str) return make_str(a->s + b->s);
                if (a->kind == VK::Bytes && b->kind == VK::Bytes) return make_bytes(a->s + b->s);
                if (a->kind == VK::List && b->kind == VK::List) {
                    std::vector<Value> items = a->items;
                    items.insert(items.end(), b->items.begin(), b->items.end());
                    return make_list(std::move(items));
                }
                if (a->kind == VK::Tuple && b->kind == VK::Tuple) {
                    std::vector<Value> items = a->items;
                    items.insert(items.end(), b->items.begin(), b->items.end());
                    return make_tuple(std::move(items));
                }
                binop_type_error(op, a, b, line);
            }
            case BinOp::Sub: {
                if (numeric(a) && numeric(b)) {
                    if (a->kind == VK::Float || b->kind == VK::Float)
                        return make_float(as_f(a) - as_f(b));
                    return make_int(as_ll(a) - as_ll(b));
                }
                if (a->kind == VK::Set && b->kind == VK::Set) {
                    std::vector<Value> items;
                    for (const Value& x : a->items)
                        if (std::none_of(b->items.begin(), b->items.end(),
                                         [&](const Value& y) { return py_eq(x, y); }))
                            items.push_back(x);
                    return make_set(std::move(items));
                }
                binop_type_error(op, a, b, line);
            }
            case BinOp::Mul: {
                if (numeric(a) && numeric(b)) {
                    if (a->kind == VK::Float || b->kind == VK::Float)
                        return make_float(as_f(a) * as_f(b));
                    return make_int(as_ll(a) * as_ll(b));
                }
                auto repeat_seq = [&](const Value& seq, long long n) {
                    std::vector<Value> items;
                    for (long long k = 0; k < n; ++k)
                        items.insert(items.end(), seq->items.begin(), seq->items.end());
                    return items;
                };
                if (a->kind == VK::Str && is_int_like(b)) {
                    std::string out;
                    for (long long k = 0; k < as_ll(b); ++k) out += a->s;
                    return make_str(out);
                }
                if (b->kind == VK::Str && is_int_like(a)) {
                    std::string out;
                    for (long long k = 0; k < as_ll(a); ++k) out += b->s;
                    return make_str(out);
                }
                if (a->kind == VK::List && is_int_like(b)) return make_list(repeat_seq(a, as_ll(b)));
                if (b->kind == VK::List && is_int_like(a)) return make_list(repeat_seq(b, as_ll(a)));
                if (a->kind == VK::Tuple && is_int_like(b)) return make_tuple(repeat_seq(a, as_ll(b)));
                binop_type_error(op, a, b, line);
            }
            case BinOp::Div: {
                if (numeric(a) && numeric(b)) {
                    double db = as_f(b);
                    if (db == 0.0) {
                        if (is_int_like(a) && is_int_like(b))
                            raise("ZeroDivisionError", "division by zero", line);
                        raise("ZeroDivisionError", "float division by zero", line);
                    }
                    return make_float(as_f(a) / db);
                }
                binop_type_error(op, a, b, line);
            }
            case BinOp::FloorDiv: {
                if (is_int_like(a) && is_int_like(b)) {
                    if (as_ll(b) == 0)
                        raise("ZeroDivisionError", "integer division or modulo by zero", line);
                    return make_int(floor_div_ll(as_ll(a), as_ll(b)));
                }
                if (numeric(a) && numeric(b)) {
                    if (as_f(b) == 0.0)
                        raise("ZeroDivisionError", "float floor division by zero", line);
                    return make_float(std::floor(as_f(a) / as_f(b)));
                }
                binop_type_error(op, a, b, line);
            }
            case BinOp::Mod: {
                if (a->kind == VK::Str) return format_percent(a->s, b, line);
                if (is_int_like(a) && is_int_like(b)) {
                    if (as_ll(b) == 0)
                        raise("ZeroDivisionError", "integer division or modulo by zero", line);
                    return make_int(py_mod_ll(as_ll(a), as_ll(b)));
                }
                if (numeric(a) && numeric(b)) {
                    if (as_f(b) == 0.0) raise("ZeroDivisionError", "float modulo", line);
                    return make_float(py_mod_f(as_f(a), as_f(b)));
                }
                binop_type_error(op, a, b, line);
            }
            case BinOp::Pow: {
                if (numeric(a) && numeric(b)) {
                    if (is_int_like(a) && is_int_like(b) && as_ll(b) >= 0) {
                        long long result = 1, base = as_ll(a), exp = as_ll(b);
                        for (long long k = 0; k < exp; ++k) result *= base;
                        return make_int(result);
                    }
                    return make_float(std::pow(as_f(a), as_f(b)));
                }
                binop_type_error(op, a, b, line);
            }
            case BinOp::LShift:
            case BinOp::RShift: {
                if (is_int_like(a) && is_int_like(b)) {
                    long long shift = as_ll(b);
                    if (shift < 0) raise("ValueError", "negative shift count", line);
                    return make_int(op == BinOp::LShift ? as_ll(a) << shift : as_ll(a) >> shift);
                }
                binop_type_error(op, a, b, line);
            }
            case BinOp::BitAnd: {
                if (is_int_like(a) && is_int_like(b)) return make_int(as_ll(a) & as_ll(b));
                if (a->kind == VK::Set && b->kind == VK::Set) {
                    std::vector<Value> items;
                    for (const Value& x : a->items)
                        if (std::any_of(b->items.begin(), b->items.end(),
                                        [&](const Value& y) { return py_eq(x, y); }))
                            items.push_back(x);
                    return make_set(std::move(items));
                }
                binop_type_error(op, a, b, line);
            }
            case BinOp::BitOr: {
                if (is_int_like(a) && is_int_like(b)) return make_int(as_ll(a) | as_ll(b));
                if (a->kind == VK::Set && b->kind == VK::Set) {
                    std::vector<Value> items = a->items;
                    items.insert(items.end(), b->items.begin(), b->items.end());
                    return make_set(std::move(items));
                }
                binop_type_error(op, a, b, line);
            }
            case BinOp::BitXor: {
                if (is_int_like(a) && is_int_like(b)) return make_int(as_ll(a) ^ as_ll(b));
                if (a->kind == VK::Set && b->kind == VK::Set) {
                    std::vector<Value> items;
                    for (const Value& x : a->items)
                        if (std::none_of(b->items.begin(), b->items.end(),
                                         [&](const Value& y) { return py_eq(x, y); }))
                            items.push_back(x);
                    for (const Value& y : b->items)
                        if (std::none_of(a->items.begin(), a->items.end(),
                                         [&](const Value& x) { return py_eq(x, y); }))
                            items.push_back(y);
                    return make_set(std::move(items));
                }
                binop_type_error(op, a, b, line);
            }
        }
        binop_type_error(op, a, b, line);
    }

    Value format_percent(const std::string& fmt, const Value& rhs, int line) {
        std::vector<Value> args;
        if (rhs->kind == VK::Tuple) args = rhs->items;
        else args.push_back(rhs);
        std::string out;
        size_t ai = 0;
        for (size_t i = 0; i < fmt.size(); ++i) {
            if (fmt[i] != '%') {
                out += fmt[i];
                continue;
            }
            if (i + 1 < fmt.size() && fmt[i + 1] == '%') {
                out += '%';
                ++i;
                continue;
            }
            std::string spec = "%";
            ++i;
            while (i < fmt.size() && (std::isdigit(static_cast<unsigned char>(fmt[i])) ||
                                      fmt[i] == '.' || fmt[i] == '-' || fmt[i] == '+'))
                spec += fmt[i++];
            if (i >= fmt.size()) raise("ValueError", "incomplete format", line);
            char conv = fmt[i];
            if (ai >= args.size())
                raise("TypeError", "not enough arguments for format string", line);
            Value arg = args[ai++];
            char buf[64];
            switch (conv) {
                case 's': out += str_of_value(arg); break;
                case 'r': out += repr_of_value(arg); break;
                case 'd':
                case 'i': {
                    if (!numeric(arg))
                        raise("TypeError",
                              "%d format: a number is required, not " + type_name(arg), line);
                    spec += "lld";
                    std::snprintf(buf, sizeof buf, spec.c_str(),
                                  arg->kind == VK::Float ? static_cast<long long>(arg->f)
                                                         : as_ll(arg));
                    out += buf;
                    break;
                }
                case 'f': {
                    if (!numeric(arg))
                        raise("TypeError", "must be real number, not " + type_name(arg), line);
                    spec += 'f';
                    std::snprintf(buf, sizeof buf, spec.c_str(), as_f(arg));
                    out += buf;
                    break;
                }
                case 'x': {
                    spec += "llx";
                    std::snprintf(buf, sizeof buf, spec.c_str(), as_ll(arg));
                    out += buf;
                    break;
                }
                default:
                    raise("ValueError",
                          std::string("unsupported format character '") + conv + "'", line);
            }
        }
        if (ai < args.size() && rhs->kind == VK::Tuple)
            raise("TypeError", "not all arguments converted during string formatting", line);
        return make_str(out);
    }

    Value unop(UnOp op, const Value& v, int line) {
        switch (op) {
            case UnOp::Not:
                return make_bool(!truthy(v));
            case UnOp::Neg:
                if (is_int_like(v)) return make_int(-as_ll(v));
                if (v->kind == VK::Float) return make_float(-v->f);
                raise("TypeError", "bad operand type for unary -: '" + type_name(v) + "'", line);
            case UnOp::Pos:
                if (numeric(v)) return v->kind == VK::Bool ? make_int(as_ll(v)) : v;
                raise("TypeError", "bad operand type for unary +: '" + type_name(v) + "'", line);
            case UnOp::Invert:
                if (is_int_like(v)) return make_int(~as_ll(v));
                raise("TypeError", "bad operand type for unary ~: '" + type_name(v) + "'", line);
        }
        raise("TypeError", "bad unary operand", line);
    }

    bool py_lt(const Value& a, const Value& b, int line) {
        if (numeric(a) && numeric(b)) return as_f(a) < as_f(b);
        if (a->kind == VK::Str && b->kind == VK::Str) return a->s < b->s;
        if (a->kind == VK::Bytes && b->kind == VK::Bytes) return a->s < b->s;
        if ((a->kind == VK::List && b->kind == VK::List) ||
            (a->kind == VK::Tuple && b->kind == VK::Tuple)) {
            size_t n = std::min(a->items.size(), b->items.size());
            for (size_t i = 0; i < n; ++i) {
                if (py_lt(a->items[i], b->items[i], line)) return true;
                if (!py_eq(a->items[i], b->items[i])) return false;
            }
            return a->items.size() < b->items.size();
        }
        raise("TypeError",
              "'<' not supported between instances of '" + type_name(a) + "' and '" +
                  type_name(b) + "'",
              line);
    }

    bool contains(const Value& item, const Value& container, int line) {
        switch (container->kind) {
            case VK::Str:
                if (item->kind != VK::Str)
                    raise("TypeError",
                          "'in <string>' requires string as left operand, not " + type_name(item),
                          line);
                return container->s.find(item->s) != std::string::npos;
            case VK::Bytes:
                if (item->kind == VK::Bytes)
                    return container->s.find(item->s) != std::string::npos;
                if (is_int_like(item))
                    return container->s.find(static_cast<char>(as_ll(item))) != std::string::npos;
                raise("TypeError", "a bytes-like object is required, not '" + type_name(item) + "'",
                      line);
            case VK::List:
            case VK::Tuple:
            case VK::Set:
            case VK::Array:
                for (const Value& x : container->items)
                    if (py_eq(x, item)) return true;
                return false;
            case VK::Dict:
                return dict_find(*container, item) != static_cast<size_t>(-1);
            case VK::Range: {
                if (!is_int_like(item)) return false;
                long long v = as_ll(item);
                if (container->r_step > 0)
                    return v >= container->r_start && v < container->r_stop &&
                           (v - container->r_start) % container->r_step == 0;
                return v <= container->r_start && v > container->r_stop &&
                       (container->r_start - v) % (-container->r_step) == 0;
            }
            default: {
                if (container->kind == VK::Instance) {
                    if (auto m = find_method(container, "__contains__")) {
                        CallArgs args;
                        args.pos.push_back(item);
                        return truthy(call(*m, std::move(args), line));
                    }
                }
                raise("TypeError", "argument of type '" + type_name(container) + "' is not iterable",
                      line);
            }
        }
    }

    bool compare_one(CmpOp op, const Value& a, const Value& b, int line) {
        switch (op) {
            case CmpOp::Eq: return py_eq(a, b);
            case CmpOp::Ne: return !py_eq(a, b);
            case CmpOp::Lt: return py_lt(a, b, line);
            case CmpOp::Gt: return py_lt(b, a, line);
            case CmpOp::Le: return py_lt(a, b, line) || py_eq(a, b);
            case CmpOp::Ge: return py_lt(b, a, line) || py_eq(a, b);
            case CmpOp::Is: return a.get() == b.get();
            case CmpOp::IsNot: return a.get() != b.get();
            case CmpOp::In: return contains(a, b, line);
            case CmpOp::NotIn: return !contains(a, b, line);
        }
        return false;
    }

    // ---- subscripts ----

    long long norm_index(long long idx, size_t len, const char* what, int line) {
        long long n = static_cast<long long>(len);
        if (idx < 0) idx += n;
        if (idx < 0 || idx >= n)
            raise("IndexError", std::string(what) + " index out of range", line);
        return idx;
    }

    void slice_bounds(const Value& sl, size_t len, long long& start, long long& stop,
                      long long& step, int line) {
        long long n = static_cast<long long>(len);
        step = sl->slice_has_step ? sl->r_step : 1;
        if (step == 0) raise("ValueError", "slice step cannot be zero", line);
        if (step > 0) {
            start = sl->slice_has_start ? sl->r_start : 0;
            stop = sl->slice_has_stop ? sl->r_stop : n;
            if (start < 0) start = std::max(0LL, start + n);
            else start = std::min(start, n);
            if (stop < 0) stop = std::max(0LL, stop + n);
            else stop = std::min(stop, n);
        } else {
            start = sl->slice_has_start ? sl->r_start : n - 1;
            stop = sl->slice_has_stop ? sl->r_stop : -n - 1;
            if (start < 0) start += n;
            start = std::min(start, n - 1);
            if (start < 0) start = -1;
            if (stop < 0) stop = std::max(-1LL, stop + n);
            else stop = std::min(stop, n);
        }
    }

    Value subscript_get(const Value& base, const Value& index, int line) {
        check_budget(line);
        if (index->kind == VK::Slice) {
            long long start, stop, step;
            switch (base->kind) {
                case VK::List:
                case VK::Tuple: {
                    slice_bounds(index, base->items.size(), start, stop, step, line);
                    std::vector<Value> items;
                    if (step > 0)
                        for (long long i = start; i < stop; i += step) items.push_back(base->items[i]);
                    else
                        for (long long i = start; i > stop; i += step) items.push_back(base->items[i]);
                    return base->kind == VK::List ? make_list(std::move(items))
                                                  : make_tuple(std::move(items));
                }
                case VK::Str:
                case VK::Bytes: {
                    slice_bounds(index, base->s.size(), start, stop, step, line);
                    std::string out;
                    if (step > 0)
                        for (long long i = start; i < stop; i += step) out += base->s[i];
                    else
                        for (long long i = start; i > stop; i += step) out += base->s[i];
                    return base->kind == VK::Str ? make_str(out) : make_bytes(out);
                }
                default:
                    raise("TypeError", "'" + type_name(base) + "' object is not subscriptable",
                          line);
            }
        }
        switch (base->kind) {
            case VK::List:
            case VK::Tuple: {
                if (!is_int_like(index))
                    raise("TypeError",
                          std::string(base->kind == VK::List ? "list" : "tuple") +
                              " indices must be integers or slices, not " + type_name(index),
                          line);
                long long i = norm_index(as_ll(index), base->items.size(),
                                         base->kind == VK::List ? "list" : "tuple", line);
                return base->items[i];
            }
            case VK::Str: {
                if (!is_int_like(index))
                    raise("TypeError", "string indices must be integers", line);
                long long i = norm_index(as_ll(index), base->s.size(), "string", line);
                return make_str(std::string(1, base->s[i]));
            }
            case VK::Bytes: {
                if (!is_int_like(index)) raise("TypeError", "byte indices must be integers", line);
                long long i = norm_index(as_ll(index), base->s.size(), "index", line);
                return make_int(static_cast<unsigned char>(base->s[i]));
            }
            case VK::Dict: {
                size_t idx = dict_find(*base, index);
                if (idx == static_cast<size_t>(-1)) raise("KeyError", repr(index), line);
                return base->entries[idx].second;
            }
            case VK::Array: {
                if (!is_int_like(index)) raise("TypeError", "array indices must be integers", line);
                long long i = norm_index(as_ll(index), base->items.size(), "index", line);
                return base->items[i];
            }
            case VK::Tensor: {
                if (!is_int_like(index)) raise("TypeError", "tensor indices must be integers", line);
                long long i = norm_index(as_ll(index), base->items.size(), "index", line);
                return base->items[i];
            }
            case VK::Frame: {
                for (const auto& [k, v] : base->entries)
                    if (py_eq(k, index)) return v;
                raise("KeyError", repr(index), line);
            }
            case VK::Instance: {
                if (auto m = find_method(base, "__getitem__")) {
                    CallArgs args;
                    args.pos.push_back(index);
                    return call(*m, std::move(args), line);
                }
                raise("TypeError", "'" + type_name(base) + "' object is not subscriptable", line);
            }
            default:
                raise("TypeError", "'" + type_name(base) + "' object is not subscriptable", line);
        }
    }

    void subscript_set(const Value& base, const Value& index, Value v, int line) {
        switch (base->kind) {
            case VK::List: {
                if (!is_int_like(index))
                    raise("TypeError",
                          "list indices must be integers or slices, not " + type_name(index), line);
                long long i = norm_index(as_ll(index), base->items.size(), "list assignment", line);
                base->items[i] = std::move(v);
                return;
            }
            case VK::Dict: {
                size_t idx = dict_find(*base, index);
                if (idx == static_cast<size_t>(-1)) base->entries.emplace_back(index, std::move(v));
                else base->entries[idx].second = std::move(v);
                return;
            }
            case VK::Instance: {
                if (auto m = find_method(base, "__setitem__")) {
                    CallArgs args;
                    args.pos.push_back(index);
                    args.pos.push_back(std::move(v));
                    call(*m, std::move(args), line);
                    return;
                }
                raise("TypeError",
                      "'" + type_name(base) + "' object does not support item assignment", line);
            }
            case VK::Frame: {
                for (auto& [k, col] : base->entries)
                    if (py_eq(k, index)) {
                        col = std::move(v);
                        return;
                    }
                base->entries.emplace_back(index, std::move(v));
                return;
            }
            default:
                raise("TypeError",
                      "'" + type_name(base) + "' object does not support item assignment", line);
        }
    }

    void subscript_del(const Value& base, const Value& index, int line) {
        switch (base->kind) {
            case VK::List: {
                long long i = norm_index(as_ll(index), base->items.size(), "list assignment", line);
                base->items.erase(base->items.begin() + i);
                return;
            }
            case VK::Dict: {
                size_t idx = dict_find(*base, index);
                if (idx == static_cast<size_t>(-1)) raise("KeyError", repr(index), line);
                base->entries.erase(base->entries.begin() + idx);
                return;
            }
            default:
                raise("TypeError", "'" + type_name(base) + "' object doesn't support item deletion",
                      line);
        }
    }

    // ---- iteration ----

    Value make_iterator(const Value& v, int line) {
        auto it = std::make_shared<Obj>();
        it->kind = VK::Iterator;
        switch (v->kind) {
            case VK::List:
            case VK::Tuple:
            case VK::Str:
            case VK::Bytes:
            case VK::Array:
            case VK::Range:
                it->iter_src = v;
                it->iter_cur = v->kind == VK::Range ? v->r_start : 0;
                return it;
            case VK::Set: {
                it->iter_src = make_list(v->items);  // snapshot
                return it;
            }
            case VK::Dict: {
                std::vector<Value> keys;
                for (const auto& [k, val] : v->entries) keys.push_back(k);
                it->iter_src = make_list(std::move(keys));
                return it;
            }
            case VK::Iterator:
                return v;
            case VK::Instance: {
                if (auto m = find_method(v, "__iter__")) {
                    CallArgs args;
                    Value inner = call(*m, std::move(args), line);
                    if (inner->kind == VK::Iterator) return inner;
                    it->iter_src = inner;
                    it->b = true;  // protocol iterator: call __next__
                    return it;
                }
                if (find_method(v, "__next__")) {
                    it->iter_src = v;
                    it->b = true;
                    return it;
                }
                raise("TypeError", "'" + type_name(v) + "' object is not iterable", line);
            }
            default:
                raise("TypeError", "'" + type_name(v) + "' object is not iterable", line);
        }
    }

    std::optional<Value> iterator_next(const Value& it, int line) {
        check_budget(line);
        if (it->b) {  // instance protocol
            auto m = find_method(it->iter_src, "__next__");
            if (!m) raise("TypeError", "iterator protocol object lost '__next__'", line);
            try {
                CallArgs args;
                return call(*m, std::move(args), line);
            } catch (PyRaise& r) {
                if (exception_matches_name(r.exc, "StopIteration")) return std::nullopt;
                throw;
            }
        }
        const Value& src = it->iter_src;
        switch (src->kind) {
            case VK::List:
            case VK::Tuple:
            case VK::Array: {
                if (it->iter_pos >= src->items.size()) return std::nullopt;
                return src->items[it->iter_pos++];
            }
            case VK::Str: {
                if (it->iter_pos >= src->s.size()) return std::nullopt;
                return make_str(std::string(1, src->s[it->iter_pos++]));
            }
            case VK::Bytes: {
                if (it->iter_pos >= src->s.size()) return std::nullopt;
                return make_int(static_cast<unsigned char>(src->s[it->iter_pos++]));
            }
            case VK::Range: {
                if (src->r_step > 0 ? it->iter_cur >= src->r_stop : it->iter_cur <= src->r_stop)
                    return std::nullopt;
                long long v = it->iter_cur;
                it->iter_cur += src->r_step;
                return make_int(v);
            }
            default:
                return std::nullopt;
        }
    }

    std::vector<Value> iterate_all(const Value& v, int line) {
        Value it = make_iterator(v, line);
        std::vector<Value> out;
        while (auto x = iterator_next(it, line)) out.push_back(*x);
        return out;
    }

    bool exception_matches_name(const Value& exc, const std::string& name) {
        if (!exc || exc->kind != VK::Instance || !exc->cls) return false;
        for (const Value& c : mro(exc->cls))
            if (c->s == name) return true;
        return false;
    }

    // ---- string conversion with dunder dispatch ----

    std::string str_of_value(const Value& v) {
        if (v->kind == VK::Instance) {
            if (auto m = find_method(v, "__str__")) {
                CallArgs args;
                Value r = call(*m, std::move(args), 0);
                if (r->kind == VK::Str) return r->s;
            }
            if (auto m = find_method(v, "__repr__")) {
                CallArgs args;
                Value r = call(*m, std::move(args), 0);
                if (r->kind == VK::Str) return r->s;
            }
            if (exception_matches_name(v, "BaseException")) return exception_text(v);
        }
        return str_of(v);
    }

    std::string repr_of_value(const Value& v) {
        if (v->kind == VK::Instance) {
            if (auto m = find_method(v, "__repr__")) {
                CallArgs args;
                Value r = call(*m, std::move(args), 0);
                if (r->kind == VK::Str) return r->s;
            }
            if (exception_matches_name(v, "BaseException"))
                return Interp::exception_class_name(v) + "(" +
                       (exception_text(v).empty() ? "" : repr(make_str(exception_text(v)))) + ")";
        }
        return repr(v);
    }

    static std::string exception_text(const Value& exc) {
        return Interp::exception_message(exc);
    }

    // ---- comprehensions ----

    Value eval_comprehension(const Expr& e, const EnvP& env) {
        const auto& c = as<Comprehension>(e);
        auto frame = std::make_shared<Env>();
        frame->parent = env;
        frame->is_function = true;  // own scope, targets local
        auto locals = std::make_shared<std::vector<std::string>>();
        for (const CompClause& cl : c.clauses) collect_target_names(*cl.target, *locals);
        frame->local_names = locals;

        Value acc;
        switch (c.kind) {
            case 2: acc = make_dict(); break;
            case 1: acc = make_set({}); break;
            default: acc = make_list(); break;
        }

        run_comp_clause(c, 0, frame, acc, e.line);
        return acc;
    }

    void run_comp_clause(const Comprehension& c, size_t ci, const EnvP& frame, Value& acc,
                         int line) {
        if (ci == c.clauses.size()) {
            if (c.kind == 2) {
                Value k = eval(*c.elt, frame);
                Value v = eval(*c.elt_value, frame);
                size_t idx = dict_find(*acc, k);
                if (idx == static_cast<size_t>(-1)) acc->entries.emplace_back(k, v);
                else acc->entries[idx].second = v;
            } else if (c.kind == 1) {
                Value v = eval(*c.elt, frame);
                bool dup = false;
                for (const Value& x : acc->items)
                    if (py_eq(x, v)) dup = true;
                if (!dup) acc->items.push_back(v);
            } else {
                acc->items.push_back(eval(*c.elt, frame));
            }
            return;
        }
        const CompClause& cl = c.clauses[ci];
        Value it = make_iterator(eval(*cl.iter, frame), line);
        while (auto x = iterator_next(it, line)) {
            assign_target(*cl.target, *x, frame);
            bool keep = true;
            for (const ExprP& cond : cl.conds)
                if (!truthy(eval(*cond, frame))) {
                    keep = false;
                    break;
                }
            if (keep) run_comp_clause(c, ci + 1, frame, acc, line);
        }
    }

    // ---- functions ----

    Value make_function(const std::string& name, const std::vector<Param>& params,
                        const void* code, bool is_lambda, const EnvP& env,
                        const Block* scan_body) {
        auto f = std::make_shared<Obj>();
        f->kind = VK::Function;
        f->s = name;
        auto info = std::make_shared<FunctionInfo>();
        info->name = name;
        info->code = code;
        info->is_lambda = is_lambda;
        info->params = &params;
        info->closure = env;
        info->owner = M.current_owner;
        for (const Param& p : params)
            info->defaults.push_back(p.default_value ? eval(*p.default_value, env) : Value());

        auto locals = std::make_shared<std::vector<std::string>>();
        auto globals = std::make_shared<std::vector<std::string>>();
        for (const Param& p : params) locals->push_back(p.name);
        if (scan_body) scan_assigned(*scan_body, *locals, *globals);
        // global declarations win over the assignment scan
        locals->erase(std::remove_if(locals->begin(), locals->end(),
                                     [&](const std::string& n) {
                                         return std::find(globals->begin(), globals->end(), n) !=
                                                globals->end();
                                     }),
                      locals->end());
        info->local_names = locals;
        info->global_decls = globals;
        f->fn = info;
        return f;
    }

    // ---- imports ----

    Value import_module(const std::string& dotted, int line) {
        std::string head = dotted.substr(0, dotted.find('.'));
        auto it = M.modules.find(head);
        Value root;
        if (it != M.modules.end()) {
            root = it->second;
        } else {
            root = build_module(I, head, I.opt_.third_party_modules);
            if (!root) raise("ModuleNotFoundError", "No module named '" + head + "'", line);
            M.modules[head] = root;
        }
        // resolve submodule chain for the leaf (import a.b binds a, but a.b must exist)
        Value leaf = root;
        size_t pos = head.size();
        while (pos < dotted.size()) {
            size_t next = dotted.find('.', pos + 1);
            std::string part = dotted.substr(pos + 1, next == std::string::npos ? std::string::npos
                                                                                : next - pos - 1);
            Value* sub = leaf->attrs.find(part);
            if (!sub) raise("ModuleNotFoundError", "No module named '" + dotted + "'", line);
            leaf = *sub;
            pos = next == std::string::npos ? dotted.size() : next;
        }
        return leaf;
    }

    // ---- assignment ----

    void unpack_into(const std::vector<ExprP>& targets, const Value& v, int line,
                     const EnvP& env) {
        if (v->kind != VK::List && v->kind != VK::Tuple && v->kind != VK::Str &&
            v->kind != VK::Dict && v->kind != VK::Set && v->kind != VK::Range &&
            v->kind != VK::Iterator &&
            !(v->kind == VK::Instance && find_method(v, "__iter__"))) {
            raise("TypeError", "cannot unpack non-iterable " + type_name(v) + " object", line);
        }
        std::vector<Value> items = iterate_all(v, line);
        if (items.size() < targets.size())
            raise("ValueError",
                  "not enough values to unpack (expected " + std::to_string(targets.size()) +
                      ", got " + std::to_string(items.size()) + ")",
                  line);
        if (items.size() > targets.size())
            raise("ValueError",
                  "too many values to unpack (expected " + std::to_string(targets.size()) + ")",
                  line);
        for (size_t i = 0; i < targets.size(); ++i) assign_target(*targets[i], items[i], env);
    }

    void assign_target(const Expr& target, const Value& v, const EnvP& env) {
        if (is<Name>(target)) {
            store_name(as<Name>(target).id, v, env);
            return;
        }
        if (is<Attribute>(target)) {
            const auto& a = as<Attribute>(target);
            Value base = eval(*a.base, env);
            setattr(base, a.attr, v, target.line);
            return;
        }
        if (is<Subscript>(target)) {
            const auto& s = as<Subscript>(target);
            Value base = eval(*s.base, env);
            Value index = eval(*s.index, env);
            subscript_set(base, index, v, target.line);
            return;
        }
        if (is<TupleExpr>(target)) {
            unpack_into(as<TupleExpr>(target).items, v, target.line, env);
            return;
        }
        if (is<ListExpr>(target)) {
            unpack_into(as<ListExpr>(target).items, v, target.line, env);
            return;
        }
        raise("SyntaxError", "cannot assign to expression", target.line);
    }

    // ---- expression evaluation ----

    Value eval(const Expr& e, const EnvP& env) {
        check_budget(e.line);
        if (is<NoneLit>(e)) return make_none();
        if (is<BoolLit>(e)) return make_bool(as<BoolLit>(e).value);
        if (is<IntLit>(e)) return make_int(as<IntLit>(e).value);
        if (is<FloatLit>(e)) return make_float(as<FloatLit>(e).value);
        if (is<StrLit>(e)) return make_str(as<StrLit>(e).value);
        if (is<BytesLit>(e)) return make_bytes(as<BytesLit>(e).value);
        if (is<Name>(e)) return load_name(as<Name>(e).id, e.line, env);
        if (is<Attribute>(e)) {
            const auto& a = as<Attribute>(e);
            Value base = eval(*a.base, env);
            return getattr(base, a.attr, e.line);
        }
        if (is<Subscript>(e)) {
            const auto& s = as<Subscript>(e);
            Value base = eval(*s.base, env);
            Value index = eval(*s.index, env);
            return subscript_get(base, index, e.line);
        }
        if (is<SliceExpr>(e)) {
            const auto& s = as<SliceExpr>(e);
            auto sl = std::make_shared<Obj>();
            sl->kind = VK::Slice;
            auto bound = [&](const ExprP& part, long long& slot, bool& flag) {
                if (!part) return;
                Value v = eval(*part, env);
                if (v->kind == VK::None) return;
                if (!is_int_like(v))
                    raise("TypeError",
                          "slice indices must be integers or None or have an __index__ method",
                          e.line);
                slot = as_ll(v);
                flag = true;
            };
            bound(s.lower, sl->r_start, sl->slice_has_start);
            bound(s.upper, sl->r_stop, sl->slice_has_stop);
            bound(s.step, sl->r_step, sl->slice_has_step);
            return sl;
        }
        if (is<Call>(e)) {
            const auto& c = as<Call>(e);
            Value callee = eval(*c.callee, env);
            CallArgs args;
            for (const CallArg& a : c.args) {
                if (a.star) {
                    Value seq = eval(*a.value, env);
                    if (seq->kind == VK::Dummy)
                        raise("TypeError",
                              "argument after * must be an iterable, not DummyObject", e.line);
                    for (Value& v : iterate_all(seq, e.line)) args.pos.push_back(std::move(v));
                } else if (a.dstar) {
                    Value d = eval(*a.value, env);
                    if (d->kind != VK::Dict)
                        raise("TypeError", "argument after ** must be a mapping", e.line);
                    for (const auto& [k, v] : d->entries) {
                        if (k->kind != VK::Str)
                            raise("TypeError", "keywords must be strings", e.line);
                        args.kw.emplace_back(k->s, v);
                    }
                } else if (!a.keyword.empty()) {
                    args.kw.emplace_back(a.keyword, eval(*a.value, env));
                } else {
                    args.pos.push_back(eval(*a.value, env));
                }
            }
            return call(callee, std::move(args), e.line);
        }
        if (is<BinExpr>(e)) {
            const auto& b = as<BinExpr>(e);
            Value lhs = eval(*b.lhs, env);
            Value rhs = eval(*b.rhs, env);
            return binop(b.op, lhs, rhs, e.line);
        }
        if (is<UnExpr>(e)) {
            const auto& u = as<UnExpr>(e);
            return unop(u.op, eval(*u.operand, env), e.line);
        }
        if (is<BoolExpr>(e)) {
            const auto& b = as<BoolExpr>(e);
            Value last;
            for (size_t i = 0; i < b.values.size(); ++i) {
                last = eval(*b.values[i], env);
                if (i + 1 == b.values.size()) break;
                if (b.is_and && !truthy(last)) return last;
                if (!b.is_and && truthy(last)) return last;
            }
            return last;
        }
        if (is<CompareExpr>(e)) {
            const auto& c = as<CompareExpr>(e);
            Value prev = eval(*c.first, env);
            for (size_t i = 0; i < c.ops.size(); ++i) {
                Value cur = eval(*c.rest[i], env);
                if (!compare_one(c.ops[i], prev, cur, e.line)) return make_bool(false);
                prev = cur;
            }
            return make_bool(true);
        }
        if (is<IfExpr>(e)) {
            const auto& x = as<IfExpr>(e);
            bool cond = truthy(eval(*x.cond, env));
            if (x.seq >= 0)
                I.trace_.branch(branch_arm_id(e.line, "ifexp", x.seq, cond ? "then" : "else"));
            return cond ? eval(*x.then, env) : eval(*x.orelse, env);
        }
        if (is<ListExpr>(e)) {
            std::vector<Value> items;
            for (const ExprP& item : as<ListExpr>(e).items) items.push_back(eval(*item, env));
            return make_list(std::move(items));
        }
        if (is<TupleExpr>(e)) {
            std::vector<Value> items;
            for (const ExprP& item : as<TupleExpr>(e).items) items.push_back(eval(*item, env));
            return make_tuple(std::move(items));
        }
        if (is<SetExpr>(e)) {
            std::vector<Value> items;
            for (const ExprP& item : as<SetExpr>(e).items) items.push_back(eval(*item, env));
            return make_set(std::move(items));
        }
        if (is<DictExpr>(e)) {
            const auto& d = as<DictExpr>(e);
            Value out = make_dict();
            for (size_t i = 0; i < d.keys.size(); ++i) {
                Value k = eval(*d.keys[i], env);
                Value v = eval(*d.values[i], env);
                size_t idx = dict_find(*out, k);
                if (idx == static_cast<size_t>(-1)) out->entries.emplace_back(k, v);
                else out->entries[idx].second = v;
            }
            return out;
        }
        if (is<Comprehension>(e)) return eval_comprehension(e, env);
        if (is<Lambda>(e)) {
            const auto& l = as<Lambda>(e);
            return make_function("<lambda>", l.params, l.body.get(), true, env, nullptr);
        }
        raise("SyntaxError", "unsupported expression", e.line);
    }

    // ---- statements ----

    void exec_block(const Block& b, const EnvP& env) {
        for (const StmtP& s : b) exec(*s, env);
    }

    void exec(const Stmt& s, const EnvP& env) {
        check_budget(s.line);
        I.trace_.touch(s.line);

        if (is<ExprStmt>(s)) {
            eval(*as<ExprStmt>(s).value, env);
            I.trace_.credit(s.line);
            return;
        }
        if (is<Assign>(s)) {
            const auto& a = as<Assign>(s);
            Value v = eval(*a.value, env);
            for (const ExprP& t : a.targets) assign_target(*t, v, env);
            I.trace_.credit(s.line);
            return;
        }
        if (is<AugAssign>(s)) {
            const auto& a = as<AugAssign>(s);
            Value cur;
            if (is<Name>(*a.target)) {
                cur = load_name(as<Name>(*a.target).id, s.line, env);
            } else if (is<Attribute>(*a.target)) {
                const auto& at = as<Attribute>(*a.target);
                cur = getattr(eval(*at.base, env), at.attr, s.line);
            } else if (is<Subscript>(*a.target)) {
                const auto& st = as<Subscript>(*a.target);
                cur = subscript_get(eval(*st.base, env), eval(*st.index, env), s.line);
            } else {
                raise("SyntaxError", "illegal augmented assignment target", s.line);
            }
            Value rhs = eval(*a.value, env);
            Value out;
            if (a.op == BinOp::Add && cur->kind == VK::List) {
                // in-place extend, visible through aliases
                for (Value& v : iterate_all(rhs, s.line)) cur->items.push_back(std::move(v));
                out = cur;
            } else {
                out = binop(a.op, cur, rhs, s.line);
            }
            assign_target(*a.target, out, env);
            I.trace_.credit(s.line);
            return;
        }
        if (is<If>(s)) {
            const auto& n = as<If>(s);
            bool cond = truthy(eval(*n.cond, env));
            I.trace_.credit(s.line);
            I.trace_.branch(branch_arm_id(s.line, "if", 0, cond ? "then" : "else"));
            if (cond) {
                exec_block(n.body, env);
            } else if (!n.orelse.empty()) {
                if (n.else_line > 0) I.trace_.credit_point(n.else_line);
                exec_block(n.orelse, env);
            }
            return;
        }
        if (is<While>(s)) {
            const auto& n = as<While>(s);
            bool entered = false;
            while (true) {
                bool cond = truthy(eval(*n.cond, env));
                I.trace_.credit(s.line);
                if (!cond) {
                    I.trace_.branch(branch_arm_id(s.line, "loop", 0, "exit"));
                    break;
                }
                if (!entered) {
                    entered = true;
                    I.trace_.branch(branch_arm_id(s.line, "loop", 0, "body"));
                }
                try {
                    exec_block(n.body, env);
                } catch (FlowBreak&) {
                    return;  // break skips the normal-exit arm
                } catch (FlowContinue&) {
                }
            }
            return;
        }
        if (is<For>(s)) {
            const auto& n = as<For>(s);
            Value iterable = eval(*n.iter, env);
            Value it = make_iterator(iterable, s.line);
            I.trace_.credit(s.line);
            bool entered = false;
            while (true) {
                auto x = iterator_next(it, s.line);
                if (!x) {
                    I.trace_.branch(branch_arm_id(s.line, "loop", 0, "exit"));
                    break;
                }
                if (!entered) {
                    entered = true;
                    I.trace_.branch(branch_arm_id(s.line, "loop", 0, "body"));
                }
                assign_target(*n.target, *x, env);
                try {
                    exec_block(n.body, env);
                } catch (FlowBreak&) {
                    return;
                } catch (FlowContinue&) {
                }
            }
            return;
        }
        if (is<FuncDef>(s)) {
            const auto& d = as<FuncDef>(s);
            Value f = make_function(d.name, d.params, &d.body, false, env, &d.body);
            store_name(d.name, f, env);
            I.trace_.credit(s.line);
            return;
        }
        if (is<ClassDef>(s)) {
            const auto& c = as<ClassDef>(s);
            auto cls = std::make_shared<Obj>();
            cls->kind = VK::Class;
            cls->s = c.name;
            for (const ExprP& b : c.bases) {
                Value base = eval(*b, env);
                if (base->kind == VK::Class) cls->bases.push_back(base);
                else if (base.get() == M.object_class.get()) cls->bases.push_back(base);
                else if (base->kind == VK::Dummy) continue;  // placeholder base is ignored
                else if (base->kind == VK::Builtin)
                    raise("TypeError", "cannot subclass '" + base->s + "'", s.line);
                else
                    raise("TypeError", "bases must be types", s.line);
            }
            auto body_env = std::make_shared<Env>();
            body_env->parent = env;
            body_env->is_class = true;
            exec_block(c.body, body_env);
            for (const auto& [k, v] : body_env->slots.entries())
                if (v) cls->attrs.set(k, v);
            store_name(c.name, cls, env);
            I.trace_.credit(s.line);
            return;
        }
        if (is<Return>(s)) {
            const auto& r = as<Return>(s);
            Value v = r.value ? eval(*r.value, env) : make_none();
            I.trace_.credit(s.line);
            throw FlowReturn{v};
        }
        if (is<Raise>(s)) {
            const auto& r = as<Raise>(s);
            if (!r.exc) {
                if (!M.current_exc)
                    raise("RuntimeError", "No active exception to re-raise", s.line);
                throw PyRaise{M.current_exc, s.line};
            }
            Value v = eval(*r.exc, env);
            if (v->kind == VK::Class && is_exception_class(v)) {
                CallArgs args;
                v = instantiate(v, args, s.line);
            }
            if (v->kind != VK::Instance || !exception_matches_name(v, "BaseException"))
                raise("TypeError", "exceptions must derive from BaseException", s.line);
            throw PyRaise{v, s.line};
        }
        if (is<Try>(s)) {
            exec_try(s, as<Try>(s), env);
            return;
        }
        if (is<With>(s)) {
            exec_with(s, as<With>(s), env);
            return;
        }
        if (is<Import>(s)) {
            const auto& imp = as<Import>(s);
            for (const auto& [mod, asname] : imp.names) {
                if (asname.empty()) {
                    Value root = import_module(mod.substr(0, mod.find('.')), s.line);
                    import_module(mod, s.line);  // validate the full dotted path
                    store_name(mod.substr(0, mod.find('.')), root, env);
                } else {
                    store_name(asname, import_module(mod, s.line), env);
                }
            }
            I.trace_.credit(s.line);
            return;
        }
        if (is<FromImport>(s)) {
            const auto& imp = as<FromImport>(s);
            Value mod = import_module(imp.module, s.line);
            for (const auto& [name, asname] : imp.names) {
                Value* v = mod->attrs.find(name);
                if (!v)
                    raise("ImportError",
                          "cannot import name '" + name + "' from '" + imp.module + "'", s.line);
                store_name(asname.empty() ? name : asname, *v, env);
            }
            I.trace_.credit(s.line);
            return;
        }
        if (is<Global>(s)) {
            I.trace_.credit(s.line);
            return;  // declaration only; honored via global_decls
        }
        if (is<Pass>(s)) {
            I.trace_.credit(s.line);
            return;
        }
        if (is<Break>(s)) {
            I.trace_.credit(s.line);
            throw FlowBreak{};
        }
        if (is<Continue>(s)) {
            I.trace_.credit(s.line);
            throw FlowContinue{};
        }
        if (is<Assert>(s)) {
            const auto& a = as<Assert>(s);
            if (!truthy(eval(*a.test, env))) {
                std::string msg = a.msg ? str_of_value(eval(*a.msg, env)) : "";
                raise("AssertionError", msg, s.line);
            }
            I.trace_.credit(s.line);
            return;
        }
        if (is<Delete>(s)) {
            const auto& d = as<Delete>(s);
            for (const ExprP& t : d.targets) {
                if (is<Name>(*t)) {
                    delete_name(as<Name>(*t).id, s.line, env);
                } else if (is<Subscript>(*t)) {
                    const auto& st = as<Subscript>(*t);
                    subscript_del(eval(*st.base, env), eval(*st.index, env), s.line);
                } else if (is<Attribute>(*t)) {
                    const auto& at = as<Attribute>(*t);
                    Value base = eval(*at.base, env);
                    if (base->kind == VK::Instance || base->kind == VK::Class ||
                        base->kind == VK::Module) {
                        if (!base->attrs.erase(at.attr))
                            raise("AttributeError", at.attr, s.line);
                    }
                } else {
                    raise("SyntaxError", "cannot delete expression", s.line);
                }
            }
            I.trace_.credit(s.line);
            return;
        }
        raise("SyntaxError", "unsupported statement", s.line);
    }

    void exec_try(const Stmt& s, const Try& t, const EnvP& env) {
        I.trace_.credit(s.line);
        bool raised = false;
        PyRaise pending{};
        try {
            try {
                exec_block(t.body, env);
                if (!t.orelse.empty()) {
                    if (t.else_line > 0) I.trace_.credit_point(t.else_line);
                    exec_block(t.orelse, env);
                }
            } catch (PyRaise& r) {
                bool handled = false;
                for (const ExceptHandler& h : t.handlers) {
                    if (!matches_handler(r.exc, h, env)) continue;
                    I.trace_.credit_point(h.line);
                    I.trace_.branch(branch_arm_id(h.line, "except", 0, "enter"));
                    Value prev = M.current_exc;
                    M.current_exc = r.exc;
                    if (!h.name.empty()) store_name(h.name, r.exc, env);
                    try {
                        exec_block(h.body, env);
                    } catch (...) {
                        M.current_exc = prev;
                        throw;
                    }
                    M.current_exc = prev;
                    handled = true;
                    break;
                }
                if (!handled) {
                    raised = true;
                    pending = r;
                }
            }
        } catch (PyRaise&) {
            // raised inside a handler or the else block
            if (!t.finalbody.empty()) {
                if (t.finally_line > 0) I.trace_.credit_point(t.finally_line);
                exec_block(t.finalbody, env);
            }
            throw;
        } catch (FlowReturn&) {
            if (!t.finalbody.empty()) {
                if (t.finally_line > 0) I.trace_.credit_point(t.finally_line);
                exec_block(t.finalbody, env);
            }
            throw;
        } catch (FlowBreak&) {
            if (!t.finalbody.empty()) {
                if (t.finally_line > 0) I.trace_.credit_point(t.finally_line);
                exec_block(t.finalbody, env);
            }
            throw;
        } catch (FlowContinue&) {
            if (!t.finalbody.empty()) {
                if (t.finally_line > 0) I.trace_.credit_point(t.finally_line);
                exec_block(t.finalbody, env);
            }
            throw;
        }
        if (!t.finalbody.empty()) {
            if (t.finally_line > 0) I.trace_.credit_point(t.finally_line);
            exec_block(t.finalbody, env);
        }
        if (raised) throw pending;
    }

    bool matches_handler(const Value& exc, const ExceptHandler& h, const EnvP& env) {
        if (!h.type) return true;  // bare except
        Value cls = eval(*h.type, env);
        auto match_one = [&](const Value& c) {
            if (!c || c->kind != VK::Class) return false;
            if (exc->kind != VK::Instance || !exc->cls) return false;
            for (const Value& m : mro(exc->cls))
                if (m.get() == c.get()) return true;
            return false;
        };
        if (cls->kind == VK::Tuple) {
            for (const Value& c : cls->items)
                if (match_one(c)) return true;
            return false;
        }
        return match_one(cls);
    }

    void exec_with(const Stmt& s, const With& w, const EnvP& env) {
        exec_with_item(s, w, 0, env);
    }

    void exec_with_item(const Stmt& s, const With& w, size_t idx, const EnvP& env) {
        if (idx == w.items.size()) {
            exec_block(w.body, env);
            return;
        }
        const WithItem& item = w.items[idx];
        Value ctx = eval(*item.ctx, env);
        Value entered;
        if (ctx->kind == VK::DummyResource || ctx->kind == VK::Dummy) {
            entered = ctx->kind == VK::DummyResource ? ctx : make_dummy();
        } else if (ctx->kind == VK::Instance) {
            auto enter = find_method(ctx, "__enter__");
            if (!enter)
                raise("AttributeError", "__enter__", s.line);
            CallArgs noargs;
            entered = call(*enter, std::move(noargs), s.line);
        } else {
            raise("AttributeError", "__enter__", s.line);
        }
        if (idx == 0) I.trace_.credit(s.line);
        if (item.target) assign_target(*item.target, entered, env);

        auto run_exit = [&](const Value& exc) -> bool {
            if (ctx->kind == VK::DummyResource || ctx->kind == VK::Dummy) return false;
            auto exit = find_method(ctx, "__exit__");
            if (!exit) return false;
            CallArgs args;
            if (exc) {
                args.pos.push_back(exc->cls ? exc->cls : make_none());
                args.pos.push_back(exc);
                args.pos.push_back(make_none());
            } else {
                args.pos.push_back(make_none());
                args.pos.push_back(make_none());
                args.pos.push_back(make_none());
            }
            return truthy(call(*exit, std::move(args), s.line));
        };

        try {
            exec_with_item(s, w, idx + 1, env);
        } catch (PyRaise& r) {
            if (run_exit(r.exc)) return;  // exception suppressed
            throw;
        }
        run_exit(nullptr);
    }
};

// ============================ Interp methods ============================

Interp::Interp(Options opt) : opt_(opt) {
    impl_ = std::make_unique<Impl>();
    genv_ = std::make_shared<Env>();
    reset_deadline();

    // Exception hierarchy. The b flag marks the builtin exception family.
    auto def_exc = [&](const std::string& name, const std::string& base) {
        auto cls = std::make_shared<Obj>();
        cls->kind = VK::Class;
        cls->s = name;
        cls->b = true;
        if (!base.empty()) cls->bases.push_back(impl_->exc_classes.at(base));
        impl_->exc_classes[name] = cls;
        impl_->builtins.set(name, cls);
    };
    def_exc("BaseException", "");
    def_exc("Exception", "BaseException");
    def_exc("TypeError", "Exception");
    def_exc("ValueError", "Exception");
    def_exc("ArithmeticError", "Exception");
    def_exc("ZeroDivisionError", "ArithmeticError");
    def_exc("NameError", "Exception");
    def_exc("UnboundLocalError", "NameError");
    def_exc("AttributeError", "Exception");
    def_exc("LookupError", "Exception");
    def_exc("KeyError", "LookupError");
    def_exc("IndexError", "LookupError");
    def_exc("RuntimeError", "Exception");
    def_exc("RecursionError", "RuntimeError");
    def_exc("NotImplementedError", "RuntimeError");
    def_exc("StopIteration", "Exception");
    def_exc("ImportError", "Exception");
    def_exc("ModuleNotFoundError", "ImportError");
    def_exc("AssertionError", "Exception");
    def_exc("OSError", "Exception");
    def_exc("SyntaxError", "Exception");

    auto object_cls = std::make_shared<Obj>();
    object_cls->kind = VK::Class;
    object_cls->s = "object";
    impl_->object_class = object_cls;
    impl_->builtins.set("object", object_cls);

    install_global_builtins(*this);
}

Interp::~Interp() = default;

void Interp::register_builtin(const std::string& name, Value v) {
    impl_->builtins.set(name, std::move(v));
}

Value Interp::builtin(const std::string& name) const {
    const Value* v = impl_->builtins.find(name);
    return v ? *v : Value();
}

void Interp::reset_deadline() {
    deadline_ = std::chrono::steady_clock::now() +
                std::chrono::microseconds(static_cast<long long>(opt_.timeout_s * 1e6));
}

void Interp::exec_module(std::shared_ptr<const Module> m) {
    impl_->owned_modules.push_back(m);
    auto saved = impl_->current_owner;
    impl_->current_owner = m;
    struct Restore {
        std::shared_ptr<const void>& slot;
        std::shared_ptr<const void> old;
        ~Restore() { slot = old; }
    } restore{impl_->current_owner, saved};
    Evaluator ev(*this);
    ev.exec_block(m->body, genv_);
}

void Interp::exec_source(const std::string& code) {
    auto mod = std::make_shared<Module>(parse_module(code));
    exec_module(mod);
}

Value Interp::eval_source_expr(const std::string& expr_text) {
    ExprP e = parse_expression(expr_text);
    impl_->owned_exprs.push_back(e);
    auto saved = impl_->current_owner;
    impl_->current_owner = e;
    struct Restore {
        std::shared_ptr<const void>& slot;
        std::shared_ptr<const void> old;
        ~Restore() { slot = old; }
    } restore{impl_->current_owner, saved};
    Evaluator ev(*this);
    return ev.eval(*e, genv_);
}

Value Interp::eval_in(const Expr& e, const EnvP& env) {
    Evaluator ev(*this);
    return ev.eval(e, env);
}

void Interp::exec_block_in(const Block& b, const EnvP& env) {
    Evaluator ev(*this);
    ev.exec_block(b, env);
}

Value Interp::call_value(const Value& callee, CallArgs args, int line) {
    Evaluator ev(*this);
    return ev.call(callee, std::move(args), line);
}

Value Interp::getattr_value(const Value& base, const std::string& attr, int line) {
    Evaluator ev(*this);
    return ev.getattr(base, attr, line);
}

void Interp::setattr_value(const Value& base, const std::string& attr, Value v, int line) {
    Evaluator ev(*this);
    ev.setattr(base, attr, std::move(v), line);
}

Value Interp::subscript_get(const Value& base, const Value& index, int line) {
    Evaluator ev(*this);
    return ev.subscript_get(base, index, line);
}

Value Interp::make_iterator(const Value& v, int line) {
    Evaluator ev(*this);
    return ev.make_iterator(v, line);
}

std::optional<Value> Interp::iterator_next(const Value& it, int line) {
    Evaluator ev(*this);
    return ev.iterator_next(it, line);
}

std::vector<Value> Interp::iterate_all(const Value& v, int line) {
    Evaluator ev(*this);
    return ev.iterate_all(v, line);
}

Value Interp::str_value(const Value& v) {
    Evaluator ev(*this);
    return make_str(ev.str_of_value(v));
}

Value Interp::repr_value(const Value& v) {
    Evaluator ev(*this);
    return make_str(ev.repr_of_value(v));
}

bool Interp::py_lt(const Value& a, const Value& b, int line) {
    Evaluator ev(*this);
    return ev.py_lt(a, b, line);
}

void Interp::raise_error(const std::string& cls, const std::string& msg, int line) {
    Evaluator ev(*this);
    ev.raise(cls, msg, line);
}

Value Interp::exception_class(const std::string& name) const {
    auto it = impl_->exc_classes.find(name);
    return it == impl_->exc_classes.end() ? Value() : it->second;
}

bool Interp::isinstance_of(const Value& v, const Value& cls) const {
    if (!cls || cls->kind != VK::Class) return false;
    if (v->kind != VK::Instance || !v->cls) return false;
    Evaluator ev(const_cast<Interp&>(*this));
    for (const Value& c : ev.mro(v->cls))
        if (c.get() == cls.get()) return true;
    return false;
}

bool Interp::exception_matches(const Value& exc, const std::string& class_name) const {
    Evaluator ev(const_cast<Interp&>(*this));
    return ev.exception_matches_name(exc, class_name);
}

std::string Interp::exception_class_name(const Value& exc) {
    if (exc && exc->kind == VK::Instance && exc->cls) return exc->cls->s;
    return "Exception";
}

std::string Interp::exception_message(const Value& exc) {
    if (!exc || exc->kind != VK::Instance) return "";
    const Value* args = exc->attrs.find("args");
    if (!args || (*args)->items.empty()) return "";
    if ((*args)->items.size() == 1) {
        const Value& a = (*args)->items[0];
        return a->kind == VK::Str ? a->s : repr(a);
    }
    return repr(*args);
}

std::string Interp::format_exception(const Value& exc) {
    std::string msg = exception_message(exc);
    std::string name = exception_class_name(exc);
    return msg.empty() ? name : name + ": " + msg;
}

}  // namespace snipex
