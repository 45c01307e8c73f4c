#pragma once

#include <map>
#include <string>
#include <vector>

#include "snipex/ast.hpp"

namespace snipex {

enum class HookKind { variable_read, attribute_read, call };

const char* hook_kind_name(HookKind k);       // "variable_read" / "attribute_read" / "call"
const char* hook_kind_display(HookKind k);    // "variable" / "attribute" / "function"

struct SourceSnippet {
    std::string text;
    std::string origin;
    int line_count = 0;  // non-empty, non-comment physical lines

    static SourceSnippet from_text(std::string text, std::string origin = "<snippet>");
    static SourceSnippet from_file(const std::string& path);
};

struct HookSite {
    int iid = 0;
    HookKind kind = HookKind::variable_read;
    std::string name;
    int line_no = 0;                 // 1-based original line
    std::string original_line_text;  // stripped original source line
};

struct InstrumentedProgram {
    std::string instrumented_text;
    std::map<int, HookSite> sites;
    SourceSnippet original;
    // Statement extents of the original program: start line -> last physical
    // line of the statement text (header extent for compound statements).
    // Used to credit every physical line of a multi-line statement.
    std::map<int, int> stmt_spans;

    std::string site_map_json() const;
};

struct BranchArm {
    std::string id;    // stable arm id, e.g. "L3:if:then"
    int line = 0;
    std::string kind;  // "if" | "loop" | "except" | "ifexp"
    std::string arm;   // "then" | "else" | "body" | "exit" | "enter"
};

struct BranchTable {
    std::vector<BranchArm> arms;
};

// Rewrites every variable read, attribute read, and call expression into an
// execution-hook call carrying a fresh instrument id. Throws ParseError when
// the snippet does not parse.
InstrumentedProgram instrument(const SourceSnippet& snippet);

// Site lookup by instrument id. Throws UnknownIid.
const HookSite& locate(const InstrumentedProgram& program, int iid);

// Enumerates branch arms of the original program: then/else of each
// conditional (including the implicit else), body-entered/normal-exit of each
// loop, each exception handler, and both arms of each conditional expression.
BranchTable count_branches(const SourceSnippet& snippet);

// Same enumeration over an already-parsed module; assigns conditional
// expression sequence numbers in place so the runtime fires arm ids matching
// the count_branches table.
BranchTable collect_branches(ast::Module& module);

// Branch arm id construction shared by the table walk and the tracer.
std::string branch_arm_id(int line, const std::string& kind, int seq, const std::string& arm);

}  // namespace snipex
