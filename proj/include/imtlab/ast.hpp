#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "imtlab/store.hpp"
#include "imtlab/value.hpp"

namespace imt {

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

enum class BinOp : uint8_t {
  Add, Sub, Mul, Lt, Le, Gt, Ge, Eq, Ne, And, Or,
};

const char* binop_symbol(BinOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct VarExpr {
  std::string name;
};
struct ConstExpr {
  Value value;  // Int or Bool literal
};
struct BinExpr {
  BinOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};
struct IndexExpr {
  std::string array;
  ExprPtr index;
};

struct Expr {
  std::variant<VarExpr, ConstExpr, BinExpr, IndexExpr> node;
};

ExprPtr make_var(std::string name);
ExprPtr make_const(Value v);
ExprPtr make_bin(BinOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr make_index(std::string array, ExprPtr index);

// Locations syntactically read by e: variable names plus whole-array names
// for any a[e'] (per-cell precision exists only dynamically).
NameSet rd(const Expr& e);

// ---------------------------------------------------------------------------
// Instructions and commands
// ---------------------------------------------------------------------------

struct SkipInstr {};
struct AssignInstr {
  std::string target;
  ExprPtr value;
};
struct ArrAssignInstr {
  std::string array;
  ExprPtr index;
  ExprPtr value;
};
struct InputInstr {
  std::string target;
};
struct CheckpointInstr {
  NameSet omega;
};
// Runtime-injected only; never parsed from source programs.
struct RebootInstr {
  int64_t duration = 0;
};
struct ToTaskInstr {
  int task = 0;
};

struct Instr {
  std::variant<SkipInstr, AssignInstr, ArrAssignInstr, InputInstr,
               CheckpointInstr, RebootInstr, ToTaskInstr>
      node;
};

// Locations read by an instruction (rd of its expressions).
NameSet instr_reads(const Instr& i);

struct Command;
using CommandPtr = std::shared_ptr<const Command>;

// Commands form a finite tree: branches only in tail position, no loops.
struct SingleCmd {
  Instr instr;
};
struct SeqCmd {
  Instr head;
  CommandPtr tail;
};
struct IfCmd {
  ExprPtr guard;
  CommandPtr then_cmd;
  CommandPtr else_cmd;
};
struct GotoCmd {
  std::string label;
};

struct Command {
  std::variant<SingleCmd, SeqCmd, IfCmd, GotoCmd> node;
};

CommandPtr make_single(Instr i);
CommandPtr make_seq(Instr head, CommandPtr tail);
CommandPtr make_if(ExprPtr guard, CommandPtr then_cmd, CommandPtr else_cmd);
CommandPtr make_goto(std::string label);
CommandPtr skip_command();

// Sequence an instruction in front of a command, collapsing a trailing skip.
CommandPtr cons_instr(Instr head, CommandPtr tail);

bool is_terminal(const Command& c);  // c == skip
bool command_equal(const Command& a, const Command& b);
bool expr_equal(const Expr& a, const Expr& b);
bool instr_equal(const Instr& a, const Instr& b);

// Number of instruction nodes (transitions excluded when requested).
int command_size(const Command& c, bool count_transitions = true);

// ---------------------------------------------------------------------------
// Programs
// ---------------------------------------------------------------------------

struct Decl {
  std::string name;
  bool is_array = false;
  std::vector<int64_t> init;  // one element for scalars
};

struct Program {
  std::vector<Decl> nonvolatile;
  std::vector<Decl> volatiles;
  CommandPtr body;
  // Labeled blocks produced by task translation; empty for plain programs.
  // Iteration order is the declaration order of the labels.
  std::vector<std::pair<std::string, CommandPtr>> labels;
};

struct TaskDef {
  int id = 0;
  NameSet omega;
  CommandPtr body;
};

struct TaskProgram {
  std::vector<Decl> shared;     // task-shared, non-volatile
  std::vector<Decl> local_nv;   // task-local, non-volatile
  std::vector<Decl> local_vol;  // task-local, volatile
  std::vector<TaskDef> tasks;   // first task is the entry
};

// Declaration lookup shared by validation, analysis and interpretation.
struct DeclInfo {
  struct Entry {
    bool is_volatile = false;
    bool is_array = false;
    int64_t length = 0;
  };
  std::map<std::string, Entry> entries;

  bool known(const std::string& name) const { return entries.count(name) != 0; }
  bool is_volatile(const std::string& name) const;
  bool is_nonvolatile(const std::string& name) const { return known(name) && !is_volatile(name); }
  bool is_array(const std::string& name) const;
  int64_t array_length(const std::string& name) const;
};

DeclInfo decl_info(const Program& p);
DeclInfo decl_info(const TaskProgram& p);

// Initial stores from the declaration blocks.
Store initial_store(const std::vector<Decl>& decls);

// ---------------------------------------------------------------------------
// Pretty printing (parse . pretty_print == identity up to whitespace)
// ---------------------------------------------------------------------------

std::string expr_to_string(const Expr& e);
std::string instr_to_string(const Instr& i);
std::string command_to_string(const Command& c, int indent = 0);
std::string program_to_string(const Program& p);
std::string task_program_to_string(const TaskProgram& p);

}  // namespace imt
