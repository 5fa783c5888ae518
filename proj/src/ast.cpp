#include "imtlab/ast.hpp"

#include <sstream>
#include <stdexcept>

namespace imt {

const char* binop_symbol(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
  }
  return "?";
}

ExprPtr make_var(std::string name) {
  return std::make_shared<const Expr>(Expr{VarExpr{std::move(name)}});
}
ExprPtr make_const(Value v) {
  return std::make_shared<const Expr>(Expr{ConstExpr{v}});
}
ExprPtr make_bin(BinOp op, ExprPtr lhs, ExprPtr rhs) {
  return std::make_shared<const Expr>(Expr{BinExpr{op, std::move(lhs), std::move(rhs)}});
}
ExprPtr make_index(std::string array, ExprPtr index) {
  return std::make_shared<const Expr>(Expr{IndexExpr{std::move(array), std::move(index)}});
}

NameSet rd(const Expr& e) {
  NameSet out;
  struct Walker {
    NameSet& out;
    void walk(const Expr& e) {
      if (const auto* v = std::get_if<VarExpr>(&e.node)) {
        out.insert(v->name);
      } else if (const auto* b = std::get_if<BinExpr>(&e.node)) {
        walk(*b->lhs);
        walk(*b->rhs);
      } else if (const auto* ix = std::get_if<IndexExpr>(&e.node)) {
        out.insert(ix->array);
        walk(*ix->index);
      }
    }
  } w{out};
  w.walk(e);
  return out;
}

NameSet instr_reads(const Instr& i) {
  NameSet out;
  if (const auto* a = std::get_if<AssignInstr>(&i.node)) {
    out = rd(*a->value);
  } else if (const auto* a = std::get_if<ArrAssignInstr>(&i.node)) {
    out = rd(*a->index);
    NameSet more = rd(*a->value);
    out.insert(more.begin(), more.end());
  }
  return out;
}

CommandPtr make_single(Instr i) {
  return std::make_shared<const Command>(Command{SingleCmd{std::move(i)}});
}
CommandPtr make_seq(Instr head, CommandPtr tail) {
  return std::make_shared<const Command>(Command{SeqCmd{std::move(head), std::move(tail)}});
}
CommandPtr make_if(ExprPtr guard, CommandPtr then_cmd, CommandPtr else_cmd) {
  return std::make_shared<const Command>(
      Command{IfCmd{std::move(guard), std::move(then_cmd), std::move(else_cmd)}});
}
CommandPtr make_goto(std::string label) {
  return std::make_shared<const Command>(Command{GotoCmd{std::move(label)}});
}

CommandPtr skip_command() {
  static const CommandPtr skip = make_single(Instr{SkipInstr{}});
  return skip;
}

CommandPtr cons_instr(Instr head, CommandPtr tail) {
  if (tail && is_terminal(*tail)) return make_single(std::move(head));
  return make_seq(std::move(head), std::move(tail));
}

bool is_terminal(const Command& c) {
  const auto* s = std::get_if<SingleCmd>(&c.node);
  return s != nullptr && std::holds_alternative<SkipInstr>(s->instr.node);
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  if (const auto* v = std::get_if<VarExpr>(&a.node)) {
    return v->name == std::get<VarExpr>(b.node).name;
  }
  if (const auto* c = std::get_if<ConstExpr>(&a.node)) {
    const auto& d = std::get<ConstExpr>(b.node);
    return c->value.kind == d.value.kind && c->value.num == d.value.num;
  }
  if (const auto* x = std::get_if<BinExpr>(&a.node)) {
    const auto& y = std::get<BinExpr>(b.node);
    return x->op == y.op && expr_equal(*x->lhs, *y.lhs) && expr_equal(*x->rhs, *y.rhs);
  }
  const auto& x = std::get<IndexExpr>(a.node);
  const auto& y = std::get<IndexExpr>(b.node);
  return x.array == y.array && expr_equal(*x.index, *y.index);
}

bool instr_equal(const Instr& a, const Instr& b) {
  if (a.node.index() != b.node.index()) return false;
  if (std::holds_alternative<SkipInstr>(a.node)) return true;
  if (const auto* x = std::get_if<AssignInstr>(&a.node)) {
    const auto& y = std::get<AssignInstr>(b.node);
    return x->target == y.target && expr_equal(*x->value, *y.value);
  }
  if (const auto* x = std::get_if<ArrAssignInstr>(&a.node)) {
    const auto& y = std::get<ArrAssignInstr>(b.node);
    return x->array == y.array && expr_equal(*x->index, *y.index) &&
           expr_equal(*x->value, *y.value);
  }
  if (const auto* x = std::get_if<InputInstr>(&a.node)) {
    return x->target == std::get<InputInstr>(b.node).target;
  }
  if (const auto* x = std::get_if<CheckpointInstr>(&a.node)) {
    return x->omega == std::get<CheckpointInstr>(b.node).omega;
  }
  if (const auto* x = std::get_if<RebootInstr>(&a.node)) {
    return x->duration == std::get<RebootInstr>(b.node).duration;
  }
  return std::get<ToTaskInstr>(a.node).task == std::get<ToTaskInstr>(b.node).task;
}

bool command_equal(const Command& a, const Command& b) {
  if (a.node.index() != b.node.index()) return false;
  if (const auto* x = std::get_if<SingleCmd>(&a.node)) {
    return instr_equal(x->instr, std::get<SingleCmd>(b.node).instr);
  }
  if (const auto* x = std::get_if<SeqCmd>(&a.node)) {
    const auto& y = std::get<SeqCmd>(b.node);
    return instr_equal(x->head, y.head) && command_equal(*x->tail, *y.tail);
  }
  if (const auto* x = std::get_if<IfCmd>(&a.node)) {
    const auto& y = std::get<IfCmd>(b.node);
    return expr_equal(*x->guard, *y.guard) && command_equal(*x->then_cmd, *y.then_cmd) &&
           command_equal(*x->else_cmd, *y.else_cmd);
  }
  return std::get<GotoCmd>(a.node).label == std::get<GotoCmd>(b.node).label;
}

int command_size(const Command& c, bool count_transitions) {
  auto instr_weight = [&](const Instr& i) {
    if (!count_transitions && std::holds_alternative<ToTaskInstr>(i.node)) return 0;
    return 1;
  };
  if (const auto* s = std::get_if<SingleCmd>(&c.node)) return instr_weight(s->instr);
  if (const auto* s = std::get_if<SeqCmd>(&c.node)) {
    return instr_weight(s->head) + command_size(*s->tail, count_transitions);
  }
  if (const auto* s = std::get_if<IfCmd>(&c.node)) {
    return 1 + command_size(*s->then_cmd, count_transitions) +
           command_size(*s->else_cmd, count_transitions);
  }
  return count_transitions ? 1 : 0;  // goto
}

bool DeclInfo::is_volatile(const std::string& name) const {
  auto it = entries.find(name);
  return it != entries.end() && it->second.is_volatile;
}
bool DeclInfo::is_array(const std::string& name) const {
  auto it = entries.find(name);
  return it != entries.end() && it->second.is_array;
}
int64_t DeclInfo::array_length(const std::string& name) const {
  auto it = entries.find(name);
  return it == entries.end() ? 0 : it->second.length;
}

static void add_decls(DeclInfo& info, const std::vector<Decl>& decls, bool vol) {
  for (const auto& d : decls) {
    DeclInfo::Entry e;
    e.is_volatile = vol;
    e.is_array = d.is_array;
    e.length = d.is_array ? static_cast<int64_t>(d.init.size()) : 0;
    info.entries[d.name] = e;
  }
}

DeclInfo decl_info(const Program& p) {
  DeclInfo info;
  add_decls(info, p.nonvolatile, false);
  add_decls(info, p.volatiles, true);
  return info;
}

DeclInfo decl_info(const TaskProgram& p) {
  DeclInfo info;
  add_decls(info, p.shared, false);
  add_decls(info, p.local_nv, false);
  add_decls(info, p.local_vol, true);
  return info;
}

Store initial_store(const std::vector<Decl>& decls) {
  Store s;
  for (const auto& d : decls) {
    if (d.is_array) {
      for (size_t i = 0; i < d.init.size(); ++i) {
        s.insert(Loc{d.name, static_cast<int32_t>(i)}, Value::make_int(d.init[i]));
      }
    } else {
      s.insert(Loc{d.name, -1}, Value::make_int(d.init.empty() ? 0 : d.init[0]));
    }
  }
  return s;
}

// --- pretty printing -------------------------------------------------------

std::string expr_to_string(const Expr& e) {
  if (const auto* v = std::get_if<VarExpr>(&e.node)) return v->name;
  if (const auto* c = std::get_if<ConstExpr>(&e.node)) {
    if (c->value.kind == Value::Kind::Bool) return c->value.num ? "true" : "false";
    return std::to_string(c->value.num);
  }
  if (const auto* b = std::get_if<BinExpr>(&e.node)) {
    return "(" + expr_to_string(*b->lhs) + " " + binop_symbol(b->op) + " " +
           expr_to_string(*b->rhs) + ")";
  }
  const auto& ix = std::get<IndexExpr>(e.node);
  return ix.array + "[" + expr_to_string(*ix.index) + "]";
}

std::string instr_to_string(const Instr& i) {
  if (std::holds_alternative<SkipInstr>(i.node)) return "skip";
  if (const auto* a = std::get_if<AssignInstr>(&i.node)) {
    return a->target + " := " + expr_to_string(*a->value);
  }
  if (const auto* a = std::get_if<ArrAssignInstr>(&i.node)) {
    return a->array + "[" + expr_to_string(*a->index) + "] := " + expr_to_string(*a->value);
  }
  if (const auto* a = std::get_if<InputInstr>(&i.node)) return a->target + " := IN()";
  if (const auto* a = std::get_if<CheckpointInstr>(&i.node)) {
    std::string s = "checkpoint(";
    bool first = true;
    for (const auto& n : a->omega) {
      if (!first) s += ", ";
      first = false;
      s += n;
    }
    return s + ")";
  }
  if (const auto* a = std::get_if<RebootInstr>(&i.node)) {
    return "reboot(" + std::to_string(a->duration) + ")";
  }
  return "toTask(" + std::to_string(std::get<ToTaskInstr>(i.node).task) + ")";
}

static std::string ind(int n) { return std::string(static_cast<size_t>(n) * 2, ' '); }

std::string command_to_string(const Command& c, int indent) {
  if (const auto* s = std::get_if<SingleCmd>(&c.node)) {
    return ind(indent) + instr_to_string(s->instr);
  }
  if (const auto* s = std::get_if<SeqCmd>(&c.node)) {
    return ind(indent) + instr_to_string(s->head) + ";\n" + command_to_string(*s->tail, indent);
  }
  if (const auto* s = std::get_if<IfCmd>(&c.node)) {
    std::ostringstream os;
    os << ind(indent) << "if (" << expr_to_string(*s->guard) << ") {\n"
       << command_to_string(*s->then_cmd, indent + 1) << "\n"
       << ind(indent) << "} else {\n"
       << command_to_string(*s->else_cmd, indent + 1) << "\n"
       << ind(indent) << "}";
    return os.str();
  }
  return ind(indent) + "goto " + std::get<GotoCmd>(c.node).label;
}

static std::string decls_to_string(const std::vector<Decl>& decls) {
  std::ostringstream os;
  os << "{";
  for (const auto& d : decls) {
    os << " " << d.name;
    if (d.is_array) {
      os << "[" << d.init.size() << "] = {";
      for (size_t i = 0; i < d.init.size(); ++i) {
        if (i) os << ", ";
        os << d.init[i];
      }
      os << "}";
    } else {
      os << " = " << (d.init.empty() ? 0 : d.init[0]);
    }
  }
  os << " }";
  return os.str();
}

std::string program_to_string(const Program& p) {
  std::ostringstream os;
  os << "nv " << decls_to_string(p.nonvolatile) << "\n";
  os << "vol " << decls_to_string(p.volatiles) << "\n";
  os << "main {\n" << command_to_string(*p.body, 1) << "\n}\n";
  for (const auto& [label, cmd] : p.labels) {
    os << "label " << label << " {\n" << command_to_string(*cmd, 1) << "\n}\n";
  }
  return os.str();
}

std::string task_program_to_string(const TaskProgram& p) {
  std::ostringstream os;
  os << "ts " << decls_to_string(p.shared) << "\n";
  os << "tln " << decls_to_string(p.local_nv) << "\n";
  os << "tlv " << decls_to_string(p.local_vol) << "\n";
  for (const auto& t : p.tasks) {
    os << "task " << t.id << " (";
    bool first = true;
    for (const auto& n : t.omega) {
      if (!first) os << ", ";
      first = false;
      os << n;
    }
    os << ") {\n" << command_to_string(*t.body, 1) << "\n}\n";
  }
  return os.str();
}

}  // namespace imt
