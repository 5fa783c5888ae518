#include "imtlab/parse.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace imt {
namespace {

enum class Tok : uint8_t {
  Ident, Int, LBrace, RBrace, LParen, RParen, LBracket, RBracket,
  Comma, Semicolon, Assign,  // :=
  Eq,                        // =
  Plus, Minus, Star, Lt, Le, Gt, Ge, EqEq, Ne, AndAnd, OrOr,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int64_t num = 0;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { next(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    next();
    return t;
  }

 private:
  void next() {
    skip_ws();
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= text_.size()) {
      tok_.kind = Tok::End;
      tok_.text = "<end>";
      return;
    }
    char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        advance();
      }
      tok_.kind = Tok::Ident;
      tok_.text = text_.substr(start, pos_ - start);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < text_.size() &&
         std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) && minus_is_literal_)) {
      size_t start = pos_;
      if (c == '-') advance();
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        advance();
      }
      tok_.kind = Tok::Int;
      tok_.text = text_.substr(start, pos_ - start);
      tok_.num = std::stoll(tok_.text);
      return;
    }
    auto two = [&](char a, char b) {
      return c == a && pos_ + 1 < text_.size() && text_[pos_ + 1] == b;
    };
    if (two(':', '=')) { advance(); advance(); tok_.kind = Tok::Assign; tok_.text = ":="; return; }
    if (two('<', '=')) { advance(); advance(); tok_.kind = Tok::Le; tok_.text = "<="; return; }
    if (two('>', '=')) { advance(); advance(); tok_.kind = Tok::Ge; tok_.text = ">="; return; }
    if (two('=', '=')) { advance(); advance(); tok_.kind = Tok::EqEq; tok_.text = "=="; return; }
    if (two('!', '=')) { advance(); advance(); tok_.kind = Tok::Ne; tok_.text = "!="; return; }
    if (two('&', '&')) { advance(); advance(); tok_.kind = Tok::AndAnd; tok_.text = "&&"; return; }
    if (two('|', '|')) { advance(); advance(); tok_.kind = Tok::OrOr; tok_.text = "||"; return; }
    advance();
    switch (c) {
      case '{': tok_.kind = Tok::LBrace; break;
      case '}': tok_.kind = Tok::RBrace; break;
      case '(': tok_.kind = Tok::LParen; break;
      case ')': tok_.kind = Tok::RParen; break;
      case '[': tok_.kind = Tok::LBracket; break;
      case ']': tok_.kind = Tok::RBracket; break;
      case ',': tok_.kind = Tok::Comma; break;
      case ';': tok_.kind = Tok::Semicolon; break;
      case '=': tok_.kind = Tok::Eq; break;
      case '+': tok_.kind = Tok::Plus; break;
      case '-': tok_.kind = Tok::Minus; break;
      case '*': tok_.kind = Tok::Star; break;
      case '<': tok_.kind = Tok::Lt; break;
      case '>': tok_.kind = Tok::Gt; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line_, col_ - 1);
    }
    tok_.text = std::string(1, c);
  }

  void skip_ws() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token tok_;
  // Literal negatives only appear in declaration blocks; expressions use
  // binary minus. The parser toggles this.
  bool minus_is_literal_ = true;

  friend class Parser;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lex_(text) {}

  Program parse_program() {
    Program p;
    if (at_keyword("nv")) {
      expect_keyword("nv");
      p.nonvolatile = parse_decls();
    }
    if (at_keyword("vol")) {
      expect_keyword("vol");
      p.volatiles = parse_decls();
    }
    expect_keyword("main");
    expect(Tok::LBrace);
    p.body = parse_command();
    expect(Tok::RBrace);
    while (at_keyword("label")) {
      expect_keyword("label");
      Token name = expect(Tok::Ident);
      expect(Tok::LBrace);
      CommandPtr cmd = parse_command();
      expect(Tok::RBrace);
      p.labels.emplace_back(name.text, cmd);
    }
    expect(Tok::End);
    return p;
  }

  TaskProgram parse_task_program() {
    TaskProgram p;
    expect_keyword("ts");
    p.shared = parse_decls();
    if (at_keyword("tln")) {
      expect_keyword("tln");
      p.local_nv = parse_decls();
    }
    if (at_keyword("tlv")) {
      expect_keyword("tlv");
      p.local_vol = parse_decls();
    }
    while (at_keyword("task")) {
      expect_keyword("task");
      TaskDef def;
      Token id = expect(Tok::Int);
      def.id = static_cast<int>(id.num);
      expect(Tok::LParen);
      def.omega = parse_name_list();
      expect(Tok::RParen);
      expect(Tok::LBrace);
      def.body = parse_command();
      expect(Tok::RBrace);
      p.tasks.push_back(std::move(def));
    }
    if (p.tasks.empty()) fail("task program needs at least one task");
    expect(Tok::End);
    return p;
  }

 private:
  bool at_keyword(const char* kw) const {
    return lex_.peek().kind == Tok::Ident && lex_.peek().text == kw;
  }

  void expect_keyword(const char* kw) {
    Token t = lex_.take();
    if (t.kind != Tok::Ident || t.text != kw) {
      throw ParseError("expected '" + std::string(kw) + "', found '" + t.text + "'", t.line, t.col);
    }
  }

  Token expect(Tok kind) {
    Token t = lex_.take();
    if (t.kind != kind) {
      throw ParseError("unexpected token '" + t.text + "'", t.line, t.col);
    }
    return t;
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(msg, lex_.peek().line, lex_.peek().col);
  }

  std::vector<Decl> parse_decls() {
    expect(Tok::LBrace);
    std::vector<Decl> out;
    while (lex_.peek().kind != Tok::RBrace) {
      Decl d;
      d.name = expect(Tok::Ident).text;
      if (lex_.peek().kind == Tok::LBracket) {
        lex_.take();
        Token len = expect(Tok::Int);
        expect(Tok::RBracket);
        expect(Tok::Eq);
        expect(Tok::LBrace);
        d.is_array = true;
        while (lex_.peek().kind != Tok::RBrace) {
          d.init.push_back(expect(Tok::Int).num);
          if (lex_.peek().kind == Tok::Comma) lex_.take();
        }
        expect(Tok::RBrace);
        if (static_cast<int64_t>(d.init.size()) != len.num) {
          throw ParseError("array initializer length mismatch for '" + d.name + "'", len.line,
                           len.col);
        }
      } else {
        expect(Tok::Eq);
        d.init.push_back(expect(Tok::Int).num);
      }
      out.push_back(std::move(d));
      if (lex_.peek().kind == Tok::Comma) lex_.take();
    }
    expect(Tok::RBrace);
    return out;
  }

  NameSet parse_name_list() {
    NameSet out;
    while (lex_.peek().kind == Tok::Ident) {
      out.insert(lex_.take().text);
      if (lex_.peek().kind == Tok::Comma) {
        lex_.take();
      } else {
        break;
      }
    }
    return out;
  }

  CommandPtr parse_command() {
    if (at_keyword("if")) {
      expect_keyword("if");
      expect(Tok::LParen);
      ExprPtr guard = parse_expr();
      expect(Tok::RParen);
      expect(Tok::LBrace);
      CommandPtr then_cmd = parse_command();
      expect(Tok::RBrace);
      expect_keyword("else");
      expect(Tok::LBrace);
      CommandPtr else_cmd = parse_command();
      expect(Tok::RBrace);
      return make_if(guard, then_cmd, else_cmd);
    }
    if (at_keyword("goto")) {
      expect_keyword("goto");
      Token label = expect(Tok::Ident);
      return make_goto(label.text);
    }
    Instr head = parse_instr();
    bool tail_only = std::holds_alternative<ToTaskInstr>(head.node);
    if (!tail_only && lex_.peek().kind == Tok::Semicolon) {
      lex_.take();
      return make_seq(std::move(head), parse_command());
    }
    return make_single(std::move(head));
  }

  Instr parse_instr() {
    if (at_keyword("skip")) {
      lex_.take();
      return Instr{SkipInstr{}};
    }
    if (at_keyword("checkpoint")) {
      lex_.take();
      expect(Tok::LParen);
      NameSet omega = parse_name_list();
      expect(Tok::RParen);
      return Instr{CheckpointInstr{std::move(omega)}};
    }
    if (at_keyword("reboot")) {
      Token t = lex_.take();
      expect(Tok::LParen);
      Token n = expect(Tok::Int);
      expect(Tok::RParen);
      // Kept parseable so traces round-trip; validate() rejects it in source.
      (void)t;
      return Instr{RebootInstr{n.num}};
    }
    if (at_keyword("toTask")) {
      lex_.take();
      expect(Tok::LParen);
      Token id = expect(Tok::Int);
      expect(Tok::RParen);
      return Instr{ToTaskInstr{static_cast<int>(id.num)}};
    }
    Token name = expect(Tok::Ident);
    if (lex_.peek().kind == Tok::LBracket) {
      lex_.take();
      ExprPtr index = parse_expr();
      expect(Tok::RBracket);
      expect(Tok::Assign);
      ExprPtr value = parse_expr();
      return Instr{ArrAssignInstr{name.text, index, value}};
    }
    expect(Tok::Assign);
    if (at_keyword("IN")) {
      lex_.take();
      expect(Tok::LParen);
      expect(Tok::RParen);
      return Instr{InputInstr{name.text}};
    }
    ExprPtr value = parse_expr();
    return Instr{AssignInstr{name.text, value}};
  }

  // Precedence: || < && < comparison < additive < multiplicative < primary.
  ExprPtr parse_expr() {
    lex_.minus_is_literal_ = false;
    ExprPtr e = parse_or();
    lex_.minus_is_literal_ = true;
    return e;
  }

  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (lex_.peek().kind == Tok::OrOr) {
      lex_.take();
      lhs = make_bin(BinOp::Or, lhs, parse_and());
    }
    return lhs;
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_cmp();
    while (lex_.peek().kind == Tok::AndAnd) {
      lex_.take();
      lhs = make_bin(BinOp::And, lhs, parse_cmp());
    }
    return lhs;
  }

  ExprPtr parse_cmp() {
    ExprPtr lhs = parse_add();
    for (;;) {
      BinOp op;
      switch (lex_.peek().kind) {
        case Tok::Lt: op = BinOp::Lt; break;
        case Tok::Le: op = BinOp::Le; break;
        case Tok::Gt: op = BinOp::Gt; break;
        case Tok::Ge: op = BinOp::Ge; break;
        case Tok::EqEq: op = BinOp::Eq; break;
        case Tok::Ne: op = BinOp::Ne; break;
        default: return lhs;
      }
      lex_.take();
      lhs = make_bin(op, lhs, parse_add());
    }
  }

  ExprPtr parse_add() {
    ExprPtr lhs = parse_mul();
    for (;;) {
      if (lex_.peek().kind == Tok::Plus) {
        lex_.take();
        lhs = make_bin(BinOp::Add, lhs, parse_mul());
      } else if (lex_.peek().kind == Tok::Minus) {
        lex_.take();
        lhs = make_bin(BinOp::Sub, lhs, parse_mul());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_mul() {
    ExprPtr lhs = parse_primary();
    while (lex_.peek().kind == Tok::Star) {
      lex_.take();
      lhs = make_bin(BinOp::Mul, lhs, parse_primary());
    }
    return lhs;
  }

  ExprPtr parse_primary() {
    const Token& t = lex_.peek();
    if (t.kind == Tok::Int) {
      Token v = lex_.take();
      return make_const(Value::make_int(v.num));
    }
    if (t.kind == Tok::Ident && t.text == "true") {
      lex_.take();
      return make_const(Value::make_bool(true));
    }
    if (t.kind == Tok::Ident && t.text == "false") {
      lex_.take();
      return make_const(Value::make_bool(false));
    }
    if (t.kind == Tok::Ident) {
      Token name = lex_.take();
      if (lex_.peek().kind == Tok::LBracket) {
        lex_.take();
        ExprPtr index = parse_expr_nested();
        expect(Tok::RBracket);
        return make_index(name.text, index);
      }
      return make_var(name.text);
    }
    if (t.kind == Tok::LParen) {
      lex_.take();
      ExprPtr e = parse_expr_nested();
      expect(Tok::RParen);
      return e;
    }
    throw ParseError("expected expression, found '" + t.text + "'", t.line, t.col);
  }

  ExprPtr parse_expr_nested() { return parse_or(); }

  Lexer lex_;
};

}  // namespace

ValidationError::ValidationError(std::vector<Diagnostic> diags)
    : std::runtime_error([&diags] {
        std::ostringstream os;
        os << "validation failed:";
        for (const auto& d : diags) os << "\n  " << d.message;
        return os.str();
      }()),
      diagnostics(std::move(diags)) {}

Program parse_program(const std::string& text) { return Parser(text).parse_program(); }

TaskProgram parse_task_program(const std::string& text) {
  return Parser(text).parse_task_program();
}

bool looks_like_task_program(const std::string& text) {
  size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    } else if (text[i] == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else {
      break;
    }
  }
  return text.compare(i, 3, "ts ") == 0 || text.compare(i, 3, "ts{") == 0 ||
         text.compare(i, 3, "ts\n") == 0 || text.compare(i, 3, "ts\t") == 0;
}

namespace {

class Validator {
 public:
  Validator(const DeclInfo& info, std::vector<Diagnostic>& out) : info_(info), out_(out) {}

  void check_expr(const Expr& e) {
    if (const auto* v = std::get_if<VarExpr>(&e.node)) {
      if (!info_.known(v->name)) {
        report("undeclared name '" + v->name + "'");
      } else if (info_.is_array(v->name)) {
        report("array '" + v->name + "' used without index");
      }
    } else if (const auto* b = std::get_if<BinExpr>(&e.node)) {
      check_expr(*b->lhs);
      check_expr(*b->rhs);
    } else if (const auto* ix = std::get_if<IndexExpr>(&e.node)) {
      check_array_index(ix->array, *ix->index);
    }
  }

  void check_array_index(const std::string& array, const Expr& index) {
    if (!info_.known(array)) {
      report("undeclared name '" + array + "'");
    } else if (!info_.is_array(array)) {
      report("'" + array + "' indexed but not an array");
    } else if (const auto* c = std::get_if<ConstExpr>(&index.node)) {
      if (c->value.kind == Value::Kind::Int &&
          (c->value.num < 0 || c->value.num >= info_.array_length(array))) {
        report("index " + std::to_string(c->value.num) + " out of bounds for '" + array +
               "' (length " + std::to_string(info_.array_length(array)) + ")");
      }
    }
    check_expr(index);
  }

  void check_scalar_target(const std::string& name) {
    if (!info_.known(name)) {
      report("undeclared name '" + name + "'");
    } else if (info_.is_array(name)) {
      report("array '" + name + "' assigned without index");
    }
  }

  void check_instr(const Instr& i, bool in_task) {
    if (const auto* a = std::get_if<AssignInstr>(&i.node)) {
      check_scalar_target(a->target);
      check_expr(*a->value);
    } else if (const auto* a = std::get_if<ArrAssignInstr>(&i.node)) {
      check_array_index(a->array, *a->index);
      check_expr(*a->value);
    } else if (const auto* a = std::get_if<InputInstr>(&i.node)) {
      check_scalar_target(a->target);
    } else if (const auto* a = std::get_if<CheckpointInstr>(&i.node)) {
      for (const auto& n : a->omega) {
        if (!info_.known(n)) {
          report("undeclared name '" + n + "' in checkpoint set");
        } else if (info_.is_volatile(n)) {
          report("volatile '" + n + "' in checkpoint set");
        }
      }
      if (in_task) report("checkpoint not allowed inside a task body");
    } else if (std::holds_alternative<RebootInstr>(i.node)) {
      report("reboot is runtime-injected and not allowed in source programs");
    } else if (const auto* t = std::get_if<ToTaskInstr>(&i.node)) {
      if (!in_task) {
        report("toTask only allowed inside task programs");
      } else if (task_ids_ && !task_ids_->count(t->task)) {
        report("toTask target " + std::to_string(t->task) + " does not exist");
      }
    }
  }

  void check_command(const Command& c, bool in_task) {
    if (const auto* s = std::get_if<SingleCmd>(&c.node)) {
      check_instr(s->instr, in_task);
    } else if (const auto* s = std::get_if<SeqCmd>(&c.node)) {
      check_instr(s->head, in_task);
      check_command(*s->tail, in_task);
    } else if (const auto* s = std::get_if<IfCmd>(&c.node)) {
      check_expr(*s->guard);
      check_command(*s->then_cmd, in_task);
      check_command(*s->else_cmd, in_task);
    } else if (const auto* s = std::get_if<GotoCmd>(&c.node)) {
      if (in_task) {
        report("goto not allowed inside a task body");
      } else if (labels_ && !labels_->count(s->label)) {
        report("goto target '" + s->label + "' does not exist");
      }
    }
  }

  void report(std::string msg) { out_.push_back(Diagnostic{std::move(msg)}); }

  const DeclInfo& info_;
  std::vector<Diagnostic>& out_;
  const std::set<std::string>* labels_ = nullptr;
  const std::set<int>* task_ids_ = nullptr;
};

void check_duplicate_decls(const std::vector<const std::vector<Decl>*>& blocks,
                           std::vector<Diagnostic>& out) {
  std::set<std::string> seen;
  for (const auto* block : blocks) {
    for (const auto& d : *block) {
      if (!seen.insert(d.name).second) {
        out.push_back(Diagnostic{"duplicate declaration of '" + d.name + "'"});
      }
      if (d.is_array && d.init.empty()) {
        out.push_back(Diagnostic{"array '" + d.name + "' has zero length"});
      }
    }
  }
}

}  // namespace

std::vector<Diagnostic> validate(const Program& p) {
  std::vector<Diagnostic> out;
  check_duplicate_decls({&p.nonvolatile, &p.volatiles}, out);
  DeclInfo info = decl_info(p);
  std::set<std::string> labels;
  for (const auto& [label, _] : p.labels) {
    if (!labels.insert(label).second) {
      out.push_back(Diagnostic{"duplicate label '" + label + "'"});
    }
  }
  Validator v(info, out);
  v.labels_ = &labels;
  v.check_command(*p.body, /*in_task=*/false);
  for (const auto& [_, cmd] : p.labels) v.check_command(*cmd, /*in_task=*/false);
  return out;
}

std::vector<Diagnostic> validate(const TaskProgram& p) {
  std::vector<Diagnostic> out;
  check_duplicate_decls({&p.shared, &p.local_nv, &p.local_vol}, out);
  DeclInfo info = decl_info(p);
  std::set<int> ids;
  std::set<std::string> shared_names;
  for (const auto& d : p.shared) shared_names.insert(d.name);
  for (const auto& t : p.tasks) {
    if (!ids.insert(t.id).second) {
      out.push_back(Diagnostic{"duplicate task id " + std::to_string(t.id)});
    }
  }
  Validator v(info, out);
  v.task_ids_ = &ids;
  for (const auto& t : p.tasks) {
    for (const auto& n : t.omega) {
      if (!shared_names.count(n)) {
        out.push_back(
            Diagnostic{"task " + std::to_string(t.id) + ": omega name '" + n +
                       "' is not task-shared"});
      }
    }
    v.check_command(*t.body, /*in_task=*/true);
  }
  return out;
}

Program parse(const std::string& text) {
  Program p = parse_program(text);
  auto diags = validate(p);
  if (!diags.empty()) throw ValidationError(std::move(diags));
  return p;
}

TaskProgram parse_tasks(const std::string& text) {
  TaskProgram p = parse_task_program(text);
  auto diags = validate(p);
  if (!diags.empty()) throw ValidationError(std::move(diags));
  return p;
}

}  // namespace imt
