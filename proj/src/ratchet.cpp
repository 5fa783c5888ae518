#include "imtlab/variants.hpp"

namespace imt {
namespace {

// Rewriting state: W and R accumulate the non-volatile names written and
// read since the current region start. Volatile accesses never force a
// checkpoint (they are restored from the context on reboot) but their reads
// still flow into R harmlessly.
struct Rewriter {
  const DeclInfo& info;
  std::vector<Decl>* fresh_decls;
  int counter = 0;

  std::string fresh_temp() { return "_t" + std::to_string(counter++); }

  bool nv(const std::string& name) const { return info.is_nonvolatile(name); }

  CommandPtr rewrite(const Command& c, NameSet w, NameSet r) {
    if (const auto* s = std::get_if<SingleCmd>(&c.node)) {
      return rewrite_instr(s->instr, skip_command(), std::move(w), std::move(r));
    }
    if (const auto* s = std::get_if<SeqCmd>(&c.node)) {
      return rewrite_instr(s->head, s->tail, std::move(w), std::move(r));
    }
    if (const auto* s = std::get_if<IfCmd>(&c.node)) {
      NameSet r2 = r;
      NameSet guard_reads = rd(*s->guard);
      r2.insert(guard_reads.begin(), guard_reads.end());
      return make_if(s->guard, rewrite(*s->then_cmd, w, r2), rewrite(*s->else_cmd, w, r2));
    }
    throw EvalError("ratchet rewriting expects checkpoint- and goto-free commands");
  }

  CommandPtr rewrite_instr(const Instr& instr, const CommandPtr& tail, NameSet w, NameSet r) {
    auto continue_with = [&](NameSet w2, NameSet r2) {
      if (is_terminal(*tail)) return skip_command();
      return rewrite(*tail, std::move(w2), std::move(r2));
    };
    auto keep = [&](NameSet w2, NameSet r2) {
      return cons_instr(instr, continue_with(std::move(w2), std::move(r2)));
    };

    if (std::holds_alternative<SkipInstr>(instr.node)) return keep(w, r);
    if (std::holds_alternative<CheckpointInstr>(instr.node) ||
        std::holds_alternative<RebootInstr>(instr.node) ||
        std::holds_alternative<ToTaskInstr>(instr.node)) {
      throw EvalError("ratchet rewriting expects checkpoint-free source commands");
    }

    if (const auto* a = std::get_if<AssignInstr>(&instr.node)) {
      NameSet own = rd(*a->value);
      NameSet r_all = r;
      r_all.insert(own.begin(), own.end());
      const std::string& x = a->target;
      if (!nv(x)) return keep(w, r_all);
      if (w.count(x)) return keep(w, r_all);  // write-dominated
      if (!r_all.count(x)) {                  // first access is this write
        NameSet w2 = w;
        w2.insert(x);
        return keep(std::move(w2), std::move(r_all));
      }
      if (own.count(x)) {
        // x := e with x in rd(e): split through a fresh temporary so the
        // read lands before the checkpoint and the write after it.
        std::string tmp = fresh_temp();
        fresh_decls->push_back(Decl{tmp, false, {0}});
        CommandPtr rest = continue_with(NameSet{x}, NameSet{tmp});
        CommandPtr assign = cons_instr(Instr{AssignInstr{x, make_var(tmp)}}, rest);
        CommandPtr cp = cons_instr(Instr{CheckpointInstr{}}, assign);
        return cons_instr(Instr{AssignInstr{tmp, a->value}}, cp);
      }
      // Read earlier in the region: checkpoint right before the write.
      CommandPtr rest = continue_with(NameSet{x}, own);
      CommandPtr assign = cons_instr(instr, rest);
      return cons_instr(Instr{CheckpointInstr{}}, assign);
    }

    if (const auto* a = std::get_if<ArrAssignInstr>(&instr.node)) {
      NameSet own = rd(*a->index);
      NameSet value_reads = rd(*a->value);
      own.insert(value_reads.begin(), value_reads.end());
      NameSet r_all = r;
      r_all.insert(own.begin(), own.end());
      const std::string& arr = a->array;
      if (!nv(arr)) return keep(w, r_all);
      if (!r_all.count(arr)) {
        NameSet w2 = w;
        w2.insert(arr);
        return keep(std::move(w2), std::move(r_all));
      }
      if (own.count(arr)) {
        // The instruction itself reads the array: hoist index and value
        // into temporaries, checkpoint, then store.
        std::string tv = fresh_temp();
        std::string ti = fresh_temp();
        fresh_decls->push_back(Decl{tv, false, {0}});
        fresh_decls->push_back(Decl{ti, false, {0}});
        CommandPtr rest = continue_with(NameSet{arr}, NameSet{tv, ti});
        CommandPtr store =
            cons_instr(Instr{ArrAssignInstr{arr, make_var(ti), make_var(tv)}}, rest);
        CommandPtr cp = cons_instr(Instr{CheckpointInstr{}}, store);
        CommandPtr idx = cons_instr(Instr{AssignInstr{ti, a->index}}, cp);
        return cons_instr(Instr{AssignInstr{tv, a->value}}, idx);
      }
      CommandPtr rest = continue_with(NameSet{arr}, own);
      CommandPtr store = cons_instr(instr, rest);
      return cons_instr(Instr{CheckpointInstr{}}, store);
    }

    const auto& in = std::get<InputInstr>(instr.node);
    const std::string& x = in.target;
    NameSet r_all = r;
    if (!nv(x) || w.count(x)) return keep(w, r_all);
    if (!r_all.count(x)) {
      NameSet w2 = w;
      w2.insert(x);
      return keep(std::move(w2), std::move(r_all));
    }
    CommandPtr rest = continue_with(NameSet{x}, NameSet{});
    CommandPtr get = cons_instr(instr, rest);
    return cons_instr(Instr{CheckpointInstr{}}, get);
  }
};

}  // namespace

Program rewrite_ratchet(const Program& p) {
  Program out = p;
  DeclInfo info = decl_info(p);
  std::vector<Decl> fresh;
  Rewriter rw{info, &fresh};
  out.body = rw.rewrite(*p.body, {}, {});
  // Fresh temporaries are volatile: they are saved with the context at the
  // inserted checkpoint, so re-execution reads the captured value.
  out.volatiles.insert(out.volatiles.end(), fresh.begin(), fresh.end());
  return out;
}

}  // namespace imt
