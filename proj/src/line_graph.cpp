#include "ojacc/line_graph.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "ojacc/error.hpp"

namespace ojacc {

auto LineGraph::at(const LGId& v) const -> const LGVertex& {
   auto it = vs_.find(v);
   if (it == vs_.end()) throw usage_error("no line-graph vertex '" + v + "'");
   return it->second;
}

auto LineGraph::mut(const LGId& v) -> LGVertex& {
   auto it = vs_.find(v);
   if (it == vs_.end()) throw usage_error("no line-graph vertex '" + v + "'");
   return it->second;
}

auto LineGraph::has_face(const LGId& i, const LGId& j) const -> bool {
   auto it = vs_.find(i);
   return it != vs_.end() && it->second.succ.count(j) != 0;
}

auto LineGraph::faces() const -> std::vector<std::pair<LGId, LGId>> {
   std::vector<std::pair<LGId, LGId>> out;
   for (const auto& [id, v] : vs_)
      if (!v.meta)
         for (const auto& s : v.succ)
            if (!vs_.at(s).meta) out.push_back({id, s});
   std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
      auto ka = std::make_pair(vs_.at(a.first).order, vs_.at(a.second).order);
      auto kb = std::make_pair(vs_.at(b.first).order, vs_.at(b.second).order);
      return ka < kb;
   });
   return out;
}

auto LineGraph::labeled_count() const -> std::size_t {
   return static_cast<std::size_t>(std::count_if(vs_.begin(), vs_.end(), [](const auto& kv) { return !kv.second.meta; }));
}

auto LineGraph::edge_count() const -> std::size_t {
   std::size_t n = 0;
   for (const auto& [id, v] : vs_) n += v.succ.size();
   return n;
}

auto LineGraph::add(const LGId& id, ExprPtr label, bool meta) -> LGVertex& {
   if (vs_.count(id)) throw usage_error("duplicate line-graph vertex '" + id + "'");
   auto& v = vs_[id];
   v.id = id;
   v.label = std::move(label);
   v.meta = meta;
   v.order = next_order_++;
   return v;
}

auto LineGraph::fresh_id() -> LGId {
   for (;;)
      if (auto n = "f" + std::to_string(next_fill_++); !vs_.count(n)) return n;
}

void LineGraph::link(const LGId& i, const LGId& j) {
   mut(i).succ.insert(j);
   mut(j).pred.insert(i);
}

void LineGraph::unlink(const LGId& i, const LGId& j) {
   mut(i).succ.erase(j);
   mut(j).pred.erase(i);
}

void LineGraph::remove(const LGId& v) {
   auto node = at(v);
   for (const auto& p : node.pred) mut(p).succ.erase(v);
   for (const auto& s : node.succ) mut(s).pred.erase(v);
   vs_.erase(v);
}

auto build_line_graph(const DiffGraph& g) -> LineGraph {
   LineGraph lg;
   for (const auto& r : g.roots()) lg.add("y:" + r, nullptr, true);
   for (const auto& t : g.terminals()) lg.add("x:" + t, nullptr, true);
   for (const auto& e : g.edges()) lg.add(e.id, label_expr(e.label));
   for (const auto& e : g.edges()) {
      if (g.is_root(e.src)) lg.link("y:" + e.src, e.id);
      if (g.is_terminal(e.dst)) lg.link(e.id, "x:" + e.dst);
      for (auto k : g.out_edges(e.dst)) lg.link(e.id, g.edges()[k].id);
   }
   return lg;
}

namespace {

auto mults_of(const ExprPtr& a, const ExprPtr& b) -> int {
   return a->kind == ExprKind::Unit || b->kind == ExprKind::Unit ? 0 : 1;
}

// Drop dead vertices, then merge vertices with identical neighbourhoods, until stable.
void settle(LineGraph& lg, std::vector<EliminationStep>& out) {
   for (bool changed = true; changed;) {
      changed = false;
      for (const auto& [id, v] : lg.vertices()) {
         if (v.meta || (!v.pred.empty() && !v.succ.empty())) continue;
         auto gone = id;
         lg.remove(gone);
         out.push_back({"remove-isolated", gone, "", {}, {}, {gone}, 0, ""});
         changed = true;
         break;
      }
      if (changed) continue;
      std::vector<const LGVertex*> live;
      for (const auto& [id, v] : lg.vertices())
         if (!v.meta) live.push_back(&v);
      std::sort(live.begin(), live.end(), [](auto a, auto b) { return a->order < b->order; });
      for (std::size_t a = 0; a < live.size() && !changed; ++a)
         for (std::size_t b = a + 1; b < live.size() && !changed; ++b) {
            if (live[a]->pred != live[b]->pred || live[a]->succ != live[b]->succ) continue;
            auto keep = live[a]->id, drop = live[b]->id;
            auto merged = sum({live[a]->label, live[b]->label});
            lg.mut(keep).label = merged;
            lg.remove(drop);
            out.push_back({"merge", keep, drop, {}, {keep}, {drop}, 0, ""});
            changed = true;
         }
   }
}

void require_face(const LineGraph& lg, const LGId& i, const LGId& j) {
   if (!lg.has_face(i, j)) throw usage_error("no face (" + i + ", " + j + ")");
   if (lg.at(i).meta || lg.at(j).meta) throw usage_error("face (" + i + ", " + j + ") touches a meta vertex");
}

auto strict_subset(const std::set<LGId>& a, const std::set<LGId>& b) -> bool {
   return a.size() < b.size() && std::includes(b.begin(), b.end(), a.begin(), a.end());
}

auto subset(const std::set<LGId>& a, const std::set<LGId>& b) -> bool {
   return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Fillin of `value` onto (P_i, S_j), reusing i or j when the face is their only link.
auto place_fillin(LineGraph& lg, const LGId& i, const LGId& j, const ExprPtr& value, EliminationStep& step) {
   auto pi = lg.at(i).pred;
   auto sj = lg.at(j).succ;
   if (lg.at(i).succ.size() == 1) {
      lg.unlink(i, j);
      lg.mut(i).label = value;
      for (const auto& s : sj) lg.link(i, s);
      step.kind += "-reuse-i";
      step.updated.push_back(i);
   } else if (lg.at(j).pred.size() == 1) {
      lg.unlink(i, j);
      lg.mut(j).label = value;
      for (const auto& p : pi) lg.link(p, j);
      step.kind += "-reuse-j";
      step.updated.push_back(j);
   } else {
      auto k = lg.fresh_id();
      lg.add(k, value);
      for (const auto& p : pi) lg.link(p, k);
      for (const auto& s : sj) lg.link(k, s);
      lg.unlink(i, j);
      step.created.push_back(k);
   }
}

}  // namespace

auto eliminate_face(LineGraph& lg, const LGId& i, const LGId& j) -> std::vector<EliminationStep> {
   require_face(lg, i, j);
   const auto& vi = lg.at(i);
   const auto& vj = lg.at(j);
   auto product = prod({vi.label, vj.label});
   EliminationStep step{"", i, j, {}, {}, {}, mults_of(vi.label, vj.label), ""};
   std::optional<LGId> target;
   for (const auto& [id, v] : lg.vertices())
      if (!v.meta && id != i && id != j && v.pred == vi.pred && v.succ == vj.succ) {
         target = id;
         break;
      }
   if (target) {
      lg.mut(*target).label = sum({lg.at(*target).label, product});
      lg.unlink(i, j);
      step.kind = "absorb";
      step.updated.push_back(*target);
   } else {
      step.kind = "fillin";
      place_fillin(lg, i, j, product, step);
   }
   std::vector<EliminationStep> out{step};
   settle(lg, out);
   return out;
}

auto rule_name(ExtendedRule r) -> std::string {
   switch (r) {
      case ExtendedRule::AbsorbSubsetSucc: return "absorb-subset-succ";
      case ExtendedRule::AbsorbSubsetPred: return "absorb-subset-pred";
      case ExtendedRule::FillinSupersetSucc: return "fillin-superset-succ";
      case ExtendedRule::FillinSupersetPred: return "fillin-superset-pred";
      case ExtendedRule::MergeSupersetPred: return "merge-superset-pred";
      case ExtendedRule::MergeSupersetSucc: return "merge-superset-succ";
   }
   return "?";
}

auto extended_rewrite(LineGraph& lg, ExtendedRule rule, const LGId& i, const LGId& j, const LGId& k)
    -> std::vector<EliminationStep> {
   auto fail = [&](const std::string& why) { return usage_error(rule_name(rule) + ": " + why); };
   std::vector<EliminationStep> out;
   if (rule == ExtendedRule::MergeSupersetPred || rule == ExtendedRule::MergeSupersetSucc) {
      if (i == k || lg.at(i).meta || lg.at(k).meta) throw fail("needs two distinct interior vertices");
      auto vi = lg.at(i), vk = lg.at(k);
      bool by_pred = rule == ExtendedRule::MergeSupersetPred;
      bool ok = by_pred ? subset(vi.pred, vk.pred) && vk.succ == vi.succ : vk.pred == vi.pred && subset(vi.succ, vk.succ);
      if (!ok) throw fail("condition does not hold");
      lg.mut(i).label = sum({vi.label, vk.label});
      if (by_pred)
         for (const auto& p : vi.pred) lg.unlink(p, k);
      else
         for (const auto& s : vi.succ) lg.unlink(k, s);
      out.push_back({"extended-merge-superset", i, k, {}, {i, k}, {}, 0, rule_name(rule)});
      settle(lg, out);
      return out;
   }

   require_face(lg, i, j);
   if (k == i || k == j || lg.at(k).meta) throw fail("k must be a third interior vertex");
   auto vi = lg.at(i), vj = lg.at(j), vk = lg.at(k);
   auto product = prod({vi.label, vj.label});
   int mults = mults_of(vi.label, vj.label);
   bool same_p = vk.pred == vi.pred, same_s = vk.succ == vj.succ;
   if (same_p && same_s) return eliminate_face(lg, i, j);

   switch (rule) {
      case ExtendedRule::AbsorbSubsetSucc: {
         if (!same_p || !strict_subset(vk.succ, vj.succ)) throw fail("condition does not hold");
         lg.mut(k).label = sum({vk.label, product});
         EliminationStep step{"extended-absorb-subset", i, j, {}, {k, j}, {}, mults, rule_name(rule)};
         for (const auto& s : vk.succ) lg.unlink(j, s);
         // j's other predecessors still need the paths into S_k
         if (vj.pred.size() > 1) {
            auto c = lg.fresh_id();
            lg.add(c, vj.label);
            for (const auto& p : vj.pred)
               if (p != i) lg.link(p, c);
            for (const auto& s : vk.succ) lg.link(c, s);
            step.created.push_back(c);
         }
         out.push_back(step);
         break;
      }
      case ExtendedRule::AbsorbSubsetPred: {
         if (!same_s || !strict_subset(vk.pred, vi.pred)) throw fail("condition does not hold");
         lg.mut(k).label = sum({vk.label, product});
         EliminationStep step{"extended-absorb-subset", i, j, {}, {k, i}, {}, mults, rule_name(rule)};
         for (const auto& p : vk.pred) lg.unlink(p, i);
         if (vi.succ.size() > 1) {
            auto c = lg.fresh_id();
            lg.add(c, vi.label);
            for (const auto& p : vk.pred) lg.link(p, c);
            for (const auto& s : vi.succ)
               if (s != j) lg.link(c, s);
            step.created.push_back(c);
         }
         out.push_back(step);
         break;
      }
      case ExtendedRule::FillinSupersetSucc:
      case ExtendedRule::FillinSupersetPred: {
         bool succ_side = rule == ExtendedRule::FillinSupersetSucc;
         bool ok = succ_side ? same_p && strict_subset(vj.succ, vk.succ) : same_s && strict_subset(vi.pred, vk.pred);
         if (!ok) throw fail("condition does not hold");
         if (succ_side)
            for (const auto& s : vj.succ) lg.unlink(k, s);
         else
            for (const auto& p : vi.pred) lg.unlink(p, k);
         EliminationStep step{"extended-fillin-superset", i, j, {}, {k}, {}, mults, rule_name(rule)};
         place_fillin(lg, i, j, sum({product, vk.label}), step);
         out.push_back(step);
         break;
      }
      default: throw fail("not a face rule");
   }
   settle(lg, out);
   return out;
}

auto find_face(const LineGraph& lg, const FaceRef& f) -> std::pair<LGId, LGId> {
   if (!f.i.empty()) {
      require_face(lg, f.i, f.j);
      return {f.i, f.j};
   }
   auto kl = canonical_key(f.left), kr = canonical_key(f.right);
   for (const auto& [i, j] : lg.faces())
      if (canonical_key(lg.at(i).label) == kl && canonical_key(lg.at(j).label) == kr) return {i, j};
   throw usage_error("stale face <" + format_expr(f.left) + " | " + format_expr(f.right) + ">");
}

auto Trace::mults() const -> int {
   int n = 0;
   for (const auto& s : steps) n += s.mults;
   return n;
}

auto run_elimination(LineGraph& lg, const std::vector<FaceRef>& order, bool allow_extended) -> Trace {
   Trace t;
   for (const auto& f : order) {
      auto [i, j] = find_face(lg, f);
      std::vector<EliminationStep> steps;
      if (allow_extended) {
         const auto& vi = lg.at(i);
         const auto& vj = lg.at(j);
         bool exact = false;
         std::optional<std::pair<ExtendedRule, LGId>> wider;
         for (const auto& [id, v] : lg.vertices()) {
            if (v.meta || id == i || id == j) continue;
            if (v.pred == vi.pred && v.succ == vj.succ) exact = true;
            if (wider) continue;
            if (v.pred == vi.pred && strict_subset(vj.succ, v.succ)) wider = {{ExtendedRule::FillinSupersetSucc, id}};
            if (v.succ == vj.succ && strict_subset(vi.pred, v.pred)) wider = {{ExtendedRule::FillinSupersetPred, id}};
         }
         if (!exact && wider) steps = extended_rewrite(lg, wider->first, i, j, wider->second);
      }
      if (steps.empty()) steps = eliminate_face(lg, i, j);
      t.steps.insert(t.steps.end(), steps.begin(), steps.end());
   }
   return t;
}

void eliminate_rest(LineGraph& lg, Trace& t) {
   for (auto fs = lg.faces(); !fs.empty(); fs = lg.faces()) {
      auto steps = eliminate_face(lg, fs.front().first, fs.front().second);
      t.steps.insert(t.steps.end(), steps.begin(), steps.end());
   }
}

auto readout_jacobian(const LineGraph& lg) -> ExprSet {
   if (!lg.faces().empty()) throw usage_error("intermediate faces remain");
   std::map<std::pair<VertexId, VertexId>, std::vector<ExprPtr>> acc;
   for (const auto& [id, v] : lg.vertices()) {
      if (v.meta) continue;
      if (v.pred.size() != 1 || v.succ.size() != 1)
         throw usage_error("vertex '" + id + "' is not simply connected");
      auto y = *v.pred.begin(), x = *v.succ.begin();
      acc[{y.substr(2), x.substr(2)}].push_back(v.label);
   }
   ExprSet s;
   for (const auto& [k, terms] : acc) s.entries.push_back({k.first, k.second, sum(terms)});
   return s;
}

auto parse_face_order(const std::string& text) -> std::vector<FaceRef> {
   std::vector<FaceRef> out;
   std::istringstream in(text);
   std::string line;
   int lineno = 0;
   while (std::getline(in, line)) {
      ++lineno;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      auto where = "line " + std::to_string(lineno) + ": ";
      if (auto bar = line.find('|'); bar != std::string::npos) {
         try {
            out.push_back({"", "", parse_expr(line.substr(0, bar)), parse_expr(line.substr(bar + 1))});
         } catch (const Error& e) {
            throw parse_error(where + e.what());
         }
         continue;
      }
      std::istringstream ls(line);
      std::vector<std::string> tok;
      for (std::string t; ls >> t;) tok.push_back(t);
      if (tok.size() != 2) throw parse_error(where + "expected '<i> <j>' or '<expr> | <expr>'");
      out.push_back({tok[0], tok[1], nullptr, nullptr});
   }
   return out;
}

auto trace_to_jsonl(const Trace& t) -> std::string {
   std::string out;
   int n = 0;
   for (const auto& s : t.steps) {
      nlohmann::ordered_json j;
      j["step"] = ++n;
      j["kind"] = s.kind;
      if (s.j.empty())
         j["face"] = nullptr;
      else
         j["face"] = {s.i, s.j};
      j["created"] = s.created;
      j["updated"] = s.updated;
      j["removed"] = s.removed;
      j["mults"] = s.mults;
      if (!s.detail.empty()) j["rule"] = s.detail;
      out += j.dump() + "\n";
   }
   return out;
}

auto line_graph_to_dot(const LineGraph& lg, bool with_meta) -> std::string {
   std::ostringstream out;
   out << "digraph linegraph {\n";
   std::vector<const LGVertex*> vs;
   for (const auto& [id, v] : lg.vertices())
      if (with_meta || !v.meta) vs.push_back(&v);
   std::sort(vs.begin(), vs.end(), [](auto a, auto b) { return a->order < b->order; });
   for (const auto* v : vs) {
      out << "  \"" << v->id << "\" [label=\"" << (v->meta ? v->id : format_expr(v->label)) << "\"";
      if (v->meta) out << ", shape=box";
      out << "];\n";
   }
   for (const auto* v : vs)
      for (const auto& s : v->succ)
         if (with_meta || !lg.at(s).meta) out << "  \"" << v->id << "\" -> \"" << s << "\";\n";
   out << "}\n";
   return out.str();
}

}  // namespace ojacc
