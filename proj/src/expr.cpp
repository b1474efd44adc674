#include "ojacc/expr.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

#include "ojacc/error.hpp"

namespace ojacc {

auto sym(const std::string& name) -> ExprPtr {
   return std::make_shared<Expr>(Expr{ExprKind::Sym, name, {}});
}

auto unit() -> ExprPtr {
   static const ExprPtr u = std::make_shared<Expr>(Expr{ExprKind::Unit, "1", {}});
   return u;
}

auto ref(const std::string& name) -> ExprPtr {
   return std::make_shared<Expr>(Expr{ExprKind::Ref, name, {}});
}

auto label_expr(const std::string& label) -> ExprPtr { return label == "1" ? unit() : sym(label); }

auto prod(const std::vector<ExprPtr>& factors) -> ExprPtr {
   std::vector<ExprPtr> flat;
   for (const auto& f : factors) {
      if (f->kind == ExprKind::Unit) continue;
      if (f->kind == ExprKind::Prod)
         flat.insert(flat.end(), f->kids.begin(), f->kids.end());
      else
         flat.push_back(f);
   }
   if (flat.empty()) return unit();
   if (flat.size() == 1) return flat[0];
   return std::make_shared<Expr>(Expr{ExprKind::Prod, "", std::move(flat)});
}

auto sum(const std::vector<ExprPtr>& terms) -> ExprPtr {
   std::vector<ExprPtr> flat;
   for (const auto& t : terms) {
      if (t->kind == ExprKind::Sum)
         flat.insert(flat.end(), t->kids.begin(), t->kids.end());
      else
         flat.push_back(t);
   }
   if (flat.empty()) throw usage_error("empty sum");
   if (flat.size() == 1) return flat[0];
   return std::make_shared<Expr>(Expr{ExprKind::Sum, "", std::move(flat)});
}

namespace {

auto is_ident_char(char c) -> bool {
   return !std::isspace(static_cast<unsigned char>(c)) && std::string_view("*+()=,[]#").find(c) == std::string_view::npos;
}

class ExprParser {
 public:
   explicit ExprParser(const std::string& t) : text_(t) {}

   auto parse() -> ExprPtr {
      auto e = parse_sum();
      skip();
      if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
      return e;
   }

 private:
   void skip() {
      while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
   }
   [[noreturn]] void fail(const std::string& what) const {
      throw parse_error("syntax error at position " + std::to_string(pos_ + 1) + ": " + what);
   }
   auto parse_sum() -> ExprPtr {
      std::vector<ExprPtr> terms{parse_prod()};
      for (skip(); pos_ < text_.size() && text_[pos_] == '+'; skip()) {
         ++pos_;
         terms.push_back(parse_prod());
      }
      return sum(terms);
   }
   auto parse_prod() -> ExprPtr {
      std::vector<ExprPtr> factors{parse_factor()};
      for (skip(); pos_ < text_.size() && text_[pos_] == '*'; skip()) {
         ++pos_;
         factors.push_back(parse_factor());
      }
      return prod(factors);
   }
   auto parse_factor() -> ExprPtr {
      skip();
      if (pos_ >= text_.size()) fail("unexpected end of input");
      if (text_[pos_] == '(') {
         ++pos_;
         auto e = parse_sum();
         skip();
         if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')'");
         ++pos_;
         return e;
      }
      auto start = pos_;
      while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
      if (start == pos_) fail("expected symbol");
      return label_expr(text_.substr(start, pos_ - start));
   }

   const std::string& text_;
   std::size_t pos_ = 0;
};

}  // namespace

auto parse_expr(const std::string& text) -> ExprPtr { return ExprParser(text).parse(); }

auto format_expr(const ExprPtr& e) -> std::string {
   switch (e->kind) {
      case ExprKind::Sym:
      case ExprKind::Ref:
         return e->name;
      case ExprKind::Unit:
         return "1";
      case ExprKind::Sum: {
         std::string s;
         for (const auto& k : e->kids) s += (s.empty() ? "" : "+") + format_expr(k);
         return s;
      }
      case ExprKind::Prod: {
         std::string s;
         for (const auto& k : e->kids) {
            if (!s.empty()) s += "*";
            s += k->kind == ExprKind::Sum ? "(" + format_expr(k) + ")" : format_expr(k);
         }
         return s;
      }
   }
   return {};
}

auto canonical_key(const ExprPtr& e) -> std::string {
   switch (e->kind) {
      case ExprKind::Sym:
         return e->name;
      case ExprKind::Ref:
         return "$" + e->name;
      case ExprKind::Unit:
         return "1";
      case ExprKind::Prod: {
         std::string s = "P(";
         for (const auto& k : e->kids) s += canonical_key(k) + ",";
         return s + ")";
      }
      case ExprKind::Sum: {
         std::vector<std::string> ks;
         for (const auto& k : e->kids) ks.push_back(canonical_key(k));
         std::sort(ks.begin(), ks.end());
         std::string s = "S(";
         for (const auto& k : ks) s += k + ",";
         return s + ")";
      }
   }
   return {};
}

auto structurally_equal(const ExprPtr& a, const ExprPtr& b) -> bool {
   return canonical_key(a) == canonical_key(b);
}

auto expr_cost(const ExprPtr& e) -> int {
   int c = 0;
   for (const auto& k : e->kids) c += expr_cost(k);
   if (e->kind == ExprKind::Prod) c += static_cast<int>(e->kids.size()) - 1;
   return c;
}

auto symbols(const ExprPtr& e) -> std::set<std::string> {
   std::set<std::string> out;
   std::function<void(const ExprPtr&)> walk = [&](const ExprPtr& x) {
      if (x->kind == ExprKind::Sym) out.insert(x->name);
      for (const auto& k : x->kids) walk(k);
   };
   walk(e);
   return out;
}

auto ref_names(const ExprPtr& e) -> std::set<std::string> {
   std::set<std::string> out;
   std::function<void(const ExprPtr&)> walk = [&](const ExprPtr& x) {
      if (x->kind == ExprKind::Ref) out.insert(x->name);
      for (const auto& k : x->kids) walk(k);
   };
   walk(e);
   return out;
}

auto substitute(const ExprPtr& e, const std::map<std::string, ExprPtr>& m) -> ExprPtr {
   switch (e->kind) {
      case ExprKind::Sym:
      case ExprKind::Ref: {
         auto it = m.find(e->name);
         return it == m.end() ? e : it->second;
      }
      case ExprKind::Unit:
         return e;
      case ExprKind::Prod:
      case ExprKind::Sum: {
         std::vector<ExprPtr> ks;
         bool changed = false;
         for (const auto& k : e->kids) {
            ks.push_back(substitute(k, m));
            changed |= ks.back() != k;
         }
         if (!changed) return e;
         return e->kind == ExprKind::Prod ? prod(ks) : sum(ks);
      }
   }
   return e;
}

auto ExprSet::find_def(const std::string& name) const -> const RefDef* {
   for (const auto& d : defs)
      if (d.name == name) return &d;
   return nullptr;
}

auto ExprSet::find_entry(const VertexId& root, const VertexId& terminal) const -> const Entry* {
   for (const auto& e : entries)
      if (e.root == root && e.terminal == terminal) return &e;
   return nullptr;
}

auto parse_exprset(const std::string& text) -> ExprSet {
   ExprSet s;
   std::istringstream in(text);
   std::string line;
   int lineno = 0;
   auto trim = [](std::string x) {
      auto b = x.find_first_not_of(" \t\r");
      auto e = x.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : x.substr(b, e - b + 1);
   };
   while (std::getline(in, line)) {
      ++lineno;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      line = trim(line);
      if (line.empty()) continue;
      auto where = "line " + std::to_string(lineno) + ": ";
      auto eq = line.find('=');
      if (eq == std::string::npos) throw parse_error(where + "expected '='");
      auto lhs = trim(line.substr(0, eq));
      ExprPtr rhs;
      try {
         rhs = parse_expr(line.substr(eq + 1));
      } catch (const Error& err) {
         throw parse_error(where + err.what());
      }
      if (lhs.rfind("J[", 0) == 0) {
         auto comma = lhs.find(',');
         if (comma == std::string::npos || lhs.back() != ']')
            throw parse_error(where + "expected J[<root>,<terminal>]");
         auto r = trim(lhs.substr(2, comma - 2));
         auto t = trim(lhs.substr(comma + 1, lhs.size() - comma - 2));
         if (r.empty() || t.empty()) throw parse_error(where + "empty vertex id");
         if (s.find_entry(r, t)) throw parse_error(where + "duplicate entry J[" + r + "," + t + "]");
         s.entries.push_back({r, t, rhs});
      } else {
         if (lhs.empty() || !std::all_of(lhs.begin(), lhs.end(), is_ident_char))
            throw parse_error(where + "bad definition name '" + lhs + "'");
         if (s.find_def(lhs)) throw parse_error(where + "'" + lhs + "' defined twice");
         s.defs.push_back({lhs, rhs});
      }
   }
   bind_refs(s);
   return s;
}

auto format_exprset(const ExprSet& s) -> std::string {
   std::string out;
   for (const auto& d : s.defs) out += d.name + " = " + format_expr(d.def) + "\n";
   for (const auto& e : s.entries)
      out += "J[" + e.root + "," + e.terminal + "] = " + format_expr(e.expr) + "\n";
   return out;
}

void bind_refs(ExprSet& s) {
   std::map<std::string, ExprPtr> m;
   for (const auto& d : s.defs) m[d.name] = ref(d.name);
   for (auto& d : s.defs) d.def = substitute(d.def, m);
   for (auto& e : s.entries) e.expr = substitute(e.expr, m);
}

auto fma_cost(const ExprSet& s) -> int {
   int c = 0;
   auto check = [&](const ExprPtr& e) {
      for (const auto& r : ref_names(e))
         if (!s.find_def(r)) throw usage_error("unresolved reference '" + r + "'");
      c += expr_cost(e);
   };
   for (const auto& d : s.defs) check(d.def);
   for (const auto& e : s.entries) check(e.expr);
   return c;
}

auto expand(const ExprPtr& e, const ExprSet& s) -> ExprPtr {
   std::map<std::string, ExprPtr> done;
   std::set<std::string> active;
   std::function<ExprPtr(const ExprPtr&)> go = [&](const ExprPtr& x) -> ExprPtr {
      if (x->kind == ExprKind::Ref) {
         if (auto it = done.find(x->name); it != done.end()) return it->second;
         const auto* d = s.find_def(x->name);
         if (!d) throw usage_error("unresolved reference '" + x->name + "'");
         if (!active.insert(x->name).second) throw cycle_error("cyclic reference through '" + x->name + "'");
         auto v = go(d->def);
         active.erase(x->name);
         return done[x->name] = v;
      }
      if (x->kids.empty()) return x;
      std::vector<ExprPtr> ks;
      for (const auto& k : x->kids) ks.push_back(go(k));
      return x->kind == ExprKind::Prod ? prod(ks) : sum(ks);
   };
   return go(e);
}

auto expand_refs(const ExprSet& s) -> ExprSet {
   ExprSet out;
   for (const auto& d : s.defs) expand(d.def, s);  // surfaces cycles in unused definitions too
   for (const auto& e : s.entries) out.entries.push_back({e.root, e.terminal, expand(e.expr, s)});
   return out;
}

}  // namespace ojacc
