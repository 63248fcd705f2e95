#include "erasure/query.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "erasure/store.hpp"

namespace erasure::query {

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

std::string_view to_string(AggFn fn) {
  switch (fn) {
    case AggFn::Sum: return "SUM";
    case AggFn::Count: return "COUNT";
    case AggFn::Min: return "MIN";
    case AggFn::Max: return "MAX";
    case AggFn::Avg: return "AVG";
  }
  return "?";
}

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Ident, Int, Float, String, Symbol, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t pos = 0;
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token t;
    t.pos = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(i, j - i));
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      bool is_float = false;
      while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) {
        if (src[j] == '.') is_float = true;
        ++j;
      }
      t.kind = is_float ? Tok::Float : Tok::Int;
      t.text = std::string(src.substr(i, j - i));
      i = j;
    } else if (c == '\'') {
      std::size_t j = i + 1;
      std::string s;
      while (j < src.size() && src[j] != '\'') s.push_back(src[j++]);
      if (j >= src.size()) throw Error("unterminated string literal at offset " + std::to_string(i));
      t.kind = Tok::String;
      t.text = s;
      i = j + 1;
    } else {
      static const char* two[] = {"<=", ">=", "!=", "<>"};
      t.kind = Tok::Symbol;
      bool matched = false;
      for (const char* op : two) {
        if (src.substr(i, 2) == op) {
          t.text = op;
          i += 2;
          matched = true;
          break;
        }
      }
      if (!matched) {
        if (std::string_view("(),.=<>+-*").find(c) == std::string_view::npos)
          throw Error(std::string("unexpected character '") + c + "' at offset " + std::to_string(i));
        t.text = std::string(1, c);
        ++i;
      }
    }
    out.push_back(std::move(t));
  }
  out.push_back(Token{Tok::End, "", src.size()});
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::toupper(static_cast<unsigned char>(a[i])) != std::toupper(static_cast<unsigned char>(b[i]))) return false;
  return true;
}

std::optional<AggFn> agg_from(std::string_view word) {
  if (iequals(word, "SUM")) return AggFn::Sum;
  if (iequals(word, "COUNT")) return AggFn::Count;
  if (iequals(word, "MIN")) return AggFn::Min;
  if (iequals(word, "MAX")) return AggFn::Max;
  if (iequals(word, "AVG")) return AggFn::Avg;
  return std::nullopt;
}

bool is_keyword(std::string_view w) {
  for (const char* k : {"SELECT", "FROM", "WHERE", "AND", "AS", "GROUP", "BY"})
    if (iequals(w, k)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  Condition condition() {
    Condition c;
    expect_kw("SELECT");
    do {
      OutputColumn oc;
      ColumnRef col = column_ref();
      if (!iequals(col.column, "rid")) fail("condition output must be <alias>.rid");
      oc.alias = col.alias;
      expect_kw("AS");
      oc.variable = ident();
      c.output.push_back(std::move(oc));
    } while (accept_sym(","));
    expect_kw("FROM");
    do {
      if (accept_sym("(")) {
        if (c.subquery) fail("at most one aggregate subquery is supported");
        c.subquery = subquery();
        expect_sym(")");
        accept_kw("AS");
        c.subquery->alias = ident();
      } else {
        c.from.push_back(from_relation());
      }
    } while (accept_sym(","));
    if (accept_kw("WHERE")) c.where = predicates();
    expect_end();
    return c;
  }

  Aggregation aggregation() {
    Aggregation a;
    std::string fn = ident();
    auto agg = agg_from(fn);
    if (!agg) fail("expected an aggregate function, got '" + fn + "'");
    a.fn = *agg;
    expect_sym("(");
    if (accept_sym("*")) {
      if (a.fn != AggFn::Count) fail("only COUNT accepts *");
    } else {
      a.column = column_ref();
    }
    expect_sym(")");
    expect_kw("FROM");
    do a.from.push_back(from_relation());
    while (accept_sym(","));
    if (accept_kw("WHERE")) a.where = predicates();
    expect_end();
    return a;
  }

 private:
  AggregateSubquery subquery() {
    AggregateSubquery q;
    expect_kw("SELECT");
    do {
      SelectItem item;
      const Token& t = peek();
      auto agg = t.kind == Tok::Ident ? agg_from(t.text) : std::nullopt;
      if (agg && peek(1).text == "(") {
        ++pos_;
        expect_sym("(");
        item.aggregate = agg;
        if (accept_sym("*")) {
          if (*agg != AggFn::Count) fail("only COUNT accepts *");
        } else {
          item.column = column_ref();
        }
        expect_sym(")");
      } else {
        item.column = column_ref();
      }
      expect_kw("AS");
      item.name = ident();
      q.select.push_back(std::move(item));
    } while (accept_sym(","));
    expect_kw("FROM");
    do {
      if (peek().text == "(") fail("subquery nesting depth is limited to one");
      q.from.push_back(from_relation());
    } while (accept_sym(","));
    if (accept_kw("WHERE")) q.where = predicates();
    expect_kw("GROUP");
    expect_kw("BY");
    do q.group_by.push_back(column_ref());
    while (accept_sym(","));
    return q;
  }

  FromRelation from_relation() {
    FromRelation f;
    f.relation = ident();
    accept_kw("AS");
    f.alias = ident();
    return f;
  }

  std::vector<Predicate> predicates() {
    std::vector<Predicate> out;
    do out.push_back(predicate());
    while (accept_kw("AND"));
    return out;
  }

  Predicate predicate() {
    Predicate p;
    p.lhs = column_ref();
    const Token& t = next();
    if (t.kind != Tok::Symbol) fail("expected comparison operator");
    if (t.text == "=") p.op = CmpOp::Eq;
    else if (t.text == "!=" || t.text == "<>") p.op = CmpOp::Ne;
    else if (t.text == "<") p.op = CmpOp::Lt;
    else if (t.text == "<=") p.op = CmpOp::Le;
    else if (t.text == ">") p.op = CmpOp::Gt;
    else if (t.text == ">=") p.op = CmpOp::Ge;
    else fail("expected comparison operator, got '" + t.text + "'");
    p.rhs = operand();
    return p;
  }

  Operand operand() {
    Operand o;
    const Token& t = peek();
    if (t.kind == Tok::Ident && !is_keyword(t.text)) {
      o.column = column_ref();
      if (peek().text == "+" || peek().text == "-") {
        bool neg = next().text == "-";
        Value v = number();
        o.offset = neg ? -v.as_double() : v.as_double();
      }
      return o;
    }
    if (t.kind == Tok::String) {
      o.constant = Value(next().text);
      return o;
    }
    bool neg = accept_sym("-");
    Value v = number();
    if (neg) v = v.is_int() ? Value(-v.as_int()) : Value(-v.as_double());
    o.constant = v;
    return o;
  }

  Value number() {
    const Token& t = next();
    if (t.kind == Tok::Int) return Value(static_cast<std::int64_t>(std::stoll(t.text)));
    if (t.kind == Tok::Float) return Value(std::stod(t.text));
    fail("expected a number");
    return {};
  }

  ColumnRef column_ref() {
    ColumnRef c;
    c.alias = ident();
    expect_sym(".");
    c.column = ident();
    return c;
  }

  std::string ident() {
    const Token& t = next();
    if (t.kind != Tok::Ident || is_keyword(t.text)) fail("expected identifier, got '" + t.text + "'");
    return t.text;
  }

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool accept_sym(std::string_view s) {
    if (peek().kind == Tok::Symbol && peek().text == s) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect_sym(std::string_view s) {
    if (!accept_sym(s)) fail("expected '" + std::string(s) + "'");
  }
  bool accept_kw(std::string_view kw) {
    if (peek().kind == Tok::Ident && iequals(peek().text, kw)) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) fail("expected " + std::string(kw));
  }
  void expect_end() {
    if (peek().kind != Tok::End) fail("unexpected trailing input '" + peek().text + "'");
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error("syntax error at offset " + std::to_string(peek().pos) + ": " + msg);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Compilation

struct Scope {
  std::vector<JoinItem>* items = nullptr;
  const Schema* schema = nullptr;
  // Columns of the aggregate subquery when it is one of the items.
  const std::vector<CompiledSubquery::Column>* sub_columns = nullptr;
  std::vector<std::pair<int, int>>* attributes_read = nullptr;

  int item_of(const std::string& alias) const {
    for (std::size_t i = 0; i < items->size(); ++i)
      if ((*items)[i].alias == alias) return static_cast<int>(i);
    throw Error("unknown alias '" + alias + "'");
  }

  Slot resolve(const ColumnRef& c) const {
    Slot s;
    s.item = item_of(c.alias);
    JoinItem& item = (*items)[s.item];
    if (item.relation < 0) {
      for (std::size_t k = 0; k < sub_columns->size(); ++k)
        if ((*sub_columns)[k].name == c.column) {
          s.column = static_cast<int>(k);
          return s;
        }
      throw Error("unknown subquery column '" + c.alias + "." + c.column + "'");
    }
    if (c.column == "rid") return s;
    auto attr = schema->relation(item.relation).find_attribute(c.column);
    if (!attr) throw Error("unknown attribute '" + c.column + "' of " + schema->relation(item.relation).name);
    s.column = static_cast<int>(*attr);
    if (std::find(item.read_columns.begin(), item.read_columns.end(), s.column) == item.read_columns.end())
      item.read_columns.push_back(s.column);
    if (attributes_read) attributes_read->emplace_back(item.relation, s.column);
    return s;
  }

  CompiledPredicate predicate(const Predicate& p) const {
    CompiledPredicate cp;
    cp.lhs = resolve(p.lhs);
    cp.op = p.op;
    if (p.rhs.column) cp.rhs_slot = resolve(*p.rhs.column);
    cp.constant = p.rhs.constant;
    cp.offset = p.rhs.offset;
    return cp;
  }
};

void add_relation_items(const std::vector<FromRelation>& from, const Schema& schema, std::vector<JoinItem>& items) {
  for (const auto& f : from) {
    for (const auto& existing : items)
      if (existing.alias == f.alias) throw Error("duplicate alias '" + f.alias + "'");
    JoinItem item;
    item.alias = f.alias;
    item.relation = static_cast<int>(schema.relation_index(f.relation));
    items.push_back(std::move(item));
  }
}

}  // namespace

Condition parse_condition(std::string_view text) { return Parser(text).condition(); }
Aggregation parse_aggregation(std::string_view text) { return Parser(text).aggregation(); }

CompiledCondition compile(const Condition& cond, const Schema& schema) {
  CompiledCondition cc;
  if (cond.output.empty()) throw Error("condition must output at least one variable");
  if (cond.from.empty()) throw Error("condition needs at least one relation");

  if (cond.subquery) {
    const AggregateSubquery& q = *cond.subquery;
    CompiledSubquery cs;
    add_relation_items(q.from, schema, cs.items);
    Scope scope{&cs.items, &schema, nullptr, &cs.attributes};
    for (const auto& p : q.where) cs.where.push_back(scope.predicate(p));
    for (const auto& g : q.group_by) cs.group_by.push_back(scope.resolve(g));
    bool has_agg = false;
    for (const auto& item : q.select) {
      CompiledSubquery::Column col;
      col.name = item.name;
      col.aggregate = item.aggregate;
      if (item.column) col.source = scope.resolve(*item.column);
      if (item.aggregate) {
        has_agg = true;
      } else {
        bool grouped = false;
        for (const auto& g : cs.group_by)
          if (g.item == col.source->item && g.column == col.source->column) grouped = true;
        if (!grouped) throw Error("subquery column '" + item.name + "' is neither grouped nor aggregated");
      }
      cs.columns.push_back(std::move(col));
    }
    if (!has_agg) throw Error("subquery must compute an aggregate");
    cc.subquery = std::move(cs);
  }

  add_relation_items(cond.from, schema, cc.items);
  if (cond.subquery) {
    for (const auto& existing : cc.items)
      if (existing.alias == cond.subquery->alias) throw Error("duplicate alias '" + existing.alias + "'");
    JoinItem sub;
    sub.alias = cond.subquery->alias;
    cc.items.push_back(std::move(sub));
  }
  Scope scope{&cc.items, &schema, cc.subquery ? &cc.subquery->columns : nullptr, nullptr};
  for (const auto& p : cond.where) cc.where.push_back(scope.predicate(p));
  for (const auto& out : cond.output) {
    if (std::find(cc.variables.begin(), cc.variables.end(), out.variable) != cc.variables.end())
      throw Error("duplicate output variable '" + out.variable + "'");
    int item = scope.item_of(out.alias);
    if (cc.items[item].relation < 0) throw Error("output must name a relation alias, not the subquery");
    cc.variables.push_back(out.variable);
    cc.variable_items.push_back(item);
  }
  return cc;
}

CompiledAggregation compile(const Aggregation& agg, const Schema& schema, std::size_t self_relation) {
  CompiledAggregation ca;
  ca.fn = agg.fn;
  JoinItem self;
  self.alias = std::string(kSelfAlias);
  self.relation = static_cast<int>(self_relation);
  ca.items.push_back(std::move(self));
  add_relation_items(agg.from, schema, ca.items);
  Scope scope{&ca.items, &schema, nullptr, &ca.attributes};
  if (agg.column) ca.column = scope.resolve(*agg.column);
  for (const auto& p : agg.where) ca.where.push_back(scope.predicate(p));
  return ca;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

struct GroupRow {
  std::vector<Value> columns;
  Timestamp support = 0;
};

struct Row {
  const RecordState* rec = nullptr;
  const GroupRow* group = nullptr;
};

struct ItemTable {
  int relation = -1;
  std::vector<Row> rows;
};

Value slot_value(const Row& row, int column) {
  if (row.group) return row.group->columns[column];
  if (column < 0) return Value(static_cast<std::int64_t>(row.rec->rid));
  return row.rec->cells[column].value;
}

Value shifted(Value v, double offset) {
  if (offset == 0.0 || v.is_null()) return v;
  if (!v.is_numeric()) return Value();  // offsets only apply to numbers
  if (v.is_int() && std::floor(offset) == offset) return Value(v.as_int() + static_cast<std::int64_t>(offset));
  return Value(v.as_double() + offset);
}

bool holds(CmpOp op, const Value& a, const Value& b) {
  auto c = compare(a, b);
  if (!c) return false;
  switch (op) {
    case CmpOp::Eq: return *c == 0;
    case CmpOp::Ne: return *c != 0;
    case CmpOp::Lt: return *c < 0;
    case CmpOp::Le: return *c <= 0;
    case CmpOp::Gt: return *c > 0;
    case CmpOp::Ge: return *c >= 0;
  }
  return false;
}

using Tuple = std::vector<int>;  // row index per item, -1 while unbound

bool eval_pred(const CompiledPredicate& p, const std::vector<ItemTable>& tables, const Tuple& t) {
  Value lhs = slot_value(tables[p.lhs.item].rows[t[p.lhs.item]], p.lhs.column);
  Value rhs = p.rhs_slot ? slot_value(tables[p.rhs_slot->item].rows[t[p.rhs_slot->item]], p.rhs_slot->column)
                         : p.constant;
  return holds(p.op, lhs, shifted(rhs, p.offset));
}

bool bound(const CompiledPredicate& p, const Tuple& t) {
  return t[p.lhs.item] >= 0 && (!p.rhs_slot || t[p.rhs_slot->item] >= 0);
}

bool single_item(const CompiledPredicate& p) { return !p.rhs_slot || p.rhs_slot->item == p.lhs.item; }

/// Filters each table by its single-item predicates, then hash-joins along equality
/// predicates (nested loops when nothing connects). Returns complete tuples that satisfy
/// every predicate.
std::vector<Tuple> join(std::vector<ItemTable>& tables, const std::vector<CompiledPredicate>& preds) {
  const std::size_t n = tables.size();
  std::vector<bool> applied(preds.size(), false);

  for (std::size_t k = 0; k < preds.size(); ++k) {
    const auto& p = preds[k];
    if (!single_item(p)) continue;
    auto& tab = tables[p.lhs.item];
    Tuple probe(n, -1);
    std::vector<Row> kept;
    for (std::size_t r = 0; r < tab.rows.size(); ++r) {
      // Evaluate with a temporary single-row table view.
      probe[p.lhs.item] = static_cast<int>(r);
      if (eval_pred(p, tables, probe)) kept.push_back(tab.rows[r]);
    }
    tab.rows = std::move(kept);
    applied[k] = true;
  }
  for (const auto& t : tables)
    if (t.rows.empty()) return {};

  std::vector<bool> in(n, false);
  std::size_t first = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (tables[i].rows.size() < tables[first].rows.size()) first = i;
  std::vector<Tuple> tuples;
  for (std::size_t r = 0; r < tables[first].rows.size(); ++r) {
    Tuple t(n, -1);
    t[first] = static_cast<int>(r);
    tuples.push_back(std::move(t));
  }
  in[first] = true;

  for (std::size_t step = 1; step < n; ++step) {
    // Pick an unjoined item connected by an equality predicate, smallest first.
    int next = -1;
    int via = -1;
    for (std::size_t k = 0; k < preds.size(); ++k) {
      const auto& p = preds[k];
      if (applied[k] || p.op != CmpOp::Eq || !p.rhs_slot) continue;
      int a = p.lhs.item, b = p.rhs_slot->item;
      int cand = -1;
      if (in[a] && !in[b]) cand = b;
      if (in[b] && !in[a]) cand = a;
      if (cand < 0) continue;
      if (next < 0 || tables[cand].rows.size() < tables[next].rows.size()) {
        next = cand;
        via = static_cast<int>(k);
      }
    }
    std::vector<Tuple> joined;
    if (next >= 0) {
      const auto& p = preds[via];
      const bool cand_is_lhs = p.lhs.item == next;
      const Slot cand_slot = cand_is_lhs ? p.lhs : *p.rhs_slot;
      const Slot known_slot = cand_is_lhs ? *p.rhs_slot : p.lhs;
      // lhs = rhs + offset
      const double key_shift = cand_is_lhs ? p.offset : -p.offset;
      std::unordered_map<Value, std::vector<int>, ValueHash> index;
      const auto& cand_rows = tables[next].rows;
      for (std::size_t r = 0; r < cand_rows.size(); ++r) {
        Value v = slot_value(cand_rows[r], cand_slot.column);
        if (!v.is_null()) index[v].push_back(static_cast<int>(r));
      }
      for (const auto& t : tuples) {
        Value key = shifted(slot_value(tables[known_slot.item].rows[t[known_slot.item]], known_slot.column), key_shift);
        if (key.is_null()) continue;
        auto it = index.find(key);
        if (it == index.end()) continue;
        for (int r : it->second) {
          Tuple u = t;
          u[next] = r;
          joined.push_back(std::move(u));
        }
      }
      applied[via] = true;
    } else {
      for (std::size_t i = 0; i < n; ++i)
        if (!in[i] && (next < 0 || tables[i].rows.size() < tables[next].rows.size())) next = static_cast<int>(i);
      for (const auto& t : tuples)
        for (std::size_t r = 0; r < tables[next].rows.size(); ++r) {
          Tuple u = t;
          u[next] = static_cast<int>(r);
          joined.push_back(std::move(u));
        }
    }
    in[next] = true;
    // Apply every predicate that just became fully bound.
    for (std::size_t k = 0; k < preds.size(); ++k) {
      if (applied[k] || !bound(preds[k], joined.empty() ? Tuple(n, 0) : joined.front())) continue;
      std::vector<Tuple> kept;
      kept.reserve(joined.size());
      for (auto& t : joined)
        if (eval_pred(preds[k], tables, t)) kept.push_back(std::move(t));
      joined = std::move(kept);
      applied[k] = true;
    }
    tuples = std::move(joined);
    if (tuples.empty()) return {};
  }
  for (std::size_t k = 0; k < preds.size(); ++k) {
    if (applied[k]) continue;
    std::vector<Tuple> kept;
    for (auto& t : tuples)
      if (eval_pred(preds[k], tables, t)) kept.push_back(std::move(t));
    tuples = std::move(kept);
  }
  return tuples;
}

ItemTable relation_table(const StateView& state, int relation, std::optional<RecordId> only = std::nullopt) {
  ItemTable t;
  t.relation = relation;
  const auto& recs = state.relation(static_cast<std::size_t>(relation)).records;
  if (only) {
    auto it = recs.find(*only);
    if (it != recs.end()) t.rows.push_back(Row{&it->second, nullptr});
    return t;
  }
  t.rows.reserve(recs.size());
  for (const auto& [rid, rec] : recs) t.rows.push_back(Row{&rec, nullptr});
  return t;
}

Timestamp row_support(const Row& row, const JoinItem& item) {
  if (row.group) return row.group->support;
  Timestamp ts = row.rec->created;
  for (int col : item.read_columns) {
    const CellState& cs = row.rec->cells[col];
    ts = std::max(ts, cs.kappa);
    if (cs.erased_at) ts = std::max(ts, *cs.erased_at);
  }
  return ts;
}

Value aggregate(AggFn fn, const std::vector<Value>& inputs, std::size_t row_count) {
  std::vector<const Value*> vals;
  for (const auto& v : inputs)
    if (!v.is_null()) vals.push_back(&v);
  switch (fn) {
    case AggFn::Count:
      return Value(static_cast<std::int64_t>(inputs.empty() ? row_count : vals.size()));
    case AggFn::Sum: {
      if (row_count == 0) return Value(std::int64_t{0});
      if (vals.empty()) return Value();
      bool all_int = true;
      for (auto* v : vals) all_int = all_int && v->is_int();
      if (all_int) {
        std::int64_t s = 0;
        for (auto* v : vals) s += v->as_int();
        return Value(s);
      }
      double s = 0;
      for (auto* v : vals)
        if (v->is_numeric()) s += v->as_double();
      return Value(s);
    }
    case AggFn::Avg: {
      double s = 0;
      std::size_t n = 0;
      for (auto* v : vals)
        if (v->is_numeric()) {
          s += v->as_double();
          ++n;
        }
      return n == 0 ? Value() : Value(s / static_cast<double>(n));
    }
    case AggFn::Min:
    case AggFn::Max: {
      const Value* best = nullptr;
      for (auto* v : vals) {
        if (!best) {
          best = v;
          continue;
        }
        auto c = compare(*v, *best);
        if (!c) continue;
        if ((fn == AggFn::Min && *c < 0) || (fn == AggFn::Max && *c > 0)) best = v;
      }
      return best ? *best : Value();
    }
  }
  return Value();
}

/// Groups joined subquery rows. Rows with a NULL group key drop out.
std::vector<GroupRow> group_rows(const CompiledSubquery& sq, const std::vector<ItemTable>& tables,
                                 const std::vector<Tuple>& tuples) {
  struct Acc {
    std::vector<std::vector<Value>> inputs;  // per column
    Timestamp support = std::numeric_limits<Timestamp>::min();
    std::size_t rows = 0;
    std::vector<Value> keys;
  };
  std::map<std::vector<std::string>, Acc> groups;  // keyed by printed values for determinism
  for (const auto& t : tuples) {
    std::vector<Value> keys;
    std::vector<std::string> printed;
    bool null_key = false;
    for (const auto& g : sq.group_by) {
      Value v = slot_value(tables[g.item].rows[t[g.item]], g.column);
      if (v.is_null()) null_key = true;
      printed.push_back((v.is_string() ? "s" : "n") + v.to_string());
      keys.push_back(std::move(v));
    }
    if (null_key) continue;
    Acc& acc = groups[printed];
    if (acc.inputs.empty()) {
      acc.inputs.resize(sq.columns.size());
      acc.keys = keys;
    }
    ++acc.rows;
    for (std::size_t c = 0; c < sq.columns.size(); ++c) {
      const auto& col = sq.columns[c];
      if (col.aggregate && col.source)
        acc.inputs[c].push_back(slot_value(tables[col.source->item].rows[t[col.source->item]], col.source->column));
    }
    for (std::size_t i = 0; i < sq.items.size(); ++i)
      acc.support = std::max(acc.support, row_support(tables[i].rows[t[i]], sq.items[i]));
  }
  // A row that left a group since some time had one of its read cells erased then, so
  // the latest such erase bounds how long every group has held its current rows.
  Timestamp departed = std::numeric_limits<Timestamp>::min();
  for (std::size_t i = 0; i < sq.items.size(); ++i)
    for (const auto& row : tables[i].rows)
      for (int col : sq.items[i].read_columns)
        if (const auto& e = row.rec->cells[col].erased_at) departed = std::max(departed, *e);
  std::vector<GroupRow> out;
  for (auto& [printed, acc] : groups) {
    GroupRow g;
    g.support = std::max(acc.support, departed);
    for (std::size_t c = 0; c < sq.columns.size(); ++c) {
      const auto& col = sq.columns[c];
      if (!col.aggregate) {
        for (std::size_t k = 0; k < sq.group_by.size(); ++k)
          if (sq.group_by[k].item == col.source->item && sq.group_by[k].column == col.source->column)
            g.columns.push_back(acc.keys[k]);
      } else {
        g.columns.push_back(aggregate(*col.aggregate, acc.inputs[c], acc.rows));
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<GroupRow> eval_subquery(const CompiledSubquery& sq, const StateView& state) {
  std::vector<ItemTable> tables;
  for (const auto& item : sq.items) tables.push_back(relation_table(state, item.relation));
  auto tuples = join(tables, sq.where);
  return group_rows(sq, tables, tuples);
}

/// Cross product of every table, keeping tuples that satisfy all predicates.
std::vector<Tuple> cross_product(const std::vector<ItemTable>& tables, const std::vector<CompiledPredicate>& preds) {
  std::vector<Tuple> out;
  const std::size_t n = tables.size();
  for (const auto& t : tables)
    if (t.rows.empty()) return out;
  Tuple t(n, 0);
  while (true) {
    bool ok = true;
    for (const auto& p : preds)
      if (!eval_pred(p, tables, t)) {
        ok = false;
        break;
      }
    if (ok) out.push_back(t);
    std::size_t i = 0;
    while (i < n) {
      if (++t[i] < static_cast<int>(tables[i].rows.size())) break;
      t[i] = 0;
      ++i;
    }
    if (i == n) break;
  }
  return out;
}

std::vector<Binding> collect(const CompiledCondition& cond, const std::vector<ItemTable>& tables,
                             const std::vector<Tuple>& tuples) {
  std::map<std::vector<RecordId>, Timestamp> best;
  for (const auto& t : tuples) {
    std::vector<RecordId> rids;
    rids.reserve(cond.variable_items.size());
    for (int item : cond.variable_items) rids.push_back(tables[item].rows[t[item]].rec->rid);
    Timestamp w = std::numeric_limits<Timestamp>::min();
    for (std::size_t i = 0; i < cond.items.size(); ++i) w = std::max(w, row_support(tables[i].rows[t[i]], cond.items[i]));
    auto [it, inserted] = best.emplace(std::move(rids), w);
    if (!inserted) it->second = std::min(it->second, w);
  }
  std::vector<Binding> out;
  out.reserve(best.size());
  for (auto& [rids, w] : best) out.push_back(Binding{rids, w});
  return out;
}

}  // namespace

std::vector<Binding> evaluate(const CompiledCondition& cond, const StateView& state, std::optional<Pin> pin) {
  std::vector<GroupRow> groups;
  if (cond.subquery) groups = eval_subquery(*cond.subquery, state);
  std::vector<ItemTable> tables;
  for (std::size_t i = 0; i < cond.items.size(); ++i) {
    const auto& item = cond.items[i];
    if (item.relation < 0) {
      ItemTable t;
      for (const auto& g : groups) t.rows.push_back(Row{nullptr, &g});
      tables.push_back(std::move(t));
      continue;
    }
    std::optional<RecordId> only;
    if (pin && cond.variable_items.at(pin->variable) == static_cast<int>(i)) only = pin->rid;
    tables.push_back(relation_table(state, item.relation, only));
  }
  auto tuples = join(tables, cond.where);
  return collect(cond, tables, tuples);
}

std::vector<Binding> evaluate_naive(const CompiledCondition& cond, const StateView& state) {
  std::vector<GroupRow> groups;
  if (cond.subquery) {
    std::vector<ItemTable> sub;
    for (const auto& item : cond.subquery->items) sub.push_back(relation_table(state, item.relation));
    groups = group_rows(*cond.subquery, sub, cross_product(sub, cond.subquery->where));
  }
  std::vector<ItemTable> tables;
  for (const auto& item : cond.items) {
    if (item.relation < 0) {
      ItemTable t;
      for (const auto& g : groups) t.rows.push_back(Row{nullptr, &g});
      tables.push_back(std::move(t));
    } else {
      tables.push_back(relation_table(state, item.relation));
    }
  }
  return collect(cond, tables, cross_product(tables, cond.where));
}

Value evaluate(const CompiledAggregation& agg, const StateView& state, RecordId self) {
  std::vector<ItemTable> tables;
  tables.push_back(relation_table(state, agg.items[0].relation, self));
  for (std::size_t i = 1; i < agg.items.size(); ++i) tables.push_back(relation_table(state, agg.items[i].relation));
  auto tuples = join(tables, agg.where);
  std::sort(tuples.begin(), tuples.end());
  tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
  std::vector<Value> inputs;
  if (agg.column)
    for (const auto& t : tuples) inputs.push_back(slot_value(tables[agg.column->item].rows[t[agg.column->item]], agg.column->column));
  return aggregate(agg.fn, inputs, tuples.size());
}

}  // namespace erasure::query
