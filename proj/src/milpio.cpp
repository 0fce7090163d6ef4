#include "feedopt/milpio.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace feedopt {

int LpModel::add_var(const std::string& name, bool binary, double lb, double ub) {
  const auto it = index.find(name);
  if (it != index.end()) return it->second;
  vars.push_back({name, binary, lb, ub});
  index[name] = static_cast<int>(vars.size()) - 1;
  return static_cast<int>(vars.size()) - 1;
}

int LpModel::var(const std::string& name) const {
  const auto it = index.find(name);
  return it == index.end() ? -1 : it->second;
}

void LpModel::add_con(LpConstraint con) { cons.push_back(std::move(con)); }

namespace {

std::string num(double v) {
  std::ostringstream ss;
  ss.precision(12);
  ss << v;
  return ss.str();
}

void append_terms(std::ostringstream& out, const LpModel& m, const std::vector<LpTerm>& terms) {
  bool first = true;
  for (const auto& t : terms) {
    if (t.coef == 0) continue;
    const double c = t.coef;
    if (first) {
      if (c < 0) out << "- ";
      first = false;
    } else {
      out << (c < 0 ? " - " : " + ");
    }
    const double a = std::abs(c);
    if (a != 1.0) out << num(a) << " ";
    out << m.vars[t.var].name;
  }
  if (first) out << "0 one";  // empty expression guard
}

}  // namespace

std::string write_lp(const LpModel& model) {
  std::ostringstream out;
  out << "\\ feedopt lp model\n";
  out << "Minimize\n obj: ";
  append_terms(out, model, model.objective);
  out << "\nSubject To\n";
  for (const auto& c : model.cons) {
    out << " " << c.name << ": ";
    append_terms(out, model, c.terms);
    out << (c.sense == 'L' ? " <= " : c.sense == 'G' ? " >= " : " = ") << num(c.rhs) << "\n";
  }
  out << "Bounds\n";
  for (const auto& v : model.vars) {
    if (v.binary && v.lb == 0 && v.ub == 1) continue;
    if (v.lb == v.ub) {
      out << " " << v.name << " = " << num(v.lb) << "\n";
    } else if (v.ub == kInf) {
      if (v.lb != 0) out << " " << num(v.lb) << " <= " << v.name << "\n";
    } else {
      out << " " << num(v.lb) << " <= " << v.name << " <= " << num(v.ub) << "\n";
    }
  }
  out << "Binaries\n";
  int col = 0;
  for (const auto& v : model.vars) {
    if (!v.binary) continue;
    out << " " << v.name;
    if (++col % 8 == 0) out << "\n";
  }
  out << "\nEnd\n";
  return out.str();
}

void write_lp_file(const LpModel& model, const std::string& path) {
  write_file_atomic(path, write_lp(model));
}

namespace {

struct Lexer {
  std::vector<std::string> tokens;
  std::size_t pos = 0;

  explicit Lexer(const std::string& text) {
    std::string cur;
    auto flush = [&] {
      if (!cur.empty()) {
        tokens.push_back(cur);
        cur.clear();
      }
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
      const char ch = text[i];
      if (ch == '\\') {  // comment to end of line
        flush();
        while (i < text.size() && text[i] != '\n') ++i;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(ch))) {
        flush();
        continue;
      }
      if (ch == '+' || ch == '-' || ch == ':') {
        flush();
        tokens.push_back(std::string(1, ch));
        continue;
      }
      if (ch == '<' || ch == '>' || ch == '=') {
        flush();
        std::string op(1, ch);
        if (i + 1 < text.size() && text[i + 1] == '=') {
          op += '=';
          ++i;
        }
        tokens.push_back(op);
        continue;
      }
      cur += ch;
    }
    flush();
  }

  bool done() const { return pos >= tokens.size(); }
  const std::string& peek() const { return tokens[pos]; }
  std::string next() { return tokens[pos++]; }
};

bool is_number(const std::string& t) {
  if (t.empty()) return false;
  const char c = t[0];
  return std::isdigit(static_cast<unsigned char>(c)) || c == '.';
}

bool keyword(const std::string& t, const char* kw) {
  if (t.size() != std::strlen(kw)) return false;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(t[i])) != std::tolower(kw[i])) return false;
  return true;
}

}  // namespace

LpModel parse_lp(const std::string& text) {
  Lexer lex(text);
  LpModel m;
  auto var_of = [&](const std::string& name) { return m.add_var(name, false, 0, kInf); };

  enum Section { none, objective, constraints, bounds, binaries } sec = none;
  auto section_of = [](const std::string& t) -> int {
    if (keyword(t, "minimize") || keyword(t, "min")) return objective;
    if (keyword(t, "subject")) return constraints;  // "Subject To"
    if (keyword(t, "st") || keyword(t, "s.t.")) return constraints;
    if (keyword(t, "bounds")) return bounds;
    if (keyword(t, "binaries") || keyword(t, "binary") || keyword(t, "bin")) return binaries;
    if (keyword(t, "end")) return none;
    return -1;
  };

  // expression parser: [name ':'] terms (sense rhs)?
  auto parse_terms = [&](std::vector<LpTerm>& terms, char& sense, double& rhs, bool& has_rel) {
    has_rel = false;
    double sign = 1;
    double coef = 1;
    bool coef_set = false;
    while (!lex.done()) {
      const std::string& t = lex.peek();
      if (section_of(t) >= 0) break;
      if (t == "+") {
        lex.next();
        sign = 1;
        coef = 1;
        coef_set = false;
        continue;
      }
      if (t == "-") {
        lex.next();
        sign = -1;
        coef = 1;
        coef_set = false;
        continue;
      }
      if (t == "<=" || t == ">=" || t == "=") {
        const std::string op = lex.next();
        sense = op == "<=" ? 'L' : op == ">=" ? 'G' : 'E';
        double rsign = 1;
        if (lex.peek() == "-") {
          lex.next();
          rsign = -1;
        } else if (lex.peek() == "+") {
          lex.next();
        }
        rhs = rsign * std::stod(lex.next());
        has_rel = true;
        break;
      }
      if (is_number(t)) {
        coef = std::stod(lex.next());
        coef_set = true;
        continue;
      }
      // a variable; named-constraint labels are handled by the caller
      const std::string name = lex.next();
      terms.push_back({var_of(name), sign * coef});
      sign = 1;
      coef = 1;
      coef_set = false;
    }
    (void)coef_set;
  };

  while (!lex.done()) {
    const std::string t = lex.peek();
    const int s = section_of(t);
    if (s >= 0) {
      lex.next();
      if (s == constraints && keyword(t, "subject")) lex.next();  // consume "To"
      sec = static_cast<Section>(s);
      continue;
    }
    if (sec == objective) {
      std::string label;
      if (lex.pos + 1 < lex.tokens.size() && lex.tokens[lex.pos + 1] == ":") {
        label = lex.next();
        lex.next();
      }
      char sense;
      double rhs;
      bool has_rel;
      parse_terms(m.objective, sense, rhs, has_rel);
      continue;
    }
    if (sec == constraints) {
      LpConstraint con;
      if (lex.pos + 1 < lex.tokens.size() && lex.tokens[lex.pos + 1] == ":") {
        con.name = lex.next();
        lex.next();
      }
      bool has_rel = false;
      parse_terms(con.terms, con.sense, con.rhs, has_rel);
      if (!has_rel) throw std::runtime_error("constraint without relation near token " +
                                             std::to_string(lex.pos));
      m.add_con(std::move(con));
      continue;
    }
    if (sec == bounds) {
      // forms: "lb <= name <= ub", "lb <= name", "name <= ub", "name = v"
      double first_num = 0;
      bool leading_number = false;
      double lead_sign = 1;
      if (lex.peek() == "-") {
        lex.next();
        lead_sign = -1;
      }
      if (is_number(lex.peek())) {
        first_num = lead_sign * std::stod(lex.next());
        leading_number = true;
        if (lex.next() != "<=") throw std::runtime_error("malformed bound");
      }
      const int v = var_of(lex.next());
      if (leading_number) m.vars[v].lb = first_num;
      if (!lex.done() && (lex.peek() == "<=" || lex.peek() == "=" || lex.peek() == ">=")) {
        const std::string op = lex.next();
        double rsign = 1;
        if (lex.peek() == "-") {
          lex.next();
          rsign = -1;
        }
        const double val = rsign * std::stod(lex.next());
        if (op == "<=") m.vars[v].ub = val;
        if (op == ">=") m.vars[v].lb = val;
        if (op == "=") m.vars[v].lb = m.vars[v].ub = val;
      }
      continue;
    }
    if (sec == binaries) {
      const int v = var_of(lex.next());
      m.vars[v].binary = true;
      if (m.vars[v].ub == kInf) m.vars[v].ub = 1;
      continue;
    }
    throw std::runtime_error("unexpected token '" + t + "' outside any section");
  }
  return m;
}

LpModel parse_lp_file(const std::string& path) { return parse_lp(read_file(path)); }

// ---------------------------------------------------------------------------
// model builders

namespace {

struct Ids {
  static std::string x(int i, int j, int k) {
    return "x_" + std::to_string(i) + "_" + std::to_string(j) + "_" + std::to_string(k);
  }
  static std::string y(int r, int i, int k) {
    return "y_" + std::to_string(r) + "_" + std::to_string(i) + "_" + std::to_string(k);
  }
  static std::string tau(int s, int k) {
    return "tau_" + std::to_string(s) + "_" + std::to_string(k);
  }
  static std::string B(int i, int k) {
    return "B_" + std::to_string(i) + "_" + std::to_string(k);
  }
  static std::string A(int i, int k) {
    return "A_" + std::to_string(i) + "_" + std::to_string(k);
  }
  static std::string W(int i, int k) {
    return "W_" + std::to_string(i) + "_" + std::to_string(k);
  }
  static std::string q(int i, int k) {
    return "q_" + std::to_string(i) + "_" + std::to_string(k);
  }
  static std::string E(int i, int k) {
    return "E_" + std::to_string(i) + "_" + std::to_string(k);
  }
  static std::string p(int i, int k) {
    return "p_" + std::to_string(i) + "_" + std::to_string(k);
  }
  static std::string v(int s) { return "v_" + std::to_string(s); }
};

struct BigM {
  double count = 0;   // M1
  double time = 0;    // M2 and relatives
  double energy = 0;
};

BigM big_m(const Instance& inst, const LayeredGraph& g) {
  BigM m;
  double passengers = 0;
  for (const auto& r : inst.requests) passengers += r.passengers;
  m.count = std::max(1.0, passengers);
  double max_t = 0, max_c = 0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    for (std::size_t j = 0; j < g.nodes.size(); ++j) {
      max_t = std::max(max_t, g.drive_min(static_cast<int>(i), static_cast<int>(j)));
      max_c = std::max(max_c, g.dist_km(static_cast<int>(i), static_cast<int>(j)));
    }
  double e_max = 0, beta_max = 0;
  for (const auto& v : inst.vehicles) {
    e_max = std::max(e_max, v.e_max_kwh);
    beta_max = std::max(beta_max, v.beta_kwh_per_km);
  }
  double alpha_min = kInf;
  for (const auto& c : inst.chargers) alpha_min = std::min(alpha_min, c.alpha_kwh_per_min);
  const double tau_max = inst.chargers.empty() ? 0 : e_max / alpha_min;
  m.time = inst.horizon + max_t + inst.service_time + tau_max;
  m.energy = e_max + beta_max * max_c + inst.horizon;
  return m;
}

// nodes of each class, in id order
struct NodeSets {
  std::vector<int> mps, stations, chargers, all;  // all = V (no depots)
  int depot0 = -1, depotN = -1;
};

NodeSets node_sets(const LayeredGraph& g) {
  NodeSets s;
  s.depot0 = g.depot_start;
  s.depotN = g.depot_end;
  for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i) {
    switch (g.nodes[i].kind) {
      case NodeKind::meeting_point: s.mps.push_back(i); break;
      case NodeKind::station: s.stations.push_back(i); break;
      case NodeKind::charger: s.chargers.push_back(i); break;
      default: break;
    }
  }
  s.all = s.mps;
  s.all.insert(s.all.end(), s.stations.begin(), s.stations.end());
  s.all.insert(s.all.end(), s.chargers.begin(), s.chargers.end());
  std::sort(s.all.begin(), s.all.end());
  return s;
}

void two_sided(LpModel& m, const std::string& base, std::vector<LpTerm> lhs_minus_rhs,
               int gate_var, double gate_m) {
  // |expr| <= M (1 - gate): expr - M*(1-gate) <= 0 and expr + M*(1-gate) >= 0
  LpConstraint up;
  up.name = base + "_u";
  up.terms = lhs_minus_rhs;
  up.terms.push_back({gate_var, gate_m});
  up.sense = 'L';
  up.rhs = gate_m;
  m.add_con(std::move(up));
  LpConstraint lo;
  lo.name = base + "_l";
  lo.terms = std::move(lhs_minus_rhs);
  lo.terms.push_back({gate_var, -gate_m});
  lo.sense = 'G';
  lo.rhs = -gate_m;
  m.add_con(std::move(lo));
}

}  // namespace

LpModel build_full_model(const Instance& inst, const LayeredGraph& g) {
  LpModel m;
  const BigM M = big_m(inst, g);
  const NodeSets ns = node_sets(g);
  const int K = static_cast<int>(inst.vehicles.size());
  const int R = static_cast<int>(inst.requests.size());
  const auto& w = inst.weights;

  const int one = m.add_var("one", false, 1, 1);

  // variables
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i)
      for (int j = 0; j < static_cast<int>(g.nodes.size()); ++j)
        if (g.arc(i, j)) m.add_var(Ids::x(i, j, k), true, 0, 1);
    for (int r = 0; r < R; ++r)
      for (const auto& wa : g.walk_arcs[r]) m.add_var(Ids::y(r, wa.node, k), true, 0, 1);
    for (int s : ns.chargers) m.add_var(Ids::tau(s, k), false, 0, kInf);
    for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i) {
      const auto& nd = g.nodes[i];
      m.add_var(Ids::B(i, k), false, nd.e, nd.l);
      m.add_var(Ids::q(i, k), false, 0, inst.vehicles[k].capacity);
      const bool depot0 = i == ns.depot0;
      m.add_var(Ids::E(i, k), false,
                depot0 ? inst.vehicles[k].e_init_kwh : inst.vehicles[k].e_min_kwh,
                depot0 ? inst.vehicles[k].e_init_kwh : inst.vehicles[k].e_max_kwh);
    }
    for (int i : ns.stations) {
      m.add_var(Ids::A(i, k), false, 0, kInf);
      m.add_var(Ids::W(i, k), false, 0, kInf);
      m.add_var(Ids::p(i, k), true, 0, 1);
    }
  }
  for (int s : ns.chargers) m.add_var(Ids::v(s), true, 0, 1);

  // objective
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i)
      for (int j = 0; j < static_cast<int>(g.nodes.size()); ++j)
        if (g.arc(i, j))
          m.objective.push_back({m.var(Ids::x(i, j, k)), w.lambda1 * g.drive_min(i, j)});
    for (int s : ns.chargers) m.objective.push_back({m.var(Ids::tau(s, k)), w.lambda1});
    for (int r = 0; r < R; ++r)
      for (const auto& wa : g.walk_arcs[r]) {
        m.objective.push_back(
            {m.var(Ids::y(r, wa.node, k)), w.lambda2 * wa.walk_min - w.omega});
      }
    for (int i : ns.stations) m.objective.push_back({m.var(Ids::W(i, k)), w.lambda3});
  }
  m.objective.push_back({one, w.omega * R});

  auto in_arcs = [&](int j) {
    std::vector<int> v;
    for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i)
      if (g.arc(i, j)) v.push_back(i);
    return v;
  };
  auto out_arcs = [&](int i) {
    std::vector<int> v;
    for (int j = 0; j < static_cast<int>(g.nodes.size()); ++j)
      if (g.arc(i, j)) v.push_back(j);
    return v;
  };

  for (int r = 0; r < R; ++r) {
    LpConstraint c2;
    c2.name = "eq2_" + std::to_string(r);
    LpConstraint c3;
    c3.name = "eq3_" + std::to_string(r);
    for (int k = 0; k < K; ++k)
      for (const auto& wa : g.walk_arcs[r]) {
        c2.terms.push_back({m.var(Ids::y(r, wa.node, k)), 1});
        c3.terms.push_back({m.var(Ids::y(r, wa.node, k)), wa.walk_km});
      }
    if (c2.terms.empty()) continue;
    c2.sense = 'L';
    c2.rhs = 1;
    c3.sense = 'L';
    c3.rhs = inst.w_max;
    m.add_con(std::move(c2));
    m.add_con(std::move(c3));
  }

  for (int k = 0; k < K; ++k) {
    const std::string ks = std::to_string(k);
    {
      LpConstraint c4;
      c4.name = "eq4_" + ks;
      for (int j : out_arcs(ns.depot0)) c4.terms.push_back({m.var(Ids::x(ns.depot0, j, k)), 1});
      c4.sense = 'E';
      c4.rhs = 1;
      m.add_con(std::move(c4));
      LpConstraint c5;
      c5.name = "eq5_" + ks;
      for (int i : in_arcs(ns.depotN)) c5.terms.push_back({m.var(Ids::x(i, ns.depotN, k)), 1});
      c5.sense = 'E';
      c5.rhs = 1;
      m.add_con(std::move(c5));
    }
    for (int j : ns.mps) {
      LpConstraint c6;
      c6.name = "eq6_" + ks + "_" + std::to_string(j);
      for (int i : in_arcs(j)) c6.terms.push_back({m.var(Ids::x(i, j, k)), 1});
      c6.sense = 'L';
      c6.rhs = 1;
      m.add_con(std::move(c6));
    }
    for (int j : ns.all) {
      LpConstraint c7;
      c7.name = "eq7_" + ks + "_" + std::to_string(j);
      for (int i : in_arcs(j)) c7.terms.push_back({m.var(Ids::x(i, j, k)), 1});
      for (int i : out_arcs(j)) c7.terms.push_back({m.var(Ids::x(j, i, k)), -1});
      c7.sense = 'E';
      c7.rhs = 0;
      m.add_con(std::move(c7));
    }
    for (int i : ns.mps) {
      LpConstraint c8;
      c8.name = "eq8_" + ks + "_" + std::to_string(i);
      bool any = false;
      for (int r = 0; r < R; ++r)
        for (const auto& wa : g.walk_arcs[r])
          if (wa.node == i) {
            c8.terms.push_back({m.var(Ids::y(r, i, k)), 1});
            any = true;
          }
      if (!any) continue;
      for (int j : out_arcs(i)) c8.terms.push_back({m.var(Ids::x(i, j, k)), -M.count});
      c8.sense = 'L';
      c8.rhs = 0;
      m.add_con(std::move(c8));
    }
    // eq9 as the (34)/(35) pair
    for (int r = 0; r < R; ++r) {
      const int dr = g.layers[g.request_layer[r]].station_node;
      for (const auto& wa : g.walk_arcs[r]) {
        const int i = wa.node;
        const std::string base =
            "eq9_" + ks + "_" + std::to_string(i) + "_" + std::to_string(r);
        LpConstraint lo;
        lo.name = base + "_l";
        for (int j : in_arcs(i)) lo.terms.push_back({m.var(Ids::x(j, i, k)), 1});
        for (int j : in_arcs(dr)) lo.terms.push_back({m.var(Ids::x(j, dr, k)), -1});
        lo.terms.push_back({m.var(Ids::y(r, i, k)), -M.count});
        lo.sense = 'G';
        lo.rhs = -M.count;
        m.add_con(std::move(lo));
        LpConstraint up;
        up.name = base + "_u";
        for (int j : in_arcs(i)) up.terms.push_back({m.var(Ids::x(j, i, k)), 1});
        for (int j : in_arcs(dr)) up.terms.push_back({m.var(Ids::x(j, dr, k)), -1});
        up.terms.push_back({m.var(Ids::y(r, i, k)), M.count});
        up.sense = 'L';
        up.rhs = M.count;
        m.add_con(std::move(up));
      }
    }
    // eq10: load gain at pickups (passenger weighted)
    for (int j : ns.mps) {
      for (int i : in_arcs(j)) {
        std::vector<LpTerm> expr{{m.var(Ids::q(j, k)), 1}, {m.var(Ids::q(i, k)), -1}};
        for (int r = 0; r < R; ++r)
          for (const auto& wa : g.walk_arcs[r])
            if (wa.node == j)
              expr.push_back({m.var(Ids::y(r, j, k)),
                              -static_cast<double>(inst.requests[r].passengers)});
        two_sided(m, "eq10_" + ks + "_" + std::to_string(i) + "_" + std::to_string(j), expr,
                  m.var(Ids::x(i, j, k)), M.count);
      }
    }
    // eq11: loads drop at the station by the customers alighting there
    for (int j : ns.stations) {
      for (int i : in_arcs(j)) {
        if (g.nodes[i].kind != NodeKind::meeting_point) continue;
        std::vector<LpTerm> expr{{m.var(Ids::q(j, k)), 1}, {m.var(Ids::q(i, k)), -1}};
        for (int r = 0; r < R; ++r) {
          if (g.layers[g.request_layer[r]].station_node != j) continue;
          for (const auto& wa : g.walk_arcs[r])
            expr.push_back({m.var(Ids::y(r, wa.node, k)),
                            static_cast<double>(inst.requests[r].passengers)});
        }
        two_sided(m, "eq11_" + ks + "_" + std::to_string(i) + "_" + std::to_string(j), expr,
                  m.var(Ids::x(i, j, k)), M.count);
      }
    }
    // eq13/eq14: service start chains
    for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i) {
      if (i == ns.depotN) continue;
      for (int j : out_arcs(i)) {
        const auto& nd = g.nodes[i];
        LpConstraint c;
        c.terms = {{m.var(Ids::B(j, k)), 1}, {m.var(Ids::B(i, k)), -1}};
        if (nd.kind == NodeKind::charger) {
          c.name = "eq14_" + ks + "_" + std::to_string(i) + "_" + std::to_string(j);
          c.terms.push_back({m.var(Ids::tau(i, k)), -1});
        } else {
          c.name = "eq13_" + ks + "_" + std::to_string(i) + "_" + std::to_string(j);
        }
        c.terms.push_back({m.var(Ids::x(i, j, k)), -M.time});
        c.sense = 'G';
        c.rhs = nd.u + g.drive_min(i, j) - M.time;
        m.add_con(std::move(c));
      }
    }
    // eq15: arrival time at stations
    for (int j : ns.stations) {
      for (int i : in_arcs(j)) {
        std::vector<LpTerm> expr{{m.var(Ids::A(j, k)), 1}, {m.var(Ids::B(i, k)), -1}};
        const double rhs_shift = g.drive_min(i, j) + g.nodes[i].u;
        // expr - rhs_shift gated both ways
        LpConstraint up;
        up.name = "eq15_" + ks + "_" + std::to_string(i) + "_" + std::to_string(j) + "_u";
        up.terms = expr;
        up.terms.push_back({m.var(Ids::x(i, j, k)), M.time});
        up.sense = 'L';
        up.rhs = rhs_shift + M.time;
        m.add_con(std::move(up));
        LpConstraint lo;
        lo.name = "eq15_" + ks + "_" + std::to_string(i) + "_" + std::to_string(j) + "_l";
        lo.terms = std::move(expr);
        lo.terms.push_back({m.var(Ids::x(i, j, k)), -M.time});
        lo.sense = 'G';
        lo.rhs = rhs_shift - M.time;
        m.add_con(std::move(lo));
      }
    }
    for (int i : ns.stations) {
      LpConstraint c16;
      c16.name = "eq16_" + ks + "_" + std::to_string(i);
      c16.terms = {{m.var(Ids::W(i, k)), 1},
                   {m.var(Ids::B(i, k)), -1},
                   {m.var(Ids::A(i, k)), 1},
                   {m.var(Ids::p(i, k)), -M.time}};
      c16.sense = 'G';
      c16.rhs = -M.time;
      m.add_con(std::move(c16));
      LpConstraint c17;
      c17.name = "eq17_" + ks + "_" + std::to_string(i);
      c17.terms.push_back({m.var(Ids::p(i, k)), 1});
      for (int j : in_arcs(i)) c17.terms.push_back({m.var(Ids::x(j, i, k)), -1});
      c17.sense = 'E';
      c17.rhs = 0;
      m.add_con(std::move(c17));
    }
    // eq18: maximum ride time per walking arc
    for (int r = 0; r < R; ++r) {
      const int dr = g.layers[g.request_layer[r]].station_node;
      for (const auto& wa : g.walk_arcs[r]) {
        const int i = wa.node;
        const double L = max_ride_time(g.drive_min(i, dr), inst.detour_factor);
        LpConstraint c;
        c.name = "eq18_" + ks + "_" + std::to_string(r) + "_" + std::to_string(i);
        c.terms = {{m.var(Ids::A(dr, k)), 1},
                   {m.var(Ids::B(i, k)), -1},
                   {m.var(Ids::y(r, i, k)), M.time}};
        c.sense = 'L';
        c.rhs = L + g.nodes[i].u + M.time;
        m.add_con(std::move(c));
      }
    }
    // eq22/eq23: energy conservation
    for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i) {
      if (i == ns.depotN) continue;
      const auto& nd = g.nodes[i];
      for (int j : out_arcs(i)) {
        std::vector<LpTerm> expr{{m.var(Ids::E(j, k)), 1}, {m.var(Ids::E(i, k)), -1}};
        std::string base;
        if (nd.kind == NodeKind::charger) {
          base = "eq23_" + ks + "_" + std::to_string(i) + "_" + std::to_string(j);
          expr.push_back({m.var(Ids::tau(i, k)), -inst.chargers[nd.phys].alpha_kwh_per_min});
        } else {
          base = "eq22_" + ks + "_" + std::to_string(i) + "_" + std::to_string(j);
        }
        const double consumed = inst.vehicles[k].beta_kwh_per_km * g.dist_km(i, j);
        LpConstraint up;
        up.name = base + "_u";
        up.terms = expr;
        up.terms.push_back({m.var(Ids::x(i, j, k)), M.energy});
        up.sense = 'L';
        up.rhs = -consumed + M.energy;
        m.add_con(std::move(up));
        LpConstraint lo;
        lo.name = base + "_l";
        lo.terms = std::move(expr);
        lo.terms.push_back({m.var(Ids::x(i, j, k)), -M.energy});
        lo.sense = 'G';
        lo.rhs = -consumed - M.energy;
        m.add_con(std::move(lo));
      }
    }
    // eq27: start and duration vanish unless the charger is left by k
    for (int s : ns.chargers) {
      LpConstraint c27;
      c27.name = "eq27_" + ks + "_" + std::to_string(s);
      c27.terms = {{m.var(Ids::tau(s, k)), 1}, {m.var(Ids::B(s, k)), 1}};
      for (int j : out_arcs(s)) c27.terms.push_back({m.var(Ids::x(s, j, k)), -M.time});
      c27.sense = 'L';
      c27.rhs = 0;
      m.add_con(std::move(c27));
    }
  }

  // fleet-level charger constraints
  for (int s : ns.chargers) {
    LpConstraint c24;
    c24.name = "eq24_" + std::to_string(s);
    c24.terms.push_back({m.var(Ids::v(s)), 1});
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < static_cast<int>(g.nodes.size()); ++j)
        if (g.arc(s, j)) c24.terms.push_back({m.var(Ids::x(s, j, k)), -1});
    c24.sense = 'E';
    c24.rhs = 0;
    m.add_con(std::move(c24));
    LpConstraint c28;
    c28.name = "eq28_" + std::to_string(s);
    c28.terms = {{m.var(Ids::v(s)), 1}};
    c28.sense = 'L';
    c28.rhs = 1;
    m.add_con(std::move(c28));
  }
  for (const auto& dummies : g.charger_dummies) {
    for (std::size_t a = 0; a < dummies.size(); ++a) {
      for (std::size_t b = a + 1; b < dummies.size(); ++b) {
        const int h = dummies[a];
        const int l = dummies[b];
        LpConstraint c25;
        c25.name = "eq25_" + std::to_string(h) + "_" + std::to_string(l);
        c25.terms = {{m.var(Ids::v(h)), 1}, {m.var(Ids::v(l)), -1}};
        c25.sense = 'L';
        c25.rhs = 0;
        m.add_con(std::move(c25));
        LpConstraint c26;
        c26.name = "eq26_" + std::to_string(h) + "_" + std::to_string(l);
        for (int k = 0; k < K; ++k) {
          c26.terms.push_back({m.var(Ids::B(h, k)), 1});
          c26.terms.push_back({m.var(Ids::B(l, k)), -1});
          c26.terms.push_back({m.var(Ids::tau(l, k)), -1});
        }
        c26.terms.push_back({m.var(Ids::v(h)), -M.time});
        c26.terms.push_back({m.var(Ids::v(l)), -M.time});
        c26.sense = 'G';
        c26.rhs = -2 * M.time;
        m.add_con(std::move(c26));
      }
    }
  }
  return m;
}

LpModel build_second_stage_model(const Instance& inst, const LayeredGraph& g,
                                 const Assignment& a) {
  LpModel m;
  const BigM M = big_m(inst, g);
  const int K = static_cast<int>(inst.vehicles.size());
  const auto& w = inst.weights;

  // preprocessing: only assigned stops and their stations stay
  std::vector<double> qbar(g.nodes.size(), 0);
  std::vector<char> keep(g.nodes.size(), 0);
  keep[g.depot_start] = keep[g.depot_end] = 1;
  for (std::size_t r = 0; r < a.request_mp_node.size(); ++r) {
    const int node = a.request_mp_node[r];
    if (node < 0) continue;
    qbar[node] += inst.requests[r].passengers;
    const int st = g.layers[g.nodes[node].layer].station_node;
    qbar[st] -= inst.requests[r].passengers;
    keep[node] = keep[st] = 1;
  }
  for (const auto& dummies : g.charger_dummies)
    for (int s : dummies) keep[s] = 1;

  std::vector<int> mps, stations, chargers, all;
  for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i) {
    if (!keep[i]) continue;
    switch (g.nodes[i].kind) {
      case NodeKind::meeting_point: mps.push_back(i); break;
      case NodeKind::station: stations.push_back(i); break;
      case NodeKind::charger: chargers.push_back(i); break;
      default: break;
    }
  }
  all = mps;
  all.insert(all.end(), stations.begin(), stations.end());
  all.insert(all.end(), chargers.begin(), chargers.end());
  std::sort(all.begin(), all.end());
  auto arc_ok = [&](int i, int j) { return keep[i] && keep[j] && g.arc(i, j); };

  const int one = m.add_var("one", false, 1, 1);
  for (int k = 0; k < K; ++k) {
    for (int i : all) {
      m.add_var(Ids::B(i, k), false, g.nodes[i].e, g.nodes[i].l);
      m.add_var(Ids::q(i, k), false, 0, inst.vehicles[k].capacity);
      m.add_var(Ids::E(i, k), false, inst.vehicles[k].e_min_kwh, inst.vehicles[k].e_max_kwh);
    }
    for (int i : {g.depot_start, g.depot_end}) {
      m.add_var(Ids::B(i, k), false, 0, inst.horizon);
      m.add_var(Ids::q(i, k), false, 0, inst.vehicles[k].capacity);
      const bool d0 = i == g.depot_start;
      m.add_var(Ids::E(i, k), false,
                d0 ? inst.vehicles[k].e_init_kwh : inst.vehicles[k].e_min_kwh,
                d0 ? inst.vehicles[k].e_init_kwh : inst.vehicles[k].e_max_kwh);
    }
    for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i)
      for (int j = 0; j < static_cast<int>(g.nodes.size()); ++j)
        if (arc_ok(i, j)) m.add_var(Ids::x(i, j, k), true, 0, 1);
    for (int s : chargers) m.add_var(Ids::tau(s, k), false, 0, kInf);
    for (int i : stations) {
      m.add_var(Ids::A(i, k), false, 0, kInf);
      m.add_var(Ids::W(i, k), false, 0, kInf);
      m.add_var(Ids::p(i, k), true, 0, 1);
    }
  }
  for (int s : chargers) m.add_var(Ids::v(s), true, 0, 1);

  // objective D1
  double qbar_total = 0;
  for (int i : mps) qbar_total += qbar[i];
  m.objective.push_back({one, w.omega * qbar_total});
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i)
      for (int j = 0; j < static_cast<int>(g.nodes.size()); ++j)
        if (arc_ok(i, j))
          m.objective.push_back({m.var(Ids::x(i, j, k)), w.lambda1 * g.drive_min(i, j)});
    for (int s : chargers) m.objective.push_back({m.var(Ids::tau(s, k)), w.lambda1});
    for (int i : stations) m.objective.push_back({m.var(Ids::W(i, k)), w.lambda3});
    for (int i : mps)
      for (int j = 0; j < static_cast<int>(g.nodes.size()); ++j)
        if (arc_ok(i, j) &&
            (g.nodes[j].kind == NodeKind::meeting_point || g.nodes[j].kind == NodeKind::station))
          m.objective.push_back({m.var(Ids::x(i, j, k)), -w.omega * qbar[i]});
  }

  auto in_arcs = [&](int j) {
    std::vector<int> v;
    for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i)
      if (arc_ok(i, j)) v.push_back(i);
    return v;
  };
  auto out_arcs = [&](int i) {
    std::vector<int> v;
    for (int j = 0; j < static_cast<int>(g.nodes.size()); ++j)
      if (arc_ok(i, j)) v.push_back(j);
    return v;
  };

  for (int j : mps) {
    LpConstraint c4;
    c4.name = "eqD4_" + std::to_string(j);
    for (int k = 0; k < K; ++k)
      for (int i : in_arcs(j)) c4.terms.push_back({m.var(Ids::x(i, j, k)), 1});
    c4.sense = 'L';
    c4.rhs = 1;
    m.add_con(std::move(c4));
  }

  for (int k = 0; k < K; ++k) {
    const std::string ks = std::to_string(k);
    {
      LpConstraint c2;
      c2.name = "eqD2_" + ks;
      for (int j : out_arcs(g.depot_start))
        c2.terms.push_back({m.var(Ids::x(g.depot_start, j, k)), 1});
      c2.sense = 'E';
      c2.rhs = 1;
      m.add_con(std::move(c2));
      LpConstraint c3;
      c3.name = "eqD3_" + ks;
      for (int i : in_arcs(g.depot_end)) c3.terms.push_back({m.var(Ids::x(i, g.depot_end, k)), 1});
      c3.sense = 'E';
      c3.rhs = 1;
      m.add_con(std::move(c3));
    }
    for (int j : all) {
      LpConstraint c5;
      c5.name = "eqD5_" + ks + "_" + std::to_string(j);
      for (int i : in_arcs(j)) c5.terms.push_back({m.var(Ids::x(i, j, k)), 1});
      for (int i : out_arcs(j)) c5.terms.push_back({m.var(Ids::x(j, i, k)), -1});
      c5.sense = 'E';
      c5.rhs = 0;
      m.add_con(std::move(c5));
    }
    for (int i : mps) {
      const int di = g.layers[g.nodes[i].layer].station_node;
      LpConstraint c6;
      c6.name = "eqD6_" + ks + "_" + std::to_string(i);
      for (int j : in_arcs(i)) c6.terms.push_back({m.var(Ids::x(j, i, k)), 1});
      for (int j : in_arcs(di)) c6.terms.push_back({m.var(Ids::x(j, di, k)), -1});
      c6.sense = 'L';
      c6.rhs = 0;
      m.add_con(std::move(c6));
    }
    // D7 loads over kept stops
    for (int j : all) {
      if (g.nodes[j].kind == NodeKind::charger) continue;
      for (int i : in_arcs(j)) {
        std::vector<LpTerm> expr{{m.var(Ids::q(j, k)), 1}, {m.var(Ids::q(i, k)), -1}};
        two_sided(m, "eqD7_" + ks + "_" + std::to_string(i) + "_" + std::to_string(j), expr,
                  m.var(Ids::x(i, j, k)), M.count + std::abs(qbar[j]));
        // fold the constant load delta into the rhs of both rows
        auto& up = m.cons[m.cons.size() - 2];
        up.rhs += qbar[j];
        auto& lo = m.cons.back();
        lo.rhs += qbar[j];
      }
    }
    // D9/D10 service chain, D11 arrivals, D12/13 waits
    for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i) {
      if (!keep[i] || i == g.depot_end) continue;
      const auto& nd = g.nodes[i];
      for (int j : out_arcs(i)) {
        LpConstraint c;
        c.terms = {{m.var(Ids::B(j, k)), 1}, {m.var(Ids::B(i, k)), -1}};
        if (nd.kind == NodeKind::charger) {
          c.name = "eqD10_" + ks + "_" + std::to_string(i) + "_" + std::to_string(j);
          c.terms.push_back({m.var(Ids::tau(i, k)), -1});
        } else {
          c.name = "eqD9_" + ks + "_" + std::to_string(i) + "_" + std::to_string(j);
        }
        c.terms.push_back({m.var(Ids::x(i, j, k)), -M.time});
        c.sense = 'G';
        c.rhs = nd.u + g.drive_min(i, j) - M.time;
        m.add_con(std::move(c));
      }
    }
    for (int j : stations) {
      for (int i : in_arcs(j)) {
        std::vector<LpTerm> expr{{m.var(Ids::A(j, k)), 1}, {m.var(Ids::B(i, k)), -1}};
        const double shift = g.drive_min(i, j) + g.nodes[i].u;
        LpConstraint up;
        up.name = "eqD11_" + ks + "_" + std::to_string(i) + "_" + std::to_string(j) + "_u";
        up.terms = expr;
        up.terms.push_back({m.var(Ids::x(i, j, k)), M.time});
        up.sense = 'L';
        up.rhs = shift + M.time;
        m.add_con(std::move(up));
        LpConstraint lo;
        lo.name = "eqD11_" + ks + "_" + std::to_string(i) + "_" + std::to_string(j) + "_l";
        lo.terms = std::move(expr);
        lo.terms.push_back({m.var(Ids::x(i, j, k)), -M.time});
        lo.sense = 'G';
        lo.rhs = shift - M.time;
        m.add_con(std::move(lo));
      }
      LpConstraint c12;
      c12.name = "eqD12_" + ks + "_" + std::to_string(j);
      c12.terms = {{m.var(Ids::W(j, k)), 1},
                   {m.var(Ids::B(j, k)), -1},
                   {m.var(Ids::A(j, k)), 1},
                   {m.var(Ids::p(j, k)), -M.time}};
      c12.sense = 'G';
      c12.rhs = -M.time;
      m.add_con(std::move(c12));
      LpConstraint c13;
      c13.name = "eqD13_" + ks + "_" + std::to_string(j);
      c13.terms.push_back({m.var(Ids::p(j, k)), 1});
      for (int i : in_arcs(j)) c13.terms.push_back({m.var(Ids::x(i, j, k)), -1});
      c13.sense = 'E';
      c13.rhs = 0;
      m.add_con(std::move(c13));
    }
    // D14/D15 ride bounds gated on the stop being visited
    for (int i : mps) {
      const int di = g.layers[g.nodes[i].layer].station_node;
      const double L = max_ride_time(g.drive_min(i, di), inst.detour_factor);
      LpConstraint c14;
      c14.name = "eqD14_" + ks + "_" + std::to_string(i);
      c14.terms = {{m.var(Ids::A(di, k)), 1}, {m.var(Ids::B(i, k)), -1}};
      for (int j : in_arcs(i)) c14.terms.push_back({m.var(Ids::x(j, i, k)), M.time});
      c14.sense = 'G';
      c14.rhs = g.drive_min(i, di) + g.nodes[i].u + M.time - 2 * M.time;
      m.add_con(std::move(c14));
      LpConstraint c15;
      c15.name = "eqD15_" + ks + "_" + std::to_string(i);
      c15.terms = {{m.var(Ids::A(di, k)), 1}, {m.var(Ids::B(i, k)), -1}};
      for (int j : in_arcs(i)) c15.terms.push_back({m.var(Ids::x(j, i, k)), M.time});
      c15.sense = 'L';
      c15.rhs = L + g.nodes[i].u + M.time;
      m.add_con(std::move(c15));
    }
    // D19/D20 energy, D24 gating
    for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i) {
      if (!keep[i] || i == g.depot_end) continue;
      const auto& nd = g.nodes[i];
      for (int j : out_arcs(i)) {
        std::vector<LpTerm> expr{{m.var(Ids::E(j, k)), 1}, {m.var(Ids::E(i, k)), -1}};
        std::string base;
        if (nd.kind == NodeKind::charger) {
          base = "eqD20_" + ks + "_" + std::to_string(i) + "_" + std::to_string(j);
          expr.push_back({m.var(Ids::tau(i, k)), -inst.chargers[nd.phys].alpha_kwh_per_min});
        } else {
          base = "eqD19_" + ks + "_" + std::to_string(i) + "_" + std::to_string(j);
        }
        const double consumed = inst.vehicles[k].beta_kwh_per_km * g.dist_km(i, j);
        LpConstraint up;
        up.name = base + "_u";
        up.terms = expr;
        up.terms.push_back({m.var(Ids::x(i, j, k)), M.energy});
        up.sense = 'L';
        up.rhs = -consumed + M.energy;
        m.add_con(std::move(up));
        LpConstraint lo;
        lo.name = base + "_l";
        lo.terms = std::move(expr);
        lo.terms.push_back({m.var(Ids::x(i, j, k)), -M.energy});
        lo.sense = 'G';
        lo.rhs = -consumed - M.energy;
        m.add_con(std::move(lo));
      }
    }
    for (int s : chargers) {
      LpConstraint c24;
      c24.name = "eqD24_" + ks + "_" + std::to_string(s);
      c24.terms = {{m.var(Ids::tau(s, k)), 1}, {m.var(Ids::B(s, k)), 1}};
      for (int j : out_arcs(s)) c24.terms.push_back({m.var(Ids::x(s, j, k)), -M.time});
      c24.sense = 'L';
      c24.rhs = 0;
      m.add_con(std::move(c24));
    }
  }
  for (int s : chargers) {
    LpConstraint c21;
    c21.name = "eqD21_" + std::to_string(s);
    c21.terms.push_back({m.var(Ids::v(s)), 1});
    for (int k = 0; k < K; ++k)
      for (int j : out_arcs(s)) c21.terms.push_back({m.var(Ids::x(s, j, k)), -1});
    c21.sense = 'E';
    c21.rhs = 0;
    m.add_con(std::move(c21));
    LpConstraint c25;
    c25.name = "eqD25_" + std::to_string(s);
    c25.terms = {{m.var(Ids::v(s)), 1}};
    c25.sense = 'L';
    c25.rhs = 1;
    m.add_con(std::move(c25));
  }
  for (const auto& dummies : g.charger_dummies) {
    for (std::size_t a2 = 0; a2 < dummies.size(); ++a2) {
      for (std::size_t b = a2 + 1; b < dummies.size(); ++b) {
        const int h = dummies[a2];
        const int l = dummies[b];
        LpConstraint c22;
        c22.name = "eqD22_" + std::to_string(h) + "_" + std::to_string(l);
        c22.terms = {{m.var(Ids::v(h)), 1}, {m.var(Ids::v(l)), -1}};
        c22.sense = 'L';
        c22.rhs = 0;
        m.add_con(std::move(c22));
        LpConstraint c23;
        c23.name = "eqD23_" + std::to_string(h) + "_" + std::to_string(l);
        for (int k = 0; k < K; ++k) {
          c23.terms.push_back({m.var(Ids::B(h, k)), 1});
          c23.terms.push_back({m.var(Ids::B(l, k)), -1});
          c23.terms.push_back({m.var(Ids::tau(l, k)), -1});
        }
        c23.terms.push_back({m.var(Ids::v(h)), -M.time});
        c23.terms.push_back({m.var(Ids::v(l)), -M.time});
        c23.sense = 'G';
        c23.rhs = -2 * M.time;
        m.add_con(std::move(c23));
      }
    }
  }
  return m;
}

namespace {

// shared schedule extraction for both variable encodings
void route_variables(const Solution& sol, const SolveContext& ctx, bool with_y,
                     std::map<std::string, double>& out) {
  const auto& g = *ctx.graph;
  const auto& inst = *ctx.inst;
  const int K = static_cast<int>(sol.routes.size());
  for (int k = 0; k < K; ++k) {
    const auto& rs = sol.sched[k];
    const int n = static_cast<int>(rs.nodes.size());
    std::vector<char> visited(g.nodes.size(), 0);
    for (int i = 0; i < n; ++i) visited[rs.nodes[i]] = 1;
    for (int i = 1; i < n; ++i)
      out[Ids::x(rs.nodes[i - 1], rs.nodes[i], k)] = 1;
    for (int i = 0; i < n; ++i) {
      const int id = rs.nodes[i];
      out[Ids::B(id, k)] = rs.B[i];
      out[Ids::q(id, k)] = rs.q[i];
      out[Ids::E(id, k)] = rs.E[i];
      const auto& nd = g.nodes[id];
      if (nd.kind == NodeKind::station) {
        out[Ids::A(id, k)] = rs.A[i];
        out[Ids::W(id, k)] = rs.W[i];
        out[Ids::p(id, k)] = 1;
      }
      if (nd.kind == NodeKind::charger && i >= 1) {
        out[Ids::tau(id, k)] = sol.routes[k][i - 1].tau;
        out[Ids::v(id)] = 1;
      }
    }
    // unvisited nodes sit at their window start with the initial charge
    for (int id = 0; id < static_cast<int>(g.nodes.size()); ++id) {
      if (visited[id]) continue;
      out[Ids::B(id, k)] = g.nodes[id].e;
      out[Ids::q(id, k)] = 0;
      out[Ids::E(id, k)] = inst.vehicles[k].e_init_kwh;
      if (g.nodes[id].kind == NodeKind::station) {
        out[Ids::A(id, k)] = g.nodes[id].e;
        out[Ids::W(id, k)] = 0;
        out[Ids::p(id, k)] = 0;
      }
      if (g.nodes[id].kind == NodeKind::charger) out[Ids::tau(id, k)] = 0;
    }
  }
  if (with_y) {
    for (std::size_t r = 0; r < sol.request_mp_node.size(); ++r) {
      const int node = sol.request_mp_node[r];
      if (node < 0) continue;
      const int gid = ctx.group_of_node[node];
      if (gid < 0) continue;
      const int k = sol.group_vehicle[gid];
      if (k < 0) continue;
      out[Ids::y(static_cast<int>(r), node, k)] = 1;
    }
  }
  out["one"] = 1;
}

}  // namespace

std::map<std::string, double> solution_to_variables(const Solution& sol,
                                                    const SolveContext& ctx) {
  Solution canon = sol;
  canonicalize_charger_dummies(canon, ctx);
  std::map<std::string, double> out;
  route_variables(canon, ctx, true, out);
  return out;
}

std::map<std::string, double> solution_to_second_stage_variables(const Solution& sol,
                                                                 const SolveContext& ctx) {
  Solution canon = sol;
  canonicalize_charger_dummies(canon, ctx);
  std::map<std::string, double> out;
  route_variables(canon, ctx, false, out);
  return out;
}

std::string CheckResult::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "feedopt-milp-check";
  j["objective"] = objective;
  j["feasible"] = ok();
  j["violations"] = nlohmann::ordered_json::array();
  for (const auto& v : violations)
    j["violations"].push_back({{"constraint", v.con},
                               {"lhs", v.lhs},
                               {"sense", std::string(1, v.sense)},
                               {"rhs", v.rhs}});
  return j.dump(2) + "\n";
}

CheckResult check_solution(const LpModel& model, const std::map<std::string, double>& values) {
  CheckResult res;
  std::vector<double> val(model.vars.size(), 0.0);
  for (const auto& [name, v] : values) {
    const int idx = model.var(name);
    if (idx >= 0) val[idx] = v;
  }
  for (std::size_t i = 0; i < model.vars.size(); ++i) {
    const auto& v = model.vars[i];
    if (val[i] < v.lb - 1e-6 || val[i] > v.ub + 1e-6)
      res.violations.push_back({"bound:" + v.name, val[i], 'E', v.lb});
    if (v.binary && std::abs(val[i] - std::round(val[i])) > 1e-6)
      res.violations.push_back({"integrality:" + v.name, val[i], 'E', std::round(val[i])});
  }
  for (const auto& c : model.cons) {
    double lhs = 0;
    for (const auto& t : c.terms) lhs += t.coef * val[t.var];
    const bool ok = c.sense == 'L'   ? lhs <= c.rhs + 1e-6
                    : c.sense == 'G' ? lhs >= c.rhs - 1e-6
                                     : std::abs(lhs - c.rhs) <= 1e-6;
    if (!ok) res.violations.push_back({c.name, lhs, c.sense, c.rhs});
  }
  for (const auto& t : model.objective) res.objective += t.coef * val[t.var];
  return res;
}

void write_variables_file(const std::map<std::string, double>& values,
                          const std::string& path) {
  std::ostringstream out;
  out.precision(15);
  for (const auto& [name, v] : values) out << name << " " << v << "\n";
  write_file_atomic(path, out.str());
}

std::map<std::string, double> read_variables_file(const std::string& path) {
  std::istringstream in(read_file(path));
  std::map<std::string, double> out;
  std::string name;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    double v;
    if (!(ls >> name >> v))
      throw std::runtime_error("variable file format error at line " + std::to_string(lineno));
    out[name] = v;
  }
  return out;
}

}  // namespace feedopt
