#include "hinfx/specfile.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hinfx/errors.hpp"
#include "hinfx/serialize.hpp"

namespace hinfx {

namespace {

bool same(const MatrixXd& a, const MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

class Parser {
 public:
  explicit Parser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& what) const {
    fail_at(at.IsDefined() ? at.Mark().line + 1 : 1, what);
  }

  [[noreturn]] void fail_at(int line, const std::string& what) const {
    throw InputError(source_ + ":" + std::to_string(line) + ": " + what);
  }

  YAML::Node section(const YAML::Node& root, const std::string& name, bool required) {
    const YAML::Node s = root[name];
    if (!s) {
      if (required) fail(root, "missing section '" + name + "'");
      return s;
    }
    for (const auto& kv : root)
      if (kv.first.as<std::string>() == name) header_[name] = kv.first.Mark().line + 1;
    if (!s.IsMap()) fail(s, "section '" + name + "' must be a mapping");
    return s;
  }

  /// Missing fields are reported at the section header.
  YAML::Node field(const YAML::Node& sec, const std::string& sname, const std::string& name) const {
    const YAML::Node f = sec[name];
    if (!f) {
      const auto h = header_.find(sname);
      const std::string what = "missing field '" + name + "' in section '" + sname + "'";
      if (h != header_.end()) fail_at(h->second, what);
      fail(sec, what);
    }
    return f;
  }

  void only(const YAML::Node& sec, const std::string& sname, std::set<std::string> keys) const {
    for (const auto& kv : sec) {
      const auto key = kv.first.as<std::string>();
      if (!keys.count(key)) fail(kv.first, "unknown field '" + key + "' in section '" + sname + "'");
    }
  }

  double number(const YAML::Node& n, const std::string& what) const {
    if (!n.IsScalar()) fail(n, what + " must be a number");
    try {
      return n.as<double>();
    } catch (const YAML::Exception&) {
      fail(n, what + " must be a number, got '" + n.Scalar() + "'");
    }
  }

  MatrixXd matrix(const YAML::Node& n, const std::string& what) const {
    if (n.IsScalar()) return MatrixXd::Constant(1, 1, number(n, what));
    if (!n.IsSequence() || n.size() == 0) fail(n, what + " must be a list of rows");
    const auto rows = static_cast<Eigen::Index>(n.size());
    Eigen::Index cols = -1;
    MatrixXd M;
    for (Eigen::Index r = 0; r < rows; ++r) {
      const YAML::Node row = n[r];
      if (!row.IsSequence() || row.size() == 0) fail(row, what + ": each row must be a list");
      if (cols < 0) {
        cols = static_cast<Eigen::Index>(row.size());
        M.resize(rows, cols);
      }
      if (static_cast<Eigen::Index>(row.size()) != cols) fail(row, what + ": rows differ in length");
      for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = number(row[c], what);
    }
    return M;
  }

  RowSet rows(const YAML::Node& n, const std::string& what, int dim) const {
    if (n.IsMap()) {
      only(n, what, {"cube"});
      const double r = number(field(n, what, "cube"), what + ".cube");
      if (!(r > 0.0)) fail(n, what + ".cube must be positive");
      const Polytope c = Polytope::cube(dim, r);
      return RowSet::of(c);
    }
    if (!n.IsSequence() || n.size() == 0) fail(n, what + " must be a list of 'a_1 ... a_d | b' rows");
    RowSet out{MatrixXd(n.size(), dim), VectorXd(n.size())};
    for (std::size_t i = 0; i < n.size(); ++i) {
      const YAML::Node row = n[i];
      if (!row.IsScalar()) fail(row, what + ": rows are strings 'a_1 ... a_d | b'");
      std::istringstream ss(row.Scalar());
      std::vector<std::string> words;
      for (std::string w; ss >> w;) words.push_back(w);
      if (static_cast<int>(words.size()) != dim + 2 || words[dim] != "|")
        fail(row, what + ": row '" + row.Scalar() + "' needs " + std::to_string(dim) +
                      " coefficients, '|' and an offset");
      for (int c = 0; c <= dim; ++c) {
        const std::string& w = words[c < dim ? c : dim + 1];
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(w, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != w.size()) fail(row, what + ": not a number: '" + w + "'");
        if (c < dim)
          out.H(static_cast<Eigen::Index>(i), c) = v;
        else
          out.h(static_cast<Eigen::Index>(i)) = v;
      }
    }
    return out;
  }

  template <class E>
  E choice(const YAML::Node& n, const std::string& what,
           std::initializer_list<std::pair<const char*, E>> options) const {
    if (!n.IsScalar()) fail(n, what + " must be a word");
    std::string all;
    for (const auto& [name, value] : options) {
      if (n.Scalar() == name) return value;
      all += all.empty() ? name : std::string(" | ") + name;
    }
    fail(n, what + " must be one of " + all + ", got '" + n.Scalar() + "'");
  }

 private:
  std::string source_;
  std::map<std::string, int> header_;
};

std::string matrix_text(const MatrixXd& M) {
  std::string out = "[";
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    out += r ? ", [" : "[";
    for (Eigen::Index c = 0; c < M.cols(); ++c) out += (c ? ", " : "") + format_double(M(r, c));
    out += "]";
  }
  return out + "]";
}

std::string rows_text(const RowSet& s, const std::string& indent) {
  std::string out;
  for (Eigen::Index r = 0; r < s.H.rows(); ++r) {
    out += indent + "- \"";
    for (Eigen::Index c = 0; c < s.H.cols(); ++c) out += (c ? " " : "") + format_double(s.H(r, c));
    out += " | " + format_double(s.h(r)) + "\"\n";
  }
  return out;
}

}  // namespace

bool RowSet::operator==(const RowSet& o) const { return same(H, o.H) && same(h, o.h); }

bool SpecFile::operator==(const SpecFile& o) const {
  const auto tol_eq = [](const Tolerances& a, const Tolerances& b) {
    return a.feas == b.feas && a.kkt == b.kkt && a.act == b.act && a.pd == b.pd &&
           a.interior == b.interior && a.step == b.step && a.redundancy == b.redundancy &&
           a.dedup == b.dedup && a.cont == b.cont && a.c1 == b.c1;
  };
  return same(A, o.A) && same(B, o.B) && same(G, o.G) && same(Q, o.Q) && same(R, o.R) &&
         gamma == o.gamma && X == o.X && U == o.U && W == o.W && N == o.N &&
         terminal == o.terminal && same(Pf, o.Pf) && Xf == o.Xf && mode == o.mode &&
         max_domain == o.max_domain && resolve_overlaps == o.resolve_overlaps && seed == o.seed &&
         window == o.window && tol_eq(tol, o.tol);
}

ProblemSpec SpecFile::problem(TerminalPair* pair) const {
  ProblemSpec p;
  p.model = model();
  p.model.validate();
  p.X = X.polytope(tol);
  p.U = U.polytope(tol);
  p.W = W.polytope(tol);
  p.N = N;
  p.mode = mode;
  p.max_domain = max_domain;
  p.resolve_overlaps = resolve_overlaps;
  p.seed = seed;
  p.tol = tol;
  if (window) p.window = window->polytope(tol);
  if (terminal == TerminalSource::Compute) {
    TerminalPair t = synthesize_terminal(p.model, p.X, p.U, p.W, tol);
    p.Pf = t.P;
    p.Xf = t.Xf;
    if (pair) *pair = std::move(t);
  } else {
    p.Pf = Pf;
    p.Xf = Xf.polytope(tol);
    if (pair) {
      // Gains of the given weight are still the Riccati gains at this gamma.
      const auto ric = solve_hinf_riccati(p.model);
      pair->P = Pf;
      pair->Ku = ric.Ku;
      pair->Kw = ric.Kw;
      pair->Af = p.model.A + p.model.B * ric.Ku;
      pair->Ac = pair->Af + p.model.G * ric.Kw;
      pair->Xf = p.Xf;
      pair->gamma = p.model.gamma;
    }
  }
  p.validate();
  return p;
}

SpecFile parse_spec(const std::string& text, const std::string& source) {
  Parser ps(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw InputError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw InputError(source + ":1: expected a mapping of sections");
  for (const auto& kv : root) {
    static const std::set<std::string> known{"system", "cost", "sets", "horizon", "terminal",
                                             "options"};
    if (!known.count(kv.first.as<std::string>()))
      ps.fail(kv.first, "unknown section '" + kv.first.as<std::string>() + "'");
  }

  SpecFile s;
  const auto sys = ps.section(root, "system", true);
  ps.only(sys, "system", {"A", "B", "G"});
  s.A = ps.matrix(ps.field(sys, "system", "A"), "A");
  s.B = ps.matrix(ps.field(sys, "system", "B"), "B");
  s.G = ps.matrix(ps.field(sys, "system", "G"), "G");
  const auto n = s.A.rows();
  if (s.A.cols() != n) ps.fail(sys["A"], "A must be square");
  if (s.B.rows() != n) ps.fail(sys["B"], "B must have as many rows as A");
  if (s.G.rows() != n) ps.fail(sys["G"], "G must have as many rows as A");

  const auto cost = ps.section(root, "cost", true);
  ps.only(cost, "cost", {"Q", "R", "gamma"});
  s.Q = ps.matrix(ps.field(cost, "cost", "Q"), "Q");
  s.R = ps.matrix(ps.field(cost, "cost", "R"), "R");
  s.gamma = ps.number(ps.field(cost, "cost", "gamma"), "gamma");
  if (s.Q.rows() != n || s.Q.cols() != n) ps.fail(cost["Q"], "Q must be n x n");
  if (s.R.rows() != s.B.cols() || s.R.cols() != s.B.cols()) ps.fail(cost["R"], "R must be m x m");

  const auto sets = ps.section(root, "sets", true);
  ps.only(sets, "sets", {"X", "U", "W"});
  s.X = ps.rows(ps.field(sets, "sets", "X"), "X", static_cast<int>(n));
  s.U = ps.rows(ps.field(sets, "sets", "U"), "U", static_cast<int>(s.B.cols()));
  s.W = ps.rows(ps.field(sets, "sets", "W"), "W", static_cast<int>(s.G.cols()));

  const auto hor = ps.section(root, "horizon", true);
  ps.only(hor, "horizon", {"N"});
  const auto Nn = ps.field(hor, "horizon", "N");
  const double N = ps.number(Nn, "N");
  if (N < 0 || N != static_cast<int>(N)) ps.fail(Nn, "N must be a nonnegative integer");
  s.N = static_cast<int>(N);

  if (const auto term = ps.section(root, "terminal", false)) {
    ps.only(term, "terminal", {"mode", "Pf", "Xf"});
    if (term["mode"])
      s.terminal = ps.choice<TerminalSource>(
          term["mode"], "terminal mode",
          {{"compute", TerminalSource::Compute}, {"given", TerminalSource::Given}});
    if (s.terminal == TerminalSource::Given) {
      s.Pf = ps.matrix(ps.field(term, "terminal", "Pf"), "Pf");
      if (s.Pf.rows() != n || s.Pf.cols() != n) ps.fail(term["Pf"], "Pf must be n x n");
      s.Xf = ps.rows(ps.field(term, "terminal", "Xf"), "Xf", static_cast<int>(n));
    } else if (term["Pf"] || term["Xf"]) {
      ps.fail(term, "Pf and Xf are only read in 'given' mode");
    }
  }

  if (const auto opt = ps.section(root, "options", false)) {
    ps.only(opt, "options", {"mode", "max_domain", "resolve_overlaps", "seed", "window", "tolerances"});
    if (opt["mode"])
      s.mode = ps.choice<DpMode>(opt["mode"], "mode",
                                 {{"constrained", DpMode::Constrained},
                                  {"control-only", DpMode::ControlOnly},
                                  {"restricted", DpMode::Restricted}});
    if (opt["max_domain"])
      s.max_domain = ps.choice<MaxDomain>(
          opt["max_domain"], "max_domain",
          {{"robust", MaxDomain::Robust}, {"projection", MaxDomain::Projection}});
    if (opt["resolve_overlaps"])
      s.resolve_overlaps = ps.choice<bool>(opt["resolve_overlaps"], "resolve_overlaps",
                                           {{"true", true}, {"false", false}});
    if (opt["seed"]) {
      const auto sn = opt["seed"];
      try {
        s.seed = sn.as<std::uint64_t>();
      } catch (const YAML::Exception&) {
        ps.fail(sn, "seed must be a nonnegative integer");
      }
    }
    if (opt["window"]) s.window = ps.rows(opt["window"], "window", static_cast<int>(n));
    if (const auto t = opt["tolerances"]) {
      if (!t.IsMap()) ps.fail(t, "tolerances must be a mapping");
      for (const auto& kv : t) {
        const auto key = kv.first.as<std::string>();
        const double v = ps.number(kv.second, "tolerance " + key);
        if (!(v > 0.0)) ps.fail(kv.second, "tolerance " + key + " must be positive");
        double* slot = key == "feas"         ? &s.tol.feas
                       : key == "kkt"        ? &s.tol.kkt
                       : key == "act"        ? &s.tol.act
                       : key == "pd"         ? &s.tol.pd
                       : key == "interior"   ? &s.tol.interior
                       : key == "step"       ? &s.tol.step
                       : key == "redundancy" ? &s.tol.redundancy
                       : key == "dedup"      ? &s.tol.dedup
                       : key == "cont"       ? &s.tol.cont
                       : key == "c1"         ? &s.tol.c1
                                             : nullptr;
        if (!slot) ps.fail(kv.first, "unknown tolerance '" + key + "'");
        *slot = v;
      }
    }
  }
  return s;
}

SpecFile load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str(), path);
}

const char* to_string(DpMode m) {
  switch (m) {
    case DpMode::Constrained:
      return "constrained";
    case DpMode::ControlOnly:
      return "control-only";
    case DpMode::Restricted:
      return "restricted";
  }
  return "?";
}

const char* to_string(MaxDomain m) { return m == MaxDomain::Robust ? "robust" : "projection"; }

std::string serialize_spec(const SpecFile& s) {
  std::string out;
  out += "system:\n";
  out += "  A: " + matrix_text(s.A) + "\n";
  out += "  B: " + matrix_text(s.B) + "\n";
  out += "  G: " + matrix_text(s.G) + "\n";
  out += "cost:\n";
  out += "  Q: " + matrix_text(s.Q) + "\n";
  out += "  R: " + matrix_text(s.R) + "\n";
  out += "  gamma: " + format_double(s.gamma) + "\n";
  out += "sets:\n  X:\n" + rows_text(s.X, "    ");
  out += "  U:\n" + rows_text(s.U, "    ");
  out += "  W:\n" + rows_text(s.W, "    ");
  out += "horizon:\n  N: " + std::to_string(s.N) + "\n";
  out += "terminal:\n";
  if (s.terminal == TerminalSource::Given) {
    out += "  mode: given\n";
    out += "  Pf: " + matrix_text(s.Pf) + "\n";
    out += "  Xf:\n" + rows_text(s.Xf, "    ");
  } else {
    out += "  mode: compute\n";
  }
  out += "options:\n";
  out += std::string("  mode: ") + to_string(s.mode) + "\n";
  out += std::string("  max_domain: ") + to_string(s.max_domain) + "\n";
  out += std::string("  resolve_overlaps: ") + (s.resolve_overlaps ? "true" : "false") + "\n";
  out += "  seed: " + std::to_string(s.seed) + "\n";
  if (s.window) out += "  window:\n" + rows_text(*s.window, "    ");
  const auto& t = s.tol;
  out += "  tolerances:\n";
  for (const auto& [name, v] : std::initializer_list<std::pair<const char*, double>>{
           {"feas", t.feas}, {"kkt", t.kkt}, {"act", t.act}, {"pd", t.pd},
           {"interior", t.interior}, {"step", t.step}, {"redundancy", t.redundancy},
           {"dedup", t.dedup}, {"cont", t.cont}, {"c1", t.c1}})
    out += std::string("    ") + name + ": " + format_double(v) + "\n";
  return out;
}

}  // namespace hinfx
