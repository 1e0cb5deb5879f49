#include "hinfx/serialize.hpp"

#include <spdlog/fmt/fmt.h>

#include <sstream>

#include "hinfx/errors.hpp"

namespace hinfx {

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

namespace {

void write_row(std::ostream& os, const char* tag, const VectorXd& v) {
  os << tag;
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << format_double(v(i));
  os << '\n';
}

}  // namespace

void write_polytope(std::ostream& os, const Polytope& p) {
  os << "polytope " << p.dim() << ' ' << p.rows() << '\n';
  for (int r = 0; r < p.rows(); ++r) {
    for (int c = 0; c < p.dim(); ++c) os << (c ? " " : "") << format_double(p.H()(r, c));
    os << " | " << format_double(p.h()(r)) << '\n';
  }
}

void write_quadratic(std::ostream& os, const QuadraticForm& f) {
  os << "quadratic " << f.dim() << '\n';
  for (int r = 0; r < f.dim(); ++r) write_row(os, "Q", f.Q.row(r).transpose());
  write_row(os, "q", f.q);
  os << "s " << format_double(f.s) << '\n';
}

void write_affine(std::ostream& os, const AffineLaw& f) {
  os << "affine " << f.in_dim() << ' ' << f.out_dim() << '\n';
  for (int r = 0; r < f.out_dim(); ++r) write_row(os, "K", f.K.row(r).transpose());
  write_row(os, "k", f.k);
}

void write_pwq(std::ostream& os, const PwqFunction& f) {
  os << "pwq " << f.dim() << ' ' << f.size() << "\ndomain\n";
  write_polytope(os, f.domain);
  for (int i = 0; i < f.size(); ++i) {
    os << "cell " << i << '\n';
    write_polytope(os, f.cells[i]);
    write_quadratic(os, f.pieces[i]);
  }
}

void write_law(std::ostream& os, const PiecewiseAffineLaw& f) {
  const int out = f.size() ? f.pieces.front().out_dim() : 0;
  os << "law " << f.dim() << ' ' << out << ' ' << f.size() << "\ndomain\n";
  write_polytope(os, f.domain);
  for (int i = 0; i < f.size(); ++i) {
    os << "cell " << i << '\n';
    write_polytope(os, f.cells[i]);
    write_affine(os, f.pieces[i]);
  }
}

void write_matrix(std::ostream& os, const std::string& name, const MatrixXd& M) {
  os << "matrix " << name << ' ' << M.rows() << ' ' << M.cols() << '\n';
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) os << (c ? " " : "") << format_double(M(r, c));
    os << '\n';
  }
}

RecordReader::RecordReader(std::istream& is, std::string source)
    : is_(is), source_(std::move(source)) {}

void RecordReader::fail(const std::string& what) const {
  throw InputError(source_ + ":" + std::to_string(line_) + ": " + what);
}

bool RecordReader::at_end() {
  if (peeked_) return false;
  std::string line;
  while (std::getline(is_, line)) {
    ++line_;
    std::istringstream ss(line);
    std::vector<std::string> words;
    for (std::string w; ss >> w;) words.push_back(w);
    if (words.empty() || words.front().starts_with('#')) continue;
    peek_ = std::move(words);
    peeked_ = true;
    return false;
  }
  return true;
}

std::vector<std::string> RecordReader::next(const std::string& expecting) {
  if (at_end()) fail("unexpected end of input, expected " + expecting);
  peeked_ = false;
  return std::move(peek_);
}

double RecordReader::number(const std::string& word) const {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(word, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != word.size()) fail("not a number: '" + word + "'");
  return v;
}

namespace {

int as_int(const RecordReader& in, const std::string& w) {
  const double v = in.number(w);
  if (v != static_cast<int>(v) || v < 0) in.fail("not a count: '" + w + "'");
  return static_cast<int>(v);
}

void expect(const RecordReader& in, const std::vector<std::string>& words, const std::string& tag,
            std::size_t count) {
  if (words.empty() || words.front() != tag) in.fail("expected '" + tag + "'");
  if (words.size() != count)
    in.fail("'" + tag + "' line needs " + std::to_string(count - 1) + " entries, got " +
            std::to_string(words.size() - 1));
}

VectorXd numbers(const RecordReader& in, const std::vector<std::string>& words, std::size_t from) {
  VectorXd v(static_cast<Eigen::Index>(words.size() - from));
  for (std::size_t i = from; i < words.size(); ++i) v(static_cast<Eigen::Index>(i - from)) = in.number(words[i]);
  return v;
}

}  // namespace

Polytope RecordReader::polytope(const Tolerances& tol) {
  auto head = next("polytope");
  expect(*this, head, "polytope", 3);
  const int d = as_int(*this, head[1]), rows = as_int(*this, head[2]);
  MatrixXd H(rows, d);
  VectorXd h(rows);
  for (int r = 0; r < rows; ++r) {
    auto w = next("polytope row");
    if (static_cast<int>(w.size()) != d + 2 || w[d] != "|") fail("expected 'a_1 ... a_d | b'");
    for (int c = 0; c < d; ++c) H(r, c) = number(w[c]);
    h(r) = number(w[d + 1]);
  }
  if (rows == 0) return Polytope::universe(d);
  return Polytope(H, h, tol);
}

QuadraticForm RecordReader::quadratic() {
  auto head = next("quadratic");
  expect(*this, head, "quadratic", 2);
  const int d = as_int(*this, head[1]);
  QuadraticForm f = QuadraticForm::zero(d);
  for (int r = 0; r < d; ++r) {
    auto w = next("Q row");
    expect(*this, w, "Q", d + 1);
    f.Q.row(r) = numbers(*this, w, 1).transpose();
  }
  auto q = next("q");
  expect(*this, q, "q", d + 1);
  f.q = numbers(*this, q, 1);
  auto s = next("s");
  expect(*this, s, "s", 2);
  f.s = number(s[1]);
  return f;
}

AffineLaw RecordReader::affine() {
  auto head = next("affine");
  expect(*this, head, "affine", 3);
  const int in = as_int(*this, head[1]), out = as_int(*this, head[2]);
  AffineLaw f{MatrixXd(out, in), VectorXd(out)};
  for (int r = 0; r < out; ++r) {
    auto w = next("K row");
    expect(*this, w, "K", in + 1);
    f.K.row(r) = numbers(*this, w, 1).transpose();
  }
  auto k = next("k");
  expect(*this, k, "k", out + 1);
  f.k = numbers(*this, k, 1);
  return f;
}

namespace {

template <class Piece, class ReadPiece>
Piecewise<Piece> read_piecewise(RecordReader& in, int cells, ReadPiece&& read_piece,
                                const Tolerances& tol) {
  Piecewise<Piece> f;
  auto d = in.next("domain");
  expect(in, d, "domain", 1);
  f.domain = in.polytope(tol);
  for (int i = 0; i < cells; ++i) {
    auto c = in.next("cell");
    expect(in, c, "cell", 2);
    f.cells.push_back(in.polytope(tol));
    f.pieces.push_back(read_piece());
  }
  return f;
}

}  // namespace

PwqFunction RecordReader::pwq(const Tolerances& tol) {
  auto head = next("pwq");
  expect(*this, head, "pwq", 3);
  return read_piecewise<QuadraticForm>(*this, as_int(*this, head[2]), [&] { return quadratic(); },
                                       tol);
}

PiecewiseAffineLaw RecordReader::law(const Tolerances& tol) {
  auto head = next("law");
  expect(*this, head, "law", 4);
  return read_piecewise<AffineLaw>(*this, as_int(*this, head[3]), [&] { return affine(); }, tol);
}

MatrixXd RecordReader::matrix(const std::string& name) {
  auto head = next("matrix " + name);
  expect(*this, head, "matrix", 4);
  if (head[1] != name) fail("expected matrix '" + name + "', got '" + head[1] + "'");
  const int r = as_int(*this, head[2]), c = as_int(*this, head[3]);
  MatrixXd M(r, c);
  for (int i = 0; i < r; ++i) {
    auto w = next("matrix row");
    if (static_cast<int>(w.size()) != c) fail("matrix row needs " + std::to_string(c) + " entries");
    for (int j = 0; j < c; ++j) M(i, j) = number(w[j]);
  }
  return M;
}

void write_stage(std::ostream& os, const StageResult& s) {
  os << "stage " << s.j << '\n';
  os << "counts " << s.x_regions << ' ' << s.x_merged << ' ' << s.x_explored << ' ' << s.z_regions
     << ' ' << s.z_merged << ' ' << s.z_explored << '\n';
  os << "X\n";
  write_polytope(os, s.Xj);
  os << "V\n";
  write_pwq(os, s.V);
  os << "kappa\n";
  write_law(os, s.kappa);
  if (s.j > 0) {
    os << "Z\n";
    write_polytope(os, s.Zj);
    os << "J\n";
    write_pwq(os, s.J);
    os << "nu\n";
    write_law(os, s.nu);
  }
  os << "xstar " << s.XjStar.size() << '\n';
  for (const auto& p : s.XjStar) write_polytope(os, p);
  os << "end\n";
}

StageResult read_stage(RecordReader& in, const Tolerances& tol) {
  StageResult s;
  auto tag = [&](const std::string& t, std::size_t n) {
    auto w = in.next(t);
    expect(in, w, t, n);
    return w;
  };
  s.j = static_cast<int>(in.number(tag("stage", 2)[1]));
  auto c = tag("counts", 7);
  s.x_regions = static_cast<int>(in.number(c[1]));
  s.x_merged = static_cast<int>(in.number(c[2]));
  s.x_explored = static_cast<int>(in.number(c[3]));
  s.z_regions = static_cast<int>(in.number(c[4]));
  s.z_merged = static_cast<int>(in.number(c[5]));
  s.z_explored = static_cast<int>(in.number(c[6]));
  tag("X", 1);
  s.Xj = in.polytope(tol);
  tag("V", 1);
  s.V = in.pwq(tol);
  tag("kappa", 1);
  s.kappa = in.law(tol);
  if (s.j > 0) {
    tag("Z", 1);
    s.Zj = in.polytope(tol);
    tag("J", 1);
    s.J = in.pwq(tol);
    tag("nu", 1);
    s.nu = in.law(tol);
  }
  const int k = static_cast<int>(in.number(tag("xstar", 2)[1]));
  for (int i = 0; i < k; ++i) s.XjStar.push_back(in.polytope(tol));
  tag("end", 1);
  return s;
}

void write_terminal(std::ostream& os, const TerminalPair& t) {
  os << "terminal\n";
  os << "gamma " << format_double(t.gamma) << '\n';
  write_matrix(os, "P", t.P);
  write_matrix(os, "Ku", t.Ku);
  write_matrix(os, "Kw", t.Kw);
  write_matrix(os, "Af", t.Af);
  write_matrix(os, "Ac", t.Ac);
  write_polytope(os, t.Xf);
}

TerminalPair read_terminal(RecordReader& in, const Tolerances& tol) {
  TerminalPair t;
  auto head = in.next("terminal");
  expect(in, head, "terminal", 1);
  auto g = in.next("gamma");
  expect(in, g, "gamma", 2);
  t.gamma = in.number(g[1]);
  t.P = in.matrix("P");
  t.Ku = in.matrix("Ku");
  t.Kw = in.matrix("Kw");
  t.Af = in.matrix("Af");
  t.Ac = in.matrix("Ac");
  t.Xf = in.polytope(tol);
  return t;
}

void write_plot_loops(std::ostream& os, const std::vector<Polytope>& cells, const Tolerances& tol) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].dim() != 2) throw UnsupportedError("plot loops need 2-D cells");
    const auto loop = vertex_loop_2d(cells[i], tol);
    os << "cell " << i << '\n';
    for (const auto& v : loop) os << format_double(v(0)) << ' ' << format_double(v(1)) << '\n';
    if (!loop.empty()) os << format_double(loop[0](0)) << ' ' << format_double(loop[0](1)) << '\n';
  }
}

}  // namespace hinfx
