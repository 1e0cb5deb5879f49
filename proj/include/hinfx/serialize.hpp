#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "hinfx/dp.hpp"
#include "hinfx/terminal.hpp"

namespace hinfx {

// Text records with 17 significant digits, so doubles round-trip exactly.
//
//   polytope <dim> <rows>        quadratic <dim>        affine <in> <out>
//   a_1 ... a_d | b              Q <row>   (dim lines)  K <row> (out lines)
//                                q <entries>            k <entries>
//                                s <value>
//
//   pwq <dim> <cells> / law <in> <out> <cells>: "domain", a polytope, then
//   per cell a polytope followed by its quadratic or affine record.

std::string format_double(double v);

void write_polytope(std::ostream& os, const Polytope& p);
void write_quadratic(std::ostream& os, const QuadraticForm& f);
void write_affine(std::ostream& os, const AffineLaw& f);
void write_pwq(std::ostream& os, const PwqFunction& f);
void write_law(std::ostream& os, const PiecewiseAffineLaw& f);
void write_matrix(std::ostream& os, const std::string& name, const MatrixXd& M);

/// Line-oriented reader; errors name the source and the line.
class RecordReader {
 public:
  RecordReader(std::istream& is, std::string source);
  /// Next nonblank line, split into words. Throws InputError at end of input.
  std::vector<std::string> next(const std::string& expecting);
  bool at_end();
  [[noreturn]] void fail(const std::string& what) const;
  double number(const std::string& word) const;

  Polytope polytope(const Tolerances& tol = {});
  QuadraticForm quadratic();
  AffineLaw affine();
  PwqFunction pwq(const Tolerances& tol = {});
  PiecewiseAffineLaw law(const Tolerances& tol = {});
  MatrixXd matrix(const std::string& name);

 private:
  std::istream& is_;
  std::string source_;
  int line_ = 0;
  bool peeked_ = false;
  std::vector<std::string> peek_;
};

/// Stage dump: j, X_j, Z_j, V_j, kappa_j, J, nu, X*_j pieces and counts.
void write_stage(std::ostream& os, const StageResult& s);
StageResult read_stage(RecordReader& in, const Tolerances& tol = {});

void write_terminal(std::ostream& os, const TerminalPair& t);
TerminalPair read_terminal(RecordReader& in, const Tolerances& tol = {});

/// "cell <i>" followed by "x y" vertex lines, the loop closed by repeating
/// the first vertex. Only for 2-D cells.
void write_plot_loops(std::ostream& os, const std::vector<Polytope>& cells,
                      const Tolerances& tol = {});

}  // namespace hinfx
