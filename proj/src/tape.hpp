// Flattened expression programs. A Tape compiles a batch of expressions over
// a fixed variable ordering into one linear instruction list with common
// subexpressions shared, so repeated evaluation over grids avoids tree
// walking entirely. Tapes are immutable after construction.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "expr.hpp"

namespace nullcollapse {

class Tape {
 public:
  Tape() = default;
  Tape(std::span<const Expr> outputs, std::span<const std::string> variables);

  std::size_t variable_count() const { return nvars_; }
  std::size_t output_count() const { return outs_.size(); }
  std::size_t slot_count() const { return nslots_; }

  // slots must have slot_count() entries, out output_count() entries.
  void eval(std::span<const double> vars, std::span<double> slots,
            std::span<double> out) const;

 private:
  struct Instr {
    ExprOp op;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    std::uint32_t dst = 0;
    double value = 0.0;
  };

  std::vector<Instr> code_;
  std::vector<std::uint32_t> outs_;
  std::size_t nslots_ = 0;
  std::size_t nvars_ = 0;
};

}  // namespace nullcollapse
