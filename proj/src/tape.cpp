#include "tape.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <tuple>
#include <unordered_map>

namespace nullcollapse {

namespace {

constexpr double kPiValue = 3.14159265358979323846;

}  // namespace

Tape::Tape(std::span<const Expr> outputs,
           std::span<const std::string> variables) {
  nvars_ = variables.size();
  nslots_ = nvars_;

  std::unordered_map<std::string, std::uint32_t> var_slot;
  for (std::size_t i = 0; i < variables.size(); ++i) {
    var_slot.emplace(variables[i], static_cast<std::uint32_t>(i));
  }

  // Structural consing: identical (op, child-slot, child-slot, payload)
  // combinations map to one slot.
  std::map<std::tuple<int, std::uint32_t, std::uint32_t, std::uint64_t>,
           std::uint32_t>
      cse;
  std::unordered_map<const ExprNode*, std::uint32_t> node_slot;

  auto intern = [&](int op, std::uint32_t a, std::uint32_t b,
                    std::uint64_t payload, double value) -> std::uint32_t {
    auto key = std::make_tuple(op, a, b, payload);
    auto it = cse.find(key);
    if (it != cse.end()) return it->second;
    std::uint32_t dst = static_cast<std::uint32_t>(nslots_++);
    code_.push_back(Instr{static_cast<ExprOp>(op), a, b, dst, value});
    cse.emplace(key, dst);
    return dst;
  };

  // Iterative postorder to keep deep derivative trees off the call stack.
  struct Item {
    const ExprNode* node;
    bool expanded;
  };
  std::vector<Item> stack;

  auto compile = [&](const ExprNode* root) -> std::uint32_t {
    stack.push_back({root, false});
    while (!stack.empty()) {
      auto [node, expanded] = stack.back();
      if (node_slot.count(node)) {
        stack.pop_back();
        continue;
      }
      if (!expanded) {
        stack.back().expanded = true;
        if (node->rhs) stack.push_back({node->rhs.get(), false});
        if (node->lhs) stack.push_back({node->lhs.get(), false});
        continue;
      }
      stack.pop_back();
      std::uint32_t slot;
      switch (node->op) {
        case ExprOp::kConstant:
          slot = intern(static_cast<int>(ExprOp::kConstant), 0, 0,
                        std::bit_cast<std::uint64_t>(node->value), node->value);
          break;
        case ExprOp::kPi:
          slot = intern(static_cast<int>(ExprOp::kConstant), 0, 0,
                        std::bit_cast<std::uint64_t>(kPiValue), kPiValue);
          break;
        case ExprOp::kVariable: {
          auto it = var_slot.find(node->name);
          if (it == var_slot.end()) {
            throw EvalError("unbound variable '" + node->name + "'");
          }
          slot = it->second;
          break;
        }
        default: {
          std::uint32_t a = node_slot.at(node->lhs.get());
          std::uint32_t b = node->rhs ? node_slot.at(node->rhs.get()) : 0;
          slot = intern(static_cast<int>(node->op), a, b, 0, 0.0);
          break;
        }
      }
      node_slot.emplace(node, slot);
    }
    return node_slot.at(root);
  };

  outs_.reserve(outputs.size());
  for (const Expr& e : outputs) {
    outs_.push_back(compile(e.raw()));
  }
}

void Tape::eval(std::span<const double> vars, std::span<double> slots,
                std::span<double> out) const {
  for (std::size_t i = 0; i < nvars_; ++i) slots[i] = vars[i];
  for (const Instr& in : code_) {
    double r;
    switch (in.op) {
      case ExprOp::kConstant:
        r = in.value;
        break;
      case ExprOp::kNeg:
        r = -slots[in.a];
        break;
      case ExprOp::kAdd:
        r = slots[in.a] + slots[in.b];
        break;
      case ExprOp::kSub:
        r = slots[in.a] - slots[in.b];
        break;
      case ExprOp::kMul:
        r = slots[in.a] * slots[in.b];
        break;
      case ExprOp::kDiv:
        if (slots[in.b] == 0.0) throw EvalError("division by zero");
        r = slots[in.a] / slots[in.b];
        break;
      case ExprOp::kPow: {
        double base = slots[in.a], e = slots[in.b];
        if (base == 0.0 && e < 0.0) {
          throw EvalError("zero raised to negative power");
        }
        if (base < 0.0 && e != std::floor(e)) {
          throw EvalError("negative base with non-integer exponent");
        }
        r = std::pow(base, e);
        break;
      }
      case ExprOp::kSin:
        r = std::sin(slots[in.a]);
        break;
      case ExprOp::kCos:
        r = std::cos(slots[in.a]);
        break;
      case ExprOp::kTan:
        r = std::tan(slots[in.a]);
        break;
      case ExprOp::kSinh:
        r = std::sinh(slots[in.a]);
        break;
      case ExprOp::kCosh:
        r = std::cosh(slots[in.a]);
        break;
      case ExprOp::kExp:
        r = std::exp(slots[in.a]);
        break;
      case ExprOp::kLog:
        if (slots[in.a] <= 0.0) throw EvalError("log of non-positive value");
        r = std::log(slots[in.a]);
        break;
      case ExprOp::kSqrt:
        if (slots[in.a] < 0.0) throw EvalError("sqrt of negative value");
        r = std::sqrt(slots[in.a]);
        break;
      default:
        throw EvalError("bad instruction");
    }
    slots[in.dst] = r;
  }
  for (std::size_t i = 0; i < outs_.size(); ++i) out[i] = slots[outs_[i]];
}

}  // namespace nullcollapse
