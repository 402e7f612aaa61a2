#ifndef SGCALC_EXPR_INTERNAL_HPP
#define SGCALC_EXPR_INTERNAL_HPP

#include "sgcalc/expr.hpp"

#include <string>

namespace sgcalc::detail {

// Canonical surface form of a single subtree (used by error messages).
std::string unparse_node(const ExprNode* n);

} // namespace sgcalc::detail

#endif
