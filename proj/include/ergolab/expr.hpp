#pragma once

// Scalar expressions for configuration values, e.g. "sqrt(2)-1", "3/2", "pi".
//
// Grammar: expr := term (('+'|'-') term)*
//          term := unary (('*'|'/') unary)*
//          unary := '-' unary | atom ('^' unary)?
//          atom := number | pi | e | phi | sqrt '(' expr ')' | '(' expr ')'
//
// Decimal literals are read as exact rationals ("1.02" is 51/50), and the
// rational form is kept through + - * / as long as it fits 64 bits.

#include <stdexcept>
#include <string_view>

#include "ergolab/precision.hpp"

namespace ergolab {

struct ParseError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

Coefficient parse_scalar(std::string_view text);
MpReal parse_scalar_mp(std::string_view text, int bits);

}  // namespace ergolab
