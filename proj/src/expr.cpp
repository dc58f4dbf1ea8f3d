#include "ergolab/expr.hpp"

#include <cctype>
#include <limits>
#include <memory>
#include <numeric>
#include <string>

namespace ergolab {

namespace {

struct Node {
    enum class Kind { Number, Pi, E, Golden, Sqrt, Neg, Add, Sub, Mul, Div, Pow } kind;
    std::int64_t num = 0;  // Number: num / den
    std::int64_t den = 1;
    std::unique_ptr<Node> a;
    std::unique_ptr<Node> b;
};
using NodePtr = std::unique_ptr<Node>;

NodePtr make(Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_unique<Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    NodePtr parse() {
        NodePtr n = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("cannot parse scalar '" + std::string(s_) + "': " + what +
                         " at offset " + std::to_string(pos_));
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (eat('+')) lhs = make(Node::Kind::Add, std::move(lhs), term());
            else if (eat('-')) lhs = make(Node::Kind::Sub, std::move(lhs), term());
            else return lhs;
        }
    }
    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (eat('*')) lhs = make(Node::Kind::Mul, std::move(lhs), unary());
            else if (eat('/')) lhs = make(Node::Kind::Div, std::move(lhs), unary());
            else return lhs;
        }
    }
    NodePtr unary() {
        if (eat('-')) return make(Node::Kind::Neg, unary());
        if (eat('+')) return unary();
        NodePtr base = atom();
        if (eat('^')) return make(Node::Kind::Pow, std::move(base), unary());
        return base;
    }
    NodePtr atom() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char ch = s_[pos_];
        if (ch == '(') {
            ++pos_;
            NodePtr n = expr();
            if (!eat(')')) fail("expected ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(ch))) {
            std::string id;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) {
                id += s_[pos_++];
            }
            if (id == "pi") return make(Node::Kind::Pi);
            if (id == "e") return make(Node::Kind::E);
            if (id == "phi" || id == "golden") return make(Node::Kind::Golden);
            if (id == "sqrt") {
                if (!eat('(')) fail("expected '(' after sqrt");
                NodePtr n = expr();
                if (!eat(')')) fail("expected ')'");
                return make(Node::Kind::Sqrt, std::move(n));
            }
            fail("unknown identifier '" + id + "'");
        }
        fail(std::string("unexpected character '") + ch + "'");
    }
    NodePtr number() {
        __int128 num = 0;
        __int128 den = 1;
        bool digits = false;
        bool dot = false;
        while (pos_ < s_.size()) {
            const char ch = s_[pos_];
            if (std::isdigit(static_cast<unsigned char>(ch))) {
                num = num * 10 + (ch - '0');
                if (dot) den *= 10;
                digits = true;
            } else if (ch == '.' && !dot) {
                dot = true;
            } else {
                break;
            }
            if (num > (static_cast<__int128>(1) << 62) || den > (static_cast<__int128>(1) << 62)) {
                fail("literal has too many digits");
            }
            ++pos_;
        }
        if (!digits) fail("malformed number");
        int exponent = 0;
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            ++pos_;
            bool neg = false;
            if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) neg = s_[pos_++] == '-';
            if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                fail("malformed exponent");
            }
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                exponent = exponent * 10 + (s_[pos_++] - '0');
                if (exponent > 18) fail("exponent out of range");
            }
            if (neg) exponent = -exponent;
        }
        for (; exponent > 0; --exponent) num *= 10;
        for (; exponent < 0; ++exponent) den *= 10;
        if (num > (static_cast<__int128>(1) << 62) || den > (static_cast<__int128>(1) << 62)) {
            fail("literal out of range");
        }
        auto n = make(Node::Kind::Number);
        const Rational r(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
        n->num = r.num;
        n->den = r.den;
        return n;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

std::optional<Rational> checked(__int128 num, __int128 den) {
    if (den == 0) return std::nullopt;
    if (den < 0) {
        num = -num;
        den = -den;
    }
    __int128 a = num < 0 ? -num : num;
    __int128 b = den;
    while (b != 0) {
        const __int128 t = a % b;
        a = b;
        b = t;
    }
    if (a > 1) {
        num /= a;
        den /= a;
    }
    constexpr __int128 kLimit = static_cast<__int128>(1) << 62;
    if (num >= kLimit || -num >= kLimit || den >= kLimit) return std::nullopt;
    return Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

Coefficient eval_dd(const Node& n) {
    using K = Node::Kind;
    switch (n.kind) {
        case K::Number: return Coefficient(Rational(n.num, n.den));
        case K::Pi: return Coefficient(constants::pi());
        case K::E: return Coefficient(constants::e());
        case K::Golden: return Coefficient(constants::golden());
        case K::Sqrt: {
            const Coefficient x = eval_dd(*n.a);
            return Coefficient(sqrt(x.value));
        }
        case K::Neg: {
            Coefficient x = eval_dd(*n.a);
            if (x.exact) return Coefficient(Rational(-x.exact->num, x.exact->den));
            return Coefficient(-x.value);
        }
        case K::Pow: {
            const Coefficient x = eval_dd(*n.a);
            const Coefficient y = eval_dd(*n.b);
            if (x.exact && y.exact && y.exact->den == 1 && y.exact->num >= -64 && y.exact->num <= 64 &&
                x.exact->num != 0) {
                const std::int64_t e = y.exact->num < 0 ? -y.exact->num : y.exact->num;
                __int128 pn = 1, pd = 1;
                bool fits = true;
                constexpr __int128 kLimit = std::numeric_limits<std::int64_t>::max();
                for (std::int64_t i = 0; i < e && fits; ++i) {
                    pn *= x.exact->num;
                    pd *= x.exact->den;
                    fits = (pn < 0 ? -pn : pn) <= kLimit && pd <= kLimit;
                }
                if (fits) {
                    if (y.exact->num < 0) std::swap(pn, pd);
                    if (auto r = checked(pn, pd)) return Coefficient(*r);
                }
            }
            return Coefficient(pow(x.value, y.value));
        }
        default: break;
    }
    const Coefficient x = eval_dd(*n.a);
    const Coefficient y = eval_dd(*n.b);
    std::optional<Rational> r;
    HighReal v;
    if (x.exact && y.exact) {
        const __int128 an = x.exact->num, ad = x.exact->den;
        const __int128 bn = y.exact->num, bd = y.exact->den;
        switch (n.kind) {
            case K::Add: r = checked(an * bd + bn * ad, ad * bd); break;
            case K::Sub: r = checked(an * bd - bn * ad, ad * bd); break;
            case K::Mul: r = checked(an * bn, ad * bd); break;
            case K::Div:
                if (bn == 0) throw ParseError("division by zero in scalar expression");
                r = checked(an * bd, ad * bn);
                break;
            default: break;
        }
    }
    if (r) return Coefficient(*r);
    switch (n.kind) {
        case K::Add: v = x.value + y.value; break;
        case K::Sub: v = x.value - y.value; break;
        case K::Mul: v = x.value * y.value; break;
        case K::Div:
            if (y.value.hi() == 0.0) throw ParseError("division by zero in scalar expression");
            v = x.value / y.value;
            break;
        default: break;
    }
    return Coefficient(v);
}

MpReal eval_mp(const Node& n, int bits) {
    using K = Node::Kind;
    MpReal out(bits);
    mpfr_ptr o = out.get();
    switch (n.kind) {
        case K::Number:
            mpfr_set_si(o, static_cast<long>(n.num), MPFR_RNDN);
            mpfr_div_si(o, o, static_cast<long>(n.den), MPFR_RNDN);
            break;
        case K::Pi: mpfr_const_pi(o, MPFR_RNDN); break;
        case K::E:
            mpfr_set_ui(o, 1, MPFR_RNDN);
            mpfr_exp(o, o, MPFR_RNDN);
            break;
        case K::Golden:
            mpfr_set_ui(o, 5, MPFR_RNDN);
            mpfr_sqrt(o, o, MPFR_RNDN);
            mpfr_add_ui(o, o, 1, MPFR_RNDN);
            mpfr_div_ui(o, o, 2, MPFR_RNDN);
            break;
        case K::Sqrt: mpfr_sqrt(o, eval_mp(*n.a, bits).get(), MPFR_RNDN); break;
        case K::Neg: mpfr_neg(o, eval_mp(*n.a, bits).get(), MPFR_RNDN); break;
        case K::Add: mpfr_add(o, eval_mp(*n.a, bits).get(), eval_mp(*n.b, bits).get(), MPFR_RNDN); break;
        case K::Sub: mpfr_sub(o, eval_mp(*n.a, bits).get(), eval_mp(*n.b, bits).get(), MPFR_RNDN); break;
        case K::Mul: mpfr_mul(o, eval_mp(*n.a, bits).get(), eval_mp(*n.b, bits).get(), MPFR_RNDN); break;
        case K::Div: mpfr_div(o, eval_mp(*n.a, bits).get(), eval_mp(*n.b, bits).get(), MPFR_RNDN); break;
        case K::Pow: mpfr_pow(o, eval_mp(*n.a, bits).get(), eval_mp(*n.b, bits).get(), MPFR_RNDN); break;
    }
    return out;
}

}  // namespace

Coefficient parse_scalar(std::string_view text) { return eval_dd(*Parser(text).parse()); }

MpReal parse_scalar_mp(std::string_view text, int bits) {
    return eval_mp(*Parser(text).parse(), bits);
}

}  // namespace ergolab
