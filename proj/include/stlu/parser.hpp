#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "stlu/errors.hpp"
#include "stlu/formula.hpp"

namespace stlu {

struct ParseOptions {
  // Interval bounds in the formula text are multiplied by this factor and
  // rounded to whole steps. 1.0 means bounds are already step counts (and
  // must be integral).
  double steps_per_unit = 1.0;
};

namespace detail {

enum class Tok {
  ident, number, lparen, rparen, lbracket, rbracket, lbrace, rbrace,
  bang, amp, pipe, star, less, greater, comma, end
};

struct Token {
  Tok kind;
  std::string text;
  double num = 0.0;
  std::size_t pos = 0;
};

inline std::vector<Token> lex_formula(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  const auto starts_number = [&](std::size_t k) {
    if (k >= s.size()) return false;
    if (std::isdigit(static_cast<unsigned char>(s[k]))) return true;
    if ((s[k] == '-' || s[k] == '.') && k + 1 < s.size()) {
      const char n = s[k + 1];
      return std::isdigit(static_cast<unsigned char>(n)) || (s[k] == '-' && n == '.');
    }
    return false;
  };
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (starts_number(i)) {
      double v = 0.0;
      const auto res = std::from_chars(s.data() + i, s.data() + s.size(), v);
      if (res.ec != std::errc{} || !std::isfinite(v))
        throw parse_error("malformed number", i);
      out.push_back({Tok::number, s.substr(i, res.ptr - (s.data() + i)), v, i});
      i = static_cast<std::size_t>(res.ptr - s.data());
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i + 1;
      while (j < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_'))
        ++j;
      out.push_back({Tok::ident, s.substr(i, j - i), 0.0, i});
      i = j;
      continue;
    }
    Tok k;
    switch (c) {
      case '(': k = Tok::lparen; break;
      case ')': k = Tok::rparen; break;
      case '[': k = Tok::lbracket; break;
      case ']': k = Tok::rbracket; break;
      case '{': k = Tok::lbrace; break;
      case '}': k = Tok::rbrace; break;
      case '!': k = Tok::bang; break;
      case '&': k = Tok::amp; break;
      case '|': k = Tok::pipe; break;
      case '*': k = Tok::star; break;
      case '<': k = Tok::less; break;
      case '>': k = Tok::greater; break;
      case ',': k = Tok::comma; break;
      default:
        throw parse_error(std::string("unexpected character '") + c + "'", i);
    }
    out.push_back({k, std::string(1, c), 0.0, i});
    ++i;
  }
  out.push_back({Tok::end, "", 0.0, s.size()});
  return out;
}

class FormulaParser {
 public:
  FormulaParser(std::vector<Token> toks, ParseOptions opts)
      : toks_(std::move(toks)), opts_(opts) {}

  FormulaPtr run() {
    FormulaPtr f = parse_formula();
    if (peek().kind != Tok::end)
      throw parse_error("unexpected trailing input '" + peek().text + "'", peek().pos);
    return f;
  }

 private:
  std::vector<Token> toks_;
  ParseOptions opts_;
  std::size_t at_ = 0;

  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t k = std::min(at_ + ahead, toks_.size() - 1);
    return toks_[k];
  }
  const Token& take() { return toks_[std::min(at_++, toks_.size() - 1)]; }
  const Token& expect(Tok kind, const char* what) {
    if (peek().kind != kind)
      throw parse_error(std::string("expected ") + what, peek().pos);
    return take();
  }

  bool at_temporal(const char* name) const {
    return peek().kind == Tok::ident && peek().text == name &&
           peek(1).kind == Tok::lbracket;
  }

  // Until binds loosest and associates to the right.
  FormulaPtr parse_formula() {
    FormulaPtr lhs = parse_or();
    if (at_temporal("U")) {
      take();
      const StepInterval w = parse_window();
      return until(w, std::move(lhs), parse_formula());
    }
    return lhs;
  }

  FormulaPtr parse_or() {
    FormulaPtr f = parse_and();
    while (peek().kind == Tok::pipe) {
      take();
      f = disjunction(std::move(f), parse_and());
    }
    return f;
  }

  FormulaPtr parse_and() {
    FormulaPtr f = parse_unary();
    while (peek().kind == Tok::amp) {
      take();
      f = conjunction(std::move(f), parse_unary());
    }
    return f;
  }

  FormulaPtr parse_unary() {
    if (peek().kind == Tok::bang) {
      take();
      return negation(parse_unary());
    }
    if (at_temporal("G")) {
      take();
      const StepInterval w = parse_window();
      return always(w, parse_unary());
    }
    if (at_temporal("F")) {
      take();
      const StepInterval w = parse_window();
      return eventually(w, parse_unary());
    }
    if (peek().kind == Tok::lparen) {
      take();
      FormulaPtr f = parse_formula();
      expect(Tok::rparen, "')'");
      return f;
    }
    return parse_predicate();
  }

  // predicate := number '<' term '<' number
  //            | term '>' number
  //            | term '<' number
  // term      := [number '*'] ident '{' number '}'
  FormulaPtr parse_predicate() {
    if (peek().kind == Tok::number && peek(1).kind == Tok::less) {
      const double lo_bound = take().num;
      take();  // '<'
      auto [channel, scale, epsilon] = parse_term();
      expect(Tok::less, "'<'");
      const Token& hi_tok = expect(Tok::number, "a number");
      return conjunction(make_atom(channel, scale, -lo_bound, epsilon),
                         make_atom(channel, -scale, hi_tok.num, epsilon));
    }
    auto [channel, scale, epsilon] = parse_term();
    if (peek().kind == Tok::greater) {
      take();
      const Token& c = expect(Tok::number, "a number");
      return make_atom(channel, scale, -c.num, epsilon);
    }
    if (peek().kind == Tok::less) {
      take();
      const Token& c = expect(Tok::number, "a number");
      return make_atom(channel, -scale, c.num, epsilon);
    }
    throw parse_error("expected '>' or '<' after signal reference", peek().pos);
  }

  struct Term {
    std::string channel;
    double scale;
    double epsilon;
  };

  Term parse_term() {
    double scale = 1.0;
    if (peek().kind == Tok::number && peek(1).kind == Tok::star) {
      const Token& coef = take();
      if (coef.num == 0.0)
        throw parse_error("signal coefficient must be nonzero", coef.pos);
      scale = coef.num;
      take();  // '*'
    }
    const Token& name = expect(Tok::ident, "a signal name");
    expect(Tok::lbrace, "'{'");
    const Token& eps = expect(Tok::number, "a confidence level");
    if (!(eps.num > 0.0 && eps.num < 1.0))
      throw parse_error("confidence level must lie strictly in (0,1)", eps.pos);
    expect(Tok::rbrace, "'}'");
    return {name.text, scale, eps.num};
  }

  FormulaPtr make_atom(const std::string& channel, double scale, double offset,
                       double epsilon) {
    return atom(channel, scale, offset, epsilon);
  }

  StepInterval parse_window() {
    expect(Tok::lbracket, "'['");
    const Token& lo_tok = expect(Tok::number, "an interval bound");
    const std::int64_t lo = to_steps(lo_tok);
    expect(Tok::comma, "','");
    std::int64_t hi;
    if (peek().kind == Tok::ident && peek().text == "inf") {
      take();
      hi = unbounded_step;
    } else {
      const Token& hi_tok = expect(Tok::number, "an interval bound or 'inf'");
      hi = to_steps(hi_tok);
    }
    expect(Tok::rbracket, "']'");
    if (lo > hi) throw parse_error("interval with lo > hi", lo_tok.pos);
    return {lo, hi};
  }

  std::int64_t to_steps(const Token& tok) const {
    const double scaled = tok.num * opts_.steps_per_unit;
    const double rounded = std::nearbyint(scaled);
    if (opts_.steps_per_unit == 1.0 && std::abs(scaled - rounded) > 1e-9)
      throw parse_error("interval bounds must be whole steps", tok.pos);
    if (rounded < 0.0) throw parse_error("interval bound must be >= 0", tok.pos);
    if (rounded >= 9.2e18) throw parse_error("interval bound out of range", tok.pos);
    return static_cast<std::int64_t>(rounded);
  }
};

}  // namespace detail

inline FormulaPtr parse(const std::string& text, const ParseOptions& opts = {}) {
  return detail::FormulaParser(detail::lex_formula(text), opts).run();
}

}  // namespace stlu
