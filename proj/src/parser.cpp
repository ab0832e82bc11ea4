#include "lumpkit/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

namespace lumpkit {

namespace {

enum class Tok { Ident, Number, Integer, Symbol, End };

struct Token {
    Tok kind = Tok::End;
    std::string_view text;
    double number = 0.0;
    std::size_t column = 1;
};

/// Tokenizes and parses one statement line. Columns are 1-based.
class LineParser {
  public:
    LineParser(std::string_view line, std::size_t line_no, const std::map<std::string, std::uint32_t, std::less<>> &vars)
      : line_(line)
      , line_no_(line_no)
      , vars_(vars) {
        advance();
    }

    [[noreturn]] void fail(const std::string &msg) const { throw ParseError(msg, line_no_, tok_.column); }
    [[noreturn]] void fail_at(const std::string &msg, std::size_t column) const { throw ParseError(msg, line_no_, column); }

    const Token &peek() const { return tok_; }
    bool at_end() const { return tok_.kind == Tok::End; }

    bool accept_symbol(char c) {
        if (tok_.kind == Tok::Symbol && tok_.text[0] == c) {
            advance();
            return true;
        }
        return false;
    }

    void expect_symbol(char c) {
        if (!accept_symbol(c))
            fail(std::string("expected '") + c + "'" + describe());
    }

    std::string_view expect_ident(const char *what) {
        if (tok_.kind != Tok::Ident)
            fail(std::string("expected ") + what + describe());
        const std::string_view text = tok_.text;
        advance();
        return text;
    }

    void expect_end() {
        if (!at_end())
            fail("unexpected trailing input" + describe());
    }

    Expression expression() {
        Expression lhs = term();
        for (;;) {
            if (accept_symbol('+'))
                lhs = lhs + term();
            else if (accept_symbol('-'))
                lhs = lhs - term();
            else
                return lhs;
        }
    }

    /// A numeric expression that folds to a finite constant.
    double constant_expression(const char *what) {
        const std::size_t column = tok_.column;
        const Expression e = expression();
        if (!e.is_constant())
            fail_at(std::string(what) + " must be a numeric constant", column);
        return e.root().value;
    }

  private:
    std::string_view line_;
    std::size_t line_no_;
    const std::map<std::string, std::uint32_t, std::less<>> &vars_;
    std::size_t pos_ = 0;
    Token tok_;

    std::string describe() const {
        if (tok_.kind == Tok::End)
            return " but reached end of line";
        return " but found '" + std::string(tok_.text) + "'";
    }

    void advance() {
        while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_])))
            ++pos_;
        tok_ = Token{};
        tok_.column = pos_ + 1;
        if (pos_ >= line_.size())
            return;
        const std::size_t start = pos_;
        const char c = line_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (pos_ < line_.size() && (std::isalnum(static_cast<unsigned char>(line_[pos_])) || line_[pos_] == '_'))
                ++pos_;
            tok_.kind = Tok::Ident;
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            bool integral = true;
            while (pos_ < line_.size() && std::isdigit(static_cast<unsigned char>(line_[pos_])))
                ++pos_;
            if (pos_ < line_.size() && line_[pos_] == '.') {
                integral = false;
                ++pos_;
                while (pos_ < line_.size() && std::isdigit(static_cast<unsigned char>(line_[pos_])))
                    ++pos_;
            }
            if (pos_ < line_.size() && (line_[pos_] == 'e' || line_[pos_] == 'E')) {
                std::size_t look = pos_ + 1;
                if (look < line_.size() && (line_[look] == '+' || line_[look] == '-'))
                    ++look;
                if (look < line_.size() && std::isdigit(static_cast<unsigned char>(line_[look]))) {
                    integral = false;
                    pos_ = look;
                    while (pos_ < line_.size() && std::isdigit(static_cast<unsigned char>(line_[pos_])))
                        ++pos_;
                }
            }
            const std::string_view text = line_.substr(start, pos_ - start);
            double value = 0.0;
            const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
            if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
                throw ParseError("malformed number '" + std::string(text) + "'", line_no_, start + 1);
            tok_.kind = integral ? Tok::Integer : Tok::Number;
            tok_.number = value;
        } else if (std::string_view("+-*/^()=,").find(c) != std::string_view::npos) {
            ++pos_;
            tok_.kind = Tok::Symbol;
        } else {
            throw ParseError(std::string("unexpected character '") + c + "'", line_no_, start + 1);
        }
        tok_.text = line_.substr(start, pos_ - start);
    }

    Expression term() {
        Expression lhs = unary();
        for (;;) {
            if (accept_symbol('*')) {
                lhs = lhs * unary();
            } else if (tok_.kind == Tok::Symbol && tok_.text[0] == '/') {
                const std::size_t column = tok_.column;
                advance();
                Expression rhs = unary();
                if (rhs.is_constant() && rhs.root().value == 0.0)
                    fail_at("division by constant zero", column);
                lhs = lhs / rhs;
            } else {
                return lhs;
            }
        }
    }

    // '^' binds tighter than unary minus: -x^2 == -(x^2).
    Expression unary() {
        if (accept_symbol('-'))
            return -unary();
        if (accept_symbol('+'))
            return unary();
        return power();
    }

    Expression power() {
        Expression base = primary();
        if (tok_.kind == Tok::Symbol && tok_.text[0] == '^') {
            advance();
            if (tok_.kind != Tok::Integer)
                fail("exponent must be a non-negative integer literal" + describe());
            if (tok_.number > static_cast<double>(std::numeric_limits<std::uint32_t>::max()))
                fail("exponent too large");
            const auto exponent = static_cast<std::uint32_t>(tok_.number);
            advance();
            if (tok_.kind == Tok::Symbol && tok_.text[0] == '^')
                fail("chained exponents need parentheses");
            base = pow(base, exponent);
            if (base.is_constant() && !std::isfinite(base.root().value))
                fail("constant overflows");
        }
        return base;
    }

    Expression primary() {
        switch (tok_.kind) {
        case Tok::Number:
        case Tok::Integer: {
            const double v = tok_.number;
            advance();
            return Expression::constant(v);
        }
        case Tok::Ident: {
            const auto it = vars_.find(tok_.text);
            if (it == vars_.end())
                fail("undeclared variable '" + std::string(tok_.text) + "'");
            advance();
            return Expression::variable(it->second);
        }
        case Tok::Symbol:
            if (accept_symbol('(')) {
                Expression e = expression();
                expect_symbol(')');
                return e;
            }
            [[fallthrough]];
        default:
            fail("expected a number, variable or '('" + describe());
        }
    }
};

std::string_view strip_comment(std::string_view line) {
    const auto hash = line.find('#');
    if (hash != std::string_view::npos)
        line = line.substr(0, hash);
    while (!line.empty() && (line.back() == '\r' || std::isspace(static_cast<unsigned char>(line.back()))))
        line.remove_suffix(1);
    return line;
}

} // namespace

OdeSystem parse_model(std::string_view text) {
    std::optional<std::string> name;
    std::vector<std::string> var_names;
    std::map<std::string, std::uint32_t, std::less<>> vars;
    std::vector<std::optional<Expression>> drift;
    std::vector<std::optional<double>> init;
    std::vector<Eigen::VectorXd> obs_rows;
    std::optional<double> horizon;
    std::size_t last_line = 0;

    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        const std::string_view raw = text.substr(start, nl == std::string_view::npos ? text.size() - start : nl - start);
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const std::string_view line = strip_comment(raw);
        LineParser p(line, line_no, vars);
        if (p.at_end())
            continue;
        last_line = line_no;

        const std::size_t kw_column = p.peek().column;
        const std::string keyword(p.expect_ident("a statement keyword"));
        const auto var_index = [&](std::string_view n, std::size_t column) {
            const auto it = vars.find(n);
            if (it == vars.end())
                p.fail_at("undeclared variable '" + std::string(n) + "'", column);
            return it->second;
        };

        if (keyword == "model") {
            if (name)
                p.fail_at("duplicate 'model' statement", kw_column);
            name = std::string(p.expect_ident("model name"));
            p.expect_end();
        } else if (keyword == "var") {
            if (!drift.empty() && std::any_of(drift.begin(), drift.end(), [](const auto &d) { return d.has_value(); }))
                p.fail_at("'var' must precede equations", kw_column);
            do {
                const std::size_t column = p.peek().column;
                const std::string n(p.expect_ident("variable name"));
                if (n == "model" || n == "var" || n == "eq" || n == "init" || n == "obs" || n == "horizon")
                    p.fail_at("reserved word '" + n + "' cannot name a variable", column);
                if (vars.contains(n))
                    p.fail_at("variable '" + n + "' declared twice", column);
                vars.emplace(n, static_cast<std::uint32_t>(var_names.size()));
                var_names.push_back(n);
                drift.emplace_back();
                init.emplace_back();
            } while (p.accept_symbol(','));
            p.expect_end();
        } else if (keyword == "eq") {
            const std::size_t column = p.peek().column;
            const auto idx = var_index(p.expect_ident("variable name"), column);
            p.expect_symbol('=');
            Expression e = p.expression();
            p.expect_end();
            if (drift[idx])
                p.fail_at("second equation for '" + var_names[idx] + "'", kw_column);
            drift[idx] = std::move(e);
        } else if (keyword == "init") {
            const std::size_t column = p.peek().column;
            const auto idx = var_index(p.expect_ident("variable name"), column);
            p.expect_symbol('=');
            const double v = p.constant_expression("initial value");
            p.expect_end();
            if (init[idx])
                p.fail_at("second initial value for '" + var_names[idx] + "'", kw_column);
            init[idx] = v;
        } else if (keyword == "obs") {
            if (var_names.empty())
                p.fail_at("'obs' before any 'var'", kw_column);
            // Accepted forms: `obs <expr>`, `obs = <expr>`, `obs <label> = <expr>`.
            if (!p.accept_symbol('=')) {
                const Token first = p.peek();
                if (first.kind == Tok::Ident && !vars.contains(first.text)) {
                    p.expect_ident("observable label");
                    p.expect_symbol('=');
                }
            }
            const std::size_t column = p.peek().column;
            const Expression e = p.expression();
            p.expect_end();
            const auto form = e.affine_form(var_names.size());
            if (!form)
                p.fail_at("observable must be a linear combination of variables", column);
            if (form->offset != 0.0)
                p.fail_at("observable must not have a constant term", column);
            obs_rows.push_back(form->coefficients);
        } else if (keyword == "horizon") {
            if (horizon)
                p.fail_at("duplicate 'horizon' statement", kw_column);
            const std::size_t column = p.peek().column;
            const double h = p.constant_expression("horizon");
            p.expect_end();
            if (!(h > 0.0))
                p.fail_at("horizon must be positive", column);
            horizon = h;
        } else {
            p.fail_at("unknown statement '" + keyword + "'", kw_column);
        }
    }

    const std::size_t end_line = last_line + 1;
    if (!name)
        throw ParseError("missing 'model' statement", end_line, 1);
    if (var_names.empty())
        throw ParseError("missing 'var' statement", end_line, 1);
    std::vector<Expression> equations;
    Eigen::VectorXd x0(static_cast<Eigen::Index>(var_names.size()));
    for (std::size_t i = 0; i < var_names.size(); ++i) {
        if (!drift[i])
            throw ParseError("missing equation for '" + var_names[i] + "'", end_line, 1);
        if (!init[i])
            throw ParseError("missing initial value for '" + var_names[i] + "'", end_line, 1);
        equations.push_back(*drift[i]);
        x0[static_cast<Eigen::Index>(i)] = *init[i];
    }
    if (!horizon)
        throw ParseError("missing 'horizon' statement", end_line, 1);
    if (obs_rows.empty())
        throw ParseError("missing 'obs' statement", end_line, 1);

    Eigen::MatrixXd m(static_cast<Eigen::Index>(obs_rows.size()), static_cast<Eigen::Index>(var_names.size()));
    for (std::size_t r = 0; r < obs_rows.size(); ++r)
        m.row(static_cast<Eigen::Index>(r)) = obs_rows[r].transpose();

    return OdeSystem(*name, std::move(var_names), std::move(equations), {x0}, *horizon, std::move(m));
}

} // namespace lumpkit
