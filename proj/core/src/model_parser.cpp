#include "p2s/model.hpp"

#include <cctype>
#include <charconv>
#include <set>

namespace p2s {

namespace {

    bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
    bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
    bool is_id_char(char c) { return is_name_char(c) || c == '.' || c == '-'; }

    /// Character cursor over one line of model text.
    class Cursor {
    public:
        Cursor(std::string_view text, std::size_t line) : text_(text), line_(line) {}

        [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, line_, pos_ + 1); }

        void skip_space()
        {
            while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
        }

        bool at_end()
        {
            skip_space();
            return pos_ >= text_.size();
        }

        char peek()
        {
            skip_space();
            return pos_ < text_.size() ? text_[pos_] : '\0';
        }

        bool accept(std::string_view token)
        {
            skip_space();
            if (text_.substr(pos_, token.size()) == token) {
                pos_ += token.size();
                return true;
            }
            return false;
        }

        void expect(std::string_view token)
        {
            if (!accept(token))
                fail("expected '" + std::string(token) + "'");
        }

        /// Keyword followed by a non-identifier character.
        bool accept_keyword(std::string_view word)
        {
            skip_space();
            if (text_.substr(pos_, word.size()) != word)
                return false;
            std::size_t end = pos_ + word.size();
            if (end < text_.size() && is_name_char(text_[end]))
                return false;
            pos_ = end;
            return true;
        }

        std::string name()
        {
            skip_space();
            std::size_t start = pos_;
            if (pos_ >= text_.size() || !is_name_start(text_[pos_]))
                fail("expected a variable name");
            while (pos_ < text_.size() && is_name_char(text_[pos_]))
                ++pos_;
            return std::string(text_.substr(start, pos_ - start));
        }

        std::string identifier()
        {
            skip_space();
            std::size_t start = pos_;
            while (pos_ < text_.size() && is_id_char(text_[pos_]))
                ++pos_;
            if (start == pos_)
                fail("expected an identifier");
            return std::string(text_.substr(start, pos_ - start));
        }

        Value integer()
        {
            skip_space();
            std::size_t start = pos_;
            if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+'))
                ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
            Value v = 0;
            const char* first = text_.data() + start;
            if (*first == '+')
                ++first;
            auto [ptr, ec] = std::from_chars(first, text_.data() + pos_, v);
            if (ec != std::errc{} || ptr != text_.data() + pos_) {
                pos_ = start;
                fail("expected an integer");
            }
            return v;
        }

        bool at_integer()
        {
            skip_space();
            if (pos_ >= text_.size())
                return false;
            char c = text_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c)))
                return true;
            return (c == '-' || c == '+') && pos_ + 1 < text_.size() &&
                std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]));
        }

        RelOp rel_op()
        {
            skip_space();
            auto op = parse_rel_op(text_.substr(pos_, 2));
            if (!op)
                fail("expected one of <=, >=, ==, !=");
            pos_ += 2;
            return *op;
        }

        std::size_t position() const { return pos_; }
        void rewind(std::size_t pos) { pos_ = pos; }

    private:
        std::string_view text_;
        std::size_t line_;
        std::size_t pos_ = 0;
    };

    class BodyParser {
    public:
        BodyParser(Cursor& cursor, const UserModel& model) : cur_(cursor), model_(model) {}

        Body body()
        {
            if (cur_.accept_keyword("alldifferent"))
                return all_different();
            if (cur_.accept_keyword("lin"))
                return linear();
            if (cur_.accept_keyword("clause"))
                return clause();
            if (cur_.accept_keyword("or"))
                return disjunction();
            // The constants appear when canonical forms fold a linear away.
            if (cur_.accept_keyword("true"))
                return truth();
            if (cur_.accept_keyword("false"))
                return falsity();
            cur_.fail("expected alldifferent, lin, clause, or, true or false");
        }

    private:
        VarId var()
        {
            std::size_t at = cur_.position();
            std::string name = cur_.name();
            auto id = model_.find_var(name);
            if (!id) {
                cur_.rewind(at);
                cur_.skip_space();
                cur_.fail("undeclared variable '" + name + "'");
            }
            return *id;
        }

        Body all_different()
        {
            cur_.expect("(");
            AllDifferent ad;
            ad.vars.push_back(var());
            while (cur_.accept(","))
                ad.vars.push_back(var());
            cur_.expect(")");
            return ad;
        }

        Term term()
        {
            Value coeff = 1;
            if (cur_.at_integer()) {
                coeff = cur_.integer();
                cur_.expect("*");
            }
            return {coeff, var()};
        }

        Body linear()
        {
            Linear lin;
            lin.terms.push_back(term());
            for (;;) {
                if (cur_.accept("+"))
                    lin.terms.push_back(term());
                else if (cur_.peek() == '-' && !cur_.at_integer()) {
                    cur_.expect("-");
                    Term t = term();
                    t.coeff = -t.coeff;
                    lin.terms.push_back(t);
                }
                else
                    break;
            }
            lin.op = cur_.rel_op();
            lin.rhs = cur_.integer();
            return lin;
        }

        Atomic atom()
        {
            VarId v = var();
            RelOp op = cur_.rel_op();
            return {v, op, cur_.integer()};
        }

        Body clause()
        {
            Clause c;
            c.atoms.push_back(atom());
            while (cur_.accept("|"))
                c.atoms.push_back(atom());
            if (c.atoms.size() == 1)
                return c.atoms.front();
            return c;
        }

        Body disjunction()
        {
            cur_.expect("(");
            Disjunction d;
            d.parts.push_back(body());
            while (cur_.accept(";"))
                d.parts.push_back(body());
            cur_.expect(")");
            return d;
        }

        Cursor& cur_;
        const UserModel& model_;
    };

} // namespace

UserModel parse_model(std::string_view text, std::vector<std::string>* warnings)
{
    UserModel model;
    std::set<std::string, std::less<>> constraint_ids;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        Cursor cur(line, line_no);
        if (cur.at_end())
            continue;
        if (cur.accept_keyword("var")) {
            std::string name = cur.name();
            if (model.find_var(name))
                cur.fail("variable '" + name + "' declared twice");
            Value lo = cur.integer();
            cur.expect("..");
            Value hi = cur.integer();
            if (lo > hi && warnings)
                warnings->push_back("line " + std::to_string(line_no) + ": variable '" + name + "' has an empty domain");
            model.vars.push_back({std::move(name), Domain(lo, hi)});
        }
        else if (cur.accept_keyword("con")) {
            std::string id = cur.identifier();
            if (constraint_ids.contains(id))
                cur.fail("constraint id '" + id + "' used twice");
            cur.expect(":");
            BodyParser parser(cur, model);
            Body body = parser.body();
            constraint_ids.insert(id);
            model.constraints.push_back({std::move(id), std::move(body)});
        }
        else {
            cur.fail("expected 'var' or 'con'");
        }
        if (!cur.at_end())
            cur.fail("unexpected trailing text");
    }
    return model;
}

std::string serialize_model(const UserModel& model)
{
    std::string out;
    for (const auto& v : model.vars)
        out += "var " + v.name + " " + std::to_string(v.domain.lower()) + ".." + std::to_string(v.domain.upper()) + "\n";
    for (const auto& c : model.constraints)
        out += "con " + c.id + ": " + format_body(c.body, model.vars) + "\n";
    return out;
}

} // namespace p2s
