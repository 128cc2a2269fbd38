#include "polydiag/formula.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace polydiag {

std::string Term::label() const {
    std::string out;
    for (std::size_t i = 0; i < variables.size(); ++i) {
        if (i) out += ':';
        out += variables[i];
    }
    return out;
}

std::vector<std::string> ModelFormula::variables() const {
    std::vector<std::string> out;
    for (const auto& t : terms) {
        for (const auto& v : t.variables) {
            if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
        }
    }
    return out;
}

std::string ModelFormula::to_string() const {
    std::string out = response + " ~ ";
    if (terms.empty()) return out + "1";
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i) out += " + ";
        out += terms[i].label();
    }
    return out;
}

FormulaSyntaxError::FormulaSyntaxError(const std::string& message, std::size_t position)
    : ValidationError("formula syntax error at position " + std::to_string(position) + ": " +
                      message),
      position_(position) {}

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    ModelFormula parse() {
        ModelFormula f;
        f.response = name("response name");
        skip_space();
        expect('~');
        skip_space();
        if (at_end()) return f;
        if (peek() == '1') {
            ++pos_;
            skip_space();
            if (at_end()) return f;
            expect('+');
        }
        for (;;) {
            const std::size_t start = pos_;
            for (auto& t : product()) add(f, std::move(t), start);
            skip_space();
            if (at_end()) break;
            expect('+');
        }
        return f;
    }

private:
    static bool name_start(char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    }
    static bool name_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    }

    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }

    void skip_space() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
    }

    void expect(char c) {
        if (at_end()) throw FormulaSyntaxError(std::string("expected '") + c + "' but input ended", pos_);
        if (peek() != c) {
            throw FormulaSyntaxError(std::string("expected '") + c + "', found '" + peek() + "'", pos_);
        }
        ++pos_;
    }

    std::string name(const char* what) {
        skip_space();
        if (at_end() || !name_start(peek())) {
            throw FormulaSyntaxError(std::string("expected ") + what, pos_);
        }
        const std::size_t start = pos_;
        while (!at_end() && name_char(peek())) ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }

    Term atom() {
        Term t;
        t.variables.push_back(name("variable name"));
        for (;;) {
            skip_space();
            if (at_end() || peek() != ':') break;
            ++pos_;
            t.variables.push_back(name("variable name after ':'"));
        }
        return t;
    }

    // a * b * c expands to every non-empty subset, lower orders first.
    std::vector<Term> product() {
        std::vector<Term> factors{atom()};
        for (;;) {
            skip_space();
            if (at_end() || peek() != '*') break;
            ++pos_;
            factors.push_back(atom());
        }
        if (factors.size() == 1) return factors;
        if (factors.size() > 16) throw FormulaSyntaxError("too many factors in product", pos_);
        std::vector<unsigned> masks;
        for (unsigned mask = 1; mask < (1u << factors.size()); ++mask) masks.push_back(mask);
        std::stable_sort(masks.begin(), masks.end(), [](unsigned a, unsigned b) {
            return __builtin_popcount(a) < __builtin_popcount(b);
        });
        std::vector<Term> out;
        for (unsigned mask : masks) {
            Term t;
            for (std::size_t k = 0; k < factors.size(); ++k) {
                if (mask & (1u << k)) {
                    t.variables.insert(t.variables.end(), factors[k].variables.begin(),
                                       factors[k].variables.end());
                }
            }
            out.push_back(std::move(t));
        }
        return out;
    }

    void add(ModelFormula& f, Term t, std::size_t at) {
        std::set<std::string> vars(t.variables.begin(), t.variables.end());
        if (vars.size() != t.variables.size()) {
            throw FormulaSyntaxError("variable repeated within term '" + t.label() + "'", at);
        }
        for (const auto& existing : f.terms) {
            if (std::set<std::string>(existing.variables.begin(), existing.variables.end()) == vars) {
                throw FormulaSyntaxError("duplicate term '" + t.label() + "'", at);
            }
        }
        f.terms.push_back(std::move(t));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

ModelFormula parse_formula(std::string_view text) {
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
        throw FormulaSyntaxError("empty formula", 0);
    }
    return Parser(text).parse();
}

}  // namespace polydiag
