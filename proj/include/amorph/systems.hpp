#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "amorph/fixed128.hpp"

namespace amorph {

enum class SystemKind {
    rotation,
    doubling,
    torus_shear,
    morse_smale,
    denjoy,
    annulus_transient,
    pinched,
    product,
};

inline const char* kind_name(SystemKind k) {
    switch (k) {
        case SystemKind::rotation: return "rotation";
        case SystemKind::doubling: return "doubling";
        case SystemKind::torus_shear: return "torus_shear";
        case SystemKind::morse_smale: return "morse_smale";
        case SystemKind::denjoy: return "denjoy";
        case SystemKind::annulus_transient: return "annulus_transient";
        case SystemKind::pinched: return "pinched";
        case SystemKind::product: return "product";
    }
    return "?";
}

// A parameter keeps both the parsed double and the 128-bit circle value;
// the latter is what orbit engines use for rigid components.
struct Param {
    double value = 0.0;
    Fixed128 circle;  // value mod 1 at fixed-point precision
    std::string text; // canonical source form
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " at position " + std::to_string(pos)), position(pos) {}
    std::size_t position;
};

struct SystemSpec {
    SystemKind kind = SystemKind::rotation;
    std::map<std::string, Param> params;
    std::vector<SystemSpec> children;  // product holds exactly two

    bool has(const std::string& key) const { return params.count(key) != 0; }
    double value(const std::string& key) const { return params.at(key).value; }
    double value_or(const std::string& key, double dflt) const {
        auto it = params.find(key);
        return it == params.end() ? dflt : it->second.value;
    }
    Fixed128 circle(const std::string& key) const { return params.at(key).circle; }
    Fixed128 circle_or(const std::string& key, Fixed128 dflt) const {
        auto it = params.find(key);
        return it == params.end() ? dflt : it->second.circle;
    }

    std::string text() const {
        std::string s = kind_name(kind);
        if (kind == SystemKind::product)
            return "product(" + children[0].text() + "," + children[1].text() + ")";
        if (!params.empty()) {
            s += ':';
            bool first = true;
            for (const auto& [k, v] : params) {
                if (!first) s += ',';
                first = false;
                s += k + "=" + v.text;
            }
        }
        return s;
    }
};

namespace detail {

struct SpecParser {
    const std::string& s;
    std::size_t pos = 0;

    explicit SpecParser(const std::string& text) : s(text) {}

    void skip_ws() { while (pos < s.size() && std::isspace((unsigned char)s[pos])) ++pos; }

    std::string ident() {
        skip_ws();
        std::size_t start = pos;
        while (pos < s.size() && (std::islower((unsigned char)s[pos]) || s[pos] == '_'))
            ++pos;
        if (pos == start) throw ParseError("expected identifier", pos);
        return s.substr(start, pos - start);
    }

    Param value() {
        skip_ws();
        std::size_t start = pos;
        if (s.compare(pos, 6, "golden") == 0) {
            pos += 6;
            Param p;
            p.circle = Fixed128::golden();
            p.value = p.circle.to_double();
            p.text = "golden";
            return p;
        }
        while (pos < s.size() &&
               (std::isdigit((unsigned char)s[pos]) || s[pos] == '.' || s[pos] == '-' ||
                s[pos] == '+' || s[pos] == 'e' || s[pos] == 'E' || s[pos] == '/'))
            ++pos;
        if (pos == start) throw ParseError("expected value", pos);
        std::string tok = s.substr(start, pos - start);
        Param p;
        p.text = tok;
        auto slash = tok.find('/');
        try {
            if (slash != std::string::npos) {
                std::uint64_t num = std::stoull(tok.substr(0, slash));
                std::uint64_t den = std::stoull(tok.substr(slash + 1));
                if (den == 0) throw ParseError("zero denominator", start);
                p.value = (double)num / (double)den;
                p.circle = Fixed128::from_fraction(num, den);
            } else {
                p.value = std::stod(tok);
                p.circle = Fixed128::from_double(p.value);
            }
        } catch (const std::invalid_argument&) {
            throw ParseError("malformed number '" + tok + "'", start);
        } catch (const std::out_of_range&) {
            throw ParseError("number out of range '" + tok + "'", start);
        }
        return p;
    }

    SystemSpec spec() {
        std::string name = ident();
        SystemSpec out;
        if (name == "product") {
            out.kind = SystemKind::product;
            skip_ws();
            if (pos >= s.size() || s[pos] != '(') throw ParseError("expected '('", pos);
            ++pos;
            out.children.push_back(spec());
            skip_ws();
            if (pos >= s.size() || s[pos] != ',') throw ParseError("expected ','", pos);
            ++pos;
            out.children.push_back(spec());
            skip_ws();
            if (pos >= s.size() || s[pos] != ')') throw ParseError("expected ')'", pos);
            ++pos;
            return out;
        }
        if (name == "rotation") out.kind = SystemKind::rotation;
        else if (name == "doubling") out.kind = SystemKind::doubling;
        else if (name == "torus_shear") out.kind = SystemKind::torus_shear;
        else if (name == "morse_smale") out.kind = SystemKind::morse_smale;
        else if (name == "denjoy") out.kind = SystemKind::denjoy;
        else if (name == "annulus_transient") out.kind = SystemKind::annulus_transient;
        else if (name == "pinched") out.kind = SystemKind::pinched;
        else throw ParseError("unknown kind '" + name + "'", pos - name.size());
        skip_ws();
        if (pos < s.size() && s[pos] == ':') {
            ++pos;
            parse_kv(out);
            for (;;) {
                skip_ws();
                if (pos >= s.size() || s[pos] != ',') break;
                // a comma continues the list only when a key=... follows;
                // otherwise it separates product children
                std::size_t comma = pos;
                ++pos;
                if (!looks_like_kv()) {
                    pos = comma;
                    break;
                }
                parse_kv(out);
            }
        }
        return out;
    }

    bool looks_like_kv() {
        std::size_t probe = pos;
        while (probe < s.size() && std::isspace((unsigned char)s[probe])) ++probe;
        std::size_t start = probe;
        while (probe < s.size() &&
               (std::islower((unsigned char)s[probe]) || s[probe] == '_'))
            ++probe;
        return probe > start && probe < s.size() && s[probe] == '=';
    }

    void parse_kv(SystemSpec& out) {
        std::string key = ident();
        skip_ws();
        if (pos >= s.size() || s[pos] != '=') throw ParseError("expected '='", pos);
        ++pos;
        out.params[key] = value();
    }
};

inline void validate_spec(const SystemSpec& spec) {
    auto require_in = [&](const char* key, double lo, double hi, bool open) {
        if (!spec.has(key))
            throw std::invalid_argument(std::string(kind_name(spec.kind)) +
                                        " requires parameter '" + key + "'");
        double v = spec.value(key);
        bool ok = open ? (v > lo && v < hi) : (v >= lo && v <= hi);
        if (!ok)
            throw std::invalid_argument(std::string(kind_name(spec.kind)) + " parameter '" +
                                        key + "' out of domain");
    };
    switch (spec.kind) {
        case SystemKind::rotation:
            require_in("alpha", 0.0, 1.0, true);
            break;
        case SystemKind::denjoy:
            if (spec.has("alpha")) require_in("alpha", 0.0, 1.0, true);
            break;
        case SystemKind::pinched: {
            if (!spec.has("alpha")) throw std::invalid_argument("pinched requires alpha");
            if (spec.value("alpha") <= 0.0)
                throw std::invalid_argument("pinched alpha must be positive");
            if (spec.value_or("eps", 0.0) < 0.0)
                throw std::invalid_argument("pinched eps must be >= 0");
            if (spec.has("omega")) require_in("omega", 0.0, 1.0, true);
            break;
        }
        case SystemKind::annulus_transient:
            if (spec.has("x0")) require_in("x0", 0.0, 1.0, true);
            break;
        case SystemKind::product:
            if (spec.children.size() != 2)
                throw std::invalid_argument("product requires exactly two children");
            for (const auto& c : spec.children) validate_spec(c);
            break;
        default:
            break;
    }
}

}  // namespace detail

inline SystemSpec parse_spec(const std::string& text) {
    detail::SpecParser p(text);
    SystemSpec spec = p.spec();
    p.skip_ws();
    if (p.pos != text.size()) throw ParseError("trailing input", p.pos);
    detail::validate_spec(spec);
    return spec;
}

// ---------------------------------------------------------------------------
// Phase space geometry

enum class CoordKind : std::uint8_t { circle, interval };

inline void coord_layout(const SystemSpec& spec, std::vector<CoordKind>& out) {
    switch (spec.kind) {
        case SystemKind::rotation:
        case SystemKind::doubling:
        case SystemKind::denjoy:
            out.push_back(CoordKind::circle);
            break;
        case SystemKind::torus_shear:
            out.push_back(CoordKind::circle);
            out.push_back(CoordKind::circle);
            break;
        case SystemKind::morse_smale:
            out.push_back(CoordKind::interval);
            break;
        case SystemKind::annulus_transient:
            out.push_back(CoordKind::interval);
            out.push_back(CoordKind::circle);
            break;
        case SystemKind::pinched:
            out.push_back(CoordKind::circle);
            out.push_back(CoordKind::interval);
            break;
        case SystemKind::product:
            coord_layout(spec.children[0], out);
            coord_layout(spec.children[1], out);
            break;
    }
}

inline std::size_t phase_dim(const SystemSpec& spec) {
    std::vector<CoordKind> layout;
    coord_layout(spec, layout);
    return layout.size();
}

struct Point {
    std::vector<double> coords;
};

inline double circle_arc(double a, double b) {
    double d = std::fabs(a - b);
    return std::min(d, 1.0 - d);
}

inline double frac_part(double x) {
    double f = x - std::floor(x);
    return f >= 1.0 ? 0.0 : f;
}

// maximum metric over components; circle components use arc distance
inline double metric(const SystemSpec& spec, const Point& a, const Point& b) {
    std::vector<CoordKind> layout;
    coord_layout(spec, layout);
    if (a.coords.size() != layout.size() || b.coords.size() != layout.size())
        throw std::invalid_argument("point dimension mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        double d = layout[i] == CoordKind::circle ? circle_arc(a.coords[i], b.coords[i])
                                                  : std::fabs(a.coords[i] - b.coords[i]);
        m = std::max(m, d);
    }
    return m;
}

// Forcing function of the transient annulus example over the base
// g(x) = x^2 with anchor x0: a tent of height 1 on (x1, x0], rescaled by
// 1/k on each deeper preimage level, 0 on {0} and above x0.
struct AnnulusAnchors {
    double x0 = 0.5;
    double x1 = 0.25;        // g(x0)
    double xprime = 0.375;   // (x0+x1)/2

    explicit AnnulusAnchors(double anchor = 0.5)
        : x0(anchor), x1(anchor * anchor), xprime((anchor + anchor * anchor) / 2.0) {}
};

inline double annulus_alpha(double x, const AnnulusAnchors& an = AnnulusAnchors{}) {
    if (x <= 0.0 || x > an.x0) return 0.0;
    int k = 1;
    double level = an.x1;  // x_k
    while (x <= level) {
        level *= level;
        ++k;
    }
    double u = x;
    for (int i = 0; i < k - 1; ++i) u = std::sqrt(u);
    double tent = 1.0 - 2.0 * std::fabs(an.xprime - u) / (an.x0 - an.x1);
    return tent / (double)k;
}

// One application of the pinched fibre map, clipped to [0,1].
inline double pinched_fibre(double alpha, double eps, double theta, double x) {
    double v = std::tanh(alpha * x) * (std::sin(M_PI * theta) + eps);
    if (v < 0.0) v = 0.0;
    if (v > 1.0) v = 1.0;
    return v;
}

}  // namespace amorph
