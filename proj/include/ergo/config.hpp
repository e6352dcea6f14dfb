#pragma once

// JSON descriptors for systems, sets and observables, exact rationals in JSON,
// and the small text syntaxes shared by the CLI ("(1,0),(-1,1)", "1..200").

#include "ergo/averages.hpp"
#include "ergo/core.hpp"
#include "ergo/recurrence.hpp"
#include "ergo/systems.hpp"

#include <json.hpp>

#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace ergo {

using json = nlohmann::json;

/// Exact rationals travel as {"num": "...", "den": "..."} decimal strings.
inline json rational_to_json(const Rational& q) { return json{{"num", q.get_num().get_str()}, {"den", q.get_den().get_str()}}; }

/// Accepts {"num","den"}, a string like "3/8" or "0.25", or a JSON integer.
inline Rational rational_from_json(const json& j) {
    try {
        if (j.is_object()) {
            for (auto it = j.begin(); it != j.end(); ++it)
                if (it.key() != "num" && it.key() != "den") throw argument_error("unknown rational field '" + it.key() + "'");
            auto part = [&](const char* k) {
                const auto& v = j.at(k);
                return v.is_string() ? BigInt(v.get<std::string>()) : BigInt(v.get<long>());
            };
            return make_rational(part("num"), part("den"));
        }
        if (j.is_string()) return parse_rational(j.get<std::string>());
        if (j.is_number_integer()) return Rational(j.get<long>());
    } catch (const argument_error&) {
        throw;
    } catch (const std::exception& e) {
        throw argument_error(std::string("bad rational: ") + e.what());
    }
    throw argument_error("a rational must be {\"num\",\"den\"}, a string, or an integer; got " + j.dump());
}

/// Rejects keys outside `allowed` so typos surface instead of being ignored.
inline void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw argument_error(where + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw argument_error(where + ": unknown field '" + it.key() + "'");
}

inline json load_json(const std::string& file_or_inline) {
    std::string text = file_or_inline;
    auto p = text.find_first_not_of(" \t\r\n");
    if (p == std::string::npos || (text[p] != '{' && text[p] != '[')) {
        std::ifstream f(file_or_inline);
        if (!f) throw argument_error("cannot read '" + file_or_inline + "' (not inline JSON and not a readable file)");
        std::stringstream ss;
        ss << f.rdbuf();
        text = ss.str();
    }
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw argument_error(std::string("malformed JSON: ") + e.what());
    }
}

template <class T> T json_get(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw argument_error(where + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw argument_error(where + ": field '" + key + "' has the wrong type (" + e.what() + ")");
    }
}

// ---------------------------------------------------------------------------
// Systems.

using AnySystem =
    std::variant<CyclicRotation, FinitePermutationSystem, CircleRotation, BernoulliShift, MarkovShift,
                 Product<CyclicRotation, CyclicRotation>, Product<CircleRotation, CircleRotation>,
                 Product<BernoulliShift, BernoulliShift>, Product<MarkovShift, MarkovShift>>;

namespace detail {

inline std::vector<Rational> rational_list(const json& j, const std::string& where) {
    if (!j.is_array()) throw argument_error(where + " must be an array");
    std::vector<Rational> out;
    for (const auto& x : j) out.push_back(rational_from_json(x));
    return out;
}

inline MarkovShift::Matrix rational_matrix(const json& j, const std::string& where) {
    if (!j.is_array()) throw argument_error(where + " must be an array of rows");
    MarkovShift::Matrix P;
    for (const auto& row : j) P.push_back(rational_list(row, where));
    return P;
}

template <class S> S base_system(const std::string& kind, const json& params);

inline CyclicRotation make_cyclic(const json& params) {
    require_keys(params, {"m", "step"}, "cyclic-rotation params");
    auto m = json_get<std::int64_t>(params, "m", "cyclic-rotation");
    if (m < 1 || m > 4096) throw argument_error("cyclic-rotation: m must be 1..4096");
    return CyclicRotation(m, params.value("step", std::int64_t{1}));
}
inline CircleRotation make_circle(const json& params) {
    require_keys(params, {"angle"}, "circle-rotation-rational params");
    if (!params.contains("angle")) throw argument_error("circle-rotation-rational: missing field 'angle'");
    return CircleRotation(rational_from_json(params.at("angle")));
}
inline BernoulliShift make_bernoulli(const json& params) {
    require_keys(params, {"probs"}, "bernoulli-shift params");
    if (!params.contains("probs")) throw argument_error("bernoulli-shift: missing field 'probs'");
    return BernoulliShift(rational_list(params.at("probs"), "bernoulli-shift probs"));
}
inline MarkovShift make_markov(const json& params) {
    require_keys(params, {"matrix"}, "markov-shift params");
    if (!params.contains("matrix")) throw argument_error("markov-shift: missing field 'matrix'");
    return MarkovShift(rational_matrix(params.at("matrix"), "markov-shift matrix"));
}

inline std::pair<std::string, json> kind_and_params(const json& j, const std::string& where) {
    require_keys(j, {"kind", "params"}, where);
    return {json_get<std::string>(j, "kind", where), j.value("params", json::object())};
}

}  // namespace detail

/// {"kind": ..., "params": {...}}. Products take {"first": sys, "second": sys}
/// of the same kind.
inline AnySystem system_from_json(const json& j) {
    auto [kind, params] = detail::kind_and_params(j, "system");
    if (kind == "cyclic-rotation") return detail::make_cyclic(params);
    if (kind == "relabeled") {
        require_keys(params, {"m", "step", "relabel"}, "relabeled params");
        return FinitePermutationSystem::relabeled_rotation(json_get<std::int64_t>(params, "m", "relabeled"),
                                                           params.value("step", std::int64_t{1}),
                                                           json_get<std::vector<std::int64_t>>(params, "relabel", "relabeled"));
    }
    if (kind == "circle-rotation-rational") return detail::make_circle(params);
    if (kind == "bernoulli-shift") return detail::make_bernoulli(params);
    if (kind == "markov-shift") return detail::make_markov(params);
    if (kind == "product") {
        require_keys(params, {"first", "second"}, "product params");
        if (!params.contains("first") || !params.contains("second")) throw argument_error("product: needs 'first' and 'second'");
        auto [k1, p1] = detail::kind_and_params(params.at("first"), "product.first");
        auto [k2, p2] = detail::kind_and_params(params.at("second"), "product.second");
        if (k1 != k2) throw argument_error("product factors must have the same kind (got " + k1 + " and " + k2 + ")");
        if (k1 == "cyclic-rotation") return Product(detail::make_cyclic(p1), detail::make_cyclic(p2));
        if (k1 == "circle-rotation-rational") return Product(detail::make_circle(p1), detail::make_circle(p2));
        if (k1 == "bernoulli-shift") return Product(detail::make_bernoulli(p1), detail::make_bernoulli(p2));
        if (k1 == "markov-shift") return Product(detail::make_markov(p1), detail::make_markov(p2));
        throw argument_error("product factors of kind '" + k1 + "' are not supported");
    }
    throw argument_error("unknown system kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Sets. Every descriptor may be {"whole": true}; unions are taken with
// complements so any list of pieces is allowed to overlap.

template <class Sys>
typename Sys::set_type set_union(const Sys& sys, const typename Sys::set_type& a, const typename Sys::set_type& b) {
    return sys.complement(sys.intersect(sys.complement(a), sys.complement(b)));
}

template <class Sys> typename Sys::set_type set_from_json(const Sys& sys, const json& j);

namespace detail {

template <class Sys> typename Sys::set_type finite_set(const Sys& sys, const json& j) {
    require_keys(j, {"points"}, "finite set");
    return sys.points(json_get<std::vector<std::int64_t>>(j, "points", "finite set"));
}

inline ArcSet arc_set(const json& j) {
    require_keys(j, {"arcs"}, "arc set");
    const auto& arcs = j.at("arcs");
    if (!arcs.is_array()) throw argument_error("arcs must be an array of [a, b] pairs");
    ArcSet out;
    for (const auto& a : arcs) {
        if (!a.is_array() || a.size() != 2) throw argument_error("each arc is [a, b]");
        auto piece = ArcSet::arc(rational_from_json(a[0]), rational_from_json(a[1]));
        out = ~(~out & ~piece);
    }
    return out;
}

template <class Sys> typename Sys::set_type cylinder_set(const Sys& sys, const json& j) {
    require_keys(j, {"cylinders"}, "cylinder set");
    const auto& cyls = j.at("cylinders");
    if (!cyls.is_array()) throw argument_error("cylinders must be an array");
    auto out = sys.empty_set();
    for (const auto& c : cyls) {
        std::vector<std::pair<std::int64_t, int>> cons;
        if (!c.is_array()) throw argument_error("each cylinder is a list of [coordinate, symbol] pairs");
        for (const auto& kv : c) {
            if (!kv.is_array() || kv.size() != 2) throw argument_error("cylinder constraint must be [coordinate, symbol]");
            cons.emplace_back(kv[0].get<std::int64_t>(), kv[1].get<int>());
        }
        auto fresh = sys.intersect(sys.cylinder(cons), sys.complement(out));
        for (const auto& piece : fresh.pieces()) out.add_disjoint(piece);
    }
    return out;
}

}  // namespace detail

template <class Sys> typename Sys::set_type set_from_json(const Sys& sys, const json& j) {
    if (j.is_object() && j.contains("whole")) {
        require_keys(j, {"whole"}, "set");
        return j.at("whole").get<bool>() ? sys.whole() : sys.empty_set();
    }
    try {
        if constexpr (std::is_same_v<Sys, CyclicRotation> || std::is_same_v<Sys, FinitePermutationSystem>) {
            return detail::finite_set(sys, j);
        } else if constexpr (std::is_same_v<Sys, CircleRotation>) {
            return detail::arc_set(j);
        } else if constexpr (std::is_same_v<Sys, BernoulliShift> || std::is_same_v<Sys, MarkovShift>) {
            return detail::cylinder_set(sys, j);
        } else {
            // Product: {"rects": [[set1, set2], ...]}
            require_keys(j, {"rects"}, "product set");
            auto out = sys.empty_set();
            for (const auto& r : j.at("rects")) {
                if (!r.is_array() || r.size() != 2) throw argument_error("each rect is [first-set, second-set]");
                out = set_union(sys, out, sys.rect(set_from_json(sys.first(), r[0]), set_from_json(sys.second(), r[1])));
            }
            return out;
        }
    } catch (const json::exception& e) {
        throw argument_error(std::string("bad set descriptor: ") + e.what());
    }
}

/// {"terms": [{"coef": r, "set": S}, ...]} or a bare set descriptor (indicator).
template <class Sys> Observable<Sys> observable_from_json(const Sys& sys, const json& j) {
    if (j.is_object() && j.contains("terms")) {
        require_keys(j, {"terms"}, "observable");
        Observable<Sys> f;
        for (const auto& t : j.at("terms")) {
            require_keys(t, {"coef", "set"}, "observable term");
            if (!t.contains("set")) throw argument_error("observable term needs a 'set'");
            f.terms.emplace_back(t.contains("coef") ? rational_from_json(t.at("coef")) : Rational(1), set_from_json(sys, t.at("set")));
        }
        return f;
    }
    return Observable<Sys>::indicator(set_from_json(sys, j));
}

// ---------------------------------------------------------------------------
// Text syntaxes.

/// "(1,0),(-1,1)" or a JSON array [[1,0],[-1,1]].
inline PQList parse_pq_list(const std::string& text) {
    auto p = text.find_first_not_of(" \t");
    if (p != std::string::npos && text[p] == '[') {
        PQList out;
        for (const auto& pr : load_json(text)) {
            if (!pr.is_array() || pr.size() != 2) throw argument_error("pairs must be [p, q]");
            out.emplace_back(pr[0].get<std::int64_t>(), pr[1].get<std::int64_t>());
        }
        return out;
    }
    static const std::regex pair_re(R"(\s*\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*(,|$))");
    PQList out;
    auto it = text.cbegin();
    std::smatch m;
    while (it != text.cend()) {
        if (!std::regex_search(it, text.cend(), m, pair_re, std::regex_constants::match_continuous))
            throw argument_error("cannot parse pair list '" + text + "'; expected e.g. \"(1,0),(-1,1)\"");
        out.emplace_back(std::stoll(m[1]), std::stoll(m[2]));
        it = m[0].second;
    }
    if (out.empty()) throw argument_error("empty pair list");
    return out;
}

inline PQList pq_from_json(const json& j) {
    if (j.is_string()) return parse_pq_list(j.get<std::string>());
    return parse_pq_list(j.dump());
}

/// "16,64,256", "1..200", "1..200:3" (step), or mixtures separated by commas.
inline std::vector<std::int64_t> parse_int_list(const std::string& text) {
    std::vector<std::int64_t> out;
    std::stringstream ss(text);
    static const std::regex range_re(R"(\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*(?::\s*(\d+))?\s*)");
    static const std::regex one_re(R"(\s*(-?\d+)\s*)");
    for (std::string item; std::getline(ss, item, ',');) {
        std::smatch m;
        if (std::regex_match(item, m, range_re)) {
            std::int64_t a = std::stoll(m[1]), b = std::stoll(m[2]), st = m[3].matched ? std::stoll(m[3]) : 1;
            if (st < 1 || b < a) throw argument_error("bad range '" + item + "'");
            if ((b - a) / st > 10'000'000) throw resource_error("range '" + item + "' too long");
            for (std::int64_t x = a; x <= b; x += st) out.push_back(x);
        } else if (std::regex_match(item, m, one_re)) {
            out.push_back(std::stoll(m[1]));
        } else {
            throw argument_error("cannot parse integer list item '" + item + "'");
        }
    }
    if (out.empty()) throw argument_error("empty integer list");
    return out;
}

}  // namespace ergo
