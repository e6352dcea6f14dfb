#pragma once

// Combinatorial side: integer and lattice sets inside a finite window,
// densities, exhaustive pattern search for a + p_j n + q_j N, syndetic sets of
// good N, and empirical cylinder frequencies along the indicator sequence.

#include "ergo/core.hpp"
#include "ergo/parallel.hpp"
#include "ergo/recurrence.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace ergo {

/// Subset of [lo, hi) stored as a bitset.
class IntegerSet {
public:
    IntegerSet() = default;
    IntegerSet(std::int64_t lo, std::int64_t hi) : lo_(lo), hi_(hi) {
        if (hi < lo) throw argument_error("integer set window [" + std::to_string(lo) + "," + std::to_string(hi) + ") is reversed");
        if (hi - lo > (std::int64_t{1} << 31)) throw resource_error("integer set window longer than 2^31");
        words_.assign(static_cast<std::size_t>((hi - lo) / 64 + 2), 0);
    }

    static IntegerSet of(std::int64_t lo, std::int64_t hi, const std::vector<std::int64_t>& members) {
        IntegerSet s(lo, hi);
        for (auto x : members) {
            if (x < lo || x >= hi) throw argument_error("member " + std::to_string(x) + " outside the window");
            s.insert(x);
        }
        return s;
    }

    /// Members x = r (mod m) of [lo, hi).
    static IntegerSet residue(std::int64_t r, std::int64_t m, std::int64_t lo, std::int64_t hi) {
        if (m < 1) throw argument_error("residue modulus must be >= 1");
        IntegerSet s(lo, hi);
        for (std::int64_t x = lo; x < hi; ++x)
            if (((x - r) % m + m) % m == 0) s.insert(x);
        return s;
    }

    /// Each point independently with probability delta.
    static IntegerSet random(double delta, std::uint64_t seed, std::int64_t lo, std::int64_t hi) {
        if (!(delta >= 0 && delta <= 1)) throw argument_error("density must lie in [0,1]");
        IntegerSet s(lo, hi);
        std::mt19937_64 rng(seed);
        std::bernoulli_distribution coin(delta);
        for (std::int64_t x = lo; x < hi; ++x)
            if (coin(rng)) s.insert(x);
        return s;
    }

    std::int64_t lo() const { return lo_; }
    std::int64_t hi() const { return hi_; }
    std::int64_t length() const { return hi_ - lo_; }

    bool contains(std::int64_t x) const {
        if (x < lo_ || x >= hi_) return false;
        auto i = static_cast<std::uint64_t>(x - lo_);
        return (words_[i >> 6] >> (i & 63)) & 1u;
    }
    void insert(std::int64_t x) {
        auto i = static_cast<std::uint64_t>(x - lo_);
        words_[i >> 6] |= std::uint64_t{1} << (i & 63);
    }

    std::vector<std::int64_t> members() const {
        std::vector<std::int64_t> out;
        for (std::int64_t x = lo_; x < hi_; ++x)
            if (contains(x)) out.push_back(x);
        return out;
    }
    std::int64_t count() const {
        std::int64_t c = 0;
        for (auto w : words_) c += std::popcount(w);
        return c;
    }

    /// Translate by t, keeping the window length; the window moves too.
    IntegerSet translated(std::int64_t t) const {
        IntegerSet s(lo_ + t, hi_ + t);
        s.words_ = words_;
        return s;
    }

    /// 64 membership bits starting at x (bit i is x + i); zero outside the window.
    std::uint64_t bits_at(std::int64_t x) const {
        std::uint64_t out = 0;
        std::int64_t off = x - lo_;
        if (off >= 0 && off < length()) {
            auto i = static_cast<std::uint64_t>(off);
            std::size_t w = i >> 6;
            unsigned sh = i & 63;
            out = words_[w] >> sh;
            if (sh && w + 1 < words_.size()) out |= words_[w + 1] << (64 - sh);
        } else if (off < 0 && off > -64) {
            out = words_[0] << static_cast<unsigned>(-off);
        }
        // Mask bits at or past hi.
        std::int64_t room = hi_ - x;
        if (room <= 0) return 0;
        if (room < 64) out &= (std::uint64_t{1} << room) - 1;
        return out;
    }

private:
    std::int64_t lo_ = 0, hi_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Parses "r mod m", "random delta seed", or a newline-delimited file path.
/// Descriptor sets are materialized on [lo, hi).
inline IntegerSet parse_integer_set(const std::string& text, std::int64_t lo, std::int64_t hi) {
    std::istringstream in(text);
    std::vector<std::string> tok;
    for (std::string t; in >> t;) tok.push_back(t);
    try {
        if (tok.size() == 3 && tok[1] == "mod") return IntegerSet::residue(std::stoll(tok[0]), std::stoll(tok[2]), lo, hi);
        if (tok.size() >= 3 && tok[0] == "random") {
            // "random delta seed [window]"; a window token overrides hi.
            if (tok.size() == 4) hi = lo + std::stoll(tok[3]);
            return IntegerSet::random(std::stod(tok[1]), std::stoull(tok[2]), lo, hi);
        }
    } catch (const std::logic_error&) {
        throw argument_error("malformed set descriptor '" + text + "'");
    }
    std::ifstream f(text);
    if (!f) throw argument_error("set descriptor '" + text + "' is neither 'r mod m', 'random delta seed [window]', nor a readable file");
    std::vector<std::int64_t> xs;
    for (std::string line; std::getline(f, line);) {
        auto p = line.find_first_not_of(" \t\r");
        if (p == std::string::npos || line[p] == '#') continue;
        try {
            xs.push_back(std::stoll(line.substr(p)));
        } catch (const std::logic_error&) {
            throw argument_error("bad integer '" + line + "' in " + text);
        }
    }
    return IntegerSet::of(lo, hi, xs);
}

/// Subset of a box [lo, hi) in Z^d, d <= 4, row-major with the last axis fastest.
class LatticeSet {
public:
    LatticeSet(int d, Site lo, Site hi) : d_(d), lo_(lo), hi_(hi) {
        if (d < 1 || d > kMaxLatticeDim) throw argument_error("lattice dimension must be 1..4");
        std::int64_t vol = 1;
        for (int i = 0; i < kMaxLatticeDim; ++i) {
            if (i >= d && (lo[static_cast<std::size_t>(i)] != 0 || hi[static_cast<std::size_t>(i)] != 0))
                throw argument_error("unused box axes must be [0,0)");
            if (i < d) {
                auto len = hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)];
                if (len <= 0) throw argument_error("box side must be positive");
                vol *= len;
                if (vol > (std::int64_t{1} << 30)) throw resource_error("lattice box volume exceeds 2^30");
            }
        }
        bits_.assign(static_cast<std::size_t>(vol), 0);
    }

    int dimension() const { return d_; }
    const Site& lo() const { return lo_; }
    const Site& hi() const { return hi_; }
    std::int64_t volume() const { return static_cast<std::int64_t>(bits_.size()); }

    bool in_box(const Site& v) const {
        for (int i = 0; i < d_; ++i) {
            auto k = static_cast<std::size_t>(i);
            if (v[k] < lo_[k] || v[k] >= hi_[k]) return false;
        }
        return true;
    }
    bool contains(const Site& v) const { return in_box(v) && bits_[index(v)]; }
    void insert(const Site& v) {
        if (!in_box(v)) throw argument_error("lattice point outside the box");
        bits_[index(v)] = 1;
    }

    template <class Fn> void for_each_site(Fn&& fn) const { visit_box(d_, lo_, hi_, fn); }

    /// Visits every site of [lo, hi) in row-major order.
    template <class Fn> static void visit_box(int d, const Site& lo, const Site& hi, Fn&& fn) {
        for (int i = 0; i < d; ++i)
            if (hi[static_cast<std::size_t>(i)] <= lo[static_cast<std::size_t>(i)]) return;
        Site v = lo;
        for (;;) {
            fn(v);
            int i = d - 1;
            for (; i >= 0; --i) {
                auto k = static_cast<std::size_t>(i);
                if (++v[k] < hi[k]) break;
                v[k] = lo[k];
            }
            if (i < 0) return;
        }
    }

    template <class Pred> static LatticeSet where(int d, Site lo, Site hi, Pred&& keep) {
        LatticeSet s(d, lo, hi);
        s.for_each_site([&](const Site& v) {
            if (keep(v)) s.bits_[s.index(v)] = 1;
        });
        return s;
    }

private:
    std::size_t index(const Site& v) const {
        std::size_t idx = 0;
        for (int i = 0; i < d_; ++i) {
            auto k = static_cast<std::size_t>(i);
            idx = idx * static_cast<std::size_t>(hi_[k] - lo_[k]) + static_cast<std::size_t>(v[k] - lo_[k]);
        }
        return idx;
    }

    int d_;
    Site lo_, hi_;
    std::vector<unsigned char> bits_;
};

// ---------------------------------------------------------------------------

struct DensityWitness {
    Rational density;
    std::int64_t lo = 0, size = 0;  // window [lo, lo + size)
};

/// max over sizes w and placements a of |set cap [a, a+w)| / w.
inline DensityWitness upper_density(const IntegerSet& s, const std::vector<std::int64_t>& sizes) {
    if (sizes.empty()) throw argument_error("need at least one window size");
    DensityWitness best{Rational(-1), 0, 0};
    for (auto w : sizes) {
        if (w < 1 || w > s.length())
            throw argument_error("window size " + std::to_string(w) + " outside [1, " + std::to_string(s.length()) + "]");
        std::int64_t cnt = 0;
        for (std::int64_t x = s.lo(); x < s.lo() + w; ++x) cnt += s.contains(x);
        std::int64_t top = cnt, at = s.lo();
        for (std::int64_t a = s.lo() + 1; a + w <= s.hi(); ++a) {
            cnt += s.contains(a + w - 1) - s.contains(a - 1);
            if (cnt > top) top = cnt, at = a;
        }
        Rational d = make_rational(top, w);
        if (d > best.density) best = {d, at, w};
    }
    return best;
}

/// Boxes with all sides equal to w.
struct LatticeDensityWitness {
    Rational density;
    Site corner{};
    std::int64_t side = 0;
};

inline LatticeDensityWitness upper_density(const LatticeSet& s, const std::vector<std::int64_t>& sides) {
    if (sides.empty()) throw argument_error("need at least one box side");
    LatticeDensityWitness best{Rational(-1), {}, 0};
    const int d = s.dimension();
    for (auto w : sides) {
        for (int i = 0; i < d; ++i)
            if (w < 1 || w > s.hi()[static_cast<std::size_t>(i)] - s.lo()[static_cast<std::size_t>(i)])
                throw argument_error("box side " + std::to_string(w) + " does not fit the set box");
        Site hi_corner = s.hi();
        for (int i = 0; i < d; ++i) hi_corner[static_cast<std::size_t>(i)] -= w - 1;
        LatticeSet::visit_box(d, s.lo(), hi_corner, [&](const Site& c) {
            std::int64_t cnt = 0;
            Site hi = c;
            for (int i = 0; i < d; ++i) hi[static_cast<std::size_t>(i)] += w;
            LatticeSet::visit_box(d, c, hi, [&](const Site& v) { cnt += s.contains(v); });
            Rational dens = make_rational(cnt, 1);
            for (int i = 0; i < d; ++i) dens /= w;
            if (dens > best.density) best = {dens, c, w};
        });
    }
    return best;
}

// ---------------------------------------------------------------------------

struct PatternWitness {
    std::int64_t n, a;
    Site a_site{};  // lattice searches only
};

struct PatternCount {
    std::int64_t N = 0;
    std::int64_t count = 0;
    std::int64_t a_lo = 0, a_hi = 0;  // scanned a-range [a_lo, a_hi)
    std::vector<PatternWitness> witnesses;
};

/// (0,0) is always the first pair; a leading (0,0) in the input is accepted.
inline PQList pattern_pairs(PQList pq) {
    if (pq.empty() || pq.front() != std::pair<std::int64_t, std::int64_t>{0, 0}) pq.insert(pq.begin(), {0, 0});
    return pq;
}

/// Counts n in [0, N] such that a + p_j n + q_j N lies in the set for all j,
/// for some a in the largest range that keeps every point inside the window
/// for every n.
inline PatternCount pattern_count(const IntegerSet& s, PQList pq, std::int64_t N, std::size_t max_witnesses = 10) {
    if (N < 0) throw argument_error("N must be >= 0");
    pq = pattern_pairs(std::move(pq));
    std::int64_t omin = 0, omax = 0;
    for (auto [p, q] : pq)
        for (std::int64_t n : {std::int64_t{0}, N}) {
            omin = std::min(omin, p * n + q * N);
            omax = std::max(omax, p * n + q * N);
        }
    PatternCount out;
    out.N = N;
    out.a_lo = s.lo() - omin;
    out.a_hi = s.hi() - omax;
    if (out.a_lo >= out.a_hi)
        throw argument_error("empty a-range for N = " + std::to_string(N) + ": offsets span [" + std::to_string(omin) + ", " +
                             std::to_string(omax) + "], window [" + std::to_string(s.lo()) + ", " + std::to_string(s.hi()) +
                             ") leaves a in [" + std::to_string(out.a_lo) + ", " + std::to_string(out.a_hi) + ")");
    for (std::int64_t n = 0; n <= N; ++n) {
        for (std::int64_t a = out.a_lo; a < out.a_hi; a += 64) {
            std::uint64_t acc = ~std::uint64_t{0};
            if (out.a_hi - a < 64) acc = (std::uint64_t{1} << (out.a_hi - a)) - 1;
            for (auto [p, q] : pq) {
                acc &= s.bits_at(a + p * n + q * N);
                if (!acc) break;
            }
            if (acc) {
                ++out.count;
                if (out.witnesses.size() < max_witnesses) out.witnesses.push_back({n, a + std::countr_zero(acc), {}});
                break;
            }
        }
    }
    return out;
}

/// d-dimensional analog: a in the set and a + n z_j + N zhat_j in the set for all j.
inline PatternCount lattice_pattern_count(const LatticeSet& s, const std::vector<Site>& z, const std::vector<Site>& zhat,
                                          std::int64_t N, std::size_t max_witnesses = 10) {
    if (z.empty() || z.size() != zhat.size()) throw argument_error("need matching nonempty Gamma and Gamma-hat");
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (is_zero(z[i])) throw argument_error("Gamma vectors must be nonzero");
        for (std::size_t j = 0; j < i; ++j)
            if (z[i] == z[j]) throw argument_error("Gamma vectors must be distinct");
    }
    if (N < 0) throw argument_error("N must be >= 0");
    PatternCount out;
    out.N = N;
    for (std::int64_t n = 0; n <= N; ++n) {
        std::optional<Site> hit;
        s.for_each_site([&](const Site& a) {
            if (hit || !s.contains(a)) return;
            for (std::size_t j = 0; j < z.size(); ++j)
                if (!s.contains(a + n * z[j] + N * zhat[j])) return;
            hit = a;
        });
        if (hit) {
            ++out.count;
            if (out.witnesses.size() < max_witnesses) out.witnesses.push_back({n, (*hit)[0], *hit});
        }
    }
    return out;
}

struct PatternSeries {
    std::vector<std::int64_t> N;
    std::vector<std::int64_t> count;
    std::vector<Rational> ratio;  // count / N
    std::int64_t a_lo = 0, a_hi = 0;  // scanned range at N_max (the narrowest)
};

inline PatternSeries pattern_series(const IntegerSet& s, const PQList& pq, std::int64_t N_max, unsigned jobs = 1) {
    if (N_max < 1) throw argument_error("N_max must be >= 1");
    auto counts = parallel_map(static_cast<std::size_t>(N_max), jobs,
                               [&](std::size_t i) { return pattern_count(s, pq, static_cast<std::int64_t>(i) + 1, 0); });
    PatternSeries out;
    for (const auto& c : counts) {
        out.N.push_back(c.N);
        out.count.push_back(c.count);
        out.ratio.push_back(make_rational(c.count, c.N));
    }
    out.a_lo = counts.back().a_lo;
    out.a_hi = counts.back().a_hi;
    return out;
}

/// N is good when count(N) >= eps N; eps defaults to the recurrence auto rule.
inline SyndeticReport syndetic_pattern_report(const PatternSeries& series, std::optional<Rational> eps = std::nullopt) {
    return detect_syndetic(series.N, series.ratio, std::move(eps));
}

inline SyndeticReport syndetic_pattern_report(const IntegerSet& s, const PQList& pq, std::int64_t N_max,
                                              std::optional<Rational> eps = std::nullopt, unsigned jobs = 1) {
    return syndetic_pattern_report(pattern_series(s, pq, N_max, jobs), std::move(eps));
}

// ---------------------------------------------------------------------------

using CylinderPattern = std::vector<std::pair<std::int64_t, int>>;  // (offset, symbol in {0,1})

/// Frequency over x in [lo, hi) of omega_{x+c} = s for every constraint, where
/// omega is the indicator sequence of the set.
inline std::vector<Rational> empirical_cylinder_measure(const IntegerSet& s, std::int64_t lo, std::int64_t hi,
                                                        const std::vector<CylinderPattern>& cylinders) {
    if (hi <= lo) throw argument_error("empty measuring window");
    std::vector<Rational> out;
    for (const auto& cyl : cylinders) {
        std::int64_t cmin = 0, cmax = 0;
        for (auto [c, sym] : cyl) {
            if (sym != 0 && sym != 1) throw argument_error("cylinder symbols must be 0 or 1");
            cmin = std::min(cmin, c);
            cmax = std::max(cmax, c);
        }
        if (2 * (cmax - cmin) > hi - lo)
            throw argument_error("cylinder span " + std::to_string(cmax - cmin) + " exceeds half the window length");
        if (lo + cmin < s.lo() || hi - 1 + cmax >= s.hi())
            throw argument_error("shifted window leaves the set's declared window");
        std::int64_t hits = 0;
        for (std::int64_t x = lo; x < hi; ++x) {
            bool ok = true;
            for (auto [c, sym] : cyl) ok = ok && (s.contains(x + c) == (sym == 1));
            hits += ok;
        }
        out.push_back(make_rational(hits, hi - lo));
    }
    return out;
}

}  // namespace ergo
