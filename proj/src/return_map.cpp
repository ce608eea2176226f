#include "specflow/return_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "specflow/errors.hpp"

namespace specflow {

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

double alpha(const ReturnMapParams& p, double x) {
    if (x == 0.0) throw DomainGammaError();
    return sgn(x) * (p.k * std::pow(std::abs(x), p.a) - 1.0);
}

double alpha_prime(const ReturnMapParams& p, double x) {
    if (x == 0.0) throw DomainGammaError();
    return p.k * p.a * std::pow(std::abs(x), p.a - 1.0);
}

double beta(const ReturnMapParams& p, double x, double y) {
    if (x == 0.0) throw DomainGammaError();
    return sgn(x) * p.c + p.b * y * std::pow(std::abs(x), p.exponent_y);
}

double beta_dy(const ReturnMapParams& p, double x) {
    return p.b * std::pow(std::abs(x), p.exponent_y);
}

double beta_dx(const ReturnMapParams& p, double x, double y) {
    if (x == 0.0) throw DomainGammaError();
    return p.b * y * p.exponent_y * std::pow(std::abs(x), p.exponent_y - 1.0) * sgn(x);
}

CrossSectionPoint apply_L(const ReturnMapParams& p, const CrossSectionPoint& q) {
    return CrossSectionPoint{alpha(p, q.x), beta(p, q.x, q.y)};
}

Matrix2d DL(const ReturnMapParams& p, const CrossSectionPoint& q) {
    Matrix2d m;
    m << alpha_prime(p, q.x), 0.0, beta_dx(p, q.x, q.y), beta_dy(p, q.x);
    return m;
}

std::string Itinerary::str() const {
    std::string s;
    s.reserve(word.size());
    for (int w : word) s.push_back(w > 0 ? '+' : '-');
    return s;
}

CrossSectionPoint iterate_L(const ReturnMapParams& p, CrossSectionPoint q, int n,
                            Itinerary* itinerary) {
    for (int i = 0; i < n; ++i) {
        if (itinerary) itinerary->word.push_back(q.x > 0.0 ? +1 : -1);
        q = apply_L(p, q);
    }
    return q;
}

std::optional<double> alpha_inverse(const ReturnMapParams& p, double v, int branch_sign) {
    // Positive branch maps (0,1] onto (-1, k-1]; negative branch maps [-1,0)
    // onto [1-k, 1).
    if (branch_sign > 0) {
        if (v <= -1.0 || v > p.k - 1.0) return std::nullopt;
        return std::pow((v + 1.0) / p.k, 1.0 / p.a);
    }
    if (v >= 1.0 || v < 1.0 - p.k) return std::nullopt;
    return -std::pow((1.0 - v) / p.k, 1.0 / p.a);
}

namespace {

/// alpha^n along the fixed sign itinerary, or nullopt when the orbit leaves
/// the prescribed branch.
std::optional<double> alpha_word(const ReturnMapParams& p, double x, const std::vector<int>& word) {
    for (int w : word) {
        if (x == 0.0 || (x > 0.0) != (w > 0)) return std::nullopt;
        x = alpha(p, x);
        if (std::abs(x) > 1.0) return std::nullopt;  // left the section
    }
    return x;
}

/// Domain interval of the branch of alpha^n with the given sign itinerary,
/// built from closed-form branch inverses (empty when the branch is void).
struct Interval {
    double lo = 0.0, hi = 0.0;
    bool empty = true;
};

/// Preimage of [lo, hi] through the increasing branch of alpha with sign s.
Interval pull_back(const ReturnMapParams& p, double lo, double hi, int s) {
    if (s > 0) {
        // alpha maps (0, 1] increasingly onto (-1, k-1].
        lo = std::max(lo, -1.0);
        hi = std::min(hi, p.k - 1.0);
        if (!(lo < hi)) return Interval{};
        const double u_lo = std::max(std::pow((lo + 1.0) / p.k, 1.0 / p.a), 1e-300);
        const double u_hi = std::pow((hi + 1.0) / p.k, 1.0 / p.a);
        return Interval{u_lo, u_hi, false};
    }
    // alpha maps [-1, 0) increasingly onto [1-k, 1).
    lo = std::max(lo, 1.0 - p.k);
    hi = std::min(hi, 1.0);
    if (!(lo < hi)) return Interval{};
    const double u_lo = -std::pow((1.0 - lo) / p.k, 1.0 / p.a);
    const double u_hi = std::min(-std::pow((1.0 - hi) / p.k, 1.0 / p.a), -1e-300);
    return Interval{u_lo, u_hi, false};
}

Interval branch_domain(const ReturnMapParams& p, const std::vector<int>& word) {
    Interval t{-1.0, 1.0, false};
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
        t = pull_back(p, t.lo, t.hi, *it);
        if (t.empty) return t;
    }
    return t;
}

}  // namespace

std::vector<PeriodicPoint> find_periodic(const GeometricLorenzParams& g, int n) {
    if (n < 1) throw Error("find_periodic: need n >= 1");
    const ReturnMapParams p = ReturnMapParams::from(g);
    std::vector<PeriodicPoint> found;

    std::vector<int> word(static_cast<std::size_t>(n), +1);
    const int total = 1 << n;
    for (int mask = 0; mask < total; ++mask) {
        for (int i = 0; i < n; ++i) word[static_cast<std::size_t>(i)] = (mask >> i) & 1 ? +1 : -1;
        Interval dom = branch_domain(p, word);
        if (dom.empty) continue;

        auto value = [&](double x) -> std::optional<double> {
            auto fx = alpha_word(p, x, word);
            if (!fx) return std::nullopt;
            return *fx - x;
        };
        // alpha^n is increasing on the branch with slope > sqrt(2)^n > 1, so
        // alpha^n(x) - x is increasing: at most one root, found by bisection.
        double lo = dom.lo, hi = dom.hi;
        // Nudge endpoints inward until the word evaluates.
        auto flo = value(lo);
        auto fhi = value(hi);
        for (int guard = 0; guard < 64 && (!flo || !fhi); ++guard) {
            const double w = (hi - lo) * 1e-12;
            if (!flo) flo = value(lo += w);
            if (!fhi) fhi = value(hi -= w);
        }
        if (!flo || !fhi) continue;
        if (*flo > 0.0 || *fhi < 0.0) continue;  // branch does not straddle the diagonal
        for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
            const double mid = 0.5 * (lo + hi);
            auto fm = value(mid);
            if (!fm) break;
            (*fm <= 0.0 ? lo : hi) = mid;
        }
        const double x_star = 0.5 * (lo + hi);

        // Skip cycles whose minimal period divides n but is smaller.
        bool minimal = true;
        {
            double xi = x_star;
            for (int i = 1; i < n; ++i) {
                xi = alpha(p, xi);
                if (std::abs(xi - x_star) < 1e-9) {
                    minimal = false;
                    break;
                }
            }
        }
        if (!minimal) continue;

        // y* solves the affine cycle composition y -> A + B y.
        double A = 0.0, B = 1.0;
        double xi = x_star;
        double flow_period = 0.0;
        for (int i = 0; i < n; ++i) {
            A = sgn(xi) * p.c + beta_dy(p, xi) * A;
            B *= beta_dy(p, xi);
            flow_period += -std::log(std::abs(xi)) / g.lambda1 + g.tau_tube;
            xi = alpha(p, xi);
        }
        const double y_star = A / (1.0 - B);

        PeriodicPoint pt;
        pt.x_star = x_star;
        pt.y_star = y_star;
        pt.period_n = n;
        pt.flow_period = flow_period;
        for (int w : word) pt.itinerary.word.push_back(w);
        found.push_back(std::move(pt));
    }
    std::sort(found.begin(), found.end(),
              [](const PeriodicPoint& a, const PeriodicPoint& b) { return a.x_star < b.x_star; });
    return found;
}

CycleMultipliers cycle_multipliers(const ReturnMapParams& p, const PeriodicPoint& pt) {
    CycleMultipliers m{1.0, 1.0};
    double x = pt.x_star;
    for (int i = 0; i < pt.period_n; ++i) {
        m.unstable *= alpha_prime(p, x);
        m.stable *= beta_dy(p, x);
        x = alpha(p, x);
    }
    return m;
}

std::vector<double> alpha_preimages(const ReturnMapParams& p, double x, int n) {
    std::vector<double> cur{x};
    for (int depth = 0; depth < n; ++depth) {
        std::vector<double> next;
        next.reserve(cur.size() * 2);
        for (double v : cur)
            for (int s : {-1, +1})
                if (auto u = alpha_inverse(p, v, s)) next.push_back(*u);
        cur = std::move(next);
    }
    std::sort(cur.begin(), cur.end());
    return cur;
}

std::optional<int> preimage_density_depth(const ReturnMapParams& p, double x, double delta,
                                          int n_max) {
    std::vector<double> pts{x};
    std::vector<double> all{x};
    for (int depth = 1; depth <= n_max; ++depth) {
        std::vector<double> next;
        next.reserve(pts.size() * 2);
        for (double v : pts)
            for (int s : {-1, +1})
                if (auto u = alpha_inverse(p, v, s)) next.push_back(*u);
        pts = std::move(next);
        all.insert(all.end(), pts.begin(), pts.end());
        std::sort(all.begin(), all.end());
        all.erase(std::unique(all.begin(), all.end()), all.end());
        // delta-dense: every point of [-1,1] within delta of the set.
        bool dense = all.front() + 1.0 <= delta && 1.0 - all.back() <= delta;
        for (std::size_t i = 0; dense && i + 1 < all.size(); ++i)
            if (all[i + 1] - all[i] > 2.0 * delta) dense = false;
        if (dense) return depth;
    }
    return std::nullopt;
}

void write_periodic_csv(const std::vector<PeriodicPoint>& orbits, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path);
    out << "n,x_star,y_star,flow_period,itinerary\n";
    char buf[160];
    for (const auto& o : orbits) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%s\n", o.period_n, o.x_star,
                      o.y_star, o.flow_period, o.itinerary.str().c_str());
        out << buf;
    }
}

}  // namespace specflow
