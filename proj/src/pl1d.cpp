#include "collapsekit/pl1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "collapsekit/geometry.hpp"

namespace collapsekit {

Rational to_rational(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite value has no rational form");
    int exp = 0;
    double mant = std::frexp(x, &exp);
    // 53-bit mantissa scaled to an integer, then rescaled by the exponent.
    const auto scaled = static_cast<long long>(std::ldexp(mant, 53));
    Rational q(scaled);
    exp -= 53;
    using boost::multiprecision::cpp_int;
    if (exp > 0)
        q *= Rational(cpp_int(1) << exp);
    else if (exp < 0)
        q /= Rational(cpp_int(1) << (-exp));
    return q;
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

std::string to_string(const Rational& q) {
    std::ostringstream os;
    os << q;
    return os.str();
}

bool Interval::contains(const Rational& x) const {
    if (empty()) return false;
    const bool lo_ok = lo_closed ? x >= lo : x > lo;
    const bool hi_ok = hi_closed ? x <= hi : x < hi;
    return lo_ok && hi_ok;
}

Rational Interval::sample() const { return lo == hi ? lo : (lo + hi) / 2; }

namespace {

bool starts_before(const Interval& a, const Interval& b) {
    if (a.lo != b.lo) return a.lo < b.lo;
    return a.lo_closed && !b.lo_closed;
}

// True when a and b overlap or touch so that their union is one interval.
bool joinable(const Interval& a, const Interval& b) {
    if (b.lo < a.hi) return true;
    if (b.lo == a.hi) return a.hi_closed || b.lo_closed;
    return false;
}

} // namespace

IntervalSet::IntervalSet(std::vector<Interval> parts) {
    std::erase_if(parts, [](const Interval& i) { return i.empty(); });
    std::sort(parts.begin(), parts.end(), starts_before);
    for (auto& p : parts) {
        if (!parts_.empty() && joinable(parts_.back(), p)) {
            auto& last = parts_.back();
            if (p.hi > last.hi) {
                last.hi = p.hi;
                last.hi_closed = p.hi_closed;
            } else if (p.hi == last.hi) {
                last.hi_closed = last.hi_closed || p.hi_closed;
            }
        } else {
            parts_.push_back(p);
        }
    }
}

bool IntervalSet::contains(const Rational& x) const {
    return std::any_of(parts_.begin(), parts_.end(), [&](const Interval& i) { return i.contains(x); });
}

IntervalSet IntervalSet::unite(const IntervalSet& other) const {
    auto all = parts_;
    all.insert(all.end(), other.parts_.begin(), other.parts_.end());
    return IntervalSet(std::move(all));
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
    std::vector<Interval> out;
    for (const auto& a : parts_)
        for (const auto& b : other.parts_) {
            Interval c;
            if (a.lo > b.lo || (a.lo == b.lo && !a.lo_closed)) {
                c.lo = a.lo;
                c.lo_closed = a.lo_closed;
            } else {
                c.lo = b.lo;
                c.lo_closed = b.lo_closed;
            }
            if (a.hi < b.hi || (a.hi == b.hi && !a.hi_closed)) {
                c.hi = a.hi;
                c.hi_closed = a.hi_closed;
            } else {
                c.hi = b.hi;
                c.hi_closed = b.hi_closed;
            }
            if (!c.empty()) out.push_back(c);
        }
    return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::minus(const IntervalSet& other) const {
    // Complement of `other` inside a bounding window, then intersect.
    if (parts_.empty()) return {};
    Rational lo = parts_.front().lo - 1, hi = parts_.back().hi + 1;
    for (const auto& p : other.parts_) {
        lo = std::min(lo, Rational(p.lo - 1));
        hi = std::max(hi, Rational(p.hi + 1));
    }
    std::vector<Interval> comp;
    Rational cursor = lo;
    bool cursor_closed = true;
    for (const auto& p : other.parts_) {
        comp.push_back({cursor, p.lo, cursor_closed, !p.lo_closed});
        cursor = p.hi;
        cursor_closed = !p.hi_closed;
    }
    comp.push_back({cursor, hi, cursor_closed, true});
    return intersect(IntervalSet(std::move(comp)));
}

std::optional<Rational> IntervalSet::sample() const {
    if (parts_.empty()) return std::nullopt;
    return parts_.front().sample();
}

double IntervalSet::distance_to(double x) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : parts_) {
        const double lo = to_double(p.lo), hi = to_double(p.hi);
        const double d = x < lo ? lo - x : (x > hi ? x - hi : 0.0);
        best = std::min(best, d);
    }
    return best;
}

std::string IntervalSet::describe() const {
    if (parts_.empty()) return "{}";
    std::ostringstream os;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
        const auto& p = parts_[i];
        if (i) os << " u ";
        if (p.lo == p.hi) {
            os << '{' << p.lo << '}';
            continue;
        }
        os << (p.lo_closed ? '[' : '(') << p.lo << ", " << p.hi << (p.hi_closed ? ']' : ')');
    }
    return os.str();
}

PiecewiseLinear::PiecewiseLinear(std::vector<Breakpoint> breakpoints) : bp_(std::move(breakpoints)) {
    if (bp_.empty()) throw std::invalid_argument("piecewise-linear map needs at least one breakpoint");
    for (std::size_t i = 1; i < bp_.size(); ++i)
        if (!(bp_[i - 1].first < bp_[i].first))
            throw std::invalid_argument("breakpoints must be strictly increasing in x");
    fast_.reserve(bp_.size());
    for (const auto& [x, y] : bp_) fast_.emplace_back(to_double(x), to_double(y));
}

PiecewiseLinear PiecewiseLinear::identity(const Rational& lo, const Rational& hi) {
    if (lo == hi) return PiecewiseLinear({{lo, lo}});
    return PiecewiseLinear({{lo, lo}, {hi, hi}});
}

Rational PiecewiseLinear::operator()(const Rational& x) const {
    if (x < lo() || x > hi()) throw OutsideDomain("point " + to_string(x) + " outside [" + to_string(lo()) + ", " +
                                                  to_string(hi()) + "]");
    auto it = std::lower_bound(bp_.begin(), bp_.end(), x, [](const Breakpoint& b, const Rational& v) {
        return b.first < v;
    });
    if (it->first == x) return it->second;
    const auto& [x1, y1] = *it;
    const auto& [x0, y0] = *(it - 1);
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

double PiecewiseLinear::operator()(double x) const {
    const double lo_d = fast_.front().first, hi_d = fast_.back().first;
    if (x < lo_d - 1e-12 || x > hi_d + 1e-12)
        throw OutsideDomain("point outside the piecewise-linear domain");
    x = std::clamp(x, lo_d, hi_d);
    auto it = std::lower_bound(fast_.begin(), fast_.end(), x, [](const auto& b, double v) { return b.first < v; });
    if (it == fast_.end()) return fast_.back().second;
    if (it->first == x || it == fast_.begin()) return it->second;
    const auto& [x1, y1] = *it;
    const auto& [x0, y0] = *(it - 1);
    // Identity and constant pieces are returned without rounding.
    if (x0 == y0 && x1 == y1) return x;
    if (y0 == y1) return y0;
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

PiecewiseLinear PiecewiseLinear::after(const PiecewiseLinear& inner) const {
    std::vector<Rational> xs;
    for (const auto& b : inner.bp_) xs.push_back(b.first);
    // Points where inner crosses one of our breakpoints.
    for (std::size_t i = 1; i < inner.bp_.size(); ++i) {
        const auto& [x0, y0] = inner.bp_[i - 1];
        const auto& [x1, y1] = inner.bp_[i];
        if (y0 == y1) continue;
        const Rational ylo = std::min(y0, y1), yhi = std::max(y0, y1);
        for (const auto& b : bp_) {
            if (b.first <= ylo || b.first >= yhi) continue;
            xs.push_back(x0 + (b.first - y0) * (x1 - x0) / (y1 - y0));
        }
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::vector<Breakpoint> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.emplace_back(x, (*this)(inner(x)));
    return PiecewiseLinear(std::move(out)).simplified();
}

IntervalSet PiecewiseLinear::image(const Interval& part) const {
    if (part.empty()) return {};
    const Rational a = std::max(part.lo, lo()), b = std::min(part.hi, hi());
    if (b < a) return {};
    if (a == b) {
        if (!part.contains(a)) return {};
        return IntervalSet({Interval::point((*this)(a))});
    }
    // The image is connected: [min, max] of the values, with an extreme dropped when it is only reached
    // at an excluded endpoint.
    std::vector<Rational> xs{a};
    for (const auto& [x, y] : bp_)
        if (x > a && x < b) xs.push_back(x);
    xs.push_back(b);
    std::vector<Rational> ys;
    for (const auto& x : xs) ys.push_back((*this)(x));
    const Rational mn = *std::min_element(ys.begin(), ys.end());
    const Rational mx = *std::max_element(ys.begin(), ys.end());
    auto attained = [&](const Rational& v) {
        if (part.contains(a) && ys.front() == v) return true;
        if (part.contains(b) && ys.back() == v) return true;
        for (std::size_t i = 1; i + 1 < ys.size(); ++i)
            if (ys[i] == v) return true;
        for (std::size_t i = 0; i + 1 < ys.size(); ++i)
            if (ys[i] == v && ys[i + 1] == v) return true;
        return false;
    };
    return IntervalSet({{mn, mx, attained(mn), attained(mx)}});
}

IntervalSet PiecewiseLinear::preimage(const IntervalSet& set) const {
    std::vector<Interval> out;
    for (const auto& [x, y] : bp_)
        if (set.contains(y)) out.push_back(Interval::point(x));
    for (std::size_t i = 1; i < bp_.size(); ++i) {
        const auto& [x0, y0] = bp_[i - 1];
        const auto& [x1, y1] = bp_[i];
        if (y0 == y1) {
            if (set.contains(y0)) out.push_back(Interval::closed(x0, x1));
            continue;
        }
        const IntervalSet range({Interval::closed(std::min(y0, y1), std::max(y0, y1))});
        auto back = [&](const Rational& v) { return x0 + (v - y0) * (x1 - x0) / (y1 - y0); };
        const auto clipped = set.intersect(range);
        for (const auto& clip : clipped.parts()) {
            if (y1 > y0)
                out.push_back({back(clip.lo), back(clip.hi), clip.lo_closed, clip.hi_closed});
            else
                out.push_back({back(clip.hi), back(clip.lo), clip.hi_closed, clip.lo_closed});
        }
    }
    return IntervalSet(std::move(out));
}

PiecewiseLinear PiecewiseLinear::simplified() const {
    if (bp_.size() <= 2) return *this;
    std::vector<Breakpoint> out{bp_.front()};
    for (std::size_t i = 1; i + 1 < bp_.size(); ++i) {
        const auto& [x0, y0] = out.back();
        const auto& [x1, y1] = bp_[i];
        const auto& [x2, y2] = bp_[i + 1];
        if ((y1 - y0) * (x2 - x1) != (y2 - y1) * (x1 - x0)) out.push_back(bp_[i]);
    }
    out.push_back(bp_.back());
    return PiecewiseLinear(std::move(out));
}

bool PiecewiseLinear::operator==(const PiecewiseLinear& other) const {
    return simplified().bp_ == other.simplified().bp_;
}

} // namespace collapsekit
