#ifndef COLLAPSEKIT_PL1D_HPP
#define COLLAPSEKIT_PL1D_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace collapsekit {

using Rational = boost::multiprecision::cpp_rational;

Rational to_rational(double x);
double to_double(const Rational& q);
std::string to_string(const Rational& q);

struct Interval {
    Rational lo;
    Rational hi;
    bool lo_closed = true;
    bool hi_closed = true;

    static Interval closed(Rational a, Rational b) { return {std::move(a), std::move(b), true, true}; }
    static Interval open(Rational a, Rational b) { return {std::move(a), std::move(b), false, false}; }
    static Interval point(const Rational& a) { return {a, a, true, true}; }

    bool empty() const { return hi < lo || (hi == lo && !(lo_closed && hi_closed)); }
    bool contains(const Rational& x) const;
    /// Some point of the interval (midpoint when nondegenerate).
    Rational sample() const;
    bool operator==(const Interval&) const = default;
};

/// Finite union of intervals, kept sorted and merged.
class IntervalSet {
public:
    IntervalSet() = default;
    explicit IntervalSet(std::vector<Interval> parts);

    const std::vector<Interval>& parts() const { return parts_; }
    bool empty() const { return parts_.empty(); }
    bool contains(const Rational& x) const;
    IntervalSet unite(const IntervalSet& other) const;
    IntervalSet intersect(const IntervalSet& other) const;
    /// Points of this set outside `other`.
    IntervalSet minus(const IntervalSet& other) const;
    bool intersects(const IntervalSet& other) const { return !intersect(other).empty(); }
    std::optional<Rational> sample() const;
    /// Infimum of |x - y| over the set; +inf when empty.
    double distance_to(double x) const;
    std::string describe() const;
    bool operator==(const IntervalSet&) const = default;

private:
    std::vector<Interval> parts_;
};

/// Continuous piecewise-linear map on [lo, hi] given by its breakpoints, evaluated exactly.
class PiecewiseLinear {
public:
    using Breakpoint = std::pair<Rational, Rational>;

    explicit PiecewiseLinear(std::vector<Breakpoint> breakpoints);
    static PiecewiseLinear identity(const Rational& lo, const Rational& hi);

    const std::vector<Breakpoint>& breakpoints() const { return bp_; }
    const Rational& lo() const { return bp_.front().first; }
    const Rational& hi() const { return bp_.back().first; }

    Rational operator()(const Rational& x) const;
    double operator()(double x) const;

    /// (*this) o inner.
    PiecewiseLinear after(const PiecewiseLinear& inner) const;
    /// Image of an interval of the domain.
    IntervalSet image(const Interval& part) const;
    /// Exact preimage of a set.
    IntervalSet preimage(const IntervalSet& set) const;
    /// Drops collinear interior breakpoints.
    PiecewiseLinear simplified() const;

    bool operator==(const PiecewiseLinear& other) const;

private:
    std::vector<Breakpoint> bp_;
    std::vector<std::pair<double, double>> fast_;
};

} // namespace collapsekit

#endif
