#pragma once

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace recp {

// Closed interval [lo, hi]; lo may be -inf and hi may be +inf.
struct Interval {
    double lo;
    double hi;

    [[nodiscard]] bool contains(double y) const noexcept { return lo <= y && y <= hi; }
    [[nodiscard]] double length() const noexcept { return hi - lo; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

// Finite union of disjoint closed intervals, kept sorted and with
// overlapping or touching pieces coalesced. Unsupervised prediction sets.
class IntervalSet {
public:
    IntervalSet() = default;
    IntervalSet(std::initializer_list<Interval> pieces);
    explicit IntervalSet(std::vector<Interval> pieces);

    static IntervalSet empty() { return {}; }
    static IntervalSet whole_line();
    static IntervalSet single(double lo, double hi);

    [[nodiscard]] bool is_empty() const noexcept { return pieces_.empty(); }
    [[nodiscard]] bool is_whole_line() const noexcept;
    [[nodiscard]] bool is_bounded() const noexcept;
    [[nodiscard]] bool contains(double y) const noexcept;

    // Lebesgue measure; +inf if any endpoint is infinite.
    [[nodiscard]] double size() const noexcept;

    [[nodiscard]] std::span<const Interval> intervals() const noexcept { return pieces_; }
    [[nodiscard]] std::size_t piece_count() const noexcept { return pieces_.size(); }

    // Convex hull of the set; only meaningful when non-empty.
    [[nodiscard]] Interval hull() const;

    void insert(Interval piece);

    [[nodiscard]] IntervalSet unite(const IntervalSet& other) const;
    [[nodiscard]] IntervalSet intersect(const IntervalSet& other) const;
    [[nodiscard]] bool is_subset_of(const IntervalSet& other) const;

    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

private:
    void normalize();

    std::vector<Interval> pieces_;
};

std::ostream& operator<<(std::ostream& os, const IntervalSet& set);

// Subset of {0, 1}; supervised binary prediction sets.
struct LabelSet {
    bool contains_zero = false;
    bool contains_one = false;

    static LabelSet both() { return {true, true}; }
    static LabelSet none() { return {}; }

    [[nodiscard]] bool contains(int label) const noexcept {
        return label == 0 ? contains_zero : (label == 1 && contains_one);
    }
    [[nodiscard]] int size() const noexcept { return int{contains_zero} + int{contains_one}; }

    [[nodiscard]] LabelSet intersect(const LabelSet& o) const noexcept {
        return {contains_zero && o.contains_zero, contains_one && o.contains_one};
    }
    [[nodiscard]] LabelSet unite(const LabelSet& o) const noexcept {
        return {contains_zero || o.contains_zero, contains_one || o.contains_one};
    }

    friend bool operator==(const LabelSet&, const LabelSet&) = default;
};

} // namespace recp
