#include "recp/interval_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace recp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

IntervalSet::IntervalSet(std::initializer_list<Interval> pieces) : pieces_(pieces) { normalize(); }

IntervalSet::IntervalSet(std::vector<Interval> pieces) : pieces_(std::move(pieces)) { normalize(); }

IntervalSet IntervalSet::whole_line() { return IntervalSet{{-kInf, kInf}}; }

IntervalSet IntervalSet::single(double lo, double hi) { return IntervalSet{{lo, hi}}; }

bool IntervalSet::is_whole_line() const noexcept {
    return pieces_.size() == 1 && pieces_.front().lo == -kInf && pieces_.front().hi == kInf;
}

bool IntervalSet::is_bounded() const noexcept {
    return pieces_.empty() || (std::isfinite(pieces_.front().lo) && std::isfinite(pieces_.back().hi));
}

bool IntervalSet::contains(double y) const noexcept {
    // first piece whose upper end is >= y
    auto it = std::lower_bound(pieces_.begin(), pieces_.end(), y,
                               [](const Interval& p, double v) { return p.hi < v; });
    return it != pieces_.end() && it->lo <= y;
}

double IntervalSet::size() const noexcept {
    double total = 0.0;
    for (const auto& p : pieces_) total += p.length();
    return total;
}

Interval IntervalSet::hull() const {
    if (pieces_.empty()) throw std::logic_error("hull of an empty IntervalSet");
    return {pieces_.front().lo, pieces_.back().hi};
}

void IntervalSet::insert(Interval piece) {
    pieces_.push_back(piece);
    normalize();
}

IntervalSet IntervalSet::unite(const IntervalSet& other) const {
    std::vector<Interval> all = pieces_;
    all.insert(all.end(), other.pieces_.begin(), other.pieces_.end());
    return IntervalSet(std::move(all));
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
    std::vector<Interval> out;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < pieces_.size() && j < other.pieces_.size()) {
        const Interval& a = pieces_[i];
        const Interval& b = other.pieces_[j];
        const double lo = std::max(a.lo, b.lo);
        const double hi = std::min(a.hi, b.hi);
        if (lo <= hi) out.push_back({lo, hi});
        if (a.hi < b.hi) {
            ++i;
        } else {
            ++j;
        }
    }
    return IntervalSet(std::move(out));
}

bool IntervalSet::is_subset_of(const IntervalSet& other) const {
    return std::all_of(pieces_.begin(), pieces_.end(), [&](const Interval& p) {
        auto it = std::lower_bound(other.pieces_.begin(), other.pieces_.end(), p.lo,
                                   [](const Interval& q, double v) { return q.hi < v; });
        return it != other.pieces_.end() && it->lo <= p.lo && p.hi <= it->hi;
    });
}

std::string IntervalSet::to_string() const {
    std::ostringstream os;
    os << *this;
    return os.str();
}

void IntervalSet::normalize() {
    std::erase_if(pieces_, [](const Interval& p) { return std::isnan(p.lo) || std::isnan(p.hi) || p.lo > p.hi; });
    std::sort(pieces_.begin(), pieces_.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi); });
    std::vector<Interval> merged;
    merged.reserve(pieces_.size());
    for (const auto& p : pieces_) {
        if (!merged.empty() && p.lo <= merged.back().hi) {
            merged.back().hi = std::max(merged.back().hi, p.hi);
        } else {
            merged.push_back(p);
        }
    }
    pieces_ = std::move(merged);
}

std::ostream& operator<<(std::ostream& os, const IntervalSet& set) {
    if (set.is_empty()) return os << "{}";
    bool first = true;
    for (const auto& p : set.intervals()) {
        if (!first) os << " U ";
        os << '[' << p.lo << ", " << p.hi << ']';
        first = false;
    }
    return os;
}

} // namespace recp
