#pragma once

#include <string>
#include <utility>
#include <vector>

namespace qpj {

/// Sorted disjoint union of closed real intervals with the measure (mes) and
/// complexity (com = interval count) bookkeeping used for bad sets.
class IntervalUnion {
  public:
    IntervalUnion() = default;
    explicit IntervalUnion(std::vector<std::pair<double, double>> intervals);

    static IntervalUnion single(double lo, double hi);

    void add(double lo, double hi);  // union with one interval, re-merging
    IntervalUnion united(const IntervalUnion& other) const;

    double mes() const;
    std::size_t com() const { return intervals_.size(); }
    bool empty() const { return intervals_.empty(); }

    bool contains(double x) const;
    /// Distance from x to the set (0 when inside).
    double distance(double x) const;

    /// [lo - delta, hi + delta] on every component, then re-merge; mes grows by
    /// at most 2 delta com(pre-merge).
    IntervalUnion fattened(double delta) const;

    const std::vector<std::pair<double, double>>& intervals() const { return intervals_; }

  private:
    void normalize();
    std::vector<std::pair<double, double>> intervals_;
};

/// Serialization (JSON arrays of [lo, hi] with a metadata header).
struct BadSetMetadata {
    double tau = 0.0;
    double sigma = 0.0;
    long l = 0;
    double omega = 0.0;
    long grid = 0;
    std::string model_hash;
};

std::string bad_set_to_json(const IntervalUnion& set, const BadSetMetadata& meta);
IntervalUnion bad_set_from_json(const std::string& text, BadSetMetadata* meta_out = nullptr);
IntervalUnion load_bad_set(const std::string& path, BadSetMetadata* meta_out = nullptr);

}  // namespace qpj
