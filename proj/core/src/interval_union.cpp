#include "qpjacobi/interval_union.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qpj {

IntervalUnion::IntervalUnion(std::vector<std::pair<double, double>> intervals)
    : intervals_(std::move(intervals)) {
    normalize();
}

IntervalUnion IntervalUnion::single(double lo, double hi) {
    IntervalUnion u;
    u.add(lo, hi);
    return u;
}

void IntervalUnion::add(double lo, double hi) {
    if (hi < lo) std::swap(lo, hi);
    intervals_.emplace_back(lo, hi);
    normalize();
}

void IntervalUnion::normalize() {
    for (auto& iv : intervals_) {
        if (iv.second < iv.first) std::swap(iv.first, iv.second);
    }
    std::sort(intervals_.begin(), intervals_.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& iv : intervals_) {
        if (!merged.empty() && iv.first <= merged.back().second) {
            merged.back().second = std::max(merged.back().second, iv.second);
        } else {
            merged.push_back(iv);
        }
    }
    intervals_ = std::move(merged);
}

IntervalUnion IntervalUnion::united(const IntervalUnion& other) const {
    std::vector<std::pair<double, double>> all = intervals_;
    all.insert(all.end(), other.intervals_.begin(), other.intervals_.end());
    return IntervalUnion(std::move(all));
}

double IntervalUnion::mes() const {
    double m = 0.0;
    for (const auto& [lo, hi] : intervals_) m += hi - lo;
    return m;
}

bool IntervalUnion::contains(double x) const {
    auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x,
                               [](double v, const auto& iv) { return v < iv.first; });
    if (it == intervals_.begin()) return false;
    --it;
    return x <= it->second;
}

double IntervalUnion::distance(double x) const {
    if (intervals_.empty()) return std::numeric_limits<double>::infinity();
    auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x,
                               [](double v, const auto& iv) { return v < iv.first; });
    double d = std::numeric_limits<double>::infinity();
    if (it != intervals_.end()) d = std::min(d, it->first - x);
    if (it != intervals_.begin()) {
        --it;
        if (x <= it->second) return 0.0;
        d = std::min(d, x - it->second);
    }
    return d;
}

IntervalUnion IntervalUnion::fattened(double delta) const {
    std::vector<std::pair<double, double>> fat;
    fat.reserve(intervals_.size());
    for (const auto& [lo, hi] : intervals_) fat.emplace_back(lo - delta, hi + delta);
    return IntervalUnion(std::move(fat));
}

std::string bad_set_to_json(const IntervalUnion& set, const BadSetMetadata& meta) {
    nlohmann::ordered_json j;
    j["metadata"] = {{"tau", meta.tau},   {"sigma", meta.sigma}, {"l", meta.l},
                     {"omega", meta.omega}, {"grid", meta.grid},   {"model_hash", meta.model_hash}};
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& [lo, hi] : set.intervals()) arr.push_back({lo, hi});
    j["intervals"] = arr;
    return j.dump(2);
}

IntervalUnion bad_set_from_json(const std::string& text, BadSetMetadata* meta_out) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (meta_out && j.contains("metadata")) {
        const auto& m = j["metadata"];
        meta_out->tau = m.value("tau", 0.0);
        meta_out->sigma = m.value("sigma", 0.0);
        meta_out->l = m.value("l", 0L);
        meta_out->omega = m.value("omega", 0.0);
        meta_out->grid = m.value("grid", 0L);
        meta_out->model_hash = m.value("model_hash", std::string{});
    }
    std::vector<std::pair<double, double>> ivs;
    for (const auto& e : j.at("intervals")) {
        ivs.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
    }
    return IntervalUnion(std::move(ivs));
}

IntervalUnion load_bad_set(const std::string& path, BadSetMetadata* meta_out) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("bad-set file not readable: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return bad_set_from_json(ss.str(), meta_out);
}

}  // namespace qpj
