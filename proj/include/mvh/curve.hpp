#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "mvh/common.hpp"

namespace mvh {

/// Interpolation rule of a deterministic coefficient curve.
/// Piecewise-constant curves are right-continuous with left limits;
/// piecewise-linear curves are continuous. Past the last node both
/// extrapolate flat.
enum class Interp { PiecewiseConstant, PiecewiseLinear };

struct CurveNode {
    double t;
    double v;
};

/// Deterministic curve t -> value on [0, infinity), defined by ordered nodes.
/// Node times must be strictly increasing and start at t = 0.
class Curve {
public:
    Curve() : nodes_{{0.0, 0.0}}, kind_(Interp::PiecewiseConstant) {}

    Curve(std::vector<CurveNode> nodes, Interp kind)
        : nodes_(std::move(nodes)), kind_(kind) {
        if (nodes_.empty())
            throw ValidationError("curve: at least one node required");
        if (nodes_.front().t != 0.0)
            throw ValidationError("curve: first node must be at t=0");
        for (std::size_t i = 1; i < nodes_.size(); ++i) {
            if (!(nodes_[i].t > nodes_[i - 1].t))
                throw ValidationError("curve: node times must be strictly increasing");
        }
        for (const auto& n : nodes_) {
            if (!std::isfinite(n.t) || !std::isfinite(n.v))
                throw ValidationError("curve: nodes must be finite");
        }
    }

    static Curve constant(double v) {
        return Curve({{0.0, v}}, Interp::PiecewiseConstant);
    }

    Interp interpolation() const { return kind_; }
    const std::vector<CurveNode>& nodes() const { return nodes_; }
    bool is_constant() const { return nodes_.size() == 1; }

    /// Value at t (cadlag convention for piecewise-constant curves).
    double value(double t) const {
        const std::size_t i = segment_index(t);
        return eval_on_segment(i, t);
    }

    /// Left limit at t; differs from value(t) only at interior nodes of a
    /// piecewise-constant curve.
    double value_left(double t) const {
        std::size_t i = segment_index(t);
        if (i > 0 && nodes_[i].t == t) i -= 1;
        return eval_on_segment(i, t);
    }

    double min_node_value() const {
        double m = nodes_.front().v;
        for (const auto& n : nodes_) m = std::min(m, n.v);
        return m;
    }
    double max_abs_node_value() const {
        double m = 0.0;
        for (const auto& n : nodes_) m = std::max(m, std::abs(n.v));
        return m;
    }

    /// Exact integral over [a, b] (piecewise closed form, not quadrature).
    double integral(double a, double b) const {
        if (a == b) return 0.0;
        if (a > b) return -integral(b, a);
        double sum = 0.0;
        double lo = a;
        while (lo < b) {
            const double hi = std::min(b, next_breakpoint(lo));
            double c0, c1;
            local_linear(lo, hi, c0, c1);
            sum += c0 * (hi - lo) + 0.5 * c1 * (hi * hi - lo * lo);
            lo = hi;
        }
        return sum;
    }

    /// Exact linear representation v(t) = c0 + c1*t on [a, b], valid when
    /// (a, b) contains no node.
    void local_linear(double a, double b, double& c0, double& c1) const {
        const std::size_t i = segment_index(a);
        if (kind_ == Interp::PiecewiseConstant || i + 1 >= nodes_.size()) {
            c0 = nodes_[i].v;
            c1 = 0.0;
            return;
        }
        const auto& l = nodes_[i];
        const auto& r = nodes_[i + 1];
        c1 = (r.v - l.v) / (r.t - l.t);
        c0 = l.v - c1 * l.t;
        (void)b;
    }

    /// Append node times lying strictly inside (lo, hi).
    void collect_breakpoints(double lo, double hi, std::vector<double>& out) const {
        for (const auto& n : nodes_)
            if (n.t > lo && n.t < hi) out.push_back(n.t);
    }

private:
    // Index of the segment whose left node is the last node with time <= t.
    std::size_t segment_index(double t) const {
        if (t <= nodes_.front().t) return 0;
        auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t,
                                   [](double x, const CurveNode& n) { return x < n.t; });
        return static_cast<std::size_t>(it - nodes_.begin()) - 1;
    }

    double eval_on_segment(std::size_t i, double t) const {
        if (kind_ == Interp::PiecewiseConstant || i + 1 >= nodes_.size())
            return nodes_[i].v;
        const auto& l = nodes_[i];
        const auto& r = nodes_[i + 1];
        const double w = (t - l.t) / (r.t - l.t);
        return l.v + w * (r.v - l.v);
    }

    double next_breakpoint(double t) const {
        auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t,
                                   [](double x, const CurveNode& n) { return x < n.t; });
        if (it == nodes_.end()) return std::numeric_limits<double>::infinity();
        return it->t;
    }

    std::vector<CurveNode> nodes_;
    Interp kind_;
};

/// Exact integral of the product of two curves over [a, b]
/// (linear x linear = quadratic per merged segment).
inline double integral_product(const Curve& f, const Curve& g, double a, double b) {
    if (a == b) return 0.0;
    if (a > b) return -integral_product(f, g, b, a);
    std::vector<double> cuts;
    f.collect_breakpoints(a, b, cuts);
    g.collect_breakpoints(a, b, cuts);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    double sum = 0.0;
    double lo = a;
    for (double hi : cuts) {
        if (!(hi > lo)) continue;
        double f0, f1, g0, g1;
        f.local_linear(lo, hi, f0, f1);
        g.local_linear(lo, hi, g0, g1);
        const double q0 = f0 * g0;
        const double q1 = f0 * g1 + f1 * g0;
        const double q2 = f1 * g1;
        sum += q0 * (hi - lo) + 0.5 * q1 * (hi * hi - lo * lo)
             + q2 * (hi * hi * hi - lo * lo * lo) / 3.0;
        lo = hi;
    }
    return sum;
}

} // namespace mvh
