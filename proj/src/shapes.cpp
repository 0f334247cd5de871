#include "geomotion/shapes.hpp"

#include <cmath>
#include <limits>

namespace geomotion {

Shape Shape::sphere(double radius, const Eigen::Vector3d& center) {
    if (radius <= 0.0) throw DimensionError("sphere radius must be > 0");
    Shape s;
    s.kind = Kind::Sphere;
    s.radius = radius;
    s.pose = Eigen::Isometry3d(Eigen::Translation3d(center));
    return s;
}

Shape Shape::capsule(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double radius) {
    if (radius <= 0.0) throw DimensionError("capsule radius must be > 0");
    Shape s;
    s.kind = Kind::Capsule;
    s.a = a;
    s.b = b;
    s.radius = radius;
    return s;
}

Shape Shape::box(const Eigen::Vector3d& half_extents, const Eigen::Isometry3d& pose) {
    if ((half_extents.array() <= 0.0).any()) throw DimensionError("box half-extents must be > 0");
    Shape s;
    s.kind = Kind::Box;
    s.half_extents = half_extents;
    s.pose = pose;
    return s;
}

namespace {

Eigen::Vector3d closest_on_segment(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                   const Eigen::Vector3d& x, double* t_out = nullptr) {
    const Eigen::Vector3d ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp((x - a).dot(ab) / len2, 0.0, 1.0);
    if (t_out) *t_out = t;
    return a + t * ab;
}

/// Unit vector orthogonal to v, deterministic.
Eigen::Vector3d any_orthogonal(const Eigen::Vector3d& v) {
    int k = 0;
    v.cwiseAbs().minCoeff(&k);
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e(k) = 1.0;
    Eigen::Vector3d w = v.cross(e);
    const double n = w.norm();
    if (n < 1e-15) return Eigen::Vector3d::UnitX();
    return w / n;
}

double box_local_sdf(const Eigen::Vector3d& half, const Eigen::Vector3d& p) {
    const Eigen::Vector3d q = p.cwiseAbs() - half;
    const double outside = q.cwiseMax(0.0).norm();
    const double inside = std::min(q.maxCoeff(), 0.0);
    return outside + inside;
}

Eigen::Vector3d box_local_closest(const Eigen::Vector3d& half, const Eigen::Vector3d& p) {
    const Eigen::Vector3d clamped = p.cwiseMax(-half).cwiseMin(half);
    if ((clamped - p).squaredNorm() > 0.0) return clamped;  // outside: clamp hits the surface
    // Inside: project to the nearest face, ties to the lowest axis index.
    int best = 0;
    double best_gap = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
        const double gap = half(k) - std::abs(p(k));
        if (gap < best_gap) {
            best_gap = gap;
            best = k;
        }
    }
    Eigen::Vector3d s = p;
    s(best) = p(best) >= 0.0 ? half(best) : -half(best);
    return s;
}

}  // namespace

double sdf(const Shape& shape, const Eigen::Vector3d& x) {
    switch (shape.kind) {
        case Shape::Kind::Sphere:
            return (x - shape.pose.translation()).norm() - shape.radius;
        case Shape::Kind::Capsule: {
            const Eigen::Vector3d a = shape.pose * shape.a;
            const Eigen::Vector3d b = shape.pose * shape.b;
            return (x - closest_on_segment(a, b, x)).norm() - shape.radius;
        }
        case Shape::Kind::Box:
            return box_local_sdf(shape.half_extents, shape.pose.inverse() * x);
    }
    throw Error("unknown shape kind");
}

Eigen::Vector3d closest_point(const Shape& shape, const Eigen::Vector3d& x) {
    switch (shape.kind) {
        case Shape::Kind::Sphere: {
            const Eigen::Vector3d c = shape.pose.translation();
            Eigen::Vector3d dir = x - c;
            const double n = dir.norm();
            if (n < 1e-15)
                dir = shape.pose.linear() * Eigen::Vector3d::UnitX();
            else
                dir /= n;
            return c + shape.radius * dir;
        }
        case Shape::Kind::Capsule: {
            const Eigen::Vector3d a = shape.pose * shape.a;
            const Eigen::Vector3d b = shape.pose * shape.b;
            const Eigen::Vector3d s = closest_on_segment(a, b, x);
            Eigen::Vector3d dir = x - s;
            const double n = dir.norm();
            if (n < 1e-15)
                dir = any_orthogonal(b - a);
            else
                dir /= n;
            return s + shape.radius * dir;
        }
        case Shape::Kind::Box: {
            const Eigen::Isometry3d inv = shape.pose.inverse();
            return shape.pose * box_local_closest(shape.half_extents, inv * x);
        }
    }
    throw Error("unknown shape kind");
}

double segment_segment_closest(const Eigen::Vector3d& p1, const Eigen::Vector3d& q1,
                               const Eigen::Vector3d& p2, const Eigen::Vector3d& q2,
                               Eigen::Vector3d& c1, Eigen::Vector3d& c2) {
    // Ericson, Real-Time Collision Detection, 5.1.9.
    const Eigen::Vector3d d1 = q1 - p1;
    const Eigen::Vector3d d2 = q2 - p2;
    const Eigen::Vector3d r = p1 - p2;
    const double a = d1.squaredNorm();
    const double e = d2.squaredNorm();
    const double f = d2.dot(r);
    constexpr double kEps = 1e-14;

    double s = 0.0, t = 0.0;
    if (a <= kEps && e <= kEps) {
        c1 = p1;
        c2 = p2;
        return (c1 - c2).squaredNorm();
    }
    if (a <= kEps) {
        t = std::clamp(f / e, 0.0, 1.0);
    } else {
        const double c = d1.dot(r);
        if (e <= kEps) {
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            const double b = d1.dot(d2);
            const double denom = a * e - b * b;
            if (denom > kEps)
                s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
            t = (b * s + f) / e;
            if (t < 0.0) {
                t = 0.0;
                s = std::clamp(-c / a, 0.0, 1.0);
            } else if (t > 1.0) {
                t = 1.0;
                s = std::clamp((b - c) / a, 0.0, 1.0);
            }
        }
    }
    c1 = p1 + s * d1;
    c2 = p2 + t * d2;
    return (c1 - c2).squaredNorm();
}

namespace {

struct SegmentShapeResult {
    double distance = 0.0;                 // between surfaces, negative if penetrating
    Eigen::Vector3d on_capsule_surface = Eigen::Vector3d::Zero();
    Eigen::Vector3d on_shape_surface = Eigen::Vector3d::Zero();
};

/// Closest features between a world-space capsule (segment + radius) and a
/// shape. Directions resolve deterministically in degenerate alignments.
SegmentShapeResult capsule_shape_closest(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                         double radius, const Shape& shape) {
    SegmentShapeResult res;
    switch (shape.kind) {
        case Shape::Kind::Sphere: {
            const Eigen::Vector3d c = shape.pose.translation();
            const Eigen::Vector3d s = closest_on_segment(a, b, c);
            Eigen::Vector3d dir = c - s;
            const double n = dir.norm();
            dir = n < 1e-15 ? any_orthogonal(b - a) : Eigen::Vector3d(dir / n);
            res.distance = n - shape.radius - radius;
            res.on_capsule_surface = s + radius * dir;
            res.on_shape_surface = c - shape.radius * dir;
            return res;
        }
        case Shape::Kind::Capsule: {
            const Eigen::Vector3d sa = shape.pose * shape.a;
            const Eigen::Vector3d sb = shape.pose * shape.b;
            Eigen::Vector3d c1, c2;
            const double d2 = segment_segment_closest(a, b, sa, sb, c1, c2);
            const double n = std::sqrt(d2);
            Eigen::Vector3d dir = n < 1e-15 ? any_orthogonal(b - a) : Eigen::Vector3d((c2 - c1) / n);
            res.distance = n - shape.radius - radius;
            res.on_capsule_surface = c1 + radius * dir;
            res.on_shape_surface = c2 - shape.radius * dir;
            return res;
        }
        case Shape::Kind::Box: {
            // Coarse sampling of the segment plus ternary refinement of the
            // signed point-box distance; error is far below barrier scales.
            constexpr int kSamples = 64;
            const Eigen::Isometry3d inv = shape.pose.inverse();
            const Eigen::Vector3d a_local = inv * a;
            const Eigen::Vector3d ab_local = (inv * b) - a_local;
            auto f = [&](double t) { return box_local_sdf(shape.half_extents, a_local + t * ab_local); };
            int best = 0;
            double best_val = std::numeric_limits<double>::infinity();
            for (int i = 0; i <= kSamples; ++i) {
                const double v = f(static_cast<double>(i) / kSamples);
                if (v < best_val) {
                    best_val = v;
                    best = i;
                }
            }
            double lo = std::max(0.0, (best - 1.0) / kSamples);
            double hi = std::min(1.0, (best + 1.0) / kSamples);
            for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
                const double m1 = lo + (hi - lo) / 3.0;
                const double m2 = hi - (hi - lo) / 3.0;
                if (f(m1) <= f(m2))
                    hi = m2;
                else
                    lo = m1;
            }
            const double t = 0.5 * (lo + hi);
            const Eigen::Vector3d s = a + t * (b - a);
            const Eigen::Vector3d surf = shape.pose * box_local_closest(shape.half_extents, a_local + t * ab_local);
            Eigen::Vector3d dir = surf - s;
            const double core = sdf(shape, s);
            const double n = dir.norm();
            dir = n < 1e-15 ? any_orthogonal(b - a) : Eigen::Vector3d(dir / n);
            if (core < 0.0) dir = -dir;  // penetrating: surface lies opposite the region interior
            res.distance = core - radius;
            res.on_capsule_surface = s + radius * dir;
            res.on_shape_surface = surf;
            return res;
        }
    }
    throw Error("unknown shape kind");
}

}  // namespace

ClosestPair chain_region_query(const KinematicChain& chain, const ChainState& state,
                               const Shape& region, const std::vector<int>& candidate_links) {
    ClosestPair best;
    best.distance = std::numeric_limits<double>::infinity();

    auto consider_link = [&](int link) {
        const Eigen::Isometry3d& pose = state.link_pose[link];
        for (const LocalCapsule& cap : chain.links()[link].capsules) {
            const Eigen::Vector3d a = pose * cap.a;
            const Eigen::Vector3d b = pose * cap.b;
            const SegmentShapeResult r = capsule_shape_closest(a, b, cap.radius, region);
            if (r.distance < best.distance) {
                best.valid = true;
                best.distance = r.distance;
                best.point_on_robot = r.on_capsule_surface;
                best.point_on_region = r.on_shape_surface;
                best.robot_point = LinkPoint{link, pose.inverse() * r.on_capsule_surface};
            }
        }
    };

    if (candidate_links.empty()) {
        for (int link = 0; link < chain.dof(); ++link) consider_link(link);
    } else {
        for (int link : candidate_links) {
            if (link < 0 || link >= chain.dof())
                throw DimensionError("candidate link index out of range");
            consider_link(link);
        }
    }
    if (best.valid) best.direction = best.point_on_region - best.point_on_robot;
    return best;
}

std::vector<ClosestPair> self_collision_query(const KinematicChain& chain,
                                              const ChainState& state,
                                              double activation_distance) {
    std::vector<ClosestPair> pairs;
    const int d = chain.dof();
    for (int i = 0; i + 2 < d; ++i) {
        for (int j = i + 2; j < d; ++j) {
            for (const LocalCapsule& ci : chain.links()[i].capsules) {
                const Eigen::Vector3d ai = state.link_pose[i] * ci.a;
                const Eigen::Vector3d bi = state.link_pose[i] * ci.b;
                for (const LocalCapsule& cj : chain.links()[j].capsules) {
                    const Eigen::Vector3d aj = state.link_pose[j] * cj.a;
                    const Eigen::Vector3d bj = state.link_pose[j] * cj.b;
                    Eigen::Vector3d c1, c2;
                    const double core = std::sqrt(segment_segment_closest(ai, bi, aj, bj, c1, c2));
                    const double dist = core - ci.radius - cj.radius;
                    if (dist >= activation_distance) continue;
                    Eigen::Vector3d dir = c2 - c1;
                    dir = core < 1e-15 ? any_orthogonal(bi - ai) : Eigen::Vector3d(dir / core);
                    ClosestPair pair;
                    pair.valid = true;
                    pair.distance = dist;
                    pair.point_on_robot = c1 + ci.radius * dir;
                    pair.point_on_region = c2 - cj.radius * dir;
                    pair.direction = pair.point_on_region - pair.point_on_robot;
                    pair.robot_point = LinkPoint{i, state.link_pose[i].inverse() * pair.point_on_robot};
                    pair.region_link = j;
                    pair.region_point = LinkPoint{j, state.link_pose[j].inverse() * pair.point_on_region};
                    pairs.push_back(pair);
                }
            }
        }
    }
    return pairs;
}

}  // namespace geomotion
