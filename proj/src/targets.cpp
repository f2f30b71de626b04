#include "fraclap/targets.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fraclap/errors.hpp"

namespace fraclap {

void validate_targets(const TargetSet& ts) {
    if (ts.targets.empty()) {
        throw UsageError("target set is empty");
    }
    if (!(ts.eps > 0.0) || ts.eps >= 0.5) {
        throw UsageError("eps must lie in (0, 0.5)");
    }
    double kmax = 0.0;
    for (const Target& t : ts.targets) {
        if (t.kappa < 0.1 || t.kappa > 10.0) {
            throw UsageError("kappa must be of order one (within [0.1, 10])");
        }
        if (!in_closed_unit_square(t.center)) {
            throw UsageError("target centers must lie in the unit square");
        }
        kmax = std::max(kmax, t.kappa);
    }
    const double min_sep = ts.separation_factor * ts.eps * kmax;
    // Pairwise distances are torus distances under periodic boundaries.
    auto separation = [&](Point2 a, Point2 b) {
        double d1 = a.x1 - b.x1;
        double d2 = a.x2 - b.x2;
        if (ts.boundary == BoundaryKind::Periodic) {
            d1 -= std::round(d1);
            d2 -= std::round(d2);
        }
        return std::hypot(d1, d2);
    };
    for (std::size_t i = 0; i < ts.targets.size(); ++i) {
        for (std::size_t j = i + 1; j < ts.targets.size(); ++j) {
            double d = separation(ts.targets[i].center, ts.targets[j].center);
            if (d < min_sep) {
                std::ostringstream msg;
                msg << "targets " << i << " and " << j << " are " << d
                    << " apart, below the well-separated threshold " << min_sep
                    << " (= separation_factor * eps * max kappa); the matched-"
                       "asymptotics regime assumes order-one separations";
                throw RegimeError(msg.str());
            }
        }
        if (ts.boundary == BoundaryKind::Neumann) {
            double d = dist_to_boundary(ts.targets[i].center);
            if (d < min_sep) {
                std::ostringstream msg;
                msg << "target " << i << " sits " << d
                    << " from the reflecting boundary, below the well-separated "
                       "threshold "
                    << min_sep;
                throw RegimeError(msg.str());
            }
        }
    }
}

void validate_split_targets(const TargetSet& ts) {
    validate_targets(ts);
    int desired = 0;
    for (const Target& t : ts.targets) {
        if (t.role == TargetRole::Desired) ++desired;
    }
    if (desired != 1 || ts.targets[0].role != TargetRole::Desired) {
        throw UsageError(
            "splitting requires exactly one desired target, stored at index 0");
    }
}

}  // namespace fraclap
