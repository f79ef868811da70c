#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "amorph/denjoy.hpp"
#include "amorph/systems.hpp"

namespace amorph {

// Evaluates the catalog maps on explicit points.  Ensembles use the exact
// per-kind orbit iterators instead; this is the plain (spec, point) -> point
// contract surface, sharing the same map formulas.
class SystemRuntime {
public:
    explicit SystemRuntime(SystemSpec spec,
                           std::shared_ptr<const DenjoyModel> shared_denjoy = nullptr)
        : spec_(std::move(spec)) {
        detail::validate_spec(spec_);
        coord_layout(spec_, layout_);
        init(spec_, shared_denjoy);
    }

    const SystemSpec& spec() const { return spec_; }
    std::size_t dim() const { return layout_.size(); }
    const std::vector<CoordKind>& layout() const { return layout_; }

    Point step(const Point& p) const {
        if (p.coords.size() != dim()) throw std::invalid_argument("point dimension mismatch");
        Point out = p;
        std::size_t off = 0;
        step_rec(spec_, p, out, off, 0);
        return out;
    }

    Point step_n(Point p, std::uint64_t m) const {
        for (std::uint64_t k = 0; k < m; ++k) p = step(p);
        return p;
    }

    double distance(const Point& a, const Point& b) const { return metric(spec_, a, b); }

    const DenjoyModel* denjoy_model() const { return denjoy_.get(); }
    std::shared_ptr<const DenjoyModel> denjoy_shared() const { return denjoy_; }

private:
    void init(const SystemSpec& s, std::shared_ptr<const DenjoyModel> shared) {
        if (s.kind == SystemKind::denjoy && !denjoy_) {
            denjoy_ = shared ? std::move(shared)
                             : std::make_shared<DenjoyModel>(
                                   s.circle_or("alpha", Fixed128::golden()));
        }
        for (const auto& c : s.children) init(c, shared);
    }

    void step_rec(const SystemSpec& s, const Point& in, Point& out, std::size_t& off,
                  int depth) const {
        switch (s.kind) {
            case SystemKind::rotation:
                out.coords[off] = frac_part(in.coords[off] + s.value("alpha"));
                off += 1;
                break;
            case SystemKind::doubling:
                out.coords[off] = frac_part(2.0 * in.coords[off]);
                off += 1;
                break;
            case SystemKind::torus_shear:
                out.coords[off] = in.coords[off];
                out.coords[off + 1] = frac_part(in.coords[off] + in.coords[off + 1]);
                off += 2;
                break;
            case SystemKind::morse_smale:
                out.coords[off] = in.coords[off] * in.coords[off];
                off += 1;
                break;
            case SystemKind::denjoy:
                out.coords[off] = denjoy_->step_point(in.coords[off]);
                off += 1;
                break;
            case SystemKind::annulus_transient: {
                AnnulusAnchors an(s.value_or("x0", 0.5));
                double x = in.coords[off];
                out.coords[off] = x * x;
                out.coords[off + 1] = frac_part(in.coords[off + 1] + annulus_alpha(x, an));
                off += 2;
                break;
            }
            case SystemKind::pinched: {
                double theta = in.coords[off];
                double omega = s.circle_or("omega", Fixed128::golden()).to_double();
                out.coords[off] = frac_part(theta + omega);
                out.coords[off + 1] = pinched_fibre(s.value("alpha"), s.value_or("eps", 0.0),
                                                    theta, in.coords[off + 1]);
                off += 2;
                break;
            }
            case SystemKind::product:
                step_rec(s.children[0], in, out, off, depth + 1);
                step_rec(s.children[1], in, out, off, depth + 1);
                break;
        }
    }

    SystemSpec spec_;
    std::vector<CoordKind> layout_;
    std::shared_ptr<const DenjoyModel> denjoy_;
};

}  // namespace amorph
