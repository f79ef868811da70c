#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "amorph/fixed128.hpp"
#include "amorph/systems.hpp"

namespace amorph {

// Denjoy circle homeomorphism built by blowing up the rotation orbit
// {n*alpha} into gaps of length l_n = c/(|n|+2)^2 with sum l_n = 1/2.
// The gap I_n maps affinely onto I_{n+1}; the complement (a positive
// measure Cantor set) carries the factor coordinate xi with
// p(f(x)) = xi + alpha.
//
// Tables hold gaps for |n| <= half_span; gaps beyond that are below the
// model resolution and their points are carried on the factor coordinate.
class DenjoyModel {
public:
    struct State {
        bool in_gap = false;
        std::int64_t n = 0;   // gap index, valid when in_gap
        double offset = 0.0;  // relative position in the gap, in [0,1)
        Fixed128 xi;          // factor coordinate (gap base point when in_gap)
    };

    explicit DenjoyModel(Fixed128 alpha, std::int64_t half_span = 1 << 15,
                         double total_gap_mass = 0.5)
        : alpha_(alpha), half_(half_span), gap_mass_(total_gap_mass) {
        if (half_ < 2) throw std::invalid_argument("half_span too small");
        // c such that sum_{n in Z} c/(|n|+2)^2 = total mass;
        // the series is 1/4 + 2*(pi^2/6 - 5/4)
        c_ = gap_mass_ / (0.25 + 2.0 * (M_PI * M_PI / 6.0 - 1.25));

        std::int64_t count = 2 * half_ + 1;
        std::vector<std::int64_t> order((std::size_t)count);
        pos_fx_.resize((std::size_t)count);
        std::vector<Fixed128> pos_unsorted((std::size_t)count);
        for (std::int64_t n = -half_; n <= half_; ++n) {
            Fixed128 p = n >= 0 ? alpha_.times((std::uint64_t)n)
                                : Fixed128() - alpha_.times((std::uint64_t)(-n));
            pos_unsorted[(std::size_t)(n + half_)] = p;
        }
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
            return pos_unsorted[(std::size_t)a] < pos_unsorted[(std::size_t)b];
        });
        n_of_rank_.resize((std::size_t)count);
        rank_of_n_.resize((std::size_t)count);
        len_.resize((std::size_t)count);
        pos_d_.resize((std::size_t)count);
        table_mass_ = 0.0;
        for (std::int64_t r = 0; r < count; ++r) {
            std::int64_t idx = order[(std::size_t)r];
            std::int64_t n = idx - half_;
            n_of_rank_[(std::size_t)r] = n;
            rank_of_n_[(std::size_t)idx] = r;
            pos_fx_[(std::size_t)r] = pos_unsorted[(std::size_t)idx];
            pos_d_[(std::size_t)r] = pos_fx_[(std::size_t)r].to_double();
            len_[(std::size_t)r] = gap_length(n);
            table_mass_ += len_[(std::size_t)r];
        }
        // prefix[r] = total gap length strictly before rank r, rescaled so
        // that tabulated gaps + Cantor set fill the circle exactly
        scale_ = gap_mass_ / table_mass_;
        prefix_.resize((std::size_t)count + 1);
        prefix_[0] = 0.0;
        for (std::int64_t r = 0; r < count; ++r) {
            len_[(std::size_t)r] *= scale_;
            prefix_[(std::size_t)r + 1] = prefix_[(std::size_t)r] + len_[(std::size_t)r];
        }
        ambient_left_.resize((std::size_t)count);
        for (std::int64_t r = 0; r < count; ++r)
            ambient_left_[(std::size_t)r] =
                (1.0 - gap_mass_) * pos_d_[(std::size_t)r] + prefix_[(std::size_t)r];
    }

    Fixed128 alpha() const { return alpha_; }
    double cantor_mass() const { return 1.0 - gap_mass_; }
    std::int64_t half_span() const { return half_; }
    // positional error bound from table truncation
    double resolution() const { return 2.0 * c_ / (double)(half_ + 2) * (scale_ > 1 ? scale_ : 1.0); }

    double gap_length_scaled(std::int64_t n) const {
        return len_[(std::size_t)rank_of_n_[(std::size_t)(n + half_)]];
    }

    // left endpoint a_n of the gap I_n
    double gap_left(std::int64_t n) const {
        return ambient_left_[(std::size_t)rank_of_n_[(std::size_t)(n + half_)]];
    }

    // ambient coordinate of the left Cantor point below factor value xi
    double position_of_factor(Fixed128 xi) const {
        std::int64_t r = rank_strictly_below(xi);
        return (1.0 - gap_mass_) * xi.to_double() + prefix_[(std::size_t)r];
    }

    State classify(double u) const {
        u = frac_part(u);
        State st;
        std::int64_t r = ambient_rank(u);
        if (r >= 0) {
            double left = ambient_left_[(std::size_t)r];
            double len = len_[(std::size_t)r];
            if (u < left + len) {
                st.in_gap = true;
                st.n = n_of_rank_[(std::size_t)r];
                st.offset = (u - left) / len;
                st.xi = pos_fx_[(std::size_t)r];
                return st;
            }
        }
        double before = r >= 0 ? prefix_[(std::size_t)r + 1] : 0.0;
        st.in_gap = false;
        st.xi = Fixed128::from_double((u - before) / (1.0 - gap_mass_));
        return st;
    }

    void step(State& st) const {
        if (st.in_gap) {
            if (st.n + 1 > half_) {
                // the gap has left the table; collapse to its base point
                st.in_gap = false;
            } else {
                st.n += 1;
            }
        }
        st.xi += alpha_;
    }

    double ambient(const State& st) const {
        if (st.in_gap) {
            std::int64_t r = rank_of_n_[(std::size_t)(st.n + half_)];
            return ambient_left_[(std::size_t)r] + st.offset * len_[(std::size_t)r];
        }
        return position_of_factor(st.xi);
    }

    double factor(const State& st) const { return st.xi.to_double(); }

    // the Cantor function p
    double project(double u) const { return factor(classify(u)); }

    double step_point(double u) const {
        State st = classify(u);
        step(st);
        return ambient(st);
    }

    // contract form with an explicit accuracy requirement
    double step_point(double u, double required_accuracy) const {
        if (resolution() > required_accuracy)
            throw std::runtime_error("accuracy unreachable: table resolution " +
                                     std::to_string(resolution()) + " coarser than " +
                                     std::to_string(required_accuracy));
        return step_point(u);
    }

    // unique preimage of a factor value that is not a gap base point
    double lift_inaccessible(Fixed128 xi) const { return position_of_factor(xi); }

private:
    double gap_length(std::int64_t n) const {
        double a = (double)(std::llabs(n) + 2);
        return c_ / (a * a);
    }

    // number of gap base points strictly below xi in factor space
    std::int64_t rank_strictly_below(Fixed128 xi) const {
        auto it = std::lower_bound(pos_fx_.begin(), pos_fx_.end(), xi,
                                   [](Fixed128 a, Fixed128 b) { return a < b; });
        return (std::int64_t)(it - pos_fx_.begin());
    }

    // largest rank with ambient_left <= u, -1 if none
    std::int64_t ambient_rank(double u) const {
        auto it = std::upper_bound(ambient_left_.begin(), ambient_left_.end(), u);
        return (std::int64_t)(it - ambient_left_.begin()) - 1;
    }

    Fixed128 alpha_;
    std::int64_t half_;
    double gap_mass_;
    double c_ = 0.0;
    double scale_ = 1.0;
    double table_mass_ = 0.0;
    std::vector<Fixed128> pos_fx_;       // sorted gap base points
    std::vector<double> pos_d_;
    std::vector<double> len_;            // scaled gap lengths, sorted order
    std::vector<double> prefix_;         // gap mass strictly before rank
    std::vector<double> ambient_left_;   // left endpoints a_n, sorted order
    std::vector<std::int64_t> n_of_rank_;
    std::vector<std::int64_t> rank_of_n_;
};

}  // namespace amorph
