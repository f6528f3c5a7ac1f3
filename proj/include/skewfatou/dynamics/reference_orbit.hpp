#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "skewfatou/dynamics/skew_product.hpp"
#include "skewfatou/error.hpp"
#include "skewfatou/numerics/big_complex.hpp"
#include "skewfatou/numerics/polynomial.hpp"
#include "skewfatou/numerics/scalar.hpp"

namespace skewfatou {

/// Orbit Z_j = p^j(base) of the fiber polynomial, with the Taylor coefficients
/// of p at every Z_j.
///
/// On exact scalars a pre-periodic orbit is found exactly and each point is
/// rounded once; otherwise the orbit is iterated at the working precision up
/// to `horizon` steps.
template <class S>
class ReferenceOrbit {
public:
    struct Node {
        BigComplex z;
        /// shift[m] = p^(m)(Z)/m! for m >= 1; shift[0] is unused.
        std::vector<BigComplex> shift;
        /// m * shift[m], the expansion of p' at Z.
        std::vector<BigComplex> dshift;
    };

    ReferenceOrbit(const Polynomial<S>& p, const S& base, Precision bits, std::size_t horizon = 0,
                   std::size_t max_exact = 512)
        : bits_(bits) {
        if constexpr (ScalarTraits<S>::exact) {
            std::vector<S> seen;
            S z = base;
            for (std::size_t j = 0; j < max_exact; ++j) {
                for (std::size_t i = 0; i < seen.size(); ++i) {
                    if (seen[i] == z) {
                        cycle_start_ = i;
                        break;
                    }
                }
                if (cycle_start_ || ScalarTraits<S>::height(z) > kMaxHeightBits) break;
                seen.push_back(z);
                z = p(z);
            }
            if (cycle_start_) {
                for (const S& x : seen) nodes_.push_back(make_node(p.taylor_shift(x), x));
                return;
            }
        }
        const Polynomial<BigComplex> pn = p.template map<BigComplex>(
            [bits](const S& c) { return ScalarTraits<S>::to_big_complex(c, bits); });
        BigComplex z = ScalarTraits<S>::to_big_complex(base, bits);
        for (std::size_t j = 0; j <= horizon; ++j) {
            nodes_.push_back(make_numeric_node(pn, z));
            z = pn(z);
        }
    }

    /// Exact orbits whose points outgrow this many bits are treated as non-periodic.
    static constexpr std::size_t kMaxHeightBits = 1 << 14;

    Precision precision() const noexcept { return bits_; }
    bool periodic() const noexcept { return cycle_start_.has_value(); }

    /// Number of directly addressable steps; unbounded for a periodic reference.
    std::size_t horizon() const noexcept { return periodic() ? static_cast<std::size_t>(-1) : nodes_.size() - 1; }

    const Node& at(std::size_t j) const {
        if (j < nodes_.size()) return nodes_[j];
        if (!cycle_start_) throw Error(ErrorKind::Usage, "reference orbit horizon exceeded");
        const std::size_t period = nodes_.size() - *cycle_start_;
        return nodes_[*cycle_start_ + (j - *cycle_start_) % period];
    }

private:
    Node make_node(const Polynomial<S>& shifted, const S& z) const {
        Node node{ScalarTraits<S>::to_big_complex(z, bits_), {}, {}};
        for (std::size_t m = 0; m < shifted.coeffs().size(); ++m) {
            node.shift.push_back(ScalarTraits<S>::to_big_complex(shifted.coeffs()[m], bits_));
        }
        fill_dshift(node);
        return node;
    }

    Node make_numeric_node(const Polynomial<BigComplex>& p, const BigComplex& z) const {
        Node node{z, {}, {}};
        const auto shifted = p.taylor_shift(z);
        for (const auto& c : shifted.coeffs()) node.shift.push_back(c);
        fill_dshift(node);
        return node;
    }

    void fill_dshift(Node& node) const {
        if (node.shift.size() < 2) node.shift.resize(2, BigComplex(bits_));
        node.dshift.assign(node.shift.size(), BigComplex(bits_));
        for (std::size_t m = 1; m < node.shift.size(); ++m) node.dshift[m] = node.shift[m] * static_cast<long>(m);
    }

    Precision bits_;
    std::vector<Node> nodes_;
    std::optional<std::size_t> cycle_start_;
};

/// Which derivative an OffsetOrbit carries along.
enum class Tangent { None, Fiber, Vertical };

/// Orbit of F started at (w * s_0, Z_0 + delta_0), stored as an offset from a reference orbit.
///
/// The horizontal coordinate is t_j = w * s_j with s_j = s_0 mu^j kept exact on
/// exact scalars, so t_j is rounded once per step. The vertical coordinate is
/// Z_j + delta_j; delta is propagated with the Taylor coefficients of p at Z_j,
/// which keeps its relative precision no matter how close it sits to the reference.
///
/// Tangent::Fiber tracks d z_j / d w, Tangent::Vertical tracks d z_j / d z_0.
template <class S>
class OffsetOrbit {
public:
    OffsetOrbit(const SkewProduct<S>& F, std::shared_ptr<const ReferenceOrbit<S>> ref, const BigComplex& w,
                const S& scale, const BigComplex& delta, Tangent tangent = Tangent::None)
        : F_(&F), ref_(std::move(ref)), w_(w), scale_(scale), delta_(delta), tangent_(tangent) {
        const Precision bits = ref_->precision();
        mu_ = ScalarTraits<S>::to_big_complex(F.mu(), bits);
        for (std::size_t i = 1; i < F.parts().size(); ++i) {
            tparts_.push_back(F.parts()[i].template map<BigComplex>(
                [bits](const S& c) { return ScalarTraits<S>::to_big_complex(c, bits); }));
            dtparts_.push_back(tparts_.back().derivative());
        }
        t_ = current_t();
        if (tangent_ == Tangent::Fiber) {
            dt_ = ScalarTraits<S>::to_big_complex(scale_, bits);
            dz_ = BigComplex(bits);
        } else if (tangent_ == Tangent::Vertical) {
            dt_ = BigComplex(bits);
            dz_ = BigComplex(1, bits);
        }
    }

    std::size_t step_index() const noexcept { return step_; }
    const BigComplex& t() const noexcept { return t_; }
    const BigComplex& delta() const noexcept { return delta_; }
    const BigComplex& reference() const { return ref_->at(ref_index_).z; }
    BigComplex z() const { return reference() + delta_; }
    const BigComplex& dz() const noexcept { return dz_; }

    /// (Z_j - point) + delta_j, exact in the reference part.
    BigComplex offset_from(const BigComplex& point) const { return (reference() - point) + delta_; }

    /// dg/dz at the current point, evaluated in offset form.
    BigComplex vertical_derivative() const {
        const auto& node = ref_->at(ref_index_);
        BigComplex acc(ref_->precision());
        for (std::size_t m = node.dshift.size(); m-- > 1;) acc = acc * delta_ + node.dshift[m];
        if (!tparts_.empty()) {
            const BigComplex z = this->z();
            const BigComplex zero(ref_->precision());
            BigComplex extra(ref_->precision());
            for (std::size_t i = tparts_.size(); i-- > 0;) extra = extra * t_ + dtparts_[i].eval(z, zero);
            acc += extra * t_;
        }
        return acc;
    }

    /// One application of F.
    void step() {
        const auto& node = ref_->at(ref_index_);
        const Precision bits = ref_->precision();
        // p(Z + d) - p(Z) = d (c_1 + d (c_2 + ...)).
        BigComplex dp(bits);
        for (std::size_t m = node.shift.size(); m-- > 1;) dp = dp * delta_ + node.shift[m];
        BigComplex next = dp * delta_;
        BigComplex gz(bits);
        BigComplex gt(bits);
        if (tangent_ != Tangent::None) {
            for (std::size_t m = node.dshift.size(); m-- > 1;) gz = gz * delta_ + node.dshift[m];
        }
        if (!tparts_.empty()) {
            const BigComplex z = node.z + delta_;
            const BigComplex zero(bits);
            BigComplex q(bits);
            for (std::size_t i = tparts_.size(); i-- > 0;) q = q * t_ + tparts_[i].eval(z, zero);
            next += q * t_;
            if (tangent_ != Tangent::None) {
                BigComplex qz(bits);
                for (std::size_t i = tparts_.size(); i-- > 0;) {
                    qz = qz * t_ + dtparts_[i].eval(z, zero);
                    gt = gt * t_ + tparts_[i].eval(z, zero) * static_cast<long>(i + 1);
                }
                gz += qz * t_;
            }
        }
        if (tangent_ != Tangent::None) {
            dz_ = gz * dz_ + gt * dt_;
            dt_ = mu_ * dt_;
        }
        delta_ = std::move(next);
        ++ref_index_;
        ++step_;
        scale_ = scale_ * F_->mu();
        t_ = current_t();
    }

    /// Restart the reference at its base point, keeping the same absolute position.
    void rebase() {
        delta_ = offset_from(ref_->at(0).z);
        ref_index_ = 0;
    }

    /// |z| > bailout, tested in double on the log scale.
    /// Resumes from a saved state: offset from the base point and tangent dz.
    void restore(const BigComplex& delta_from_base, const BigComplex& dz) {
        delta_ = delta_from_base;
        dz_ = dz;
        ref_index_ = 0;
    }

    bool beyond(double bailout) const { return z().log2_abs() > std::log2(bailout); }

private:
    BigComplex current_t() const {
        if constexpr (ScalarTraits<S>::exact) {
            return w_ * ScalarTraits<S>::to_big_complex(scale_, ref_->precision());
        } else {
            return w_ * scale_;
        }
    }

    const SkewProduct<S>* F_;
    std::shared_ptr<const ReferenceOrbit<S>> ref_;
    BigComplex w_;
    S scale_;
    BigComplex delta_;
    Tangent tangent_;
    BigComplex mu_;
    std::vector<Polynomial<BigComplex>> tparts_;
    std::vector<Polynomial<BigComplex>> dtparts_;
    BigComplex t_;
    BigComplex dt_;
    BigComplex dz_;
    std::size_t ref_index_ = 0;
    std::size_t step_ = 0;
};

}  // namespace skewfatou
