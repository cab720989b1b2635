#include "nostill/nonstationary.hpp"

#include <cmath>
#include <stdexcept>

namespace nostill {

namespace {

void require_positive(const LatentScales &s) {
    const bool ok = s.lx > 0.0 && s.ly > 0.0 && s.lt > 0.0 && std::isfinite(s.lx) && std::isfinite(s.ly) &&
                    std::isfinite(s.lt);
    if (!ok) { throw std::domain_error("latent length scales must be positive and finite"); }
}

// One diagonal factor: (a b)^(1/4) ((a + b)/2)^(-1/2) with a = li^2, b = lj^2.
double axis_prefactor(double li, double lj) { return std::sqrt(2.0 * li * lj / (li * li + lj * lj)); }

double entry(const SpaceTimePoint &pi, const SpaceTimePoint &pj, const LatentScales &si, const LatentScales &sj,
             const KernelSpec &base, bool sparse) {
    const auto q = scaled_sq_dists(pi, pj, si, sj);
    double k = axis_prefactor(si.lx, sj.lx) * axis_prefactor(si.ly, sj.ly) * axis_prefactor(si.lt, sj.lt) *
               detail::space_time_partials(q.q_s, q.q_t, base).value;
    if (sparse) { k *= detail::esgp_unit(std::sqrt(q.q_s + q.q_t)); }
    return k;
}

void require_aligned(std::span<const SpaceTimePoint> pts, const LatentLengthField &field) {
    if (pts.size() != field.size()) { throw std::invalid_argument("latent field is not aligned with its points"); }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!(pts[i] == field.points()[i])) { throw std::invalid_argument("latent field is not aligned with its points"); }
    }
}

}  // namespace

LatentLengthField::LatentLengthField(std::vector<SpaceTimePoint> points, std::vector<double> lx,
                                     std::vector<double> ly, std::vector<double> lt)
    : points_(std::move(points)), lx_(std::move(lx)), ly_(std::move(ly)), lt_(std::move(lt)) {
    if (lx_.size() != points_.size() || ly_.size() != points_.size() || lt_.size() != points_.size()) {
        throw std::invalid_argument("latent field lists differ in length");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) { require_positive(at(i)); }
}

LatentLengthField LatentLengthField::constant(std::vector<SpaceTimePoint> points, LatentScales scales) {
    const auto n = points.size();
    return LatentLengthField(std::move(points), std::vector<double>(n, scales.lx), std::vector<double>(n, scales.ly),
                             std::vector<double>(n, scales.lt));
}

double prefactor(const LatentScales &i, const LatentScales &j) {
    require_positive(i);
    require_positive(j);
    return axis_prefactor(i.lx, j.lx) * axis_prefactor(i.ly, j.ly) * axis_prefactor(i.lt, j.lt);
}

ScaledSqDists scaled_sq_dists(const SpaceTimePoint &p_i, const SpaceTimePoint &p_j, const LatentScales &i,
                              const LatentScales &j) {
    const double dx = p_i.x - p_j.x;
    const double dy = p_i.y - p_j.y;
    const double dt = p_i.t - p_j.t;
    const double ax = 0.5 * (i.lx * i.lx + j.lx * j.lx);
    const double ay = 0.5 * (i.ly * i.ly + j.ly * j.ly);
    const double at = 0.5 * (i.lt * i.lt + j.lt * j.lt);
    return {dx * dx / ax + dy * dy / ay, dt * dt / at};
}

Eigen::MatrixXd gram_nonstationary(std::span<const SpaceTimePoint> a, std::span<const SpaceTimePoint> b,
                                   const LatentLengthField &field_a, const LatentLengthField &field_b,
                                   const KernelSpec &base, bool sparse) {
    if (base.family != KernelFamily::CH1 && base.family != KernelFamily::CH2) {
        throw std::invalid_argument("non-stationary base kernel must be CH1 or CH2, got " + to_string(base.family));
    }
    base.validate();
    require_aligned(a, field_a);
    require_aligned(b, field_b);
    const auto na = static_cast<Eigen::Index>(a.size());
    const auto nb = static_cast<Eigen::Index>(b.size());
    const bool same = a.data() == b.data() && a.size() == b.size() && &field_a == &field_b;
    Eigen::MatrixXd k(na, nb);
    for (Eigen::Index i = 0; i < na; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        const auto si = field_a.at(iu);
        for (Eigen::Index j = same ? i : 0; j < nb; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            k(i, j) = entry(a[iu], b[ju], si, field_b.at(ju), base, sparse);
            if (same) { k(j, i) = k(i, j); }
        }
    }
    return k;
}

Eigen::MatrixXd gram_nonstationary(const LatentLengthField &field, const KernelSpec &base, bool sparse) {
    return gram_nonstationary(field.points(), field.points(), field, field, base, sparse);
}

}  // namespace nostill
