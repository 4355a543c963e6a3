#include "capvar/curvature.hpp"
#include "capvar/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace capvar {

Vec CurvatureData::trace(std::size_t atom) const {
    Vec H = Vec::Zero(ambient);
    for (int l = 0; l < ambient; ++l)
        for (int j = 0; j < ambient; ++j) H(l) += at(atom, j, j, l);
    return H;
}

CurvatureData zero_curvature(const DiscreteVarifold& V) {
    const int d = V.ambient;
    return {d, std::vector<Vec>(V.atoms.size(), Vec::Zero(d * d * d))};
}

Vec extend_second_fundamental_form(const Mat& frame, const std::vector<std::vector<Vec>>& A) {
    const auto d = static_cast<int>(frame.rows());
    const auto m = static_cast<int>(frame.cols());
    if (static_cast<int>(A.size()) != m) throw InvalidArgument("second fundamental form has the wrong size");
    Vec B = Vec::Zero(d * d * d);
    for (int a = 0; a < m; ++a) {
        if (static_cast<int>(A[a].size()) != m) throw InvalidArgument("second fundamental form has the wrong size");
        for (int b = 0; b < m; ++b) {
            const Vec& Aab = A[a][b];
            for (int i = 0; i < d; ++i) {
                const double ti = frame(i, a);
                if (ti == 0.0) continue;
                for (int j = 0; j < d; ++j)
                    for (int k = 0; k < d; ++k)
                        B((i * d + j) * d + k) += ti * (Aab(j) * frame(k, b) + frame(j, b) * Aab(k));
            }
        }
    }
    return B;
}

CurvatureData curvature_from_umbilic(const DiscreteVarifold& V, const UmbilicData& shape) {
    if (shape.normal.size() != V.atoms.size() || shape.kappa.size() != V.atoms.size())
        throw InvalidArgument("umbilic data must cover every atom");
    const int d = V.ambient;
    CurvatureData out{d, std::vector<Vec>(V.atoms.size())};
    parallel_for(V.atoms.size(), [&](std::size_t i) {
        const Mat& P = V.atoms[i].P.proj();
        const Vec N = shape.kappa[i] * shape.normal[i];
        // Closed form of the extension for A_αβ = −κ δ_αβ N: B_ijk = −κ (P_ik N_j + P_ij N_k).
        Vec B(d * d * d);
        for (int a = 0; a < d; ++a)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) B((a * d + j) * d + k) = -(P(a, k) * N(j) + P(a, j) * N(k));
        out.B[i] = std::move(B);
    });
    return out;
}

double RelationDefects::max() const {
    return std::max({symmetry, trace_free, projection, product_rule, normal_trace});
}

RelationDefects relation_defects(const DiscreteVarifold& V, const CurvatureData& B) {
    if (B.size() != V.atoms.size()) throw InvalidArgument("curvature data must cover every atom");
    const int d = V.ambient;
    std::vector<RelationDefects> per(V.atoms.size());
    parallel_for(V.atoms.size(), [&](std::size_t a) {
        const Mat& P = V.atoms[a].P.proj();
        RelationDefects r;
        for (int i = 0; i < d; ++i) {
            double tf = 0.0;
            for (int l = 0; l < d; ++l) tf += B.at(a, i, l, l);
            r.trace_free = std::max(r.trace_free, std::abs(tf));
            for (int j = 0; j < d; ++j) {
                for (int k = 0; k < d; ++k) {
                    const double b = B.at(a, i, j, k);
                    r.symmetry = std::max(r.symmetry, std::abs(b - B.at(a, i, k, j)));
                    double pb = 0.0, prod = 0.0;
                    for (int l = 0; l < d; ++l) {
                        pb += P(i, l) * B.at(a, l, j, k);
                        prod += P(j, l) * B.at(a, i, l, k) + P(l, k) * B.at(a, i, j, l);
                    }
                    r.projection = std::max(r.projection, std::abs(pb - b));
                    r.product_rule = std::max(r.product_rule, std::abs(b - prod));
                }
            }
        }
        r.normal_trace = (P * B.trace(a)).cwiseAbs().maxCoeff();
        per[a] = r;
    });
    RelationDefects worst;
    for (const auto& r : per) {
        worst.symmetry = std::max(worst.symmetry, r.symmetry);
        worst.trace_free = std::max(worst.trace_free, r.trace_free);
        worst.projection = std::max(worst.projection, r.projection);
        worst.product_rule = std::max(worst.product_rule, r.product_rule);
        worst.normal_trace = std::max(worst.normal_trace, r.normal_trace);
    }
    return worst;
}

PlaneTestField lift(const TestField& psi) {
    PlaneTestField f;
    f.name = psi.name;
    f.value = [v = psi.value](const Vec& x, const Mat&) { return v(x); };
    f.jac_x = [j = psi.jacobian](const Vec& x, const Mat&) { return j(x); };
    f.jac_P = [](const Vec& x, const Mat&) {
        const auto d = x.size();
        return std::vector<Mat>(d, Mat::Zero(d, d));
    };
    return f;
}

namespace {

struct Gaussian {
    Vec c;
    double s;
    double value(const Vec& x) const { return std::exp(-(x - c).squaredNorm() / (s * s)); }
    Vec grad(const Vec& x) const { return (-2.0 / (s * s)) * value(x) * (x - c); }
};

// g(x) P_ab e_c
PlaneTestField entry_field(const Gaussian& g, int a, int b, int c, const std::string& name) {
    PlaneTestField f;
    f.name = name;
    f.value = [=](const Vec& x, const Mat& P) {
        Vec v = Vec::Zero(x.size());
        v(c) = g.value(x) * P(a, b);
        return v;
    };
    f.jac_x = [=](const Vec& x, const Mat& P) {
        Mat J = Mat::Zero(x.size(), x.size());
        J.row(c) = P(a, b) * g.grad(x).transpose();
        return J;
    };
    f.jac_P = [=](const Vec& x, const Mat&) {
        const auto d = x.size();
        std::vector<Mat> D(d, Mat::Zero(d, d));
        D[c](a, b) = g.value(x);
        return D;
    };
    return f;
}

// g(x) P v
PlaneTestField projected_field(const Gaussian& g, const Vec& v, const std::string& name) {
    PlaneTestField f;
    f.name = name;
    f.value = [=](const Vec& x, const Mat& P) { return (g.value(x) * (P * v)).eval(); };
    f.jac_x = [=](const Vec& x, const Mat& P) { return ((P * v) * g.grad(x).transpose()).eval(); };
    f.jac_P = [=](const Vec& x, const Mat&) {
        const auto d = x.size();
        std::vector<Mat> D(d, Mat::Zero(d, d));
        for (Eigen::Index i = 0; i < d; ++i) D[i].row(i) = g.value(x) * v.transpose();
        return D;
    };
    return f;
}

}  // namespace

PlaneBattery plane_battery(int d, const std::vector<Vec>& anchors, double width) {
    if (anchors.empty()) throw InvalidArgument("plane battery needs at least one anchor");
    PlaneBattery out;
    int idx = 0;
    for (const auto& a : anchors) {
        // Offsets keep the bumps off any symmetry axis of the fixture.
        Vec c = a;
        c(0) += 0.13;
        if (d > 1) c(1) -= 0.21;
        c(d - 1) += 0.17;
        const Gaussian g{c, width};
        const std::string tag = "a" + std::to_string(idx++);
        out.push_back(entry_field(g, 0, 0, d - 1, tag + "-entry-00"));
        out.push_back(entry_field(g, 0, d - 1, 0, tag + "-entry-0n"));
        out.push_back(entry_field(g, d - 1, d - 1, 1 % d, tag + "-entry-nn"));
        if (d > 2) out.push_back(entry_field(g, 1, 2, 0, tag + "-entry-12"));
        Vec v = Vec::LinSpaced(d, 1.0, 0.3);
        out.push_back(projected_field(g, v, tag + "-project"));
        Vec w = Vec::Zero(d);
        w(d - 1) = 1.0;
        w(0) = -0.5;
        out.push_back(projected_field(g, w, tag + "-project-normal"));
    }
    return out;
}

CurvatureReport curvature_identity_residual(const DiscreteVarifold& V, const CurvatureData& B,
                                            const BoundaryVarifold& gamma, const PlaneBattery& battery) {
    if (B.size() != V.atoms.size()) throw InvalidArgument("curvature data must cover every atom");
    const int d = V.ambient;
    std::vector<Vec> nrm(gamma.atoms.size());
    parallel_for(gamma.atoms.size(), [&](std::size_t i) {
        nrm[i] = conormal(gamma.atoms[i].x, gamma.atoms[i].P, *gamma.container);
    });
    std::vector<Vec> traces(V.atoms.size());
    parallel_for(V.atoms.size(), [&](std::size_t i) { traces[i] = B.trace(i); });

    CurvatureReport rep;
    for (const auto& phi : battery) {
        std::vector<double> main(V.atoms.size()), curv(V.atoms.size()), scale(V.atoms.size());
        parallel_for(V.atoms.size(), [&](std::size_t a) {
            const auto& at = V.atoms[a];
            const Mat& P = at.P.proj();
            const Mat Jx = phi.jac_x(at.x, P);
            const std::vector<Mat> DP = phi.jac_P(at.x, P);
            double contraction = 0.0, dp_norm2 = 0.0;
            for (int i = 0; i < d; ++i) {
                dp_norm2 += DP[i].squaredNorm();
                for (int j = 0; j < d; ++j)
                    for (int k = 0; k < d; ++k)
                        if (DP[i](j, k) != 0.0) contraction += DP[i](j, k) * B.at(a, i, j, k);
            }
            const double c = contraction + traces[a].dot(phi.value(at.x, P));
            curv[a] = at.w * c;
            main[a] = at.w * (c + P.cwiseProduct(Jx).sum());
            scale[a] = at.w * (Jx.norm() + std::sqrt(dp_norm2) * B.norm(a));
        });
        const double boundary = parallel_sum(gamma.atoms.size(), [&](std::size_t i) {
            const auto& g = gamma.atoms[i];
            return g.sigma * nrm[i].dot(phi.value(g.x, g.P.proj()));
        });
        CurvatureResidual r;
        r.field = phi.name;
        r.absolute = std::abs(pairwise_sum(main) + boundary);
        r.scale = pairwise_sum(scale);
        r.relative = r.scale > 0.0 ? r.absolute / r.scale : r.absolute;
        r.curvature_term = pairwise_sum(curv);
        rep.max_absolute = std::max(rep.max_absolute, r.absolute);
        rep.max_relative = std::max(rep.max_relative, r.relative);
        rep.per_field.push_back(std::move(r));
    }
    return rep;
}

double curvature_energy(const DiscreteVarifold& V, const CurvatureData& B, double p) {
    if (!(p >= 1.0)) throw InvalidArgument("p must be at least 1");
    if (B.size() != V.atoms.size()) throw InvalidArgument("curvature data must cover every atom");
    return parallel_sum(V.atoms.size(), [&](std::size_t i) { return V.atoms[i].w * std::pow(B.norm(i), p); });
}

MassComparability mass_comparability(const DiscreteVarifold& V, const CurvatureData& B,
                                     const BoundaryVarifold& gamma, double p) {
    MassComparability r;
    r.mass = V.total_mass();
    r.boundary_mass = gamma.total_mass();
    r.curvature_energy = curvature_energy(V, B, p);
    auto ratio = [](double num, double den) {
        if (den > 0.0) return num / den;
        if (num != 0.0) throw DivisionDegenerate("mass ratio has a vanishing denominator");
        return 0.0;
    };
    r.c1 = ratio(r.mass, r.boundary_mass + r.curvature_energy);
    r.c2 = ratio(r.boundary_mass, r.mass + r.curvature_energy);
    return r;
}

LscReport lsc_check(const std::vector<CurvedVarifold>& family, const CurvedVarifold& limit, double p, double tol) {
    if (family.empty()) throw InvalidArgument("empty family");
    LscReport r;
    r.limit_energy = curvature_energy(limit.V, limit.B, p);
    r.tail_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = family.size() / 2; k < family.size(); ++k)
        r.tail_min = std::min(r.tail_min, curvature_energy(family[k].V, family[k].B, p));
    r.margin = r.tail_min + tol - r.limit_energy;
    r.pass = r.margin >= 0.0;
    return r;
}

}  // namespace capvar
