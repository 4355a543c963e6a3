#include "capvar/varifold.hpp"
#include "capvar/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace capvar {

DiscreteVarifold DiscreteVarifold::make(int m, int ambient, std::vector<Atom> atoms) {
    for (const auto& a : atoms) {
        if (a.x.size() != ambient || a.P.ambient() != ambient || a.P.dim() != m)
            throw InvalidArgument("varifold atom has inconsistent dimensions");
        if (!(a.w > 0.0) || !std::isfinite(a.w)) throw InvalidArgument("varifold weight must be positive");
    }
    DiscreteVarifold V;
    V.m = m;
    V.ambient = ambient;
    V.atoms = std::move(atoms);
    return V;
}

double DiscreteVarifold::total_mass() const {
    return parallel_sum(atoms.size(), [&](std::size_t i) { return atoms[i].w; });
}

void DiscreteVarifold::append(const DiscreteVarifold& other) {
    if (other.m != m || other.ambient != ambient) throw InvalidArgument("cannot append varifolds of different dimension");
    atoms.insert(atoms.end(), other.atoms.begin(), other.atoms.end());
}

const char* to_string(FieldClass c) {
    switch (c) {
        case FieldClass::Tangential: return "tangential";
        case FieldClass::Interior: return "interior";
        case FieldClass::General: return "general";
    }
    return "general";
}

VariationDecomposition VariationDecomposition::zero(const DiscreteVarifold& V) {
    VariationDecomposition d;
    d.H.assign(V.atoms.size(), Vec::Zero(V.ambient));
    d.H_tilde.assign(V.atoms.size(), Vec::Zero(V.ambient));
    return d;
}

void validate_decomposition(const DiscreteVarifold& V, const VariationDecomposition& dec,
                            const Container& c, double tol) {
    if (dec.H.size() != V.atoms.size() || dec.H_tilde.size() != V.atoms.size())
        throw InvalidArgument("decomposition size does not match the varifold");
    for (std::size_t i = 0; i < V.atoms.size(); ++i) {
        const Vec& x = V.atoms[i].x;
        const bool on_surface = std::abs(c.sdf(x)) <= kSurfaceTol;
        if (!on_surface) {
            if (dec.H_tilde[i].norm() > tol) throw InvalidArgument("H_tilde must vanish off the boundary");
            continue;
        }
        const NormalTangent nt = normal_and_tangent(c, x);
        if (std::abs(dec.H[i].dot(nt.normal)) > tol) throw InvalidArgument("H must be tangent to S at surface atoms");
        if ((nt.tangent * dec.H_tilde[i]).norm() > tol) throw InvalidArgument("H_tilde must be normal to S");
    }
    for (const auto& s : dec.sigma_perp) {
        if (s.mass < 0.0) throw InvalidArgument("sigma_perp masses must be non-negative");
        if (std::abs(c.sdf(s.x)) > kSurfaceTol) throw NotOnSurface("sigma_perp atom is not on S");
    }
}

double ball_mass(const DiscreteVarifold& V, const Vec& x0, double rho) {
    if (!(rho > 0.0)) throw InvalidArgument("radius must be positive");
    const double r2 = rho * rho;
    return parallel_sum(V.atoms.size(), [&](std::size_t i) {
        const auto& a = V.atoms[i];
        return (a.x - x0).squaredNorm() <= r2 ? a.w : 0.0;
    });
}

double first_variation(const DiscreteVarifold& V, const TestField& phi) {
    return parallel_sum(V.atoms.size(), [&](std::size_t i) {
        const auto& a = V.atoms[i];
        return a.w * (a.P.proj().cwiseProduct(phi.jacobian(a.x).transpose())).sum();
    });
}

namespace {

double integer_power(double r, int k) {
    double p = 1.0;
    for (int i = 0; i < k; ++i) p *= r;
    return p;
}

}  // namespace

DiscreteVarifold pushforward_dilation(const DiscreteVarifold& V, const Vec& x0, double r) {
    if (!(r > 0.0)) throw InvalidArgument("dilation scale must be positive");
    DiscreteVarifold out;
    out.m = V.m;
    out.ambient = V.ambient;
    out.atoms.resize(V.atoms.size());
    const double rm = integer_power(r, V.m);
    parallel_for(V.atoms.size(), [&](std::size_t i) {
        const auto& a = V.atoms[i];
        out.atoms[i] = Atom{((a.x - x0) / r).eval(), a.P, a.w / rm};
    });
    return out;
}

Dilated pushforward_dilation(const DiscreteVarifold& V, const BoundaryVarifold& gamma, const Vec& x0,
                             double r) {
    Dilated d;
    d.V = pushforward_dilation(V, x0, r);
    d.gamma.m = gamma.m;
    d.gamma.ambient = gamma.ambient;
    d.gamma.container = std::make_shared<const Container>(gamma.container->dilated(x0, r));
    d.gamma.beta = std::make_shared<const ContactAngleField>(gamma.beta->dilated(x0, r));
    const double rm1 = integer_power(r, gamma.m - 1);
    d.gamma.atoms.resize(gamma.atoms.size());
    parallel_for(gamma.atoms.size(), [&](std::size_t i) {
        const auto& a = gamma.atoms[i];
        d.gamma.atoms[i] = BoundaryAtom{((a.x - x0) / r).eval(), a.P, a.sigma / rm1};
    });
    return d;
}

namespace {

double jacobian_scale(const DiscreteVarifold& V, const TestField& phi) {
    return parallel_sum(V.atoms.size(), [&](std::size_t i) {
        return V.atoms[i].w * phi.jacobian(V.atoms[i].x).norm();
    });
}

ResidualReport summarize(std::vector<FieldResidual> rows) {
    ResidualReport rep;
    for (const auto& r : rows) {
        rep.max_absolute = std::max(rep.max_absolute, r.absolute);
        rep.max_relative = std::max(rep.max_relative, r.relative);
    }
    rep.per_field = std::move(rows);
    return rep;
}

FieldResidual make_row(const TestField& phi, double residual, double scale) {
    FieldResidual r;
    r.field = phi.name;
    r.absolute = std::abs(residual);
    r.scale = scale;
    r.relative = scale > 0.0 ? r.absolute / scale : r.absolute;
    return r;
}

}  // namespace

ResidualReport capillary_residual(const DiscreteVarifold& V, const BoundaryVarifold& gamma,
                                  const std::vector<Vec>& H, const Battery& battery) {
    if (H.size() != V.atoms.size()) throw InvalidArgument("one mean-curvature vector per atom is required");
    for (const auto& phi : battery)
        if (phi.cls == FieldClass::General)
            throw FieldClassError("capillary residual needs tangential fields; got '" + phi.name + "'");

    std::vector<Vec> conormals(gamma.atoms.size());
    parallel_for(gamma.atoms.size(), [&](std::size_t i) {
        conormals[i] = conormal(gamma.atoms[i].x, gamma.atoms[i].P, *gamma.container);
    });

    std::vector<FieldResidual> rows;
    for (const auto& phi : battery) {
        const double dv = first_variation(V, phi);
        const double hterm = parallel_sum(V.atoms.size(), [&](std::size_t i) {
            return V.atoms[i].w * H[i].dot(phi.value(V.atoms[i].x));
        });
        const double bterm = parallel_sum(gamma.atoms.size(), [&](std::size_t i) {
            return gamma.atoms[i].sigma * conormals[i].dot(phi.value(gamma.atoms[i].x));
        });
        rows.push_back(make_row(phi, dv + hterm + bterm, jacobian_scale(V, phi)));
    }
    return summarize(std::move(rows));
}

ResidualReport decomposition_residual(const DiscreteVarifold& V, const VariationDecomposition& dec,
                                      const BoundaryVarifold& gamma, const Battery& battery) {
    if (dec.H.size() != V.atoms.size() || dec.H_tilde.size() != V.atoms.size())
        throw InvalidArgument("decomposition size does not match the varifold");

    std::vector<Vec> tangential(gamma.atoms.size());
    parallel_for(gamma.atoms.size(), [&](std::size_t i) {
        const auto& a = gamma.atoms[i];
        const NormalTangent nt = normal_and_tangent(*gamma.container, a.x);
        tangential[i] = nt.tangent * conormal(a.x, a.P, *gamma.container);
    });
    std::vector<Vec> perp_normal(dec.sigma_perp.size());
    for (std::size_t i = 0; i < dec.sigma_perp.size(); ++i)
        perp_normal[i] = gamma.container->grad_sdf(dec.sigma_perp[i].x);

    std::vector<FieldResidual> rows;
    for (const auto& phi : battery) {
        const double dv = first_variation(V, phi);
        const double hterm = parallel_sum(V.atoms.size(), [&](std::size_t i) {
            const Vec v = phi.value(V.atoms[i].x);
            return V.atoms[i].w * (dec.H[i].dot(v) + dec.H_tilde[i].dot(v));
        });
        const double pterm = parallel_sum(dec.sigma_perp.size(), [&](std::size_t i) {
            return dec.sigma_perp[i].mass * perp_normal[i].dot(phi.value(dec.sigma_perp[i].x));
        });
        const double bterm = parallel_sum(gamma.atoms.size(), [&](std::size_t i) {
            return gamma.atoms[i].sigma * tangential[i].dot(phi.value(gamma.atoms[i].x));
        });
        rows.push_back(make_row(phi, dv + hterm + pterm + bterm, jacobian_scale(V, phi)));
    }
    return summarize(std::move(rows));
}

LocalEstimateConstants local_estimate_constants(const DiscreteVarifold& V, const VariationDecomposition& dec,
                                                const BoundaryVarifold& gamma, const Vec& x0,
                                                const Vec& tau, double rho) {
    if (!(rho > 0.0)) throw InvalidArgument("radius must be positive");
    auto h_integral = [&](double r) {
        return parallel_sum(V.atoms.size(), [&](std::size_t i) {
            return (V.atoms[i].x - x0).norm() <= r ? V.atoms[i].w * dec.H[i].norm() : 0.0;
        });
    };
    std::vector<double> perp;
    for (const auto& s : dec.sigma_perp)
        if ((s.x - x0).norm() <= 0.5 * rho) perp.push_back(s.mass);
    std::vector<double> tan;
    for (const auto& a : gamma.atoms) {
        if ((a.x - x0).norm() > 0.5 * rho) continue;
        const NormalTangent nt = normal_and_tangent(*gamma.container, a.x);
        tan.push_back(a.sigma * (nt.tangent * conormal(a.x, a.P, *gamma.container)).dot(tau));
    }
    LocalEstimateConstants c;
    const double mu1 = ball_mass(V, x0, rho);
    const double mu2 = ball_mass(V, x0, 2.0 * rho);
    const double excess_perp = pairwise_sum(perp) - h_integral(rho);
    const double excess_tan = pairwise_sum(tan) - h_integral(2.0 * rho);
    c.c_perp = excess_perp <= 0.0 ? 0.0 : (mu1 > 0.0 ? rho * excess_perp / mu1 : INFINITY);
    c.c_tan = excess_tan <= 0.0 ? 0.0 : (mu2 > 0.0 ? rho * excess_tan / mu2 : INFINITY);
    return c;
}

}  // namespace capvar
