#include "capvar/fields.hpp"

#include <cmath>
#include <sstream>

namespace capvar {

TestField gaussian_affine_field(std::string name, const Vec& center, double width, const Vec& a,
                                const Mat& B, FieldClass cls) {
    if (!(width > 0.0)) throw InvalidArgument("field width must be positive");
    TestField f;
    f.name = std::move(name);
    f.cls = cls;
    const double inv = 1.0 / (width * width);
    f.value = [center, inv, a, B](const Vec& x) {
        const double g = std::exp(-(x - center).squaredNorm() * inv);
        return (g * (a + B * x)).eval();
    };
    f.jacobian = [center, inv, a, B](const Vec& x) {
        const Vec dx = x - center;
        const double g = std::exp(-dx.squaredNorm() * inv);
        const Vec grad = (-2.0 * inv * g) * dx;
        return ((a + B * x) * grad.transpose() + g * B).eval();
    };
    // exp(−72) is far below double resolution relative to O(1) values.
    f.support_radius = 8.5 * width;
    f.support_center = center;
    return f;
}

TestField projected_bump_field(std::string name, const Container& c, const Vec& center, double radius,
                               const Vec& v) {
    if (!(radius > 0.0)) throw InvalidArgument("bump radius must be positive");
    TestField f;
    f.name = std::move(name);
    f.cls = FieldClass::Tangential;
    const auto grad = c.grad_sdf;
    const auto hess = c.hess_sdf;
    const double inv = 1.0 / (radius * radius);
    f.value = [=](const Vec& x) {
        const double q = (x - center).squaredNorm() * inv;
        if (q >= 1.0) return Vec::Zero(x.size()).eval();
        const double b = std::pow(1.0 - q, 4);
        const Vec n = grad(x);
        return (b * (v - v.dot(n) * n)).eval();
    };
    f.jacobian = [=](const Vec& x) {
        const auto d = x.size();
        const Vec dx = x - center;
        const double q = dx.squaredNorm() * inv;
        if (q >= 1.0) return Mat::Zero(d, d).eval();
        const double b = std::pow(1.0 - q, 4);
        const Vec db = (-8.0 * inv * std::pow(1.0 - q, 3)) * dx;
        const Vec n = grad(x);
        const Mat Hd = hess(x);
        const Vec psi = v - v.dot(n) * n;
        const Mat Jpsi = -n * (Hd * v).transpose() - v.dot(n) * Hd;
        return (psi * db.transpose() + b * Jpsi).eval();
    };
    f.support_radius = radius;
    f.support_center = center;
    return f;
}

namespace {

struct Template {
    const char* kind;
    double c0, c1, h;  // centre: two tangential coordinates and a height
    double s;
};

// Centre templates are offsets from an anchor point on S.
constexpr Template kTangential[20] = {
    {"coord0", 0.0, 0.0, 0.0, 0.45},     {"coord1", 0.4, -0.2, 0.0, 0.35},
    {"coord0", -0.3, 0.5, 0.2, 0.40},    {"coord1", 0.1, 0.3, 0.4, 0.45},
    {"rot30", 0.5, 0.0, 0.0, 0.40},      {"rot-72", -0.5, -0.3, 0.0, 0.35},
    {"rot63", 0.0, 0.8, 0.1, 0.45},      {"rot143", -0.7, 0.2, 0.05, 0.40},
    {"shear", 0.2, 0.2, 0.0, 0.45},      {"swirl", 0.0, 0.0, 0.0, 0.45},
    {"lift", 0.3, 0.0, 0.2, 0.40},       {"mixed", -0.2, -0.4, 0.1, 0.45},
    {"saddle", 0.4, 0.4, 0.0, 0.40},     {"drift", -0.6, 0.1, 0.3, 0.35},
    {"coord0", 0.9, 0.0, 0.0, 0.35},     {"coord1", 0.0, -0.85, 0.0, 0.40},
    {"rot45", 0.6, 0.6, 0.0, 0.45},      {"lift", 0.0, 0.0, 0.5, 0.45},
    {"swirl", 0.5, -0.5, 0.2, 0.40},     {"tilt", -0.5, 0.5, 0.0, 0.45},
};

constexpr Template kNormal[8] = {
    {"normal", 0.0, 0.0, 0.0, 0.45},   {"normal", 0.5, 0.2, 0.0, 0.40},
    {"normal", -0.4, 0.6, 0.1, 0.35},  {"oblique", 0.2, -0.3, 0.0, 0.45},
    {"oblique", -0.6, -0.2, 0.2, 0.40}, {"radial", 0.0, 0.0, 0.1, 0.45},
    {"normal", 0.85, 0.0, 0.0, 0.35},  {"radial", 0.3, 0.3, 0.3, 0.40},
};

Battery halfspace_fields(int d, const std::vector<Vec>& anchors, bool general) {
    const int last = d - 1;
    const int T = d - 1;
    auto tix = [T](int k) { return k % T; };
    auto centre = [&](const Template& t, std::size_t i) {
        Vec c = anchors.empty() ? Vec::Zero(d) : anchors[i % anchors.size()];
        c(tix(0)) += t.c0;
        if (T > 1) c(tix(1)) += t.c1;
        c(last) += t.h;
        return c;
    };
    auto rotated = [&](double deg) {
        Vec a = Vec::Zero(d);
        const double t = deg * kPi / 180.0;
        a(tix(0)) += std::cos(t);
        a(tix(1)) += std::sin(t);
        return a;
    };

    Battery out;
    for (std::size_t i = 0; i < 20; ++i) {
        const Template& t = kTangential[i];
        const std::string kind = t.kind;
        Vec a = Vec::Zero(d);
        Mat B = Mat::Zero(d, d);
        if (kind == "coord0") a(tix(0)) = 1.0;
        else if (kind == "coord1") a(tix(1)) = 1.0;
        else if (kind == "rot30") a = rotated(30);
        else if (kind == "rot-72") a = rotated(-72);
        else if (kind == "rot63") a = rotated(63);
        else if (kind == "rot143") a = rotated(143);
        else if (kind == "rot45") a = rotated(45);
        else if (kind == "shear") { a(tix(0)) = 1.0; B(tix(1), tix(0)) += 1.0; }
        else if (kind == "swirl") { B(tix(0), tix(1)) += 1.0; B(tix(1), tix(0)) -= 1.0; }
        else if (kind == "lift") B(last, last) = 1.0;
        else if (kind == "mixed") { a(tix(1)) = 0.5; B(last, last) = 2.0; B(tix(0), last) = 1.0; }
        else if (kind == "saddle") { B(tix(0), tix(0)) += 1.0; B(tix(1), tix(1)) -= 1.0; }
        else if (kind == "drift") { a(tix(0)) = 1.0; B(tix(0), tix(1)) += 0.5; B(last, last) = -1.0; }
        else if (kind == "tilt") { a(tix(1)) = 1.0; B(tix(1), tix(0)) += 0.5; B(last, last) = 0.7; }
        std::ostringstream name;
        name << "t" << i << "-" << kind;
        out.push_back(gaussian_affine_field(name.str(), centre(t, i), t.s, a, B, FieldClass::Tangential));
    }
    if (!general) return out;
    for (std::size_t i = 0; i < 8; ++i) {
        const Template& t = kNormal[i];
        const std::string kind = t.kind;
        Vec a = Vec::Zero(d);
        Mat B = Mat::Zero(d, d);
        if (kind == "normal") a(last) = 1.0;
        else if (kind == "oblique") { a(last) = 0.6; a(tix(0)) = 0.8; B(last, tix(1)) = 0.5; }
        else if (kind == "radial") B = Mat::Identity(d, d);
        std::ostringstream name;
        name << "g" << i << "-" << kind;
        out.push_back(gaussian_affine_field(name.str(), centre(t, i), t.s, a, B, FieldClass::General));
    }
    return out;
}

Battery container_fields(const Container& c, const std::vector<Vec>& anchors) {
    if (anchors.empty()) throw InvalidArgument("non-halfspace batteries need anchor points on S");
    const int d = c.ambient;
    const double radius = std::min(0.6, 0.5 * c.tubular_radius);
    Battery out;
    for (std::size_t i = 0; i < 20; ++i) {
        Vec v = Vec::Zero(d);
        v(static_cast<int>(i) % d) = 1.0;
        v(static_cast<int>(i + 1) % d) += 0.5 * std::cos(0.7 * static_cast<double>(i));
        std::ostringstream name;
        name << "b" << i << "-projected";
        out.push_back(projected_bump_field(name.str(), c, anchors[i % anchors.size()], radius, v));
    }
    return out;
}

}  // namespace

Battery tangential_battery(const Container& c, const std::vector<Vec>& anchors) {
    if (c.kind == ContainerKind::Halfspace) return halfspace_fields(c.ambient, anchors, false);
    return container_fields(c, anchors);
}

Battery general_battery(const Container& c, const std::vector<Vec>& anchors) {
    if (c.kind == ContainerKind::Halfspace) return halfspace_fields(c.ambient, anchors, true);
    Battery out = container_fields(c, anchors);
    const int d = c.ambient;
    for (std::size_t i = 0; i < anchors.size() && i < 8; ++i) {
        std::ostringstream name;
        name << "g" << i << "-normal";
        out.push_back(gaussian_affine_field(name.str(), anchors[i], 0.4, c.grad_sdf(anchors[i]),
                                            Mat::Zero(d, d), FieldClass::General));
    }
    return out;
}

double jacobian_check(const TestField& phi, const std::vector<Vec>& probes, double step) {
    double worst = 0.0;
    for (const auto& x : probes) {
        const Mat J = phi.jacobian(x);
        Mat fd(J.rows(), J.cols());
        for (Eigen::Index j = 0; j < J.cols(); ++j) {
            Vec xp = x, xm = x;
            xp(j) += step;
            xm(j) -= step;
            fd.col(j) = (phi.value(xp) - phi.value(xm)) / (2.0 * step);
        }
        const double allowed = 1e-6 * (1.0 + J.norm());
        worst = std::max(worst, (fd - J).cwiseAbs().maxCoeff() / allowed);
    }
    return worst;
}

double tangency_defect(const TestField& phi, const Container& c, const std::vector<Vec>& surface_points) {
    double worst = 0.0;
    for (const auto& x : surface_points) {
        const NormalTangent nt = normal_and_tangent(c, x);
        worst = std::max(worst, std::abs(phi.value(x).dot(nt.normal)));
    }
    return worst;
}

}  // namespace capvar
