#include "capvar/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <limits>
#include <sstream>

namespace capvar {

double unit_ball_volume(int k) {
    return std::pow(kPi, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
}

Vec unit_vector(int d, int i) {
    Vec e = Vec::Zero(d);
    e(i) = 1.0;
    return e;
}

Plane Plane::from_projector(const Mat& proj, int m) {
    if (proj.rows() != proj.cols() || proj.rows() == 0)
        throw InvalidPlane("projector must be a non-empty square matrix");
    if (m < 0 || m > proj.rows()) throw InvalidPlane("plane dimension out of range");
    if ((proj - proj.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw InvalidPlane("projector is not symmetric");
    if ((proj * proj - proj).cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidPlane("projector is not idempotent");
    if (std::abs(proj.trace() - m) > 1e-10) throw InvalidPlane("projector trace differs from m");
    Plane p;
    p.proj_ = proj;
    p.m_ = m;
    return p;
}

Mat Plane::frame() const {
    Eigen::SelfAdjointEigenSolver<Mat> es(proj_);
    // Eigenvalues ascend; the last m belong to the plane.
    return es.eigenvectors().rightCols(m_);
}

Plane plane_from_frame(const Mat& A) {
    const int m = static_cast<int>(A.cols());
    const Mat G = A.transpose() * A;
    if (m == 0 || G.determinant() < 1e-12) throw RankDeficient("frame vectors are linearly dependent");
    Eigen::HouseholderQR<Mat> qr(A);
    const Mat Q = qr.householderQ() * Mat::Identity(A.rows(), m);
    Mat P = Q * Q.transpose();
    P = 0.5 * (P + P.transpose()).eval();
    return Plane::from_projector(P, m);
}

Plane plane_from_frame(const std::vector<Vec>& vectors) {
    if (vectors.empty()) throw RankDeficient("empty frame");
    Mat A(vectors.front().size(), static_cast<Eigen::Index>(vectors.size()));
    for (std::size_t j = 0; j < vectors.size(); ++j) A.col(static_cast<Eigen::Index>(j)) = vectors[j];
    return plane_from_frame(A);
}

double grassmann_distance(const Plane& a, const Plane& b) {
    const Mat D = a.proj() - b.proj();
    Eigen::SelfAdjointEigenSolver<Mat> es(D, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

Container halfspace(int ambient) {
    Container c;
    c.kind = ContainerKind::Halfspace;
    c.ambient = ambient;
    const int last = ambient - 1;
    c.sdf = [last](const Vec& x) { return x(last); };
    c.grad_sdf = [ambient, last](const Vec&) { return unit_vector(ambient, last); };
    c.hess_sdf = [ambient](const Vec&) { return Mat::Zero(ambient, ambient).eval(); };
    c.tubular_radius = std::numeric_limits<double>::infinity();
    c.description = "halfspace";
    return c;
}

Container ball(const Vec& center, double radius) {
    if (!(radius > 0)) throw InvalidArgument("ball radius must be positive");
    Container c;
    c.kind = ContainerKind::Ball;
    c.ambient = static_cast<int>(center.size());
    const int d = c.ambient;
    c.sdf = [center, radius](const Vec& x) { return radius - (x - center).norm(); };
    c.grad_sdf = [center](const Vec& x) {
        const Vec u = x - center;
        return (-u / u.norm()).eval();
    };
    c.hess_sdf = [center, d](const Vec& x) {
        const Vec u = x - center;
        const double r = u.norm();
        const Vec e = u / r;
        return (-(Mat::Identity(d, d) - e * e.transpose()) / r).eval();
    };
    c.tubular_radius = radius;
    std::ostringstream os;
    os.precision(17);
    os << "ball r=" << radius << " center=";
    for (int i = 0; i < d; ++i) os << (i ? "," : "") << center(i);
    c.description = os.str();
    return c;
}

Container Container::dilated(const Vec& x0, double r) const {
    if (!(r > 0)) throw InvalidArgument("dilation scale must be positive");
    if (kind == ContainerKind::Halfspace && x0(ambient - 1) == 0.0) return halfspace(ambient);
    Container out;
    out.kind = ContainerKind::Custom;
    out.ambient = ambient;
    auto parent = std::make_shared<const Container>(*this);
    out.sdf = [parent, x0, r](const Vec& y) { return parent->sdf(x0 + r * y) / r; };
    out.grad_sdf = [parent, x0, r](const Vec& y) { return parent->grad_sdf(x0 + r * y); };
    out.hess_sdf = [parent, x0, r](const Vec& y) { return (r * parent->hess_sdf(x0 + r * y)).eval(); };
    out.tubular_radius = tubular_radius / r;
    out.description = description + " (dilated)";
    return out;
}

Container parse_container(const std::string& text, int ambient) {
    std::istringstream in(text);
    std::string kind;
    in >> kind;
    if (kind == "halfspace") {
        std::string extra;
        if (in >> extra) throw ConfigError("halfspace container takes no parameters");
        return halfspace(ambient);
    }
    if (kind == "ball") {
        double radius = 1.0;
        Vec center = Vec::Zero(ambient);
        std::string tok;
        while (in >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) throw ConfigError("malformed container token: " + tok);
            const std::string key = tok.substr(0, eq);
            const std::string val = tok.substr(eq + 1);
            try {
                if (key == "r") {
                    radius = std::stod(val);
                } else if (key == "center") {
                    std::istringstream cs(val);
                    std::string part;
                    int i = 0;
                    while (std::getline(cs, part, ',')) {
                        if (i >= ambient) throw ConfigError("ball center has too many coordinates");
                        center(i++) = std::stod(part);
                    }
                    if (i != ambient) throw ConfigError("ball center has too few coordinates");
                } else {
                    throw ConfigError("unknown ball parameter: " + key);
                }
            } catch (const std::logic_error&) {
                throw ConfigError("malformed number in container: " + tok);
            }
        }
        if (!(radius > 0)) throw ConfigError("ball radius must be positive");
        return ball(center, radius);
    }
    throw ConfigError("unknown container kind: " + kind);
}

NormalTangent normal_and_tangent(const Container& c, const Vec& x) {
    const double d = c.sdf(x);
    if (std::abs(d) > kSurfaceTol) throw NotOnSurface("point is not on the container boundary");
    NormalTangent nt;
    nt.normal = c.grad_sdf(x);
    const auto n = static_cast<int>(x.size());
    nt.tangent = Mat::Identity(n, n) - nt.normal * nt.normal.transpose();
    return nt;
}

double ContactAngleField::at(const Vec& x) const {
    const double b = beta(x);
    if (!(b > 0.0 && b < kPi)) throw InvalidArgument("contact angle outside (0, pi)");
    return b;
}

ContactAngleField ContactAngleField::dilated(const Vec& x0, double r) const {
    ContactAngleField out;
    auto b = beta;
    auto g = grad_beta;
    out.beta = [b, x0, r](const Vec& y) { return b(x0 + r * y); };
    out.grad_beta = [g, x0, r](const Vec& y) { return (r * g(x0 + r * y)).eval(); };
    out.description = description;
    return out;
}

ContactAngleField constant_angle(double beta) {
    if (!(beta > 0.0 && beta < kPi)) throw InvalidArgument("contact angle outside (0, pi)");
    ContactAngleField f;
    f.beta = [beta](const Vec&) { return beta; };
    f.grad_beta = [](const Vec& x) { return Vec::Zero(x.size()).eval(); };
    std::ostringstream os;
    os.precision(17);
    os << "constant " << beta;
    f.description = os.str();
    return f;
}

double bundle_sine(double beta) { return std::sin(beta <= 0.5 * kPi ? beta : kPi - beta); }

}  // namespace capvar
