#include "capvar/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace capvar {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void write_values(std::ostream& os, const double* v, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) os << (i ? " " : "") << format_double(v[i]);
}

double parse_double(const std::string& tok) {
    double v = 0.0;
    const auto* end = tok.data() + tok.size();
    const auto res = std::from_chars(tok.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) throw FormatError("not a number: '" + tok + "'");
    return v;
}

struct Header {
    int m = 0;
    int d = 0;
    std::size_t atoms = 0;
};

Header parse_header(std::istream& is, const std::string& kind) {
    std::string line;
    if (!std::getline(is, line)) throw FormatError("missing header");
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word != kind) throw FormatError("expected a '" + kind + "' header");
    Header h;
    bool has_m = false, has_d = false, has_k = false;
    while (ss >> word) {
        const auto eq = word.find('=');
        if (eq == std::string::npos) throw FormatError("malformed header field '" + word + "'");
        const std::string key = word.substr(0, eq);
        const std::string val = word.substr(eq + 1);
        try {
            if (key == "m") h.m = std::stoi(val), has_m = true;
            else if (key == "n1") h.d = std::stoi(val), has_d = true;
            else if (key == "atoms") h.atoms = std::stoul(val), has_k = true;
            else throw FormatError("unknown header field '" + key + "'");
        } catch (const std::logic_error&) {
            throw FormatError("bad header value '" + word + "'");
        }
    }
    if (!has_m || !has_d || !has_k || h.d < 1 || h.m < 0 || h.m > h.d) throw FormatError("incomplete header");
    return h;
}

// Splits an atom line into '|'-separated groups of numbers; a group may start with a tag like "B:".
std::vector<std::pair<std::string, std::vector<double>>> split_groups(const std::string& line) {
    std::vector<std::pair<std::string, std::vector<double>>> groups(1);
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
        if (tok == "|") {
            groups.emplace_back();
            continue;
        }
        if (groups.back().second.empty() && groups.back().first.empty() && tok.back() == ':') {
            groups.back().first = tok;
            continue;
        }
        groups.back().second.push_back(parse_double(tok));
    }
    return groups;
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

Mat to_mat(const std::vector<double>& v, int d) {
    Mat P(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) P(i, j) = v[static_cast<std::size_t>(i * d + j)];
    return P;
}

void write_row(std::ostream& os, const Vec& x, const Mat& P, double w) {
    write_values(os, x.data(), x.size());
    os << " | ";
    const Mat Pr = P.transpose();  // row-major order
    write_values(os, Pr.data(), Pr.size());
    os << " | " << format_double(w);
}

std::string next_line(std::istream& is, std::size_t index) {
    std::string line;
    if (!std::getline(is, line)) throw FormatError("missing atom line " + std::to_string(index + 1));
    return line;
}

}  // namespace

void write_varifold(std::ostream& os, const DiscreteVarifold& V, const CurvatureData* B) {
    if (B && B->size() != V.atoms.size()) throw InvalidArgument("curvature data must cover every atom");
    os << "varifold m=" << V.m << " n1=" << V.ambient << " atoms=" << V.atoms.size() << "\n";
    for (std::size_t i = 0; i < V.atoms.size(); ++i) {
        const auto& a = V.atoms[i];
        write_row(os, a.x, a.P.proj(), a.w);
        if (B) {
            os << " | B: ";
            write_values(os, B->B[i].data(), B->B[i].size());
        }
        os << "\n";
    }
}

VarifoldFile read_varifold(std::istream& is) {
    const Header h = parse_header(is, "varifold");
    const auto d = static_cast<std::size_t>(h.d);
    std::vector<Atom> atoms;
    std::vector<Vec> curv;
    for (std::size_t i = 0; i < h.atoms; ++i) {
        const auto g = split_groups(next_line(is, i));
        if (g.size() != 3 && g.size() != 4) throw FormatError("atom line needs 3 or 4 groups");
        if (g[0].second.size() != d || g[1].second.size() != d * d || g[2].second.size() != 1)
            throw FormatError("atom line " + std::to_string(i + 1) + " has the wrong number of entries");
        try {
            atoms.push_back({to_vec(g[0].second), Plane::from_projector(to_mat(g[1].second, h.d), h.m), g[2].second[0]});
        } catch (const InvalidPlane& e) {
            throw FormatError(std::string("atom plane: ") + e.what());
        }
        if (g.size() == 4) {
            if (g[3].first != "B:" || g[3].second.size() != d * d * d) throw FormatError("malformed curvature block");
            curv.push_back(to_vec(g[3].second));
        }
    }
    if (!curv.empty() && curv.size() != atoms.size()) throw FormatError("curvature block missing on some atoms");
    VarifoldFile f;
    try {
        f.V = DiscreteVarifold::make(h.m, h.d, std::move(atoms));
    } catch (const InvalidArgument& e) {
        throw FormatError(e.what());
    }
    if (!curv.empty()) f.B = CurvatureData{h.d, std::move(curv)};
    return f;
}

void write_boundary(std::ostream& os, const BoundaryVarifold& gamma) {
    os << "boundary m=" << gamma.m << " n1=" << gamma.ambient << " atoms=" << gamma.atoms.size() << "\n";
    for (const auto& a : gamma.atoms) {
        write_row(os, a.x, a.P.proj(), a.sigma);
        os << "\n";
    }
}

BoundaryVarifold read_boundary(std::istream& is, std::shared_ptr<const Container> container,
                               std::shared_ptr<const ContactAngleField> beta, double tol_bundle) {
    const Header h = parse_header(is, "boundary");
    const auto d = static_cast<std::size_t>(h.d);
    std::vector<BoundaryAtom> atoms;
    for (std::size_t i = 0; i < h.atoms; ++i) {
        const auto g = split_groups(next_line(is, i));
        if (g.size() != 3 || g[0].second.size() != d || g[1].second.size() != d * d || g[2].second.size() != 1)
            throw FormatError("boundary line " + std::to_string(i + 1) + " is malformed");
        try {
            atoms.push_back({to_vec(g[0].second), Plane::from_projector(to_mat(g[1].second, h.d), h.m), g[2].second[0]});
        } catch (const InvalidPlane& e) {
            throw FormatError(std::string("boundary plane: ") + e.what());
        }
    }
    return BoundaryVarifold::make(h.m, h.d, std::move(atoms), std::move(container), std::move(beta), tol_bundle);
}

void write_curve_csv(std::ostream& os, const DensityCurve& curve, const std::vector<double>& transformed) {
    os << "rho,mass,ratio,transformed\n";
    for (std::size_t i = 0; i < curve.radii.size(); ++i) {
        os << format_double(curve.radii[i]) << "," << format_double(curve.masses[i]) << ","
           << format_double(curve.ratios[i]) << ",";
        if (i < transformed.size()) os << format_double(transformed[i]);
        os << "\n";
    }
}

nlohmann::ordered_json to_json(const ExpectedRecord& r) {
    nlohmann::ordered_json j;
    j["beta0"] = r.beta0;
    if (r.n_V) j["n_V"] = std::vector<double>(r.n_V->data(), r.n_V->data() + r.n_V->size());
    if (r.n_W_zero) j["n_W_zero"] = *r.n_W_zero;
    if (r.n_W_norm) j["n_W_norm"] = *r.n_W_norm;
    if (r.sigma_gamma_total) j["sigma_gamma_total"] = *r.sigma_gamma_total;
    if (r.sigma_perp_total) j["sigma_perp_total"] = *r.sigma_perp_total;
    if (r.mass_total) j["mass_total"] = *r.mass_total;
    if (r.density_at_origin) j["density_at_origin"] = *r.density_at_origin;
    if (r.boundary_radius) j["boundary_radius"] = *r.boundary_radius;
    j["tolerance"] = r.tolerance;
    return j;
}

Report::Report(std::string command) : command_(std::move(command)) {}

void Report::add(const std::string& check, double value, double threshold, bool pass, const std::string& provenance) {
    nlohmann::ordered_json row;
    row["check"] = check;
    row["value"] = value;
    row["threshold"] = threshold;
    row["pass"] = pass;
    row["provenance"] = provenance;
    checks_.push_back(std::move(row));
    pass_ = pass_ && pass;
}

void Report::at_most(const std::string& check, double value, double threshold, const std::string& provenance) {
    add(check, value, threshold, value <= threshold, provenance);
}

void Report::at_least(const std::string& check, double value, double threshold, const std::string& provenance) {
    add(check, value, threshold, value >= threshold, provenance);
}

void Report::flag(const std::string& check, bool ok, const std::string& provenance) {
    add(check, ok ? 1.0 : 0.0, 1.0, ok, provenance);
}

void Report::tolerance(const std::string& key, double value) { tolerances_[key] = value; }

bool Report::all_pass() const { return pass_; }

nlohmann::ordered_json Report::json() const {
    nlohmann::ordered_json j;
    j["format_version"] = kFormatVersion;
    j["command"] = command_;
    j["pass"] = pass_;
    j["tolerances"] = tolerances_;
    j["checks"] = checks_;
    j["details"] = details_;
    return j;
}

void Report::write(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write report to " + path);
    os << json().dump(2) << "\n";
}

}  // namespace capvar
