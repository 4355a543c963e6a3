#pragma once

#include "capvar/analysis.hpp"
#include "capvar/curvature.hpp"
#include "capvar/examples.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace capvar {

inline constexpr const char* kFormatVersion = "1.0";

/// 17 significant digits; parses back to the same double.
std::string format_double(double v);

/// `varifold m=<m> n1=<d> atoms=<k>` then `x | P | w [| B: ...]` per atom.
void write_varifold(std::ostream& os, const DiscreteVarifold& V, const CurvatureData* B = nullptr);

struct VarifoldFile {
    DiscreteVarifold V;
    std::optional<CurvatureData> B;
};
/// Throws FormatError on malformed input.
VarifoldFile read_varifold(std::istream& is);

/// `boundary m=<m> n1=<d> atoms=<k>` then `x | P | sigma` per atom.
void write_boundary(std::ostream& os, const BoundaryVarifold& gamma);
BoundaryVarifold read_boundary(std::istream& is, std::shared_ptr<const Container> container,
                               std::shared_ptr<const ContactAngleField> beta, double tol_bundle = kBundleTolExact);

/// `rho,mass,ratio,transformed`; `transformed` may be empty.
void write_curve_csv(std::ostream& os, const DensityCurve& curve, const std::vector<double>& transformed);

nlohmann::ordered_json to_json(const ExpectedRecord& r);

/// Check table of a run: rows {check, value, threshold, pass, provenance}
/// plus the effective tolerances and free-form details.
class Report {
public:
    explicit Report(std::string command);

    /// pass = value ≤ threshold
    void at_most(const std::string& check, double value, double threshold, const std::string& provenance);
    /// pass = value ≥ threshold
    void at_least(const std::string& check, double value, double threshold, const std::string& provenance);
    void flag(const std::string& check, bool ok, const std::string& provenance);
    void tolerance(const std::string& key, double value);
    nlohmann::ordered_json& details() { return details_; }

    bool all_pass() const;
    nlohmann::ordered_json json() const;
    void write(const std::string& path) const;

private:
    void add(const std::string& check, double value, double threshold, bool pass, const std::string& provenance);

    std::string command_;
    nlohmann::ordered_json checks_ = nlohmann::ordered_json::array();
    nlohmann::ordered_json tolerances_ = nlohmann::ordered_json::object();
    nlohmann::ordered_json details_ = nlohmann::ordered_json::object();
    bool pass_ = true;
};

}  // namespace capvar
