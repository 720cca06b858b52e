#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <json.hpp>

namespace bec {

/// Coupling profile of the k != 0 modes.
struct GProfile {
    enum class Kind { Constant, Zero };

    Kind kind = Kind::Constant;
    double g = 1.0;  // ignored for Zero

    static GProfile constant(double g) { return {Kind::Constant, g}; }
    static GProfile zero() { return {Kind::Zero, 0.0}; }

    bool is_zero() const { return kind == Kind::Zero; }
    double value() const { return kind == Kind::Zero ? 0.0 : g; }

    bool operator==(const GProfile&) const = default;
};

/// Physical constants of the diagonal model. Energies are eps_k = kinetic*|k|^2
/// for k != 0 and eps0 for the zero mode; g0 > 0 couples the zero mode and
/// gk_profile all others. The box is a periodic cube of edge L in d dimensions.
struct ModelParams {
    int d = 3;
    double L = 10.0;
    double kinetic = 1.0;
    double eps0 = -1.0;
    double g0 = 1.0;
    GProfile gk_profile = GProfile::constant(1.0);

    double volume() const;
    /// kinetic * (2 pi / L)^2: energy of the lattice index |s|^2 = 1.
    double energy_unit() const;
    /// Throws DomainError on a violated invariant.
    void validate() const;
    /// eps0 >= 0 rules out the zero-mode (non-conventional) condensate.
    bool nonconventional_possible() const { return eps0 < 0.0; }

    ModelParams with_L(double new_L) const;

    bool operator==(const ModelParams&) const = default;
};

void to_json(nlohmann::json& j, const GProfile& p);
void from_json(const nlohmann::json& j, GProfile& p);
void to_json(nlohmann::json& j, const ModelParams& p);
void from_json(const nlohmann::json& j, ModelParams& p);

/// One dual-lattice point k = 2 pi s / L.
struct Mode {
    std::vector<int> s;
    double k_norm_sq = 0.0;
    double eps = 0.0;
    double g = 0.0;

    bool is_zero() const;
};

/// All modes sharing one |s|^2. For radial test functions and constant
/// couplings every member has identical statistics.
struct ModeShell {
    std::int64_t s_sq = 0;
    std::int64_t multiplicity = 0;
    double k_norm_sq = 0.0;
    double eps = 0.0;
    double g = 0.0;

    bool is_zero() const { return s_sq == 0; }
    /// A representative Mode (lattice index along the first axis is not
    /// meaningful for s_sq that is not a perfect square; s is left empty).
    Mode representative() const;
};

inline constexpr std::int64_t kMaxModes = 100'000'000;

/// Lattice index radius^2 for an energy cutoff: largest |s|^2 with
/// energy_unit*|s|^2 <= eps_cutoff.
std::int64_t max_index_sq(const ModelParams& params, double eps_cutoff);

/// Number of s in Z^d with |s|^2 = n, for n = 0..max_sq.
std::vector<std::int64_t> lattice_shell_counts(int d, std::int64_t max_sq);

/// All s with kinetic*(2pi/L)^2|s|^2 <= eps_cutoff, zero mode first, sorted by
/// |s|^2 then lexicographically. Throws ResourceError above kMaxModes.
std::vector<Mode> enumerate_modes(const ModelParams& params, double eps_cutoff);

/// Nonempty shells up to the cutoff, zero shell first, ascending |s|^2.
std::vector<ModeShell> enumerate_shells(const ModelParams& params, double eps_cutoff);

/// One Gaussian term a * exp(-width^2 |k|^2 / 2) of a radial Fourier profile.
struct GaussianTerm {
    std::complex<double> amplitude;
    double width = 1.0;
};

/// Radial test function given through its Fourier profile h^(k), a finite
/// sum of Gaussians (closed under the differences needed for positivity
/// matrices). The norm ||h||^2 = (2pi)^{-d} int |h^(k)|^2 d^dk is cached.
class TestFunction {
public:
    TestFunction() = default;
    TestFunction(int d, std::vector<GaussianTerm> terms);

    static TestFunction gaussian(int d, std::complex<double> amplitude, double width);
    static TestFunction zero(int d) { return TestFunction(d, {}); }

    int dim() const { return d_; }
    const std::vector<GaussianTerm>& terms() const { return terms_; }

    std::complex<double> profile(double k_norm_sq) const;
    double abs_sq(double k_norm_sq) const;
    std::complex<double> value_at_zero() const { return profile(0.0); }
    double norm_sq() const { return norm_sq_; }
    /// Same quantity by radial quadrature (independent of the closed form).
    double norm_sq_quadrature() const;
    /// L^2 inner product (this, other), conjugate-linear in this.
    std::complex<double> inner(const TestFunction& other) const;
    /// Smallest Gaussian width; controls how far out in k the profile lives.
    double min_width() const;
    bool is_zero() const;

    TestFunction operator-(const TestFunction& other) const;
    TestFunction operator+(const TestFunction& other) const;
    TestFunction scaled(std::complex<double> c) const;

private:
    int d_ = 3;
    std::vector<GaussianTerm> terms_;
    double norm_sq_ = 0.0;
};

void to_json(nlohmann::json& j, const TestFunction& tf);
TestFunction test_function_from_json(const nlohmann::json& j, int d);

/// h_k for one mode, identified with h^(k) at the mode's momentum.
std::complex<double> tf_coeff(const TestFunction& tf, const Mode& mode);

/// Surface area of the unit sphere in R^d.
double unit_sphere_area(int d);

/// Certified upper bound on sum_{|s|^2 > max_sq} 1/(e^{beta(eps_s - mu_eff)} - 1)
/// via integral comparison, where eps_s = energy_unit*|s|^2. Requires
/// the shifted radius to lie above mu_eff.
double occupation_tail_bound(const ModelParams& params, double beta, double mu_eff,
                             std::int64_t max_sq);

/// Smallest cutoff energy whose occupation tail bound is below
/// density_tol * V, for an effective chemical potential mu_eff (mu plus any
/// coupling shift).
double density_cutoff(const ModelParams& params, double beta, double mu_eff,
                      double density_tol = 1e-10);

/// Certified upper bound on sum_{|s|^2 > max_sq} |h^(k_s)|^2 / V.
double tf_tail_bound(const ModelParams& params, const TestFunction& tf, std::int64_t max_sq);

/// Smallest cutoff with tf_tail_bound below tol (relative to max(1, ||h||^2)).
double tf_cutoff(const ModelParams& params, const TestFunction& tf, double tol = 1e-12);

}  // namespace bec
