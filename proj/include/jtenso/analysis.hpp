#pragma once

// FTLE fields, attractor labels, basin grids, boundary crises and the
// bistability strip in (δ, a).

#include <optional>
#include <string>
#include <vector>

#include "jtenso/error.hpp"
#include "jtenso/sections.hpp"

namespace jtenso {

/// A rectangular grid on a section plane. Rows run over the second free
/// coordinate (v), columns over the first (u).
struct GridSpec {
  SectionSpec plane{Axis::X, -2.4839, Direction::Both};
  double u_min = 0.0, u_max = 1.0;
  double v_min = 0.0, v_max = 1.0;
  int nu = 50;
  int nv = 50;

  void validate() const;
  double u(int i) const { return nu == 1 ? u_min : u_min + (u_max - u_min) * i / (nu - 1); }
  double v(int j) const { return nv == 1 ? v_min : v_min + (v_max - v_min) * j / (nv - 1); }
  State point(int i, int j) const { return plane.embed(u(i), v(j)); }
  std::size_t size() const { return static_cast<std::size_t>(nu) * static_cast<std::size_t>(nv); }
};

// ---------------------------------------------------------------- FTLE

/// log10 of the largest singular value of the flow-map derivative over
/// [0, T] (model time).
double ftle(const JtField& field, const State& s0, double T, const IntegratorConfig& cfg = {});

/// The FTLE horizon of five slow-time units, in model time.
inline double default_ftle_horizon(const ModelParams& p) { return 5.0 / p.delta; }

struct FtleField {
  GridSpec grid;
  double horizon = 0.0;
  std::vector<double> values;  // row-major [j][i]
  /// Cells whose segment reaches x > −1.5 (the strong-event strip).
  std::vector<char> event_mask;

  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * grid.nu + i]; }
};

FtleField ftle_grid(const JtField& field, const GridSpec& grid, double horizon, const IntegratorConfig& cfg = {},
                    int jobs = 0);

struct FtleContrast {
  double central_median = 0.0;  // median over event cells
  double flank_max = 0.0;       // maximum over the other cells
  std::size_t central_cells = 0;
  double contrast() const { return flank_max - central_median; }
};

/// Throws Error(DegenerateGeometry) when either class of cells is empty.
FtleContrast ftle_contrast(const FtleField& f);

/// Default Fig 5 window on x = x_eq around the chaotic attractor's footprint.
GridSpec default_ftle_grid(const EquilibriumInfo& eq);

// ---------------------------------------------------------- stretching

/// x = x_eq crossed downward: the section on which the strong-event ridge
/// of the k-th return shows up (returns after an event land near y ≈ −0.15).
inline SectionSpec ridge_section(const EquilibriumInfo& eq) { return {Axis::X, eq.state[0], Direction::Decreasing}; }

struct ProfileSample {
  double s = 0.0;  // arclength along the input segment
  State input{};
  State output{};
  /// Derivative of the return with respect to s (section free coords).
  std::array<double, 2> d_output{};
};

/// k-th returns of n points evenly spaced on the straight segment [from, to]
/// of the section, with derivatives along it. Points without a return are
/// omitted.
std::vector<ProfileSample> return_profile(const JtField& field, const SectionSpec& section, int k, const State& from,
                                          const State& to, int n, const IntegratorConfig& cfg = {}, int jobs = 0);

/// Largest |∂y_out/∂s| over the profile and where it occurs.
struct StretchPeak {
  double stretch = 0.0;
  std::size_t index = 0;
};
StretchPeak peak_stretch(const std::vector<ProfileSample>& profile, int component = 1);

/// Polyline length of the k-th-return image of a straight segment of the
/// given length centred at `centre`, along unit direction (du, dv) in the
/// section's free coordinates.
double image_length(const JtField& field, const SectionSpec& section, int k, const State& centre,
                    std::array<double, 2> direction, double length, int n, const IntegratorConfig& cfg = {},
                    int jobs = 0);

// ----------------------------------------------------- attractor labels

enum class AttractorKind { MMO, Chaotic, PeriodicNonMMO, Divergent, Undecided };

const char* to_string(AttractorKind k);
/// Single-character code used in label matrices.
char label_code(AttractorKind k);

struct AttractorLabel {
  AttractorKind kind = AttractorKind::Undecided;
  double max_x = 0.0;        // over the window
  int strong_events = 0;     // increasing crossings of the event threshold
  int period = 0;            // recurrence period of return z (0 = none)
  double g_min = 0.0, g_max = 0.0;  // observable range over the window
  std::size_t returns = 0;
  std::string reason;
};

struct ClassifyOptions {
  double transient = 500.0;
  double window = 500.0;
  double event_threshold = -1.5;
  int max_period = 8;
  double recurrence_tol = 1e-4;
  double divergence_bound = 1e3;
  /// Fewest x = x_eq returns in the window to call a non-periodic orbit
  /// chaotic.
  std::size_t min_returns = 20;
  /// Stop at the first strong event after the transient.
  bool early_exit = true;
};

/// Uses eq for the x = x_eq recurrence section and the observable.
AttractorLabel classify_attractor(const JtField& field, const State& s0, const EquilibriumInfo& eq,
                                  const ClassifyOptions& opts = {}, const IntegratorConfig& cfg = {});
AttractorLabel classify_attractor(const JtField& field, const State& s0, const ClassifyOptions& opts = {},
                                  const IntegratorConfig& cfg = {});

/// Integrator settings used for grid classification: looser than the
/// library default, which is tuned for return-map Newton.
inline IntegratorConfig classification_config() {
  IntegratorConfig c;
  c.rtol = 1e-8;
  c.atol = 1e-10;
  return c;
}

// ------------------------------------------------------------- basins

struct BasinGrid {
  GridSpec grid;
  std::vector<AttractorKind> labels;  // row-major [j][i]

  AttractorKind at(int i, int j) const { return labels[static_cast<std::size_t>(j) * grid.nu + i]; }
  std::size_t count(AttractorKind k) const;
  /// Cells with a 4-neighbour of a different label.
  std::size_t boundary_cells() const;
};

BasinGrid basin_grid(const JtField& field, const GridSpec& grid, const ClassifyOptions& opts = {},
                     const IntegratorConfig& cfg = classification_config(), int jobs = 0);

/// Section points (y, z on x = x_eq) of the chaotic attractor seeded from
/// the given state after a transient.
std::vector<Crossing> attractor_section(const JtField& field, const State& seed, const EquilibriumInfo& eq,
                                        std::size_t n_crossings, double transient = 500.0,
                                        const IntegratorConfig& cfg = {});

/// Window straddling the point cloud with a fractional margin on each side.
GridSpec window_around(const std::vector<Crossing>& cloud, const SectionSpec& plane, double margin, int nu, int nv);

/// A state on the reference chaotic attractor, placed relative to the
/// equilibrium so it tracks small parameter changes.
State chaotic_seed(const EquilibriumInfo& eq);
/// A state on the MMO orbit: the event-section fixed point p at the
/// reference parameters.
State mmo_seed();

// ------------------------------------------------------------- crises

enum class CrisisDiagnostic { AttractorExtentJump, MinImageVsFixedPoint, SaddleNode };

const char* to_string(CrisisDiagnostic d);

struct CrisisResult {
  std::string parameter = "a";
  double lo = 0.0, hi = 0.0;
  double critical = 0.0;
  CrisisDiagnostic diagnostic = CrisisDiagnostic::AttractorExtentJump;
  bool flag_lo = false, flag_hi = false;
  int iterations = 0;
  /// (a, diagnostic value) for every evaluation, in order.
  std::vector<std::pair<double, double>> probes;
};

/// Bisection on a predicate that differs at the bracket ends. Throws
/// Error(InvalidBracket) when it does not. The bracket halves exactly on
/// every iteration until hi − lo ≤ tol.
template <class Pred>
CrisisResult bisect_flag(double lo, double hi, double tol, Pred&& flag) {
  if (!(lo < hi) || !(tol > 0.0)) throw Error(ErrorCode::InvalidBracket, "bracket must satisfy lo < hi, tol > 0");
  CrisisResult r;
  r.lo = lo;
  r.hi = hi;
  r.flag_lo = flag(lo);
  r.flag_hi = flag(hi);
  if (r.flag_lo == r.flag_hi)
    throw Error(ErrorCode::InvalidBracket, "diagnostic does not differ across [" + std::to_string(lo) + ", " +
                                               std::to_string(hi) + "]");
  while (r.hi - r.lo > tol) {
    const double mid = 0.5 * (r.lo + r.hi);
    if (flag(mid) == r.flag_lo)
      r.lo = mid;
    else
      r.hi = mid;
    ++r.iterations;
  }
  r.critical = 0.5 * (r.lo + r.hi);
  return r;
}

struct ExtentOptions {
  std::size_t crossings = 2000;
  double transient = 500.0;
  /// The set counts as jumped when its diameter exceeds this multiple of
  /// the reference diameter measured at the bracket's upper end.
  double jump_factor = 2.0;
  /// Candidate seeds form a seed_grid × seed_grid lattice of this half
  /// width in (y, z) around chaotic_seed(eq).
  int seed_grid = 5;
  double seed_spread = 0.02;
};

/// The x = x_eq intersection set of a small-amplitude attractor, found by
/// trying candidate seeds in order: `hint` first, then a lattice around
/// chaotic_seed(eq). Runs that make a strong event are abandoned. Returns
/// the smallest-diameter set, or nullopt when every run escaped.
struct SmallAttractor {
  std::vector<Crossing> cloud;
  double diameter = 0.0;
  State seed{};
};

std::optional<SmallAttractor> small_attractor(const ModelParams& p, const ExtentOptions& opts = {},
                                              const IntegratorConfig& cfg = {},
                                              std::optional<State> hint = std::nullopt);

/// Diameter of the small attractor's intersection set; +inf when every
/// candidate escaped to strong events.
double attractor_extent(const ModelParams& p, const ExtentOptions& opts = {}, const IntegratorConfig& cfg = {},
                        std::optional<State> hint = std::nullopt);

/// Chaotic-attractor boundary crisis in a: below a* the intersection set
/// jumps in extent (or the attractor is gone altogether).
CrisisResult crisis_bisection(const ModelParams& p, double a_lo, double a_hi, double tol,
                              const ExtentOptions& opts = {}, const IntegratorConfig& cfg = {});

// ------------------------------------------------ 1-D MMO return map

struct Mmo1dOptions {
  int manifold_seeds = 1000;
  double seed_radius = 1e-4;
  double manifold_t_max = 800.0;
  /// Manifold crossings within this distance in z of the fold are fitted.
  double fold_window = 0.006;
  int samples = 400;
  /// The unimodal branch ends where the return exceeds the fold by this.
  double branch_cap = 0.02;
  ReturnOptions returns{};
};

struct FixedPoint1d {
  double z = 0.0;
  double slope = 0.0;
};

/// The approximately one-dimensional return map to the event section,
/// tabulated along a quadratic fit of the unstable-manifold fold.
struct Mmo1dMap {
  ModelParams params;
  PlaneCurve curve;
  std::vector<Crossing> manifold;  // fold-window manifold crossings
  std::vector<MapSample> samples;  // unimodal branch, ascending z_in
  double fold_z = 0.0;
  double min_z_in = 0.0;
  double min_value = 0.0;
  std::vector<FixedPoint1d> fixed_points;

  /// Linear interpolation in the table; nullopt outside it.
  std::optional<double> operator()(double z) const;
  bool maps_into(double lo, double hi) const;
  std::optional<FixedPoint1d> positive_slope_fixed_point() const;
  std::optional<double> image_of_minimum() const { return (*this)(min_value); }
  /// The image of the minimum lies beyond the positive-slope fixed point.
  bool horseshoe() const;
};

Mmo1dMap mmo_return_map(const ModelParams& p, const Mmo1dOptions& opts = {}, const IntegratorConfig& cfg = {},
                        int jobs = 0);

struct MmoBoundary {
  CrisisResult saddle_node;  // fixed points exist above
  CrisisResult crisis;       // horseshoe above
};

/// (i) the saddle-node of the 1-D map, by bisection on the existence of
/// fixed points over sn_bracket; (ii) the MMO crisis where the image of
/// the minimum reaches the positive-slope fixed point, over crisis_bracket.
MmoBoundary mmo_boundary(const ModelParams& p, std::pair<double, double> sn_bracket,
                         std::pair<double, double> crisis_bracket, double tol, const Mmo1dOptions& opts = {},
                         const IntegratorConfig& cfg = {}, int jobs = 0);

CrisisResult mmo_crisis(const ModelParams& p, double a_lo, double a_hi, double tol, const Mmo1dOptions& opts = {},
                        const IntegratorConfig& cfg = {}, int jobs = 0);
CrisisResult saddle_node(const ModelParams& p, double a_lo, double a_hi, double tol, const Mmo1dOptions& opts = {},
                         const IntegratorConfig& cfg = {}, int jobs = 0);

// ---------------------------------------------------- bistability strip

struct StripRow {
  double delta = 0.0;
  std::optional<double> a_chaotic_crisis;
  std::optional<double> a_mmo_crisis;
  std::string error;
};

struct StripOptions {
  /// Where the search starts: approximate crisis values at reference_delta
  /// and the common slope da/dδ of both boundaries.
  double reference_delta = 0.225423;
  double chaotic_reference_a = 7.39386;
  double mmo_reference_a = 7.3953;
  double boundary_slope = 24.0;
  /// Initial half-widths of the a-brackets around the running estimate.
  double chaotic_half_width = 5e-4;
  double mmo_half_width = 1e-3;
  double chaotic_tol = 2e-6;
  double mmo_tol = 5e-5;
  int max_expansions = 5;
  ExtentOptions extent{};
  Mmo1dOptions mmo{};
};

/// For each δ, both crisis values in a. Rows are solved outward from
/// reference_delta; each bracket is centred on a prediction from the
/// nearest solved row and doubled until the diagnostics differ. Failures are recorded per row.
std::vector<StripRow> bistability_strip(const ModelParams& base, const std::vector<double>& deltas,
                                        const StripOptions& opts = {}, const IntegratorConfig& cfg = {},
                                        int jobs = 0);

}  // namespace jtenso
