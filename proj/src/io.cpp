#include "bdf/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace bdf {

namespace {

constexpr char kMagic[4] = {'B', 'D', 'F', 'Q'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "state files assume a little-endian host");

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ConfigError("truncated state file");
  return v;
}

// NaN is written as an empty JSON null by nlohmann; keep it explicit.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string csv_text(const std::string& s) {
  std::string out = "\"";
  for (char c : s) out += (c == '"') ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

void write_state(const std::filesystem::path& path, const StateFile& state) {
  const Index n = state.Q.rows();
  if (state.Q.cols() != n) throw std::invalid_argument("state matrix must be square");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  put<double>(os, state.box_length);
  put<double>(os, state.cutoff);
  put<std::int32_t>(os, state.spinor_dim);
  put<std::int64_t>(os, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      put<double>(os, state.Q(i, j).real());
      put<double>(os, state.Q(i, j).imag());
    }
  if (!os) throw ConfigError("write failed for " + path.string());
}

StateFile read_state(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw ConfigError(path.string() + " is not a state file");
  const auto version = get<std::uint32_t>(is);
  if (version != kVersion) throw ConfigError("unsupported state file version " + std::to_string(version));
  StateFile s;
  s.box_length = get<double>(is);
  s.cutoff = get<double>(is);
  s.spinor_dim = get<std::int32_t>(is);
  const auto n = get<std::int64_t>(is);
  if (n < 0 || n > 100000) throw ConfigError("implausible state dimension");
  s.Q.resize(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const double re = get<double>(is);
      const double im = get<double>(is);
      s.Q(i, j) = cplx(re, im);
    }
  return s;
}

void write_density_csv(std::ostream& os, const ChargeDensity& rho) {
  os << "kx,ky,kz,re,im\n";
  const auto& shifts = rho.lattice->shifts();
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    const RVec3 k = rho.lattice->momentum_of(shifts[i].d);
    os << fmt(k.x()) << ',' << fmt(k.y()) << ',' << fmt(k.z()) << ',' << fmt(rho.coeff[i].real()) << ','
       << fmt(rho.coeff[i].imag()) << '\n';
  }
}

void write_curve_csv(std::ostream& os, const EnergyCurve& curve) {
  os << "q,energy,mu,residual,iterations,converged,error\n";
  for (const auto& p : curve.points)
    os << fmt(p.q) << ',' << fmt(p.energy) << ',' << fmt(p.mu) << ',' << fmt(p.residual) << ','
       << p.iterations << ',' << int(p.converged) << ',' << csv_text(p.error) << '\n';
}

void write_weak_coupling_csv(std::ostream& os, const WeakCouplingTable& t) {
  os << "alpha,energy,limit,gap,overlap,vacuum_distance,converged,error\n";
  for (const auto& r : t.rows)
    os << fmt(r.alpha) << ',' << fmt(r.energy) << ',' << fmt(t.limit) << ',' << fmt(r.gap) << ','
       << fmt(r.overlap) << ',' << fmt(r.vacuum_distance) << ',' << int(r.converged) << ','
       << csv_text(r.error) << '\n';
}

void write_nonrel_csv(std::ostream& os, const NonrelTable& t) {
  os << "c,modes,g0_zero,energy,shifted,hf_energy,gap,lower_weight,threshold,threshold_at_zero,converged,error\n";
  for (const auto& r : t.rows)
    os << fmt(r.c) << ',' << r.modes << ',' << fmt(r.g0_zero) << ',' << fmt(r.energy) << ','
       << fmt(r.shifted) << ',' << fmt(r.hf_energy) << ',' << fmt(r.gap) << ',' << fmt(r.lower_weight)
       << ',' << fmt(r.threshold) << ',' << int(r.threshold_at_zero) << ',' << int(r.converged) << ','
       << csv_text(r.error) << '\n';
}

json to_json(const ScfReport& r, bool with_trace) {
  json j = {{"energy", num(r.energy)},
            {"mu", num(r.mu)},
            {"mu_in_gap", r.mu_in_gap},
            {"residual", num(r.residual)},
            {"commutator", num(r.commutator)},
            {"charge", num(r.charge)},
            {"target_charge", num(r.target_charge)},
            {"delta", num(r.delta)},
            {"fractional_levels", r.fractional_levels},
            {"fermi_set", r.fermi_set},
            {"gap", num(r.gap)},
            {"iterations", r.iterations},
            {"purifications", r.purifications},
            {"level_shift", num(r.level_shift)},
            {"converged", r.converged},
            {"gap_closed", r.gap_closed}};
  if (with_trace) {
    json tr = json::array();
    for (const auto& t : r.trace)
      tr.push_back({{"iteration", t.iteration}, {"energy", num(t.energy)}, {"residual", num(t.residual)},
                    {"step", num(t.step)}});
    j["trace"] = tr;
  }
  return j;
}

json to_json(const BindingReport& r) {
  json rows = json::array();
  for (const auto& b : r.rows)
    rows.push_back({{"K", b.K},
                    {"e_rest", num(b.e_rest)},
                    {"e_free", num(b.e_free)},
                    {"margin", num(b.margin)},
                    {"tolerance", num(b.tolerance)},
                    {"strict", b.strict},
                    {"subadditive", b.subadditive}});
  return {{"N", r.N}, {"energy", num(r.energy)}, {"bound", r.bound}, {"subadditive", r.subadditive},
          {"rows", rows}};
}

json to_json(const BoundsReport& r) {
  json rows = json::array();
  for (const auto& b : r.rows)
    rows.push_back({{"q", num(b.q)},
                    {"energy", num(b.energy)},
                    {"lower", num(b.lower)},
                    {"upper", num(b.upper)},
                    {"lower_ok", b.lower_ok},
                    {"upper_ok", b.upper_ok}});
  return {{"all_ok", r.all_ok}, {"rows", rows}};
}

json to_json(const ShapeReport& r) {
  return {{"concave", r.concave},
          {"max_concavity_violation", num(r.max_concavity_violation)},
          {"triples_checked", r.triples_checked},
          {"lipschitz", r.lipschitz},
          {"max_lipschitz_ratio", num(r.max_lipschitz_ratio)},
          {"lipschitz_constant", num(r.lipschitz_constant)}};
}

json to_json(const PairSuppression& p) {
  return {{"lhs", num(p.lhs)}, {"rhs", num(p.rhs)}, {"margin", num(p.margin)}, {"holds", p.holds},
          {"window", p.window}};
}

json to_json(const WeakCouplingTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"alpha", num(r.alpha)},
                    {"energy", num(r.energy)},
                    {"gap", num(r.gap)},
                    {"overlap", num(r.overlap)},
                    {"vacuum_distance", num(r.vacuum_distance)},
                    {"converged", r.converged},
                    {"error", r.error}});
  std::vector<double> pos(t.linear.positive_gap.begin(), t.linear.positive_gap.end());
  std::vector<double> neg(t.linear.negative_gap.begin(), t.linear.negative_gap.end());
  return {{"N", t.N},
          {"q0", t.linear.q0},
          {"positive_gap_levels", pos},
          {"negative_gap_levels", neg},
          {"min_homotopy_gap", num(t.linear.min_homotopy_gap)},
          {"limit", num(t.limit)},
          {"limit_padded", num(t.limit_padded)},
          {"intercept", num(t.intercept)},
          {"slope", num(t.slope)},
          {"monotone", t.monotone},
          {"extrapolates", t.extrapolates},
          {"rows", rows}};
}

json to_json(const NonrelTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"c", num(r.c)},
                    {"modes", r.modes},
                    {"g0_zero", num(r.g0_zero)},
                    {"energy", num(r.energy)},
                    {"shifted", num(r.shifted)},
                    {"hf_energy", num(r.hf_energy)},
                    {"gap", num(r.gap)},
                    {"lower_weight", num(r.lower_weight)},
                    {"threshold", num(r.threshold)},
                    {"threshold_at_zero", r.threshold_at_zero},
                    {"converged", r.converged},
                    {"error", r.error}});
  return {{"gap_decreasing", t.gap_decreasing},
          {"weight_exponent", num(t.weight_exponent)},
          {"fitted_limit", num(t.fitted_limit)},
          {"rows", rows}};
}

json to_json(const ScalingCheck& s) {
  return {{"energy_left", num(s.energy_left)},
          {"energy_right", num(s.energy_right)},
          {"residual", num(s.residual)},
          {"relative", num(s.relative)},
          {"operator_residual", num(s.operator_residual)}};
}

json to_json(const Threshold& t) {
  return {{"value", num(t.value)}, {"argmin", num(t.argmin)}, {"attained_at_zero", t.attained_at_zero}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path.string());
    os << text;
    if (!os) throw ConfigError("write failed for " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_json(const std::filesystem::path& path, const json& value) {
  write_text(path, value.dump(2) + "\n");
}

json read_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace bdf
