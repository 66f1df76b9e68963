#pragma once

// Persistence: binary state files, CSV tables and JSON reports.

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>

#include "json.hpp"

#include "bdf/core.hpp"
#include "bdf/energy.hpp"
#include "bdf/hvz.hpp"
#include "bdf/limits.hpp"
#include "bdf/scf.hpp"

namespace bdf {

using json = nlohmann::json;

/// A state Q with the lattice parameters needed to rebuild its basis.
struct StateFile {
  double box_length = 0.0;
  double cutoff = 0.0;
  int spinor_dim = 4;
  Mat Q;
};

/// Little-endian layout: "BDFQ", u32 version, f64 L, f64 cutoff, i32 spinor_dim, i64 dim,
/// then dim x dim complex<f64> entries in row-major order.
void write_state(const std::filesystem::path& path, const StateFile& state);
StateFile read_state(const std::filesystem::path& path);

/// Columns: kx, ky, kz, re, im (one row per lattice difference vector).
void write_density_csv(std::ostream& os, const ChargeDensity& rho);
/// Columns: q, energy, mu, residual, iterations, converged, error.
void write_curve_csv(std::ostream& os, const EnergyCurve& curve);
void write_weak_coupling_csv(std::ostream& os, const WeakCouplingTable& table);
void write_nonrel_csv(std::ostream& os, const NonrelTable& table);

json to_json(const ScfReport& report, bool with_trace = false);
json to_json(const BindingReport& report);
json to_json(const BoundsReport& report);
json to_json(const ShapeReport& report);
json to_json(const PairSuppression& report);
json to_json(const WeakCouplingTable& table);
json to_json(const NonrelTable& table);
json to_json(const ScalingCheck& check);
json to_json(const Threshold& threshold);

void write_json(const std::filesystem::path& path, const json& value);
json read_json(const std::filesystem::path& path);

/// Writes text atomically enough for batch use (temporary file, then rename).
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace bdf
