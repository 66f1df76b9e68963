#pragma once

// The numbered acceptance criteria as callable checks. The full profile runs the pinned
// problem sizes; the quick profile shrinks lattices and sample counts for `selftest`.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace bdf {

struct CheckProfile {
  bool quick = false;
  std::uint64_t seed = 20240611;
  int jobs = 1;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  /// One-line summary of the measured quantities against their thresholds.
  std::string detail;
  /// Extra diagnostic lines (not part of the verdict).
  std::vector<std::string> notes;
  double seconds = 0.0;
};

CriterionResult check_free_vacuum_expansion(const CheckProfile& p);
CriterionResult check_symbol_chain(const CheckProfile& p);
CriterionResult check_radial_vs_lattice(const CheckProfile& p);
CriterionResult check_energy_positivity(const CheckProfile& p);
CriterionResult check_scf_correctness(const CheckProfile& p);
CriterionResult check_hvz_scaffolding(const CheckProfile& p);
CriterionResult check_weak_coupling(const CheckProfile& p);
CriterionResult check_nonrelativistic(const CheckProfile& p);
CriterionResult check_projector_structure(const CheckProfile& p);
CriterionResult check_lieb_purification(const CheckProfile& p);

/// Criteria 1..10 in order.
std::vector<std::function<CriterionResult(const CheckProfile&)>> all_criteria();

/// Runs the selected criteria (all when empty), catching exceptions as failures.
std::vector<CriterionResult> run_criteria(const CheckProfile& p, const std::vector<int>& ids = {},
                                          const std::function<void(const CriterionResult&)>& on_done = {});

/// "criterion 3 [radial-vs-lattice] PASS ..." style line.
std::string format_line(const CriterionResult& r);

}  // namespace bdf
