#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace winstat {

enum class ComponentKind { TimeToEvent, Ordinal, Continuous };

/// For TimeToEvent the event is adverse: later-or-never is better and the
/// direction field is ignored.
enum class Direction { HigherBetter, LowerBetter };

/// One level of a hierarchical composite endpoint.
struct ComponentSpec {
  std::string name;
  ComponentKind kind = ComponentKind::Continuous;
  Direction direction = Direction::HigherBetter;
  /// Absolute differences <= margin are ties (Ordinal/Continuous only;
  /// must be 0 for TimeToEvent).
  double margin = 0.0;
};

/// Ordered hierarchy of endpoint components, most severe first, plus the
/// fixed comparison horizon (months) that caps all time-to-event
/// adjudications.
struct HceDefinition {
  std::vector<ComponentSpec> components;
  double horizon = 0.0;

  /// Throws DomainError if any structural invariant is violated.
  void check() const;
  /// Index of a component by name, or nullopt.
  std::optional<std::size_t> index_of(const std::string& name) const;
};

/// Per-component observation for one subject. TimeToEvent components carry
/// (occurred, time); Ordinal/Continuous carry a value or a missing marker.
struct Observation {
  enum class Kind { Event, Value, Missing };
  Kind kind = Kind::Missing;
  bool occurred = false;  // Event only
  double time = 0.0;      // Event only; censored observations carry the
                          // subject's follow-up time
  double value = 0.0;     // Value only

  static Observation event(bool occurred, double time) {
    return Observation{Kind::Event, occurred, time, 0.0};
  }
  static Observation measured(double value) {
    return Observation{Kind::Value, false, 0.0, value};
  }
  static Observation missing() { return Observation{}; }
};

struct SubjectRecord {
  std::string subject_id;
  int arm = 0;  // 1 = treatment, 0 = comparator
  std::optional<std::string> stratum;
  double followup_time = 0.0;  // months
  std::map<std::string, Observation> observations;
};

enum class Outcome { TreatmentWin, ControlWin, Tie };

/// Adjudication of one cross-arm pair. `trace` holds the per-component
/// sub-verdicts up to and including the deciding component (so every entry
/// before the deciding index is Tie).
struct PairVerdict {
  Outcome outcome = Outcome::Tie;
  std::optional<std::size_t> deciding_component;  // 0-based
  std::vector<Outcome> trace;
};

struct ValidationIssue {
  std::string subject_id;  // empty for dataset-level issues
  std::string component;   // empty when not component-specific
  std::string code;
  std::string message;
};

/// Violations make the dataset non-analyzable; warnings (missing-value
/// rates) do not.
struct ValidationReport {
  std::vector<ValidationIssue> violations;
  std::vector<ValidationIssue> warnings;
  bool ok() const { return violations.empty(); }
};

/// Compares one treatment-side subject against one comparator-side subject
/// over the hierarchy, first non-tie component decides.
///
/// TimeToEvent rule with horizon tau: let H = min(followup_a, followup_b,
/// tau); side A wins iff B's event occurs at t_B <= H and A is known
/// event-free through t_B. Ordinal/Continuous rule: tie if either value is
/// missing or |va - vb| <= margin, otherwise the direction decides.
///
/// Pure function; the records' arm fields are not consulted. Throws
/// ValidationError on a missing component entry or negative times.
PairVerdict compare_pair(const SubjectRecord& t_subject,
                         const SubjectRecord& c_subject,
                         const HceDefinition& hce);

/// Collects every invariant violation (duplicate ids, missing components,
/// time inconsistencies, bad arm codes) plus missing-value-rate warnings.
ValidationReport validate_dataset(const std::vector<SubjectRecord>& records,
                                  const HceDefinition& hce);

namespace detail {

/// Single-component time-to-event comparison. Returns +1 if side a wins,
/// -1 if side b wins, 0 for a tie. `h` is the shared decidable window
/// min(followup_a, followup_b, horizon).
inline int compare_tte(bool occ_a, double t_a, bool occ_b, double t_b,
                       double h) {
  const bool a_wins = occ_b && t_b <= h && (!occ_a || t_a > t_b);
  if (a_wins) return 1;
  const bool b_wins = occ_a && t_a <= h && (!occ_b || t_b > t_a);
  if (b_wins) return -1;
  return 0;
}

/// Single-component value comparison; NaN marks a missing value.
inline int compare_value(double va, double vb, double margin,
                         bool higher_better) {
  if (va != va || vb != vb) return 0;  // missing -> tie
  const double d = va - vb;
  if (d <= margin && -d <= margin) return 0;
  const int sign = d > 0 ? 1 : -1;
  return higher_better ? sign : -sign;
}

}  // namespace detail
}  // namespace winstat
