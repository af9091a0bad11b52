#include "winstat/hce.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "winstat/error.hpp"

namespace winstat {

void HceDefinition::check() const {
  if (components.empty())
    throw DomainError("HCE definition needs at least one component");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw DomainError("HCE horizon must be a positive finite time");
  std::set<std::string> seen;
  for (const auto& c : components) {
    if (c.name.empty())
      throw DomainError("HCE component with empty name");
    if (!seen.insert(c.name).second)
      throw DomainError("duplicate HCE component name '" + c.name + "'");
    if (!(c.margin >= 0.0))
      throw DomainError("component '" + c.name + "' has negative margin");
    if (c.kind == ComponentKind::TimeToEvent && c.margin != 0.0)
      throw DomainError("time-to-event component '" + c.name +
                        "' must have margin 0");
  }
}

std::optional<std::size_t> HceDefinition::index_of(
    const std::string& name) const {
  for (std::size_t i = 0; i < components.size(); ++i)
    if (components[i].name == name) return i;
  return std::nullopt;
}

namespace {

const Observation& require_observation(const SubjectRecord& rec,
                                       const ComponentSpec& comp) {
  auto it = rec.observations.find(comp.name);
  if (it == rec.observations.end())
    throw ValidationError("subject '" + rec.subject_id +
                          "' has no observation for component '" + comp.name +
                          "'");
  return it->second;
}

void require_valid_times(const SubjectRecord& rec, const ComponentSpec& comp,
                         const Observation& obs) {
  if (rec.followup_time < 0.0)
    throw ValidationError("subject '" + rec.subject_id +
                          "' has negative follow-up time");
  if (obs.kind == Observation::Kind::Event && obs.time < 0.0)
    throw ValidationError("subject '" + rec.subject_id +
                          "' has negative event time on component '" +
                          comp.name + "'");
}

// Adjudicates one component; +1 treatment side, -1 comparator side, 0 tie.
int compare_component(const SubjectRecord& a, const SubjectRecord& b,
                      const ComponentSpec& comp, double horizon) {
  const Observation& oa = require_observation(a, comp);
  const Observation& ob = require_observation(b, comp);
  require_valid_times(a, comp, oa);
  require_valid_times(b, comp, ob);

  if (comp.kind == ComponentKind::TimeToEvent) {
    if (oa.kind != Observation::Kind::Event ||
        ob.kind != Observation::Kind::Event)
      throw ValidationError("component '" + comp.name +
                            "' is time-to-event but an observation is not");
    const double h =
        std::min({a.followup_time, b.followup_time, horizon});
    return detail::compare_tte(oa.occurred, oa.time, ob.occurred, ob.time, h);
  }

  if (oa.kind == Observation::Kind::Event ||
      ob.kind == Observation::Kind::Event)
    throw ValidationError("component '" + comp.name +
                          "' is " +
                          (comp.kind == ComponentKind::Ordinal ? "ordinal"
                                                               : "continuous") +
                          " but an observation carries event data");
  const double va =
      oa.kind == Observation::Kind::Value ? oa.value
                                          : std::nan("");
  const double vb =
      ob.kind == Observation::Kind::Value ? ob.value
                                          : std::nan("");
  return detail::compare_value(va, vb, comp.margin,
                               comp.direction == Direction::HigherBetter);
}

}  // namespace

PairVerdict compare_pair(const SubjectRecord& t_subject,
                         const SubjectRecord& c_subject,
                         const HceDefinition& hce) {
  hce.check();
  PairVerdict verdict;
  for (std::size_t i = 0; i < hce.components.size(); ++i) {
    const int r =
        compare_component(t_subject, c_subject, hce.components[i], hce.horizon);
    const Outcome sub = r > 0   ? Outcome::TreatmentWin
                        : r < 0 ? Outcome::ControlWin
                                : Outcome::Tie;
    verdict.trace.push_back(sub);
    if (sub != Outcome::Tie) {
      verdict.outcome = sub;
      verdict.deciding_component = i;
      return verdict;
    }
  }
  verdict.outcome = Outcome::Tie;
  return verdict;
}

ValidationReport validate_dataset(const std::vector<SubjectRecord>& records,
                                  const HceDefinition& hce) {
  hce.check();
  ValidationReport report;
  auto violation = [&report](const std::string& subject,
                             const std::string& component,
                             const std::string& code, std::string message) {
    report.violations.push_back({subject, component, code, std::move(message)});
  };

  std::set<std::string> ids;
  std::map<std::string, std::size_t> missing_counts;
  for (const auto& rec : records) {
    if (!ids.insert(rec.subject_id).second)
      violation(rec.subject_id, "", "duplicate_id",
                "duplicate subject id '" + rec.subject_id + "'");
    if (rec.arm != 0 && rec.arm != 1)
      violation(rec.subject_id, "", "bad_arm",
                "arm must be 0 (comparator) or 1 (treatment)");
    if (!(rec.followup_time >= 0.0) || !std::isfinite(rec.followup_time))
      violation(rec.subject_id, "", "bad_followup",
                "follow-up time must be a nonnegative finite number");

    for (const auto& comp : hce.components) {
      auto it = rec.observations.find(comp.name);
      if (it == rec.observations.end()) {
        violation(rec.subject_id, comp.name, "missing_component",
                  "no observation for component '" + comp.name + "'");
        continue;
      }
      const Observation& obs = it->second;
      if (comp.kind == ComponentKind::TimeToEvent) {
        if (obs.kind != Observation::Kind::Event) {
          violation(rec.subject_id, comp.name, "kind_mismatch",
                    "time-to-event component requires time and status");
          continue;
        }
        if (obs.time < 0.0)
          violation(rec.subject_id, comp.name, "negative_time",
                    "event time is negative");
        else if (obs.occurred && obs.time > rec.followup_time)
          violation(rec.subject_id, comp.name, "event_after_followup",
                    "event at " + std::to_string(obs.time) +
                        " exceeds follow-up " +
                        std::to_string(rec.followup_time));
        else if (!obs.occurred && obs.time != rec.followup_time)
          violation(rec.subject_id, comp.name, "censoring_time_mismatch",
                    "censored observation must carry the follow-up time");
      } else {
        if (obs.kind == Observation::Kind::Event) {
          violation(rec.subject_id, comp.name, "kind_mismatch",
                    "value component carries event data");
        } else if (obs.kind == Observation::Kind::Missing) {
          ++missing_counts[comp.name];
        } else if (!std::isfinite(obs.value)) {
          violation(rec.subject_id, comp.name, "nonfinite_value",
                    "observation value is not finite");
        }
      }
    }
  }

  for (const auto& comp : hce.components) {
    auto it = missing_counts.find(comp.name);
    if (it == missing_counts.end()) continue;
    std::ostringstream msg;
    msg << it->second << "/" << records.size()
        << " values missing (missing values tie on this component)";
    report.warnings.push_back({"", comp.name, "missing_values", msg.str()});
  }
  return report;
}

}  // namespace winstat
