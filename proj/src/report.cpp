#include "aniso/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace aniso {

ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

ordered_json sweep_spec_to_json(const SweepSpec& spec) {
  ordered_json j;
  j["name"] = spec.name;
  j["dim"] = spec.dim;
  j["norm"] = spec.norm_spec;
  j["gamma"] = spec.gamma;
  j["q"] = spec.q;
  j["box_half_side"] = spec.box_half_side;
  j["resolutions"] = spec.resolutions;
  j["seeds"] = spec.seeds;
  j["seed_base"] = spec.seed_base;
  j["boundary_family"] = spec.boundary_family;
  j["F_family"] = spec.F_family;
  j["f_family"] = spec.f_family;
  j["solver_tolerance"] = spec.solver_tolerance;
  j["enabled"] = spec.enabled;
  ordered_json checks;
  checks["p"] = spec.checks.p;
  checks["theta"] = spec.checks.theta;
  checks["tau"] = spec.checks.tau;
  ordered_json radii = ordered_json::array();
  for (const auto& [r, R] : spec.checks.sup_radii) radii.push_back({r, R});
  checks["sup_radii"] = radii;
  checks["harnack_R"] = spec.checks.harnack_R;
  checks["weak_harnack_R"] = spec.checks.weak_harnack_R;
  checks["caccioppoli_R"] = spec.checks.caccioppoli_R;
  checks["osc_R0"] = spec.checks.osc_R0;
  checks["osc_levels"] = spec.checks.osc_levels;
  j["checks"] = checks;
  return j;
}

ordered_json report_to_json(const VerificationReport& report) {
  ordered_json j;
  j["schema"] = 1;
  j["kind"] = "sweep";
  j["spec"] = sweep_spec_to_json(report.spec);
  j["failed_instances"] = report.failed_instances;

  ordered_json instances = ordered_json::array();
  for (const auto& inst : report.instances) {
    ordered_json ji;
    ji["id"] = inst.id;
    ji["resolution"] = inst.resolution;
    ji["solved"] = inst.solved;
    ji["classification"] = inst.classification;
    if (!inst.error.empty()) ji["error"] = inst.error;
    ji["residual"] = json_number(inst.residual);
    ji["iterations"] = inst.iterations;
    ji["boundary_range"] = {json_number(inst.boundary_min), json_number(inst.boundary_max)};
    ji["field_range"] = {json_number(inst.field_min), json_number(inst.field_max)};
    ordered_json recs = ordered_json::array();
    for (const auto& rec : inst.records) {
      ordered_json jr;
      jr["check"] = rec.check;
      ordered_json center = ordered_json::array();
      for (Index d = 0; d < rec.center.size(); ++d) center.push_back(rec.center[d]);
      jr["center"] = center;
      if (rec.r > 0.0) jr["r"] = rec.r;
      jr["R"] = rec.R;
      jr["ratio"] = json_number(rec.ratio);
      if (rec.degenerate) jr["degenerate"] = true;
      recs.push_back(jr);
    }
    ji["records"] = recs;
    if (!inst.osc_profile.empty()) {
      ordered_json prof = ordered_json::array();
      for (const auto& [r, osc] : inst.osc_profile)
        prof.push_back({json_number(r), json_number(osc)});
      ji["oscillation_profile"] = prof;
    }
    instances.push_back(ji);
  }
  j["instances"] = instances;

  ordered_json summaries = ordered_json::array();
  for (const auto& s : report.summaries) {
    ordered_json js;
    js["check"] = s.check;
    js["resolution"] = s.resolution;
    js["count"] = s.count;
    js["max_ratio"] = json_number(s.max_ratio);
    js["max_instance"] = s.max_instance;
    js["min_ratio"] = json_number(s.min_ratio);
    js["min_instance"] = s.min_instance;
    js["median_ratio"] = json_number(s.median_ratio);
    summaries.push_back(js);
  }
  j["summaries"] = summaries;

  ordered_json alarms = ordered_json::array();
  for (const auto& a : report.alarms) {
    ordered_json ja;
    ja["check"] = a.check;
    ja["statistic"] = a.statistic;
    ja["resolutions"] = a.resolutions;
    ordered_json vals = ordered_json::array();
    for (double v : a.values) vals.push_back(json_number(v));
    ja["values"] = vals;
    ja["worst_step_drift"] = json_number(a.worst_step_drift);
    alarms.push_back(ja);
  }
  j["alarms"] = alarms;
  return j;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

}  // namespace aniso
