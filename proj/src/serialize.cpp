#include "pdd/serialize.hpp"

namespace pdd {

using nlohmann::json;

void to_json(json& j, const Partition& p) { j = p.parts(); }

void from_json(const json& j, Partition& p) { p = Partition::from_unsorted(j.get<std::vector<int>>()); }

void to_json(json& j, const Frequencies& x) { j = json{{"atoms", x.atoms()}, {"residual", x.residual()}}; }

void to_json(json& j, const DeathPath& path) {
    j = json{{"jump_times", path.jump_times}, {"states", path.states}};
}

void to_json(json& j, const DeathProbTable& table) {
    json values = json::array();
    for (const auto& [l, v] : table.values) {
        json row{{"l", l}, {"probability", v}};
        if (auto it = table.precision_bits.find(l); it != table.precision_bits.end()) row["precision_bits"] = it->second;
        values.push_back(row);
    }
    j = json{{"theta", table.theta}, {"t", table.t}, {"collapsed", table.collapsed}, {"rows", values}};
    if (table.n) j["n"] = *table.n;
    else j["n"] = "infinity";
}

const char* to_string(DensityForm form) { return form == DensityForm::Spectral ? "spectral" : "mixture"; }

void to_json(json& j, const DensityEval& d) {
    j = json{{"value", d.value},
             {"truncation_order", d.truncation_order},
             {"tail_estimate", d.tail_estimate},
             {"tail_is_loose", d.tail_is_loose},
             {"form", to_string(d.form)}};
}

void to_json(json& j, const MCReport& r) {
    j = json{{"label", r.label},     {"exact_value", r.exact_value}, {"estimate", r.estimate},
             {"std_error", r.std_error}, {"trials", r.trials},       {"z_score", r.z_score},
             {"z_threshold", r.z_threshold}, {"pass", r.pass}};
}

void to_json(json& j, const ChiSquareResult& r) {
    j = json{{"statistic", r.statistic}, {"degrees_of_freedom", r.degrees_of_freedom},
             {"p_value", r.p_value},     {"cells", r.cells},
             {"p_floor", r.p_floor},     {"pass", r.pass}};
}

void to_json(json& j, const ChiSquareReport& r) {
    j = json{{"what", r.what}, {"chi_square", r.chi}, {"trials", r.trials}, {"excluded", r.excluded},
             {"pass", r.chi.pass}};
}

void to_json(json& j, const FamilyReport& r) {
    j = json{{"tests", r.tests},
             {"failures_at_z3", r.failures_at_z3},
             {"bonferroni_z", r.bonferroni_z},
             {"failures_adjusted", r.failures_adjusted},
             {"max_abs_z", r.max_abs_z},
             {"pass", r.pass}};
}

void to_json(json& j, const RepresentationReport& r) {
    j = json{{"moment", r.moment},
             {"limit_moment", r.limit_moment},
             {"mean_largest_part", r.mean_largest_part},
             {"n_grid", r.n_grid},
             {"median_discrepancy", r.median_discrepancy},
             {"monotone", r.monotone},
             {"pass", r.pass}};
}

void to_json(json& j, const TwoSampleReport& r) {
    j = json{{"reweighted", r.reweighted}, {"direct", r.direct}, {"z_score", r.z_score}, {"pass", r.pass}};
}

void to_json(json& j, const SplitUrnDraw& d) {
    j = json{{"ancestors", d.ancestors}, {"defined", d.defined}};
    if (d.defined) {
        j["ancestor_config"] = d.ancestor_config;
        j["first"] = d.first;
        j["second"] = d.second;
    } else {
        j["first"] = "undefined at size n";
        j["second"] = "undefined at size n";
    }
}

}  // namespace pdd
