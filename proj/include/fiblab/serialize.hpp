#pragma once

// JSON encodings of maps, jets and every report. Vectors are arrays, matrices
// are arrays of rows, and key order is fixed, so equal inputs give equal bytes.

#include <string>

#include <json.hpp>

#include "fiblab/discriminant.hpp"
#include "fiblab/flow.hpp"
#include "fiblab/jet.hpp"
#include "fiblab/lifting.hpp"
#include "fiblab/milnorfield.hpp"
#include "fiblab/polymap.hpp"
#include "fiblab/regularity.hpp"

namespace fiblab {

using json = nlohmann::ordered_json;

/// Parses the map fragment. Errors name the offending field, prefixed by
/// `where` (e.g. "map.components[1][0].e").
PolynomialMap map_from_json(const nlohmann::json& doc, const std::string& where = "map");

json to_json(const PolynomialMap& map);
json to_json(const Vec& v);
json to_json(const Mat& m);

/// Keys exactly x, fx, J, grad_h, grad_H, phi, Fx, DF, aug.
json jet_to_json(const Jet& jet);

json to_json(const lifting::CaseLabel& label);
json to_json(const lifting::LiftPair& lifts);
json to_json(const lifting::KeypropViolation& v);

json to_json(const milnorfield::FieldSample& sample);
json to_json(const milnorfield::NodReport& report);
json to_json(const milnorfield::FieldScanReport& report);

json to_json(const regularity::RegularityReport& report);
json to_json(const regularity::TransversalityReport& report);

json to_json(const discriminant::DiscriminantReport& report);

/// Summary without the step list.
json trace_summary(const flow::FlowTrace& trace);
json to_json(const flow::FlowStep& step);
json to_json(const flow::EquivalenceReport& report);

}  // namespace fiblab
