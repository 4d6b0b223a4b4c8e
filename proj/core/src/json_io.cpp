#include "twotime/json_io.hpp"

#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <json.hpp>

namespace twotime {

namespace {

using nlohmann::json;

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::ParseError, what);
}

json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    malformed(std::string("invalid JSON: ") + e.what());
  }
}

const json& field(const json& obj, const char* key) {
  if (!obj.is_object()) malformed(std::string("expected an object with key '") + key + "'");
  const auto it = obj.find(key);
  if (it == obj.end()) malformed(std::string("missing key '") + key + "'");
  return *it;
}

std::size_t read_dim(const json& obj) {
  const json& d = field(obj, "dim");
  if (!d.is_number_unsigned() || d.get<std::size_t>() == 0) {
    malformed("'dim' must be a positive integer");
  }
  return d.get<std::size_t>();
}

Complex read_complex(const json& c) {
  if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number()) {
    malformed("a complex scalar must be a two-element numeric array [re, im]");
  }
  return {c[0].get<double>(), c[1].get<double>()};
}

StateVector read_state(const json& obj) {
  const std::size_t dim = read_dim(obj);
  const json& amps = field(obj, "amplitudes");
  if (!amps.is_array()) malformed("'amplitudes' must be an array");
  if (amps.size() != dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "'amplitudes' has " + std::to_string(amps.size()) + " entries but dim is " +
                    std::to_string(dim));
  }
  CVector v(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) v(static_cast<Eigen::Index>(i)) = read_complex(amps[i]);
  return StateVector(std::move(v));
}

json write_state(const CVector& v) {
  json amps = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) amps.push_back({v(i).real(), v(i).imag()});
  return json{{"dim", v.size()}, {"amplitudes", std::move(amps)}};
}

}  // namespace

StateVector parse_state_vector(std::string_view text) { return read_state(parse_document(text)); }

Observable parse_observable(std::string_view text) {
  const json doc = parse_document(text);
  const std::size_t dim = read_dim(doc);
  const json& outs = field(doc, "outcomes");
  if (!outs.is_array() || outs.empty()) malformed("'outcomes' must be a nonempty array");

  std::vector<Outcome> outcomes;
  outcomes.reserve(outs.size());
  for (const json& o : outs) {
    const json& label = field(o, "label");
    if (!label.is_string()) malformed("outcome 'label' must be a string");
    const json& span = field(o, "span");
    if (!span.is_array() || span.empty()) malformed("outcome 'span' must be a nonempty array");
    std::vector<StateVector> vectors;
    vectors.reserve(span.size());
    for (const json& s : span) {
      vectors.push_back(read_state(s));
      if (vectors.back().dim() != dim) {
        throw Error(ErrorCode::DimensionMismatch,
                    "span vector of outcome '" + label.get<std::string>() +
                        "' does not match the observable dim");
      }
    }
    const std::string name = label.get<std::string>();
    outcomes.push_back({name, projector_from_span(vectors, name)});
  }
  return Observable(std::move(outcomes));
}

std::string to_json(const StateVector& psi) { return write_state(psi.amplitudes()).dump(); }

std::string to_json(const Observable& q) {
  json outs = json::array();
  for (const Outcome& o : q.outcomes()) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(o.projector.matrix());
    json span = json::array();
    const auto& evals = solver.eigenvalues();
    for (Eigen::Index k = evals.size(); k-- > 0;) {
      if (evals(k) < 0.5) continue;
      span.push_back(write_state(solver.eigenvectors().col(k)));
    }
    outs.push_back({{"label", o.label}, {"span", std::move(span)}});
  }
  return json{{"dim", q.dim()}, {"outcomes", std::move(outs)}}.dump();
}

}  // namespace twotime
