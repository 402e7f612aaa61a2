#include "sgcalc/scenario.hpp"

#include "sgcalc/errors.hpp"

namespace sgcalc {

namespace {

const char* kFourier = R"json({
  "name": "fourier",
  "description": "pairing phase in one variable, from admissibility to the regularized pairing",
  "dims": {"d": 1, "s": 1},
  "expressions": {
    "phi": "dot(x, t)",
    "one": "1",
    "weight": "jb(x) * jb(t)"
  },
  "triples": {
    "phi": {"e": "dot(x, t)", "psi": "dot(x, t)", "psie": "dot(x, t)"}
  },
  "test_functions": {
    "u": {"profile": "1", "quad": [[0.5]], "center": [0.0]}
  },
  "tasks": [
    {"task": "check-symbol", "symbol": "weight", "order": [1.0, 1.0]},
    {"task": "check-phase", "phase": "phi"},
    {"task": "stationary", "phase": "phi"},
    {"task": "lagrangian-verify", "phase": "phi"},
    {"task": "oscint", "phase": "phi", "amplitude": "one", "test_function": "u",
     "expect_value": [6.283185307179586, 0.0], "rel_tol": 0.01}
  ]
}
)json";

const char* kKg = R"json({
  "name": "kg",
  "description": "hyperbolic normal phase with a cone-type stationary set and a wave-front probe grid",
  "dims": {"d": 1, "s": 1},
  "expressions": {
    "phi": "dot(x, t) - jb(t)",
    "one": "1"
  },
  "triples": {
    "phi": {"e": "dot(x, t)", "psi": "dot(x, t) - sqrt(norm2(t))", "psie": "dot(x, t)"}
  },
  "tasks": [
    {"task": "check-phase", "phase": "phi"},
    {"task": "stationary", "phase": "phi"},
    {"task": "lagrangian-verify", "phase": "phi"},
    {"task": "wavefront", "phase": "phi", "amplitude": "one",
     "x_grid": [[-1.5], [-1.0], [-0.5], [0.0], [0.5], [1.0], [1.5]],
     "directions": [[1.0], [-1.0]],
     "lambdas": [8.0, 16.0, 32.0, 64.0, 128.0],
     "inclusion_tol": 0.05}
  ]
}
)json";

const char* kDegenerate = R"json({
  "name": "degenerate",
  "description": "plane pairing with an idle base coordinate; bundled negative fixture, the admissibility check is expected to fail",
  "dims": {"d": 2, "s": 1},
  "expressions": {
    "phi": "x1 * t1"
  },
  "tasks": [
    {"task": "check-phase", "phase": "phi", "expect": "fail"}
  ]
}
)json";

const char* kRoundtrip = R"json({
  "name": "roundtrip",
  "description": "graph data rebuilt into a phase whose stationary clouds match the original",
  "dims": {"d": 1, "s": 1},
  "expressions": {
    "phi": "dot(x, t) - jb(t)"
  },
  "triples": {
    "phi": {"e": "dot(x, t)", "psi": "dot(x, t) - sqrt(norm2(t))", "psie": "dot(x, t)"}
  },
  "graphs": {
    "g": {"Xpsi": ["t1 / sqrt(norm2(t))"]}
  },
  "tasks": [
    {"task": "parametrize", "graph": "g", "against": "phi", "tol": 1e-6}
  ]
}
)json";

const char* kEquivalencePair = R"json({
  "name": "equivalence-pair",
  "description": "two linearly related pairing phases recognized as equivalent at the principal level",
  "dims": {"d": 2, "s": 2},
  "expressions": {
    "phi1": "dot(x, t)",
    "phi2": "x1*(2*t1 + t2) + x2*t2"
  },
  "triples": {
    "phi1": {"e": "dot(x, t)", "psi": "dot(x, t)", "psie": "dot(x, t)"},
    "phi2": {"e": "x1*(2*t1 + t2) + x2*t2", "psi": "x1*(2*t1 + t2) + x2*t2",
             "psie": "x1*(2*t1 + t2) + x2*t2"}
  },
  "tasks": [
    {"task": "equivalence", "phase": "phi1", "other": "phi2"}
  ]
}
)json";

}  // namespace

const std::vector<CorpusEntry>& corpus_list() {
  static const std::vector<CorpusEntry> entries = {
      {"fourier",
       "pairing phase in one variable: symbol check, admissibility, stationary "
       "geometry, Lagrangian certificate, regularized pairing (value 2 pi)",
       kFourier},
      {"kg",
       "hyperbolic normal phase: cone-type stationary set, Lagrangian "
       "certificate, wave-front probe grid checked against the cloud",
       kKg},
      {"degenerate",
       "plane pairing with an idle base coordinate: admissibility fails with a "
       "witness (negative fixture, expected failure)",
       kDegenerate},
      {"roundtrip",
       "graph data rebuilt into a phase whose stationary clouds match the "
       "original",
       kRoundtrip},
      {"equivalence-pair",
       "two linearly related pairing phases recognized as equivalent at the "
       "principal level",
       kEquivalencePair},
  };
  return entries;
}

const CorpusEntry& corpus_get(const std::string& name) {
  for (const CorpusEntry& e : corpus_list())
    if (e.name == name) return e;
  throw InvalidInput("invalid input: no bundled scenario named '" + name + "'");
}

}  // namespace sgcalc
