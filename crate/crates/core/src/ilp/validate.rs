//! Assignment ingestion and certification.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{IlpMode, IlpModel, RowFamily, Sense, Var};
use crate::error::{Error, Result};
use crate::graph::{components, remove_devices, AttackSet, DeviceId, Graph};
use crate::score::{score, ScoreReport};

/// Values for the model variables. Missing pair values are derived from the
/// true connectivity of the graph after the cut.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    pub node_values: BTreeMap<DeviceId, bool>,
    pub pair_values: Option<BTreeMap<(DeviceId, DeviceId), bool>>,
}

impl Assignment {
    /// `v_i = 1` exactly for devices in `cut`; pair values left to derivation.
    pub fn from_cut(g: &Graph, cut: &[DeviceId]) -> Self {
        Assignment {
            node_values: g.ids().map(|id| (id, cut.contains(&id))).collect(),
            pair_values: None,
        }
    }

    /// Like [`Assignment::from_cut`] with every `u` set to the connectivity of `G - cut`.
    pub fn from_cut_with_pairs(g: &Graph, cut: &[DeviceId]) -> Result<Self> {
        let mut asg = Assignment::from_cut(g, cut);
        let residual = remove_devices(g, cut)?;
        let mut pairs = BTreeMap::new();
        let ids: Vec<_> = g.ids().collect();
        for (x, &i) in ids.iter().enumerate() {
            for &j in &ids[x + 1..] {
                pairs.insert((i, j), false);
            }
        }
        for comp in components(&residual, &AttackSet::empty()) {
            for (x, &i) in comp.devices.iter().enumerate() {
                for &j in &comp.devices[x + 1..] {
                    pairs.insert((i, j), true);
                }
            }
        }
        asg.pair_values = Some(pairs);
        Ok(asg)
    }

    /// Parses `name value` lines. Blank lines and lines starting with `#` are
    /// skipped; values must be within 1e-6 of 0 or 1.
    pub fn parse(text: &str) -> Result<Self> {
        let mut asg = Assignment::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: n + 1, message };
            let mut fields = line.split_whitespace();
            let (name, value) = match (fields.next(), fields.next(), fields.next()) {
                (Some(name), Some(value), None) => (name, value),
                _ => return Err(parse_err(format!("expected `name value`, got {line:?}"))),
            };
            let var: Var = name.parse().map_err(parse_err)?;
            let value: f64 = value
                .parse()
                .map_err(|_| parse_err(format!("value {value:?} is not a number")))?;
            let bit = if value.abs() < 1e-6 {
                false
            } else if (value - 1.0).abs() < 1e-6 {
                true
            } else {
                return Err(parse_err(format!("value {value} of {name} is not binary")));
            };
            let duplicate = match var {
                Var::Node(id) => asg.node_values.insert(id, bit).is_some(),
                Var::Pair(i, j) => asg.pair_values.get_or_insert_with(BTreeMap::new).insert((i, j), bit).is_some(),
            };
            if duplicate {
                return Err(parse_err(format!("variable {name} assigned twice")));
            }
        }
        Ok(asg)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, &v) in &self.node_values {
            let _ = writeln!(out, "{} {}", Var::Node(*id), v as u8);
        }
        for (&(i, j), &v) in self.pair_values.iter().flatten() {
            let _ = writeln!(out, "{} {}", Var::Pair(i, j), v as u8);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub row: String,
    pub family: RowFamily,
    pub lhs: i64,
    pub sense: Sense,
    pub bound: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violated_constraints: Vec<Violation>,
    pub implied_cut: Vec<DeviceId>,
    pub recomputed: ScoreReport,
    /// Model objective evaluated on the (completed) assignment.
    pub model_objective: i128,
    /// `phi` in lexicographic mode, vulnerability in vulnerability-only mode.
    pub recomputed_objective: i128,
    pub objective_gap: i128,
}

impl ValidationReport {
    pub fn is_certified(&self) -> bool {
        self.violated_constraints.is_empty() && self.objective_gap == 0
    }
}

/// Checks every row of `model` against `asg` and rescoring `G - C` from the
/// `v` values alone.
pub fn validate_assignment(
    model: &IlpModel,
    asg: &Assignment,
    g: &Graph,
    a: &AttackSet,
) -> Result<ValidationReport> {
    if !g.ids().eq(model.devices().iter().copied()) {
        return Err(Error::invalid("model was built for a different device set"));
    }
    a.check(g)?;
    if (0..model.devices().len()).any(|p| model.is_attacked(p) != a.contains(model.devices()[p])) {
        return Err(Error::invalid("model was built for a different attacked set"));
    }

    let n = model.devices().len();
    let mut node = vec![false; n];
    let mut seen = vec![false; n];
    for (&id, &value) in &asg.node_values {
        let p = model
            .position(id)
            .ok_or_else(|| Error::invalid(format!("assignment references unknown variable {}", Var::Node(id))))?;
        node[p] = value;
        seen[p] = true;
    }
    if let Some(p) = seen.iter().position(|s| !s) {
        return Err(Error::invalid(format!(
            "assignment is missing variable {}",
            Var::Node(model.devices()[p])
        )));
    }
    let implied_cut: Vec<DeviceId> = (0..n).filter(|&p| node[p]).map(|p| model.devices()[p]).collect();

    // derived connectivity of G - C, then overridden by explicit pair values
    let residual = remove_devices(g, &implied_cut)?;
    let mut component_of = vec![usize::MAX; n];
    for (c, comp) in components(&residual, &AttackSet::empty()).iter().enumerate() {
        for id in &comp.devices {
            component_of[model.position(*id).expect("residual device belongs to the model")] = c;
        }
    }
    let mut pair = vec![false; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let connected = component_of[i] != usize::MAX && component_of[i] == component_of[j];
            pair[i * n + j] = connected;
        }
    }
    for (&(i, j), &value) in asg.pair_values.iter().flatten() {
        let unknown = || Error::invalid(format!("assignment references unknown variable {}", Var::Pair(i, j)));
        let pi = model.position(i).ok_or_else(unknown)?;
        let pj = model.position(j).ok_or_else(unknown)?;
        pair[pi.min(pj) * n + pi.max(pj)] = value;
    }

    let value_of = |var: Var| -> i64 {
        match var {
            Var::Node(id) => node[model.position(id).expect("model variable")] as i64,
            Var::Pair(i, j) => {
                let (pi, pj) = (model.position(i).expect("model variable"), model.position(j).expect("model variable"));
                pair[pi * n + pj] as i64
            }
        }
    };

    let mut violated = Vec::new();
    for row in model.rows() {
        let lhs: i64 = row.terms.iter().map(|&(c, v)| c * value_of(v)).sum();
        if !row.sense.holds(lhs, row.rhs) {
            violated.push(Violation {
                row: row.name,
                family: row.family,
                lhs,
                sense: row.sense,
                bound: row.rhs,
            });
        }
    }

    let model_objective: i128 = model
        .objective()
        .iter()
        .map(|&(c, v)| c * value_of(v) as i128)
        .sum();
    let recomputed = score(&residual, &a.restricted_to(&residual), n as u64)?;
    let recomputed_objective = match model.mode() {
        IlpMode::Lexicographic => recomputed.phi,
        IlpMode::VulnerabilityOnly => recomputed.vulnerability as i128,
    };

    Ok(ValidationReport {
        violated_constraints: violated,
        implied_cut,
        recomputed,
        model_objective,
        recomputed_objective,
        objective_gap: model_objective - recomputed_objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilp::build_model;

    fn k2_model() -> (Graph, AttackSet, IlpModel) {
        let g = Graph::from_ids([1, 2], [(1, 2)]).unwrap();
        let a = AttackSet::new([1]);
        let m = build_model(&g, &a, 1, IlpMode::Lexicographic).unwrap();
        (g, a, m)
    }

    #[test]
    fn k2_cut_attacked_device() {
        let (g, a, m) = k2_model();
        let asg = Assignment::parse("v_1 1\nv_2 0\nu_1_2 0\n").unwrap();
        let r = validate_assignment(&m, &asg, &g, &a).unwrap();
        assert!(r.violated_constraints.is_empty());
        assert_eq!(r.implied_cut, vec![1]);
        assert_eq!((r.recomputed.vulnerability, r.recomputed.healthiness), (0, 0));
        assert_eq!(r.objective_gap, 0);
        assert!(r.is_certified());
    }

    #[test]
    fn k2_disconnected_pair_without_cut_violates_upper_edge_row() {
        let (g, a, m) = k2_model();
        let asg = Assignment::parse("v_1 0\nv_2 0\nu_1_2 0\n").unwrap();
        let r = validate_assignment(&m, &asg, &g, &a).unwrap();
        assert_eq!(r.violated_constraints.len(), 1);
        let v = &r.violated_constraints[0];
        assert_eq!((v.row.as_str(), v.family), ("c3", RowFamily::EdgeUpper));
        // (1 - 0) + (1 - 0) - 0 = 2 > 1, moved to -v1 - v2 - 2u = 0 > -1
        assert_eq!((v.lhs, v.bound), (0, -1));
        assert!(!r.is_certified());
    }

    #[test]
    fn zero_assignment_on_edgeless_graph() {
        let g = Graph::from_ids([1, 2, 3], []).unwrap();
        let a = AttackSet::empty();
        let m = build_model(&g, &a, 1, IlpMode::Lexicographic).unwrap();
        let asg = Assignment::parse("v_1 0\nv_2 0\nv_3 0\nu_1_2 0\nu_1_3 0\nu_2_3 0").unwrap();
        let r = validate_assignment(&m, &asg, &g, &a).unwrap();
        assert!(r.is_certified());
    }

    #[test]
    fn inflated_healthiness_is_caught_by_gap() {
        // two healthy devices in different components, u claims connection
        let g = Graph::from_ids([1, 2], []).unwrap();
        let a = AttackSet::empty();
        let m = build_model(&g, &a, 0, IlpMode::Lexicographic).unwrap();
        let asg = Assignment::parse("v_1 0\nv_2 0\nu_1_2 1").unwrap();
        let r = validate_assignment(&m, &asg, &g, &a).unwrap();
        assert!(r.violated_constraints.is_empty());
        assert_eq!(r.objective_gap, -1);
        assert!(!r.is_certified());
    }

    #[test]
    fn omitted_pairs_are_derived() {
        let g = Graph::from_ids([0, 1, 2], [(0, 1), (1, 2)]).unwrap();
        let a = AttackSet::new([1]);
        let m = build_model(&g, &a, 1, IlpMode::Lexicographic).unwrap();
        let r = validate_assignment(&m, &Assignment::from_cut(&g, &[1]), &g, &a).unwrap();
        assert!(r.is_certified());
        let full = Assignment::from_cut_with_pairs(&g, &[1]).unwrap();
        assert_eq!(validate_assignment(&m, &full, &g, &a).unwrap(), r);
    }

    #[test]
    fn unknown_and_missing_variables() {
        let (g, a, m) = k2_model();
        let unknown = Assignment::parse("v_1 0\nv_2 0\nv_9 0").unwrap();
        assert!(matches!(validate_assignment(&m, &unknown, &g, &a), Err(Error::InvalidArgument(_))));
        let unknown_pair = Assignment::parse("v_1 0\nv_2 0\nu_1_9 1").unwrap();
        assert!(validate_assignment(&m, &unknown_pair, &g, &a).is_err());
        let missing = Assignment::parse("v_1 0").unwrap();
        assert!(validate_assignment(&m, &missing, &g, &a).is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match Assignment::parse("# header\nv_1 1\nv_2 0.5\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(Assignment::parse("x_1 1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(Assignment::parse("v_1 1\nv_1 0"), Err(Error::Parse { line: 2, .. })));
        let asg = Assignment::parse("v_1 0.9999999\nv_2 -0\n").unwrap();
        assert!(asg.node_values[&1]);
        assert!(!asg.node_values[&2]);
    }

    #[test]
    fn text_round_trip() {
        let g = Graph::from_ids([0, 1, 2], [(0, 1)]).unwrap();
        let asg = Assignment::from_cut_with_pairs(&g, &[2]).unwrap();
        assert_eq!(Assignment::parse(&asg.to_text()).unwrap(), asg);
    }
}
