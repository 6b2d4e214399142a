//! Integer programming formulation of the isolation problem.
//!
//! Variables: `v_i` is 1 when device `i` is isolated; `u_i_j` (one per
//! unordered pair, `i < j`) is 1 when `i` and `j` are connected after the cut.
//!
//! Rows, in construction order:
//!
//! 1. budget: `sum v_i <= k`
//! 2. per connection `{i, j}`: `(1 - v_i) + (1 - v_j) - 2 u_ij >= 0` and `<= 1`
//! 3. per unordered triple `{i, j, k}`: the three transitivity rows
//!    `u_ij + u_jk - u_ik <= 1`, `u_ij - u_jk + u_ik <= 1`, `-u_ij + u_jk + u_ik <= 1`
//! 4. per pair: `u_ij + v_i <= 1` and `u_ij + v_j <= 1`
//!
//! The lexicographic objective rewards healthy `u` variables, and nothing in
//! rows 1-3 forces a healthy pair across two components to 0. Rows 4 at least
//! pin pairs touching isolated devices. An external solver's objective is
//! therefore untrusted: [`validate_assignment`] certifies a solution from its
//! `v` values alone.

mod lp;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::combinations::binomial;
use crate::error::{Error, Result};
use crate::graph::{AttackSet, DeviceId, Graph};

pub use lp::emit_lp;
pub use validate::{validate_assignment, Assignment, ValidationReport, Violation};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IlpMode {
    /// `(n^2 + 1) * vulnerable pairs - healthy pairs`
    #[default]
    Lexicographic,
    /// Vulnerable pairs only, each with coefficient 1.
    VulnerabilityOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Node(DeviceId),
    /// Always stored with the smaller id first.
    Pair(DeviceId, DeviceId),
}

impl Var {
    pub fn pair(a: DeviceId, b: DeviceId) -> Var {
        Var::Pair(a.min(b), a.max(b))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Node(i) => write!(f, "v_{i}"),
            Var::Pair(i, j) => write!(f, "u_{i}_{j}"),
        }
    }
}

impl FromStr for Var {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("unrecognised variable name {s:?}");
        if let Some(rest) = s.strip_prefix("v_") {
            return rest.parse().map(Var::Node).map_err(|_| bad());
        }
        if let Some(rest) = s.strip_prefix("u_") {
            let (a, b) = rest.split_once('_').ok_or_else(bad)?;
            let (a, b): (DeviceId, DeviceId) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
            if a == b {
                return Err(format!("pair variable {s:?} joins a device with itself"));
            }
            return Ok(Var::pair(a, b));
        }
        Err(bad())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

impl Sense {
    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Sense::Le => lhs <= rhs,
            Sense::Ge => lhs >= rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowFamily {
    Budget,
    EdgeLower,
    EdgeUpper,
    Transitivity,
    IsolatedPair,
}

/// Compact row description over device positions `i < j < k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Constraint {
    Budget,
    EdgeLower(usize, usize),
    EdgeUpper(usize, usize),
    /// `negated` picks the pair with coefficient -1: 0 → `ik`, 1 → `jk`, 2 → `ij`.
    Transitivity { i: usize, j: usize, k: usize, negated: u8 },
    IsolatedPair { i: usize, j: usize, endpoint: usize },
}

/// A constraint row with explicit terms, `sum coef * var  sense  rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub name: String,
    pub family: RowFamily,
    pub terms: Vec<(i64, Var)>,
    pub sense: Sense,
    pub rhs: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IlpModel {
    mode: IlpMode,
    budget: usize,
    devices: Vec<DeviceId>,
    connection_count: usize,
    attacked: Vec<bool>,
    constraints: Vec<Constraint>,
}

/// Builds the full model for `(g, a, k)`.
pub fn build_model(g: &Graph, a: &AttackSet, k: usize, mode: IlpMode) -> Result<IlpModel> {
    a.check(g)?;
    let n = g.device_count();
    let devices: Vec<DeviceId> = g.ids().collect();
    let attacked = a.mask(g);

    let rows = 1
        + 2 * g.connection_count()
        + 3 * binomial(n as u64, 3) as usize
        + 2 * binomial(n as u64, 2) as usize;
    let mut constraints = Vec::with_capacity(rows);
    constraints.push(Constraint::Budget);
    for (i, list) in g.adjacency().iter().enumerate() {
        for &j in list.iter().filter(|&&j| j > i) {
            constraints.push(Constraint::EdgeLower(i, j));
            constraints.push(Constraint::EdgeUpper(i, j));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for negated in 0..3 {
                    constraints.push(Constraint::Transitivity { i, j, k, negated });
                }
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            constraints.push(Constraint::IsolatedPair { i, j, endpoint: i });
            constraints.push(Constraint::IsolatedPair { i, j, endpoint: j });
        }
    }
    if constraints.len() != rows {
        return Err(Error::invalid("constraint count mismatch"));
    }

    Ok(IlpModel {
        mode,
        budget: k,
        devices,
        connection_count: g.connection_count(),
        attacked,
        constraints,
    })
}

impl IlpModel {
    pub fn mode(&self) -> IlpMode {
        self.mode
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn devices(&self) -> &[DeviceId] {
        &self.devices
    }

    pub fn connection_count(&self) -> usize {
        self.connection_count
    }

    pub fn node_vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.devices.iter().map(|&id| Var::Node(id))
    }

    /// Pair variables in lexicographic order.
    pub fn pair_vars(&self) -> impl Iterator<Item = Var> + '_ {
        let n = self.devices.len();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| Var::Pair(self.devices[i], self.devices[j])))
    }

    pub fn variable_count(&self) -> usize {
        let n = self.devices.len();
        n + n * n.saturating_sub(1) / 2
    }

    pub fn row_count(&self) -> usize {
        self.constraints.len()
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = Row> + '_ {
        (0..self.constraints.len()).map(|r| self.row(r))
    }

    pub fn row(&self, index: usize) -> Row {
        let d = &self.devices;
        let u = |i: usize, j: usize| Var::Pair(d[i], d[j]);
        let (family, terms, sense, rhs) = match self.constraints[index] {
            Constraint::Budget => (
                RowFamily::Budget,
                d.iter().map(|&id| (1, Var::Node(id))).collect(),
                Sense::Le,
                self.budget as i64,
            ),
            Constraint::EdgeLower(i, j) => (
                RowFamily::EdgeLower,
                vec![(-1, Var::Node(d[i])), (-1, Var::Node(d[j])), (-2, u(i, j))],
                Sense::Ge,
                -2,
            ),
            Constraint::EdgeUpper(i, j) => (
                RowFamily::EdgeUpper,
                vec![(-1, Var::Node(d[i])), (-1, Var::Node(d[j])), (-2, u(i, j))],
                Sense::Le,
                -1,
            ),
            Constraint::Transitivity { i, j, k, negated } => {
                let sign = |which: u8| if which == negated { -1 } else { 1 };
                (
                    RowFamily::Transitivity,
                    vec![(sign(2), u(i, j)), (sign(1), u(j, k)), (sign(0), u(i, k))],
                    Sense::Le,
                    1,
                )
            }
            Constraint::IsolatedPair { i, j, endpoint } => (
                RowFamily::IsolatedPair,
                vec![(1, u(i, j)), (1, Var::Node(d[endpoint]))],
                Sense::Le,
                1,
            ),
        };
        Row {
            name: format!("c{}", index + 1),
            family,
            terms,
            sense,
            rhs,
        }
    }

    /// Objective terms over pair variables in lexicographic order; pairs with
    /// coefficient zero are omitted.
    pub fn objective(&self) -> Vec<(i128, Var)> {
        let n = self.devices.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let c = self.pair_coefficient(i, j);
                if c != 0 {
                    out.push((c, Var::Pair(self.devices[i], self.devices[j])));
                }
            }
        }
        out
    }

    fn pair_coefficient(&self, i: usize, j: usize) -> i128 {
        let vulnerable = self.attacked[i] || self.attacked[j];
        let n = self.devices.len() as i128;
        match (self.mode, vulnerable) {
            (IlpMode::Lexicographic, true) => n * n + 1,
            (IlpMode::Lexicographic, false) => -1,
            (IlpMode::VulnerabilityOnly, true) => 1,
            (IlpMode::VulnerabilityOnly, false) => 0,
        }
    }

    pub(crate) fn position(&self, id: DeviceId) -> Option<usize> {
        self.devices.binary_search(&id).ok()
    }

    pub(crate) fn is_attacked(&self, position: usize) -> bool {
        self.attacked[position]
    }
}

/// Rows of a model with `n` devices and `m` connections.
pub fn expected_row_count(n: u64, m: u64) -> u64 {
    1 + 2 * m + 3 * binomial(n, 3) + 2 * binomial(n, 2)
}

/// Variables of a model with `n` devices.
pub fn expected_variable_count(n: u64) -> u64 {
    n + binomial(n, 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2() -> (Graph, AttackSet) {
        (Graph::from_ids([1, 2], [(1, 2)]).unwrap(), AttackSet::new([1]))
    }

    fn family_count(m: &IlpModel, family: RowFamily) -> usize {
        m.rows().filter(|r| r.family == family).count()
    }

    #[test]
    fn k2_expansion() {
        let (g, a) = k2();
        let m = build_model(&g, &a, 1, IlpMode::Lexicographic).unwrap();
        assert_eq!(m.pair_vars().collect::<Vec<_>>(), vec![Var::Pair(1, 2)]);
        assert_eq!(m.objective(), vec![(5, Var::Pair(1, 2))]);
        assert_eq!(family_count(&m, RowFamily::Budget), 1);
        assert_eq!(family_count(&m, RowFamily::EdgeLower) + family_count(&m, RowFamily::EdgeUpper), 2);
        assert_eq!(family_count(&m, RowFamily::Transitivity), 0);
        assert_eq!(family_count(&m, RowFamily::IsolatedPair), 2);
        assert_eq!(m.row_count(), 5);
    }

    #[test]
    fn triangle_counts() {
        let g = Graph::from_ids([1, 2, 3], [(1, 2), (2, 3), (1, 3)]).unwrap();
        let m = build_model(&g, &AttackSet::empty(), 1, IlpMode::Lexicographic).unwrap();
        assert_eq!(m.pair_vars().count(), 3);
        assert_eq!(family_count(&m, RowFamily::Transitivity), 3);
        let rows: Vec<_> = m.rows().filter(|r| r.family == RowFamily::Transitivity).collect();
        let signs: Vec<Vec<i64>> = rows.iter().map(|r| r.terms.iter().map(|t| t.0).collect()).collect();
        assert_eq!(signs, vec![vec![1, 1, -1], vec![1, -1, 1], vec![-1, 1, 1]]);
    }

    #[test]
    fn no_attack_rewards_every_pair() {
        let g = Graph::from_ids(0..4, [(0, 1)]).unwrap();
        let m = build_model(&g, &AttackSet::empty(), 2, IlpMode::Lexicographic).unwrap();
        let obj = m.objective();
        assert_eq!(obj.len(), 6);
        assert!(obj.iter().all(|&(c, _)| c == -1));
    }

    #[test]
    fn vulnerability_only_drops_healthy_terms() {
        let g = Graph::from_ids(0..3, [(0, 1), (1, 2)]).unwrap();
        let m = build_model(&g, &AttackSet::new([0]), 1, IlpMode::VulnerabilityOnly).unwrap();
        assert_eq!(m.objective(), vec![(1, Var::Pair(0, 1)), (1, Var::Pair(0, 2))]);
    }

    #[test]
    fn counts_match_closed_form() {
        for n in 0..9u32 {
            let conns: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
            let m_edges = conns.len() as u64;
            let g = Graph::from_ids(0..n, conns).unwrap();
            let m = build_model(&g, &AttackSet::empty(), 1, IlpMode::Lexicographic).unwrap();
            assert_eq!(m.row_count() as u64, expected_row_count(n as u64, m_edges));
            assert_eq!(m.variable_count() as u64, expected_variable_count(n as u64));
            assert_eq!((m.node_vars().count() + m.pair_vars().count()) as u64, expected_variable_count(n as u64));
        }
    }

    #[test]
    fn variable_names_round_trip() {
        for v in [Var::Node(0), Var::Node(17), Var::Pair(2, 11)] {
            assert_eq!(v.to_string().parse::<Var>().unwrap(), v);
        }
        assert_eq!("u_5_3".parse::<Var>().unwrap(), Var::Pair(3, 5));
        assert!("u_3_3".parse::<Var>().is_err());
        assert!("w_1".parse::<Var>().is_err());
        assert!("v_x".parse::<Var>().is_err());
    }
}
