//! Scenario model: base stations, slices, users, shares and α-fair utilities.
//!
//! A [`ScenarioSpec`] is plain data; [`ScenarioSpec::validate`] checks every
//! invariant and produces a [`ValidatedScenario`] carrying the per-slice and
//! per-(slice, station) user indices the rest of the crate relies on.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, AddAssign, Mul};

use serde::Serialize;

use crate::error::{ScenarioIssue, ValidationErrors};

/// Relative tolerance for `s^v = Σ_b s^v_b + e^v`.
pub const SHARE_TOL: f64 = 1e-12;
/// Absolute tolerance on priority sums.
pub const PRIORITY_TOL: f64 = 1e-9;
/// Absolute slack allowed on `Σ_v s^v_b ≤ 1` to absorb decimal-to-binary rounding.
pub const COMMIT_TOL: f64 = 1e-12;

/// Dense row-major matrix indexed by (slice, base station).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Grid {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }
}

impl<T> Grid<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged grid");
        Grid {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

impl<T: Copy> Grid<T> {
    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: T) {
        self.data[r * self.cols + c] = value;
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }
}

impl Grid<f64> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Grid::filled(rows, cols, 0.0)
    }

    pub fn add_to(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] += value;
    }

    pub fn row_sum(&self, r: usize) -> f64 {
        self.row(r).iter().sum()
    }

    pub fn column_sum(&self, c: usize) -> f64 {
        (0..self.rows).map(|r| self.get(r, c)).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceProfile {
    pub id: String,
    /// `s^v_b`, one entry per base station (index order of `ScenarioSpec::base_stations`).
    pub guaranteed: Vec<f64>,
    /// `e^v`.
    pub excess: f64,
    /// `s^v`; must equal `Σ_b s^v_b + e^v`.
    pub overall: f64,
    /// Concavity `α^v` of the users' utility.
    pub alpha: f64,
}

impl SliceProfile {
    /// Builds a profile with `overall` derived from the guarantees and excess.
    pub fn new(id: impl Into<String>, guaranteed: Vec<f64>, excess: f64, alpha: f64) -> Self {
        let overall = guaranteed.iter().sum::<f64>() + excess;
        SliceProfile {
            id: id.into(),
            guaranteed,
            excess,
            overall,
            alpha,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserRecord {
    pub id: String,
    pub slice: usize,
    pub bs: usize,
    /// Achievable rate `c_u` with the whole station, bits/s.
    pub capacity: f64,
    /// Minimum rate `γ_u`, bits/s.
    pub min_rate: f64,
    /// Priority `φ_u`.
    pub priority: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioSpec {
    pub base_stations: Vec<String>,
    pub slices: Vec<SliceProfile>,
    pub users: Vec<UserRecord>,
    /// Weight floor `δ` used by best-response paths.
    pub weight_floor: f64,
}

impl ScenarioSpec {
    pub fn new(base_stations: usize) -> Self {
        ScenarioSpec {
            base_stations: (0..base_stations).map(|b| format!("bs{b}")).collect(),
            ..Default::default()
        }
    }

    pub fn add_slice(&mut self, profile: SliceProfile) -> usize {
        self.slices.push(profile);
        self.slices.len() - 1
    }

    /// Appends a user with an auto-generated id and returns its index.
    pub fn add_user(
        &mut self,
        slice: usize,
        bs: usize,
        capacity: f64,
        min_rate: f64,
        priority: f64,
    ) -> usize {
        let id = format!("u{}", self.users.len());
        self.users.push(UserRecord {
            id,
            slice,
            bs,
            capacity,
            min_rate,
            priority,
        });
        self.users.len() - 1
    }

    pub fn validate(self) -> Result<ValidatedScenario, ValidationErrors> {
        validate_scenario(self)
    }
}

/// The three traffic classes; a pure function of `(γ_u, φ_u)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TrafficClass {
    Elastic,
    Inelastic,
    RateAdaptive,
}

impl TrafficClass {
    pub fn of(min_rate: f64, priority: f64) -> Option<Self> {
        match (min_rate > 0.0, priority > 0.0) {
            (false, true) => Some(TrafficClass::Elastic),
            (true, false) => Some(TrafficClass::Inelastic),
            (true, true) => Some(TrafficClass::RateAdaptive),
            (false, false) => None,
        }
    }
}

impl fmt::Display for TrafficClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrafficClass::Elastic => "elastic",
            TrafficClass::Inelastic => "inelastic",
            TrafficClass::RateAdaptive => "rate-adaptive",
        })
    }
}

/// Per-user utility parameters resolved from the scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityParams {
    pub priority: f64,
    pub min_rate: f64,
    pub alpha: f64,
}

impl UtilityParams {
    pub fn class(&self) -> Option<TrafficClass> {
        TrafficClass::of(self.min_rate, self.priority)
    }
}

/// Extended-real utility: `NegInfinity` sits below every finite value and
/// never enters floating-point arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Utility {
    NegInfinity,
    Finite(f64),
}

impl Utility {
    pub const ZERO: Utility = Utility::Finite(0.0);

    pub fn is_finite(self) -> bool {
        matches!(self, Utility::Finite(_))
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Utility::Finite(x) => Some(x),
            Utility::NegInfinity => None,
        }
    }

    /// Finite value, or `f64::NEG_INFINITY` for reporting only.
    pub fn to_f64(self) -> f64 {
        self.value().unwrap_or(f64::NEG_INFINITY)
    }
}

impl PartialOrd for Utility {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Utility::NegInfinity, Utility::NegInfinity) => Some(Ordering::Equal),
            (Utility::NegInfinity, Utility::Finite(_)) => Some(Ordering::Less),
            (Utility::Finite(_), Utility::NegInfinity) => Some(Ordering::Greater),
            (Utility::Finite(a), Utility::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl Add for Utility {
    type Output = Utility;
    fn add(self, rhs: Utility) -> Utility {
        match (self, rhs) {
            (Utility::Finite(a), Utility::Finite(b)) => Utility::Finite(a + b),
            _ => Utility::NegInfinity,
        }
    }
}

impl AddAssign for Utility {
    fn add_assign(&mut self, rhs: Utility) {
        *self = *self + rhs;
    }
}

/// Scaling by a nonnegative weight. `0 · (−∞)` stays `−∞`: an unmet minimum
/// rate is never forgiven by a zero slice weight.
impl Mul<Utility> for f64 {
    type Output = Utility;
    fn mul(self, rhs: Utility) -> Utility {
        match rhs {
            Utility::Finite(x) => Utility::Finite(self * x),
            Utility::NegInfinity => Utility::NegInfinity,
        }
    }
}

impl std::iter::Sum for Utility {
    fn sum<I: Iterator<Item = Utility>>(iter: I) -> Utility {
        iter.fold(Utility::ZERO, Add::add)
    }
}

impl fmt::Display for Utility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Utility::NegInfinity => f.write_str("-inf"),
            Utility::Finite(x) => write!(f, "{x}"),
        }
    }
}

/// α-fair function `F(x)`; `x > 0`.
#[inline]
pub fn alpha_fair(x: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        x.ln()
    } else {
        x.powf(1.0 - alpha) / (1.0 - alpha)
    }
}

/// Derivative `F'(x) = x^{−α}`.
#[inline]
pub fn alpha_fair_prime(x: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        1.0
    } else if alpha == 1.0 {
        1.0 / x
    } else {
        x.powf(-alpha)
    }
}

pub fn user_utility(rate: f64, params: &UtilityParams) -> Utility {
    if rate <= params.min_rate {
        return Utility::NegInfinity;
    }
    if params.priority == 0.0 {
        return Utility::ZERO;
    }
    Utility::Finite(params.priority * alpha_fair(rate - params.min_rate, params.alpha))
}

/// A scenario whose invariants have been checked, plus derived indices.
#[derive(Debug, Clone)]
pub struct ValidatedScenario {
    spec: ScenarioSpec,
    by_slice: Vec<Vec<usize>>,
    by_cell: Grid<usize>,
    cell_users: Vec<Vec<usize>>,
    min_fraction: Vec<f64>,
    shares: Grid<f64>,
}

pub fn validate_scenario(spec: ScenarioSpec) -> Result<ValidatedScenario, ValidationErrors> {
    let mut issues = Vec::new();
    let n_bs = spec.base_stations.len();

    let mut seen = HashSet::new();
    for id in &spec.base_stations {
        if !seen.insert(id.as_str()) {
            issues.push(ScenarioIssue::DuplicateId {
                kind: "base station",
                id: id.clone(),
            });
        }
    }
    let mut seen = HashSet::new();
    for s in &spec.slices {
        if !seen.insert(s.id.as_str()) {
            issues.push(ScenarioIssue::DuplicateId {
                kind: "slice",
                id: s.id.clone(),
            });
        }
    }
    let mut seen = HashSet::new();
    for u in &spec.users {
        if !seen.insert(u.id.as_str()) {
            issues.push(ScenarioIssue::DuplicateId {
                kind: "user",
                id: u.id.clone(),
            });
        }
    }

    if !(spec.weight_floor >= 0.0 && spec.weight_floor.is_finite()) {
        issues.push(ScenarioIssue::InvalidValue {
            what: "weight floor".into(),
            value: spec.weight_floor,
        });
    }

    let mut shape_ok = true;
    for s in &spec.slices {
        if s.guaranteed.len() != n_bs {
            shape_ok = false;
            issues.push(ScenarioIssue::ShapeMismatch {
                slice: s.id.clone(),
                got: s.guaranteed.len(),
                expected: n_bs,
            });
            continue;
        }
        for (b, &g) in s.guaranteed.iter().enumerate() {
            if !(0.0..=1.0).contains(&g) {
                issues.push(ScenarioIssue::InvalidValue {
                    what: format!("guaranteed share of slice {} at {}", s.id, spec.base_stations[b]),
                    value: g,
                });
            }
        }
        if !(s.excess >= 0.0 && s.excess.is_finite()) {
            issues.push(ScenarioIssue::InvalidValue {
                what: format!("excess share of slice {}", s.id),
                value: s.excess,
            });
        }
        if !(s.alpha >= 0.0 && s.alpha.is_finite()) {
            issues.push(ScenarioIssue::InvalidValue {
                what: format!("alpha of slice {}", s.id),
                value: s.alpha,
            });
        }
        let guaranteed: f64 = s.guaranteed.iter().sum();
        let expected = guaranteed + s.excess;
        if !((s.overall - expected).abs() <= SHARE_TOL * s.overall.abs().max(expected.abs()).max(1.0))
        {
            issues.push(ScenarioIssue::ShareMismatch {
                slice: s.id.clone(),
                overall: s.overall,
                guaranteed,
                excess: s.excess,
            });
        }
    }

    if shape_ok {
        for b in 0..n_bs {
            let total: f64 = spec.slices.iter().map(|s| s.guaranteed[b]).sum();
            if total > 1.0 + COMMIT_TOL {
                issues.push(ScenarioIssue::OverCommitted {
                    bs: spec.base_stations[b].clone(),
                    total,
                });
            }
        }
    }

    let mut refs_ok = true;
    for u in &spec.users {
        if u.slice >= spec.slices.len() {
            refs_ok = false;
            issues.push(ScenarioIssue::DanglingReference {
                user: u.id.clone(),
                kind: "slice",
                target: u.slice.to_string(),
            });
        }
        if u.bs >= n_bs {
            refs_ok = false;
            issues.push(ScenarioIssue::DanglingReference {
                user: u.id.clone(),
                kind: "base station",
                target: u.bs.to_string(),
            });
        }
        if !(u.capacity > 0.0 && u.capacity.is_finite()) {
            issues.push(ScenarioIssue::InvalidValue {
                what: format!("achievable rate of user {}", u.id),
                value: u.capacity,
            });
        }
        if !(u.min_rate >= 0.0 && u.min_rate.is_finite()) {
            issues.push(ScenarioIssue::InvalidValue {
                what: format!("minimum rate of user {}", u.id),
                value: u.min_rate,
            });
        }
        if !(u.priority >= 0.0 && u.priority.is_finite()) {
            issues.push(ScenarioIssue::InvalidValue {
                what: format!("priority of user {}", u.id),
                value: u.priority,
            });
        }
        if u.min_rate == 0.0 && u.priority == 0.0 {
            issues.push(ScenarioIssue::UnclassifiableUser { user: u.id.clone() });
        }
        if u.capacity > 0.0 && u.min_rate / u.capacity > 1.0 {
            issues.push(ScenarioIssue::InvalidValue {
                what: format!("minimum fraction of user {}", u.id),
                value: u.min_rate / u.capacity,
            });
        }
    }

    if refs_ok {
        for (v, s) in spec.slices.iter().enumerate() {
            let members = spec.users.iter().filter(|u| u.slice == v);
            let sum: f64 = members.clone().map(|u| u.priority).sum();
            let inelastic_only = members.clone().all(|u| u.min_rate > 0.0);
            let ok = (sum - 1.0).abs() <= PRIORITY_TOL || (sum == 0.0 && inelastic_only);
            if !ok {
                issues.push(ScenarioIssue::PriorityMismatch {
                    slice: s.id.clone(),
                    sum,
                });
            }
        }
    }

    if !issues.is_empty() {
        return Err(ValidationErrors(issues));
    }

    let n_v = spec.slices.len();
    let mut by_slice = vec![Vec::new(); n_v];
    let mut cell_users = vec![Vec::new(); n_v * n_bs];
    for (i, u) in spec.users.iter().enumerate() {
        by_slice[u.slice].push(i);
        cell_users[u.slice * n_bs + u.bs].push(i);
    }
    let by_cell = Grid {
        rows: n_v,
        cols: n_bs,
        data: cell_users.iter().map(Vec::len).collect(),
    };
    let min_fraction = spec.users.iter().map(|u| u.min_rate / u.capacity).collect();
    let shares = Grid::from_rows(spec.slices.iter().map(|s| s.guaranteed.clone()).collect());
    Ok(ValidatedScenario {
        spec,
        by_slice,
        by_cell,
        cell_users,
        min_fraction,
        shares,
    })
}

impl ValidatedScenario {
    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    pub fn into_spec(self) -> ScenarioSpec {
        self.spec
    }

    pub fn num_slices(&self) -> usize {
        self.spec.slices.len()
    }

    pub fn num_stations(&self) -> usize {
        self.spec.base_stations.len()
    }

    pub fn num_users(&self) -> usize {
        self.spec.users.len()
    }

    pub fn slice(&self, v: usize) -> &SliceProfile {
        &self.spec.slices[v]
    }

    pub fn user(&self, u: usize) -> &UserRecord {
        &self.spec.users[u]
    }

    pub fn weight_floor(&self) -> f64 {
        self.spec.weight_floor
    }

    /// Users of slice `v`, ascending index.
    pub fn users_of(&self, v: usize) -> &[usize] {
        &self.by_slice[v]
    }

    /// Users of slice `v` associated with station `b`, ascending index.
    pub fn users_at(&self, v: usize, b: usize) -> &[usize] {
        &self.cell_users[v * self.num_stations() + b]
    }

    /// `|U^v_b|` for every (v, b).
    pub fn census(&self) -> &Grid<usize> {
        &self.by_cell
    }

    /// Whether slice `v` has at least one user at `b`.
    pub fn is_active(&self, v: usize, b: usize) -> bool {
        self.by_cell.get(v, b) > 0
    }

    /// Guaranteed shares `s^v_b`.
    pub fn shares(&self) -> &Grid<f64> {
        &self.shares
    }

    pub fn share(&self, v: usize, b: usize) -> f64 {
        self.shares.get(v, b)
    }

    pub fn overall_share(&self, v: usize) -> f64 {
        self.spec.slices[v].overall
    }

    /// `f̲_u = γ_u / c_u`.
    pub fn min_fraction(&self, u: usize) -> f64 {
        self.min_fraction[u]
    }

    /// `f̲^v_b = Σ_{u ∈ U^v_b} f̲_u`.
    pub fn requirement(&self, v: usize, b: usize) -> f64 {
        self.users_at(v, b)
            .iter()
            .map(|&u| self.min_fraction[u])
            .sum()
    }

    pub fn params(&self, u: usize) -> UtilityParams {
        let user = &self.spec.users[u];
        UtilityParams {
            priority: user.priority,
            min_rate: user.min_rate,
            alpha: self.spec.slices[user.slice].alpha,
        }
    }

    pub fn class(&self, u: usize) -> TrafficClass {
        let user = &self.spec.users[u];
        TrafficClass::of(user.min_rate, user.priority).expect("validated user has a class")
    }

    /// Sum of priorities of the slice's users at `b`.
    pub fn priority_at(&self, v: usize, b: usize) -> f64 {
        self.users_at(v, b)
            .iter()
            .map(|&u| self.spec.users[u].priority)
            .sum()
    }

    pub fn priority_sum(&self, v: usize) -> f64 {
        self.users_of(v)
            .iter()
            .map(|&u| self.spec.users[u].priority)
            .sum()
    }
}

/// `Σ_{u ∈ U^v} U_u(r_u)` for one slice.
pub fn slice_utility(sc: &ValidatedScenario, v: usize, rates: &[f64]) -> Utility {
    sc.users_of(v)
        .iter()
        .map(|&u| user_utility(rates[u], &sc.params(u)))
        .sum()
}

/// Social utility `Σ_v s^v Σ_{u∈U^v} U_u(r_u)`.
pub fn overall_utility(rates: &[f64], sc: &ValidatedScenario) -> Utility {
    (0..sc.num_slices())
        .map(|v| sc.overall_share(v) * slice_utility(sc, v, rates))
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WellDimensionedReport {
    pub ok: bool,
    /// `s^v_b − f̲^v_b` per (v, b).
    pub slack: Grid<f64>,
}

pub fn check_well_dimensioned(sc: &ValidatedScenario) -> WellDimensionedReport {
    let mut slack = Grid::zeros(sc.num_slices(), sc.num_stations());
    let mut ok = true;
    for v in 0..sc.num_slices() {
        for b in 0..sc.num_stations() {
            let s = sc.share(v, b) - sc.requirement(v, b);
            ok &= s >= 0.0;
            slack.set(v, b, s);
        }
    }
    WellDimensionedReport { ok, slack }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_slice(s1: f64, s2: f64) -> ScenarioSpec {
        let mut spec = ScenarioSpec::new(2);
        spec.add_slice(SliceProfile::new("a", vec![s1, s1], 0.0, 1.0));
        spec.add_slice(SliceProfile::new("b", vec![s2, s2], 0.0, 1.0));
        spec.add_user(0, 0, 1.0, 0.0, 1.0);
        spec.add_user(1, 1, 1.0, 0.0, 1.0);
        spec
    }

    #[test]
    fn exact_partition_is_valid() {
        assert!(two_slice(0.5, 0.5).validate().is_ok());
    }

    #[test]
    fn over_commitment_names_the_station() {
        let err = two_slice(0.6, 0.6).validate().unwrap_err();
        assert!(err
            .0
            .iter()
            .any(|i| matches!(i, ScenarioIssue::OverCommitted { bs, .. } if bs == "bs0")));
    }

    #[test]
    fn share_mismatch_and_dangling_reported_together() {
        let mut spec = two_slice(0.5, 0.5);
        spec.slices[0].overall = 2.0;
        spec.add_user(7, 0, 1.0, 0.0, 1.0);
        let err = spec.validate().unwrap_err();
        assert!(err.0.iter().any(|i| matches!(i, ScenarioIssue::ShareMismatch { .. })));
        assert!(err.0.iter().any(|i| matches!(i, ScenarioIssue::DanglingReference { .. })));
    }

    #[test]
    fn zero_rate_zero_priority_user_rejected() {
        let mut spec = two_slice(0.5, 0.5);
        spec.add_user(0, 1, 1.0, 0.0, 0.0);
        let err = spec.validate().unwrap_err();
        assert!(err.0.iter().any(|i| matches!(i, ScenarioIssue::UnclassifiableUser { .. })));
    }

    #[test]
    fn inelastic_only_slice_may_have_zero_priorities() {
        let mut spec = ScenarioSpec::new(1);
        spec.add_slice(SliceProfile::new("i", vec![0.5], 0.0, 1.0));
        spec.add_user(0, 0, 1.0, 0.2, 0.0);
        spec.add_user(0, 0, 1.0, 0.1, 0.0);
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn utility_values() {
        let p = |alpha, min_rate| UtilityParams {
            priority: 1.0,
            min_rate,
            alpha,
        };
        assert_eq!(user_utility(1.0, &p(1.0, 0.0)), Utility::Finite(0.0));
        assert_eq!(user_utility(2.0, &p(2.0, 0.0)), Utility::Finite(-0.5));
        assert_eq!(user_utility(0.1e6, &p(1.0, 0.2e6)), Utility::NegInfinity);
        assert_eq!(user_utility(0.2e6, &p(1.0, 0.2e6)), Utility::NegInfinity);
    }

    #[test]
    fn sentinel_orders_below_reals() {
        assert!(Utility::NegInfinity < Utility::Finite(-1e300));
        assert!(Utility::Finite(1.0) > Utility::NegInfinity);
        assert_eq!(Utility::NegInfinity + Utility::Finite(5.0), Utility::NegInfinity);
        assert_eq!(0.0 * Utility::NegInfinity, Utility::NegInfinity);
    }

    #[test]
    fn class_derivation_on_grid() {
        for &g in &[0.0, 1e-9, 0.5, 3.0] {
            for &phi in &[0.0, 1e-9, 0.5, 1.0] {
                let expected = match (g > 0.0, phi > 0.0) {
                    (false, true) => Some(TrafficClass::Elastic),
                    (true, false) => Some(TrafficClass::Inelastic),
                    (true, true) => Some(TrafficClass::RateAdaptive),
                    _ => None,
                };
                assert_eq!(TrafficClass::of(g, phi), expected);
            }
        }
    }

    #[test]
    fn overall_utility_is_additive() {
        let sc = two_slice(0.5, 0.5).validate().unwrap();
        let single = sc.overall_share(0) * user_utility(3.0, &sc.params(0));
        assert_eq!(overall_utility(&[3.0, 3.0], &sc), Utility::Finite(2.0 * single.to_f64()));
    }

    #[test]
    fn well_dimensioned_slack() {
        let mut spec = ScenarioSpec::new(1);
        spec.add_slice(SliceProfile::new("g", vec![0.25], 0.0, 1.0));
        spec.add_user(0, 0, 1.0, 0.3, 0.0);
        let sc = spec.validate().unwrap();
        let report = check_well_dimensioned(&sc);
        assert!(!report.ok);
        assert!((report.slack.get(0, 0) + 0.05).abs() < 1e-15);
    }
}
