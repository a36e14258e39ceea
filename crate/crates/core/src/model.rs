//! Problem data, candidate allocations and the constraint checks of the
//! dock reallocation problem.
//!
//! Station indices are 0-based everywhere.

use std::fmt;
use std::sync::Arc;

use crate::costs::{validate_multimodular, CostModel, Rational, StationCost};
use crate::error::{check_len, Error, Result};

/// Problem data: initial open docks `d̄`, initial bike docks `b̄`, dock bounds
/// `ℓ ≤ d + b ≤ u`, the half ℓ1 budget `γ`, and per-station costs.
///
/// The initial allocation is not required to satisfy the bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    d_bar: Vec<i64>,
    b_bar: Vec<i64>,
    ell: Vec<i64>,
    u: Vec<i64>,
    gamma: i64,
    cost: Arc<CostModel>,
}

impl Instance {
    pub fn new(
        d_bar: Vec<i64>,
        b_bar: Vec<i64>,
        ell: Vec<i64>,
        u: Vec<i64>,
        gamma: i64,
        cost: CostModel,
    ) -> Result<Self> {
        let n = d_bar.len();
        if n == 0 {
            return Err(Error::Invalid("an instance needs at least one station".into()));
        }
        check_len("b_bar", b_bar.len(), n)?;
        check_len("ell", ell.len(), n)?;
        check_len("u", u.len(), n)?;
        check_len("cost", cost.n_stations(), n)?;
        for (what, v) in [("d_bar", &d_bar), ("b_bar", &b_bar), ("ell", &ell), ("u", &u)] {
            if let Some(i) = v.iter().position(|&x| x < 0) {
                return Err(Error::Invalid(format!("{what}[{i}] is negative")));
            }
        }
        if let Some(i) = (0..n).find(|&i| ell[i] > u[i]) {
            return Err(Error::Invalid(format!(
                "ell[{i}] = {} exceeds u[{i}] = {}",
                ell[i], u[i]
            )));
        }
        if gamma < 0 {
            return Err(Error::Invalid(format!("gamma = {gamma} is negative")));
        }
        let inst = Instance {
            d_bar,
            b_bar,
            ell,
            u,
            gamma,
            cost: Arc::new(cost),
        };
        inst.validate_tables()?;
        Ok(inst)
    }

    /// Tables must cover `d ∈ [0, u(i)]`, `b ∈ [0, max(1, min(u(i), B))]` and
    /// be multimodular on that rectangle.
    ///
    /// On a single bike column the three inequalities say nothing, so at
    /// least two columns are required whenever `u(i) ≥ 1`; that makes them
    /// imply convexity along `d` as well.
    fn validate_tables(&self) -> Result<()> {
        for i in 0..self.n() {
            if let StationCost::Table { .. } = self.cost.station(i) {
                let need = table_box(self.u[i], self.total_bikes());
                let (dmax, bmax) = self.cost.station(i).domain().unwrap_or((i64::MAX, i64::MAX));
                if dmax < need.0 || bmax < need.1 {
                    return Err(Error::Invalid(format!(
                        "table for station {i} covers ({dmax}, {bmax}) but ({}, {}) is required",
                        need.0, need.1
                    )));
                }
                if let Some(v) = validate_multimodular(&self.cost, i, need)? {
                    return Err(Error::Invalid(format!("cost table is not multimodular: {v}")));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.d_bar.len()
    }

    pub fn d_bar(&self) -> &[i64] {
        &self.d_bar
    }

    pub fn b_bar(&self) -> &[i64] {
        &self.b_bar
    }

    pub fn ell(&self) -> &[i64] {
        &self.ell
    }

    pub fn u(&self) -> &[i64] {
        &self.u
    }

    pub fn gamma(&self) -> i64 {
        self.gamma
    }

    pub fn cost(&self) -> &CostModel {
        &self.cost
    }

    /// `D = Σ d̄(i)`.
    pub fn total_docks(&self) -> i64 {
        self.d_bar.iter().sum()
    }

    /// `B = Σ b̄(i)`.
    pub fn total_bikes(&self) -> i64 {
        self.b_bar.iter().sum()
    }

    /// `D + B`.
    pub fn total(&self) -> i64 {
        self.total_docks() + self.total_bikes()
    }

    /// `x̄ = d̄ + b̄`.
    pub fn x_bar(&self) -> Vec<i64> {
        self.d_bar.iter().zip(&self.b_bar).map(|(d, b)| d + b).collect()
    }

    pub fn initial_allocation(&self) -> Allocation {
        Allocation::new(self.d_bar.clone(), self.b_bar.clone())
    }

    /// Same instance with a different budget.
    pub fn with_gamma(&self, gamma: i64) -> Result<Self> {
        if gamma < 0 {
            return Err(Error::Invalid(format!("gamma = {gamma} is negative")));
        }
        Ok(Instance {
            gamma,
            ..self.clone()
        })
    }
}

/// The `(d_max, b_max)` rectangle a cost table must cover for a station
/// with upper bound `u` when `B` bikes exist.
pub fn table_box(u: i64, bikes: i64) -> (i64, i64) {
    let b_max = u.min(bikes);
    (u, if u >= 1 { b_max.max(1) } else { b_max })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Allocation {
    pub d: Vec<i64>,
    pub b: Vec<i64>,
}

impl Allocation {
    pub fn new(d: Vec<i64>, b: Vec<i64>) -> Self {
        Allocation { d, b }
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    /// `x = d + b`.
    pub fn x(&self) -> Vec<i64> {
        self.d.iter().zip(&self.b).map(|(d, b)| d + b).collect()
    }

    pub fn x_at(&self, i: usize) -> i64 {
        self.d[i] + self.b[i]
    }

    pub fn bikes(&self) -> i64 {
        self.b.iter().sum()
    }

    pub fn docks_open(&self) -> i64 {
        self.d.iter().sum()
    }

    /// `‖d − d′‖₁ + ‖b − b′‖₁`.
    pub fn split_distance(&self, other: &Allocation) -> i64 {
        let dd: i64 = self.d.iter().zip(&other.d).map(|(a, b)| (a - b).abs()).sum();
        let db: i64 = self.b.iter().zip(&other.b).map(|(a, b)| (a - b).abs()).sum();
        dd + db
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={:?} b={:?}", self.d, self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintId {
    /// `x(N) = D + B`
    TotalDocks,
    /// `b(N) ≤ B`
    BikeBudget,
    /// `‖x − x̄‖₁ ≤ 2γ`
    L1Budget,
    /// `ℓ(i) ≤ x(i)`
    LowerBound,
    /// `x(i) ≤ u(i)`
    UpperBound,
    /// `d(i) ≥ 0`
    NonNegativeDocks,
    /// `b(i) ≥ 0`
    NonNegativeBikes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scope {
    Global,
    Station(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Requirement {
    Equal(i64),
    AtMost(i64),
    AtLeast(i64),
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Requirement::Equal(v) => write!(f, "= {v}"),
            Requirement::AtMost(v) => write!(f, "<= {v}"),
            Requirement::AtLeast(v) => write!(f, ">= {v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Violation {
    pub constraint: ConstraintId,
    pub scope: Scope,
    pub observed: i64,
    pub required: Requirement,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeasibilityVerdict {
    pub violations: Vec<Violation>,
}

impl FeasibilityVerdict {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, c: ConstraintId) -> bool {
        self.violations.iter().any(|v| v.constraint == c)
    }
}

/// Lists every violated constraint of the reallocation problem.
pub fn check_feasible_dr(inst: &Instance, a: &Allocation) -> Result<FeasibilityVerdict> {
    let n = inst.n();
    check_len("d", a.d.len(), n)?;
    check_len("b", a.b.len(), n)?;
    let mut violations = Vec::new();
    let mut push = |constraint, scope, observed, required| {
        violations.push(Violation {
            constraint,
            scope,
            observed,
            required,
        })
    };
    let x = a.x();
    let total = inst.total();
    let x_sum: i64 = x.iter().sum();
    if x_sum != total {
        push(ConstraintId::TotalDocks, Scope::Global, x_sum, Requirement::Equal(total));
    }
    let bikes = a.bikes();
    if bikes > inst.total_bikes() {
        push(
            ConstraintId::BikeBudget,
            Scope::Global,
            bikes,
            Requirement::AtMost(inst.total_bikes()),
        );
    }
    let dist = l1_distance(&x, &inst.x_bar())?;
    if dist > 2 * inst.gamma() {
        push(
            ConstraintId::L1Budget,
            Scope::Global,
            dist,
            Requirement::AtMost(2 * inst.gamma()),
        );
    }
    for i in 0..n {
        if x[i] < inst.ell()[i] {
            push(
                ConstraintId::LowerBound,
                Scope::Station(i),
                x[i],
                Requirement::AtLeast(inst.ell()[i]),
            );
        }
        if x[i] > inst.u()[i] {
            push(
                ConstraintId::UpperBound,
                Scope::Station(i),
                x[i],
                Requirement::AtMost(inst.u()[i]),
            );
        }
        if a.d[i] < 0 {
            push(
                ConstraintId::NonNegativeDocks,
                Scope::Station(i),
                a.d[i],
                Requirement::AtLeast(0),
            );
        }
        if a.b[i] < 0 {
            push(
                ConstraintId::NonNegativeBikes,
                Scope::Station(i),
                a.b[i],
                Requirement::AtLeast(0),
            );
        }
    }
    Ok(FeasibilityVerdict { violations })
}

pub fn l1_distance(x: &[i64], y: &[i64]) -> Result<i64> {
    check_len("y", y.len(), x.len())?;
    Ok(x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum())
}

pub fn linf_distance(x: &[i64], y: &[i64]) -> Result<i64> {
    check_len("y", y.len(), x.len())?;
    Ok(x.iter().zip(y).map(|(a, b)| (a - b).abs()).max().unwrap_or(0))
}

/// `c(d, b) = Σ c_i(d(i), b(i))`, exactly.
pub fn objective(inst: &Instance, a: &Allocation) -> Result<Rational> {
    check_len("d", a.d.len(), inst.n())?;
    check_len("b", a.b.len(), inst.n())?;
    inst.cost().total(&a.d, &a.b)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::costs::{int, rational, ConvexSpec};
    use proptest::prelude::*;

    fn q(a: i128, b: i128, c: i128) -> ConvexSpec {
        ConvexSpec::quadratic(rational(a, 1), rational(b, 1), rational(c, 1))
    }

    pub(crate) fn e1() -> Instance {
        let cost = CostModel::new(vec![
            StationCost::SeparableConvex {
                phi: q(1, -8, 16),
                psi: q(1, -2, 1),
                theta: ConvexSpec::zero(),
            },
            StationCost::SeparableConvex {
                phi: q(1, 0, 0),
                psi: q(1, 0, 0),
                theta: ConvexSpec::zero(),
            },
        ])
        .unwrap();
        Instance::new(vec![2, 1], vec![1, 2], vec![0, 0], vec![6, 6], 2, cost).unwrap()
    }

    #[test]
    fn initial_allocation_is_feasible() {
        let inst = e1();
        let v = check_feasible_dr(&inst, &inst.initial_allocation()).unwrap();
        assert!(v.feasible());
    }

    #[test]
    fn l1_violation_detected() {
        let inst = e1();
        let v = check_feasible_dr(&inst, &Allocation::new(vec![6, 0], vec![0, 0])).unwrap();
        assert!(!v.feasible());
        assert_eq!(v.violations.len(), 1);
        assert_eq!(
            v.violations[0],
            Violation {
                constraint: ConstraintId::L1Budget,
                scope: Scope::Global,
                observed: 6,
                required: Requirement::AtMost(4),
            }
        );
    }

    #[test]
    fn total_violation_detected() {
        let inst = e1();
        let v = check_feasible_dr(&inst, &Allocation::new(vec![2, 1], vec![2, 2])).unwrap();
        assert!(v.violates(ConstraintId::TotalDocks));
        assert_eq!(v.violations[0].observed, 7);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let inst = e1();
        let r = check_feasible_dr(&inst, &Allocation::new(vec![2], vec![1]));
        assert!(matches!(r, Err(Error::Dimension { .. })));
        assert!(l1_distance(&[1, 2], &[1]).is_err());
    }

    #[test]
    fn distances() {
        assert_eq!(l1_distance(&[3, 3], &[3, 3]).unwrap(), 0);
        assert_eq!(l1_distance(&[5, 1], &[3, 3]).unwrap(), 4);
        assert_eq!(l1_distance(&[0, 6], &[3, 3]).unwrap(), 6);
        assert_eq!(linf_distance(&[3, 3], &[3, 3]).unwrap(), 0);
        assert_eq!(linf_distance(&[5, 1], &[3, 3]).unwrap(), 2);
        assert_eq!(linf_distance(&[0, 6], &[3, 3]).unwrap(), 3);
    }

    #[test]
    fn objective_values() {
        let inst = e1();
        let a = Allocation::new(vec![2, 1], vec![1, 2]);
        assert_eq!(objective(&inst, &a).unwrap(), int(9));
        let zero = Instance::new(
            vec![1, 1],
            vec![0, 1],
            vec![0, 0],
            vec![3, 3],
            1,
            CostModel::zero(2),
        )
        .unwrap();
        assert_eq!(objective(&zero, &a).unwrap(), int(0));
    }

    #[test]
    fn objective_domain_error_names_station() {
        let grid = vec![vec![int(0); 3]; 3];
        let cost = CostModel::new(vec![StationCost::Table { grid }]).unwrap();
        let inst = Instance::new(vec![1], vec![1], vec![0], vec![2], 0, cost).unwrap();
        let err = objective(&inst, &Allocation::new(vec![3], vec![0])).unwrap_err();
        assert_eq!(err, Error::Domain { station: 0, d: 3, b: 0 });
    }

    #[test]
    fn instance_invariants_enforced() {
        let c = || CostModel::zero(2);
        assert!(Instance::new(vec![1, 1], vec![0, 0], vec![3, 0], vec![2, 4], 0, c()).is_err());
        assert!(Instance::new(vec![1, 1], vec![0], vec![0, 0], vec![2, 4], 0, c()).is_err());
        assert!(Instance::new(vec![1, -1], vec![0, 0], vec![0, 0], vec![2, 4], 0, c()).is_err());
        let inst = Instance::new(vec![1, 2], vec![3, 0], vec![0, 0], vec![9, 9], 0, c()).unwrap();
        assert_eq!((inst.total_docks(), inst.total_bikes()), (3, 3));
        assert_eq!(inst.x_bar(), vec![4, 2]);
    }

    #[test]
    fn bikeless_tables_still_need_a_second_column() {
        assert_eq!(table_box(3, 0), (3, 1));
        assert_eq!(table_box(0, 5), (0, 0));
        // concave in d; a single b-column would hide it from the inequalities
        let concave: Vec<Vec<_>> = (0..4).map(|d| vec![-int(d * d), -int(d * d) + int(1)]).collect();
        let single: Vec<Vec<_>> = concave.iter().map(|row| vec![row[0]]).collect();
        for grid in [concave, single] {
            let cost = CostModel::new(vec![StationCost::Table { grid: grid.clone() }, StationCost::Table { grid }]).unwrap();
            assert!(Instance::new(vec![1, 1], vec![0, 0], vec![0, 0], vec![3, 3], 1, cost).is_err());
        }
    }

    fn small_vec(n: usize) -> impl Strategy<Value = Vec<i64>> {
        prop::collection::vec(-20i64..20, n)
    }

    proptest! {
        #[test]
        fn l1_is_a_metric(x in small_vec(5), y in small_vec(5), z in small_vec(5)) {
            let dxy = l1_distance(&x, &y).unwrap();
            prop_assert_eq!(dxy, l1_distance(&y, &x).unwrap());
            prop_assert_eq!(l1_distance(&x, &x).unwrap(), 0);
            prop_assert!(dxy + l1_distance(&y, &z).unwrap() >= l1_distance(&x, &z).unwrap());
            prop_assert_eq!(dxy == 0, x == y);
            prop_assert!(linf_distance(&x, &y).unwrap() <= dxy);
        }

        #[test]
        fn objective_is_additive(d in prop::collection::vec(0i64..6, 2), b in prop::collection::vec(0i64..6, 2)) {
            let inst = e1();
            let whole = objective(&inst, &Allocation::new(d.clone(), b.clone())).unwrap();
            let parts = inst.cost().eval(0, d[0], b[0]).unwrap() + inst.cost().eval(1, d[1], b[1]).unwrap();
            prop_assert_eq!(whole, parts);
        }

        #[test]
        fn verdict_permutes_with_stations(
            d in prop::collection::vec(0i64..5, 3),
            b in prop::collection::vec(0i64..5, 3),
            ell in prop::collection::vec(0i64..3, 3),
            gamma in 0i64..4,
        ) {
            let u = vec![5, 6, 7];
            let d_bar = vec![1, 2, 0];
            let b_bar = vec![1, 0, 2];
            let inst = Instance::new(d_bar.clone(), b_bar.clone(), ell.clone(), u.clone(), gamma, CostModel::zero(3)).unwrap();
            let perm = [2usize, 0, 1];
            let p = |v: &Vec<i64>| perm.iter().map(|&k| v[k]).collect::<Vec<_>>();
            let inst_p = Instance::new(p(&d_bar), p(&b_bar), p(&ell), p(&u), gamma, CostModel::zero(3)).unwrap();
            let v = check_feasible_dr(&inst, &Allocation::new(d.clone(), b.clone())).unwrap();
            let vp = check_feasible_dr(&inst_p, &Allocation::new(p(&d), p(&b))).unwrap();
            prop_assert_eq!(v.feasible(), vp.feasible());
            let relabel = |viol: &Violation| match viol.scope {
                Scope::Station(k) => Violation { scope: Scope::Station(perm[k]), ..viol.clone() },
                Scope::Global => viol.clone(),
            };
            let mut mapped: Vec<_> = vp.violations.iter().map(relabel).collect();
            let mut orig = v.violations.clone();
            mapped.sort();
            orig.sort();
            prop_assert_eq!(mapped, orig);
        }
    }
}
