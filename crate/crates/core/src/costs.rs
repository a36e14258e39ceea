//! Per-station cost functions `c_i(d, b)`.
//!
//! Two families are provided. [`StationCost::SeparableConvex`] is
//! `φ(d) + ψ(b) + θ(d + b)` with discretely convex `φ, ψ, θ`; every such
//! function is multimodular. [`StationCost::Table`] stores an explicit grid
//! and is only accepted after [`validate_multimodular`] passes on it.

use std::fmt;

use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::error::{check_len, Error, Result};

/// Exact rational used for every cost value.
pub type Rational = Ratio<i128>;

pub fn rational(num: i128, den: i128) -> Rational {
    Ratio::new(num, den)
}

pub fn int(v: i64) -> Rational {
    Ratio::from_integer(v as i128)
}

/// A discretely convex function of one integer variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConvexSpec {
    /// `a·t² + b·t + c` with `a ≥ 0`.
    Quadratic { a: Rational, b: Rational, c: Rational },
    /// Piecewise linear with integer breakpoints.
    ///
    /// `slopes[j]` is the slope on the unit steps `[m, m + 1)` for which
    /// exactly `j` breakpoints are `≤ m`; `slopes.len() == breakpoints.len() + 1`.
    /// `origin` is the value at `t = 0`.
    PiecewiseLinear {
        breakpoints: Vec<i64>,
        slopes: Vec<Rational>,
        origin: Rational,
    },
}

impl ConvexSpec {
    pub fn zero() -> Self {
        ConvexSpec::Quadratic {
            a: Rational::zero(),
            b: Rational::zero(),
            c: Rational::zero(),
        }
    }

    pub fn quadratic(a: Rational, b: Rational, c: Rational) -> Self {
        ConvexSpec::Quadratic { a, b, c }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexSpec::Quadratic { a, .. } => {
                if a.is_negative() {
                    return Err(Error::Invalid(format!(
                        "quadratic coefficient must be nonnegative, got {a}"
                    )));
                }
            }
            ConvexSpec::PiecewiseLinear {
                breakpoints,
                slopes,
                ..
            } => {
                if slopes.len() != breakpoints.len() + 1 {
                    return Err(Error::Invalid(format!(
                        "piecewise-linear spec needs {} slopes for {} breakpoints, got {}",
                        breakpoints.len() + 1,
                        breakpoints.len(),
                        slopes.len()
                    )));
                }
                if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Invalid(
                        "breakpoints must be strictly increasing".into(),
                    ));
                }
                if slopes.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::Invalid("slopes must be nondecreasing".into()));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: i64) -> Rational {
        match self {
            ConvexSpec::Quadratic { a, b, c } => {
                let t = int(t);
                a * t * t + b * t + c
            }
            ConvexSpec::PiecewiseLinear {
                breakpoints,
                slopes,
                origin,
            } => origin + signed_integral(breakpoints, slopes, t),
        }
    }
}

/// `Σ_{m=0}^{t-1} slope(m)` for `t ≥ 0`, and `-Σ_{m=t}^{-1} slope(m)` for `t < 0`.
fn signed_integral(breakpoints: &[i64], slopes: &[Rational], t: i64) -> Rational {
    let (lo, hi, sign) = if t >= 0 { (0, t, 1) } else { (t, 0, -1) };
    let mut total = Rational::zero();
    for (j, slope) in slopes.iter().enumerate() {
        let seg_lo = if j == 0 { i64::MIN } else { breakpoints[j - 1] };
        let seg_hi = if j == breakpoints.len() {
            i64::MAX
        } else {
            breakpoints[j]
        };
        let a = lo.max(seg_lo);
        let b = hi.min(seg_hi);
        if b > a {
            total += slope * int(b - a);
        }
    }
    if sign < 0 {
        -total
    } else {
        total
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StationCost {
    SeparableConvex {
        phi: ConvexSpec,
        psi: ConvexSpec,
        theta: ConvexSpec,
    },
    /// `grid[d][b]`; every row has the same length.
    Table { grid: Vec<Vec<Rational>> },
}

impl StationCost {
    pub fn zero() -> Self {
        StationCost::SeparableConvex {
            phi: ConvexSpec::zero(),
            psi: ConvexSpec::zero(),
            theta: ConvexSpec::zero(),
        }
    }

    /// Largest `(d, b)` covered, or `None` when unbounded.
    pub fn domain(&self) -> Option<(i64, i64)> {
        match self {
            StationCost::SeparableConvex { .. } => None,
            StationCost::Table { grid } => Some((
                grid.len() as i64 - 1,
                grid.first().map_or(0, |r| r.len()) as i64 - 1,
            )),
        }
    }

    fn eval_at(&self, station: usize, d: i64, b: i64) -> Result<Rational> {
        if d < 0 || b < 0 {
            return Err(Error::Domain { station, d, b });
        }
        match self {
            StationCost::SeparableConvex { phi, psi, theta } => {
                Ok(phi.eval(d) + psi.eval(b) + theta.eval(d + b))
            }
            StationCost::Table { grid } => grid
                .get(d as usize)
                .and_then(|row| row.get(b as usize))
                .copied()
                .ok_or(Error::Domain { station, d, b }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostFamily {
    SeparableConvex,
    Table,
}

impl fmt::Display for CostFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostFamily::SeparableConvex => "separable_convex",
            CostFamily::Table => "table",
        })
    }
}

/// One [`StationCost`] per station, all from the same family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostModel {
    stations: Vec<StationCost>,
}

impl CostModel {
    pub fn new(stations: Vec<StationCost>) -> Result<Self> {
        if stations.is_empty() {
            return Err(Error::Invalid("cost model has no stations".into()));
        }
        let family = family_of(&stations[0]);
        for (i, s) in stations.iter().enumerate() {
            if family_of(s) != family {
                return Err(Error::Invalid(format!(
                    "station {i} mixes cost families ({} vs {family})",
                    family_of(s)
                )));
            }
            match s {
                StationCost::SeparableConvex { phi, psi, theta } => {
                    for spec in [phi, psi, theta] {
                        spec.validate()?;
                    }
                }
                StationCost::Table { grid } => {
                    let width = grid.first().map_or(0, Vec::len);
                    if grid.is_empty() || width == 0 {
                        return Err(Error::Invalid(format!("station {i} has an empty table")));
                    }
                    if grid.iter().any(|r| r.len() != width) {
                        return Err(Error::Invalid(format!("station {i} has a ragged table")));
                    }
                }
            }
        }
        Ok(CostModel { stations })
    }

    /// The all-zero separable model.
    pub fn zero(n: usize) -> Self {
        CostModel {
            stations: vec![StationCost::zero(); n.max(1)],
        }
    }

    pub fn n_stations(&self) -> usize {
        self.stations.len()
    }

    pub fn station(&self, i: usize) -> &StationCost {
        &self.stations[i]
    }

    pub fn stations(&self) -> &[StationCost] {
        &self.stations
    }

    pub fn family(&self) -> CostFamily {
        family_of(&self.stations[0])
    }

    /// Exact value of `c_i(d, b)`.
    pub fn eval(&self, i: usize, d: i64, b: i64) -> Result<Rational> {
        let station = self.stations.get(i).ok_or_else(|| {
            Error::Invalid(format!(
                "station {i} out of range for {} stations",
                self.stations.len()
            ))
        })?;
        station.eval_at(i, d, b)
    }

    /// A positive integer `L` such that `L · c_i(d, b)` is an integer for every
    /// station and every point, or `None` if it does not fit in `i128`.
    pub fn common_denominator(&self) -> Option<i128> {
        let mut l: i128 = 1;
        let mut absorb = |r: &Rational| -> Option<()> {
            let den = *r.denom();
            l = l.checked_mul(den / num_integer::gcd(l, den))?;
            Some(())
        };
        for s in &self.stations {
            match s {
                StationCost::SeparableConvex { phi, psi, theta } => {
                    for spec in [phi, psi, theta] {
                        match spec {
                            ConvexSpec::Quadratic { a, b, c } => {
                                absorb(a)?;
                                absorb(b)?;
                                absorb(c)?;
                            }
                            ConvexSpec::PiecewiseLinear { slopes, origin, .. } => {
                                slopes.iter().try_for_each(&mut absorb)?;
                                absorb(origin)?;
                            }
                        }
                    }
                }
                StationCost::Table { grid } => {
                    grid.iter().flatten().try_for_each(&mut absorb)?;
                }
            }
        }
        Some(l)
    }

    /// `Σ_i c_i(d(i), b(i))`.
    pub fn total(&self, d: &[i64], b: &[i64]) -> Result<Rational> {
        check_len("d", d.len(), self.stations.len())?;
        check_len("b", b.len(), self.stations.len())?;
        let mut sum = Rational::zero();
        for i in 0..d.len() {
            sum += self.eval(i, d[i], b[i])?;
        }
        Ok(sum)
    }
}

fn family_of(s: &StationCost) -> CostFamily {
    match s {
        StationCost::SeparableConvex { .. } => CostFamily::SeparableConvex,
        StationCost::Table { .. } => CostFamily::Table,
    }
}

/// A point where one of the three multimodularity inequalities fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultimodularityViolation {
    pub station: usize,
    pub alpha: i64,
    pub beta: i64,
    /// 1, 2 or 3, in the order the inequalities are listed on
    /// [`validate_multimodular`].
    pub inequality: u8,
    pub lhs: Rational,
    pub rhs: Rational,
}

impl fmt::Display for MultimodularityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "station {} violates inequality {} at ({}, {}): {} < {}",
            self.station, self.inequality, self.alpha, self.beta, self.lhs, self.rhs
        )
    }
}

/// Exhaustively checks multimodularity of `c_i` on `[0, d_max] × [0, b_max]`:
///
/// 1. `c(α+1, β+1) − c(α+1, β) ≥ c(α, β+1) − c(α, β)` for `α, β ≥ 0`
/// 2. `c(α−1, β+1) − c(α−1, β) ≥ c(α, β) − c(α, β−1)` for `α, β ≥ 1`
/// 3. `c(α+1, β−1) − c(α, β−1) ≥ c(α, β) − c(α−1, β)` for `α, β ≥ 1`
///
/// Each inequality is checked wherever all the points it mentions lie in the
/// box. Returns the first violation in `(α, β, inequality)` order.
pub fn validate_multimodular(
    cost: &CostModel,
    i: usize,
    (d_max, b_max): (i64, i64),
) -> Result<Option<MultimodularityViolation>> {
    if d_max < 0 || b_max < 0 {
        return Err(Error::Invalid(format!("empty box ({d_max}, {b_max})")));
    }
    let mut grid = Vec::with_capacity(d_max as usize + 1);
    for d in 0..=d_max {
        let mut row = Vec::with_capacity(b_max as usize + 1);
        for b in 0..=b_max {
            row.push(cost.eval(i, d, b)?);
        }
        grid.push(row);
    }
    let c = |a: i64, b: i64| grid[a as usize][b as usize];
    for alpha in 0..=d_max {
        for beta in 0..=b_max {
            if alpha < d_max && beta < b_max {
                let lhs = c(alpha + 1, beta + 1) - c(alpha + 1, beta);
                let rhs = c(alpha, beta + 1) - c(alpha, beta);
                if lhs < rhs {
                    return Ok(Some(violation(i, alpha, beta, 1, lhs, rhs)));
                }
            }
            if alpha >= 1 && beta >= 1 && beta < b_max {
                let lhs = c(alpha - 1, beta + 1) - c(alpha - 1, beta);
                let rhs = c(alpha, beta) - c(alpha, beta - 1);
                if lhs < rhs {
                    return Ok(Some(violation(i, alpha, beta, 2, lhs, rhs)));
                }
            }
            if alpha >= 1 && beta >= 1 && alpha < d_max {
                let lhs = c(alpha + 1, beta - 1) - c(alpha, beta - 1);
                let rhs = c(alpha, beta) - c(alpha - 1, beta);
                if lhs < rhs {
                    return Ok(Some(violation(i, alpha, beta, 3, lhs, rhs)));
                }
            }
        }
    }
    Ok(None)
}

fn violation(
    station: usize,
    alpha: i64,
    beta: i64,
    inequality: u8,
    lhs: Rational,
    rhs: Rational,
) -> MultimodularityViolation {
    MultimodularityViolation {
        station,
        alpha,
        beta,
        inequality,
        lhs,
        rhs,
    }
}

/// A point where `β ↦ c_i(x − β, β)` fails discrete convexity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexityViolation {
    pub station: usize,
    pub x_fixed: i64,
    pub beta: i64,
    pub second_difference: Rational,
}

/// Checks that `ĉ(β) = c_i(x_fixed − β, β)` has nonnegative second
/// differences for `1 ≤ β ≤ x_fixed − 1`.
pub fn diag_convexity(
    cost: &CostModel,
    i: usize,
    x_fixed: i64,
) -> Result<Option<ConvexityViolation>> {
    if x_fixed < 0 {
        return Err(Error::Invalid(format!("negative dock total {x_fixed}")));
    }
    let values = (0..=x_fixed)
        .map(|beta| cost.eval(i, x_fixed - beta, beta))
        .collect::<Result<Vec<_>>>()?;
    for beta in 1..x_fixed {
        let k = beta as usize;
        let second = values[k + 1] - values[k] * int(2) + values[k - 1];
        if second.is_negative() {
            return Ok(Some(ConvexityViolation {
                station: i,
                x_fixed,
                beta,
                second_difference: second,
            }));
        }
    }
    Ok(None)
}

/// Index choices for [`check_exchange_inequalities`]. Any subset may be set;
/// each inequality is evaluated only when all the indices it uses are given.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExchangeIndices {
    /// `i ∈ supp⁺(d − d′) ∩ supp⁺(x − x′)`
    pub i: Option<usize>,
    /// `j ∈ supp⁻(b − b′) ∩ supp⁻(x − x′)`
    pub j: Option<usize>,
    /// `h ∈ supp⁻(d − d′) ∩ supp⁻(x − x′)`
    pub h: Option<usize>,
    /// `k ∈ supp⁺(b − b′) ∩ supp⁺(x − x′)`
    pub k: Option<usize>,
    /// `s ∈ supp⁻(d − d′) ∩ supp⁺(b − b′)`
    pub s: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExchangeKind {
    /// Move one open dock from `i` to `h` (uses `i, h`).
    DockExchange,
    /// Move one bike dock from `k` to `j` (uses `j, k`).
    BikeExchange,
    /// Remove an open dock at `i`, add a bike dock at `j` (uses `i, j`).
    DockToBike,
    /// As `DockToBike`, routed through a conversion at `s` (uses `i, j, s`).
    DockToBikeVia,
    /// `DockExchange` and `BikeExchange` together (uses `i, j, h, k`).
    DoubleExchange,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExchangeVerdict {
    pub kind: ExchangeKind,
    /// `c(d, b) + c(d′, b′)`
    pub lhs: Rational,
    /// Cost of the two exchanged points.
    pub rhs: Rational,
    pub holds: bool,
}

/// Evaluates the exchange inequalities `c(d,b) + c(d′,b′) ≥ c(moved) + c(counter-moved)`
/// that multimodular costs satisfy, for whichever index combinations are supplied.
pub fn check_exchange_inequalities(
    cost: &CostModel,
    a: &crate::model::Allocation,
    a2: &crate::model::Allocation,
    idx: ExchangeIndices,
) -> Result<Vec<ExchangeVerdict>> {
    let n = cost.n_stations();
    for (what, v) in [("d", &a.d), ("b", &a.b), ("d'", &a2.d), ("b'", &a2.b)] {
        check_len(what, v.len(), n)?;
    }
    let dd = |t: usize| a.d[t] - a2.d[t];
    let db = |t: usize| a.b[t] - a2.b[t];
    let dx = |t: usize| dd(t) + db(t);
    let require = |name: &str, t: Option<usize>, ok: &dyn Fn(usize) -> bool| -> Result<()> {
        match t {
            Some(t) if t >= n => Err(Error::Precondition(format!(
                "index {name} = {t} out of range"
            ))),
            Some(t) if !ok(t) => Err(Error::Precondition(format!(
                "index {name} = {t} fails its support condition"
            ))),
            _ => Ok(()),
        }
    };
    require("i", idx.i, &|t| dd(t) > 0 && dx(t) > 0)?;
    require("j", idx.j, &|t| db(t) < 0 && dx(t) < 0)?;
    require("h", idx.h, &|t| dd(t) < 0 && dx(t) < 0)?;
    require("k", idx.k, &|t| db(t) > 0 && dx(t) > 0)?;
    require("s", idx.s, &|t| dd(t) < 0 && db(t) > 0)?;

    let lhs = cost.total(&a.d, &a.b)? + cost.total(&a2.d, &a2.b)?;
    let mut out = Vec::new();
    let mut eval = |kind: ExchangeKind, ddelta: Vec<(usize, i64)>, bdelta: Vec<(usize, i64)>| {
        let (mut d1, mut b1, mut d2, mut b2) = (a.d.clone(), a.b.clone(), a2.d.clone(), a2.b.clone());
        for &(t, v) in &ddelta {
            d1[t] += v;
            d2[t] -= v;
        }
        for &(t, v) in &bdelta {
            b1[t] += v;
            b2[t] -= v;
        }
        let rhs = cost.total(&d1, &b1)? + cost.total(&d2, &b2)?;
        out.push(ExchangeVerdict {
            kind,
            lhs,
            rhs,
            holds: lhs >= rhs,
        });
        Ok::<(), Error>(())
    };
    if let (Some(i), Some(h)) = (idx.i, idx.h) {
        eval(ExchangeKind::DockExchange, vec![(i, -1), (h, 1)], vec![])?;
    }
    if let (Some(j), Some(k)) = (idx.j, idx.k) {
        eval(ExchangeKind::BikeExchange, vec![], vec![(j, 1), (k, -1)])?;
    }
    if let (Some(i), Some(j)) = (idx.i, idx.j) {
        eval(ExchangeKind::DockToBike, vec![(i, -1)], vec![(j, 1)])?;
    }
    if let (Some(i), Some(j), Some(s)) = (idx.i, idx.j, idx.s) {
        eval(
            ExchangeKind::DockToBikeVia,
            vec![(i, -1), (s, 1)],
            vec![(j, 1), (s, -1)],
        )?;
    }
    if let (Some(i), Some(j), Some(h), Some(k)) = (idx.i, idx.j, idx.h, idx.k) {
        eval(
            ExchangeKind::DoubleExchange,
            vec![(i, -1), (h, 1)],
            vec![(j, 1), (k, -1)],
        )?;
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::model::Allocation;

    fn q(a: i128, b: i128, c: i128) -> ConvexSpec {
        ConvexSpec::quadratic(rational(a, 1), rational(b, 1), rational(c, 1))
    }

    fn separable(phi: ConvexSpec, psi: ConvexSpec, theta: ConvexSpec) -> StationCost {
        StationCost::SeparableConvex { phi, psi, theta }
    }

    /// c_1(d,b) = (d−4)² + (b−1)², c_2(d,b) = d² + b².
    pub(crate) fn e1_costs() -> CostModel {
        CostModel::new(vec![
            separable(q(1, -8, 16), q(1, -2, 1), ConvexSpec::zero()),
            separable(q(1, 0, 0), q(1, 0, 0), ConvexSpec::zero()),
        ])
        .unwrap()
    }

    #[test]
    fn zero_model_is_zero() {
        let m = CostModel::zero(3);
        for d in 0..5 {
            for b in 0..5 {
                assert_eq!(m.eval(1, d, b).unwrap(), Rational::zero());
            }
        }
    }

    #[test]
    fn quadratic_phi_eval() {
        let m = CostModel::new(vec![separable(q(1, -8, 16), ConvexSpec::zero(), ConvexSpec::zero())])
            .unwrap();
        for b in 0..4 {
            assert_eq!(m.eval(0, 2, b).unwrap(), int(4));
        }
    }

    #[test]
    fn table_lookup_and_domain() {
        let mut grid = vec![vec![Rational::zero(); 3]; 4];
        grid[3][1] = rational(7, 2);
        let m = CostModel::new(vec![StationCost::Table { grid }]).unwrap();
        assert_eq!(m.eval(0, 3, 1).unwrap(), rational(7, 2));
        assert_eq!(
            m.eval(0, 4, 0),
            Err(Error::Domain {
                station: 0,
                d: 4,
                b: 0
            })
        );
        assert!(m.eval(0, 0, -1).is_err());
    }

    #[test]
    fn piecewise_linear_eval() {
        // slope -2 below 1, 0 on [1,3), 3 from 3 on; f(0) = 5
        let f = ConvexSpec::PiecewiseLinear {
            breakpoints: vec![1, 3],
            slopes: vec![int(-2), int(0), int(3)],
            origin: int(5),
        };
        f.validate().unwrap();
        let expect = [(0, 5), (1, 3), (2, 3), (3, 3), (4, 6), (6, 12), (-1, 7)];
        for (t, v) in expect {
            assert_eq!(f.eval(t), int(v), "t = {t}");
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let bad_slopes = ConvexSpec::PiecewiseLinear {
            breakpoints: vec![2],
            slopes: vec![int(1), int(0)],
            origin: int(0),
        };
        assert!(bad_slopes.validate().is_err());
        assert!(q(-1, 0, 0).validate().is_err());
        let mixed = CostModel::new(vec![
            StationCost::zero(),
            StationCost::Table {
                grid: vec![vec![int(0)]],
            },
        ]);
        assert!(mixed.is_err());
    }

    #[test]
    fn linear_cost_is_multimodular() {
        let m = CostModel::new(vec![separable(q(0, 2, 0), q(0, 3, 0), ConvexSpec::zero())]).unwrap();
        assert_eq!(validate_multimodular(&m, 0, (8, 8)).unwrap(), None);
        for x in 0..8 {
            assert_eq!(diag_convexity(&m, 0, x).unwrap(), None);
        }
    }

    #[test]
    fn concave_theta_rejected_at_origin() {
        let m = CostModel::new(vec![StationCost::Table {
            grid: (0..6)
                .map(|d| (0..6).map(|b| -int((d + b) * (d + b))).collect())
                .collect(),
        }])
        .unwrap();
        let v = validate_multimodular(&m, 0, (5, 5)).unwrap().unwrap();
        assert_eq!((v.alpha, v.beta, v.inequality), (0, 0, 1));
        assert_eq!(v.lhs, int(-3));
        assert_eq!(v.rhs, int(-1));
    }

    #[test]
    fn each_inequality_detects_its_own_concavity() {
        // concave psi breaks inequality 2, concave phi breaks inequality 3
        let concave = ConvexSpec::PiecewiseLinear {
            breakpoints: vec![2],
            slopes: vec![int(1), int(0)],
            origin: int(0),
        };
        let table = |f: &dyn Fn(i64, i64) -> Rational| StationCost::Table {
            grid: (0..6).map(|d| (0..6).map(|b| f(d, b)).collect()).collect(),
        };
        let c = concave.clone();
        let m = CostModel::new(vec![table(&|_, b| -int(b * b))]).unwrap();
        assert_eq!(validate_multimodular(&m, 0, (5, 5)).unwrap().unwrap().inequality, 2);
        let m = CostModel::new(vec![table(&|d, _| -int(d * d))]).unwrap();
        assert_eq!(validate_multimodular(&m, 0, (5, 5)).unwrap().unwrap().inequality, 3);
        let m = CostModel::new(vec![table(&move |d, _| c.eval(d))]).unwrap();
        assert!(validate_multimodular(&m, 0, (5, 5)).unwrap().is_some());
    }

    #[test]
    fn e1_exchange_dock_inequality() {
        let cost = e1_costs();
        let a = Allocation::new(vec![3, 0], vec![1, 2]);
        let a2 = Allocation::new(vec![2, 1], vec![1, 2]);
        let idx = ExchangeIndices {
            i: Some(0),
            h: Some(1),
            ..Default::default()
        };
        let out = check_exchange_inequalities(&cost, &a, &a2, idx).unwrap();
        assert_eq!(out.len(), 1);
        // c(a) = 1 + 0 + 0 + 4 = 5, c(a2) = 4 + 0 + 1 + 4 = 9; both moved points equal a2/a.
        assert_eq!(out[0].kind, ExchangeKind::DockExchange);
        assert_eq!(out[0].lhs, int(14));
        assert_eq!(out[0].rhs, int(14));
        assert!(out[0].holds);
    }

    #[test]
    fn identical_allocations_are_vacuous() {
        let cost = e1_costs();
        let a = Allocation::new(vec![3, 0], vec![1, 2]);
        let out = check_exchange_inequalities(&cost, &a, &a, ExchangeIndices::default()).unwrap();
        assert!(out.is_empty());
        let idx = ExchangeIndices {
            i: Some(0),
            ..Default::default()
        };
        assert!(matches!(
            check_exchange_inequalities(&cost, &a, &a, idx),
            Err(Error::Precondition(_))
        ));
    }
}
