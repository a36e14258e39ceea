//! Brute-force ground truth for small instances.
//!
//! Feasible sets are enumerated exhaustively: dock totals `x` first (pruned
//! by the running sum, the ℓ1 budget and the P-side total), then every bike
//! split of each `x`. Every emitted point is re-checked against the literal
//! constraint list of its problem before it is used.
//!
//! Enumeration refuses to start when its estimated size exceeds the cap
//! (default `10⁷` points, overridable through `DOCKALLOC_ORACLE_CAP`).

use std::fmt;

use crate::costs::Rational;
use crate::descent::ScaledCosts;
use crate::error::{Error, Result};
use crate::model::{check_feasible_dr, l1_distance, Allocation, ConstraintId, Instance};
use crate::transform::{scale_view, DrPrime};

pub const DEFAULT_CAP: u128 = 10_000_000;
pub const CAP_ENV: &str = "DOCKALLOC_ORACLE_CAP";

/// Which member of the problem family to enumerate.
#[derive(Debug, Clone, Copy)]
pub enum ProblemSpec<'a> {
    /// The reallocation problem itself.
    Dr(&'a Instance),
    /// Without the ℓ1 budget.
    Relaxed(&'a Instance),
    /// The restricted problem.
    DrPrime(&'a DrPrime),
    /// The restricted problem under the λ-view.
    Scaled(&'a DrPrime, i64),
    /// The λ-view with exactly `γ′` docks moved into P.
    Level(&'a DrPrime, i64, i64),
}

impl ProblemSpec<'_> {
    pub fn instance(&self) -> &Instance {
        match self {
            ProblemSpec::Dr(i) | ProblemSpec::Relaxed(i) => i,
            ProblemSpec::DrPrime(d) | ProblemSpec::Scaled(d, _) | ProblemSpec::Level(d, _, _) => d.base(),
        }
    }
}

impl fmt::Display for ProblemSpec<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemSpec::Dr(_) => f.write_str("DR"),
            ProblemSpec::Relaxed(_) => f.write_str("relaxed"),
            ProblemSpec::DrPrime(_) => f.write_str("DR'"),
            ProblemSpec::Scaled(_, l) => write!(f, "DR'({l})"),
            ProblemSpec::Level(_, l, g) => write!(f, "DR'({l}) at level {g}"),
        }
    }
}

/// Every optimum of one problem, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimaSet {
    pub problem: String,
    pub optimal_value: Rational,
    pub optima: Vec<Allocation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Oracle {
    cap: u128,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle { cap: DEFAULT_CAP }
    }
}

/// Flattened constraints of one problem.
struct Space<'a> {
    spec: ProblemSpec<'a>,
    n: usize,
    lambda: i64,
    /// Residues of `d` and `b` modulo λ.
    rd: Vec<i64>,
    rb: Vec<i64>,
    /// Candidate dock totals per station, increasing.
    xs: Vec<Vec<i64>>,
    total: i64,
    bike_cap: i64,
    x_bar: Vec<i64>,
    budget: Option<i64>,
    in_p: Vec<bool>,
    p_range: (i64, i64),
}

impl<'a> Space<'a> {
    fn new(spec: ProblemSpec<'a>) -> Result<Self> {
        let inst = spec.instance();
        let n = inst.n();
        let (lo, hi, lambda, anchor, in_p, p_range, budget) = match spec {
            ProblemSpec::Dr(i) | ProblemSpec::Relaxed(i) => {
                let budget = matches!(spec, ProblemSpec::Dr(_)).then(|| 2 * i.gamma());
                (i.ell().to_vec(), i.u().to_vec(), 1, None, vec![false; n], (i64::MIN, i64::MAX), budget)
            }
            ProblemSpec::DrPrime(d) | ProblemSpec::Scaled(d, _) | ProblemSpec::Level(d, _, _) => {
                let lambda = match spec {
                    ProblemSpec::Scaled(_, l) | ProblemSpec::Level(_, l, _) => l,
                    _ => 1,
                };
                if lambda < 1 {
                    return Err(Error::Invalid(format!("lambda = {lambda} must be positive")));
                }
                let p_range = match spec {
                    ProblemSpec::Level(_, _, g) => (d.x_bar_p() + g, d.x_bar_p() + g),
                    _ => (i64::MIN, d.xi_p()),
                };
                let g = d.base().gamma();
                (d.ell().to_vec(), d.u().to_vec(), lambda, Some(d.reference()), d.in_p().to_vec(), p_range, Some(2 * g))
            }
        };
        let rd: Vec<i64> = (0..n).map(|i| anchor.map_or(0, |a| a.d[i].rem_euclid(lambda))).collect();
        let rb: Vec<i64> = (0..n).map(|i| anchor.map_or(0, |a| a.b[i].rem_euclid(lambda))).collect();
        let xs = (0..n)
            .map(|i| {
                let r = (rd[i] + rb[i]).rem_euclid(lambda);
                let mut x = lo[i].max(rd[i] + rb[i]);
                x += (r - x).rem_euclid(lambda);
                let mut out = Vec::new();
                while x <= hi[i] {
                    out.push(x);
                    x += lambda;
                }
                out
            })
            .collect();
        Ok(Space {
            spec,
            n,
            lambda,
            rd,
            rb,
            xs,
            total: inst.total(),
            bike_cap: inst.total_bikes(),
            x_bar: inst.x_bar(),
            budget,
            in_p,
            p_range,
        })
    }

    fn b_choices(&self, i: usize, x: i64) -> u128 {
        let top = (x - self.rd[i]).min(self.bike_cap);
        if top < self.rb[i] {
            0
        } else {
            ((top - self.rb[i]) / self.lambda + 1) as u128
        }
    }

    fn estimate(&self) -> u128 {
        self.xs
            .iter()
            .enumerate()
            .map(|(i, xs)| xs.iter().map(|&x| self.b_choices(i, x)).sum::<u128>())
            .fold(1u128, |acc, v| acc.saturating_mul(v))
    }

    fn admits(&self, a: &Allocation) -> Result<bool> {
        Ok(match self.spec {
            ProblemSpec::Dr(inst) => check_feasible_dr(inst, a)?.feasible(),
            ProblemSpec::Relaxed(inst) => check_feasible_dr(inst, a)?
                .violations
                .iter()
                .all(|v| v.constraint == ConstraintId::L1Budget),
            ProblemSpec::DrPrime(d) => d.is_feasible(a),
            ProblemSpec::Scaled(d, l) => scale_view(d, l)?.admits(a),
            ProblemSpec::Level(d, l, g) => scale_view(d, l)?.admits(a) && d.level(a) == g,
        })
    }

    fn walk(&self, f: &mut dyn FnMut(&Allocation) -> Result<()>) -> Result<()> {
        if self.xs.iter().any(|v| v.is_empty()) {
            return Ok(());
        }
        // Suffix bounds on the reachable remaining total.
        let mut min_rest = vec![0; self.n + 1];
        let mut max_rest = vec![0; self.n + 1];
        for i in (0..self.n).rev() {
            min_rest[i] = min_rest[i + 1] + self.xs[i][0];
            max_rest[i] = max_rest[i + 1] + self.xs[i].last().copied().unwrap_or(0);
        }
        let mut x = vec![0; self.n];
        let mut a = Allocation::new(vec![0; self.n], vec![0; self.n]);
        self.walk_x(0, 0, 0, 0, &min_rest, &max_rest, &mut x, &mut a, f)
    }

    #[allow(clippy::too_many_arguments)]
    fn walk_x(
        &self,
        i: usize,
        sum: i64,
        p_sum: i64,
        dist: i64,
        min_rest: &[i64],
        max_rest: &[i64],
        x: &mut Vec<i64>,
        a: &mut Allocation,
        f: &mut dyn FnMut(&Allocation) -> Result<()>,
    ) -> Result<()> {
        if i == self.n {
            if sum != self.total || p_sum < self.p_range.0 || p_sum > self.p_range.1 {
                return Ok(());
            }
            let mut min_b = vec![0; self.n + 1];
            for k in (0..self.n).rev() {
                min_b[k] = min_b[k + 1] + self.rb[k];
            }
            return self.walk_b(0, 0, &min_b, x, a, f);
        }
        for &xi in &self.xs[i] {
            let s = sum + xi;
            if s + min_rest[i + 1] > self.total {
                break;
            }
            if s + max_rest[i + 1] < self.total {
                continue;
            }
            let dd = dist + (xi - self.x_bar[i]).abs();
            if self.budget.is_some_and(|b| dd > b) {
                continue;
            }
            let ps = if self.in_p[i] { p_sum + xi } else { p_sum };
            if ps > self.p_range.1 {
                break;
            }
            x[i] = xi;
            self.walk_x(i + 1, s, ps, dd, min_rest, max_rest, x, a, f)?;
        }
        Ok(())
    }

    fn walk_b(
        &self,
        i: usize,
        bikes: i64,
        min_b: &[i64],
        x: &[i64],
        a: &mut Allocation,
        f: &mut dyn FnMut(&Allocation) -> Result<()>,
    ) -> Result<()> {
        if i == self.n {
            if !self.admits(a)? {
                return Err(Error::Invalid(format!(
                    "enumerated point {a} fails the literal constraint check of {}",
                    self.spec
                )));
            }
            return f(a);
        }
        let mut b = self.rb[i];
        while b <= x[i] - self.rd[i] && bikes + b + min_b[i + 1] <= self.bike_cap {
            a.b[i] = b;
            a.d[i] = x[i] - b;
            self.walk_b(i + 1, bikes + b, min_b, x, a, f)?;
            b += self.lambda;
        }
        Ok(())
    }
}

impl Oracle {
    pub fn new(cap: u128) -> Self {
        Oracle { cap }
    }

    /// Cap from `DOCKALLOC_ORACLE_CAP`, or the default.
    pub fn from_env() -> Result<Self> {
        match std::env::var(CAP_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map(Oracle::new)
                .map_err(|_| Error::Parse(format!("{CAP_ENV} = {v:?} is not a nonnegative integer"))),
            Err(_) => Ok(Oracle::default()),
        }
    }

    pub fn cap(&self) -> u128 {
        self.cap
    }

    /// Upper bound on the number of points the enumeration visits.
    pub fn estimate(&self, spec: ProblemSpec<'_>) -> Result<u128> {
        Ok(Space::new(spec)?.estimate())
    }

    fn space<'a>(&self, spec: ProblemSpec<'a>) -> Result<Space<'a>> {
        let space = Space::new(spec)?;
        let estimated = space.estimate();
        if estimated > self.cap {
            return Err(Error::OracleCap { estimated, cap: self.cap });
        }
        Ok(space)
    }

    /// Calls `f` on every feasible point in enumeration order.
    pub fn for_each_feasible(&self, spec: ProblemSpec<'_>, mut f: impl FnMut(&Allocation)) -> Result<()> {
        self.space(spec)?.walk(&mut |a| {
            f(a);
            Ok(())
        })
    }

    pub fn enumerate_feasible(&self, spec: ProblemSpec<'_>) -> Result<Vec<Allocation>> {
        let mut out = Vec::new();
        self.for_each_feasible(spec, |a| out.push(a.clone()))?;
        Ok(out)
    }

    pub fn all_optima(&self, spec: ProblemSpec<'_>) -> Result<OptimaSet> {
        let space = self.space(spec)?;
        let costs = ScaledCosts::new(spec.instance().cost())?;
        let scale = spec
            .instance()
            .cost()
            .common_denominator()
            .ok_or(Error::Overflow("common cost denominator"))?;
        let mut best: Option<i128> = None;
        let mut optima = Vec::new();
        space.walk(&mut |a| {
            let v = costs.total(a)?;
            match best {
                Some(b) if v > b => {}
                Some(b) if v == b => optima.push(a.clone()),
                _ => {
                    best = Some(v);
                    optima.clear();
                    optima.push(a.clone());
                }
            }
            Ok(())
        })?;
        let value = best.ok_or(Error::EmptyFeasibleSet)?;
        optima.sort();
        Ok(OptimaSet {
            problem: spec.to_string(),
            optimal_value: Rational::new(value, scale),
            optima,
        })
    }

    /// Optimal value and the lexicographically smallest optimum.
    pub fn brute_optimum(&self, spec: ProblemSpec<'_>) -> Result<(Rational, Allocation)> {
        let set = self.all_optima(spec)?;
        let first = set.optima.into_iter().next().ok_or(Error::EmptyFeasibleSet)?;
        Ok((set.optimal_value, first))
    }

    /// The optimum closest to `anchor` in `‖d* − d‖₁ + ‖b* − b‖₁`.
    pub fn min_distance_optimum(&self, spec: ProblemSpec<'_>, anchor: &Allocation) -> Result<Allocation> {
        let set = self.all_optima(spec)?;
        closest(&set.optima, anchor).cloned().ok_or(Error::EmptyFeasibleSet)
    }

    /// `min ½‖x − x̄‖₁` over the feasible set.
    pub fn min_half_distance(&self, spec: ProblemSpec<'_>) -> Result<i64> {
        let x_bar = spec.instance().x_bar();
        let mut best: Option<i64> = None;
        let mut err = None;
        self.for_each_feasible(spec, |a| match l1_distance(&a.x(), &x_bar) {
            Ok(d) => best = Some(best.map_or(d, |b| b.min(d))),
            Err(e) => err = Some(e),
        })?;
        if let Some(e) = err {
            return Err(e);
        }
        best.map(|d| d / 2).ok_or(Error::EmptyFeasibleSet)
    }
}

/// The member of a sorted list closest to `anchor`; ties go to the earliest.
pub fn closest<'a>(sorted: &'a [Allocation], anchor: &Allocation) -> Option<&'a Allocation> {
    sorted.iter().min_by_key(|a| a.split_distance(anchor))
}
