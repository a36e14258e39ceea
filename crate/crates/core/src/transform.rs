//! From an instance to the restricted problem and its scaled views.
//!
//! The relaxed problem drops the ℓ1 budget. Its cost-minimal optimum of
//! smallest distance to `x̄` splits the stations into `P` (where it raises
//! the dock total) and `Q`. The restricted problem keeps `x ≥ x̄` on `P`,
//! `x ≤ x̄` on `Q` and caps the total moved into `P` at `γ`.

use crate::descent::{Objective, Region, ScaledCosts};
use crate::error::{Error, Infeasibility, Result};
use crate::model::{l1_distance, objective, Allocation, Instance};
use crate::costs::Rational;

/// Cost-minimal optimum of the relaxed problem with the smallest
/// `‖x − x̄‖₁` among cost-minimal points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelaxedOptimum {
    pub alloc: Allocation,
    pub cost: Rational,
    pub distance: i64,
    pub satisfies_l1: bool,
}

/// The restricted problem.
///
/// Feasible points satisfy `x(N) = D + B`, `b(N) ≤ B`, `ell ≤ x ≤ u` (the
/// primed bounds stored here) and `x(P) ≤ ξ_P`, which is the same as
/// `x(Q) ≥ ξ_Q`. Because `x ≥ x̄` on `P` and `x ≤ x̄` on `Q`, the ℓ1 distance
/// to `x̄` is `2 (x(P) − x̄(P))`, so the budget is exactly `x(P) ≤ ξ_P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrPrime {
    base: Instance,
    in_p: Vec<bool>,
    xi_p: i64,
    xi_q: i64,
    ell: Vec<i64>,
    u: Vec<i64>,
    reference: Allocation,
    gamma_min: i64,
}

impl DrPrime {
    pub fn base(&self) -> &Instance {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn in_p(&self) -> &[bool] {
        &self.in_p
    }

    pub fn p(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.in_p[i]).collect()
    }

    pub fn q(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.in_p[i]).collect()
    }

    pub fn xi_p(&self) -> i64 {
        self.xi_p
    }

    pub fn xi_q(&self) -> i64 {
        self.xi_q
    }

    /// `ℓ′`.
    pub fn ell(&self) -> &[i64] {
        &self.ell
    }

    /// `u′`.
    pub fn u(&self) -> &[i64] {
        &self.u
    }

    /// The fixed feasible point `(d̃, b̃)` that anchors every scaled view.
    pub fn reference(&self) -> &Allocation {
        &self.reference
    }

    pub fn gamma_min(&self) -> i64 {
        self.gamma_min
    }

    /// `x̄(P)`.
    pub fn x_bar_p(&self) -> i64 {
        let xb = self.base.x_bar();
        (0..self.n()).filter(|&i| self.in_p[i]).map(|i| xb[i]).sum()
    }

    /// `x(P)` of an allocation.
    pub fn p_total(&self, a: &Allocation) -> i64 {
        (0..self.n()).filter(|&i| self.in_p[i]).map(|i| a.x_at(i)).sum()
    }

    /// Half distance of `a` from `x̄`, read off the P-side total.
    pub fn level(&self, a: &Allocation) -> i64 {
        self.p_total(a) - self.x_bar_p()
    }

    /// Whether `a` is feasible for the restricted problem.
    pub fn is_feasible(&self, a: &Allocation) -> bool {
        let n = self.n();
        if a.n() != n {
            return false;
        }
        let x = a.x();
        let inst = &self.base;
        let q_total: i64 = (0..n).filter(|&i| !self.in_p[i]).map(|i| x[i]).sum();
        (0..n).all(|i| a.d[i] >= 0 && a.b[i] >= 0 && self.ell[i] <= x[i] && x[i] <= self.u[i])
            && x.iter().sum::<i64>() == inst.total()
            && a.bikes() <= inst.total_bikes()
            && self.p_total(a) <= self.xi_p
            && q_total >= self.xi_q
            && l1_distance(&x, &inst.x_bar()).is_ok_and(|dist| dist <= 2 * inst.gamma())
    }

    /// Region of the λ-view with the P-side total in `[p_lo, p_hi]`.
    pub(crate) fn region(&self, lambda: i64, p_lo: i64, p_hi: i64) -> Region {
        Region {
            lambda,
            lo: self.ell.clone(),
            hi: self.u.clone(),
            in_p: self.in_p.clone(),
            p_lo,
            p_hi,
            bike_cap: self.base.total_bikes(),
        }
    }

    /// Region of the whole restricted problem under the λ-view.
    pub(crate) fn full_region(&self, lambda: i64) -> Region {
        self.region(lambda, self.x_bar_p(), self.xi_p)
    }
}

/// A λ-view of the restricted problem: allocations congruent to the
/// reference modulo λ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledView<'a> {
    pub drp: &'a DrPrime,
    pub lambda: i64,
    /// `(d̃(i) mod λ, b̃(i) mod λ)`.
    pub anchors: Vec<(i64, i64)>,
}

impl ScaledView<'_> {
    pub fn is_congruent(&self, a: &Allocation) -> bool {
        a.n() == self.anchors.len()
            && self.anchors.iter().enumerate().all(|(i, &(rd, rb))| {
                a.d[i].rem_euclid(self.lambda) == rd && a.b[i].rem_euclid(self.lambda) == rb
            })
    }

    pub fn admits(&self, a: &Allocation) -> bool {
        self.is_congruent(a) && self.drp.is_feasible(a)
    }
}

fn check_relaxed_feasible(inst: &Instance) -> Result<()> {
    let total = inst.total();
    let ell_sum: i64 = inst.ell().iter().sum();
    let u_sum: i64 = inst.u().iter().sum();
    if ell_sum > total {
        return Err(Error::Infeasible(Infeasibility::LowerBoundsExceedTotal { ell_sum, total }));
    }
    if u_sum < total {
        return Err(Error::Infeasible(Infeasibility::UpperBoundsBelowTotal { u_sum, total }));
    }
    Ok(())
}

/// A feasible starting point for the relaxed problem: `x̄` clamped into the
/// bounds, then repaired to the right total from the lowest index up, with
/// bikes kept where they were.
fn relaxed_start(inst: &Instance) -> Allocation {
    let n = inst.n();
    let (ell, u) = (inst.ell(), inst.u());
    let mut x: Vec<i64> = (0..n).map(|i| inst.x_bar()[i].clamp(ell[i], u[i])).collect();
    let mut excess: i64 = x.iter().sum::<i64>() - inst.total();
    for i in 0..n {
        if excess > 0 {
            let cut = excess.min(x[i] - ell[i]);
            x[i] -= cut;
            excess -= cut;
        } else if excess < 0 {
            let add = (-excess).min(u[i] - x[i]);
            x[i] += add;
            excess += add;
        }
    }
    let b: Vec<i64> = (0..n).map(|i| inst.b_bar()[i].min(x[i])).collect();
    let d = (0..n).map(|i| x[i] - b[i]).collect();
    Allocation::new(d, b)
}

/// Solves the problem without the ℓ1 budget, preferring small `‖x − x̄‖₁`
/// among cost-minimal points.
pub fn solve_relaxed(inst: &Instance) -> Result<RelaxedOptimum> {
    check_relaxed_feasible(inst)?;
    let n = inst.n();
    let x_bar = inst.x_bar();
    let costs = ScaledCosts::new(inst.cost())?;
    // One group: every station on the Q side and no group-total constraint.
    let region = Region {
        lambda: 1,
        lo: inst.ell().to_vec(),
        hi: inst.u().to_vec(),
        in_p: vec![false; n],
        p_lo: 0,
        p_hi: 0,
        bike_cap: inst.total_bikes(),
    };
    let mut a = relaxed_start(inst);
    region.descend(&costs, Objective::CostThenDistance(&x_bar), &mut a, &[0])?;
    let distance = l1_distance(&a.x(), &x_bar)?;
    Ok(RelaxedOptimum {
        cost: objective(inst, &a)?,
        satisfies_l1: distance <= 2 * inst.gamma(),
        distance,
        alloc: a,
    })
}

/// `P = {i : x•(i) > x̄(i)}`, `Q = N \ P`.
pub fn split_pq(inst: &Instance, relaxed: &RelaxedOptimum) -> (Vec<usize>, Vec<usize>) {
    let x_bar = inst.x_bar();
    (0..inst.n()).partition(|&i| relaxed.alloc.x_at(i) > x_bar[i])
}

/// `max{ℓ′(P) − x̄(P), x̄(Q) − u′(Q), 0}`.
pub fn gamma_min(drp: &DrPrime) -> i64 {
    closed_form_gamma_min(drp.base.x_bar().as_slice(), &drp.in_p, &drp.ell, &drp.u)
}

fn closed_form_gamma_min(x_bar: &[i64], in_p: &[bool], ell: &[i64], u: &[i64]) -> i64 {
    let (mut from_p, mut from_q) = (0, 0);
    for i in 0..x_bar.len() {
        if in_p[i] {
            from_p += ell[i] - x_bar[i];
        } else {
            from_q += x_bar[i] - u[i];
        }
    }
    from_p.max(from_q).max(0)
}

/// Builds the restricted problem and its reference point.
pub fn derive_dr_prime(inst: &Instance, relaxed: &RelaxedOptimum) -> Result<DrPrime> {
    if relaxed.satisfies_l1 {
        return Err(Error::Precondition(
            "the relaxed optimum already meets the budget; it solves the problem directly".into(),
        ));
    }
    let n = inst.n();
    let x_bar = inst.x_bar();
    let gamma = inst.gamma();
    let (p, _) = split_pq(inst, relaxed);
    let mut in_p = vec![false; n];
    for &i in &p {
        in_p[i] = true;
    }
    let ell: Vec<i64> = (0..n)
        .map(|i| if in_p[i] { inst.ell()[i].max(x_bar[i]) } else { inst.ell()[i] })
        .collect();
    let u: Vec<i64> = (0..n)
        .map(|i| if in_p[i] { inst.u()[i] } else { inst.u()[i].min(x_bar[i]) })
        .collect();
    for i in 0..n {
        if ell[i] > u[i] {
            return Err(Error::Infeasible(Infeasibility::EmptyStationRange {
                station: i,
                lo: ell[i],
                hi: u[i],
            }));
        }
    }
    let x_bar_p: i64 = p.iter().map(|&i| x_bar[i]).sum();
    let x_bar_q: i64 = inst.total() - x_bar_p;
    let g_min = closed_form_gamma_min(&x_bar, &in_p, &ell, &u);
    if g_min > gamma {
        return Err(Error::Infeasible(Infeasibility::GammaMinExceedsBudget {
            gamma_min: g_min,
            gamma,
        }));
    }
    let room_p: i64 = (0..n).filter(|&i| in_p[i]).map(|i| u[i] - x_bar[i]).sum();
    let room_q: i64 = (0..n).filter(|&i| !in_p[i]).map(|i| x_bar[i] - ell[i]).sum();
    if g_min > room_p.min(room_q) {
        return Err(Error::Infeasible(Infeasibility::GroupTotals(format!(
            "P can absorb {room_p} and Q can release {room_q} docks, but {g_min} must move"
        ))));
    }

    // Distance-minimal reference: lift P to ℓ′, clamp Q into [ℓ′, u′], then
    // top both sides up to exactly γ_min moved docks.
    let mut x: Vec<i64> = (0..n)
        .map(|i| if in_p[i] { ell[i] } else { x_bar[i].clamp(ell[i], u[i]) })
        .collect();
    let mut raise = g_min - (ell.iter().zip(&in_p).filter(|(_, &p)| p).map(|(l, _)| l).sum::<i64>() - x_bar_p);
    let mut lower = g_min - (x_bar_q - (0..n).filter(|&i| !in_p[i]).map(|i| x[i]).sum::<i64>());
    for i in 0..n {
        if in_p[i] {
            let s = raise.min(u[i] - x[i]);
            x[i] += s;
            raise -= s;
        } else {
            let s = lower.min(x[i] - ell[i]);
            x[i] -= s;
            lower -= s;
        }
    }
    debug_assert_eq!((raise, lower), (0, 0));
    let b: Vec<i64> = (0..n).map(|i| inst.b_bar()[i].min(x[i])).collect();
    let d: Vec<i64> = (0..n).map(|i| x[i] - b[i]).collect();
    let mut drp = DrPrime {
        base: inst.clone(),
        in_p,
        xi_p: x_bar_p + gamma,
        xi_q: x_bar_q - gamma,
        ell,
        u,
        reference: Allocation::new(d, b),
        gamma_min: g_min,
    };
    let costs = ScaledCosts::new(inst.cost())?;
    let mut reference = drp.reference.clone();
    drp.full_region(1).bike_optimize(&costs, &mut reference)?;
    drp.reference = reference;
    debug_assert!(drp.is_feasible(&drp.reference));
    Ok(drp)
}

pub fn scale_view(drp: &DrPrime, lambda: i64) -> Result<ScaledView<'_>> {
    if lambda < 1 {
        return Err(Error::Invalid(format!("lambda = {lambda} must be positive")));
    }
    let r = &drp.reference;
    Ok(ScaledView {
        drp,
        lambda,
        anchors: (0..r.n())
            .map(|i| (r.d[i].rem_euclid(lambda), r.b[i].rem_euclid(lambda)))
            .collect(),
    })
}

/// Tightens the dock bounds to `[x_prev(i) − 20nλ, x_prev(i) + 20nλ]`.
///
/// The reference point and `γ_min` of `drp` are kept: the reference stays the
/// congruence anchor even if it falls outside the window.
pub fn shrink_window(drp: &DrPrime, prev: &Allocation, lambda: i64) -> DrPrime {
    let radius = 20 * drp.n() as i64 * lambda;
    let mut out = drp.clone();
    for i in 0..drp.n() {
        let x = prev.x_at(i);
        out.ell[i] = drp.ell[i].max(x - radius);
        out.u[i] = drp.u[i].min(x + radius);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::CostModel;
    use crate::model::tests::e1;

    #[test]
    fn zero_cost_relaxed_stays_put() {
        let inst = Instance::new(vec![1, 2, 0], vec![1, 0, 2], vec![0; 3], vec![5; 3], 1, CostModel::zero(3)).unwrap();
        let r = solve_relaxed(&inst).unwrap();
        assert_eq!(r.distance, 0);
        assert!(r.satisfies_l1);
        let (p, q) = split_pq(&inst, &r);
        assert!(p.is_empty());
        assert_eq!(q, vec![0, 1, 2]);
    }

    #[test]
    fn relaxed_infeasibility_names_the_bound() {
        let inst = Instance::new(vec![3, 3], vec![0, 0], vec![0, 0], vec![2, 2], 1, CostModel::zero(2)).unwrap();
        assert_eq!(
            solve_relaxed(&inst).unwrap_err(),
            Error::Infeasible(Infeasibility::UpperBoundsBelowTotal { u_sum: 4, total: 6 })
        );
        let inst = Instance::new(vec![1, 0], vec![0, 0], vec![1, 1], vec![2, 2], 1, CostModel::zero(2)).unwrap();
        assert!(matches!(
            solve_relaxed(&inst),
            Err(Error::Infeasible(Infeasibility::LowerBoundsExceedTotal { .. }))
        ));
    }

    #[test]
    fn single_station_has_empty_p() {
        let cost = CostModel::new(vec![crate::costs::tests::e1_costs().station(0).clone()]).unwrap();
        let inst = Instance::new(vec![2], vec![3], vec![0], vec![9], 0, cost).unwrap();
        let r = solve_relaxed(&inst).unwrap();
        assert!(split_pq(&inst, &r).0.is_empty());
    }

    #[test]
    fn e1_restricted_problem() {
        let inst = e1().with_gamma(1).unwrap();
        let r = solve_relaxed(&inst).unwrap();
        assert!(!r.satisfies_l1);
        let drp = derive_dr_prime(&inst, &r).unwrap();
        let x_bar = inst.x_bar();
        let xp: i64 = drp.p().iter().map(|&i| x_bar[i]).sum();
        assert_eq!(drp.xi_p(), xp + 1);
        assert_eq!(drp.xi_q(), inst.total() - xp - 1);
        for i in drp.p() {
            assert_eq!(drp.ell()[i], inst.ell()[i].max(x_bar[i]));
        }
        for i in drp.q() {
            assert_eq!(drp.u()[i], inst.u()[i].min(x_bar[i]));
        }
        assert!(drp.is_feasible(drp.reference()));
        assert_eq!(gamma_min(&drp), 0);
    }

    #[test]
    fn closed_form_gamma_min_values() {
        // station 0 in P with ℓ′ = 5 and x̄ = 3
        assert_eq!(closed_form_gamma_min(&[3, 3], &[true, false], &[5, 0], &[6, 3]), 2);
        assert_eq!(closed_form_gamma_min(&[3, 3], &[true, false], &[3, 0], &[6, 3]), 0);
        assert_eq!(closed_form_gamma_min(&[3, 3], &[true, false], &[3, 0], &[6, 1]), 2);
    }

    #[test]
    fn scale_view_anchors() {
        let inst = e1().with_gamma(1).unwrap();
        let drp = derive_dr_prime(&inst, &solve_relaxed(&inst).unwrap()).unwrap();
        assert!(scale_view(&drp, 0).is_err());
        for lambda in 1..5 {
            let view = scale_view(&drp, lambda).unwrap();
            assert!(view.admits(drp.reference()));
        }
        let mut odd = drp.clone();
        odd.reference = Allocation::new(vec![3, 0], vec![0, 3]);
        let view = scale_view(&odd, 2).unwrap();
        assert_eq!(view.anchors[0], (1, 0));
        assert!(view.is_congruent(&Allocation::new(vec![5, 2], vec![2, 1])));
        assert!(!view.is_congruent(&Allocation::new(vec![4, 2], vec![2, 1])));
    }

    #[test]
    fn window_clamps_to_previous_bounds() {
        let inst = e1().with_gamma(1).unwrap();
        let drp = derive_dr_prime(&inst, &solve_relaxed(&inst).unwrap()).unwrap();
        let prev = drp.reference().clone();
        let w = shrink_window(&drp, &prev, 1);
        assert_eq!(w.ell(), drp.ell());
        assert_eq!(w.u(), drp.u());
        let mut wide = drp.clone();
        wide.u = vec![100, 100];
        let w = shrink_window(&wide, &Allocation::new(vec![3, 0], vec![0, 3]), 1);
        assert_eq!(w.u(), &[43, 43]);
    }
}
