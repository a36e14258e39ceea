//! The proximity-scaling pipeline.
//!
//! After the relaxed problem and the restricted problem are set up, the
//! scaled problem is solved at `λ₀ = 2^k` with `k` the smallest integer such
//! that `n·2^k ≥ D + B`, and then refined `k` times, halving `λ` each phase.
//! A phase re-splits bikes, narrows the dock bounds to a window around the
//! previous solution, finds the cheapest point closest to `x̄` and sweeps the
//! moved-dock level upward in steps of `λ`, keeping the best level.

use crate::costs::Rational;
use crate::descent::{Objective, Region, ScaledCosts};
use crate::error::{Error, Result};
use crate::model::{objective, Allocation, Instance};
use crate::transform::{derive_dr_prime, shrink_window, solve_relaxed, DrPrime};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseRecord {
    pub lambda: i64,
    /// Improving moves applied while finding the floor and polishing levels.
    pub moves: usize,
    /// Level-raising moves applied by the sweep.
    pub gamma_steps: usize,
    /// Grid levels examined by the sweep, floor included.
    pub levels: usize,
    /// Grid levels the sweep could not reach.
    pub levels_infeasible: usize,
    /// Half distance to `x̄` at the start of the sweep.
    pub gamma_floor: i64,
    pub objective_after: Rational,
    /// `(ℓ′, u′)` in force during the phase.
    pub window: (Vec<i64>, Vec<i64>),
    pub solution: Allocation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveTrace {
    /// True when the relaxed optimum already met the budget.
    pub short_circuited: bool,
    pub lambda0: i64,
    /// The coarse solve at `λ₀`, absent when short-circuited.
    pub initial: Option<PhaseRecord>,
    /// Refinement phases at `λ₀/2, …, 1`.
    pub phases: Vec<PhaseRecord>,
    pub total_phases: usize,
    pub final_objective: Rational,
}

impl SolveTrace {
    /// The coarse solve followed by every refinement phase.
    pub fn all_phases(&self) -> impl Iterator<Item = &PhaseRecord> {
        self.initial.iter().chain(&self.phases)
    }

    pub fn gamma_steps(&self) -> usize {
        self.all_phases().map(|p| p.gamma_steps).sum()
    }
}

/// Result of a γ-sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepOutcome {
    pub best: Allocation,
    pub best_level: i64,
    pub gamma_floor: i64,
    pub levels: usize,
    pub levels_infeasible: usize,
    pub gamma_steps: usize,
    pub moves: usize,
}

/// Smallest `k ≥ 0` with `n·2^k ≥ D + B`, i.e. `max(0, ⌈log₂((D+B)/n)⌉)`.
pub fn scaling_exponent(n: usize, total: i64) -> u32 {
    let n = n as i64;
    let mut k = 0;
    while n << k < total {
        k += 1;
    }
    k
}

fn check_lambda(lambda: i64) -> Result<()> {
    if lambda < 1 {
        return Err(Error::Invalid(format!("lambda = {lambda} must be positive")));
    }
    Ok(())
}

fn check_start(drp: &DrPrime, a: &Allocation, lambda: i64) -> Result<()> {
    let view = crate::transform::scale_view(drp, lambda)?;
    if !view.admits(a) {
        return Err(Error::Precondition(format!(
            "{a} is not feasible for the restricted problem at lambda = {lambda}"
        )));
    }
    Ok(())
}

/// Re-splits docks into open and bike docks at fixed `x`, in steps of `λ`,
/// until the split is cost-minimal.
pub fn bike_optimize(drp: &DrPrime, a: &Allocation, lambda: i64) -> Result<Allocation> {
    check_lambda(lambda)?;
    check_start(drp, a, lambda)?;
    let costs = ScaledCosts::new(drp.base().cost())?;
    let mut out = a.clone();
    drp.full_region(lambda).bike_optimize(&costs, &mut out)?;
    Ok(out)
}

fn floor_from(drp: &DrPrime, lambda: i64, start: &Allocation, costs: &ScaledCosts<'_>) -> Result<(Allocation, usize)> {
    let x_bar = drp.base().x_bar();
    let region = drp.full_region(lambda);
    let mut a = start.clone();
    let mut moves = region.bike_optimize(costs, &mut a)?;
    moves += region.descend(costs, Objective::DistanceThenCost(&x_bar), &mut a, &Region::free_targets())?;
    Ok((a, moves))
}

/// The cheapest point among those closest to `x̄` in the λ-view, reached
/// from the reference point.
pub fn solve_gamma_floor(drp: &DrPrime, lambda: i64) -> Result<Allocation> {
    check_lambda(lambda)?;
    check_start(drp, drp.reference(), lambda)?;
    let costs = ScaledCosts::new(drp.base().cost())?;
    Ok(floor_from(drp, lambda, drp.reference(), &costs)?.0)
}

/// Raises the moved-dock level from that of `start` to the largest grid
/// value not above `γ`, one best compound move at a time, re-optimising
/// each level, and returns the cheapest level visited.
pub fn gamma_sweep(drp: &DrPrime, lambda: i64, start: &Allocation) -> Result<SweepOutcome> {
    check_lambda(lambda)?;
    check_start(drp, start, lambda)?;
    let costs = ScaledCosts::new(drp.base().cost())?;
    sweep_with(drp, lambda, start, &costs)
}

fn sweep_with(drp: &DrPrime, lambda: i64, start: &Allocation, costs: &ScaledCosts<'_>) -> Result<SweepOutcome> {
    let region = drp.full_region(lambda);
    let gamma = drp.base().gamma();
    let mut a = start.clone();
    let mut level = drp.level(&a);
    let mut moves = region.bike_optimize(costs, &mut a)?;
    moves += region.descend(costs, Objective::Cost, &mut a, &[0])?;
    let mut out = SweepOutcome {
        best: a.clone(),
        best_level: level,
        gamma_floor: level,
        levels: 1,
        levels_infeasible: 0,
        gamma_steps: 0,
        moves: 0,
    };
    let mut best_cost = costs.total(&a)?;
    while level + lambda <= gamma {
        let Some(step) = region.best_move(costs, Objective::Cost, &a, &[1])? else {
            let remaining = ((gamma - level) / lambda) as usize;
            out.levels += remaining;
            out.levels_infeasible += remaining;
            break;
        };
        step.apply(&mut a, lambda);
        level += lambda;
        out.levels += 1;
        out.gamma_steps += 1;
        moves += region.bike_optimize(costs, &mut a)?;
        moves += region.descend(costs, Objective::Cost, &mut a, &[0])?;
        let cost = costs.total(&a)?;
        if cost < best_cost {
            best_cost = cost;
            out.best = a.clone();
            out.best_level = level;
        }
    }
    out.moves = moves;
    Ok(out)
}

fn phase(drp: &DrPrime, lambda: i64, start: &Allocation, costs: &ScaledCosts<'_>) -> Result<PhaseRecord> {
    let (floor, floor_moves) = floor_from(drp, lambda, start, costs)?;
    let sweep = sweep_with(drp, lambda, &floor, costs)?;
    Ok(PhaseRecord {
        lambda,
        moves: floor_moves + sweep.moves,
        gamma_steps: sweep.gamma_steps,
        levels: sweep.levels,
        levels_infeasible: sweep.levels_infeasible,
        gamma_floor: sweep.gamma_floor,
        objective_after: objective(drp.base(), &sweep.best)?,
        window: (drp.ell().to_vec(), drp.u().to_vec()),
        solution: sweep.best,
    })
}

/// Runs the whole pipeline and returns an optimal allocation.
pub fn solve_scaling(inst: &Instance) -> Result<(Allocation, SolveTrace)> {
    let relaxed = solve_relaxed(inst)?;
    if relaxed.satisfies_l1 {
        return Ok((
            relaxed.alloc,
            SolveTrace {
                short_circuited: true,
                lambda0: 1,
                initial: None,
                phases: Vec::new(),
                total_phases: 0,
                final_objective: relaxed.cost,
            },
        ));
    }
    let drp = derive_dr_prime(inst, &relaxed)?;
    solve_restricted(&drp)
}

/// Runs the scaling phases on an already derived restricted problem.
pub fn solve_restricted(drp: &DrPrime) -> Result<(Allocation, SolveTrace)> {
    let inst = drp.base();
    let costs = ScaledCosts::new(inst.cost())?;
    let k = scaling_exponent(inst.n(), inst.total());
    let lambda0 = 1i64 << k;
    let initial = phase(drp, lambda0, drp.reference(), &costs)?;
    let mut current = initial.solution.clone();
    let mut phases = Vec::with_capacity(k as usize);
    let mut lambda = lambda0;
    while lambda > 1 {
        lambda /= 2;
        drp.full_region(lambda).bike_optimize(&costs, &mut current)?;
        let window = shrink_window(drp, &current, lambda);
        let record = phase(&window, lambda, &current, &costs)?;
        current = record.solution.clone();
        phases.push(record);
    }
    let final_objective = objective(inst, &current)?;
    Ok((
        current,
        SolveTrace {
            short_circuited: false,
            lambda0,
            initial: Some(initial),
            total_phases: phases.len(),
            phases,
            final_objective,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::int;
    use crate::model::tests::e1;
    use crate::transform::solve_relaxed;

    #[test]
    fn exponent_matches_ceil_log2() {
        assert_eq!(scaling_exponent(2, 12), 3);
        assert_eq!(scaling_exponent(2, 4), 1);
        assert_eq!(scaling_exponent(3, 3), 0);
        assert_eq!(scaling_exponent(4, 2), 0);
        assert_eq!(scaling_exponent(3, 13), 3);
        assert_eq!(scaling_exponent(3, 12), 2);
    }

    #[test]
    fn within_budget_short_circuits() {
        let inst = e1();
        let (a, trace) = solve_scaling(&inst).unwrap();
        assert!(trace.short_circuited);
        assert_eq!(trace.total_phases, 0);
        assert_eq!(a.x(), vec![5, 1]);
        assert_eq!(trace.final_objective, int(1));
    }

    #[test]
    fn e1_tight_budget() {
        let inst = e1().with_gamma(1).unwrap();
        let (a, trace) = solve_scaling(&inst).unwrap();
        assert!(!trace.short_circuited);
        assert_eq!(trace.total_phases, 2);
        assert_eq!(trace.lambda0, 4);
        assert_eq!(a.x(), vec![4, 2]);
        // c1(3, 1) + c2(1, 1) = 1 + 2
        assert_eq!(trace.final_objective, int(3));
        let lambdas: Vec<i64> = trace.all_phases().map(|p| p.lambda).collect();
        assert_eq!(lambdas, vec![4, 2, 1]);
    }

    #[test]
    fn bike_optimize_at_fixed_x() {
        let inst = e1().with_gamma(1).unwrap();
        let drp = derive_dr_prime(&inst, &solve_relaxed(&inst).unwrap()).unwrap();
        let start = Allocation::new(vec![3, 3], vec![0, 0]);
        let out = bike_optimize(&drp, &start, 1).unwrap();
        assert_eq!(out.x(), vec![3, 3]);
        let mut best = None;
        for b0 in 0..=3 {
            for b1 in 0..=(3 - b0) {
                let v = objective(&inst, &Allocation::new(vec![3 - b0, 3 - b1], vec![b0, b1])).unwrap();
                best = Some(best.map_or(v, |w: Rational| w.min(v)));
            }
        }
        assert_eq!(objective(&inst, &out).unwrap(), best.unwrap());
        assert_eq!(bike_optimize(&drp, &out, 1).unwrap(), out);
        assert!(bike_optimize(&drp, &Allocation::new(vec![6, 0], vec![0, 0]), 1).is_err());
    }

    #[test]
    fn no_bikes_means_no_bike_docks() {
        let cost = crate::costs::tests::e1_costs();
        let inst = Instance::new(vec![3, 3], vec![0, 0], vec![0, 0], vec![6, 6], 1, cost).unwrap();
        let (a, _) = solve_scaling(&inst).unwrap();
        assert_eq!(a.b, vec![0, 0]);
    }
}
