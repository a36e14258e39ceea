//! Steepest descent over compound unit moves.
//!
//! A move changes `d(i)` and `b(i)` by `-λ`, `0` or `+λ` at up to
//! [`MAX_SUPPORT`] stations. The best move under the group-total and bike
//! constraints of a [`Region`] is found exactly by a small dynamic program
//! per side (P and Q) whose state is the side's net change of dock total and
//! bike total, plus the number of stations touched.
//!
//! All costs are scaled by a common denominator so comparisons run on `i128`.

use crate::costs::CostModel;
use crate::error::{Error, Result};
use crate::model::Allocation;

pub(crate) const MAX_SUPPORT: usize = 4;

/// Per-station `(δd, δb)` options in units of λ, dock moves first.
const OPTIONS: [(i64, i64); 9] = [
    (0, 0),
    (-1, 0),
    (1, 0),
    (0, -1),
    (0, 1),
    (-1, 1),
    (1, -1),
    (-1, -1),
    (1, 1),
];

/// Lexicographic objective value.
pub(crate) type Key = (i128, i128);

const ZERO: Key = (0, 0);

fn add(a: Key, b: Key) -> Key {
    (a.0 + b.0, a.1 + b.1)
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Objective<'a> {
    Cost,
    /// Cost first, then `‖x − x̄‖₁`.
    CostThenDistance(&'a [i64]),
    /// `‖x − x̄‖₁` first, then cost.
    DistanceThenCost(&'a [i64]),
}

/// Cost model scaled to integers.
pub(crate) struct ScaledCosts<'a> {
    model: &'a CostModel,
    scale: i128,
}

impl<'a> ScaledCosts<'a> {
    pub fn new(model: &'a CostModel) -> Result<Self> {
        let scale = model
            .common_denominator()
            .ok_or(Error::Overflow("common cost denominator"))?;
        Ok(ScaledCosts { model, scale })
    }

    pub fn eval(&self, i: usize, d: i64, b: i64) -> Result<i128> {
        let v = self.model.eval(i, d, b)? * crate::costs::Rational::from_integer(self.scale);
        debug_assert!(v.is_integer());
        Ok(v.to_integer())
    }

    pub fn key(&self, obj: Objective<'_>, i: usize, d: i64, b: i64) -> Result<Key> {
        let c = self.eval(i, d, b)?;
        Ok(match obj {
            Objective::Cost => (c, 0),
            Objective::CostThenDistance(xb) => (c, (d + b - xb[i]).abs() as i128),
            Objective::DistanceThenCost(xb) => ((d + b - xb[i]).abs() as i128, c),
        })
    }

    pub fn total(&self, a: &Allocation) -> Result<i128> {
        (0..a.n()).map(|i| self.eval(i, a.d[i], a.b[i])).sum()
    }
}

/// Feasible region of one member of the problem family, under a λ-view.
///
/// Allocations in the region satisfy `lo ≤ x ≤ hi`, `d, b ≥ 0`,
/// `b(N) ≤ bike_cap`, `p_lo ≤ x(P) ≤ p_hi` and a fixed `x(N)`. Congruence
/// classes modulo λ are preserved because every move is a multiple of λ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Region {
    pub lambda: i64,
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
    pub in_p: Vec<bool>,
    pub p_lo: i64,
    pub p_hi: i64,
    pub bike_cap: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Move {
    /// `(station, δd, δb)` in units of λ.
    pub steps: Vec<(usize, i64, i64)>,
    pub gain: Key,
    /// Change of `x(P)` in units of λ.
    pub p_delta: i64,
}

impl Move {
    pub fn apply(&self, a: &mut Allocation, lambda: i64) {
        for &(i, dd, db) in &self.steps {
            a.d[i] += dd * lambda;
            a.b[i] += db * lambda;
        }
    }
}

const S: i64 = MAX_SUPPORT as i64;
const DX_SPAN: i64 = 4 * S + 1;
const DB_SPAN: i64 = 2 * S + 1;
const STATES: usize = ((S + 1) * DX_SPAN * DB_SPAN) as usize;

fn state(k: i64, dx: i64, db: i64) -> usize {
    ((k * DX_SPAN + dx + 2 * S) * DB_SPAN + db + S) as usize
}

fn unstate(idx: usize) -> (i64, i64, i64) {
    let idx = idx as i64;
    let db = idx % DB_SPAN - S;
    let rest = idx / DB_SPAN;
    (rest / DX_SPAN, rest % DX_SPAN - 2 * S, db)
}

#[derive(Clone, Copy)]
struct Entry {
    key: Key,
    opt: u8,
    prev: u32,
}

/// Best cost for each (support, net dock change, net bike change) over the
/// stations of one side, with back-pointers per layer.
struct SideTable {
    stations: Vec<usize>,
    layers: Vec<Vec<Option<Entry>>>,
}

impl SideTable {
    fn last(&self) -> &[Option<Entry>] {
        self.layers.last().expect("layer 0 always present")
    }

    fn steps(&self, mut idx: usize) -> Vec<(usize, i64, i64)> {
        let mut out = Vec::new();
        for layer in (1..self.layers.len()).rev() {
            let e = self.layers[layer][idx].expect("back-pointer to a live state");
            if e.opt != 0 {
                let (dd, db) = OPTIONS[e.opt as usize];
                out.push((self.stations[layer - 1], dd, db));
            }
            idx = e.prev as usize;
        }
        out.reverse();
        out
    }
}

impl Region {
    pub fn n(&self) -> usize {
        self.lo.len()
    }

    pub fn p_total(&self, a: &Allocation) -> i64 {
        (0..a.n()).filter(|&i| self.in_p[i]).map(|i| a.x_at(i)).sum()
    }

    /// Whether `a` satisfies every constraint of the region except
    /// congruence (which moves cannot break).
    #[cfg(test)]
    pub fn contains(&self, a: &Allocation) -> bool {
        let n = self.n();
        if a.n() != n {
            return false;
        }
        let p = self.p_total(a);
        (0..n).all(|i| {
            let x = a.x_at(i);
            a.d[i] >= 0 && a.b[i] >= 0 && self.lo[i] <= x && x <= self.hi[i]
        }) && a.bikes() <= self.bike_cap
            && self.p_lo <= p
            && p <= self.p_hi
    }

    fn side_table(
        &self,
        costs: &ScaledCosts<'_>,
        obj: Objective<'_>,
        a: &Allocation,
        side_p: bool,
    ) -> Result<SideTable> {
        let stations: Vec<usize> = (0..self.n()).filter(|&i| self.in_p[i] == side_p).collect();
        let mut layers = Vec::with_capacity(stations.len() + 1);
        let mut first = vec![None; STATES];
        first[state(0, 0, 0)] = Some(Entry {
            key: ZERO,
            opt: 0,
            prev: 0,
        });
        layers.push(first);
        let lam = self.lambda;
        for &i in &stations {
            let base = costs.key(obj, i, a.d[i], a.b[i])?;
            let mut deltas: [Option<Key>; 9] = [None; 9];
            deltas[0] = Some(ZERO);
            for (o, &(dd, db)) in OPTIONS.iter().enumerate().skip(1) {
                let d = a.d[i] + dd * lam;
                let b = a.b[i] + db * lam;
                let x = d + b;
                if d < 0 || b < 0 || b > self.bike_cap || x < self.lo[i] || x > self.hi[i] {
                    continue;
                }
                let k = costs.key(obj, i, d, b)?;
                deltas[o] = Some((k.0 - base.0, k.1 - base.1));
            }
            let prev = layers.last().expect("nonempty");
            let mut next: Vec<Option<Entry>> = prev
                .iter()
                .enumerate()
                .map(|(idx, e)| {
                    e.map(|e| Entry {
                        key: e.key,
                        opt: 0,
                        prev: idx as u32,
                    })
                })
                .collect();
            for (idx, entry) in prev.iter().enumerate() {
                let Some(entry) = entry else { continue };
                let (k, dx, db) = unstate(idx);
                if k >= S {
                    continue;
                }
                for (o, delta) in deltas.iter().enumerate().skip(1) {
                    let Some(delta) = delta else { continue };
                    let (odd, odb) = OPTIONS[o];
                    let ndx = dx + odd + odb;
                    let ndb = db + odb;
                    if ndx.abs() > 2 * S || ndb.abs() > S {
                        continue;
                    }
                    let key = add(entry.key, *delta);
                    let slot = &mut next[state(k + 1, ndx, ndb)];
                    if slot.is_none_or(|s| key < s.key) {
                        *slot = Some(Entry {
                            key,
                            opt: o as u8,
                            prev: idx as u32,
                        });
                    }
                }
            }
            layers.push(next);
        }
        Ok(SideTable { stations, layers })
    }

    /// The best move whose change of `x(P)` (in units of λ) is one of
    /// `targets`, or `None` when no such move exists. Ties go to the target
    /// listed first, then to fewer touched stations.
    pub fn best_move(
        &self,
        costs: &ScaledCosts<'_>,
        obj: Objective<'_>,
        a: &Allocation,
        targets: &[i64],
    ) -> Result<Option<Move>> {
        let p_side = self.side_table(costs, obj, a, true)?;
        let q_side = self.side_table(costs, obj, a, false)?;
        let lam = self.lambda;
        let slack = (self.bike_cap - a.bikes()).div_euclid(lam);
        let p_now = self.p_total(a);
        let mut best: Option<(Key, usize, usize, i64)> = None;
        for &t in targets {
            if t.abs() > 2 * S {
                continue;
            }
            let p_new = p_now + t * lam;
            if p_new < self.p_lo || p_new > self.p_hi {
                continue;
            }
            for kp in 0..=S {
                for dbp in -S..=S {
                    let ip = state(kp, t, dbp);
                    let Some(ep) = p_side.last()[ip] else { continue };
                    for kq in 0..=(S - kp) {
                        if kp + kq == 0 {
                            continue;
                        }
                        for dbq in -S..=S {
                            if dbp + dbq > slack {
                                break;
                            }
                            let iq = state(kq, -t, dbq);
                            let Some(eq) = q_side.last()[iq] else { continue };
                            let key = add(ep.key, eq.key);
                            if best.is_none_or(|b| key < b.0) {
                                best = Some((key, ip, iq, t));
                            }
                        }
                    }
                }
            }
        }
        Ok(best.map(|(gain, ip, iq, t)| {
            let mut steps = p_side.steps(ip);
            steps.extend(q_side.steps(iq));
            steps.sort_unstable();
            Move {
                steps,
                gain,
                p_delta: t,
            }
        }))
    }

    /// Applies strictly improving best moves until none is left. Returns the
    /// number of moves applied.
    pub fn descend(
        &self,
        costs: &ScaledCosts<'_>,
        obj: Objective<'_>,
        a: &mut Allocation,
        targets: &[i64],
    ) -> Result<usize> {
        let mut moves = 0;
        while let Some(m) = self.best_move(costs, obj, a, targets)? {
            if m.gain >= ZERO {
                break;
            }
            m.apply(a, self.lambda);
            moves += 1;
        }
        Ok(moves)
    }

    /// Every target a single move can reach.
    pub fn free_targets() -> Vec<i64> {
        // 0 first so that level-preserving moves win ties.
        let mut t = vec![0];
        for k in 1..=S {
            t.push(-k);
            t.push(k);
        }
        t
    }

    /// Re-splits each station's docks between open and bike docks at fixed
    /// `x`, moving `λ` at a time, until the split is cost-minimal. Only
    /// strictly improving steps are taken, so a bike-optimal input is
    /// returned unchanged.
    pub fn bike_optimize(&self, costs: &ScaledCosts<'_>, a: &mut Allocation) -> Result<usize> {
        let n = self.n();
        let lam = self.lambda;
        let mut moves = 0;
        loop {
            let mut up = vec![None; n];
            let mut down = vec![None; n];
            for i in 0..n {
                let base = costs.eval(i, a.d[i], a.b[i])?;
                if a.d[i] >= lam && a.b[i] + lam <= self.bike_cap {
                    up[i] = Some(costs.eval(i, a.d[i] - lam, a.b[i] + lam)? - base);
                }
                if a.b[i] >= lam {
                    down[i] = Some(costs.eval(i, a.d[i] + lam, a.b[i] - lam)? - base);
                }
            }
            let room = a.bikes() + lam <= self.bike_cap;
            // (gain, up station, down station)
            let mut best: Option<(i128, Option<usize>, Option<usize>)> = None;
            let mut consider = |g: i128, u: Option<usize>, dn: Option<usize>| {
                if g < 0 && best.is_none_or(|b| g < b.0) {
                    best = Some((g, u, dn));
                }
            };
            for i in 0..n {
                if let (true, Some(g)) = (room, up[i]) {
                    consider(g, Some(i), None);
                }
                if let Some(g) = down[i] {
                    consider(g, None, Some(i));
                }
            }
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    if let (Some(gu), Some(gd)) = (up[i], down[j]) {
                        consider(gu + gd, Some(i), Some(j));
                    }
                }
            }
            let Some((_, u, dn)) = best else { break };
            if let Some(i) = u {
                a.d[i] -= lam;
                a.b[i] += lam;
            }
            if let Some(j) = dn {
                a.d[j] += lam;
                a.b[j] -= lam;
            }
            moves += 1;
        }
        Ok(moves)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::{int, CostModel, StationCost};

    #[test]
    fn state_round_trip() {
        for k in 0..=S {
            for dx in -2 * S..=2 * S {
                for db in -S..=S {
                    assert_eq!(unstate(state(k, dx, db)), (k, dx, db));
                }
            }
        }
    }

    fn open_region(n: usize, hi: i64, cap: i64) -> Region {
        Region {
            lambda: 1,
            lo: vec![0; n],
            hi: vec![hi; n],
            in_p: vec![true; n],
            p_lo: i64::MIN,
            p_hi: i64::MAX,
            bike_cap: cap,
        }
    }

    #[test]
    fn zero_cost_has_no_improving_move() {
        let cost = CostModel::zero(3);
        let costs = ScaledCosts::new(&cost).unwrap();
        let r = open_region(3, 5, 3);
        let mut a = Allocation::new(vec![1, 1, 1], vec![1, 1, 1]);
        assert_eq!(r.descend(&costs, Objective::Cost, &mut a, &[0]).unwrap(), 0);
        assert_eq!(r.bike_optimize(&costs, &mut a).unwrap(), 0);
    }

    #[test]
    fn moves_preserve_total_and_bike_cap() {
        // linear costs pulling docks to station 2 and bikes to station 0
        let grid = |f: &dyn Fn(i64, i64) -> i64| StationCost::Table {
            grid: (0..=6).map(|d| (0..=6).map(|b| int(f(d, b))).collect()).collect(),
        };
        let cost = CostModel::new(vec![
            grid(&|d, b| 3 * d - 2 * b),
            grid(&|d, b| 2 * d + b),
            grid(&|d, b| -d + 2 * b),
        ])
        .unwrap();
        let costs = ScaledCosts::new(&cost).unwrap();
        let r = open_region(3, 6, 4);
        let mut a = Allocation::new(vec![2, 2, 1], vec![0, 1, 1]);
        let total: i64 = a.x().iter().sum();
        r.descend(&costs, Objective::Cost, &mut a, &[0]).unwrap();
        assert!(r.contains(&a));
        assert_eq!(a.x().iter().sum::<i64>(), total);
        assert!(a.bikes() <= 4);
        assert_eq!(a.d[0], 0);
        assert_eq!(a.b[2], 0);
    }
}
