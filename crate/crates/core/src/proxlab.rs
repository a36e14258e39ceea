//! Empirical checks of the 10λn proximity bound and its case analysis.
//!
//! Every check compares an optimum `(d, b)` of the scaled restricted problem
//! with an optimum `(d*, b*)` of the unscaled one. The anchor `(d*, b*)` is
//! always the exact optimum closest to `(d, b)` in
//! `‖d* − d‖₁ + ‖b* − b‖₁` (ties broken lexicographically). The lemmas
//! below rely on that choice; an arbitrary optimum would not do.
//!
//! With `dd = d − d*`, `db = b − b*`, `dx = x − x*`:
//!
//! | set | membership |
//! |-----|------------|
//! | I1  | `dd ≥ λ`, `db ≤ −λ` |
//! | I2  | `dd ≤ −λ`, `db ≥ λ` |
//! | I3  | `dx ≥ λ`, `dd ≥ λ` |
//! | I4  | `dx ≤ −λ`, `dd ≤ −λ` |
//! | I5  | `dx ≥ λ`, `db ≥ λ` |
//! | I6  | `dx ≤ −λ`, `db ≤ −λ` |

use std::fmt;

use crate::costs::Rational;
use crate::error::Result;
use crate::model::{l1_distance, linf_distance, objective, Allocation, Instance};
use crate::oracle::{closest, Oracle, ProblemSpec};
use crate::transform::{derive_dr_prime, solve_relaxed, DrPrime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    P,
    Q,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ISets {
    sets: [Vec<usize>; 6],
    in_p: Vec<bool>,
}

impl ISets {
    /// Builds the sets directly; `sets[t - 1]` is `I_t`.
    pub fn from_sets(sets: [Vec<usize>; 6], in_p: Vec<bool>) -> Self {
        ISets { sets, in_p }
    }

    /// `I_t` for `t ∈ 1..=6`.
    pub fn get(&self, t: usize) -> &[usize] {
        &self.sets[t - 1]
    }

    /// `I_t ∩ P` or `I_t ∩ Q`.
    pub fn side(&self, t: usize, side: Side) -> Vec<usize> {
        self.get(t)
            .iter()
            .copied()
            .filter(|&i| self.in_p[i] == (side == Side::P))
            .collect()
    }

    pub fn empty(&self, t: usize) -> bool {
        self.get(t).is_empty()
    }

    pub fn side_empty(&self, t: usize, side: Side) -> bool {
        self.side(t, side).is_empty()
    }
}

impl fmt::Display for ISets {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in 1..=6 {
            let p = self.side(t, Side::P);
            let q = self.side(t, Side::Q);
            writeln!(f, "I{t} = {:?}  (P: {p:?}, Q: {q:?})", self.get(t))?;
        }
        Ok(())
    }
}

pub fn compute_isets(drp: &DrPrime, lambda: i64, a: &Allocation, a_star: &Allocation) -> ISets {
    isets_between(drp.in_p(), lambda, a, a_star)
}

/// I-sets of two allocations under an explicit P/Q split.
pub fn isets_between(in_p: &[bool], lambda: i64, a: &Allocation, a_star: &Allocation) -> ISets {
    let mut sets: [Vec<usize>; 6] = Default::default();
    for i in 0..in_p.len() {
        let dd = a.d[i] - a_star.d[i];
        let db = a.b[i] - a_star.b[i];
        let dx = dd + db;
        let member = [
            dd >= lambda && db <= -lambda,
            dd <= -lambda && db >= lambda,
            dx >= lambda && dd >= lambda,
            dx <= -lambda && dd <= -lambda,
            dx >= lambda && db >= lambda,
            dx <= -lambda && db <= -lambda,
        ];
        for (t, m) in member.into_iter().enumerate() {
            if m {
                sets[t].push(i);
            }
        }
    }
    ISets {
        sets,
        in_p: in_p.to_vec(),
    }
}

/// `b(N) − b*(N)` and `d(N) − d*(N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Totals {
    pub b_diff: i64,
    pub d_diff: i64,
}

impl Totals {
    pub fn between(a: &Allocation, a_star: &Allocation) -> Self {
        Totals {
            b_diff: a.bikes() - a_star.bikes(),
            d_diff: a.docks_open() - a_star.docks_open(),
        }
    }
}

/// Which of the cases P1–P4, Q1–Q4 and N1–N4 hold (index 0 is case 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CaseLabel {
    pub p: [bool; 4],
    pub q: [bool; 4],
    pub n: [bool; 4],
}

fn case_list(prefix: char, flags: &[bool; 4]) -> String {
    let names: Vec<String> = (0..4).filter(|&k| flags[k]).map(|k| format!("{prefix}{}", k + 1)).collect();
    if names.is_empty() {
        "none".into()
    } else {
        names.join("|")
    }
}

impl CaseLabel {
    pub fn p_cases(&self) -> String {
        case_list('P', &self.p)
    }

    pub fn q_cases(&self) -> String {
        case_list('Q', &self.q)
    }

    pub fn n_cases(&self) -> String {
        case_list('N', &self.n)
    }

    /// Realized `(P-case, Q-case)` pairs, 1-based.
    pub fn combinations(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for p in 0..4 {
            for q in 0..4 {
                if self.p[p] && self.q[q] {
                    out.push((p + 1, q + 1));
                }
            }
        }
        out
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} / {} / {}", self.p_cases(), self.q_cases(), self.n_cases())
    }
}

fn side_cases(s: &ISets, side: Side, t: Totals, lambda: i64) -> [bool; 4] {
    let e = |k| s.side_empty(k, side);
    [
        e(4) && e(6),
        e(3) && e(5),
        !e(3) && !e(6) && s.empty(2) && e(4) && e(5) && t.b_diff > -lambda && t.d_diff < lambda,
        !e(4) && !e(5) && s.empty(1) && e(3) && e(6) && t.b_diff < lambda && t.d_diff > -lambda,
    ]
}

pub fn classify_cases(isets: &ISets, b_total_diff: i64, d_total_diff: i64, lambda: i64) -> CaseLabel {
    let t = Totals {
        b_diff: b_total_diff,
        d_diff: d_total_diff,
    };
    let e = |k| isets.empty(k);
    CaseLabel {
        p: side_cases(isets, Side::P, t, lambda),
        q: side_cases(isets, Side::Q, t, lambda),
        n: [
            e(4) && e(6),
            e(3) && e(5),
            e(2) && e(4) && e(5) && t.b_diff > -lambda && t.d_diff < lambda,
            e(1) && e(3) && e(6) && t.b_diff < lambda && t.d_diff > -lambda,
        ],
    }
}

/// Multiplier of `λn` bounding `‖x − x*‖₁` in a case combination, or `None`
/// for the two combinations that cannot occur.
pub fn table1_multiplier(p_case: usize, q_case: usize) -> Option<i64> {
    match (p_case, q_case) {
        (1 | 2, 1 | 2) => Some(4),
        (3, 3) | (4, 4) => Some(8),
        (3, 4) | (4, 3) => None,
        _ => Some(10),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseBoundVerdict {
    /// Realized `(P-case, Q-case)` pairs.
    pub combinations: Vec<(usize, usize)>,
    /// Realized pairs that should be impossible.
    pub forbidden: Vec<(usize, usize)>,
    /// Tightest bound over realized, allowed pairs.
    pub table1_bound: Option<i64>,
    /// Bound implied by the N-cases, if any holds.
    pub n_bound: Option<i64>,
    pub dist_l1: i64,
    /// At least one P-case and at least one Q-case hold.
    pub cases_cover: bool,
    pub holds: bool,
}

/// Applies the per-case bounds to the realized case combination.
pub fn verify_case_bounds(dist_l1: i64, label: &CaseLabel, lambda: i64, n: usize) -> CaseBoundVerdict {
    let unit = lambda * n as i64;
    let combinations = label.combinations();
    let forbidden: Vec<_> = combinations.iter().copied().filter(|&(p, q)| table1_multiplier(p, q).is_none()).collect();
    let table1_bound = combinations
        .iter()
        .filter_map(|&(p, q)| table1_multiplier(p, q))
        .min()
        .map(|m| m * unit);
    let n_bound = if label.n[0] || label.n[1] {
        Some(4 * unit)
    } else if label.n[2] || label.n[3] {
        Some(8 * unit)
    } else {
        None
    };
    let cases_cover = label.p.iter().any(|&c| c) && label.q.iter().any(|&c| c);
    let holds = forbidden.is_empty()
        && cases_cover
        && table1_bound.is_none_or(|b| dist_l1 < b)
        && n_bound.is_none_or(|b| dist_l1 < b);
    CaseBoundVerdict {
        combinations,
        forbidden,
        table1_bound,
        n_bound,
        dist_l1,
        cases_cover,
        holds,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaViolation {
    pub lemma: &'static str,
    pub detail: String,
}

impl fmt::Display for LemmaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.lemma, self.detail)
    }
}

/// Checks the emptiness lemmas on the I-sets; returns every violation.
pub fn verify_emptiness_lemmas(isets: &ISets, totals: Totals, lambda: i64) -> Vec<LemmaViolation> {
    let mut out = Vec::new();
    let ne = |t, s| !isets.side_empty(t, s);
    for side in [Side::P, Side::Q] {
        let mut both = |a: usize, b: usize, lemma: &'static str, why: String| {
            if ne(a, side) && ne(b, side) {
                out.push(LemmaViolation {
                    lemma,
                    detail: format!(
                        "{why}I{a}{side:?} = {:?} and I{b}{side:?} = {:?} are both nonempty",
                        isets.side(a, side),
                        isets.side(b, side)
                    ),
                });
            }
        };
        both(3, 4, "I3/I4 exclusion", String::new());
        both(5, 6, "I5/I6 exclusion", String::new());
        if !isets.empty(1) {
            both(4, 5, "I1 rule", format!("I1 = {:?} but ", isets.get(1)));
        }
        if totals.b_diff >= lambda {
            both(4, 5, "surplus-bike rule", format!("b(N) - b*(N) = {} but ", totals.b_diff));
        }
        if !isets.empty(2) {
            both(3, 6, "I2 rule", format!("I2 = {:?} but ", isets.get(2)));
        }
        if totals.b_diff <= -lambda {
            both(3, 6, "deficit-bike rule", format!("b(N) - b*(N) = {} but ", totals.b_diff));
        }
    }
    let mut four = |sets: [(usize, Side); 4], lemma: &'static str| {
        if sets.iter().all(|&(t, s)| ne(t, s)) {
            out.push(LemmaViolation {
                lemma,
                detail: sets
                    .iter()
                    .map(|&(t, s)| format!("I{t}{s:?} = {:?}", isets.side(t, s)))
                    .collect::<Vec<_>>()
                    .join(", ")
                    + " are all nonempty",
            });
        }
    };
    four([(3, Side::P), (6, Side::P), (4, Side::Q), (5, Side::Q)], "four-set rule (I3P, I6P, I4Q, I5Q)");
    four([(4, Side::P), (5, Side::P), (3, Side::Q), (6, Side::Q)], "four-set rule (I4P, I5P, I3Q, I6Q)");
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MonoClause {
    I,
    II,
    III,
    IV,
    V,
}

impl MonoClause {
    pub const ALL: [MonoClause; 5] = [MonoClause::I, MonoClause::II, MonoClause::III, MonoClause::IV, MonoClause::V];
}

impl fmt::Display for MonoClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MonoClause::I => "i",
            MonoClause::II => "ii",
            MonoClause::III => "iii",
            MonoClause::IV => "iv",
            MonoClause::V => "v",
        };
        f.write_str(s)
    }
}

/// A step of a transfer chain that failed to decrease the cost strictly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonoDecFailure {
    pub indices: Vec<usize>,
    pub lambda_prime: i64,
    pub before: Rational,
    pub after: Rational,
    /// Whether every station whose x moves was still in its x-support
    /// (`x ≠ x*` on the required side) when the step was taken.
    pub support_kept: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonoDecVerdict {
    pub clause: MonoClause,
    /// Index tuples meeting the clause's hypotheses.
    pub tuples: usize,
    /// Chain steps evaluated.
    pub steps: usize,
    pub failures: Vec<MonoDecFailure>,
}

impl MonoDecVerdict {
    /// Every step over the full stated range decreased the cost.
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }

    /// Every step taken while the moving stations kept their x-support
    /// decreased the cost.
    pub fn holds_with_support(&self) -> bool {
        self.failures.iter().all(|f| !f.support_kept)
    }
}

/// Per-station unit change of one transfer step: `(station, δd, δb)`.
type Step = Vec<(usize, i64, i64)>;

/// Checks that moving `(d, b)` toward `(d*, b*)` one unit at a time along
/// the transfers of a clause strictly decreases the cost at every step.
pub fn verify_mono_dec(
    drp: &DrPrime,
    _lambda: i64,
    a: &Allocation,
    a_star: &Allocation,
    clause: MonoClause,
) -> Result<MonoDecVerdict> {
    let inst = drp.base();
    let n = drp.n();
    let in_p = drp.in_p();
    let dd: Vec<i64> = (0..n).map(|i| a.d[i] - a_star.d[i]).collect();
    let db: Vec<i64> = (0..n).map(|i| a.b[i] - a_star.b[i]).collect();
    let dx: Vec<i64> = (0..n).map(|i| dd[i] + db[i]).collect();
    let pick = |f: &dyn Fn(usize) -> bool| (0..n).filter(|&i| f(i)).collect::<Vec<_>>();
    let d_up_x_up = pick(&|i| dd[i] > 0 && dx[i] > 0);
    let d_dn_x_dn = pick(&|i| dd[i] < 0 && dx[i] < 0);
    let b_dn_x_dn = pick(&|i| db[i] < 0 && dx[i] < 0);
    let b_up_x_up = pick(&|i| db[i] > 0 && dx[i] > 0);
    let same = |i: usize, j: usize| in_p[i] == in_p[j];
    let bike_surplus = a.bikes() - a_star.bikes();

    // (indices, chain length, unit step)
    let mut chains: Vec<(Vec<usize>, i64, Step)> = Vec::new();
    match clause {
        MonoClause::I => {
            for &i in &d_up_x_up {
                for &h in d_dn_x_dn.iter().filter(|&&h| same(i, h)) {
                    chains.push((vec![i, h], dd[i].min(-dd[h]), vec![(i, -1, 0), (h, 1, 0)]));
                }
            }
        }
        MonoClause::II => {
            for &j in &b_dn_x_dn {
                for &k in b_up_x_up.iter().filter(|&&k| same(j, k)) {
                    chains.push((vec![j, k], (-db[j]).min(db[k]), vec![(j, 0, 1), (k, 0, -1)]));
                }
            }
        }
        MonoClause::III => {
            for &i in &d_dn_x_dn {
                for &j in b_up_x_up.iter().filter(|&&j| same(i, j)) {
                    let len = (-dd[i]).min(db[j]).min(bike_surplus);
                    chains.push((vec![i, j], len, vec![(i, 1, 0), (j, 0, -1)]));
                }
            }
        }
        MonoClause::IV => {
            let s_set = pick(&|s| dd[s] > 0 && db[s] < 0);
            for &i in &d_dn_x_dn {
                for &j in b_up_x_up.iter().filter(|&&j| same(i, j)) {
                    for &s in &s_set {
                        let len = (-dd[i]).min(db[j]).min(dd[s]).min(-db[s]);
                        chains.push((vec![i, j, s], len, vec![(s, -1, 1), (i, 1, 0), (j, 0, -1)]));
                    }
                }
            }
        }
        MonoClause::V => {
            for &i in &d_up_x_up {
                for &j in b_dn_x_dn.iter().filter(|&&j| same(i, j)) {
                    for &h in d_dn_x_dn.iter().filter(|&&h| !same(i, h)) {
                        for &k in b_up_x_up.iter().filter(|&&k| same(h, k)) {
                            let len = dd[i].min(-db[j]).min(-dd[h]).min(db[k]);
                            chains.push((vec![i, j, h, k], len, vec![(i, -1, 0), (h, 1, 0), (j, 0, 1), (k, 0, -1)]));
                        }
                    }
                }
            }
        }
    }

    let mut verdict = MonoDecVerdict {
        clause,
        tuples: chains.len(),
        steps: 0,
        failures: Vec::new(),
    };
    for (indices, len, step) in chains {
        let mut cur = a.clone();
        let mut before = objective(inst, &cur)?;
        for lp in 0..len {
            // Stations whose x moves must still sit strictly on the far side of x*.
            let support_kept = step.iter().all(|&(i, sd, sb)| {
                let gap = cur.x_at(i) - a_star.x_at(i);
                sd + sb == 0 || gap * (sd + sb) < 0
            });
            for &(i, sd, sb) in &step {
                cur.d[i] += sd;
                cur.b[i] += sb;
            }
            let after = objective(inst, &cur)?;
            verdict.steps += 1;
            if after >= before {
                verdict.failures.push(MonoDecFailure {
                    indices: indices.clone(),
                    lambda_prime: lp,
                    before,
                    after,
                    support_kept,
                });
            }
            before = after;
        }
    }
    Ok(verdict)
}

/// Everything the lab checks for one pair of scaled and exact optima.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairAnalysis {
    pub lambda: i64,
    pub scaled: Allocation,
    pub anchor: Allocation,
    pub isets: ISets,
    pub totals: Totals,
    pub label: CaseLabel,
    pub case_bounds: CaseBoundVerdict,
    pub emptiness: Vec<LemmaViolation>,
    pub mono_dec: Vec<MonoDecVerdict>,
    /// `x(P) ≤ ξ_P = x*(P)` and `x(Q) ≥ ξ_Q = x*(Q)`.
    pub xi_pattern: bool,
}

impl PairAnalysis {
    pub fn holds(&self) -> bool {
        self.case_bounds.holds
            && self.emptiness.is_empty()
            && self.mono_dec.iter().all(|m| m.holds_with_support())
            && self.xi_pattern
    }

    /// Human-readable reasons for failure.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        let cb = &self.case_bounds;
        if !cb.forbidden.is_empty() {
            out.push(format!("forbidden case combinations realized: {:?}", cb.forbidden));
        }
        if !cb.cases_cover {
            out.push(format!("no P-case or no Q-case holds ({})", self.label));
        }
        if let Some(b) = cb.table1_bound.filter(|&b| cb.dist_l1 >= b) {
            out.push(format!("case bound {b} not above distance {}", cb.dist_l1));
        }
        if let Some(b) = cb.n_bound.filter(|&b| cb.dist_l1 >= b) {
            out.push(format!("N-case bound {b} not above distance {}", cb.dist_l1));
        }
        out.extend(self.emptiness.iter().map(|v| v.to_string()));
        for m in &self.mono_dec {
            for f in m.failures.iter().filter(|f| f.support_kept) {
                out.push(format!(
                    "transfer chain ({}) at {:?}, step {}: {} -> {}",
                    m.clause, f.indices, f.lambda_prime, f.before, f.after
                ));
            }
        }
        if !self.xi_pattern {
            out.push("group totals do not match the budget pattern".into());
        }
        out
    }

    /// Non-strict chain steps taken after a moving station had already
    /// reached `x*`. These fall inside the stated ranges but outside the
    /// support the exchange argument needs, so they are reported, not failed.
    pub fn findings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for m in &self.mono_dec {
            for f in m.failures.iter().filter(|f| !f.support_kept) {
                out.push(format!(
                    "transfer chain ({}) at {:?}, step {} past x-support: {} -> {}",
                    m.clause, f.indices, f.lambda_prime, f.before, f.after
                ));
            }
        }
        out
    }
}

impl fmt::Display for PairAnalysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lambda = {}", self.lambda)?;
        writeln!(f, "scaled optimum: {}", self.scaled)?;
        writeln!(f, "closest exact optimum: {}", self.anchor)?;
        write!(f, "{}", self.isets)?;
        writeln!(f, "b(N) - b*(N) = {}, d(N) - d*(N) = {}", self.totals.b_diff, self.totals.d_diff)?;
        writeln!(f, "cases: {}", self.label)?;
        let cb = &self.case_bounds;
        writeln!(f, "||x - x*||_1 = {}", cb.dist_l1)?;
        writeln!(
            f,
            "case bound: {}, N-case bound: {}",
            cb.table1_bound.map_or("none".into(), |b| b.to_string()),
            cb.n_bound.map_or("none".into(), |b| b.to_string())
        )?;
        writeln!(f, "emptiness lemmas: {}", if self.emptiness.is_empty() { "ok" } else { "VIOLATED" })?;
        for m in &self.mono_dec {
            writeln!(
                f,
                "transfer chain ({}): {} tuples, {} steps, {}",
                m.clause,
                m.tuples,
                m.steps,
                if m.holds() {
                    "strict"
                } else if m.holds_with_support() {
                    "strict while supported"
                } else {
                    "NOT STRICT"
                }
            )?;
        }
        writeln!(f, "budget pattern: {}", if self.xi_pattern { "ok" } else { "VIOLATED" })?;
        for line in self.failures() {
            writeln!(f, "  failure: {line}")?;
        }
        for line in self.findings() {
            writeln!(f, "  finding: {line}")?;
        }
        Ok(())
    }
}

/// Runs every pair check on a scaled point and its anchor.
pub fn analyse_pair(drp: &DrPrime, lambda: i64, a: &Allocation, a_star: &Allocation) -> Result<PairAnalysis> {
    let isets = compute_isets(drp, lambda, a, a_star);
    let totals = Totals::between(a, a_star);
    let label = classify_cases(&isets, totals.b_diff, totals.d_diff, lambda);
    let dist = l1_distance(&a.x(), &a_star.x())?;
    let case_bounds = verify_case_bounds(dist, &label, lambda, drp.n());
    let emptiness = verify_emptiness_lemmas(&isets, totals, lambda);
    let mono_dec = MonoClause::ALL
        .iter()
        .map(|&c| verify_mono_dec(drp, lambda, a, a_star, c))
        .collect::<Result<Vec<_>>>()?;
    let q_total = |v: &Allocation| drp.q().iter().map(|&i| v.x_at(i)).sum::<i64>();
    let xi_pattern = drp.p_total(a) <= drp.xi_p()
        && drp.p_total(a_star) == drp.xi_p()
        && q_total(a) >= drp.xi_q()
        && q_total(a_star) == drp.xi_q();
    Ok(PairAnalysis {
        lambda,
        scaled: a.clone(),
        anchor: a_star.clone(),
        isets,
        totals,
        label,
        case_bounds,
        emptiness,
        mono_dec,
        xi_pattern,
    })
}

/// Negative control: a non-optimal anchor obtained by shifting `a` by `λ` so
/// that P3 and Q4 hold together. Needs two stations on each side, a P-station
/// with `d ≥ λ` and a Q-station with `b ≥ λ`.
pub fn forbidden_pattern_anchor(drp: &DrPrime, lambda: i64, a: &Allocation) -> Option<Allocation> {
    let (p, q) = (drp.p(), drp.q());
    let p1 = *p.iter().find(|&&i| a.d[i] >= lambda)?;
    let p2 = *p.iter().find(|&&i| i != p1)?;
    let q2 = *q.iter().find(|&&i| a.b[i] >= lambda)?;
    let q1 = *q.iter().find(|&&i| i != q2)?;
    let mut anchor = a.clone();
    anchor.d[p1] -= lambda; // I3 on P
    anchor.b[p2] += lambda; // I6 on P
    anchor.d[q1] += lambda; // I4 on Q
    anchor.b[q2] -= lambda; // I5 on Q
    Some(anchor)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProximityReport {
    pub lambda: i64,
    pub n: usize,
    /// The relaxed optimum met the budget, so there is nothing to check.
    pub trivial: bool,
    /// Worst case over scaled optima of the distance to the closest exact optimum.
    pub dist_l1: i64,
    pub dist_linf: i64,
    /// `10λn`, for both norms.
    pub bound: i64,
    pub scaled_optima: usize,
    /// Pair analysis of the lexicographically first scaled optimum.
    pub first: Option<PairAnalysis>,
    pub failures: Vec<String>,
    /// Observations that do not fail the report (see [`PairAnalysis::findings`]).
    pub findings: Vec<String>,
    pub pass_l1: bool,
    pub pass_linf: bool,
    pub pass: bool,
}

fn trivial_report(n: usize, lambda: i64) -> ProximityReport {
    ProximityReport {
        lambda,
        n,
        trivial: true,
        dist_l1: 0,
        dist_linf: 0,
        bound: 10 * lambda * n as i64,
        scaled_optima: 0,
        first: None,
        failures: Vec::new(),
        findings: Vec::new(),
        pass_l1: true,
        pass_linf: true,
        pass: true,
    }
}

/// Checks the proximity theorem and the case analysis for every optimum of
/// the λ-scaled restricted problem.
pub fn verify_proximity(oracle: &Oracle, inst: &Instance, lambda: i64) -> Result<ProximityReport> {
    let relaxed = solve_relaxed(inst)?;
    if relaxed.satisfies_l1 {
        return Ok(trivial_report(inst.n(), lambda));
    }
    let drp = derive_dr_prime(inst, &relaxed)?;
    verify_proximity_on(oracle, &drp, lambda)
}

pub fn verify_proximity_on(oracle: &Oracle, drp: &DrPrime, lambda: i64) -> Result<ProximityReport> {
    let n = drp.n();
    let bound = 10 * lambda * n as i64;
    let exact = oracle.all_optima(ProblemSpec::DrPrime(drp))?;
    let scaled = oracle.all_optima(ProblemSpec::Scaled(drp, lambda))?;
    let mut report = trivial_report(n, lambda);
    report.trivial = false;
    report.scaled_optima = scaled.optima.len();
    for a in &scaled.optima {
        let x = a.x();
        let mut best_l1 = i64::MAX;
        let mut best_linf = i64::MAX;
        for s in &exact.optima {
            let xs = s.x();
            best_l1 = best_l1.min(l1_distance(&x, &xs)?);
            best_linf = best_linf.min(linf_distance(&x, &xs)?);
        }
        report.dist_l1 = report.dist_l1.max(best_l1);
        report.dist_linf = report.dist_linf.max(best_linf);
        let anchor = closest(&exact.optima, a).expect("optima are nonempty");
        let pair = analyse_pair(drp, lambda, a, anchor)?;
        report
            .failures
            .extend(pair.failures().into_iter().map(|f| format!("scaled optimum {a}: {f}")));
        report
            .findings
            .extend(pair.findings().into_iter().map(|f| format!("scaled optimum {a}: {f}")));
        if report.first.is_none() {
            report.first = Some(pair);
        }
    }
    report.pass_l1 = report.dist_l1 < bound;
    report.pass_linf = report.dist_linf < bound;
    if !report.pass_l1 {
        report.failures.push(format!("l1 distance {} is not below {bound}", report.dist_l1));
    }
    if !report.pass_linf {
        report.failures.push(format!("l-infinity distance {} is not below {bound}", report.dist_linf));
    }
    report.pass = report.failures.is_empty();
    Ok(report)
}

/// Scale-composed proximity: every optimum at scale `λν` lies within
/// `10λνn` (ℓ1) of some optimum at scale `λ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComposedReport {
    pub lambda: i64,
    pub nu: i64,
    pub dist_l1: i64,
    pub bound: i64,
    pub pass: bool,
}

pub fn verify_composed(oracle: &Oracle, drp: &DrPrime, lambda: i64, nu: i64) -> Result<ComposedReport> {
    let bound = 10 * lambda * nu * drp.n() as i64;
    let fine = oracle.all_optima(ProblemSpec::Scaled(drp, lambda))?;
    let coarse = oracle.all_optima(ProblemSpec::Scaled(drp, lambda * nu))?;
    let mut worst = 0;
    for a in &coarse.optima {
        let x = a.x();
        let mut best = i64::MAX;
        for s in &fine.optima {
            best = best.min(l1_distance(&x, &s.x())?);
        }
        worst = worst.max(best);
    }
    Ok(ComposedReport {
        lambda,
        nu,
        dist_l1: worst,
        bound,
        pass: worst < bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::e1;

    fn sets(v: [&[usize]; 6]) -> [Vec<usize>; 6] {
        v.map(|s| s.to_vec())
    }

    #[test]
    fn identical_points_give_empty_sets() {
        let inst = e1().with_gamma(1).unwrap();
        let drp = derive_dr_prime(&inst, &solve_relaxed(&inst).unwrap()).unwrap();
        let a = drp.reference().clone();
        let s = compute_isets(&drp, 2, &a, &a);
        assert!((1..=6).all(|t| s.empty(t)));
        let label = classify_cases(&s, 0, 0, 2);
        assert_eq!(label.p, [true, true, false, false]);
        assert_eq!(label.q, [true, true, false, false]);
        assert_eq!(label.n, [true, true, true, true]);
        assert!(verify_emptiness_lemmas(&s, Totals { b_diff: 0, d_diff: 0 }, 2).is_empty());
    }

    #[test]
    fn large_lambda_empties_sets() {
        let inst = e1().with_gamma(1).unwrap();
        let drp = derive_dr_prime(&inst, &solve_relaxed(&inst).unwrap()).unwrap();
        let a = Allocation::new(vec![4, 1], vec![0, 1]);
        let b = Allocation::new(vec![3, 0], vec![1, 2]);
        let s = compute_isets(&drp, 5, &a, &b);
        assert!((1..=6).all(|t| s.empty(t)));
        let s = compute_isets(&drp, 1, &a, &b);
        assert_eq!(s.get(1), &[0, 1]);
        assert_eq!(s.get(2), &[] as &[usize]);
        assert_eq!(s.get(3), &[] as &[usize]);
        assert_eq!(s.get(4), &[] as &[usize]);
        assert_eq!(s.get(6), &[] as &[usize]);
    }

    #[test]
    fn table1_values() {
        assert_eq!(table1_multiplier(1, 1), Some(4));
        assert_eq!(table1_multiplier(2, 1), Some(4));
        assert_eq!(table1_multiplier(3, 3), Some(8));
        assert_eq!(table1_multiplier(4, 4), Some(8));
        assert_eq!(table1_multiplier(1, 3), Some(10));
        assert_eq!(table1_multiplier(3, 2), Some(10));
        assert_eq!(table1_multiplier(3, 4), None);
        assert_eq!(table1_multiplier(4, 3), None);
    }

    #[test]
    fn p1_q1_uses_four_lambda_n() {
        let label = CaseLabel {
            p: [true, false, false, false],
            q: [true, false, false, false],
            n: [false; 4],
        };
        let v = verify_case_bounds(10, &label, 1, 3);
        assert_eq!(v.table1_bound, Some(12));
        assert!(v.holds);
        assert!(!verify_case_bounds(12, &label, 1, 3).holds);
        let label = CaseLabel {
            p: [false, false, true, false],
            q: [false, false, true, false],
            n: [false; 4],
        };
        assert_eq!(verify_case_bounds(0, &label, 2, 4).table1_bound, Some(64));
    }

    #[test]
    fn synthetic_forbidden_combination_is_reported() {
        // station 0 in P, stations 1 and 2 in Q
        let in_p = vec![true, false, false];
        let s = ISets::from_sets(sets([&[], &[], &[0], &[1], &[1], &[0]]), in_p);
        let label = classify_cases(&s, 0, 0, 1);
        assert!(label.p[2], "{label}");
        let q_only_p4 = ISets::from_sets(sets([&[], &[], &[0], &[2], &[1], &[0]]), vec![true, false, false]);
        let label = classify_cases(&q_only_p4, 0, 0, 1);
        assert!(label.p[2] && label.q[3], "{label}");
        let v = verify_case_bounds(0, &label, 1, 3);
        assert_eq!(v.forbidden, vec![(3, 4)]);
        assert!(!v.holds);
        assert!(!verify_emptiness_lemmas(&q_only_p4, Totals { b_diff: 0, d_diff: 0 }, 1).is_empty());
    }

    #[test]
    fn emptiness_rules_fire() {
        let s = ISets::from_sets(sets([&[], &[], &[0], &[1], &[], &[]]), vec![true, true]);
        let v = verify_emptiness_lemmas(&s, Totals { b_diff: 0, d_diff: 0 }, 1);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].lemma, "I3/I4 exclusion");
        let s = ISets::from_sets(sets([&[], &[], &[], &[0], &[1], &[]]), vec![true, true]);
        assert!(verify_emptiness_lemmas(&s, Totals { b_diff: 0, d_diff: 0 }, 1).is_empty());
        let v = verify_emptiness_lemmas(&s, Totals { b_diff: 1, d_diff: 0 }, 1);
        assert_eq!(v[0].lemma, "surplus-bike rule");
    }

    #[test]
    fn mono_dec_vacuous_without_tuples() {
        let inst = e1().with_gamma(1).unwrap();
        let drp = derive_dr_prime(&inst, &solve_relaxed(&inst).unwrap()).unwrap();
        let a = drp.reference().clone();
        for c in MonoClause::ALL {
            let v = verify_mono_dec(&drp, 1, &a, &a, c).unwrap();
            assert_eq!(v.tuples, 0);
            assert!(v.holds());
        }
    }

    #[test]
    fn perturbed_anchor_realizes_forbidden_pair() {
        let in_p = [true, true, false, false];
        let a = Allocation::new(vec![3, 1, 1, 1], vec![1, 1, 1, 3]);
        let anchor = Allocation::new(vec![1, 1, 3, 1], vec![1, 3, 1, 1]);
        let s = isets_between(&in_p, 2, &a, &anchor);
        let t = Totals::between(&a, &anchor);
        let label = classify_cases(&s, t.b_diff, t.d_diff, 2);
        assert!(label.p[2] && label.q[3], "{label}");
        assert_eq!(verify_case_bounds(8, &label, 2, 4).forbidden, vec![(3, 4)]);
    }

    #[test]
    fn e1_proximity() {
        let inst = e1().with_gamma(1).unwrap();
        let o = Oracle::default();
        let r = verify_proximity(&o, &inst, 1).unwrap();
        assert_eq!((r.dist_l1, r.dist_linf), (0, 0));
        assert!(r.pass);
        let r = verify_proximity(&o, &inst, 2).unwrap();
        assert_eq!(r.bound, 40);
        assert!(r.pass, "{:?}", r.failures);
        let r = verify_proximity(&o, &e1(), 2).unwrap();
        assert!(r.trivial);
    }

    #[test]
    fn e1_isets_match_direct_scan() {
        let inst = e1().with_gamma(1).unwrap();
        let drp = derive_dr_prime(&inst, &solve_relaxed(&inst).unwrap()).unwrap();
        let o = Oracle::default();
        let exact = o.all_optima(ProblemSpec::DrPrime(&drp)).unwrap();
        for a in &o.all_optima(ProblemSpec::Scaled(&drp, 2)).unwrap().optima {
            let anchor = closest(&exact.optima, a).unwrap();
            let s = compute_isets(&drp, 2, a, anchor);
            for i in 0..2 {
                let (dd, db) = (a.d[i] - anchor.d[i], a.b[i] - anchor.b[i]);
                let tests = [(1, dd, -db), (2, -dd, db), (3, dd + db, dd), (4, -dd - db, -dd), (5, dd + db, db), (6, -dd - db, -db)];
                for (t, u, v) in tests {
                    assert_eq!(s.get(t).contains(&i), u >= 2 && v >= 2, "I{t} station {i}");
                }
            }
            let pair = analyse_pair(&drp, 2, a, anchor).unwrap();
            assert!(pair.holds(), "{pair}");
            assert!(verify_mono_dec(&drp, 2, a, anchor, MonoClause::I).unwrap().holds());
        }
    }
}
