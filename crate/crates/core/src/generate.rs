//! Seeded random instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::costs::{rational, validate_multimodular, ConvexSpec, CostFamily, CostModel, Rational, StationCost};
use crate::error::{Error, Result};
use crate::model::{table_box, Instance};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenParams {
    pub seed: u64,
    pub n: usize,
    /// Largest upper bound `u(i)`.
    pub u_max: i64,
    pub gamma_max: i64,
    pub family: CostFamily,
    pub count: usize,
    /// Rejected table perturbations tolerated per instance.
    pub table_rejection_cap: usize,
    /// Keep instances whose reallocation problem has no feasible point.
    pub allow_infeasible: bool,
}

impl GenParams {
    pub fn new(seed: u64, n: usize, u_max: i64, gamma_max: i64, family: CostFamily, count: usize) -> Self {
        GenParams {
            seed,
            n,
            u_max,
            gamma_max,
            family,
            count,
            table_rejection_cap: 10_000,
            allow_infeasible: false,
        }
    }
}

/// Generates `count` instances from one seeded stream.
pub fn generate(p: &GenParams) -> Result<Vec<Instance>> {
    if p.n == 0 || p.u_max < 1 || p.gamma_max < 0 {
        return Err(Error::Invalid(format!(
            "need n >= 1, u_max >= 1 and gamma_max >= 0 (got n = {}, u_max = {}, gamma_max = {})",
            p.n, p.u_max, p.gamma_max
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut out = Vec::with_capacity(p.count);
    let mut attempts = 0usize;
    while out.len() < p.count {
        attempts += 1;
        if attempts > 1000 * (p.count + 1) {
            return Err(Error::Invalid("could not sample enough feasible instances".into()));
        }
        let inst = sample_instance(&mut rng, p)?;
        if p.allow_infeasible || dr_is_feasible(&inst) {
            out.push(inst);
        }
    }
    Ok(out)
}

/// Whether some `x` with `ℓ ≤ x ≤ u`, `x(N) = D + B` lies within `2γ` of `x̄`
/// (bikes can always be set to zero).
pub fn dr_is_feasible(inst: &Instance) -> bool {
    let total = inst.total();
    let ell_sum: i64 = inst.ell().iter().sum();
    let u_sum: i64 = inst.u().iter().sum();
    if ell_sum > total || u_sum < total {
        return false;
    }
    let x_bar = inst.x_bar();
    let raise: i64 = (0..inst.n()).map(|i| (inst.ell()[i] - x_bar[i]).max(0)).sum();
    let lower: i64 = (0..inst.n()).map(|i| (x_bar[i] - inst.u()[i]).max(0)).sum();
    raise.max(lower) <= inst.gamma()
}

fn sample_instance(rng: &mut ChaCha8Rng, p: &GenParams) -> Result<Instance> {
    let n = p.n;
    let u: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=p.u_max)).collect();
    let x_bar: Vec<i64> = u.iter().map(|&ui| rng.gen_range(0..=ui)).collect();
    let b_bar: Vec<i64> = x_bar.iter().map(|&x| rng.gen_range(0..=x)).collect();
    let d_bar: Vec<i64> = (0..n).map(|i| x_bar[i] - b_bar[i]).collect();
    let ell: Vec<i64> = (0..n)
        .map(|i| {
            if rng.gen_bool(0.8) {
                rng.gen_range(0..=x_bar[i])
            } else {
                rng.gen_range(0..=u[i])
            }
        })
        .collect();
    let gamma = rng.gen_range(0..=p.gamma_max);
    let bikes: i64 = b_bar.iter().sum();
    let stations = match p.family {
        CostFamily::SeparableConvex => (0..n).map(|_| sample_separable(rng, p.u_max)).collect(),
        CostFamily::Table => (0..n)
            .map(|i| {
                let (d_max, b_max) = table_box(u[i], bikes);
                sample_table(rng, p, d_max, b_max)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Instance::new(d_bar, b_bar, ell, u, gamma, CostModel::new(stations)?)
}

fn small_rational(rng: &mut ChaCha8Rng, lo: i128, hi: i128) -> Rational {
    let den = rng.gen_range(1..=3);
    rational(rng.gen_range(lo * den..=hi * den), den)
}

fn sample_convex(rng: &mut ChaCha8Rng, u_max: i64) -> ConvexSpec {
    match rng.gen_range(0..5) {
        0 => ConvexSpec::zero(),
        1 | 2 => {
            let a = small_rational(rng, 0, 2);
            let b = small_rational(rng, -8, 4);
            let c = small_rational(rng, 0, 4);
            ConvexSpec::quadratic(a, b, c)
        }
        _ => {
            let k = rng.gen_range(1..=3usize);
            let mut points: Vec<i64> = (0..=u_max).collect();
            points.shuffle(rng);
            let mut breakpoints: Vec<i64> = points.into_iter().take(k).collect();
            breakpoints.sort_unstable();
            let mut slopes: Vec<Rational> = (0..=k).map(|_| small_rational(rng, -6, 6)).collect();
            slopes.sort();
            ConvexSpec::PiecewiseLinear {
                breakpoints,
                slopes,
                origin: small_rational(rng, 0, 6),
            }
        }
    }
}

fn sample_separable(rng: &mut ChaCha8Rng, u_max: i64) -> StationCost {
    StationCost::SeparableConvex {
        phi: sample_convex(rng, u_max),
        psi: sample_convex(rng, u_max),
        theta: sample_convex(rng, u_max),
    }
}

/// A separable table on `[0, d_max] × [0, b_max]`, then random single-cell
/// perturbations kept only when the table stays multimodular.
fn sample_table(rng: &mut ChaCha8Rng, p: &GenParams, d_max: i64, b_max: i64) -> Result<StationCost> {
    let base = CostModel::new(vec![sample_separable(rng, p.u_max)])?;
    let mut grid = Vec::with_capacity(d_max as usize + 1);
    for d in 0..=d_max {
        let row = (0..=b_max).map(|b| base.eval(0, d, b)).collect::<Result<Vec<_>>>()?;
        grid.push(row);
    }
    let cells = ((d_max + 1) * (b_max + 1)) as usize;
    let mut rejected = 0usize;
    for _ in 0..cells {
        let d = rng.gen_range(0..=d_max) as usize;
        let b = rng.gen_range(0..=b_max) as usize;
        let delta = small_rational(rng, -2, 2);
        grid[d][b] += delta;
        let candidate = CostModel::new(vec![StationCost::Table { grid: grid.clone() }])?;
        if validate_multimodular(&candidate, 0, (d_max, b_max))?.is_some() {
            grid[d][b] -= delta;
            rejected += 1;
            if rejected > p.table_rejection_cap {
                return Err(Error::Invalid(format!(
                    "table generation hit the rejection cap of {}",
                    p.table_rejection_cap
                )));
            }
        }
    }
    Ok(StationCost::Table { grid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::write_instance;

    #[test]
    fn same_seed_same_instances() {
        for family in [CostFamily::SeparableConvex, CostFamily::Table] {
            let p = GenParams::new(7, 3, 6, 4, family, 5);
            let a: Vec<String> = generate(&p).unwrap().iter().map(|i| write_instance(i).unwrap()).collect();
            let b: Vec<String> = generate(&p).unwrap().iter().map(|i| write_instance(i).unwrap()).collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn generated_instances_are_valid_and_feasible() {
        for family in [CostFamily::SeparableConvex, CostFamily::Table] {
            let p = GenParams::new(11, 3, 6, 4, family, 30);
            for inst in generate(&p).unwrap() {
                assert!(dr_is_feasible(&inst));
                for i in 0..inst.n() {
                    let bx = table_box(inst.u()[i], inst.total_bikes());
                    assert!(validate_multimodular(inst.cost(), i, bx).unwrap().is_none());
                }
            }
        }
    }

    #[test]
    fn rejection_cap_is_reported() {
        let mut p = GenParams::new(3, 3, 6, 4, CostFamily::Table, 20);
        p.table_rejection_cap = 0;
        let err = generate(&p).unwrap_err();
        assert!(err.to_string().contains("rejection cap"));
    }

    #[test]
    fn impossible_parameters() {
        assert!(generate(&GenParams::new(1, 0, 6, 4, CostFamily::Table, 1)).is_err());
        assert!(generate(&GenParams::new(1, 2, 0, 4, CostFamily::Table, 1)).is_err());
    }
}
