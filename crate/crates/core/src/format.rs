//! JSON instance files.
//!
//! ```json
//! {"n": 2, "d_bar": [2, 1], "b_bar": [1, 2], "ell": [0, 0], "u": [6, 6], "gamma": 2,
//!  "cost": {"family": "separable_convex", "stations": [
//!    {"phi": {"quadratic": {"a": [1, 1], "b": [-8, 1], "c": [16, 1]}},
//!     "psi": {"piecewise_linear": {"breakpoints": [1], "slopes": [[-1, 1], [1, 1]], "origin": [1, 1]}},
//!     "theta": {"quadratic": {"a": [0, 1], "b": [0, 1], "c": [0, 1]}}}, ...]}}
//! ```
//!
//! Tables use `{"family": "table", "stations": [{"grid": [[[num, den], ...], ...]}]}`
//! with `grid[d][b]`. Every rational is a `[numerator, denominator]` pair of
//! 64-bit integers. Station indices are 0-based.

use serde::{Deserialize, Serialize};

use crate::costs::{ConvexSpec, CostModel, Rational, StationCost};
use crate::error::{check_len, Error, Result};
use crate::model::Instance;

type Pair = (i64, i64);

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n: usize,
    d_bar: Vec<i64>,
    b_bar: Vec<i64>,
    ell: Vec<i64>,
    u: Vec<i64>,
    gamma: i64,
    cost: CostFile,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
enum CostFile {
    SeparableConvex { stations: Vec<SeparableFile> },
    Table { stations: Vec<TableFile> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeparableFile {
    phi: SpecFile,
    psi: SpecFile,
    theta: SpecFile,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum SpecFile {
    Quadratic { a: Pair, b: Pair, c: Pair },
    PiecewiseLinear { breakpoints: Vec<i64>, slopes: Vec<Pair>, origin: Pair },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    grid: Vec<Vec<Pair>>,
}

fn to_pair(r: &Rational) -> Result<Pair> {
    let num = i64::try_from(*r.numer()).map_err(|_| Error::Overflow("rational numerator"))?;
    let den = i64::try_from(*r.denom()).map_err(|_| Error::Overflow("rational denominator"))?;
    Ok((num, den))
}

fn from_pair((num, den): Pair) -> Result<Rational> {
    if den == 0 {
        return Err(Error::Parse(format!("rational [{num}, {den}] has a zero denominator")));
    }
    Ok(Rational::new(num.into(), den.into()))
}

fn spec_to_file(s: &ConvexSpec) -> Result<SpecFile> {
    Ok(match s {
        ConvexSpec::Quadratic { a, b, c } => SpecFile::Quadratic {
            a: to_pair(a)?,
            b: to_pair(b)?,
            c: to_pair(c)?,
        },
        ConvexSpec::PiecewiseLinear { breakpoints, slopes, origin } => SpecFile::PiecewiseLinear {
            breakpoints: breakpoints.clone(),
            slopes: slopes.iter().map(to_pair).collect::<Result<_>>()?,
            origin: to_pair(origin)?,
        },
    })
}

fn spec_from_file(s: SpecFile) -> Result<ConvexSpec> {
    Ok(match s {
        SpecFile::Quadratic { a, b, c } => ConvexSpec::Quadratic {
            a: from_pair(a)?,
            b: from_pair(b)?,
            c: from_pair(c)?,
        },
        SpecFile::PiecewiseLinear { breakpoints, slopes, origin } => ConvexSpec::PiecewiseLinear {
            breakpoints,
            slopes: slopes.into_iter().map(from_pair).collect::<Result<_>>()?,
            origin: from_pair(origin)?,
        },
    })
}

fn cost_to_file(cost: &CostModel) -> Result<CostFile> {
    let mut sep = Vec::new();
    let mut tab = Vec::new();
    for s in cost.stations() {
        match s {
            StationCost::SeparableConvex { phi, psi, theta } => sep.push(SeparableFile {
                phi: spec_to_file(phi)?,
                psi: spec_to_file(psi)?,
                theta: spec_to_file(theta)?,
            }),
            StationCost::Table { grid } => tab.push(TableFile {
                grid: grid
                    .iter()
                    .map(|row| row.iter().map(to_pair).collect::<Result<_>>())
                    .collect::<Result<_>>()?,
            }),
        }
    }
    Ok(if tab.is_empty() {
        CostFile::SeparableConvex { stations: sep }
    } else {
        CostFile::Table { stations: tab }
    })
}

fn cost_from_file(c: CostFile) -> Result<CostModel> {
    let stations = match c {
        CostFile::SeparableConvex { stations } => stations
            .into_iter()
            .map(|s| {
                Ok(StationCost::SeparableConvex {
                    phi: spec_from_file(s.phi)?,
                    psi: spec_from_file(s.psi)?,
                    theta: spec_from_file(s.theta)?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
        CostFile::Table { stations } => stations
            .into_iter()
            .map(|t| {
                Ok(StationCost::Table {
                    grid: t
                        .grid
                        .into_iter()
                        .map(|row| row.into_iter().map(from_pair).collect::<Result<_>>())
                        .collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    CostModel::new(stations)
}

/// Parses and validates an instance file.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    check_len("d_bar", file.d_bar.len(), file.n)?;
    let cost = cost_from_file(file.cost)?;
    Instance::new(file.d_bar, file.b_bar, file.ell, file.u, file.gamma, cost)
}

/// Serializes an instance as one line of JSON followed by a newline.
pub fn write_instance(inst: &Instance) -> Result<String> {
    let file = InstanceFile {
        n: inst.n(),
        d_bar: inst.d_bar().to_vec(),
        b_bar: inst.b_bar().to_vec(),
        ell: inst.ell().to_vec(),
        u: inst.u().to_vec(),
        gamma: inst.gamma(),
        cost: cost_to_file(inst.cost())?,
    };
    let mut s = serde_json::to_string(&file).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
