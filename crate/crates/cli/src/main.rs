use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use dockalloc::costs::CostFamily;
use dockalloc::format::{parse_instance, write_instance};
use dockalloc::generate::{generate, GenParams};
use dockalloc::model::{l1_distance, objective};
use dockalloc::oracle::{closest, Oracle, ProblemSpec};
use dockalloc::proxlab::analyse_pair;
use dockalloc::report::{verify_corpus, write_csv, Summary};
use dockalloc::solver::{solve_scaling, PhaseRecord};
use dockalloc::transform::{derive_dr_prime, solve_relaxed};
use dockalloc::{Error, Instance};

const EXIT_PARSE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_MISMATCH: u8 = 4;

/// Dock reallocation solver and proximity lab.
#[derive(Parser)]
#[command(name = "dockalloc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    SeparableConvex,
    Table,
}

impl From<Family> for CostFamily {
    fn from(f: Family) -> Self {
        match f {
            Family::SeparableConvex => CostFamily::SeparableConvex,
            Family::Table => CostFamily::Table,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Dr,
    Relaxed,
    DrPrime,
    Scaled,
}

#[derive(Subcommand)]
enum Command {
    /// Write seeded random instances to a directory.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        u_max: i64,
        #[arg(long)]
        gamma_max: i64,
        #[arg(long, value_enum, default_value = "separable-convex")]
        family: Family,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve an instance by proximity scaling.
    Solve {
        file: PathBuf,
        /// Compare with the brute-force optimum; exit 4 on mismatch.
        #[arg(long)]
        oracle_check: bool,
        /// Print one line per scaling phase.
        #[arg(long)]
        trace: bool,
    },
    /// Enumerate every optimum of a problem by brute force.
    Oracle {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "dr")]
        problem: Problem,
        #[arg(long, default_value_t = 1)]
        lambda: i64,
    },
    /// Check the proximity bound over a directory of instances.
    Verify {
        corpus: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [2, 4])]
        lambda: Vec<i64>,
        #[arg(long)]
        out: PathBuf,
        /// Leave `wall_ms` empty so reports are byte-reproducible.
        #[arg(long)]
        omit_timing: bool,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print the case analysis for one instance.
    Diagnose {
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        lambda: i64,
    },
    /// Time the scaling solver against brute force on random instances.
    Bench {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        u_max: i64,
        #[arg(long, default_value_t = 6)]
        gamma_max: i64,
        #[arg(long, value_enum, default_value = "separable-convex")]
        family: Family,
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
}

/// An error carrying its exit code.
#[derive(Debug)]
struct Exit(u8, String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn classify(e: Error) -> anyhow::Error {
    match e {
        Error::Infeasible(_) => Exit(EXIT_INFEASIBLE, e.to_string()).into(),
        Error::Parse(_) => Exit(EXIT_PARSE, e.to_string()).into(),
        e => e.into(),
    }
}

fn load(path: &Path) -> anyhow::Result<Instance> {
    let text = fs::read_to_string(path).map_err(|e| Exit(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| Exit(EXIT_PARSE, format!("{}: {e}", path.display())).into())
}

fn phase_line(p: &PhaseRecord) -> String {
    format!(
        "lambda={} moves={} gamma_steps={} levels={} unreachable={} floor={} objective={} solution={}",
        p.lambda, p.moves, p.gamma_steps, p.levels, p.levels_infeasible, p.gamma_floor, p.objective_after, p.solution
    )
}

fn cmd_gen(p: GenParams, out: &Path) -> anyhow::Result<()> {
    let instances = generate(&p)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for (k, inst) in instances.iter().enumerate() {
        let path = out.join(format!("inst-{}-{k:04}.json", p.seed));
        fs::write(&path, write_instance(inst)?).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("wrote {} instances to {}", instances.len(), out.display());
    Ok(())
}

fn cmd_solve(file: &Path, oracle_check: bool, trace: bool) -> anyhow::Result<()> {
    let inst = load(file)?;
    let (alloc, tr) = solve_scaling(&inst).map_err(classify)?;
    println!("objective {}", tr.final_objective);
    println!("allocation {alloc}");
    println!(
        "phases {} lambda0 {} short_circuited {}",
        tr.total_phases, tr.lambda0, tr.short_circuited
    );
    if trace {
        for p in tr.all_phases() {
            println!("  {}", phase_line(p));
        }
    }
    if oracle_check {
        let oracle = Oracle::from_env().map_err(classify)?;
        let (best, _) = oracle.brute_optimum(ProblemSpec::Dr(&inst)).map_err(classify)?;
        if best != tr.final_objective {
            return Err(Exit(EXIT_MISMATCH, format!("oracle optimum {best} differs from {}", tr.final_objective)).into());
        }
        println!("oracle agrees");
    }
    Ok(())
}

fn cmd_oracle(file: &Path, problem: Problem, lambda: i64) -> anyhow::Result<()> {
    let inst = load(file)?;
    let oracle = Oracle::from_env().map_err(classify)?;
    let set = match problem {
        Problem::Dr => oracle.all_optima(ProblemSpec::Dr(&inst)),
        Problem::Relaxed => oracle.all_optima(ProblemSpec::Relaxed(&inst)),
        Problem::DrPrime | Problem::Scaled => {
            let relaxed = solve_relaxed(&inst).map_err(classify)?;
            let drp = derive_dr_prime(&inst, &relaxed).map_err(classify)?;
            if matches!(problem, Problem::DrPrime) {
                oracle.all_optima(ProblemSpec::DrPrime(&drp))
            } else {
                oracle.all_optima(ProblemSpec::Scaled(&drp, lambda))
            }
        }
    }
    .map_err(classify)?;
    println!("{}: optimal value {}", set.problem, set.optimal_value);
    for a in &set.optima {
        println!("  {a}");
    }
    Ok(())
}

fn load_corpus(dir: &Path) -> anyhow::Result<Vec<(String, Instance)>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let id = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            Ok((id, load(p)?))
        })
        .collect()
}

fn cmd_verify(corpus: &Path, lambdas: &[i64], out: &Path, omit_timing: bool, workers: Option<usize>) -> anyhow::Result<bool> {
    if let Some(&l) = lambdas.iter().find(|&&l| l < 1) {
        bail!("lambda must be at least 1, got {l}");
    }
    let oracle = Oracle::from_env().map_err(classify)?;
    let corpus = load_corpus(corpus)?;
    let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let rows = verify_corpus(&oracle, &corpus, lambdas, !omit_timing, workers)?;
    let file = fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
    write_csv(&rows, file)?;
    for r in rows.iter().filter(|r| r.pass.is_failure()) {
        for f in &r.failures {
            eprintln!("{} lambda={}: {f}", r.instance_id, r.lambda);
        }
    }
    let summary = Summary::of(&rows);
    println!("{summary}");
    Ok(summary.failed == 0)
}

fn cmd_diagnose(file: &Path, lambda: i64) -> anyhow::Result<bool> {
    if lambda < 1 {
        bail!("lambda must be at least 1, got {lambda}");
    }
    let inst = load(file)?;
    let relaxed = solve_relaxed(&inst).map_err(classify)?;
    if relaxed.satisfies_l1 {
        println!("relaxed optimum {} meets the budget; nothing to diagnose", relaxed.alloc);
        return Ok(true);
    }
    let drp = derive_dr_prime(&inst, &relaxed).map_err(classify)?;
    println!("P = {:?}, Q = {:?}, xi_P = {}, xi_Q = {}", drp.p(), drp.q(), drp.xi_p(), drp.xi_q());
    println!("gamma = {}, gamma_min = {}, bound 10*lambda*n = {}", inst.gamma(), drp.gamma_min(), 10 * lambda * inst.n() as i64);
    let oracle = Oracle::from_env().map_err(classify)?;
    let exact = oracle.all_optima(ProblemSpec::DrPrime(&drp)).map_err(classify)?;
    let scaled = oracle.all_optima(ProblemSpec::Scaled(&drp, lambda)).map_err(classify)?;
    println!("exact optimum {} ({} optima); scaled optimum {} ({} optima)", exact.optimal_value, exact.optima.len(), scaled.optimal_value, scaled.optima.len());
    let mut ok = true;
    for a in &scaled.optima {
        let anchor = closest(&exact.optima, a).expect("optima are nonempty");
        let pair = analyse_pair(&drp, lambda, a, anchor)?;
        println!();
        print!("{pair}");
        println!("cost {} vs {}", objective(&inst, a)?, objective(&inst, anchor)?);
        println!("split distance {}, l1 {}", a.split_distance(anchor), l1_distance(&a.x(), &anchor.x())?);
        ok &= pair.holds();
    }
    Ok(ok)
}

fn cmd_bench(p: GenParams) -> anyhow::Result<()> {
    let oracle = Oracle::from_env().map_err(classify)?;
    let instances = generate(&p)?;
    let (mut t_solve, mut t_oracle, mut agree) = (0u128, 0u128, 0usize);
    println!("{:>4} {:>6} {:>10} {:>10} {:>8}", "k", "phases", "solve_us", "oracle_us", "agree");
    for (k, inst) in instances.iter().enumerate() {
        let t = Instant::now();
        let (alloc, tr) = solve_scaling(inst)?;
        let s = t.elapsed().as_micros();
        let t = Instant::now();
        let (best, _) = oracle.brute_optimum(ProblemSpec::Dr(inst))?;
        let o = t.elapsed().as_micros();
        let same = objective(inst, &alloc)? == best;
        agree += usize::from(same);
        t_solve += s;
        t_oracle += o;
        println!("{k:>4} {:>6} {s:>10} {o:>10} {same:>8}", tr.total_phases);
    }
    println!("total solve {t_solve} us, oracle {t_oracle} us, agreement {agree}/{}", instances.len());
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Gen {
            seed,
            n,
            u_max,
            gamma_max,
            family,
            count,
            out,
        } => cmd_gen(GenParams::new(seed, n, u_max, gamma_max, family.into(), count), &out).map(|_| true),
        Command::Solve {
            file,
            oracle_check,
            trace,
        } => cmd_solve(&file, oracle_check, trace).map(|_| true),
        Command::Oracle { file, problem, lambda } => cmd_oracle(&file, problem, lambda).map(|_| true),
        Command::Verify {
            corpus,
            lambda,
            out,
            omit_timing,
            workers,
        } => cmd_verify(&corpus, &lambda, &out, omit_timing, workers),
        Command::Diagnose { file, lambda } => cmd_diagnose(&file, lambda),
        Command::Bench {
            seed,
            n,
            u_max,
            gamma_max,
            family,
            count,
        } => cmd_bench(GenParams::new(seed, n, u_max, gamma_max, family.into(), count)).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.downcast_ref::<Exit>().map_or(1, |x| x.0))
        }
    }
}
