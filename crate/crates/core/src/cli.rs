// Copyright 2026 qhconvex contributors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Exit status: 0 on success, 2 on invalid input (with a JSON error object
//! on stdout), 3 when the computation ran but produced no certificate.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::alcove::{classify, orbit_dim, stabilizer_dim, AlcovePoint, DEFAULT_TOL};
use crate::error::Error;
use crate::polytope::{
    dominant_cell, sample_polytope, sample_real_polytope, verify_convexity, verify_real_equality, AlcoveCloud,
};
use crate::qham::{chain_residual, decompose_witness, Configuration, SurfaceGroupData, CLASS_TOL};
use crate::rng;
use crate::solver::{
    gradient_check_with, solve_fiber, solve_fiber_symmetric, transfer_from_symmetric, transfer_to_symmetric,
    Objective, SolveOptions,
};
use crate::unitary::{dist, CMatrix, identity, spectrum_to_alcove, ConjClassSpec, UnitaryMatrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NO_CERTIFICATE: i32 = 3;

/// JSON problem description shared by the data-driven subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub n: usize,
    #[serde(default)]
    pub genus: usize,
    pub classes: Vec<Vec<f64>>,
    #[serde(default)]
    pub seed: u64,
    /// Recognized keys: `residual`, `classify`, `class`.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    10_000
}

impl ProblemSpec {
    pub fn data(&self) -> Result<SurfaceGroupData, Error> {
        let tol = self.tolerance("class", CLASS_TOL);
        let classes = self
            .classes
            .iter()
            .map(|c| AlcovePoint::new(c.clone(), tol).map(ConjClassSpec::new))
            .collect::<Result<Vec<_>, _>>()?;
        SurfaceGroupData::new(self.n, self.genus, classes)
    }

    pub fn tolerance(&self, key: &str, default: f64) -> f64 {
        self.tolerances.get(key).copied().unwrap_or(default)
    }

    fn validate(&self) -> Result<(), Error> {
        if let Some((k, v)) = self.tolerances.iter().find(|(_, v)| !(**v > 0.0 && **v < 1.0)) {
            return Err(Error::InvalidOptions(format!("tolerance {k} = {v} outside (0, 1)")));
        }
        if self.samples == 0 {
            return Err(Error::InvalidOptions("samples must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "qhconvex", version, about = "Momentum polytopes of SU(n) conjugacy classes")]
pub struct Cli {
    /// Worker threads for sampling and solving (output does not depend on it).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cell signature of an alcove point.
    Classify {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Also report stabilizer and orbit dimensions.
        #[arg(long)]
        verbose: bool,
    },
    /// Full momentum cloud as CSV.
    Sample(DataArgs),
    /// Real momentum cloud (through the symmetric solver) as CSV.
    RealSample(SolveArgs),
    /// Midpoint feasibility of a sampled cloud.
    VerifyConvexity {
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long, default_value_t = 200)]
        pairs: usize,
    },
    /// Compare the Real and Full clouds and the inset target grid.
    VerifyReal {
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long, default_value_t = 21)]
        grid: usize,
        /// Size of the Real cloud (defaults to samples / 50).
        #[arg(long)]
        real_samples: Option<usize>,
    },
    /// Dominant cell of a sampled cloud.
    Cell(DataArgs),
    /// Transfer between product-one tuples and symmetric-square tuples.
    Transfer {
        #[arg(long, value_enum)]
        direction: Direction,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Symmetric chain witnessing decomposability of a configuration.
    Decompose {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search a momentum fiber.
    Solve {
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        /// Restrict to beta-fixed configurations.
        #[arg(long)]
        symmetric: bool,
        /// Include the witness matrices in the report.
        #[arg(long)]
        witness: bool,
    },
    /// Compare the analytic gradient with finite differences.
    Gradcheck {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long)]
        symmetric: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    /// `A ↦ u` with `u_j` conjugate to `A_jᵗ A_j`.
    ToUnitary,
    /// Beta-fixed `w ↦ A`.
    ToSymmetric,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Debug)]
enum Failure {
    Invalid(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = Result<i32, Failure>;

/// Parses `args` and runs the command, writing results to `stdout` unless
/// `--out` is given.
pub fn run<I, T>(args: I, stdout: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.jobs {
        Some(0) => Err(Failure::Invalid(Error::InvalidOptions("jobs must be positive".into()))),
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command, j, stdout)),
            Err(e) => Err(Failure::Io(io::Error::other(e))),
        },
        None => dispatch(&cli.command, 1, stdout),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Invalid(e)) => {
            let obj = json!({ "error": e.kind(), "message": e.to_string() });
            let _ = writeln!(stdout, "{obj}");
            EXIT_INVALID
        }
        Err(Failure::Io(e)) => {
            let obj = json!({ "error": "Io", "message": e.to_string() });
            let _ = writeln!(stdout, "{obj}");
            EXIT_INVALID
        }
    }
}

fn read_spec(path: &Path) -> Result<ProblemSpec, Failure> {
    let text = std::fs::read_to_string(path)?;
    let spec: ProblemSpec =
        serde_json::from_str(&text).map_err(|e| Error::InvalidData(format!("{}: {e}", path.display())))?;
    spec.validate()?;
    Ok(spec)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text).map_err(|e| Error::InvalidData(format!("{}: {e}", path.display())))?)
}

fn emit_json(value: &Value, out: Option<&Path>, stdout: &mut (dyn Write + Send)) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    match out {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p)?);
            writeln!(f, "{text}")?;
            f.flush()?;
        }
        None => writeln!(stdout, "{text}")?,
    }
    Ok(())
}

fn write_cloud(cloud: &AlcoveCloud, out: Option<&Path>, stdout: &mut (dyn Write + Send)) -> Result<(), Failure> {
    match out {
        Some(p) => cloud.write_csv(BufWriter::new(File::create(p)?))?,
        None => cloud.write_csv(&mut *stdout)?,
    }
    Ok(())
}

struct Loaded {
    spec: ProblemSpec,
    data: SurfaceGroupData,
    samples: usize,
    seed: u64,
}

fn load(args: &DataArgs) -> Result<Loaded, Failure> {
    let spec = read_spec(&args.spec)?;
    let data = spec.data()?;
    let samples = args.samples.unwrap_or(spec.samples);
    if samples == 0 {
        return Err(Error::InvalidOptions("samples must be positive".into()).into());
    }
    let seed = args.seed.unwrap_or(spec.seed);
    Ok(Loaded { spec, data, samples, seed })
}

fn solve_options(args: &SolveArgs, l: &Loaded, jobs: usize) -> Result<SolveOptions, Failure> {
    let mut o = SolveOptions { seed: l.seed, jobs, ..SolveOptions::default() };
    o.residual_tol = args.data.tol.unwrap_or_else(|| l.spec.tolerance("residual", o.residual_tol));
    if let Some(r) = args.restarts {
        o.restarts = r;
    }
    if let Some(m) = args.max_iters {
        o.max_iters = m;
    }
    o.validate()?;
    Ok(o)
}

fn target_point(x: &[f64], n: usize) -> Result<AlcovePoint, Failure> {
    let p = AlcovePoint::with_default_tol(x.to_vec())?;
    if p.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.n() }.into());
    }
    Ok(p)
}

fn cloud_summary(cloud: &AlcoveCloud) -> Value {
    let (lo, hi) = cloud.bounds().unwrap_or_default();
    json!({
        "kind": cloud.kind,
        "samples": cloud.meta.samples,
        "points": cloud.points.len(),
        "rejected": cloud.meta.rejected,
        "seed": cloud.meta.seed,
        "min": lo,
        "max": hi,
        "alcove_tol": DEFAULT_TOL,
    })
}

fn dispatch(cmd: &Command, jobs: usize, stdout: &mut (dyn Write + Send)) -> Outcome {
    match cmd {
        Command::Classify { x, tol, verbose } => {
            let tol = tol.unwrap_or(DEFAULT_TOL);
            let p = AlcovePoint::new(x.clone(), tol)?;
            let sig = classify(&p, tol)?;
            if *verbose {
                let v = json!({
                    "signature": sig,
                    "stabilizer_dim": stabilizer_dim(&sig, p.n()),
                    "orbit_dim": orbit_dim(&sig, p.n()),
                    "tol": tol,
                });
                writeln!(stdout, "{v}")?;
            } else {
                writeln!(stdout, "{}", serde_json::to_string(&sig).expect("serializable"))?;
            }
            Ok(EXIT_OK)
        }
        Command::Sample(args) => {
            let l = load(args)?;
            let cloud = sample_polytope(&l.data, l.samples, l.seed)?;
            write_cloud(&cloud, args.out.as_deref(), stdout)?;
            if args.out.is_some() {
                writeln!(stdout, "{}", cloud_summary(&cloud))?;
            }
            Ok(EXIT_OK)
        }
        Command::RealSample(args) => {
            let l = load(&args.data)?;
            let opts = solve_options(args, &l, 1)?;
            let cloud = sample_real_polytope(&l.data, l.samples, l.seed, &opts)?;
            write_cloud(&cloud, args.data.out.as_deref(), stdout)?;
            if args.data.out.is_some() {
                let mut s = cloud_summary(&cloud);
                s["residual_tol"] = json!(opts.residual_tol);
                writeln!(stdout, "{s}")?;
            }
            Ok(EXIT_OK)
        }
        Command::VerifyConvexity { solve, pairs } => {
            let l = load(&solve.data)?;
            let opts = solve_options(solve, &l, 1)?;
            let cloud = sample_polytope(&l.data, l.samples, l.seed)?;
            let rep = verify_convexity(&cloud, *pairs, &opts)?;
            let v = json!({ "cloud": cloud_summary(&cloud), "convexity": rep });
            emit_json(&v, solve.data.out.as_deref(), stdout)?;
            Ok(if rep.feasible == rep.pairs { EXIT_OK } else { EXIT_NO_CERTIFICATE })
        }
        Command::VerifyReal { solve, grid, real_samples } => {
            let l = load(&solve.data)?;
            let opts = solve_options(solve, &l, 1)?;
            let full = sample_polytope(&l.data, l.samples, l.seed)?;
            let real_n = real_samples.unwrap_or((l.samples / 50).max(1));
            let real = sample_real_polytope(&l.data, real_n, l.seed, &opts)?;
            let rep = verify_real_equality(&full, &real, *grid, &opts)?;
            let v = json!({
                "full": cloud_summary(&full),
                "real": cloud_summary(&real),
                "report": rep,
            });
            emit_json(&v, solve.data.out.as_deref(), stdout)?;
            Ok(if rep.grid_converged == rep.grid.len() { EXIT_OK } else { EXIT_NO_CERTIFICATE })
        }
        Command::Cell(args) => {
            let l = load(args)?;
            let tol = args.tol.unwrap_or_else(|| l.spec.tolerance("classify", 1e-6));
            let cloud = sample_polytope(&l.data, l.samples, l.seed)?;
            let dom = dominant_cell(&cloud, tol)?;
            emit_json(&json!({ "cloud": cloud_summary(&cloud), "dominant": dom }), args.out.as_deref(), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Transfer { direction, input, tol, out } => {
            let mats: Vec<UnitaryMatrix> = read_json(input)?;
            let n = mats.first().map(UnitaryMatrix::n).ok_or_else(|| Error::InvalidData("empty tuple".into()))?;
            if let Some(bad) = mats.iter().find(|m| m.n() != n) {
                return Err(Error::DimensionMismatch { expected: n, got: bad.n() }.into());
            }
            let v = match direction {
                Direction::ToUnitary => transfer_report_to_unitary(&mats)?,
                Direction::ToSymmetric => transfer_report_to_symmetric(&mats, tol.unwrap_or(1e-8))?,
            };
            emit_json(&v, out.as_deref(), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Decompose { input, tol, out } => {
            let cfg: Configuration = read_json(input)?;
            let tol = tol.unwrap_or(1e-8);
            match decompose_witness(&cfg, tol) {
                Ok(w) => {
                    let residual = chain_residual(cfg.punctures(), &w);
                    emit_json(&json!({ "w": w, "residual": residual, "tol": tol }), out.as_deref(), stdout)?;
                    Ok(EXIT_OK)
                }
                Err(e @ Error::NoWitness { .. }) => {
                    emit_json(&json!({ "error": e.kind(), "message": e.to_string(), "tol": tol }), out.as_deref(), stdout)?;
                    Ok(EXIT_NO_CERTIFICATE)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Solve { solve, x, symmetric, witness } => {
            let l = load(&solve.data)?;
            let opts = solve_options(solve, &l, jobs)?;
            let target = target_point(x, l.data.n)?;
            let mut rep = if *symmetric {
                solve_fiber_symmetric(&l.data, &target, &opts)?
            } else {
                solve_fiber(&l.data, &target, &opts)?
            };
            let converged = rep.converged();
            if !*witness {
                rep.witness = None;
            }
            let v = json!({ "target": target, "report": rep });
            emit_json(&v, solve.data.out.as_deref(), stdout)?;
            Ok(if converged { EXIT_OK } else { EXIT_NO_CERTIFICATE })
        }
        Command::Gradcheck { data, x, eps, symmetric } => {
            let l = load(data)?;
            let target = target_point(x, l.data.n)?;
            let mut r = rng::stream(l.seed, rng::Purpose::Misc, 0);
            let cfg = Configuration::random(&l.data, &mut r);
            let objective = if *symmetric { Objective::SymmetricFiber } else { Objective::Fiber };
            let value = gradient_check_with(&l.data, &target, &cfg, *eps, objective, l.seed)?;
            let v = json!({ "check": value, "eps": eps, "contract": 1e-5 });
            emit_json(&v, data.out.as_deref(), stdout)?;
            Ok(EXIT_OK)
        }
    }
}

fn product(ms: impl IntoIterator<Item = CMatrix>, n: usize) -> CMatrix {
    ms.into_iter().fold(identity(n), |acc, m| acc * m)
}

fn spectrum_gap(a: &UnitaryMatrix, b: &UnitaryMatrix) -> Result<f64, Error> {
    Ok(spectrum_to_alcove(a)?.distance(&spectrum_to_alcove(b)?))
}

fn transfer_report_to_unitary(a: &[UnitaryMatrix]) -> Result<Value, Error> {
    let n = a[0].n();
    let u = transfer_from_symmetric(a);
    let pa = product(a.iter().map(|m| m.matrix().clone()), n);
    let pu = product(u.iter().map(|m| m.matrix().clone()), n);
    let identity_residual = dist(&pu, &(pa.transpose() * &pa));
    let mut spectrum_residual: f64 = 0.0;
    for (aj, uj) in a.iter().zip(&u) {
        let sq = UnitaryMatrix::from_raw(aj.matrix().transpose() * aj.matrix());
        spectrum_residual = spectrum_residual.max(spectrum_gap(uj, &sq)?);
    }
    Ok(json!({
        "u": u,
        "identity_residual": identity_residual,
        "spectrum_residual": spectrum_residual,
        "tol": 1e-10,
    }))
}

fn transfer_report_to_symmetric(w: &[UnitaryMatrix], tol: f64) -> Result<Value, Error> {
    let n = w[0].n();
    let a = transfer_to_symmetric(w, tol)?;
    let pa = product(a.iter().map(|m| m.matrix().clone()), n);
    let product_residual = dist(&pa, &identity(n));
    let mut spectrum_residual: f64 = 0.0;
    for (aj, wj) in a.iter().zip(w) {
        let sq = UnitaryMatrix::from_raw(aj.matrix().transpose() * aj.matrix());
        spectrum_residual = spectrum_residual.max(spectrum_gap(wj, &sq)?);
    }
    Ok(json!({
        "a": a,
        "product_residual": product_residual,
        "spectrum_residual": spectrum_residual,
        "tol": tol,
    }))
}
