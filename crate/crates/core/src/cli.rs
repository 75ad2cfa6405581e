//! The `kacjl` command line.
//!
//! Exit codes: 0 on success or a passing check, 1 on a failing check or a
//! runtime error, 2 on a usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::bench::{scaling_experiment, ScalingOptions};
use crate::error::{Error, Result};
use crate::fjlt::{apply_batch, derive_params, rip_params, Algorithm, ConstantsConfig, TransformSpec};
use crate::points::{create_file, read_points, write_points, Format, PointSet};
use crate::verify::{self, distortion_from_images};
use crate::walk::WalkKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "kacjl", version, about = "Johnson-Lindenstrauss sketches from random rotation walks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Output {
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace an existing output file.
    #[arg(long)]
    overwrite: bool,
}

#[derive(Args, Debug)]
struct ConstantsArg {
    /// JSON file overriding the default constants.
    #[arg(long)]
    constants: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Binary,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Binary => Format::Binary,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlgArg {
    Kac,
    Ora,
    Sora,
    Identity,
}

impl From<AlgArg> for Algorithm {
    fn from(a: AlgArg) -> Algorithm {
        match a {
            AlgArg::Kac => Algorithm::Kac,
            AlgArg::Ora => Algorithm::Ora,
            AlgArg::Sora => Algorithm::Sora,
            AlgArg::Identity => Algorithm::Identity,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Uniform,
    Ora,
    Sora,
}

impl From<KindArg> for WalkKind {
    fn from(k: KindArg) -> WalkKind {
        match k {
            KindArg::Uniform => WalkKind::Uniform,
            KindArg::Ora => WalkKind::Ora,
            KindArg::Sora => WalkKind::Sora,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PointKind {
    /// Uniform on the unit sphere.
    Unit,
    /// Vertices of {±1/√d}^d.
    Cube,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derive a transform spec (JSON).
    Build {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_enum, default_value = "kac")]
        alg: AlgArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        constants: ConstantsArg,
        #[command(flatten)]
        output: Output,
    },
    /// Apply a spec to every point of a file.
    Apply {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Input and output format; inferred from the extension when absent.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long)]
        overwrite: bool,
    },
    /// Norm distortion of a spec on a point file (exit 1 if any point fails).
    Distortion {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[command(flatten)]
        output: Output,
    },
    /// Restricted isometry: measure a matrix file, or derive a spec.
    Rip {
        /// Matrix stored as a point file, one row per line/record.
        #[arg(long, conflicts_with_all = ["d", "delta"])]
        matrix: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long)]
        s: usize,
        #[arg(long, requires = "delta")]
        d: Option<usize>,
        #[arg(long, requires = "d")]
        delta: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        constants: ConstantsArg,
        #[command(flatten)]
        output: Output,
    },
    /// Run a named verification experiment.
    Verify {
        #[command(subcommand)]
        experiment: Experiment,
    },
    /// Time the transform across dimensions (CSV).
    Bench {
        /// Comma-separated ascending dimensions.
        #[arg(long, value_delimiter = ',', required = true)]
        d_list: Vec<usize>,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_enum, default_value = "kac")]
        alg: AlgArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// Add dense Gaussian rows for comparison.
        #[arg(long)]
        gaussian: bool,
        #[command(flatten)]
        constants: ConstantsArg,
        #[command(flatten)]
        output: Output,
    },
    /// Write a seeded random point set.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum, default_value = "unit")]
        kind: PointKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long)]
        overwrite: bool,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, default_value_t = 2000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Subcommand, Debug)]
enum Experiment {
    /// Coupled walks: gap decay per step.
    Contraction {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        t_max: u64,
        /// Also write the per-step series here.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Even moments of the averaging walk against their bound.
    Moments {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 2.25)]
        c_moment: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Sup-norm after the averaging walk.
    Maxcoord {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 4.0)]
        c_maxcoord: f64,
        #[arg(long)]
        steps: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Mass on a random coordinate subset.
    Subset {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 8.0)]
        c_k2: f64,
        #[arg(long, default_value_t = 2.25)]
        c_moment: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Signed-permutation invariance two-sample test.
    Symmetry {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        t: u64,
        #[arg(long, value_enum, default_value = "uniform")]
        kind: KindArg,
        #[command(flatten)]
        common: Common,
    },
    /// Total variation of the lazy transposition walk on S_d.
    Permtv {
        #[arg(long)]
        d: usize,
        /// Comma-separated step counts, ascending.
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<u64>,
        /// Constant in front of the bound shape.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Random signs on a matrix with small restricted isometry constant.
    Krahmerward {
        /// Matrix file; otherwise a seeded ±1/√m matrix of shape m × d.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        m: usize,
        #[arg(long, default_value_t = 16)]
        d: usize,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        epsilon: f64,
        /// Point file; otherwise `n_points` seeded cube vertices.
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        n_points: usize,
        /// Pass when the pass rate reaches this.
        #[arg(long, default_value_t = 0.75)]
        min_rate: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Row-subsampled walk matrices: δ_s across row counts.
    Dirksen {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        s: usize,
        /// Comma-separated ascending row targets.
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<usize>,
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

/// A run of the same experiment at several step counts.
#[derive(Serialize)]
struct PermTvSeries {
    reports: Vec<verify::PermTvReport>,
    /// Each TV is at most the previous one plus twice the larger sigma.
    decreasing: bool,
}

fn format_for(path: &Path, flag: Option<FormatArg>) -> Format {
    flag.map(Format::from).unwrap_or_else(|| Format::from_path(path))
}

fn load_constants(arg: &ConstantsArg) -> Result<ConstantsConfig> {
    match &arg.constants {
        None => Ok(ConstantsConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            let c: ConstantsConfig = serde_json::from_str(&text)?;
            c.validate()?;
            Ok(c)
        }
    }
}

fn load_spec(path: &Path) -> Result<TransformSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    TransformSpec::from_json(&text)
}

fn load_matrix(path: &Path, flag: Option<FormatArg>) -> Result<DMatrix<f64>> {
    let p = read_points(path, format_for(path, flag))?;
    Ok(DMatrix::from_row_slice(p.n(), p.d(), p.data()))
}

fn emit_text(out: &Output, text: &str) -> Result<()> {
    match &out.out {
        Some(path) => {
            let mut f = create_file(path, out.overwrite)?;
            f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn emit_json<T: Serialize>(out: &Output, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit_text(out, &text)
}

fn write_csv(path: &Path, text: &str, overwrite: bool) -> Result<()> {
    let mut f = create_file(path, overwrite)?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

fn status(pass: bool) -> i32 {
    if pass {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

fn run(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Build {
            d,
            n,
            epsilon,
            alg,
            seed,
            constants,
            output,
        } => {
            let c = load_constants(&constants)?;
            let spec = derive_params(d, n, epsilon, alg.into(), &c, seed)?;
            emit_json(&output, &spec)?;
            Ok(EXIT_OK)
        }
        Command::Apply {
            spec,
            input,
            output,
            format,
            overwrite,
        } => {
            let spec = load_spec(&spec)?;
            let points = read_points(&input, format_for(&input, format))?;
            let images = apply_batch(&spec, &points)?;
            write_points(&images, &output, format_for(&output, format), overwrite)?;
            Ok(EXIT_OK)
        }
        Command::Distortion {
            spec,
            input,
            epsilon,
            format,
            output,
        } => {
            let spec = load_spec(&spec)?;
            let points = read_points(&input, format_for(&input, format))?;
            let images = apply_batch(&spec, &points)?;
            let rows: Vec<&[f64]> = images.rows().collect();
            let report = distortion_from_images(&points, &rows, epsilon)?;
            emit_json(&output, &report)?;
            Ok(status(report.pass))
        }
        Command::Rip {
            matrix,
            format,
            s,
            d,
            delta,
            seed,
            constants,
            output,
        } => match (matrix, d, delta) {
            (Some(path), _, _) => {
                let a = load_matrix(&path, format)?;
                emit_json(&output, &verify::delta_s_exact(&a, s)?)?;
                Ok(EXIT_OK)
            }
            (None, Some(d), Some(delta)) => {
                let c = load_constants(&constants)?;
                emit_json(&output, &rip_params(d, s, delta, &c, seed)?)?;
                Ok(EXIT_OK)
            }
            _ => Err(Error::Parameter("rip needs --matrix, or --d and --delta".into())),
        },
        Command::Verify { experiment } => run_experiment(experiment),
        Command::Bench {
            d_list,
            n,
            epsilon,
            alg,
            seed,
            reps,
            gaussian,
            constants,
            output,
        } => {
            let c = load_constants(&constants)?;
            let report = scaling_experiment(
                &d_list,
                n,
                epsilon,
                alg.into(),
                &c,
                seed,
                ScalingOptions { reps, gaussian },
            )?;
            emit_text(&output, &report.to_csv())?;
            Ok(EXIT_OK)
        }
        Command::Generate {
            n,
            d,
            kind,
            seed,
            output,
            format,
            overwrite,
        } => {
            let points = match kind {
                PointKind::Unit => PointSet::random_unit(n, d, seed)?,
                PointKind::Cube => PointSet::cube_vertices(n, d, seed)?,
            };
            write_points(&points, &output, format_for(&output, format), overwrite)?;
            Ok(EXIT_OK)
        }
    }
}

fn run_experiment(e: Experiment) -> Result<i32> {
    match e {
        Experiment::Contraction { d, t_max, csv, common } => {
            let r = verify::contraction_experiment(d, t_max, common.trials, common.seed)?;
            if let Some(path) = csv {
                write_csv(&path, &r.to_csv(), common.output.overwrite)?;
            }
            emit_json(&common.output, &r)?;
            Ok(status(r.pass))
        }
        Experiment::Moments { d, p, c_moment, common } => {
            let r = verify::moment_experiment(d, p, c_moment, common.trials, common.seed)?;
            emit_json(&common.output, &r)?;
            Ok(status(r.pass))
        }
        Experiment::Maxcoord {
            d,
            c_maxcoord,
            steps,
            common,
        } => {
            let r = verify::max_coord_experiment(d, c_maxcoord, common.trials, common.seed, steps)?;
            emit_json(&common.output, &r)?;
            Ok(status(r.pass))
        }
        Experiment::Subset {
            d,
            n,
            epsilon,
            c_k2,
            c_moment,
            common,
        } => {
            let r = verify::subset_concentration_experiment(
                d,
                n,
                epsilon,
                c_k2,
                c_moment,
                common.trials,
                common.seed,
            )?;
            emit_json(&common.output, &r)?;
            Ok(status(r.pass))
        }
        Experiment::Symmetry { d, t, kind, common } => {
            let r = verify::sign_symmetry_test(d, t, kind.into(), common.trials, common.seed)?;
            emit_json(&common.output, &r)?;
            Ok(status(r.indistinguishable))
        }
        Experiment::Permtv { d, t, c, csv, common } => {
            if t.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Parameter("step counts must be strictly ascending".into()));
            }
            let reports = t
                .iter()
                .map(|&t| verify::perm_mixing_tv(d, t, common.trials as u64, common.seed, c))
                .collect::<Result<Vec<_>>>()?;
            let decreasing = reports
                .windows(2)
                .all(|w| w[1].tv <= w[0].tv + 2.0 * w[0].sigma.max(w[1].sigma));
            if let Some(path) = csv {
                let mut text = String::from("t,tv,sigma,bias_scale,bound\n");
                for r in &reports {
                    text.push_str(&format!(
                        "{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                        r.t, r.tv, r.sigma, r.bias_scale, r.bound
                    ));
                }
                write_csv(&path, &text, common.output.overwrite)?;
            }
            emit_json(&common.output, &PermTvSeries { reports, decreasing })?;
            Ok(status(decreasing))
        }
        Experiment::Krahmerward {
            matrix,
            m,
            d,
            s,
            epsilon,
            points,
            n_points,
            min_rate,
            common,
        } => {
            let a = match matrix {
                Some(p) => load_matrix(&p, None)?,
                None => verify::rademacher_matrix(m, d, common.seed),
            };
            let pts = match points {
                Some(p) => read_points(&p, Format::from_path(&p))?,
                None => PointSet::cube_vertices(n_points, a.ncols(), common.seed)?,
            };
            let r = verify::krahmer_ward_check(&a, s, &pts, epsilon, common.trials, common.seed)?;
            emit_json(&common.output, &r)?;
            Ok(status(r.pass_rate >= min_rate))
        }
        Experiment::Dirksen {
            d,
            s,
            m,
            steps,
            csv,
            common,
        } => {
            let r = verify::dirksen_subsample_check(d, s, &m, common.trials, common.seed, steps)?;
            if let Some(path) = csv {
                write_csv(&path, &r.to_csv(), common.output.overwrite)?;
            }
            emit_json(&common.output, &r)?;
            Ok(status(r.monotone))
        }
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(v) = std::env::var("KACJL_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("KACJL_THREADS={v:?} is not a positive integer"))?;
    // Fails only if a pool already exists, in which case keep it.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            EXIT_FAIL
        }
    }
}
