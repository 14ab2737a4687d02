//! Flag and file configuration, merged into one resolved [`Settings`].
//!
//! Precedence, highest first: command-line flags, the `CASCADE_CLT_WORKERS`
//! environment variable (standing in for `--workers` only), the `--config`
//! JSON file, built-in defaults. Every random quantity downstream derives
//! from the single resolved seed; nothing reads entropy from the
//! environment.

use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use cascade_core::dist::DegreeThresholdDistribution;
use cascade_core::theory::QuadratureConfig;
use cascade_core::Atom;
use clap::Args;
use serde::Deserialize;

use crate::CliError;

/// Environment variable consulted when `--workers` is absent.
pub const WORKERS_ENV: &str = "CASCADE_CLT_WORKERS";

/// Default trial count.
pub const DEFAULT_TRIALS: usize = 500;
/// Default population size.
pub const DEFAULT_N: usize = 10_000;
/// Default root seed.
pub const DEFAULT_SEED: u64 = 0;
/// Default occupancy snapshot count for `simulate`.
pub const DEFAULT_SNAPSHOT_POINTS: usize = 11;
/// Default grid size for the theory curve CSV.
pub const DEFAULT_CURVE_POINTS: usize = 101;
/// Default population ladder for `sweep`.
pub const DEFAULT_N_LIST: [usize; 3] = [1_000, 10_000, 100_000];

/// Flags shared by every data-producing subcommand.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON config file; command-line flags override its values.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Inline degree/threshold law: a JSON array of {"d","theta","p"}
    /// atoms. [default: the two-atom reference law]
    #[arg(long, value_name = "JSON", conflicts_with = "dist_file")]
    pub dist: Option<String>,

    /// File holding the degree/threshold atoms as JSON.
    #[arg(long, value_name = "PATH")]
    pub dist_file: Option<PathBuf>,

    /// Directory output files are written into. [default: .]
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}

/// Overrides for root finding and quadrature tolerances.
#[derive(Debug, Args)]
pub struct QuadArgs {
    /// Absolute tolerance for the variance quadrature. [default: 1e-9]
    #[arg(long, value_name = "TOL")]
    pub abs_tol: Option<f64>,

    /// Maximum bisection depth per adaptive integral. [default: 40]
    #[arg(long, value_name = "DEPTH")]
    pub max_depth: Option<u32>,

    /// Tolerance on the stopping-point root. [default: 1e-12]
    #[arg(long, value_name = "TOL")]
    pub root_tol: Option<f64>,

    /// Grid step of the downward root scan over (0, 1]. [default: 1e-4]
    #[arg(long, value_name = "STEP")]
    pub scan_step: Option<f64>,

    /// Evaluation horizon standing in for an infinite stopping time.
    /// [default: 20]
    #[arg(long, value_name = "T")]
    pub t_horizon: Option<f64>,
}

/// The `--config` file schema. Every field is optional; unknown keys are
/// rejected so typos fail loudly instead of silently using a default.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    dist: Option<Vec<Atom>>,
    dist_file: Option<PathBuf>,
    n: Option<usize>,
    trials: Option<usize>,
    seed: Option<u64>,
    eval_time: Option<f64>,
    snapshot_points: Option<usize>,
    curve_points: Option<usize>,
    curve_max_t: Option<f64>,
    n_list: Option<Vec<usize>>,
    workers: Option<usize>,
    out_dir: Option<PathBuf>,
    quadrature: Option<FileQuad>,
}

/// Quadrature overrides inside the config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileQuad {
    abs_tol: Option<f64>,
    max_depth: Option<u32>,
    root_tol: Option<f64>,
    scan_step: Option<f64>,
    t_horizon: Option<f64>,
}

/// Everything a subcommand may have said on the command line, with `None`
/// for flags the subcommand does not expose. [`resolve`] merges this with
/// the config file and the defaults.
#[derive(Debug, Default)]
pub struct FlagInput<'a> {
    /// `--config`.
    pub config: Option<&'a Path>,
    /// `--dist` (inline JSON atoms).
    pub dist_inline: Option<&'a str>,
    /// `--dist-file`.
    pub dist_file: Option<&'a Path>,
    /// `--n`.
    pub n: Option<usize>,
    /// `--trials`.
    pub trials: Option<usize>,
    /// `--seed`.
    pub seed: Option<u64>,
    /// `--eval-time`.
    pub eval_time: Option<f64>,
    /// `--snapshot-points`.
    pub snapshot_points: Option<usize>,
    /// `--curve-points`.
    pub curve_points: Option<usize>,
    /// `--curve-max-t`.
    pub curve_max_t: Option<f64>,
    /// `--n-list`.
    pub n_list: Option<&'a [usize]>,
    /// `--workers`.
    pub workers: Option<usize>,
    /// `--out-dir`.
    pub out_dir: Option<&'a Path>,
    /// Quadrature overrides.
    pub quad: Option<&'a QuadArgs>,
}

impl<'a> FlagInput<'a> {
    /// Starts from the shared flag group.
    pub fn from_common(common: &'a CommonArgs) -> Self {
        FlagInput {
            config: common.config.as_deref(),
            dist_inline: common.dist.as_deref(),
            dist_file: common.dist_file.as_deref(),
            out_dir: common.out_dir.as_deref(),
            ..FlagInput::default()
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct Settings {
    /// The degree/threshold law.
    pub dist: DegreeThresholdDistribution,
    /// Population size per realization.
    pub n: usize,
    /// Trials per batch.
    pub trials: usize,
    /// Root seed; every random stream derives from it.
    pub seed: u64,
    /// Evaluation time for the fluctuation statistic; `None` means
    /// "stopping time plus one", computed once the theory is solved.
    pub eval_time: Option<f64>,
    /// Occupancy snapshot count for `simulate` (0 disables).
    pub snapshot_points: usize,
    /// Grid size of the theory curve CSV.
    pub curve_points: usize,
    /// Upper end of the theory curve grid; `None` means "stopping time
    /// plus one" (or the horizon when the process never stops).
    pub curve_max_t: Option<f64>,
    /// Population ladder for `sweep`.
    pub n_list: Vec<usize>,
    /// Worker threads for trial batches; results do not depend on it.
    pub workers: usize,
    /// Output directory.
    pub out_dir: PathBuf,
    /// Root finding and quadrature tolerances.
    pub quad: QuadratureConfig,
}

/// Merges flags, the optional config file, and defaults into [`Settings`],
/// validating every numeric field. Errors name the offending field and,
/// for file parse errors, the line and column.
pub fn resolve(input: &FlagInput<'_>) -> Result<Settings, CliError> {
    let file = match input.config {
        Some(path) => load_file(path)?,
        None => FileConfig::default(),
    };
    if file.dist.is_some() && file.dist_file.is_some() {
        return Err(CliError::Config(
            "config file sets both `dist` and `dist_file`; keep one".into(),
        ));
    }

    let dist = resolve_dist(input, &file)?;
    let n = input.n.or(file.n).unwrap_or(DEFAULT_N);
    let trials = input.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS);
    let seed = input.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let eval_time = input.eval_time.or(file.eval_time);
    let snapshot_points = input
        .snapshot_points
        .or(file.snapshot_points)
        .unwrap_or(DEFAULT_SNAPSHOT_POINTS);
    let curve_points = input
        .curve_points
        .or(file.curve_points)
        .unwrap_or(DEFAULT_CURVE_POINTS);
    let curve_max_t = input.curve_max_t.or(file.curve_max_t);
    let n_list = input
        .n_list
        .map(<[usize]>::to_vec)
        .or(file.n_list)
        .unwrap_or_else(|| DEFAULT_N_LIST.to_vec());
    let workers = resolve_workers(input.workers, file.workers)?;
    let out_dir = input
        .out_dir
        .map(Path::to_path_buf)
        .or(file.out_dir)
        .unwrap_or_else(|| PathBuf::from("."));
    let quad = resolve_quad(input.quad, file.quadrature.as_ref())?;

    require(n >= 1, "n must be at least 1")?;
    require(trials >= 1, "trials must be at least 1")?;
    if let Some(t) = eval_time {
        require(!t.is_nan() && t >= 0.0, "eval_time must be >= 0")?;
    }
    require(curve_points >= 2, "curve_points must be at least 2")?;
    if let Some(t) = curve_max_t {
        require(
            t.is_finite() && t > 0.0,
            "curve_max_t must be finite and > 0",
        )?;
    }

    Ok(Settings {
        dist,
        n,
        trials,
        seed,
        eval_time,
        snapshot_points,
        curve_points,
        curve_max_t,
        n_list,
        workers,
        out_dir,
        quad,
    })
}

/// Resolves `--workers`: flag, then [`WORKERS_ENV`], then the config file,
/// then every available core.
pub fn resolve_workers(flag: Option<usize>, file: Option<usize>) -> Result<usize, CliError> {
    if let Some(w) = flag {
        return Ok(w);
    }
    match env::var(WORKERS_ENV) {
        Ok(raw) => raw.parse().map_err(|_| {
            CliError::Config(format!(
                "{WORKERS_ENV} must be an unsigned integer, got {raw:?}"
            ))
        }),
        Err(env::VarError::NotPresent) => Ok(file.unwrap_or_else(default_workers)),
        Err(env::VarError::NotUnicode(_)) => Err(CliError::Config(format!(
            "{WORKERS_ENV} holds non-unicode data"
        ))),
    }
}

/// All available cores, or 1 if the platform will not say.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, usize::from)
}

fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!("cannot read config file {}: {e}", path.display()))
    })?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))
}

fn resolve_dist(
    input: &FlagInput<'_>,
    file: &FileConfig,
) -> Result<DegreeThresholdDistribution, CliError> {
    if let Some(inline) = input.dist_inline {
        return DegreeThresholdDistribution::from_json_str(inline)
            .map_err(|e| CliError::Config(format!("--dist: {e}")));
    }
    if let Some(path) = input.dist_file {
        return load_dist_file(path);
    }
    if let Some(atoms) = &file.dist {
        return DegreeThresholdDistribution::new(atoms.clone())
            .map_err(|e| CliError::Config(format!("config file `dist`: {e}")));
    }
    if let Some(path) = &file.dist_file {
        return load_dist_file(path);
    }
    Ok(cascade_core::acceptance::example_distribution())
}

fn load_dist_file(path: &Path) -> Result<DegreeThresholdDistribution, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!(
            "cannot read distribution file {}: {e}",
            path.display()
        ))
    })?;
    DegreeThresholdDistribution::from_json_str(&text)
        .map_err(|e| CliError::Config(format!("distribution file {}: {e}", path.display())))
}

fn resolve_quad(
    flags: Option<&QuadArgs>,
    file: Option<&FileQuad>,
) -> Result<QuadratureConfig, CliError> {
    let mut quad = QuadratureConfig::default();
    if let Some(f) = file {
        apply_quad(
            &mut quad,
            f.abs_tol,
            f.max_depth,
            f.root_tol,
            f.scan_step,
            f.t_horizon,
        );
    }
    if let Some(f) = flags {
        apply_quad(
            &mut quad,
            f.abs_tol,
            f.max_depth,
            f.root_tol,
            f.scan_step,
            f.t_horizon,
        );
    }
    require(
        quad.abs_tol.is_finite() && quad.abs_tol > 0.0,
        "abs_tol must be finite and > 0",
    )?;
    require(quad.max_depth >= 1, "max_depth must be at least 1")?;
    require(
        quad.root_tol.is_finite() && quad.root_tol > 0.0,
        "root_tol must be finite and > 0",
    )?;
    require(
        quad.scan_step > 0.0 && quad.scan_step <= 1.0,
        "scan_step must lie in (0, 1]",
    )?;
    require(
        quad.t_horizon.is_finite() && quad.t_horizon > 0.0,
        "t_horizon must be finite and > 0",
    )?;
    Ok(quad)
}

fn apply_quad(
    quad: &mut QuadratureConfig,
    abs_tol: Option<f64>,
    max_depth: Option<u32>,
    root_tol: Option<f64>,
    scan_step: Option<f64>,
    t_horizon: Option<f64>,
) {
    if let Some(v) = abs_tol {
        quad.abs_tol = v;
    }
    if let Some(v) = max_depth {
        quad.max_depth = v;
    }
    if let Some(v) = root_tol {
        quad.root_tol = v;
    }
    if let Some(v) = scan_step {
        quad.scan_step = v;
    }
    if let Some(v) = t_horizon {
        quad.t_horizon = v;
    }
}

fn require(ok: bool, msg: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(msg.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags() -> FlagInput<'static> {
        FlagInput::default()
    }

    #[test]
    fn defaults_fill_in_when_nothing_is_given() {
        let s = resolve(&flags()).unwrap();
        assert_eq!(s.n, DEFAULT_N);
        assert_eq!(s.trials, DEFAULT_TRIALS);
        assert_eq!(s.seed, DEFAULT_SEED);
        assert_eq!(s.eval_time, None);
        assert_eq!(s.curve_points, DEFAULT_CURVE_POINTS);
        assert_eq!(s.n_list, DEFAULT_N_LIST.to_vec());
        assert_eq!(s.out_dir, PathBuf::from("."));
        assert_eq!(s.quad, QuadratureConfig::default());
        assert_eq!(s.dist.atoms().len(), 2);
    }

    #[test]
    fn flags_beat_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"n": 10, "trials": 7, "seed": 3}"#).unwrap();
        let input = FlagInput {
            config: Some(&path),
            n: Some(100),
            ..FlagInput::default()
        };
        let s = resolve(&input).unwrap();
        assert_eq!(s.n, 100, "flag wins over file");
        assert_eq!(s.trials, 7, "file wins over default");
        assert_eq!(s.seed, 3);
    }

    #[test]
    fn minimal_file_with_a_dist_fills_documented_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(
            &path,
            r#"{"dist": [{"d":3,"theta":0,"p":0.1},{"d":3,"theta":2,"p":0.9}], "n": 10000}"#,
        )
        .unwrap();
        let input = FlagInput {
            config: Some(&path),
            ..FlagInput::default()
        };
        let s = resolve(&input).unwrap();
        assert_eq!(s.n, 10_000);
        assert_eq!(s.trials, 500);
        assert_eq!(s.seed, 0);
    }

    #[test]
    fn bad_mass_sum_error_names_the_sum() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"dist": [{"d":3,"theta":0,"p":0.9}]}"#).unwrap();
        let input = FlagInput {
            config: Some(&path),
            ..FlagInput::default()
        };
        let err = resolve(&input).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("0.9"), "error should name the sum: {msg}");
    }

    #[test]
    fn unknown_keys_are_rejected_with_context() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"trails": 5}"#).unwrap();
        let input = FlagInput {
            config: Some(&path),
            ..FlagInput::default()
        };
        let err = resolve(&input).unwrap_err().to_string();
        assert!(err.contains("trails"), "should name the unknown key: {err}");
        assert!(err.contains("line"), "should carry location context: {err}");
    }

    #[test]
    fn env_var_is_a_fallback_for_workers_only() {
        // Avoid mutating the process environment: exercise the layers that
        // do not consult it, then the parse failure path directly.
        assert_eq!(resolve_workers(Some(3), Some(9)).unwrap(), 3);
        let via_file = resolve_workers(None, Some(9));
        // When the variable is set in the surrounding environment this
        // still must parse or fail loudly, never fall through silently.
        match env::var(WORKERS_ENV) {
            Ok(raw) => match raw.parse::<usize>() {
                Ok(v) => assert_eq!(via_file.unwrap(), v),
                Err(_) => assert!(via_file.is_err()),
            },
            Err(_) => assert_eq!(via_file.unwrap(), 9),
        }
    }

    #[test]
    fn quadrature_overrides_validate_ranges() {
        let bad = QuadArgs {
            abs_tol: Some(0.0),
            max_depth: None,
            root_tol: None,
            scan_step: None,
            t_horizon: None,
        };
        let input = FlagInput {
            quad: Some(&bad),
            ..FlagInput::default()
        };
        assert!(resolve(&input).is_err());
    }
}
