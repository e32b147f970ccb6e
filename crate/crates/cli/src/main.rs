mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use plap::error::Error;
use plap::model::{ModelFamily, Params};
use plap::pruefer::{default_horizon, e_function, integrate_pruefer, reconstruct_profile, DEFAULT_TOL};
use plap::spectrum::{lambda_D, lambda_of_diameter_table, max_map_with};
use plap::verify::{self, Mutation, Suite};

use config::{read_config, RunConfig, Span};
use output::{Format, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Core(e) if e.is_domain() => 2,
            CliError::Core(_) => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "plap", version, about = "Sharp Neumann eigenvalue bounds for the p-Laplacian on one-dimensional comparison models")]
struct Cli {
    /// key=value file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// First nonzero Neumann eigenvalue of the model on [-D/2, D/2].
    Lambda(RunConfig),
    /// lambda_D over a diameter range, or m(i, a) over a range of starts.
    Sweep(RunConfig),
    /// Run the property suites and print a pass/fail table.
    Verify {
        #[command(flatten)]
        run: RunConfig,
        /// Restrict to these suites (comma separated or repeated).
        #[arg(long, value_delimiter = ',')]
        suite: Vec<String>,
        #[arg(long, hide = true, value_enum)]
        inject: Option<Injection>,
    },
    /// Dump one solution profile with its envelope function.
    Profile(RunConfig),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Injection {
    FlipT3,
}

fn params_of(rc: &RunConfig) -> Result<Params, CliError> {
    let p = RunConfig::require(rc.p, "p")?;
    let n = RunConfig::require(rc.n, "n")?;
    let kappa = RunConfig::require(rc.kappa, "kappa")?;
    Ok(Params::new(p, n, kappa)?)
}

fn single(flag: &str, value: &Option<String>) -> Result<Option<f64>, CliError> {
    match value {
        None => Ok(None),
        Some(s) => match Span::parse(flag, s)? {
            Span::Point(v) => Ok(Some(v)),
            Span::Range(_) => Err(CliError::Usage(format!("--{flag} takes a single value here; use sweep for ranges"))),
        },
    }
}

fn family_of(rc: &RunConfig, params: &Params) -> Result<ModelFamily, CliError> {
    match rc.family {
        Some(i) => Ok(ModelFamily::from_index(i)?),
        None => Ok(ModelFamily::neumann_model(params.kappa())),
    }
}

fn tol_of(rc: &RunConfig) -> Result<f64, CliError> {
    let tol = rc.tol.unwrap_or(DEFAULT_TOL);
    if tol > 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(CliError::Usage(format!("--tol must be positive, got {tol}")))
    }
}

fn base_meta(table: &mut Table, command: &str, params: &Params) {
    table.meta.push(("command", command.into()));
    table.meta.push(("p", params.p().into()));
    table.meta.push(("n", params.n().into()));
    table.meta.push(("kappa", params.kappa().into()));
}

fn cmd_lambda(rc: &RunConfig) -> Result<Table, CliError> {
    let params = params_of(rc)?;
    let d = RunConfig::require(single("D", &rc.d)?, "D")?;
    let params = params.with_diameter(d)?;
    if let Some(i) = rc.family {
        let wanted = ModelFamily::neumann_model(params.kappa());
        if ModelFamily::from_index(i)? != wanted {
            return Err(Error::Domain(format!("lambda_D is defined by family {wanted} for this curvature sign")).into());
        }
    }
    let tol = tol_of(rc)?;
    let r = lambda_D(&params, tol)?;
    let mut table = Table::new(vec!["d", "lambda_d", "alpha", "residual", "iterations", "family", "p", "n", "kappa"]);
    base_meta(&mut table, "lambda", &params);
    table.meta.push(("tol", tol.into()));
    table.rows.push(vec![
        r.diameter.into(),
        r.lambda.into(),
        r.alpha.into(),
        r.residual.into(),
        r.iterations.into(),
        r.family.index().into(),
        params.p().into(),
        params.n().into(),
        params.kappa().into(),
    ]);
    Ok(table)
}

/// Sweep table and warnings about broken monotonicity.
fn cmd_sweep(rc: &RunConfig) -> Result<(Table, Vec<String>), CliError> {
    let params = params_of(rc)?;
    let tol = tol_of(rc)?;
    match (&rc.d, &rc.a) {
        (Some(_), Some(_)) => Err(CliError::Usage("sweep takes either --D or --a, not both".into())),
        (None, None) => Err(CliError::Usage("sweep needs a --D or --a range".into())),
        (Some(d), None) => {
            let grid = Span::parse("D", d)?.values();
            let result = lambda_of_diameter_table(&params, &grid, tol)?;
            let mut table = Table::new(vec!["d", "lambda_d", "alpha", "residual", "iterations", "family", "p", "n", "kappa"]);
            base_meta(&mut table, "sweep", &params);
            table.meta.push(("tol", tol.into()));
            for r in &result.rows {
                table.rows.push(vec![
                    r.diameter.into(),
                    r.lambda.into(),
                    r.alpha.into(),
                    r.residual.into(),
                    r.iterations.into(),
                    r.family.index().into(),
                    params.p().into(),
                    params.n().into(),
                    params.kappa().into(),
                ]);
            }
            let warnings = result
                .violations
                .iter()
                .map(|&i| format!("lambda_d does not decrease between d = {} and d = {}", grid[i - 1], grid[i]))
                .collect();
            Ok((table, warnings))
        }
        (None, Some(a)) => {
            let starts = Span::parse("a", a)?.values();
            let family = family_of(rc, &params)?;
            let lambda = lambda_of(rc, &params)?;
            let map = max_map_with(family, &params, lambda, &starts, tol)?;
            let mut table = Table::new(vec!["a", "m", "delta", "converged", "family", "lambda", "p", "n", "kappa"]);
            base_meta(&mut table, "sweep", &params);
            table.meta.push(("family", family.index().into()));
            table.meta.push(("lambda", lambda.into()));
            table.meta.push(("m2", map.m2.into()));
            for e in &map.entries {
                table.rows.push(vec![
                    e.a.into(),
                    e.m.into(),
                    e.delta.into(),
                    e.converged.into(),
                    family.index().into(),
                    lambda.into(),
                    params.p().into(),
                    params.n().into(),
                    params.kappa().into(),
                ]);
            }
            let mut warnings: Vec<String> = map
                .unconverged()
                .map(|e| format!("no critical point before the horizon for a = {}", e.a))
                .collect();
            if family == ModelFamily::Exp {
                let ms: Vec<f64> = map.entries.iter().filter(|e| e.converged).map(|e| e.m).collect();
                let spread = ms.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ms.iter().cloned().fold(f64::INFINITY, f64::min);
                if spread > 1e-8 {
                    warnings.push(format!("m is not constant across a for family 2 (spread {spread:.3e})"));
                }
            }
            Ok((table, warnings))
        }
    }
}

fn lambda_of(rc: &RunConfig, params: &Params) -> Result<f64, CliError> {
    match (rc.lambda, rc.alpha) {
        (Some(_), Some(_)) => Err(CliError::Usage("give either --lambda or --alpha, not both".into())),
        (Some(l), None) => Ok(l),
        (None, Some(a)) if a > 0.0 => Ok(params.lambda_of_alpha(a)),
        (None, Some(a)) => Err(Error::Domain(format!("alpha must be positive, got {a}")).into()),
        (None, None) => Err(CliError::Usage("missing --lambda (or --alpha)".into())),
    }
}

fn cmd_profile(rc: &RunConfig) -> Result<Table, CliError> {
    let mut params = params_of(rc)?;
    let d = single("D", &rc.d)?;
    if let Some(d) = d {
        params = params.with_diameter(d)?;
    }
    let tol = tol_of(rc)?;
    let lambda = if rc.at_lambda_d {
        if rc.lambda.is_some() || rc.alpha.is_some() {
            return Err(CliError::Usage("--at-lambda-D excludes --lambda and --alpha".into()));
        }
        if d.is_none() {
            return Err(CliError::Usage("--at-lambda-D needs --D".into()));
        }
        lambda_D(&params, tol)?.lambda
    } else {
        lambda_of(rc, &params)?
    };
    let family = family_of(rc, &params)?;
    let a = match (single("a", &rc.a)?, d) {
        (Some(a), _) => a,
        (None, Some(d)) => -0.5 * d,
        (None, None) => return Err(CliError::Usage("missing --a (or --D to start at -D/2)".into())),
    };
    let horizon = rc.horizon.unwrap_or_else(|| default_horizon(&params, a, lambda));
    let traj = integrate_pruefer(family, &params, a, lambda, horizon, tol)?;
    let profile = reconstruct_profile(&traj)?;
    let envelope = e_function(&profile, family, &params).ok();

    let mut table = Table::new(vec!["t", "w", "w_prime", "phi", "log_e", "E"]);
    base_meta(&mut table, "profile", &params);
    table.meta.push(("family", family.index().into()));
    table.meta.push(("a", a.into()));
    table.meta.push(("lambda", lambda.into()));
    table.meta.push(("alpha", profile.alpha.into()));
    table.meta.push(("b", profile.b.into()));
    table.meta.push(("delta", profile.delta.into()));
    table.meta.push(("m", profile.m.into()));
    table.meta.push(("t0", profile.t0.into()));
    table.meta.push(("converged", profile.converged.into()));
    let mut env = envelope.as_ref().map(|e| e.values.iter().peekable());
    for pt in &profile.points {
        let e = env.as_mut().and_then(|it| it.next_if(|(t, _)| *t == pt.t)).map(|(_, v)| *v);
        table.rows.push(vec![
            pt.t.into(),
            pt.w.into(),
            pt.w_prime.into(),
            pt.phi.into(),
            pt.log_e.into(),
            e.into(),
        ]);
    }
    Ok(table)
}

fn cmd_verify(suites: &[String], inject: Option<Injection>) -> Result<(Table, usize), CliError> {
    let chosen: Vec<Suite> = if suites.is_empty() {
        Suite::ALL.to_vec()
    } else {
        suites.iter().map(|s| s.parse::<Suite>()).collect::<Result<_, _>>().map_err(|e| CliError::Usage(e.to_string()))?
    };
    let mutation = inject.map(|Injection::FlipT3| Mutation::FlipCoshDrift);
    let outcomes = verify::run(&chosen, mutation);
    let mut table = Table::new(vec!["suite", "check", "status", "detail"]);
    table.meta.push(("command", "verify".into()));
    let mut failed = 0;
    for o in &outcomes {
        if !o.passed {
            failed += 1;
            eprintln!("FAILED {}: {} ({})", o.suite, o.name, o.detail);
        }
        table.rows.push(vec![
            o.suite.name().into(),
            o.name.into(),
            (if o.passed { "PASS" } else { "FAIL" }).into(),
            o.detail.as_str().into(),
        ]);
    }
    Ok((table, failed))
}

fn emit(table: &Table, rc: &RunConfig, default: Format) -> Result<(), CliError> {
    let text = table.render(rc.format.unwrap_or(default));
    match &rc.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => Some(read_config(path)?),
        None => None,
    };
    let with_cfg = |mut rc: RunConfig| -> Result<RunConfig, CliError> {
        if let Some(cfg) = &cfg {
            rc.merge(cfg)?;
        }
        Ok(rc)
    };
    match cli.command {
        Command::Lambda(rc) => {
            let rc = with_cfg(rc)?;
            emit(&cmd_lambda(&rc)?, &rc, Format::Text)
        }
        Command::Sweep(rc) => {
            let rc = with_cfg(rc)?;
            let (table, warnings) = cmd_sweep(&rc)?;
            emit(&table, &rc, Format::Csv)?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            if rc.strict && !warnings.is_empty() {
                return Err(CliError::Failed(format!("{} monotonicity warnings in strict mode", warnings.len())));
            }
            Ok(())
        }
        Command::Verify { run, mut suite, inject } => {
            let rc = with_cfg(run)?;
            if suite.is_empty() {
                if let Some(s) = cfg.as_ref().and_then(|c| c.get("suite")) {
                    suite = s.split(',').map(|x| x.trim().to_string()).collect();
                }
            }
            let (table, failed) = cmd_verify(&suite, inject)?;
            emit(&table, &rc, Format::Text)?;
            if failed > 0 {
                return Err(CliError::Failed(format!("{failed} checks failed")));
            }
            Ok(())
        }
        Command::Profile(rc) => {
            let rc = with_cfg(rc)?;
            emit(&cmd_profile(&rc)?, &rc, Format::Csv)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
