//! Subcommand implementations and report/CSV emission.
//!
//! Exit-code contract: 0 pass, 1 internal error, 2 configuration error,
//! 3 verification or consistency failure. Identical configuration and seed
//! produce byte-identical output files; everything is written atomically
//! (temp file in the target directory, then rename).

use crate::config::RunConfig;
use anyhow::{anyhow, bail, Context, Result};
use fracgraph::eigensolver::verify_eigen_solution;
use fracgraph::fraccalc::{
    frac_deriv_left, frac_deriv_right, frac_integral_left, frac_integral_right, EndpointSide,
    FracOrder, Grid, GridFunction,
};
use fracgraph::mittag::{mittag_leffler, MlParams};
use fracgraph::operator::{verify_self_adjoint, TrialFamily};
use fracgraph::{Complex64, Error as CoreError};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Failure modes that map onto the exit-code contract.
#[derive(Debug)]
pub enum CmdError {
    /// Configuration or input rejected before computation (exit 2).
    Config(anyhow::Error),
    /// Verification or consistency failure (exit 3).
    Failure(String),
    /// Anything else (exit 1).
    Internal(anyhow::Error),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Config(_) => 2,
            CmdError::Failure(_) => 3,
            CmdError::Internal(_) => 1,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CmdError::Config(e) => format!("configuration error: {e:#}"),
            CmdError::Failure(m) => format!("verification failure: {m}"),
            CmdError::Internal(e) => format!("error: {e:#}"),
        }
    }
}

fn config_err(e: anyhow::Error) -> CmdError {
    CmdError::Config(e)
}

/// Writes a file atomically: temp file in the same directory, then rename.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into())
    ));
    std::fs::write(&tmp, contents)
        .with_context(|| format!("cannot write {}", tmp.display()))?;
    std::fs::rename(&tmp, path)
        .with_context(|| format!("cannot move output into place at {}", path.display()))?;
    Ok(())
}

/// Scientific notation with 12 significant digits, '.' decimal point.
fn sci(v: f64) -> String {
    format!("{v:.11e}")
}

/// Overrides applied on top of the configuration file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub n: Option<usize>,
    pub grading: Option<f64>,
    pub alpha: Option<f64>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub k1: Option<f64>,
    pub b1: Option<f64>,
    pub c1: Option<f64>,
    pub strict: Option<bool>,
}

fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig, CmdError> {
    let mut config = RunConfig::load(path).map_err(config_err)?;
    if let Some(n) = overrides.n {
        config.grid.n = n;
    }
    if let Some(g) = overrides.grading {
        config.grid.grading = g;
    }
    if let Some(a) = overrides.alpha {
        config.alpha = a;
    }
    if let Some(t) = overrides.tol {
        config.verify.tol = t;
        config.solve.tol = t;
    }
    if let Some(s) = overrides.seed {
        config.verify.seed = s;
    }
    if let Some(t) = overrides.trials {
        config.verify.trials = t;
    }
    if let Some(k1) = overrides.k1 {
        config.solve.k1 = k1;
    }
    if let Some(b1) = overrides.b1 {
        config.solve.b1 = b1;
    }
    if let Some(c1) = overrides.c1 {
        config.solve.c1 = c1;
    }
    if let Some(strict) = overrides.strict {
        config.solve.strict = strict;
    }
    config.validate().map_err(config_err)?;
    Ok(config)
}

/// `check-sa`: self-adjointness verification plus a convergence CSV over a
/// doubling grid ladder.
pub fn cmd_check_sa(config_path: &Path, out_dir: &Path, overrides: &Overrides) -> Result<(), CmdError> {
    let config = load_config(config_path, overrides)?;
    let graph = config.build_graph().map_err(config_err)?;
    let v = &config.verify;

    let report = verify_self_adjoint(
        &graph,
        config.grid.n,
        config.grid.grading,
        v.trials,
        v.tol,
        v.seed,
    )
    .map_err(internal)?;

    let mut csv = String::new();
    csv.push_str("# skew-form magnitude versus grid size; columns: cells per edge, max |omega| over vanishing-family trials, max |omega| over condition-family trials (dimensionless)\n");
    csv.push_str("n,max_omega_vanishing,max_omega_conditions\n");
    let mut level = config.grid.n;
    let mut ladder = Vec::new();
    while ladder.len() < 4 && level >= 64 {
        ladder.push(level);
        level /= 2;
    }
    ladder.reverse();
    for &n in &ladder {
        let ladder_report = verify_self_adjoint(
            &graph,
            n,
            config.grid.grading,
            v.trials.min(8),
            v.tol,
            v.seed,
        )
        .map_err(internal)?;
        let max_of = |family: TrialFamily| {
            ladder_report
                .rows
                .iter()
                .filter(|r| r.family == family)
                .map(|r| r.omega_abs)
                .fold(0.0_f64, f64::max)
        };
        let _ = writeln!(
            csv,
            "{n},{},{}",
            sci(max_of(TrialFamily::Vanishing)),
            sci(max_of(TrialFamily::ConditionSatisfying))
        );
    }

    write_atomic(&out_dir.join("verification.txt"), &report.to_string()).map_err(internal)?;
    write_atomic(&out_dir.join("convergence.csv"), &csv).map_err(internal)?;
    println!("{report}");

    if report.all_passed {
        Ok(())
    } else {
        Err(CmdError::Failure(format!(
            "self-adjointness verification failed (report in {})",
            out_dir.join("verification.txt").display()
        )))
    }
}

/// `solve`: spectral pipeline report plus per-edge sampled solution CSV.
pub fn cmd_solve(config_path: &Path, out_dir: &Path, overrides: &Overrides) -> Result<(), CmdError> {
    let config = load_config(config_path, overrides)?;
    if config.topology != "star" {
        return Err(CmdError::Config(anyhow!(
            "solve requires a star topology, got '{}'",
            config.topology
        )));
    }
    if config.solve.k1 == 0.0 {
        return Err(CmdError::Config(anyhow!(
            "solve.k1 must be nonzero (the rate-sum constraint divides by it)"
        )));
    }
    let graph = config.build_graph().map_err(config_err)?;
    let s = &config.solve;

    let report = match verify_eigen_solution(
        &graph,
        config.grid.n,
        config.grid.grading,
        s.k1,
        s.b1,
        s.c1,
        s.tol,
        s.strict,
    ) {
        Ok(report) => report,
        Err(CoreError::InconsistentConstraints(msg)) => {
            return Err(CmdError::Failure(format!(
                "constraint chains inconsistent in strict mode: {msg}"
            )))
        }
        Err(e) => return Err(internal(e)),
    };

    let mut csv = String::new();
    csv.push_str("# sampled spectral solution; columns: edge id, coordinate s on the edge (same units as lengths), Re phi, Im phi\n");
    csv.push_str("edge,s,re_phi,im_phi\n");
    let params = &report.params;
    for edge in graph.edges() {
        let grid = Grid::graded(config.grid.n, edge.length, config.grid.grading)
            .map_err(internal)?;
        let built =
            fracgraph::eigensolver::build_solution(edge, &grid, params).map_err(internal)?;
        for (&x, v) in grid.nodes().iter().zip(built.values()) {
            let _ = writeln!(csv, "{},{},{},{}", edge.id, sci(x), sci(v.re), sci(v.im));
        }
    }

    write_atomic(&out_dir.join("spectral.txt"), &report.to_string()).map_err(internal)?;
    write_atomic(&out_dir.join("solution.csv"), &csv).map_err(internal)?;
    println!("{report}");

    if !s.strict || report.passed {
        Ok(())
    } else {
        Err(CmdError::Failure(format!(
            "spectral residuals exceeded tolerance in strict mode (report in {})",
            out_dir.join("spectral.txt").display()
        )))
    }
}

/// `ml`: print a table of Mittag-Leffler values to 10 significant digits.
pub fn cmd_ml(alpha: f64, beta: f64, z_values: &[f64]) -> Result<(), CmdError> {
    let params = MlParams::new(alpha, beta).map_err(|e| CmdError::Config(anyhow!("{e}")))?;
    println!("z              E_{{{alpha},{beta}}}(z)");
    for &z in z_values {
        let value = mittag_leffler(params, z).map_err(|e| CmdError::Config(anyhow!("{e}")))?;
        println!("{z:<14} {value:.9e}");
    }
    Ok(())
}

/// One `c * t^p` term of the little expression language.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerm {
    pub coefficient: f64,
    pub exponent: f64,
}

/// Parses sums of constants, `t`, and power terms `c*t^p` with `p > -1`,
/// e.g. `1`, `t`, `2*t^0.5 - 3`, `t^-0.5`.
pub fn parse_expression(expr: &str) -> Result<Vec<PowerTerm>> {
    let compact: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        bail!("empty expression");
    }
    let mut terms = Vec::new();
    let mut current = String::new();
    for (i, ch) in compact.char_indices() {
        if (ch == '+' || ch == '-') && i > 0 {
            let prev = compact.as_bytes()[i - 1] as char;
            // A sign right after e/E or '^' or another operator binds to the
            // number, not the term list.
            if prev != 'e' && prev != 'E' && prev != '^' && prev != '+' && prev != '-' {
                terms.push(parse_term(&current)?);
                current.clear();
            }
        }
        current.push(ch);
    }
    terms.push(parse_term(&current)?);
    Ok(terms)
}

fn parse_term(term: &str) -> Result<PowerTerm> {
    let term = term.trim_start_matches('+');
    let (sign, body) = match term.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, term),
    };
    if body.is_empty() {
        bail!("empty term in expression");
    }
    let (coeff_str, var_part) = match body.find('t') {
        Some(pos) => (&body[..pos], &body[pos..]),
        None => (body, ""),
    };
    let coefficient = if coeff_str.is_empty() {
        1.0
    } else {
        let trimmed = coeff_str.strip_suffix('*').unwrap_or(coeff_str);
        trimmed
            .parse::<f64>()
            .map_err(|_| anyhow!("cannot parse coefficient '{coeff_str}'"))?
    };
    let exponent = if var_part.is_empty() {
        0.0
    } else if var_part == "t" {
        1.0
    } else {
        let exp_str = var_part
            .strip_prefix("t^")
            .ok_or_else(|| anyhow!("unsupported term '{body}'"))?;
        exp_str
            .parse::<f64>()
            .map_err(|_| anyhow!("cannot parse exponent '{exp_str}'"))?
    };
    if exponent.is_nan() || exponent <= -1.0 {
        bail!("exponent {exponent} not supported: power functions need p > -1");
    }
    Ok(PowerTerm {
        coefficient: sign * coefficient,
        exponent,
    })
}

/// Builds the sampled function for the `frac` command.
pub fn expression_function(terms: &[PowerTerm], grid: Grid) -> Result<GridFunction> {
    let mut f = GridFunction::zeros(grid);
    for term in terms {
        f.add_power_term(
            EndpointSide::AtZero,
            Complex64::new(term.coefficient, 0.0),
            term.exponent,
        )
        .map_err(|e| anyhow!("{e}"))?;
    }
    Ok(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FracSide {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FracKind {
    Integral,
    Derivative,
}

/// `frac`: evaluate one fractional integral or derivative of an expression
/// on a graded grid and emit `(x, value)` rows.
#[allow(clippy::too_many_arguments)]
pub fn cmd_frac(
    expr: &str,
    alpha: f64,
    side: FracSide,
    kind: FracKind,
    n: usize,
    grading: f64,
    length: f64,
    out: Option<&PathBuf>,
) -> Result<(), CmdError> {
    let order = FracOrder::new(alpha).map_err(|e| CmdError::Config(anyhow!("{e}")))?;
    let terms = parse_expression(expr).map_err(config_err)?;
    let grid = Grid::graded(n, length, grading).map_err(|e| CmdError::Config(anyhow!("{e}")))?;
    let f = expression_function(&terms, grid).map_err(config_err)?;

    let result = match (side, kind) {
        (FracSide::Left, FracKind::Integral) => Ok(frac_integral_left(&f, order)),
        (FracSide::Right, FracKind::Integral) => Ok(frac_integral_right(&f, order)),
        (FracSide::Left, FracKind::Derivative) => frac_deriv_left(&f, order),
        (FracSide::Right, FracKind::Derivative) => frac_deriv_right(&f, order),
    };
    let result = match result {
        Ok(r) => r,
        Err(e @ CoreError::UnsupportedSingularity(_)) => {
            return Err(CmdError::Config(anyhow!("unsupported expression: {e}")))
        }
        Err(e) => return Err(internal(e)),
    };

    let mut text = String::new();
    text.push_str("# columns: x (coordinate on [0, length]), value (real part of the result)\n");
    for term in result.singular_terms() {
        let side_name = match term.side {
            EndpointSide::AtZero => "x = 0",
            EndpointSide::AtLength => "x = L",
        };
        let _ = writeln!(
            text,
            "# singular term at {side_name}: coefficient {} times d^({}) with d the distance to the endpoint",
            sci(term.coefficient.re),
            term.exponent
        );
    }
    text.push_str("x,value\n");
    for (&x, v) in result.grid().nodes().iter().zip(result.values()) {
        let _ = writeln!(text, "{},{}", sci(x), sci(v.re));
    }

    match out {
        Some(path) => write_atomic(path, &text).map_err(internal)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn internal(e: impl Into<anyhow::Error>) -> CmdError {
    CmdError::Internal(e.into())
}
