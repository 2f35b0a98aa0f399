//! Batch front end: JSON config ingestion, subcommands, machine-readable
//! output. Complex numbers travel as `[re, im]` pairs; structured output is
//! JSON, trajectories are CSV; identical inputs give byte-identical outputs.

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::deform::{build_a_companion, solve_coefficients};
use crate::flow::{integrate_flow, trajectory_to_csv, StepControl};
use crate::lax::{
    build_l_c, build_l_check, build_l_companion, build_l_tilde, classical_spectral_curve,
    solve_isospectral_h, LaxMatrix,
};
use crate::model::{ConnectionConfig, DarbouxState, DeformationVector, Pole, PoleStructure};
use crate::presets::{painleve_preset, PresetId};
use crate::rational::RationalFunction;
use crate::scalar::{c, C};
use crate::verify::{run_suite, SuiteTolerances};
use crate::{Error, Result, Tolerances};

/// Rank-2 meromorphic connection engine: Lax pairs, deformation flows, and
/// verification checks.
#[derive(Debug, Parser)]
#[command(name = "isomono", version, disable_help_subcommand = true)]
pub struct Cli {
    /// Minimum separation between nodes, poles, and sample points.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_sep: f64,
    /// Tolerance on the residue-sum constraint of the monodromy exponents.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_res: f64,
    /// Step size for finite-difference stencils in the checks.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub fd_eps: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the Lax matrices (companion, check, tilde, traceless) and the
    /// deformation matrix on a grid of spectral points; emit JSON.
    Build(BuildArgs),
    /// Integrate the deformation flow and emit the trajectory as CSV.
    Evolve(EvolveArgs),
    /// Run the verification suite on seeded random configurations; emit a
    /// JSON report and exit nonzero on any failure.
    Check(CheckArgs),
    /// Emit a ready-made configuration file for a Painlevé preset.
    Preset(PresetArgs),
    /// Emit the coefficients of the classical spectral curve y² − P₁y + P₂.
    Spectral(SpectralArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Path to a JSON configuration document.
    #[arg(long)]
    pub config: String,
    /// Number of spectral sample points (on a circle).
    #[arg(long, default_value_t = 8)]
    pub grid: usize,
    /// Radius of the sampling circle.
    #[arg(long, default_value_t = 3.0)]
    pub radius: f64,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    /// Path to a JSON configuration document (must carry state and
    /// deformation).
    #[arg(long)]
    pub config: String,
    /// Flow-parameter span as "start,end".
    #[arg(long)]
    pub span: String,
    /// Fixed step size.
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Use the adaptive integrator with this local tolerance instead of a
    /// fixed step.
    #[arg(long)]
    pub adaptive: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Seed for the deterministic sampler (default: ISOMONO_SEED or 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of sampled configurations.
    #[arg(long, default_value_t = 20)]
    pub cases: usize,
}

#[derive(Debug, Args)]
pub struct PresetArgs {
    /// Preset identifier: P2, P3, P4, P4_JM, P5, P6, or P2H2.
    pub id: String,
    /// Preset parameters (repeat the flag; each value is "re" or "re,im").
    #[arg(long = "theta", alias = "param")]
    pub theta: Vec<String>,
    /// Deformation time of the preset.
    #[arg(long, default_value = "2.0")]
    pub t: String,
    /// Initial node positions (defaults chosen away from fixed singular
    /// points).
    #[arg(long = "q")]
    pub q: Vec<String>,
    /// Initial node momenta.
    #[arg(long = "p")]
    pub p: Vec<String>,
    /// Planck-scale parameter.
    #[arg(long, default_value = "1.0")]
    pub hbar: String,
}

#[derive(Debug, Args)]
pub struct SpectralArgs {
    /// Path to a JSON configuration document (must carry state).
    #[arg(long)]
    pub config: String,
}

/// Entry point used by the binary: parse, dispatch, and map outcomes to exit
/// codes (0 success, 1 computation/validation failure, 2 usage error).
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            // help/version requests print to stdout and exit clean
            let _ = err.print();
            return if err.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

/// Write to stdout, treating a closed pipe as normal termination.
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.write_all(b"\n")) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(e.into()),
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let tol = Tolerances {
        sep: cli.tol_sep,
        res: cli.tol_res,
        fd_eps: cli.fd_eps,
        residue_warn_only: false,
    };
    match &cli.command {
        Command::Build(args) => cmd_build(args, &tol),
        Command::Evolve(args) => cmd_evolve(args, &tol),
        Command::Check(args) => cmd_check(args, &tol),
        Command::Preset(args) => cmd_preset(args),
        Command::Spectral(args) => cmd_spectral(args, &tol),
    }
}

// ---------------------------------------------------------------------------
// Config document
// ---------------------------------------------------------------------------

/// Parsed contents of a configuration document.
#[derive(Debug, Clone)]
pub struct ConfigDocument {
    pub config: ConnectionConfig,
    pub state: Option<DarbouxState>,
    pub deformation: Option<DeformationVector>,
}

fn schema_err(pointer: &str, message: impl Into<String>) -> Error {
    Error::Schema { pointer: pointer.to_string(), message: message.into() }
}

fn get<'a>(obj: &'a Value, pointer: &str) -> Result<&'a Value> {
    obj.pointer(pointer).ok_or_else(|| schema_err(pointer, "missing field"))
}

fn as_usize(v: &Value, pointer: &str) -> Result<usize> {
    v.as_u64().map(|u| u as usize).ok_or_else(|| schema_err(pointer, "expected a nonnegative integer"))
}

fn as_complex(v: &Value, pointer: &str) -> Result<C> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| schema_err(pointer, "expected a complex number as [re, im]"))?;
    let re = arr[0].as_f64().ok_or_else(|| schema_err(pointer, "re is not a number"))?;
    let im = arr[1].as_f64().ok_or_else(|| schema_err(pointer, "im is not a number"))?;
    Ok(c(re, im))
}

fn as_complex_vec(v: &Value, pointer: &str) -> Result<Vec<C>> {
    let arr = v.as_array().ok_or_else(|| schema_err(pointer, "expected an array"))?;
    arr.iter()
        .enumerate()
        .map(|(i, e)| as_complex(e, &format!("{pointer}/{i}")))
        .collect()
}

fn as_sheet_pair(v: &Value, pointer: &str, len: usize) -> Result<[Vec<C>; 2]> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| schema_err(pointer, "expected two per-sheet arrays"))?;
    let s1 = as_complex_vec(&arr[0], &format!("{pointer}/0"))?;
    let s2 = as_complex_vec(&arr[1], &format!("{pointer}/1"))?;
    for (i, s) in [&s1, &s2].iter().enumerate() {
        if s.len() != len {
            return Err(schema_err(
                &format!("{pointer}/{i}"),
                format!("expected {len} entries, got {}", s.len()),
            ));
        }
    }
    Ok([s1, s2])
}

/// Parse a configuration document from JSON text. Schema violations carry a
/// JSON-pointer path; admissibility failures from the model's validation are
/// surfaced verbatim.
pub fn parse_config_str(text: &str, tol: &Tolerances) -> Result<ConfigDocument> {
    let root: Value = serde_json::from_str(text)?;
    let schema = get(&root, "/schema")?;
    if schema.as_u64() != Some(1) {
        return Err(schema_err("/schema", "unsupported schema version (expected 1)"));
    }

    let r_inf = as_usize(get(&root, "/structure/r_inf")?, "/structure/r_inf")?;
    let poles_v = get(&root, "/structure/poles")?
        .as_array()
        .ok_or_else(|| schema_err("/structure/poles", "expected an array"))?;
    let mut poles = Vec::new();
    for (s, pv) in poles_v.iter().enumerate() {
        let ptr = format!("/structure/poles/{s}");
        let x = as_complex(get(pv, "/x").map_err(|_| schema_err(&format!("{ptr}/x"), "missing field"))?, &format!("{ptr}/x"))?;
        let r = as_usize(get(pv, "/r").map_err(|_| schema_err(&format!("{ptr}/r"), "missing field"))?, &format!("{ptr}/r"))?;
        poles.push(Pole { x, r });
    }
    let structure = PoleStructure { r_inf, poles };

    let t_inf = as_sheet_pair(get(&root, "/times/inf")?, "/times/inf", r_inf)?;
    let tx_v = get(&root, "/times/X")?
        .as_array()
        .ok_or_else(|| schema_err("/times/X", "expected an array"))?;
    if tx_v.len() != structure.poles.len() {
        return Err(schema_err(
            "/times/X",
            format!("expected {} pole time blocks, got {}", structure.poles.len(), tx_v.len()),
        ));
    }
    let mut t_x = Vec::new();
    for (s, v) in tx_v.iter().enumerate() {
        t_x.push(as_sheet_pair(v, &format!("/times/X/{s}"), structure.poles[s].r)?);
    }
    let hbar = as_complex(get(&root, "/hbar")?, "/hbar")?;
    let config = ConnectionConfig { structure, t_inf, t_x, hbar };

    let rep = config.validate(tol);
    if !rep.ok {
        return Err(Error::InvalidConfig(rep.failures.join("; ")));
    }

    let state = match root.pointer("/state") {
        None | Some(Value::Null) => None,
        Some(sv) => {
            let q = as_complex_vec(get(sv, "/q").map_err(|_| schema_err("/state/q", "missing field"))?, "/state/q")?;
            let p = as_complex_vec(get(sv, "/p").map_err(|_| schema_err("/state/p", "missing field"))?, "/state/p")?;
            let st = DarbouxState { q, p };
            let srep = config.validate_state(&st, tol);
            if !srep.ok {
                return Err(Error::InvalidConfig(srep.failures.join("; ")));
            }
            Some(st)
        }
    };

    let deformation = match root.pointer("/deformation") {
        None | Some(Value::Null) => None,
        Some(dv) => {
            let mut alpha = DeformationVector::zero(&config.structure);
            let a_inf = as_sheet_pair(
                get(dv, "/inf").map_err(|_| schema_err("/deformation/inf", "missing field"))?,
                "/deformation/inf",
                r_inf.saturating_sub(1),
            )?;
            alpha.a_inf = a_inf;
            let ax_v = get(dv, "/X")
                .map_err(|_| schema_err("/deformation/X", "missing field"))?
                .as_array()
                .ok_or_else(|| schema_err("/deformation/X", "expected an array"))?;
            if ax_v.len() != config.n() {
                return Err(schema_err(
                    "/deformation/X",
                    format!("expected {} entries, got {}", config.n(), ax_v.len()),
                ));
            }
            for (s, v) in ax_v.iter().enumerate() {
                alpha.a_x[s] =
                    as_sheet_pair(v, &format!("/deformation/X/{s}"), config.r_s(s) - 1)?;
            }
            let pos = as_complex_vec(
                get(dv, "/pos").map_err(|_| schema_err("/deformation/pos", "missing field"))?,
                "/deformation/pos",
            )?;
            if pos.len() != config.n() {
                return Err(schema_err(
                    "/deformation/pos",
                    format!("expected {} entries, got {}", config.n(), pos.len()),
                ));
            }
            alpha.a_pos = pos;
            Some(alpha)
        }
    };

    Ok(ConfigDocument { config, state, deformation })
}

/// Parse a configuration document from a file path.
pub fn parse_config(path: &str, tol: &Tolerances) -> Result<ConfigDocument> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text, tol)
}

fn cx(v: C) -> Value {
    json!([v.re, v.im])
}

fn cx_vec(vs: &[C]) -> Value {
    Value::Array(vs.iter().map(|&v| cx(v)).collect())
}

fn sheet_pair(p: &[Vec<C>; 2]) -> Value {
    json!([cx_vec(&p[0]), cx_vec(&p[1])])
}

/// Serialize a document back into the schema accepted by [`parse_config`].
pub fn config_to_json(doc: &ConfigDocument) -> Value {
    let mut root = Map::new();
    root.insert("schema".into(), json!(1));
    root.insert(
        "structure".into(),
        json!({
            "r_inf": doc.config.r_inf(),
            "poles": doc.config.structure.poles.iter()
                .map(|p| json!({"x": cx(p.x), "r": p.r}))
                .collect::<Vec<_>>(),
        }),
    );
    root.insert(
        "times".into(),
        json!({
            "inf": sheet_pair(&doc.config.t_inf),
            "X": doc.config.t_x.iter().map(sheet_pair).collect::<Vec<_>>(),
        }),
    );
    root.insert("hbar".into(), cx(doc.config.hbar));
    if let Some(st) = &doc.state {
        root.insert("state".into(), json!({"q": cx_vec(&st.q), "p": cx_vec(&st.p)}));
    }
    if let Some(alpha) = &doc.deformation {
        root.insert(
            "deformation".into(),
            json!({
                "inf": sheet_pair(&alpha.a_inf),
                "X": alpha.a_x.iter().map(sheet_pair).collect::<Vec<_>>(),
                "pos": cx_vec(&alpha.a_pos),
            }),
        );
    }
    Value::Object(root)
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn require_state(doc: &ConfigDocument) -> Result<&DarbouxState> {
    doc.state
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("this command requires a \"state\" block".into()))
}

fn matrix_json(m: &LaxMatrix, lambdas: &[C]) -> Result<Value> {
    let mut rows = Vec::new();
    for &lam in lambdas {
        let v = m.evaluate(lam)?;
        rows.push(json!([
            [cx(v[0][0]), cx(v[0][1])],
            [cx(v[1][0]), cx(v[1][1])],
        ]));
    }
    Ok(Value::Array(rows))
}

fn cmd_build(args: &BuildArgs, tol: &Tolerances) -> Result<i32> {
    let doc = parse_config(&args.config, tol)?;
    let state = require_state(&doc)?;
    let cfg = &doc.config;
    let h = solve_isospectral_h(cfg, state)?;

    let mut lambdas = Vec::new();
    let count = args.grid.max(1);
    for k in 0..count {
        let angle = std::f64::consts::TAU * k as f64 / count as f64;
        let cand = c(args.radius * angle.cos(), args.radius * angle.sin());
        let clear = state.q.iter().all(|&q| (q - cand).norm() > tol.sep)
            && (0..cfg.n()).all(|s| (cfg.x_s(s) - cand).norm() > tol.sep);
        if clear {
            lambdas.push(cand);
        }
    }

    let l = build_l_companion(cfg, state, &h)?;
    let mut out = Map::new();
    out.insert("lambda".into(), cx_vec(&lambdas));
    out.insert("L_companion".into(), matrix_json(&l, &lambdas)?);
    out.insert("L_check".into(), matrix_json(&build_l_check(cfg, state, &h)?, &lambdas)?);
    out.insert("L_tilde".into(), matrix_json(&build_l_tilde(cfg, state, &h)?, &lambdas)?);
    out.insert("L_traceless".into(), matrix_json(&build_l_c(cfg, state, &h)?, &lambdas)?);
    if let Some(alpha) = &doc.deformation {
        let coeffs = solve_coefficients(cfg, state, alpha)?;
        let a = build_a_companion(cfg, state, &coeffs, &l)?;
        out.insert("A_companion".into(), matrix_json(&a, &lambdas)?);
    }
    emit(&serde_json::to_string_pretty(&Value::Object(out))?)?;
    Ok(0)
}

fn cmd_evolve(args: &EvolveArgs, tol: &Tolerances) -> Result<i32> {
    let doc = parse_config(&args.config, tol)?;
    let state = require_state(&doc)?;
    let alpha = doc
        .deformation
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("evolve requires a \"deformation\" block".into()))?;
    let parts: Vec<&str> = args.span.split(',').collect();
    let span = match parts.as_slice() {
        [a, b] => match (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return Err(Error::InvalidConfig(format!("invalid --span {:?}", args.span))),
        },
        _ => return Err(Error::InvalidConfig("expected --span start,end".into())),
    };
    let control = match args.adaptive {
        Some(t) => StepControl::AdaptiveRk45 { tol: t, initial_step: args.step },
        None => StepControl::FixedRk4 { step: args.step },
    };
    let traj = integrate_flow(&doc.config, state, alpha, span, control, tol.sep)?;
    emit(trajectory_to_csv(&traj).trim_end())?;
    if let Some(detail) = &traj.collision {
        eprintln!("flow stopped early: {detail}");
        return Ok(1);
    }
    Ok(0)
}

fn cmd_check(args: &CheckArgs, tol: &Tolerances) -> Result<i32> {
    let seed = args.seed.unwrap_or_else(|| {
        std::env::var("ISOMONO_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0)
    });
    let suite_tol = SuiteTolerances { fd_eps: tol.fd_eps, ..SuiteTolerances::default() };
    let report = run_suite(seed, args.cases, &suite_tol);
    emit(&report.to_json())?;
    Ok(if report.pass { 0 } else { 1 })
}

fn parse_cx_arg(text: &str, what: &str) -> Result<C> {
    let parts: Vec<&str> = text.split(',').collect();
    let bad = || Error::InvalidConfig(format!("invalid {what} value {text:?} (use \"re\" or \"re,im\")"));
    match parts.as_slice() {
        [re] => re.trim().parse::<f64>().map(|r| c(r, 0.0)).map_err(|_| bad()),
        [re, im] => match (re.trim().parse::<f64>(), im.trim().parse::<f64>()) {
            (Ok(r), Ok(i)) => Ok(c(r, i)),
            _ => Err(bad()),
        },
        _ => Err(bad()),
    }
}

fn cmd_preset(args: &PresetArgs) -> Result<i32> {
    let id: PresetId = args.id.parse()?;
    let params: Vec<C> = args
        .theta
        .iter()
        .map(|s| parse_cx_arg(s, "--theta"))
        .collect::<Result<_>>()?;
    let t = parse_cx_arg(&args.t, "--t")?;
    let hbar = parse_cx_arg(&args.hbar, "--hbar")?;
    let g = id.genus();
    let q: Vec<C> = if args.q.is_empty() {
        // defaults chosen off the real axis, away from the fixed singular
        // points 0, 1, and typical t
        (0..g).map(|j| c(-1.1 - 0.6 * j as f64, 0.7)).collect()
    } else {
        args.q.iter().map(|s| parse_cx_arg(s, "--q")).collect::<Result<_>>()?
    };
    let p: Vec<C> = if args.p.is_empty() {
        (0..g).map(|j| c(0.4 + 0.3 * j as f64, -0.2)).collect()
    } else {
        args.p.iter().map(|s| parse_cx_arg(s, "--p")).collect::<Result<_>>()?
    };
    let preset = painleve_preset(id, &params, t, &q, &p, hbar)?;
    let doc = ConfigDocument {
        config: preset.config,
        state: Some(preset.state),
        deformation: preset.directions.into_iter().next(),
    };
    emit(&serde_json::to_string_pretty(&config_to_json(&doc))?)?;
    Ok(0)
}

fn rational_json(f: &RationalFunction) -> Value {
    json!({
        "poly": cx_vec(&f.poly),
        "parts": f.parts.iter()
            .map(|p| json!({"point": cx(p.point), "coeffs": cx_vec(&p.coeffs)}))
            .collect::<Vec<_>>(),
    })
}

fn cmd_spectral(args: &SpectralArgs, tol: &Tolerances) -> Result<i32> {
    let doc = parse_config(&args.config, tol)?;
    let state = require_state(&doc)?;
    let h = solve_isospectral_h(&doc.config, state)?;
    let (p1, p2) = classical_spectral_curve(&doc.config, state, &h);
    let out = json!({
        "genus": doc.config.genus(),
        "P1": rational_json(&p1),
        "P2": rational_json(&p2),
    });
    emit(&serde_json::to_string_pretty(&out)?)?;
    Ok(0)
}
