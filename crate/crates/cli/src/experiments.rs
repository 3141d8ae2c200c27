//! Experiment drivers: resolve parameters from flags or a recorded manifest,
//! run the library computation, and emit CSV output plus a fresh manifest.
//!
//! Every float is written with 17 significant digits and every line ends in
//! LF, so re-running from a manifest reproduces the CSVs byte for byte.

use std::path::{Path, PathBuf};

use parasdc::collocation::{radau_right_scheme, PrecondKind};
use parasdc::minimizer::{
    LANDSCAPE_Q1_RANGE, LANDSCAPE_Q2_RANGE, LANDSCAPE_RESOLUTION, NM_DEFAULT_TOL,
};
use parasdc::problems::Stencil;
use parasdc::solvers::QDiagonalization;
use parasdc::study::{self, IterationCountsConfig, Method, MethodConfig, ProblemKey, RatesConfig};
use parasdc::sweeper::preconditioner_for;

use crate::manifest::{fmt_f64, provenance, Manifest};
use crate::{CliError, ConvratesArgs, ItercountsArgs, LandscapeArgs, SingleArgs};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn runtime(msg: impl std::fmt::Display) -> CliError {
    CliError::Runtime(msg.to_string())
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest")
}

fn load_manifest(path: &Path, experiment: &str) -> Result<Manifest, CliError> {
    let m = Manifest::read(path).map_err(usage)?;
    m.check_provenance(experiment).map_err(usage)?;
    Ok(m)
}

/// `--from-manifest` fixes every parameter; combining it with parameter flags
/// would silently shadow recorded values, so it is rejected. `--out` and
/// `--workers` stay available (neither changes computed values).
fn reject_flags(given: &[(&str, bool)]) -> Result<(), CliError> {
    for (name, present) in given {
        if *present {
            return Err(usage(format!(
                "--{name} cannot be combined with --from-manifest"
            )));
        }
    }
    Ok(())
}

fn comma_join_f64(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| fmt_f64(v))
        .collect::<Vec<_>>()
        .join(",")
}

// ---------------------------------------------------------------------------
// landscape
// ---------------------------------------------------------------------------

pub fn landscape(args: &LandscapeArgs) -> Result<i32, CliError> {
    let (resolution, workers) = match &args.from_manifest {
        Some(path) => {
            reject_flags(&[("N", args.n.is_some())])?;
            let m = load_manifest(path, "landscape")?;
            let resolution = m.require("resolution").map_err(usage)?;
            let workers = m.require("workers").map_err(usage)?;
            (resolution, args.workers.unwrap_or(workers))
        }
        None => (
            args.n.unwrap_or(LANDSCAPE_RESOLUTION),
            args.workers.unwrap_or(1),
        ),
    };
    if resolution < 2 {
        return Err(usage("--N must be at least 2"));
    }
    let out = args.out.clone().unwrap_or_else(|| "landscape.csv".into());

    let result = study::landscape(resolution, workers).map_err(runtime)?;

    let mut csv = String::from("q1,q2,rho\n");
    for &(q1, q2, rho) in &result.grid {
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(q1),
            fmt_f64(q2),
            fmt_f64(rho)
        ));
    }
    // the two minimizer results are the final two rows, in start order
    for nm in &result.nm {
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(nm.q[0]),
            fmt_f64(nm.q[1]),
            fmt_f64(nm.rho)
        ));
    }
    write_file(&out, &csv)?;

    let mut man = provenance("landscape");
    man.push("resolution", resolution);
    man.push("workers", workers);
    man.push_f64("q1_min", LANDSCAPE_Q1_RANGE.0);
    man.push_f64("q1_max", LANDSCAPE_Q1_RANGE.1);
    man.push_f64("q2_min", LANDSCAPE_Q2_RANGE.0);
    man.push_f64("q2_max", LANDSCAPE_Q2_RANGE.1);
    man.push_f64("nm_tol", NM_DEFAULT_TOL);
    for (i, nm) in result.nm.iter().enumerate() {
        let key = |s: &str| format!("nm{}_{s}", i + 1);
        man.push(&key("start"), comma_join_f64(&nm.start));
        man.push(&key("q1"), fmt_f64(nm.q[0]));
        man.push(&key("q2"), fmt_f64(nm.q[1]));
        man.push(&key("rho"), fmt_f64(nm.rho));
        man.push(&key("iterations"), nm.iterations);
        man.push(&key("converged"), nm.converged);
    }
    man.write(&manifest_path(&out)).map_err(runtime)?;

    println!(
        "landscape: {} grid rows + 2 minimizer rows -> {}",
        result.grid.len(),
        out.display()
    );
    for nm in &result.nm {
        println!(
            "  start ({}, {}) -> q = ({:.6}, {:.6}), rho = {:.6e}",
            nm.start[0], nm.start[1], nm.q[0], nm.q[1], nm.rho
        );
    }
    Ok(if result.nm.iter().all(|n| n.converged) {
        0
    } else {
        1
    })
}

// ---------------------------------------------------------------------------
// itercounts
// ---------------------------------------------------------------------------

pub fn itercounts(args: &ItercountsArgs) -> Result<i32, CliError> {
    let (selection, config) = match &args.from_manifest {
        Some(path) => {
            reject_flags(&[
                ("problem", args.problem.is_some()),
                ("param", args.param.is_some()),
                ("M", args.m.is_some()),
                ("dt", args.dt.is_some()),
                ("tol", args.tol.is_some()),
                ("N", args.n.is_some()),
                ("stencil", args.stencil.is_some()),
            ])?;
            let man = load_manifest(path, "itercounts")?;
            let problems: Vec<ProblemKey> = man.require_list("problems").map_err(usage)?;
            let mut selection = Vec::new();
            for key in problems {
                let params = man.require_list(&format!("params_{key}")).map_err(usage)?;
                selection.push((key, params));
            }
            let config = IterationCountsConfig {
                m: man.require("m").map_err(usage)?,
                dt: man.require("dt").map_err(usage)?,
                tol: man.require("tol").map_err(usage)?,
                max_iterations: man.require("max_iterations").map_err(usage)?,
                node_tol: man.require("node_tol").map_err(usage)?,
                workers: args
                    .workers
                    .unwrap_or(man.require("workers").map_err(usage)?),
                stencil: man.require("stencil").map_err(usage)?,
                n_override: man.optional("n").map_err(usage)?,
            };
            (selection, config)
        }
        None => {
            let selection = match (args.problem, &args.param) {
                (None, None) => study::default_selection(),
                (Some(key), None) => vec![(key, key.default_params())],
                (Some(key), Some(params)) => vec![(key, params.clone())],
                (None, Some(_)) => {
                    return Err(usage("--param requires --problem to name the sweep"));
                }
            };
            let defaults = IterationCountsConfig::default();
            let config = IterationCountsConfig {
                m: args.m.unwrap_or(defaults.m),
                dt: args.dt.unwrap_or(defaults.dt),
                tol: args.tol.unwrap_or(defaults.tol),
                stencil: args.stencil.unwrap_or(defaults.stencil),
                workers: args.workers.unwrap_or(defaults.workers),
                n_override: args.n,
                ..defaults
            };
            (selection, config)
        }
    };
    if selection.iter().any(|(_, params)| params.is_empty()) {
        return Err(usage("parameter list must be nonempty"));
    }
    let out = args.out.clone().unwrap_or_else(|| "itercounts.csv".into());

    let rows = study::iteration_counts(&selection, &config).map_err(runtime)?;

    let mut csv = String::from("problem,param,kind,iterations,converged\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            row.problem,
            fmt_f64(row.param),
            row.kind,
            row.iterations,
            row.converged
        ));
    }
    write_file(&out, &csv)?;

    let mut man = provenance("itercounts");
    man.push("m", config.m);
    man.push_f64("dt", config.dt);
    man.push_f64("tol", config.tol);
    man.push("max_iterations", config.max_iterations);
    man.push_f64("node_tol", config.node_tol);
    man.push("workers", config.workers);
    man.push("stencil", config.stencil);
    if let Some(n) = config.n_override {
        man.push("n", n);
    }
    let letters: Vec<&str> = selection.iter().map(|(k, _)| k.letter()).collect();
    man.push("problems", letters.join(","));
    for (key, params) in &selection {
        man.push(&format!("params_{key}"), comma_join_f64(params));
    }
    man.write(&manifest_path(&out)).map_err(runtime)?;

    let capped = rows.iter().filter(|r| !r.converged).count();
    println!(
        "itercounts: {} rows ({} hit the iteration cap) -> {}",
        rows.len(),
        capped,
        out.display()
    );
    // hitting the cap is a recorded outcome, not a failure
    Ok(0)
}

// ---------------------------------------------------------------------------
// convrates
// ---------------------------------------------------------------------------

/// Spatial resolution used by `--full` (the publication-scale grid).
pub const FULL_SCALE_N: usize = 2047;

pub fn convrates(args: &ConvratesArgs) -> Result<i32, CliError> {
    if args.full && args.n.is_some() {
        return Err(usage("--full already sets --N 2047; give one or the other"));
    }
    let config = match &args.from_manifest {
        Some(path) => {
            reject_flags(&[
                ("M", args.m.is_some()),
                ("T", args.t.is_some()),
                ("N", args.n.is_some()),
                ("full", args.full),
                ("param", args.param.is_some()),
                ("tol", args.tol.is_some()),
            ])?;
            let man = load_manifest(path, "convrates")?;
            RatesConfig {
                m: man.require("m").map_err(usage)?,
                t_end: man.require("t_end").map_err(usage)?,
                steps_list: man.require_list("steps").map_err(usage)?,
                n: man.require("n").map_err(usage)?,
                lambda0: man.require("lambda0").map_err(usage)?,
                nu: man.require("nu").map_err(usage)?,
                tol: man.require("tol").map_err(usage)?,
                node_tol: man.require("node_tol").map_err(usage)?,
                workers: args
                    .workers
                    .unwrap_or(man.require("workers").map_err(usage)?),
            }
        }
        None => {
            let defaults = RatesConfig::default();
            RatesConfig {
                m: args.m.unwrap_or(defaults.m),
                t_end: args.t.unwrap_or(defaults.t_end),
                n: if args.full {
                    FULL_SCALE_N
                } else {
                    args.n.unwrap_or(defaults.n)
                },
                lambda0: args.param.unwrap_or(defaults.lambda0),
                tol: args.tol.unwrap_or(defaults.tol),
                workers: args.workers.unwrap_or(defaults.workers),
                ..defaults
            }
        }
    };
    let out = args.out.clone().unwrap_or_else(|| "convrates.csv".into());

    // any non-converged sub-run is an error here (nonzero exit)
    let result = study::convergence_rates(&config).map_err(runtime)?;

    let mut csv = String::from("method,dt,error_iter2,error_iter3,ratio\n");
    for row in &result.rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            row.method.label(),
            fmt_f64(row.dt),
            fmt_f64(row.error_iter2),
            fmt_f64(row.error_iter3),
            fmt_f64(row.ratio)
        ));
    }
    write_file(&out, &csv)?;

    let mut man = provenance("convrates");
    man.push("m", config.m);
    man.push_f64("t_end", config.t_end);
    let steps: Vec<String> = config.steps_list.iter().map(|s| s.to_string()).collect();
    man.push("steps", steps.join(","));
    man.push("n", config.n);
    man.push_f64("lambda0", config.lambda0);
    man.push("nu", config.nu);
    man.push_f64("tol", config.tol);
    man.push_f64("node_tol", config.node_tol);
    man.push("workers", config.workers);
    man.push("slope_sdc", fmt_f64(result.slope_sdc));
    man.push("slope_simplified", fmt_f64(result.slope_simplified));
    man.push("slope_inexact", fmt_f64(result.slope_inexact));
    man.write(&manifest_path(&out)).map_err(runtime)?;

    println!("convrates: {} rows -> {}", result.rows.len(), out.display());
    println!("slope_sdc={}", fmt_f64(result.slope_sdc));
    println!("slope_simplified={}", fmt_f64(result.slope_simplified));
    println!("slope_inexact={}", fmt_f64(result.slope_inexact));
    Ok(0)
}

// ---------------------------------------------------------------------------
// single
// ---------------------------------------------------------------------------

struct SingleParams {
    problem: ProblemKey,
    param: f64,
    m: usize,
    dt: f64,
    steps: usize,
    tol: f64,
    method: Method,
    precond: Option<PrecondKind>,
    n: Option<usize>,
    stencil: Stencil,
    workers: usize,
}

/// Resolve `--dt`, `--T`, `--steps` (any two determine the third).
fn resolve_stepping(
    dt: Option<f64>,
    t: Option<f64>,
    steps: Option<usize>,
) -> Result<(f64, usize), CliError> {
    const DEFAULT_DT: f64 = 0.1;
    match (dt, t, steps) {
        (Some(_), Some(_), Some(_)) => Err(usage(
            "--dt, --T and --steps together overdetermine the run; give at most two",
        )),
        (dt, None, steps) => Ok((dt.unwrap_or(DEFAULT_DT), steps.unwrap_or(1))),
        (None, Some(t), Some(steps)) if steps > 0 => Ok((t / steps as f64, steps)),
        (None, Some(_), Some(_)) => Err(usage("--steps must be positive")),
        (dt, Some(t), None) => {
            let dt = dt.unwrap_or(DEFAULT_DT);
            let steps = (t / dt).round();
            if steps < 1.0 || (steps * dt - t).abs() > 1e-9 * t.abs().max(1.0) {
                return Err(usage(format!(
                    "--T {t} is not an integer multiple of --dt {dt}"
                )));
            }
            Ok((dt, steps as usize))
        }
    }
}

fn resolve_single(args: &SingleArgs) -> Result<SingleParams, CliError> {
    if let Some(path) = &args.from_manifest {
        reject_flags(&[
            ("problem", args.problem.is_some()),
            ("param", args.param.is_some()),
            ("M", args.m.is_some()),
            ("dt", args.dt.is_some()),
            ("T", args.t.is_some()),
            ("steps", args.steps.is_some()),
            ("tol", args.tol.is_some()),
            ("precond", args.precond.is_some()),
            ("method", args.method.is_some()),
            ("N", args.n.is_some()),
            ("stencil", args.stencil.is_some()),
        ])?;
        let man = load_manifest(path, "single")?;
        let method: Method = man.require("method").map_err(usage)?;
        return Ok(SingleParams {
            problem: man.require("problem").map_err(usage)?,
            param: man.require("param").map_err(usage)?,
            m: man.require("m").map_err(usage)?,
            dt: man.require("dt").map_err(usage)?,
            steps: man.require("steps").map_err(usage)?,
            tol: man.require("tol").map_err(usage)?,
            method,
            precond: man.optional("precond").map_err(usage)?,
            n: man.optional("n").map_err(usage)?,
            stencil: man
                .optional("stencil")
                .map_err(usage)?
                .unwrap_or(Stencil::Centered),
            workers: args
                .workers
                .unwrap_or(man.require("workers").map_err(usage)?),
        });
    }

    let problem = args.problem.unwrap_or(ProblemKey::Heat);
    let method = args.method.unwrap_or(Method::Sdc);
    let needs_precond = matches!(method, Method::Sdc | Method::InexactNewton);
    if args.precond.is_some() && !needs_precond {
        return Err(usage(format!(
            "--precond applies to sdc and inexact only, not {}",
            method.cli_token()
        )));
    }
    let (dt, steps) = resolve_stepping(args.dt, args.t, args.steps)?;
    Ok(SingleParams {
        problem,
        param: args.param.unwrap_or_else(|| problem.default_single_param()),
        m: args.m.unwrap_or(3),
        dt,
        steps,
        tol: args.tol.unwrap_or(1e-8),
        method,
        precond: if needs_precond {
            Some(args.precond.unwrap_or(PrecondKind::LU))
        } else {
            None
        },
        n: args.n.or(problem.default_n()),
        stencil: args.stencil.unwrap_or(Stencil::Centered),
        workers: args.workers.unwrap_or(1),
    })
}

pub fn single(args: &SingleArgs) -> Result<i32, CliError> {
    let p = resolve_single(args)?;
    if p.n.is_some() && p.problem.default_n().is_none() {
        return Err(usage(format!(
            "--N does not apply to problem {} (fixed dimension)",
            p.problem
        )));
    }
    let out = args.out.clone().unwrap_or_else(|| "run.csv".into());

    let problem = p.problem.build(p.param, p.n, p.stencil).map_err(runtime)?;
    let scheme = radau_right_scheme(p.m).map_err(runtime)?;
    let precond = p
        .precond
        .map(|kind| preconditioner_for(&scheme, kind))
        .transpose()
        .map_err(runtime)?;
    let diag = if p.method == Method::SimplifiedNewton {
        Some(QDiagonalization::from_scheme(&scheme).map_err(runtime)?)
    } else {
        None
    };
    let config = MethodConfig {
        tol: p.tol,
        workers: p.workers,
        ..MethodConfig::default()
    };
    let outcome = study::run_single(
        p.method,
        problem.as_ref(),
        &scheme,
        diag.as_ref(),
        precond.as_ref(),
        p.dt,
        p.steps,
        &config,
    )
    .map_err(runtime)?;

    let mut csv = String::from("step,iteration,residual,error\n");
    for (s, report) in outcome.reports.iter().enumerate() {
        for (i, &res) in report.residual_history.iter().enumerate() {
            let error = report
                .error_history
                .get(i)
                .map(|&e| fmt_f64(e))
                .unwrap_or_default();
            csv.push_str(&format!("{},{},{},{}\n", s + 1, i + 1, fmt_f64(res), error));
        }
    }
    write_file(&out, &csv)?;

    let solution_path = out.with_extension("solution.csv");
    let points = problem.grid().map(|g| g.points());
    let mut solution = String::from("index,x,u\n");
    for (i, &u) in outcome.final_state.iter().enumerate() {
        let x = points
            .as_ref()
            .map(|pts| fmt_f64(pts[i]))
            .unwrap_or_default();
        solution.push_str(&format!("{i},{x},{}\n", fmt_f64(u)));
    }
    write_file(&solution_path, &solution)?;

    let mut man = provenance("single");
    man.push("problem", p.problem);
    man.push_f64("param", p.param);
    man.push("m", p.m);
    man.push_f64("dt", p.dt);
    man.push("steps", p.steps);
    man.push_f64("t_end", p.dt * p.steps as f64);
    man.push_f64("tol", p.tol);
    man.push_f64("node_tol", config.node_tol);
    man.push("max_iterations", config.max_iter);
    man.push("method", p.method.cli_token());
    if let Some(kind) = p.precond {
        man.push("precond", kind);
    }
    if let Some(n) = p.n {
        man.push("n", n);
    }
    if p.problem == ProblemKey::Advection {
        man.push("stencil", p.stencil);
    }
    man.push("workers", p.workers);
    let total: usize = outcome.reports.iter().map(|r| r.iterations).sum();
    man.push("converged", outcome.all_converged());
    man.push("total_iterations", total);
    if let Some(last) = outcome.reports.last() {
        man.push("final_residual", fmt_f64(last.final_residual()));
        if let Some(&err) = last.error_history.last() {
            man.push("final_error", fmt_f64(err));
        }
    }
    man.write(&manifest_path(&out)).map_err(runtime)?;

    let label = match p.precond {
        Some(kind) => format!("{}({kind})", p.method.cli_token()),
        None => p.method.cli_token().to_string(),
    };
    println!(
        "single: problem {} ({}), {label}, M={}, dt={}, steps={} -> {} in {total} iterations -> {}",
        p.problem,
        p.problem.problem_name(),
        p.m,
        p.dt,
        p.steps,
        if outcome.all_converged() {
            "converged"
        } else {
            "NOT converged"
        },
        out.display()
    );
    Ok(if outcome.all_converged() { 0 } else { 1 })
}
