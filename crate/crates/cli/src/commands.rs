use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use lancaster_core::gibbs::{autocorrelation_vs_spectrum, exact_transition_matrix, run_x_chain, spectral_eigencheck};
use lancaster_core::lancaster::{verify_moment_representation, BivariateLancaster, Case};
use lancaster_core::orthopoly::{extended_recurrence, SupportKind};
use lancaster_core::real::format17;
use lancaster_core::triplekernel::{
    positivity_scan_with, write_scan_csv, KernelSpec, ScanOptions, Summation, DEFAULT_FILTERED_TRUNCATION,
    DEFAULT_TOL,
};
use serde_json::{json, Value};

use crate::params::{CliError, CliResult, Params};
use crate::specs;

/// Attaches the resolved configuration to a result.
fn with_config(config: Value, mut body: Value) -> Value {
    if let Value::Object(m) = &mut body {
        m.insert("config".into(), config);
    }
    body
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

pub fn build(mut p: Params) -> CliResult<Value> {
    let seq = specs::sequence(&mut p)?;
    let n = p.usize_or("N", lancaster_core::lancaster::DEFAULT_TRUNCATION)?;
    let biv = BivariateLancaster::new(seq, n)?;
    p.set("N", json!(biv.truncation));
    Ok(with_config(p.finish()?, biv.to_json()))
}

pub fn chain(mut p: Params, out: Option<&Path>) -> CliResult<Value> {
    let model = specs::model(&mut p)?;
    let margin = model.margin_x()?;
    let start = match p.opt_f64("start")? {
        Some(s) => s,
        None => {
            let mean = margin.mean();
            let s = if margin.is_discrete() { mean.round() } else { mean };
            p.set("start", json!(s));
            s
        }
    };
    if !model.in_support(start) {
        return Err(CliError::validation("start", format!("{start} is outside the support of the chain")));
    }
    let steps = p.usize_or("steps", 100_000)?;
    let seed = p.u64_or("seed", 0)?;
    let degree = p.usize_or("degree", 1)?;
    let max_lag = p.usize_or("max_lag", 10)?;
    let trace_path = match p.opt_str("trace")? {
        Some(t) => Some(PathBuf::from(t)),
        None => out.map(|o| o.with_extension("csv")),
    };
    let config = p.finish()?;

    let trace = run_x_chain(&model, start, steps, seed).map_err(|e| CliError::from_core(e, true))?;
    if let Some(path) = &trace_path {
        trace
            .write_csv(create(path)?)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
    }
    let basis = extended_recurrence(&margin, degree)?;
    let diagnostics = match autocorrelation_vs_spectrum(&trace, &basis, degree, max_lag) {
        Ok(fit) => {
            let analytic = model.eigenvalue(degree)?;
            json!({
                "degree": degree,
                "analytic_eigenvalue": format17(analytic),
                "fitted_rate": format17(fit.rate),
                "abs_error": format17((fit.rate - analytic).abs()),
                "within_ci": fit.ci_low <= analytic && analytic <= fit.ci_high,
                "fit": fit,
            })
        }
        Err(e) => json!({ "refused": e.to_string() }),
    };
    let body = json!({
        "trace": {
            "path": trace_path.map(|p| p.display().to_string()),
            "rows": trace.states.len(),
            "metadata": trace.metadata(),
        },
        "diagnostics": diagnostics,
    });
    Ok(with_config(config, body))
}

pub fn verify(mut p: Params) -> CliResult<Value> {
    let seq = specs::sequence(&mut p)?;
    let degree = p.usize_or("degree", 20)?;
    let case = match p.opt_str("case")? {
        Some(c) => match c.as_str() {
            "C" | "c" => Case::C,
            "D" | "d" => Case::D,
            other => return Err(CliError::validation("case", format!("unknown case {other:?}; expected C or D"))),
        },
        None => {
            let case = match seq.margins.0.support().kind() {
                SupportKind::Line => Case::C,
                SupportKind::LowerHalfLine => Case::D,
                other => {
                    return Err(CliError::validation(
                        "case",
                        format!("margins with support kind {other:?} fit neither case C nor case D"),
                    ))
                }
            };
            p.set("case", json!(case));
            case
        }
    };
    let report = verify_moment_representation(&seq, case, degree)?;
    let mut body = report.to_json();
    if report.notes.iter().any(|n| n.starts_with("known non-Lancaster")) {
        body["note"] = json!("known non-Lancaster");
    }
    body["sequence"] = seq.to_json();
    Ok(with_config(p.finish()?, body))
}

pub fn scan(mut p: Params) -> CliResult<Value> {
    let measure = specs::measure(&mut p, "measure")?;
    let atoms = measure.atom_count();
    let n = p.usize_or("N", atoms.map_or(DEFAULT_FILTERED_TRUNCATION, |a| a - 1))?;
    let summation = match p.str_or("summation", if atoms.is_some() { "partial" } else { "filtered" })?.as_str() {
        "partial" => Summation::Partial,
        "filtered" => Summation::Filtered,
        other => {
            return Err(CliError::validation(
                "summation",
                format!("unknown summation {other:?}; expected partial or filtered"),
            ))
        }
    };
    let spec = match p.opt_f64("x0")? {
        Some(x0) => KernelSpec::with_x0(measure, x0, n, summation)?,
        None => {
            let spec = KernelSpec::new(measure, n, summation)?;
            p.set("x0", json!(spec.x0));
            spec
        }
    };
    let opts = ScanOptions {
        grid_per_axis: p.usize_or("grid", 50)?,
        tol: p.f64_or("tol", DEFAULT_TOL)?,
        keep_cells: p.has("csv"),
    };
    let csv = p.opt_str("csv")?;
    let config = p.finish()?;
    let (report, cells) = positivity_scan_with(&spec, &opts)?;
    if let Some(path) = csv {
        let path = PathBuf::from(path);
        write_scan_csv(&cells, create(&path)?)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
    }
    let mut body = report.to_json();
    body["kernel"] = spec.to_json();
    Ok(with_config(config, body))
}

pub fn spectrum(mut p: Params) -> CliResult<Value> {
    let model = specs::model(&mut p)?;
    let top = model.margin_x()?.atom_count().map_or(8, |a| (a - 1).min(8));
    let degree = p.usize_or("degree", top)?;
    let resolution = p.usize_or("resolution", lancaster_core::gibbs::DEFAULT_RESOLUTION)?;
    let config = p.finish()?;
    let checks = (0..=degree)
        .map(|n| spectral_eigencheck(&model, n, resolution))
        .collect::<Result<Vec<_>, _>>()?;
    let worst = checks.iter().map(|c| c.residual).fold(0.0, f64::max);
    let mut body = json!({
        "model": model,
        "model_name": model.name(),
        "checks": checks,
        "max_residual": format17(worst),
    });
    if let Ok(t) = exact_transition_matrix(&model) {
        body["transition_matrix"] = t.to_json()?;
    }
    Ok(with_config(config, body))
}

pub fn quadrature_dump(mut p: Params) -> CliResult<Value> {
    let measure = specs::measure(&mut p, "measure")?;
    let nodes = p.usize_or("nodes", 10)?;
    if nodes == 0 {
        return Err(CliError::validation("nodes", "need at least one node"));
    }
    let config = p.finish()?;
    let basis = extended_recurrence(&measure, nodes - 1)?;
    let rule = basis.quadrature(nodes)?;
    let body = json!({
        "measure": measure,
        "recurrence": basis.to_json(),
        "nodes": rule.nodes.iter().map(|v| format17(*v)).collect::<Vec<_>>(),
        "weights": rule.weights.iter().map(|v| format17(*v)).collect::<Vec<_>>(),
    });
    Ok(with_config(config, body))
}
