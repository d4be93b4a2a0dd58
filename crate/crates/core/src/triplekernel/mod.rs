//! The triple-product kernel
//! K(x, y, z) = Σ p_n(x) p_n(y) p_n(z) / p_n(x0)
//! of an orthonormal system, its Jacobi closed form and grid scans for
//! negativity.

mod jacobi;

pub use jacobi::{
    elliptical_contour_check, extremal_sigma_z, jacobi_delta, jacobi_ka, kernel_constant_closed_form,
    JacobiKernel, SigmaZLaw, CALIBRATION_Z, DELTA_MARGIN,
};

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orthopoly::{extended_recurrence, MeasureSpec, RecurrenceCoeffs};
use crate::real;
use crate::series::{PartialSums, WINDOW};

/// Relative band for stabilization of kernel sums.
pub const KERNEL_BAND: f64 = 1e-6;
/// Default negativity tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Largest grid accepted per axis.
pub const MAX_GRID: usize = 200;
/// Default truncation for filtered sums on continuous margins.
pub const DEFAULT_FILTERED_TRUNCATION: usize = 4000;
/// Cutoffs of the filtered sums, as fractions of N.
pub const FILTER_LADDER: [f64; 5] = [0.8, 0.85, 0.9, 0.95, 1.0];
/// Smallest stabilized fraction for a nonnegative verdict.
pub const MIN_STABILIZED_FRACTION: f64 = 0.9;
/// Environment variable capping the scan thread count.
pub const THREADS_ENV: &str = "LANCASTER_LAB_THREADS";
const FILTER_STRENGTH: f64 = 36.0;
const FILTER_ORDER: i32 = 8;
const MAX_WITNESSES: usize = 32;

/// How the kernel series is summed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Summation {
    /// Plain partial sums S_0..S_N.
    Partial,
    /// Σ_{n ≤ M} exp(−36 (n/M)^8) t_n for M on [`FILTER_LADDER`]·N.
    Filtered,
}

/// exp(−36 η^8), the exponential filter at η = n/M.
pub fn filter_weight(n: usize, m: usize) -> f64 {
    if n > m {
        return 0.0;
    }
    let eta = n as f64 / m.max(1) as f64;
    (-FILTER_STRENGTH * eta.powi(FILTER_ORDER)).exp()
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelSpec {
    pub measure: MeasureSpec,
    pub basis: RecurrenceCoeffs,
    pub x0: f64,
    pub truncation: usize,
    pub summation: Summation,
    inv_x0: Vec<f64>,
}

impl KernelSpec {
    /// Uses the default normalization point of the measure: the right end of
    /// a compact support.
    pub fn new(measure: MeasureSpec, truncation: usize, summation: Summation) -> Result<Self> {
        let x0 = default_x0(&measure)?;
        Self::with_x0(measure, x0, truncation, summation)
    }

    pub fn with_x0(measure: MeasureSpec, x0: f64, truncation: usize, summation: Summation) -> Result<Self> {
        let basis = extended_recurrence(&measure, truncation)?;
        let p = basis.eval_all(truncation, x0)?;
        if let Some(n) = p.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidNormalizationPoint(format!(
                "p_{n}({x0}) = {} is not positive",
                p[n]
            )));
        }
        Ok(Self {
            measure,
            basis,
            x0,
            truncation,
            summation,
            inv_x0: p.iter().map(|v| 1.0 / v).collect(),
        })
    }

    /// True when the series is a finite sum over the whole basis of a
    /// finitely supported measure.
    pub fn is_complete(&self) -> bool {
        self.measure.atom_count() == Some(self.truncation + 1)
    }

    fn weights(&self) -> Vec<Vec<f64>> {
        let n = self.truncation;
        match self.summation {
            Summation::Partial => {
                let first = n + 1 - (n + 1).min(WINDOW);
                (first..=n).map(|m| (0..=n).map(|k| if k <= m { 1.0 } else { 0.0 }).collect()).collect()
            }
            Summation::Filtered => FILTER_LADDER
                .iter()
                .map(|f| {
                    let m = (f * n as f64).round() as usize;
                    (0..=n).map(|k| filter_weight(k, m)).collect()
                })
                .collect(),
        }
    }

    fn check_point(&self, what: &'static str, v: f64) -> Result<()> {
        let s = self.measure.support();
        if v >= s.lower && v <= s.upper {
            Ok(())
        } else {
            Err(Error::Domain {
                what,
                value: v,
                domain: format!("[{}, {}]", s.lower, s.upper),
            })
        }
    }

    fn terms(&self, x: f64, y: f64, z: f64) -> Result<Vec<f64>> {
        self.check_point("x", x)?;
        self.check_point("y", y)?;
        self.check_point("z", z)?;
        let n = self.truncation;
        let (px, py, pz) = (
            self.basis.eval_all(n, x)?,
            self.basis.eval_all(n, y)?,
            self.basis.eval_all(n, z)?,
        );
        Ok((0..=n).map(|k| px[k] * py[k] * pz[k] * self.inv_x0[k]).collect())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "measure": self.measure,
            "x0": real::format17(self.x0),
            "truncation": self.truncation,
            "summation": self.summation,
        })
    }
}

fn default_x0(measure: &MeasureSpec) -> Result<f64> {
    match measure {
        MeasureSpec::Beta { .. }
        | MeasureSpec::Binomial { .. }
        | MeasureSpec::BetaBinomial { .. }
        | MeasureSpec::CartierDunau { .. }
        | MeasureSpec::Discrete { .. } => Ok(measure.support().upper),
        _ => Err(Error::InvalidNormalizationPoint(format!(
            "{} has unbounded support and no point dominating its polynomials",
            measure.label()
        ))),
    }
}

/// Plain partial sums S_0..S_N of K(x, y, z). A complete finite sum counts
/// as stabilized, except at x = y = z = x0 where the kernel is flagged.
pub fn series_k(spec: &KernelSpec, x: f64, y: f64, z: f64) -> Result<PartialSums> {
    let terms = spec.terms(x, y, z)?;
    let mut s = PartialSums::from_terms(terms, KERNEL_BAND, 1.0);
    if spec.is_complete() && !at_x0(spec, x, y, z) {
        s.stabilized = s.last().is_finite();
    }
    Ok(s)
}

/// Filtered sums of K(x, y, z) at the cutoffs of [`FILTER_LADDER`].
pub fn filtered_k(spec: &KernelSpec, x: f64, y: f64, z: f64) -> Result<PartialSums> {
    let terms = spec.terms(x, y, z)?;
    let n = spec.truncation;
    let sums = FILTER_LADDER
        .iter()
        .map(|f| {
            let m = (f * n as f64).round() as usize;
            terms.iter().enumerate().map(|(k, t)| filter_weight(k, m) * t).sum()
        })
        .collect();
    Ok(PartialSums::from_sums(sums, KERNEL_BAND, 1.0))
}

/// The sums selected by `spec.summation`.
pub fn kernel_sums(spec: &KernelSpec, x: f64, y: f64, z: f64) -> Result<PartialSums> {
    match spec.summation {
        Summation::Partial => series_k(spec, x, y, z),
        Summation::Filtered => filtered_k(spec, x, y, z),
    }
}

fn at_x0(spec: &KernelSpec, x: f64, y: f64, z: f64) -> bool {
    x == spec.x0 && y == spec.x0 && z == spec.x0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanVerdict {
    NonnegativeOnGrid,
    NegativeWitness,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    #[serde(with = "real")]
    pub x: f64,
    #[serde(with = "real")]
    pub y: f64,
    #[serde(with = "real")]
    pub z: f64,
    #[serde(with = "real")]
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub measure: String,
    #[serde(with = "real")]
    pub x0: f64,
    pub truncation: usize,
    pub summation: Summation,
    pub grid_per_axis: usize,
    #[serde(with = "real::vec")]
    pub axis: Vec<f64>,
    pub cells: usize,
    #[serde(with = "real")]
    pub tol: f64,
    /// Smallest final sum among stabilized cells.
    pub min_stabilized: Option<GridPoint>,
    /// Smallest final sum over all cells.
    pub min_any: Option<GridPoint>,
    pub witnesses: Vec<GridPoint>,
    pub witness_count: usize,
    #[serde(with = "real")]
    pub stabilized_fraction: f64,
    pub verdict: ScanVerdict,
    /// No positivity result is known for this family.
    pub exploratory: bool,
    /// |p_n(g)| ≤ p_n(x0) held at every grid coordinate for n ≤ N.
    pub x0_hypothesis: bool,
    pub x0_violations: usize,
    pub notes: Vec<String>,
}

impl PositivityReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// One evaluated grid cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanCell {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub value: f64,
    pub stabilized: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions {
    pub grid_per_axis: usize,
    pub tol: f64,
    pub keep_cells: bool,
}

impl ScanOptions {
    pub fn new(grid_per_axis: usize) -> Self {
        Self {
            grid_per_axis,
            tol: DEFAULT_TOL,
            keep_cells: false,
        }
    }
}

/// Grid coordinates: every atom of a finite measure, otherwise the
/// midpoints of `g` equal cells of the support.
pub fn scan_axis(measure: &MeasureSpec, g: usize) -> Result<Vec<f64>> {
    if measure.atom_count().is_some() {
        let atoms = measure.atoms(0.0)?;
        if atoms.len() > MAX_GRID {
            return Err(Error::ResourceBudget(format!(
                "{} atoms per axis exceed the grid cap {MAX_GRID}",
                atoms.len()
            )));
        }
        return Ok(atoms.into_iter().map(|a| a.0).collect());
    }
    if g == 0 || g > MAX_GRID {
        return Err(Error::ResourceBudget(format!(
            "grid_per_axis = {g} must lie in 1..={MAX_GRID}"
        )));
    }
    let s = measure.support();
    let h = (s.upper - s.lower) / g as f64;
    Ok((0..g).map(|i| s.lower + (i as f64 + 0.5) * h).collect())
}

pub fn positivity_scan(spec: &KernelSpec, grid_per_axis: usize) -> Result<PositivityReport> {
    Ok(positivity_scan_with(spec, &ScanOptions::new(grid_per_axis))?.0)
}

/// Thread count from [`THREADS_ENV`], or rayon's default.
pub fn scan_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(0)
}

struct Slice {
    evaluated: usize,
    stabilized: usize,
    min_stabilized: Option<GridPoint>,
    min_any: Option<GridPoint>,
    witnesses: Vec<GridPoint>,
    witness_count: usize,
    cells: Vec<ScanCell>,
}

fn lower(best: &mut Option<GridPoint>, p: GridPoint) {
    if best.is_none_or(|b| p.value < b.value) {
        *best = Some(p);
    }
}

/// Evaluates the kernel sums on the cubic grid. Each z-slice is a set of
/// matrix products P diag(w) Pᵀ over the grid; slices run in parallel and
/// are reduced in z order.
pub fn positivity_scan_with(spec: &KernelSpec, opts: &ScanOptions) -> Result<(PositivityReport, Vec<ScanCell>)> {
    let axis = scan_axis(&spec.measure, opts.grid_per_axis)?;
    let g = axis.len();
    let n = spec.truncation;
    let mut p = DMatrix::<f64>::zeros(g, n + 1);
    let mut buf = vec![0.0; spec.basis.degree() + 1];
    let mut x0_violations = 0;
    for (i, &x) in axis.iter().enumerate() {
        spec.basis.eval_into(x, &mut buf);
        let mut bad = false;
        for k in 0..=n {
            p[(i, k)] = buf[k];
            bad |= buf[k].abs() > (1.0 + 1e-9) / spec.inv_x0[k] + 1e-12;
        }
        x0_violations += bad as usize;
    }
    let pt = p.transpose();
    let weights = spec.weights();
    let complete = spec.is_complete() && spec.summation == Summation::Partial;

    let slice = |k: usize| -> Slice {
        let z = axis[k];
        let levels: Vec<DMatrix<f64>> = weights
            .iter()
            .map(|w| {
                let v = DVector::from_fn(n + 1, |m, _| p[(k, m)] * spec.inv_x0[m] * w[m]);
                let mut b = pt.clone();
                for mut col in b.column_iter_mut() {
                    col.component_mul_assign(&v);
                }
                &p * b
            })
            .collect();
        let mut out = Slice {
            evaluated: 0,
            stabilized: 0,
            min_stabilized: None,
            min_any: None,
            witnesses: Vec::new(),
            witness_count: 0,
            cells: Vec::new(),
        };
        for i in 0..g {
            for j in 0..g {
                let (x, y) = (axis[i], axis[j]);
                if at_x0(spec, x, y, z) {
                    continue;
                }
                let sums: Vec<f64> = levels.iter().map(|s| s[(i, j)]).collect();
                let mut ps = PartialSums::from_sums(sums, KERNEL_BAND, 1.0);
                if complete {
                    ps.stabilized = ps.last().is_finite();
                }
                let point = GridPoint { x, y, z, value: ps.last() };
                out.evaluated += 1;
                lower(&mut out.min_any, point);
                if ps.stabilized {
                    out.stabilized += 1;
                    lower(&mut out.min_stabilized, point);
                    let negative = if complete { ps.last() < -opts.tol } else { ps.tail_below(opts.tol) };
                    if negative {
                        out.witness_count += 1;
                        if out.witnesses.len() < MAX_WITNESSES {
                            out.witnesses.push(point);
                        }
                    }
                }
                if opts.keep_cells {
                    out.cells.push(ScanCell {
                        x,
                        y,
                        z,
                        value: ps.last(),
                        stabilized: ps.stabilized,
                    });
                }
            }
        }
        out
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(scan_threads())
        .build()
        .map_err(|e| Error::ResourceBudget(format!("thread pool: {e}")))?;
    let slices: Vec<Slice> = pool.install(|| (0..g).into_par_iter().map(slice).collect());

    let mut evaluated = 0;
    let mut stabilized = 0;
    let mut min_stabilized = None;
    let mut min_any = None;
    let mut witnesses = Vec::new();
    let mut witness_count = 0;
    let mut cells = Vec::new();
    for s in slices {
        evaluated += s.evaluated;
        stabilized += s.stabilized;
        if let Some(p) = s.min_stabilized {
            lower(&mut min_stabilized, p);
        }
        if let Some(p) = s.min_any {
            lower(&mut min_any, p);
        }
        witness_count += s.witness_count;
        for w in s.witnesses {
            if witnesses.len() < MAX_WITNESSES {
                witnesses.push(w);
            }
        }
        cells.extend(s.cells);
    }
    let fraction = if evaluated == 0 { 0.0 } else { stabilized as f64 / evaluated as f64 };
    let verdict = if witness_count > 0 {
        ScanVerdict::NegativeWitness
    } else if fraction >= MIN_STABILIZED_FRACTION {
        ScanVerdict::NonnegativeOnGrid
    } else {
        ScanVerdict::Inconclusive
    };
    let exploratory = matches!(spec.measure, MeasureSpec::BetaBinomial { .. } | MeasureSpec::Discrete { .. });
    let mut notes = Vec::new();
    if exploratory {
        notes.push("exploratory: positivity of this kernel is an open question; no ground truth".into());
    }
    if matches!(spec.measure, MeasureSpec::CartierDunau { .. }) {
        notes.push("x0 taken as the right end of the support by convention".into());
    }
    if x0_violations > 0 {
        notes.push(format!(
            "|p_n| exceeds p_n(x0) at {x0_violations} grid coordinates; the kernel is not normalized by a dominating point"
        ));
    }
    if complete {
        notes.push("finite support: sums are exact, stabilization is not required".into());
    }
    let report = PositivityReport {
        measure: spec.measure.label(),
        x0: spec.x0,
        truncation: n,
        summation: spec.summation,
        grid_per_axis: g,
        axis,
        cells: evaluated,
        tol: opts.tol,
        min_stabilized,
        min_any,
        witnesses,
        witness_count,
        stabilized_fraction: fraction,
        verdict,
        exploratory,
        x0_hypothesis: x0_violations == 0,
        x0_violations,
        notes,
    };
    Ok((report, cells))
}

/// Writes cells as CSV with columns x, y, z, S_N, stabilized.
pub fn write_scan_csv<W: Write>(cells: &[ScanCell], mut w: W) -> std::io::Result<()> {
    writeln!(w, "x,y,z,S_N,stabilized")?;
    for c in cells {
        writeln!(
            w,
            "{},{},{},{},{}",
            real::format17(c.x),
            real::format17(c.y),
            real::format17(c.z),
            real::format17(c.value),
            c.stabilized
        )?;
    }
    Ok(())
}
