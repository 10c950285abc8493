use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

use super::output::{Artifact, Cell, Table};
use super::params::*;
use crate::counterexamples::{band_matrix, sign_matrix, verify_counterexample, CounterexampleReport};
use crate::dyadic::DyadicSpace;
use crate::error::{bail, Result};
use crate::harmonic::{
    apply_bilinear, apply_bilinear_direct, cross_norm, paraproduct, paraproduct_symbol, paraproduct_via_symbol,
    sigma_from_matrix, summand_spectrum_check, CrossKind, CrossOptions, GridFunction, Paraproduct, PeriodicGrid,
    Symbol,
};
use crate::lorentz::{check_conditions, lorentz_column_bound, make_weight, WeightKind, WeightSequence};
use crate::matrix::Matrix;
use crate::maximal::{
    bv_upper_bound, estimate_h, exact_h2_oracle, trivial_upper_bound, EstimateOptions, Mode, UpperRequest, H_estimate,
};
use crate::numeric::{stream_rng, C64};
use crate::symbols::{
    coefficient_table, equivalence_experiment, h_norm_estimate, log_log_slope, marcinkiewicz_symbol, resynthesize,
    EquivalenceOptions, EquivalenceRow, FamilyMember, HNormOptions, MultiplierOptions, SymbolFamily,
};

/// Relative spectral leakage above which a resolved paraproduct summand
/// counts as a numerical failure.
const LEAKAGE_TOL: f64 = 1e-10;

/// Everything a run produced, kept even when it stops early.
#[derive(Debug, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub notes: serde_json::Map<String, Value>,
    /// Set when results were computed but miss a quality target.
    pub failure: Option<String>,
}

impl Outcome {
    fn begin(&mut self, name: &str, columns: &[&str]) -> usize {
        self.artifacts.push(Artifact::Table { name: name.into(), table: Table::new(columns) });
        self.artifacts.len() - 1
    }

    fn push(&mut self, table: usize, row: Vec<Cell>) {
        match &mut self.artifacts[table] {
            Artifact::Table { table, .. } => table.push(row),
            Artifact::Grid { .. } => unreachable!("rows only go to tables"),
        }
    }

    fn note(&mut self, key: &str, value: Value) {
        self.notes.insert(key.into(), value);
    }

    fn fail(&mut self, message: String) {
        self.failure.get_or_insert(message);
    }
}

pub(crate) fn execute(command: &Command, seed: u64, out: &mut Outcome) -> Result<()> {
    match command {
        Command::HEstimate(a) => h_estimate(a, seed, out),
        Command::OracleCheck(a) => oracle_check(a, seed, out),
        Command::Counterexample(a) => counterexample(a, out),
        Command::BandBound(a) => band_bound(a, seed, out),
        Command::Lorentz(a) => lorentz(a, out),
        Command::LpDecay(a) => lp_decay(a, seed, out),
        Command::VrDecay(a) => vr_decay(a, seed, out),
        Command::BilinearApply(a) => bilinear_apply(a, seed, out),
        Command::Equivalence(a) => equivalence(a, seed, out),
        Command::Resynth(a) => resynth(a, out),
        Command::Paraproduct(a) => paraproduct_run(a, seed, out),
        Command::SymbolH(a) => symbol_h(a, seed, out),
    }
}

fn grid(points: Option<usize>, period: Option<f64>) -> Result<PeriodicGrid> {
    PeriodicGrid::new(1, points.unwrap_or(1024), period.unwrap_or(2.0))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        crate::Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn load_matrix(path: &Path) -> Result<Matrix> {
    Matrix::from_json(&read(path)?)
}

fn load_function(path: &Path) -> Result<GridFunction> {
    GridFunction::from_json(&read(path)?)
}

/// Real standard normal samples from stream `stream` of `seed`.
pub fn random_function(grid: PeriodicGrid, seed: u64, stream: u64) -> GridFunction {
    let mut rng = stream_rng(seed, stream);
    let values = (0..grid.points()).map(|_| C64::new(rng.sample(StandardNormal), 0.0)).collect();
    GridFunction::new(grid, values).expect("length matches the grid")
}

/// `f` and `g` from files when given, otherwise seeded random on `fallback`.
fn inputs(
    f: &Option<std::path::PathBuf>,
    g: &Option<std::path::PathBuf>,
    fallback: Result<PeriodicGrid>,
    seed: u64,
) -> Result<(GridFunction, GridFunction)> {
    let f = match f {
        Some(p) => load_function(p)?,
        None => random_function(fallback?, seed, 0),
    };
    let g = match g {
        Some(p) => load_function(p)?,
        None => random_function(f.grid(), seed, 1),
    };
    if f.grid() != g.grid() {
        bail!(Shape, "f and g live on different grids");
    }
    Ok((f, g))
}

fn parse_entries(s: &str) -> Result<Matrix> {
    let rows = s
        .split(';')
        .map(|r| {
            r.split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| crate::Error::Argument(format!("bad matrix entry {t:?}"))))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_real_rows(&rows)
}

fn order(n: i64) -> Result<usize> {
    if n < 1 {
        bail!(Argument, "orders must be positive, got {n}");
    }
    Ok(n as usize)
}

fn name_of<T: serde::Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn family(choice: FamilyChoice, theta: f64, n: usize) -> SymbolFamily {
    match choice {
        FamilyChoice::LogTheta => SymbolFamily::LogTheta { theta },
        FamilyChoice::Loglog => SymbolFamily::Loglog { theta },
        FamilyChoice::StrongLog => SymbolFamily::StrongLog { theta },
        FamilyChoice::Sign => SymbolFamily::PlainCounterexample { n, theta },
    }
}

fn h_estimate(a: &HEstimateArgs, seed: u64, out: &mut Outcome) -> Result<()> {
    let t = out.begin(
        "h_estimate",
        &[
            "quantity",
            "mode",
            "p",
            "q",
            "lower_bound",
            "upper_bound",
            "upper_provenance",
            "iterations",
            "restarts",
            "seed",
            "status",
        ],
    );
    let m = match (&a.matrix, &a.entries) {
        (Some(p), None) => load_matrix(p)?,
        (None, Some(s)) => parse_entries(s)?,
        _ => bail!(Argument, "give exactly one of --matrix and --entries"),
    };
    let p = a.p.unwrap_or(2.0);
    let mode = match a.mode.unwrap_or(ModeChoice::Strong) {
        ModeChoice::Strong => Mode::Strong { p },
        ModeChoice::Weak => Mode::Weak { p },
        ModeChoice::Mixed => Mode::Mixed { p, q: a.q.unwrap_or(p) },
    };
    let upper = match a.upper.unwrap_or(UpperChoice::Best) {
        UpperChoice::None => UpperRequest::None,
        UpperChoice::Bv => UpperRequest::Bv,
        UpperChoice::Trivial => UpperRequest::Trivial,
        UpperChoice::Best => UpperRequest::Best,
    };
    let defaults = EstimateOptions::default();
    let opts = EstimateOptions {
        restarts: a.restarts.unwrap_or(defaults.restarts),
        max_iters: a.max_iters.unwrap_or(defaults.max_iters),
        tol: a.tol.unwrap_or(defaults.tol),
        seed,
        levels: a.levels,
        upper,
    };
    let est = if a.bilinear { H_estimate(&m, mode, &opts)? } else { estimate_h(&m, mode, &opts)? };
    out.push(
        t,
        vec![
            if a.bilinear { "H" } else { "h" }.into(),
            name_of(&a.mode.unwrap_or(ModeChoice::Strong)).into(),
            mode.p().into(),
            mode.q().into(),
            est.lower_bound.into(),
            est.upper_bound.into(),
            est.upper_provenance.map_or(Cell::Empty, |p| name_of(&p).into()),
            est.iterations.into(),
            est.restarts.into(),
            est.seed.into(),
            name_of(&est.status).into(),
        ],
    );
    Ok(())
}

fn oracle_check(a: &OracleCheckArgs, seed: u64, out: &mut Outcome) -> Result<()> {
    let t = out.begin("oracle_check", &["trial", "rows", "cols", "estimate", "oracle", "abs_error", "pass"]);
    let trials = a.trials.unwrap_or(20);
    let (max_rows, max_cols) = (a.max_rows.unwrap_or(3), a.max_cols.unwrap_or(3));
    let levels = a.levels.unwrap_or(3);
    let tol = a.tol.unwrap_or(1e-6);
    if max_rows == 0 || max_cols == 0 || max_cols > levels {
        bail!(Argument, "need 1 ≤ max_rows, 1 ≤ max_cols ≤ levels");
    }
    let space = DyadicSpace::new(levels)?;
    let opts = EstimateOptions { restarts: a.restarts.unwrap_or(8), seed, levels: Some(levels), ..Default::default() };
    let mut failures = 0;
    for trial in 0..trials {
        let m = random_matrix(seed, trial as u64, max_rows, max_cols);
        let est = estimate_h(&m, Mode::strong(2.0), &opts)?.lower_bound;
        let exact = exact_h2_oracle(&m, space)?;
        let err = (est - exact).abs();
        let pass = err <= tol;
        failures += usize::from(!pass);
        out.push(
            t,
            vec![trial.into(), m.rows().into(), m.cols().into(), est.into(), exact.into(), err.into(), pass.into()],
        );
    }
    out.note("failures", json!(failures));
    if failures > 0 {
        out.fail(format!("{failures} of {trials} trials differ from the oracle by more than {tol}"));
    }
    Ok(())
}

/// Real matrix with uniform entries in `[−1, 1]` and random shape.
pub fn random_matrix(seed: u64, stream: u64, max_rows: usize, max_cols: usize) -> Matrix {
    let mut rng = stream_rng(seed, stream);
    let rows = rng.gen_range(1..=max_rows);
    let cols = rng.gen_range(1..=max_cols);
    let data: Vec<Vec<f64>> = (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect();
    Matrix::from_real_rows(&data).expect("finite entries")
}

fn counterexample(a: &CounterexampleArgs, out: &mut Outcome) -> Result<()> {
    let t = out.begin("counterexample", &CounterexampleReport::CSV_HEADER);
    let ns = a.n.unwrap_or(IntRange::new(2, 10));
    let thetas = a.theta.clone().unwrap_or(FloatList(vec![0.25]));
    let mut mismatches = 0;
    for n in ns.iter() {
        for &theta in &thetas.0 {
            let r = verify_counterexample(order(n)?, theta)?;
            mismatches += usize::from(!r.exact_match);
            out.push(t, vec![r.n.into(), r.theta.into(), r.ratio.into(), r.target.into(), r.exact_match.into()]);
        }
    }
    if mismatches > 0 {
        out.fail(format!("{mismatches} ratios differ from N^(1/2-theta)"));
    }
    Ok(())
}

fn weight(choice: WeightChoice) -> WeightKind {
    match choice {
        WeightChoice::Log => WeightKind::Log,
        WeightChoice::Loglog => WeightKind::Loglog,
    }
}

fn band_bound(a: &BandBoundArgs, seed: u64, out: &mut Outcome) -> Result<()> {
    let t = out.begin(
        "band_bound",
        &["size", "h_estimate", "log2_h", "bv_upper", "trivial_upper", "lorentz_column", "lorentz_crude"],
    );
    let kind = weight(a.weight.unwrap_or(WeightChoice::Log));
    let theta = a.theta.unwrap_or(2.0);
    let opts = EstimateOptions {
        restarts: a.restarts.unwrap_or(4),
        max_iters: a.max_iters.unwrap_or(200),
        seed,
        ..Default::default()
    };
    for size in a.sizes.unwrap_or(IntRange::new(4, 12)).iter() {
        let size = order(size)?;
        let w = make_weight(kind, theta, size)?;
        let m = band_matrix(&w, size)?;
        let h = estimate_h(&m, Mode::strong(2.0), &opts)?.lower_bound;
        let lb = lorentz_column_bound(&m, &w)?;
        out.push(
            t,
            vec![
                size.into(),
                h.into(),
                h.log2().into(),
                bv_upper_bound(&m).into(),
                trivial_upper_bound(&m).into(),
                lb.column.into(),
                lb.crude.into(),
            ],
        );
    }
    Ok(())
}

fn lorentz(a: &LorentzArgs, out: &mut Outcome) -> Result<()> {
    let t = out.begin(
        "lorentz",
        &["horizon", "cdn1_ratio_bound", "cdn2_partial_sum", "cdn2_block_decay", "cdn1_flag", "cdn2_flag"],
    );
    let w = match &a.values {
        Some(v) => WeightSequence::explicit(v.0.clone())?,
        None => make_weight(
            weight(a.weight.unwrap_or(WeightChoice::Log)),
            a.theta.unwrap_or(2.0),
            a.length.unwrap_or(4096),
        )?,
    };
    let horizon = a.horizon.unwrap_or(w.len());
    let r = check_conditions(&w, horizon)?;
    out.push(
        t,
        vec![
            r.horizon.into(),
            r.cdn1_ratio_bound.into(),
            r.cdn2_partial_sum.into(),
            r.cdn2_block_decay.into(),
            r.cdn1_flag.into(),
            r.cdn2_flag.into(),
        ],
    );
    out.note("cdn2_block_sums", json!(r.cdn2_block_sums));
    Ok(())
}

fn cross_options(tol: Option<f64>, max_iters: Option<usize>, seed: u64) -> CrossOptions {
    let d = CrossOptions::default();
    CrossOptions { tol: tol.unwrap_or(d.tol), max_iters: max_iters.unwrap_or(d.max_iters), seed }
}

/// Table of operator norms with a log₂ column and successive ratios.
fn decay_table(
    out: &mut Outcome,
    name: &str,
    index: &str,
    items: impl Iterator<Item = (i32, CrossKind)>,
    grid: PeriodicGrid,
    opts: &CrossOptions,
) -> Result<()> {
    let t = out.begin(name, &[index, "norm", "log2_norm", "ratio", "converged", "faithful"]);
    let mut prev: Option<f64> = None;
    let mut max_ratio = 0.0_f64;
    for (i, kind) in items {
        let c = cross_norm(kind, grid, opts)?;
        let ratio = prev.map(|p| c.value / p);
        if let Some(r) = ratio {
            max_ratio = max_ratio.max(r);
        }
        prev = Some(c.value);
        out.push(
            t,
            vec![i.into(), c.value.into(), c.value.log2().into(), ratio.into(), c.converged.into(), c.faithful.into()],
        );
    }
    out.note("max_ratio", json!(max_ratio));
    Ok(())
}

fn lp_decay(a: &LpDecayArgs, seed: u64, out: &mut Outcome) -> Result<()> {
    let g = grid(a.points, a.period)?;
    let k = a.level.unwrap_or(0);
    let js = a.j.unwrap_or(IntRange::new(1, 5));
    let items = js.iter().map(|j| (j as i32, CrossKind::MartThenLp { k, j: j as i32 }));
    decay_table(out, "lp_decay", "j", items, g, &cross_options(a.tol, a.max_iters, seed))
}

fn vr_decay(a: &VrDecayArgs, seed: u64, out: &mut Outcome) -> Result<()> {
    let g = grid(a.points, a.period)?;
    let rs = a.r.unwrap_or(IntRange::new(-5, 5));
    let items = rs.iter().map(|r| (r as i32, CrossKind::Vr { r: r as i32 }));
    decay_table(out, "vr_decay", "r", items, g, &cross_options(a.tol, a.max_iters, seed))
}

fn build_symbol(a: &BilinearApplyArgs, g: PeriodicGrid) -> Result<Symbol> {
    let theta = a.theta.unwrap_or(2.0);
    let n = a.n.unwrap_or(3);
    Ok(match a.symbol.unwrap_or(SymbolChoice::One) {
        SymbolChoice::One => Symbol::one(g),
        SymbolChoice::LogTheta => marcinkiewicz_symbol(family(FamilyChoice::LogTheta, theta, n), g)?,
        SymbolChoice::Loglog => marcinkiewicz_symbol(family(FamilyChoice::Loglog, theta, n), g)?,
        SymbolChoice::StrongLog => marcinkiewicz_symbol(family(FamilyChoice::StrongLog, theta, n), g)?,
        SymbolChoice::Sign => marcinkiewicz_symbol(family(FamilyChoice::Sign, theta, n), g)?,
        SymbolChoice::ParaproductLower => paraproduct_symbol(g, Paraproduct::Lower),
        SymbolChoice::ParaproductUpper => paraproduct_symbol(g, Paraproduct::Upper),
        SymbolChoice::ParaproductDiagonal => paraproduct_symbol(g, Paraproduct::Diagonal),
        SymbolChoice::Matrix => match &a.matrix {
            Some(p) => sigma_from_matrix(&load_matrix(p)?, g)?,
            None => bail!(Argument, "--symbol matrix needs --matrix"),
        },
    })
}

fn bilinear_apply(a: &BilinearApplyArgs, seed: u64, out: &mut Outcome) -> Result<()> {
    let (f, g) = inputs(&a.f, &a.g, grid(a.points, a.period), seed)?;
    let sigma = build_symbol(a, f.grid())?;
    let w = match a.method.unwrap_or(MethodChoice::Sweep) {
        MethodChoice::Sweep => apply_bilinear(&sigma, &f, &g)?,
        MethodChoice::Direct => apply_bilinear_direct(&sigma, &f, &g)?,
    };
    out.note("symbol", json!(sigma.meta.provenance));
    out.note("truncated_symbol", json!(sigma.meta.truncated));
    out.artifacts.push(Artifact::Grid { name: "bilinear".into(), function: w });
    Ok(())
}

fn equivalence(a: &EquivalenceArgs, seed: u64, out: &mut Outcome) -> Result<()> {
    let t = out.begin("equivalence", &EquivalenceRow::CSV_HEADER);
    let theta = a.theta.unwrap_or(0.25);
    let members: Vec<FamilyMember> = match a.family.unwrap_or(EquivalenceFamily::Sign) {
        EquivalenceFamily::Sign => a
            .n
            .unwrap_or(IntRange::new(2, 6))
            .iter()
            .map(|n| Ok(FamilyMember { size: n as f64, matrix: sign_matrix(order(n)?, theta)? }))
            .collect::<Result<_>>()?,
        EquivalenceFamily::Diagonal => {
            let base = sign_matrix(a.base_n.unwrap_or(3), theta)?;
            let scales = a.scales.clone().unwrap_or(FloatList(vec![1.0, 2.0, 4.0, 8.0]));
            scales.0.iter().map(|&c| FamilyMember { size: c, matrix: base.scale(C64::new(c, 0.0)) }).collect()
        }
    };
    let opts = EquivalenceOptions {
        grid: grid(a.points, a.period)?,
        multiplier: MultiplierOptions {
            restarts: a.restarts.unwrap_or(4),
            max_iters: a.max_iters.unwrap_or(60),
            seed,
            ..Default::default()
        },
        h: EstimateOptions { restarts: 4, seed, ..Default::default() },
    };
    let (p1, p2) = (a.p1.unwrap_or(2.0), a.p2.unwrap_or(2.0));
    let mut rows = Vec::new();
    for m in members {
        let row = equivalence_experiment(std::slice::from_ref(&m), p1, p2, &opts)?.remove(0);
        out.push(t, vec![row.size.into(), row.h_estimate.into(), row.mult_cert.into(), row.ratio.into()]);
        rows.push(row);
    }
    let sizes: Vec<f64> = rows.iter().map(|r| r.size).collect();
    let hs: Vec<f64> = rows.iter().map(|r| r.h_estimate).collect();
    let certs: Vec<f64> = rows.iter().map(|r| r.mult_cert).collect();
    out.note("slope_h", json!(log_log_slope(&sizes, &hs)));
    out.note("slope_mult", json!(log_log_slope(&sizes, &certs)));
    let truncated: Vec<f64> = rows.iter().filter(|r| r.truncated).map(|r| r.size).collect();
    out.note("truncated_sizes", json!(truncated));
    Ok(())
}

fn resynth(a: &ResynthArgs, out: &mut Outcome) -> Result<()> {
    let t = out.begin("resynth", &["cutoff", "sup_error", "log2_error"]);
    let g = grid(a.points, a.period)?;
    let sigma = marcinkiewicz_symbol(
        family(a.family.unwrap_or(FamilyChoice::LogTheta), a.theta.unwrap_or(2.0), a.n.unwrap_or(3)),
        g,
    )?;
    let idx = a.indices.unwrap_or(IntRange::new(-2, 3));
    let idx = idx.start as i32..=idx.end as i32;
    let cutoff = a.cutoff.unwrap_or(16);
    let table = coefficient_table(&sigma, idx.clone(), idx, cutoff, a.quadrature.unwrap_or(256))?;
    let r = resynthesize(&sigma, &table, cutoff)?.report;
    for e in &r.errors {
        out.push(t, vec![e.cutoff.into(), e.sup_error.into(), e.sup_error.log2().into()]);
    }
    out.note("monotone", json!(r.monotone));
    out.note("samples_per_axis", json!(r.samples));
    Ok(())
}

fn paraproduct_run(a: &ParaproductArgs, seed: u64, out: &mut Outcome) -> Result<()> {
    let t = out.begin("paraproduct_spectrum", &["j", "leakage", "peak", "resolved"]);
    let (f, g) = inputs(&a.f, &a.g, grid(a.points, a.period), seed)?;
    let which = match a.which.unwrap_or(ParaproductChoice::Lower) {
        ParaproductChoice::Lower => Paraproduct::Lower,
        ParaproductChoice::Upper => Paraproduct::Upper,
        ParaproductChoice::Diagonal => Paraproduct::Diagonal,
    };
    let band = f.grid().lp_band();
    let js = a.j.map_or(band.clone(), |r| r.start as i32..=r.end as i32);
    let mut leaks = 0;
    for j in js {
        let s = summand_spectrum_check(&f, &g, j)?;
        if s.resolved && s.leakage > LEAKAGE_TOL * s.peak.max(1.0) {
            leaks += 1;
        }
        out.push(t, vec![s.j.into(), s.leakage.into(), s.peak.into(), s.resolved.into()]);
    }
    if leaks > 0 {
        out.fail(format!("{leaks} resolved summands leak outside their annulus"));
    }
    let w = paraproduct(&f, &g, which)?;
    let via = paraproduct_via_symbol(&f, &g, which)?;
    out.note("path_distance", json!(w.sup_distance(&via)?));
    out.artifacts.push(Artifact::Grid { name: "paraproduct".into(), function: w });
    Ok(())
}

fn symbol_h(a: &SymbolHArgs, seed: u64, out: &mut Outcome) -> Result<()> {
    let t = out.begin("symbol_h", &["index_range", "value"]);
    let g = grid(a.points, a.period)?;
    let sigma = marcinkiewicz_symbol(
        family(a.family.unwrap_or(FamilyChoice::LogTheta), a.theta.unwrap_or(2.0), a.n.unwrap_or(3)),
        g,
    )?;
    let d = HNormOptions::default();
    let opts = HNormOptions {
        index_range: a.index_range.unwrap_or(d.index_range),
        samples: a.samples.unwrap_or(d.samples),
        order: a.order.unwrap_or(d.order),
        estimate: EstimateOptions { restarts: a.restarts.unwrap_or(d.estimate.restarts), seed, ..d.estimate },
    };
    let r = h_norm_estimate(&sigma, &opts, None)?;
    for v in &r.by_range {
        out.push(t, vec![v.index_range.into(), v.value.into()]);
    }
    out.note("argmax", json!([r.argmax.0, r.argmax.1]));
    out.note("interpolated", json!(r.interpolated));
    out.note("finite_differences", json!(r.finite_differences));
    Ok(())
}
