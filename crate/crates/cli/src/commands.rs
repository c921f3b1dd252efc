//! One function per subcommand; each validates its parameters and returns an [`Output`].

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use lattice_defect::asymptotics::{field_band_edge, field_far_parallel, field_far_perpendicular, Ray};
use lattice_defect::greens::{
    greens_auto, greens_bessel_integral, greens_double_integral, greens_hypergeometric, greens_single_integral,
};
use lattice_defect::modes::{
    find_modes, r_of_omega_branches, reconstruct_field, search_interval, BISECT_WIDTH, EDGE_OFFSET, RESIDUAL_TOL,
};
use lattice_defect::oracle::truncated_spectrum;
use lattice_defect::waveguide::{
    dispersion_sweep, finite_vs_infinite_bracket, reject_omega_plus, skew_symmetric_waveguide_solution,
    standing_wave_frequencies, TrivialSolution,
};
use lattice_defect::{
    DefectConfig, FrequencyPoint, GreensIndex, ModeSolution, SeriesControl, Symmetry, TruncatedLattice, TruncatedMode,
};

use crate::config::{required, ConfigFile};
use crate::error::CliError;
use crate::output::{fmt_sig12, Cell, Output, Table};
use crate::{AsymArgs, AsymKind, BracketArgs, BranchesArgs, DispersionArgs, GreensArgs, ModesArgs, OracleArgs, Rep};

pub const TOOL: &str = "lattice-defect";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const QUAD_TOL: f64 = 1e-12;
const MAX_BATCH_INDEX: u32 = 64;
const DEFAULT_BRANCH_STEPS: usize = 200;
const DEFAULT_SAMPLES: usize = 512;
const DEFAULT_HALF_WIDTH: usize = 20;
const DEFAULT_WINDOW: (usize, usize) = (10, 10);

pub fn symmetry_label(s: Symmetry) -> &'static str {
    match s {
        Symmetry::Symmetric => "symmetric",
        Symmetry::SkewSymmetric => "skew_symmetric",
    }
}

pub fn defect(n: Option<usize>, r: Option<f64>) -> Result<DefectConfig, CliError> {
    Ok(DefectConfig::new(required(n, "n")?, required(r, "r")?)?)
}

pub fn parse_pair<T: FromStr>(text: &str, key: &str) -> Result<(T, T), CliError> {
    let bad = || CliError::Usage(format!("--{key} expects two comma-separated values, got `{text}`"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

/// Stop-band frequency from ω², rejected as a usage error outside the stop band.
pub fn stop_band_point(omega2: f64) -> Result<FrequencyPoint, CliError> {
    let f = FrequencyPoint::from_omega2(omega2)?;
    if !f.in_stop_band() {
        return Err(CliError::Usage(format!(
            "omega2 = {omega2} is not in the stop band (> 8)"
        )));
    }
    Ok(f)
}

pub fn select_mode(modes: &[ModeSolution], index: usize) -> Result<&ModeSolution, CliError> {
    if index == 0 || index > modes.len() {
        return Err(CliError::Usage(format!(
            "--mode-index {index} out of range; this configuration has {} mode(s)",
            modes.len()
        )));
    }
    Ok(&modes[index - 1])
}

pub fn evaluate_greens(rep: Rep, idx: GreensIndex, f: FrequencyPoint) -> lattice_defect::Result<f64> {
    match rep {
        Rep::Auto => greens_auto(idx, f),
        Rep::Double => greens_double_integral(idx, f, QUAD_TOL),
        Rep::Single => greens_single_integral(idx, f, QUAD_TOL),
        Rep::Bessel => greens_bessel_integral(idx, f, QUAD_TOL),
        Rep::Hyper => greens_hypergeometric(idx, f, &SeriesControl::default()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreensValue {
    pub omega2: f64,
    pub m: i64,
    pub n2: i64,
    pub value: f64,
}

pub fn greens(a: &GreensArgs, cfg: &ConfigFile) -> Result<Output, CliError> {
    let omega2 = required(cfg.pick(a.omega2, "omega2")?, "omega2")?;
    let rep = cfg.pick_enum(a.rep, "rep")?.unwrap_or(Rep::Auto);
    let f = stop_band_point(omega2)?;
    let mut table = Table::new(&["m", "n2", "value"]);
    if let Some(k) = cfg.pick(a.max_index, "max-index")? {
        if k > MAX_BATCH_INDEX {
            return Err(CliError::Usage(format!(
                "--max-index must be at most {MAX_BATCH_INDEX}"
            )));
        }
        let pairs: Vec<(i64, i64)> = (0..=k as i64)
            .flat_map(|m| (0..=k as i64).map(move |n| (m, n)))
            .collect();
        let values = pairs
            .par_iter()
            .map(|&(m, n)| evaluate_greens(rep, GreensIndex::new(m, n), f))
            .collect::<lattice_defect::Result<Vec<_>>>()?;
        let mut data = Vec::with_capacity(pairs.len());
        for (&(m, n2), value) in pairs.iter().zip(values) {
            table.push(vec![m.into(), n2.into(), value.into()]);
            data.push(GreensValue { omega2, m, n2, value });
        }
        return Ok(Output::table("greens", table).with_data(&data));
    }
    let m = required(cfg.pick(a.m, "m")?, "m")?;
    let n2 = required(cfg.pick(a.n2, "n2")?, "n2")?;
    let value = evaluate_greens(rep, GreensIndex::new(m, n2), f)?;
    table.push(vec![m.into(), n2.into(), value.into()]);
    let data = GreensValue { omega2, m, n2, value };
    Ok(Output::report("greens", &data, Some(table)).with_plain(format!("{}\n", fmt_sig12(value))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub n_defects: usize,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub bisection_width: f64,
    pub residual: f64,
    pub edge_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub tolerances: Tolerances,
}

impl Provenance {
    pub fn current() -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            tolerances: Tolerances {
                bisection_width: BISECT_WIDTH,
                residual: RESIDUAL_TOL,
                edge_offset: EDGE_OFFSET,
            },
        }
    }
}

/// The infinite-defect pass band [in-phase, out-of-phase] for the same r.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandBracket {
    pub band: [f64; 2],
    pub contained: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub config: ConfigEcho,
    pub modes: Vec<ModeSolution>,
    pub band: BandBracket,
    pub provenance: Provenance,
}

impl ModeReport {
    pub fn build(cfg: &DefectConfig, modes: Vec<ModeSolution>) -> Result<Self, CliError> {
        let (lo, hi) = standing_wave_frequencies(cfg.mass_ratio())?;
        let contained = modes.iter().map(|m| lo <= m.omega && m.omega <= hi).collect();
        Ok(Self {
            config: ConfigEcho {
                n_defects: cfg.n_defects(),
                r: cfg.mass_ratio(),
            },
            modes,
            band: BandBracket {
                band: [lo, hi],
                contained,
            },
            provenance: Provenance::current(),
        })
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["omega", "branch", "symmetry", "residual"]);
        for m in &self.modes {
            t.push(vec![
                m.omega.into(),
                m.branch_index.into(),
                symmetry_label(m.symmetry).into(),
                m.residual.into(),
            ]);
        }
        t
    }
}

pub fn field_table(cfg: &DefectConfig, mode: &ModeSolution, window: (usize, usize)) -> Result<Table, CliError> {
    let grid = reconstruct_field(cfg, mode, window)?;
    let mut t = Table::new(&["n1", "n2", "u"]);
    for n2 in grid.n2_range() {
        for n1 in grid.n1_range() {
            let u = grid.get(n1, n2).expect("inside window");
            t.push(vec![n1.into(), n2.into(), u.into()]);
        }
    }
    Ok(t)
}

pub fn modes(a: &ModesArgs, cfg: &ConfigFile) -> Result<Output, CliError> {
    let dc = defect(cfg.pick(a.n, "n")?, cfg.pick(a.r, "r")?)?;
    let field = cfg.pick_flag(a.field, "field")?;
    let found = find_modes(&dc)?;
    if field {
        let index = cfg.pick(a.mode_index, "mode-index")?.unwrap_or(1);
        let window = match cfg.pick(a.window.clone(), "window")? {
            Some(w) => parse_pair::<usize>(&w, "window")?,
            None => DEFAULT_WINDOW,
        };
        let mode = select_mode(&found, index)?;
        let table = field_table(&dc, mode, window)?;
        return Ok(Output::table("field", table));
    }
    let report = ModeReport::build(&dc, found)?;
    let table = report.table();
    Ok(Output::report("modes", &report, Some(table)))
}

pub fn branches(a: &BranchesArgs, cfg: &ConfigFile) -> Result<Output, CliError> {
    let n = required(cfg.pick(a.n, "n")?, "n")?;
    let lo = required(cfg.pick(a.omega2_min, "omega2-min")?, "omega2-min")?;
    let hi = required(cfg.pick(a.omega2_max, "omega2-max")?, "omega2-max")?;
    let steps = cfg.pick(a.steps, "steps")?.unwrap_or(DEFAULT_BRANCH_STEPS);
    if hi <= lo || steps < 2 {
        return Err(CliError::Usage("need omega2-max > omega2-min and steps >= 2".into()));
    }
    let grid = (0..steps)
        .map(|i| stop_band_point(lo + (hi - lo) * i as f64 / (steps - 1) as f64))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Output::table("branches", branch_table(n, &grid, false)?))
}

/// Long-format branch table; `isolated` adds the isolated-chain r*_{N,i}(ω).
pub fn branch_table(n: usize, grid: &[FrequencyPoint], isolated: bool) -> Result<Table, CliError> {
    use lattice_defect::modes::isolated_chain_mass_ratios;
    let bt = r_of_omega_branches(n, grid)?;
    let mut t = if isolated {
        Table::new(&["omega", "branch", "r", "r_isolated"])
    } else {
        Table::new(&["omega", "branch", "r"])
    };
    for (g, &omega) in bt.omegas.iter().enumerate() {
        let iso = isolated_chain_mass_ratios(n, omega);
        for (i, r) in bt.values[g].iter().enumerate() {
            let Some(r) = *r else { continue };
            let mut row: Vec<Cell> = vec![omega.into(), (i + 1).into(), r.into()];
            if isolated {
                row.push(iso[i].into());
            }
            t.push(row);
        }
    }
    Ok(t)
}

fn default_range(kind: AsymKind, n: usize) -> (i64, i64) {
    let n = n as i64;
    match kind {
        AsymKind::Parallel => (n, n + 39),
        AsymKind::Perp => (1, 40),
        AsymKind::EdgeBond => (-2, n + 4),
        AsymKind::EdgeDiag => (0, 8),
    }
}

/// Rows (index, exact, asymptotic) for one kind of asymptotic comparison.
pub fn asym_rows(
    dc: &DefectConfig,
    mode: &ModeSolution,
    kind: AsymKind,
    range: (i64, i64),
    column: i64,
) -> Result<Vec<(i64, f64, f64)>, CliError> {
    let (a, b) = range;
    if b < a {
        return Err(CliError::Usage(format!("empty range {a},{b}")));
    }
    let last = dc.n_defects() as i64 - 1;
    let span1 = |lo: i64, hi: i64| 0.max(-lo).max(hi - last) as usize;
    let window = match kind {
        AsymKind::Parallel | AsymKind::EdgeBond => (span1(a, b), 0),
        AsymKind::Perp => (span1(column, column), a.abs().max(b.abs()) as usize),
        AsymKind::EdgeDiag => (span1(a, b), a.abs().max(b.abs()) as usize),
    };
    let grid = reconstruct_field(dc, mode, window)?;
    (a..=b)
        .map(|k| {
            let (exact, est) = match kind {
                AsymKind::Parallel => (grid.get(k, 0), field_far_parallel(dc, mode, k)?),
                AsymKind::Perp => (grid.get(column, k), field_far_perpendicular(dc, mode, column, k)?),
                AsymKind::EdgeBond => (grid.get(k, 0), field_band_edge(dc, mode, Ray::Bond, k)?),
                AsymKind::EdgeDiag => (grid.get(k, k), field_band_edge(dc, mode, Ray::Diag, k)?),
            };
            Ok((k, exact.expect("window covers the range"), est.value))
        })
        .collect()
}

pub fn asym_table(rows: &[(i64, f64, f64)]) -> Table {
    let mut t = Table::new(&["index", "exact", "asymptotic", "rel_err"]);
    for &(k, exact, asym) in rows {
        t.push(vec![
            k.into(),
            exact.into(),
            asym.into(),
            ((asym - exact).abs() / exact.abs()).into(),
        ]);
    }
    t
}

pub fn asym(a: &AsymArgs, cfg: &ConfigFile) -> Result<Output, CliError> {
    let kind = required(cfg.pick_enum(a.kind, "kind")?, "kind")?;
    let dc = defect(cfg.pick(a.n, "n")?, cfg.pick(a.r, "r")?)?;
    let range = match cfg.pick(a.range.clone(), "range")? {
        Some(s) => parse_pair::<i64>(&s, "range")?,
        None => default_range(kind, dc.n_defects()),
    };
    let index = cfg.pick(a.mode_index, "mode-index")?.unwrap_or(1);
    let column = cfg.pick(a.column, "column")?.unwrap_or(0);
    let found = find_modes(&dc)?;
    let mode = select_mode(&found, index)?;
    let rows = asym_rows(&dc, mode, kind, range, column)?;
    Ok(Output::table("asym", asym_table(&rows)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionReport {
    pub r: f64,
    pub samples: Vec<lattice_defect::DispersionSample>,
    /// Every sampled κ rejects the second biquadratic root.
    pub omega_plus_rejected: bool,
    pub skew_symmetric: String,
}

pub fn dispersion_report(r: f64, samples: usize) -> Result<DispersionReport, CliError> {
    let sweep = dispersion_sweep(r, samples)?;
    let mut rejected = true;
    for s in &sweep {
        rejected &= reject_omega_plus(s.kappa, r)?.rejected;
    }
    let TrivialSolution = skew_symmetric_waveguide_solution();
    Ok(DispersionReport {
        r,
        samples: sweep,
        omega_plus_rejected: rejected,
        skew_symmetric: TrivialSolution::STATEMENT.into(),
    })
}

pub fn dispersion(a: &DispersionArgs, cfg: &ConfigFile) -> Result<Output, CliError> {
    let r = required(cfg.pick(a.r, "r")?, "r")?;
    let samples = cfg.pick(a.samples, "samples")?.unwrap_or(DEFAULT_SAMPLES);
    let report = dispersion_report(r, samples)?;
    let mut t = Table::new(&["kappa", "omega", "lambda"]);
    for s in &report.samples {
        t.push(vec![s.kappa.into(), s.omega_minus.into(), s.lambda.into()]);
    }
    Ok(Output::table("dispersion", t).with_data(&report))
}

pub fn bracket(a: &BracketArgs, cfg: &ConfigFile) -> Result<Output, CliError> {
    let n = required(cfg.pick(a.n, "n")?, "n")?;
    let r = required(cfg.pick(a.r, "r")?, "r")?;
    let report = finite_vs_infinite_bracket(n, r)?;
    let mut t = Table::new(&["omega", "branch", "symmetry", "contained"]);
    for m in &report.modes {
        t.push(vec![
            m.omega.into(),
            m.branch_index.into(),
            symmetry_label(m.symmetry).into(),
            m.contained.to_string().into(),
        ]);
    }
    Ok(Output::report("bracket", &report, Some(t)))
}

pub fn oracle_modes(n: usize, r: f64, half_width: usize) -> Result<Vec<TruncatedMode>, CliError> {
    let dc = DefectConfig::new(n, r)?;
    let lat = TruncatedLattice::from_defect(&dc, half_width)?;
    Ok(truncated_spectrum(&lat, search_interval(r))?)
}

pub fn oracle(a: &OracleArgs, cfg: &ConfigFile) -> Result<Output, CliError> {
    let n = required(cfg.pick(a.n, "n")?, "n")?;
    let r = required(cfg.pick(a.r, "r")?, "r")?;
    let half_width = cfg.pick(a.half_width, "L")?.unwrap_or(DEFAULT_HALF_WIDTH);
    let found = oracle_modes(n, r, half_width)?;
    let mut t = Table::new(&["omega", "score", "parity"]);
    for m in &found {
        t.push(vec![
            m.omega.into(),
            m.score.into(),
            m.parity.map(symmetry_label).unwrap_or("").into(),
        ]);
    }
    Ok(Output::report("oracle", &found, Some(t)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_report_round_trips() {
        let dc = DefectConfig::new(3, 0.4).unwrap();
        let report = ModeReport::build(&dc, find_modes(&dc).unwrap()).unwrap();
        let text = serde_json::to_string(&report).unwrap();
        let back: ModeReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        assert!(report.band.band[0] < report.band.band[1]);
    }

    #[test]
    fn pairs_parse() {
        assert_eq!(parse_pair::<i64>("-1, 3", "range").unwrap(), (-1, 3));
        assert!(parse_pair::<usize>("4", "window").is_err());
        assert!(parse_pair::<usize>("a,b", "window").is_err());
    }

    #[test]
    fn asym_window_covers_negative_indices() {
        let dc = DefectConfig::new(2, 0.49).unwrap();
        let modes = find_modes(&dc).unwrap();
        let rows = asym_rows(&dc, &modes[0], AsymKind::EdgeBond, (-2, 3), 0).unwrap();
        assert_eq!(rows.len(), 6);
        // symmetric about the pair midpoint
        assert!((rows[0].1 - rows[5].1).abs() < 1e-12);
    }
}
