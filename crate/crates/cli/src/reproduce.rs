//! Plot-ready data behind each figure, written into one directory with a manifest.
//!
//! Data files carry no timestamps; `manifest.json` holds the only one.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use lattice_defect::modes::{branch_band_edge_limit, find_modes, printed_triplet_second_limit};
use lattice_defect::waveguide::{bracket_from_modes, envelope, mean_transverse_ratio};
use lattice_defect::{DefectConfig, FrequencyPoint, ModeSolution};

use crate::commands::{asym_rows, asym_table, branch_table, dispersion_report, field_table, ModeReport, TOOL, VERSION};
use crate::config::{required, ConfigFile};
use crate::error::CliError;
use crate::output::{json_envelope, Output, Table};
use crate::{AsymKind, Figure, ReproduceArgs};

const BRANCH_POINTS: usize = 240;
const FIELD_WINDOW: (usize, usize) = (10, 10);
const FAR_POINTS: i64 = 40;
const DISPERSION_SAMPLES: usize = 201;
pub const FIG6_RATIOS: [f64; 4] = [0.05, 0.25, 0.5, 0.75];

pub const ALL_FIGURES: [Figure; 9] = [
    Figure::Fig3a,
    Figure::Fig3b,
    Figure::Fig3c,
    Figure::Fig4,
    Figure::Fig5,
    Figure::Fig6,
    Figure::Fig7,
    Figure::Fig8,
    Figure::AppA,
];

pub fn figure_name(f: Figure) -> &'static str {
    match f {
        Figure::Fig3a => "fig3a",
        Figure::Fig3b => "fig3b",
        Figure::Fig3c => "fig3c",
        Figure::Fig4 => "fig4",
        Figure::Fig5 => "fig5",
        Figure::Fig6 => "fig6",
        Figure::Fig7 => "fig7",
        Figure::Fig8 => "fig8",
        Figure::AppA => "appA",
        Figure::All => "all",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureEntry {
    pub figure: String,
    pub files: Vec<FileEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub generated_at: String,
    pub figures: Vec<FigureEntry>,
}

struct Writer {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Writer {
    fn put(&mut self, name: &str, text: String) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, &text).map_err(|e| CliError::io(path.display().to_string(), e))?;
        self.files.push(FileEntry {
            name: name.into(),
            bytes: text.len(),
        });
        Ok(())
    }

    fn csv(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        self.put(name, table.to_csv()?)
    }

    fn json<T: Serialize>(&mut self, name: &str, schema: &str, data: &T) -> Result<(), CliError> {
        let value = serde_json::to_value(data).expect("report types serialize");
        self.put(name, json_envelope(schema, &value))
    }
}

pub fn run(a: &ReproduceArgs, cfg: &ConfigFile) -> Result<Output, CliError> {
    let figure = required(cfg.pick_enum(a.figure, "figure")?, "figure")?;
    let dir = required(cfg.pick(a.out.clone(), "out")?, "out")?;
    let manifest = reproduce(figure, &dir)?;
    Ok(Output::report("manifest", &manifest, None))
}

/// Write the requested figure data (or all of it) into `dir` and return the manifest.
pub fn reproduce(figure: Figure, dir: &Path) -> Result<Manifest, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;
    let list: Vec<Figure> = if figure == Figure::All {
        ALL_FIGURES.to_vec()
    } else {
        vec![figure]
    };
    let mut figures = Vec::new();
    for f in list {
        let mut w = Writer {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        };
        match f {
            Figure::Fig3a => fig3(&mut w, "fig3a", 1)?,
            Figure::Fig3b => fig3(&mut w, "fig3b", 2)?,
            Figure::Fig3c => fig3(&mut w, "fig3c", 3)?,
            Figure::Fig4 => fig4(&mut w)?,
            Figure::Fig5 => fig5(&mut w)?,
            Figure::Fig6 => fig6(&mut w)?,
            Figure::Fig7 => fig7(&mut w)?,
            Figure::Fig8 => fig8(&mut w)?,
            Figure::AppA => app_a(&mut w)?,
            Figure::All => unreachable!("expanded above"),
        }
        figures.push(FigureEntry {
            figure: figure_name(f).into(),
            files: w.files,
        });
    }
    let manifest = Manifest {
        tool: TOOL.into(),
        version: VERSION.into(),
        generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        figures,
    };
    let path = dir.join("manifest.json");
    let value = serde_json::to_value(&manifest).expect("manifest serializes");
    std::fs::write(&path, json_envelope("manifest", &value))
        .map_err(|e| CliError::io(path.display().to_string(), e))?;
    Ok(manifest)
}

/// Geometric grid in ω² − 8 from 1e-4 to 92 (ω up to 10).
fn branch_grid() -> Result<Vec<FrequencyPoint>, CliError> {
    let (lo, hi) = (1e-4f64.ln(), 92f64.ln());
    (0..BRANCH_POINTS)
        .map(|i| {
            let t = lo + (hi - lo) * i as f64 / (BRANCH_POINTS - 1) as f64;
            Ok(FrequencyPoint::from_omega2(8.0 + t.exp())?)
        })
        .collect()
}

fn fig3(w: &mut Writer, name: &str, n: usize) -> Result<(), CliError> {
    let table = branch_table(n, &branch_grid()?, true)?;
    w.csv(&format!("{name}_branches.csv"), &table)?;
    let limits = (1..=n)
        .map(|i| Ok(json!({ "branch": i, "r_max": branch_band_edge_limit(n, i)? })))
        .collect::<Result<Vec<Value>, CliError>>()?;
    let mut data = json!({ "n_defects": n, "band_edge_limits": limits });
    if n == 3 {
        data["printed_second_branch_limit"] = json!(printed_triplet_second_limit());
    }
    w.json(&format!("{name}_limits.json"), "limits", &data)
}

fn solve(n: usize, r: f64) -> Result<(DefectConfig, Vec<ModeSolution>), CliError> {
    let dc = DefectConfig::new(n, r)?;
    let modes = find_modes(&dc)?;
    Ok((dc, modes))
}

fn line(
    w: &mut Writer,
    name: &str,
    dc: &DefectConfig,
    mode: &ModeSolution,
    kind: AsymKind,
    range: (i64, i64),
    column: i64,
) -> Result<(), CliError> {
    let rows = asym_rows(dc, mode, kind, range, column)?;
    w.csv(name, &asym_table(&rows))
}

/// Fields and far-field lines shared by the pair and triplet figures.
fn mode_lines(
    w: &mut Writer,
    prefix: &str,
    dc: &DefectConfig,
    modes: &[ModeSolution],
    columns: &[i64],
) -> Result<(), CliError> {
    let n = dc.n_defects() as i64;
    for (i, mode) in modes.iter().enumerate() {
        let tag = format!("{prefix}_mode{}", i + 1);
        w.csv(&format!("{tag}_field.csv"), &field_table(dc, mode, FIELD_WINDOW)?)?;
        line(
            w,
            &format!("{tag}_n2_0.csv"),
            dc,
            mode,
            AsymKind::Parallel,
            (n, n + FAR_POINTS - 1),
            0,
        )?;
        for &c in columns {
            line(
                w,
                &format!("{tag}_n1_{c}.csv"),
                dc,
                mode,
                AsymKind::Perp,
                (1, FAR_POINTS),
                c,
            )?;
        }
    }
    Ok(())
}

fn fig4(w: &mut Writer) -> Result<(), CliError> {
    let (dc, modes) = solve(1, 0.8)?;
    let mode = &modes[0];
    w.json("fig4_mode.json", "modes", &ModeReport::build(&dc, modes.clone())?)?;
    w.csv("fig4_field.csv", &field_table(&dc, mode, FIELD_WINDOW)?)?;
    line(w, "fig4_n2_0.csv", &dc, mode, AsymKind::Parallel, (1, FAR_POINTS), 0)?;
    line(w, "fig4_diag_band_edge.csv", &dc, mode, AsymKind::EdgeDiag, (0, 8), 0)?;
    line(w, "fig4_bond_band_edge.csv", &dc, mode, AsymKind::EdgeBond, (0, 8), 0)
}

fn fig5(w: &mut Writer) -> Result<(), CliError> {
    let (dc, modes) = solve(2, 0.49)?;
    w.json("fig5_modes.json", "modes", &ModeReport::build(&dc, modes.clone())?)?;
    mode_lines(w, "fig5", &dc, &modes, &[0])?;
    line(
        w,
        "fig5_mode1_bond_band_edge.csv",
        &dc,
        &modes[0],
        AsymKind::EdgeBond,
        (-2, 6),
        0,
    )
}

fn dispersion_rows(t: &mut Table, r: f64) -> Result<(), CliError> {
    for s in dispersion_report(r, DISPERSION_SAMPLES)?.samples {
        t.push(vec![
            r.into(),
            s.kappa.into(),
            (s.kappa / std::f64::consts::PI).into(),
            s.omega_minus.into(),
            s.lambda.into(),
        ]);
    }
    Ok(())
}

fn fig6(w: &mut Writer) -> Result<(), CliError> {
    let mut t = Table::new(&["r", "kappa", "kappa_over_pi", "omega", "lambda"]);
    for r in FIG6_RATIOS {
        dispersion_rows(&mut t, r)?;
    }
    w.csv("fig6_dispersion.csv", &t)
}

fn fig7(w: &mut Writer) -> Result<(), CliError> {
    let mut t = Table::new(&["r", "kappa", "kappa_over_pi", "omega", "lambda"]);
    dispersion_rows(&mut t, 0.25)?;
    w.csv("fig7_dispersion.csv", &t)?;
    let (dc, modes) = solve(20, 0.25)?;
    w.json("fig7_bracket.json", "bracket", &bracket_from_modes(&dc, &modes)?)
}

fn fig8(w: &mut Writer) -> Result<(), CliError> {
    let (dc, modes) = solve(20, 0.25)?;
    let lowest = modes.first().expect("N = 20 has modes");
    let highest = modes.last().expect("N = 20 has modes");
    let env = envelope(20, 0.25, lowest.omega, 1)?;
    // align the envelope sign with each exact mode
    let dot = |u: &[f64], s: f64| -> f64 {
        u.iter()
            .zip(&env.profile)
            .enumerate()
            .map(|(i, (a, b))| a * b * if s < 0.0 && i % 2 == 1 { -1.0 } else { 1.0 })
            .sum()
    };
    let s_low = dot(&lowest.eigenvector, 1.0).signum();
    let s_high = dot(&highest.eigenvector, -1.0).signum();
    let mut t = Table::new(&["eta", "u_min", "u_max", "envelope", "envelope_staggered"]);
    for (eta, &p) in env.profile.iter().enumerate() {
        let stagger = if eta % 2 == 1 { -1.0 } else { 1.0 };
        t.push(vec![
            eta.into(),
            lowest.eigenvector[eta].into(),
            highest.eigenvector[eta].into(),
            (s_low * p).into(),
            (s_high * stagger * p).into(),
        ]);
    }
    w.csv("fig8_modes.csv", &t)?;
    let summary = json!({
        "n_defects": 20,
        "r": 0.25,
        "omega_min": lowest.omega,
        "omega_max": highest.omega,
        "lambda_est": env.lambda_est,
        "mean_transverse_ratio": mean_transverse_ratio(&dc, lowest)?,
    });
    w.json("fig8_summary.json", "envelope", &summary)
}

fn app_a(w: &mut Writer) -> Result<(), CliError> {
    let (dc, modes) = solve(3, 0.4)?;
    w.json("appA_modes.json", "modes", &ModeReport::build(&dc, modes.clone())?)?;
    mode_lines(w, "appA", &dc, &modes, &[0, 1])?;
    line(
        w,
        "appA_mode1_bond_band_edge.csv",
        &dc,
        &modes[0],
        AsymKind::EdgeBond,
        (-1, 5),
        0,
    )
}
