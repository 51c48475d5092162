//! Subcommand bodies. Each writes its files into one directory plus a manifest.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use compaction_core::asymptotics::{build_wave_profile, solve_c};
use compaction_core::pde::{estimate_wave_speed, Simulation};
use compaction_core::verify::{
    convergence_study, cross_validate_speed, residual_battery, SPEED_TOL, WINDOW_FRACTION,
};
use rayon::prelude::*;

use crate::config::{self, describe, Resolved};
use crate::error::{CliError, ConfigError};
use crate::manifest::{Options, RunManifest};
use crate::output::{gnuplot_script, num, write_csv, Panel};

pub const DEFAULT_PROFILE_POINTS: usize = 401;
pub const PLOT_FILE: &str = "plot.gp";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Simulate,
    Wave,
    Speed,
    Verify,
    Sweep,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Simulate => "simulate",
            Subcommand::Wave => "wave",
            Subcommand::Speed => "speed",
            Subcommand::Verify => "verify",
            Subcommand::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "simulate" => Subcommand::Simulate,
            "wave" => Subcommand::Wave,
            "speed" => Subcommand::Speed,
            "verify" => Subcommand::Verify,
            "sweep" => Subcommand::Sweep,
            _ => return Err(format!("unknown subcommand `{s}`")),
        })
    }
}

/// Where the configuration comes from.
#[derive(Debug, Clone)]
pub enum Source {
    Defaults,
    Config(PathBuf),
    Manifest(PathBuf),
}

#[derive(Debug, Clone)]
pub struct Invocation {
    pub subcommand: Subcommand,
    pub options: Options,
    pub source: Source,
    pub out: PathBuf,
}

/// What a finished subcommand produced.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// False when a verification check failed.
    pub passed: bool,
    /// Human-readable summary for standard output.
    pub lines: Vec<String>,
    pub warnings: Vec<String>,
    c_num: Option<f64>,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.passed {
            0
        } else {
            3
        }
    }
}

fn load(inv: &Invocation) -> Result<(Resolved, Options), CliError> {
    match &inv.source {
        Source::Defaults => Ok((config::parse_config("")?, inv.options.clone())),
        Source::Config(path) => {
            let text = fs::read_to_string(path).map_err(CliError::io(path))?;
            Ok((config::parse_config(&text)?, inv.options.clone()))
        }
        Source::Manifest(path) => {
            let m = RunManifest::load(path)?;
            if m.subcommand != inv.subcommand.name() {
                return Err(ConfigError::Manifest {
                    path: path.clone(),
                    message: format!("records `{}`, not `{}`", m.subcommand, inv.subcommand),
                }
                .into());
            }
            let mut options = m.options.clone();
            options.plot |= inv.options.plot;
            Ok((config::resolve(m.doc())?, options))
        }
    }
}

/// Runs a subcommand end to end.
pub fn execute(inv: &Invocation) -> Result<Outcome, CliError> {
    let (resolved, options) = load(inv)?;
    run_in(inv.subcommand, &resolved, &options, &inv.out)
}

fn run_in(
    sub: Subcommand,
    r: &Resolved,
    options: &Options,
    dir: &Path,
) -> Result<Outcome, CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let mut outcome = match sub {
        Subcommand::Simulate => simulate(r, options, dir)?,
        Subcommand::Wave => wave(r, options, dir)?,
        Subcommand::Speed => speed(r, dir)?,
        Subcommand::Verify => verify(r, options, dir)?,
        Subcommand::Sweep => sweep(r, options, dir)?,
    };
    outcome
        .warnings
        .splice(0..0, r.warnings.iter().map(describe));
    let names = outcome
        .files
        .iter()
        .filter_map(|p| p.strip_prefix(dir).ok())
        .map(|p| p.display().to_string())
        .collect();
    let manifest = RunManifest::new(sub.name(), &r.doc, options, names).write(dir)?;
    outcome.files.push(manifest);
    Ok(outcome)
}

fn plot(
    dir: &Path,
    title: &str,
    panels: &[Panel],
    files: &mut Vec<PathBuf>,
) -> Result<(), CliError> {
    let path = dir.join(PLOT_FILE);
    fs::write(&path, gnuplot_script(title, panels)).map_err(CliError::io(&path))?;
    files.push(path);
    Ok(())
}

fn simulate(r: &Resolved, options: &Options, dir: &Path) -> Result<Outcome, CliError> {
    let series = Simulation::new(r.params, r.config)?.run()?;
    let ts = dir.join("timeseries.csv");
    write_csv(
        &ts,
        "timeseries",
        &["t", "h", "hdot"],
        series.samples.iter().map(|s| [s.t, s.h, s.hdot].map(num)),
    )?;
    let state = &series.final_state;
    let profile = dir.join("profile.csv");
    write_csv(
        &profile,
        "profile",
        &["z", "phi", "psi"],
        (0..state.len()).map(|i| [state.depth(i), state.phi[i], state.psi[i]].map(num)),
    )?;
    let mut files = vec![ts, profile];
    if options.plot {
        plot(
            dir,
            "simulate",
            &[
                ("timeseries.csv", &[(1, 2, "h"), (1, 3, "hdot")]),
                ("profile.csv", &[(1, 2, "phi"), (1, 3, "psi")]),
            ],
            &mut files,
        )?;
    }
    let last = series.last();
    let mut lines = vec![format!(
        "t = {}, h = {}, hdot = {}",
        last.t, last.h, last.hdot
    )];
    let mut c_num = None;
    if let Ok(fit) = estimate_wave_speed(&series, WINDOW_FRACTION) {
        lines.push(format!("c_num = {} (R^2 = {})", fit.c_num, fit.r_squared));
        c_num = Some(fit.c_num);
    }
    lines.push(format!(
        "{} steps accepted, {} rejected, {} corrector sweeps",
        series.stats.accepted, series.stats.rejected, series.stats.sweeps
    ));
    Ok(Outcome {
        files,
        passed: true,
        lines,
        c_num,
        ..Outcome::default()
    })
}

fn speed_file(
    r: &Resolved,
    dir: &Path,
) -> Result<(PathBuf, compaction_core::asymptotics::MatchResult), CliError> {
    let m = solve_c(&r.params, SPEED_TOL)?;
    let path = dir.join("speed.csv");
    write_csv(
        &path,
        "speed",
        &["c", "phi_inf", "C", "residual", "iterations"],
        [[
            num(m.c),
            num(m.phi_inf),
            num(m.c_norm),
            num(m.residual),
            m.iterations.to_string(),
        ]],
    )?;
    Ok((path, m))
}

fn speed(r: &Resolved, dir: &Path) -> Result<Outcome, CliError> {
    let (path, m) = speed_file(r, dir)?;
    let lines = vec![format!(
        "c = {}, residual = {:e}, Phi_inf = {}, C = {}",
        m.c, m.residual, m.phi_inf, m.c_norm
    )];
    Ok(Outcome {
        files: vec![path],
        passed: true,
        lines,
        ..Outcome::default()
    })
}

fn wave(r: &Resolved, options: &Options, dir: &Path) -> Result<Outcome, CliError> {
    let (speed_path, m) = speed_file(r, dir)?;
    let prof = build_wave_profile(
        &m,
        &r.params,
        options.points.unwrap_or(DEFAULT_PROFILE_POINTS),
    )?;
    let path = dir.join("profile.csv");
    write_csv(
        &path,
        "profile",
        &["zeta", "phi", "psi", "region"],
        (0..prof.zeta.len()).map(|i| {
            [
                num(prof.zeta[i]),
                num(prof.phi[i]),
                num(prof.psi[i]),
                prof.region[i].label().to_string(),
            ]
        }),
    )?;
    let mut files = vec![speed_path, path];
    if options.plot {
        plot(
            dir,
            "wave",
            &[("profile.csv", &[(1, 2, "phi"), (1, 3, "psi")])],
            &mut files,
        )?;
    }
    let lines = vec![
        format!("c = {}, residual = {:e}", m.c, m.residual),
        format!(
            "seam at |zeta| = {}, relative seam defect {}",
            prof.seam, prof.seam_defect
        ),
    ];
    Ok(Outcome {
        files,
        passed: true,
        lines,
        ..Outcome::default()
    })
}

fn verify(r: &Resolved, options: &Options, dir: &Path) -> Result<Outcome, CliError> {
    let mut report = residual_battery(&r.params);
    if options.full {
        report.merge(cross_validate_speed(&r.params, &r.config)?);
        report.merge(convergence_study(&r.params, &r.config, 3)?);
    }
    let path = dir.join("report.csv");
    write_csv(
        &path,
        "report",
        &["check", "value", "tolerance", "pass"],
        report.checks.iter().map(|c| {
            [
                c.name.clone(),
                num(c.value),
                num(c.tolerance),
                c.pass.to_string(),
            ]
        }),
    )?;
    let mut lines: Vec<String> = report
        .checks
        .iter()
        .map(|c| {
            format!(
                "{:<28} {:>12.4e}  tol {:<10e} {}",
                c.name,
                c.value,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" }
            )
        })
        .collect();
    if let Some(s) = &report.speed {
        lines.push(format!(
            "c_num = {}, c_asym = {}, relative gap {}",
            s.c_num, s.c_asym, s.relative_gap
        ));
    }
    lines.extend(
        report
            .orders
            .iter()
            .map(|(name, order)| format!("order {name} = {order}")),
    );
    lines.extend(
        report
            .seam_defects
            .iter()
            .map(|d| format!("seam defect {d}")),
    );
    lines.extend(report.flags.iter().map(|f| format!("note: {f}")));
    Ok(Outcome {
        files: vec![path],
        passed: report.passed(),
        lines,
        ..Outcome::default()
    })
}

fn sweep(r: &Resolved, options: &Options, dir: &Path) -> Result<Outcome, CliError> {
    let name = options.task.as_deref().unwrap_or("speed");
    let task = match name.parse::<Subcommand>() {
        Ok(Subcommand::Sweep) | Err(_) => return Err(ConfigError::Task(name.to_string()).into()),
        Ok(t) => t,
    };
    let axes = options
        .axes
        .iter()
        .map(|a| config::parse_axis(a))
        .collect::<Result<Vec<_>, _>>()?;
    if axes.is_empty() {
        return Err(ConfigError::NoAxes.into());
    }
    let points = config::grid(&r.doc, &axes)?;
    let point_options = Options {
        plot: options.plot,
        ..Options::default()
    };
    let results: Vec<Result<(Outcome, f64, f64), CliError>> = points
        .par_iter()
        .enumerate()
        .map(|(index, map)| {
            let wrap = |e: CliError| CliError::Point {
                index,
                source: Box::new(e),
            };
            let resolved = config::resolve_object(map).map_err(|e| wrap(e.into()))?;
            let outcome = run_in(task, &resolved, &point_options, &dir.join(point_dir(index)))
                .map_err(wrap)?;
            let m = solve_c(&resolved.params, SPEED_TOL).map_err(|e| wrap(e.into()))?;
            Ok((outcome, m.c, m.residual))
        })
        .collect();

    let keys: Vec<&str> = axes.iter().map(|(k, _)| k.as_str()).collect();
    let mut columns = vec!["point"];
    columns.extend(&keys);
    columns.extend(["c", "residual", "c_num"]);
    let mut rows = Vec::new();
    let mut outcome = Outcome {
        passed: true,
        ..Outcome::default()
    };
    for (index, (result, map)) in results.into_iter().zip(&points).enumerate() {
        let (point, c, residual) = result?;
        let mut row = vec![point_dir(index)];
        row.extend(keys.iter().map(|k| map[*k].to_string()));
        row.extend([
            num(c),
            num(residual),
            point.c_num.map(num).unwrap_or_default(),
        ]);
        outcome
            .lines
            .push(format!("{}: {}", row[0], row[1..].join(", ")));
        outcome.passed &= point.passed;
        outcome.warnings.extend(
            point
                .warnings
                .into_iter()
                .map(|w| format!("{}: {w}", row[0])),
        );
        outcome.files.extend(point.files);
        rows.push(row);
    }
    let path = dir.join("summary.csv");
    write_csv(&path, "summary", &columns, rows)?;
    outcome.lines.insert(0, columns.join(", "));
    outcome.files.push(path);
    if options.plot && keys.len() == 1 {
        plot(
            dir,
            "sweep",
            &[("summary.csv", &[(2, 3, "c")])],
            &mut outcome.files,
        )?;
    }
    Ok(outcome)
}

fn point_dir(index: usize) -> String {
    format!("point-{index:03}")
}
