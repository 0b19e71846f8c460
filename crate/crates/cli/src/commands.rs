use std::path::{Path, PathBuf};

use multiverse_core::analysis::{born_convergence, compare_narratives, end_to_end, DistributionReport, EndToEndReport};
use multiverse_core::branching::{closed_form, enumerate_tree, BranchConfig, Counts, HistoryTally, Mode};
use multiverse_core::dynamics::{evolve_recorded, init_packet, Sample, SgParams};
use multiverse_core::spin::{make_skew_state, skew_born_weight};
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::config::{require_angle, resolve_angle, ConfigFile, WeightArg};
use crate::error::CliError;
use crate::output::{num, to_json, write_file, Csv, Format};
use crate::svg::{Bars, Chart, Series};
use crate::{AngleArgs, BranchArgs, CompareArgs, EndToEndArgs, EvolveArgs, GlobalArgs, SgArgs};

/// Default largest tolerated `|q_numeric − cos²(θ/2)|` before `end-to-end` exits 4.
pub const SELF_CHECK_TOLERANCE: f64 = 1e-4;

const GLOBAL_KEYS: [&str; 4] = ["out", "format", "svg", "seed"];
const ANGLE_KEYS: [&str; 2] = ["theta_deg", "theta_rad"];
const SG_KEYS: [&str; 9] = [
    "mass", "coupling", "field", "gradient", "sigma0", "length", "points", "dt", "t_final",
];

pub struct Output {
    dir: PathBuf,
    format: Format,
    svg: bool,
    seed: u64,
    written: Vec<PathBuf>,
}

impl Output {
    fn resolve(file: &ConfigFile, global: &GlobalArgs) -> Result<Self, CliError> {
        let svg = if global.svg {
            true
        } else {
            file.get_or("svg", None, false)?
        };
        Ok(Self {
            dir: file.get_or("out", global.out.clone(), PathBuf::from("."))?,
            format: file.get_or("format", global.format, Format::Both)?,
            svg,
            seed: file.get_or("seed", global.seed, 0)?,
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = write_file(&self.dir, name, contents)?;
        self.written.push(path);
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

fn load_config(global: &GlobalArgs, command_keys: &[&[&str]]) -> Result<ConfigFile, CliError> {
    let file = match &global.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let allowed: Vec<&str> = std::iter::once(&GLOBAL_KEYS[..])
        .chain(command_keys.iter().copied())
        .flatten()
        .copied()
        .collect();
    file.check_keys(&allowed)?;
    Ok(file)
}

fn sg_params(file: &ConfigFile, args: &SgArgs) -> Result<SgParams, CliError> {
    let d = SgParams::default();
    let params = SgParams {
        mass: file.get_or("mass", args.mass, d.mass)?,
        coupling: file.get_or("coupling", args.coupling, d.coupling)?,
        field: file.get_or("field", args.field, d.field)?,
        gradient: file.get_or("gradient", args.gradient, d.gradient)?,
        sigma0: file.get_or("sigma0", args.sigma0, d.sigma0)?,
        grid_length: file.get_or("length", args.length, d.grid_length)?,
        grid_points: file.get_or("points", args.points, d.grid_points)?,
        dt: file.get_or("dt", args.dt, d.dt)?,
        t_final: file.get_or("t_final", args.t_final, d.t_final)?,
    };
    params.validate()?;
    Ok(params)
}

fn angle(file: &ConfigFile, args: &AngleArgs) -> Result<f64, CliError> {
    require_angle(file, args.theta_deg, args.theta_rad)
}

fn runs(file: &ConfigFile, flag: Option<u32>) -> Result<u32, CliError> {
    file.get("N", flag)?
        .ok_or_else(|| CliError::Config("the number of runs is required: pass --N".into()))
}

#[derive(Serialize)]
struct EvolveReport<'a> {
    command: &'static str,
    theta: f64,
    params: &'a SgParams,
    t_reached: f64,
    samples: &'a [Sample],
}

pub fn cmd_evolve(global: &GlobalArgs, args: &EvolveArgs) -> Result<Output, CliError> {
    let file = load_config(global, &[&ANGLE_KEYS, &SG_KEYS, &["record_every"]])?;
    let mut out = Output::resolve(&file, global)?;
    let theta = angle(&file, &args.angle)?;
    let params = sg_params(&file, &args.sg)?;
    let record_every = file.get_or("record_every", args.record_every, 0.1)?;
    if !(record_every.is_finite() && record_every > 0.0) {
        return Err(CliError::Config(format!(
            "record_every must be positive, got {record_every}"
        )));
    }

    let spin = make_skew_state(theta)?;
    let state = init_packet(&spin, params.sigma0, &params)?;
    let (state, samples) = evolve_recorded(state, &params, params.t_final, Some(record_every))?;

    if out.format.csv() {
        let mut csv = Csv::new(&[
            "t",
            "mean_y_plus",
            "mean_y_minus",
            "pop_plus",
            "pop_minus",
            "overlap",
            "norm",
        ]);
        for s in &samples {
            let d = &s.diagnostics;
            csv.row(&[
                num(s.t),
                num(d.mean_y_plus),
                num(d.mean_y_minus),
                num(d.pop_plus),
                num(d.pop_minus),
                num(d.spatial_overlap),
                num(s.norm),
            ]);
        }
        out.write("evolve.csv", &csv.into_string())?;
    }
    if out.format.json() {
        let report = EvolveReport {
            command: "evolve",
            theta,
            params: &params,
            t_reached: state.time(),
            samples: &samples,
        };
        out.write("evolve.json", &to_json(&report)?)?;
    }
    if out.svg {
        let trace = |f: fn(&Sample) -> f64| samples.iter().map(|s| (s.t, f(s))).collect();
        let chart = Chart {
            title: format!("Branch trajectories, theta = {:.4} rad", theta),
            x_label: "t".into(),
            y_label: "<y>".into(),
            bars: vec![],
            lines: vec![
                Series {
                    name: "mu = +1/2".into(),
                    color: "#cc3311",
                    points: trace(|s| s.diagnostics.mean_y_plus),
                },
                Series {
                    name: "mu = -1/2".into(),
                    color: "#0077bb",
                    points: trace(|s| s.diagnostics.mean_y_minus),
                },
            ],
        };
        out.write("evolve.svg", &chart.render())?;
    }
    Ok(out)
}

#[derive(Serialize)]
struct BranchSummary {
    command: &'static str,
    mode: Mode,
    method: &'static str,
    runs: u32,
    q: f64,
    q_exact: Option<String>,
    total: f64,
    total_exact: Option<String>,
    peak: usize,
    born_peak: f64,
}

fn branch_config(file: &ConfigFile, args: &BranchArgs) -> Result<BranchConfig, CliError> {
    let runs = runs(file, args.runs)?;
    let mode: Mode = file.get_or("mode", args.mode, Mode::Weighted)?;
    let weight: Option<WeightArg> = file.get("q", args.q.clone())?;
    let theta = resolve_angle(file, args.angle.theta_deg, args.angle.theta_rad)?;
    let weight = match (weight, theta) {
        (Some(_), Some(_)) => return Err(CliError::Config("give either q or an angle, not both".into())),
        (Some(w), None) => Some(w),
        (None, Some(theta)) => Some(WeightArg::Float(skew_born_weight(theta)?)),
        (None, None) => None,
    };
    Ok(match (mode, weight) {
        (Mode::Naive, None) => BranchConfig::naive(runs)?,
        (_, Some(WeightArg::Exact(q))) => BranchConfig::with_exact_q(runs, q, mode)?,
        (_, Some(WeightArg::Float(q))) => BranchConfig::new(runs, q, mode)?,
        (Mode::Weighted, None) => {
            return Err(CliError::Config("weighted mode needs --q or an angle".into()));
        }
    })
}

pub fn cmd_branch(global: &GlobalArgs, args: &BranchArgs) -> Result<Output, CliError> {
    let file = load_config(global, &[&ANGLE_KEYS, &["N", "q", "mode", "enumerate"]])?;
    let mut out = Output::resolve(&file, global)?;
    let config = branch_config(&file, args)?;
    let enumerate = args.enumerate || file.get_or("enumerate", None, false)?;
    let tally: HistoryTally = if enumerate {
        enumerate_tree(&config)?
    } else {
        closed_form(&config)
    };
    let counts = tally.counts_f64();

    if out.format.csv() {
        let mut csv = Csv::new(&["p", "count_exact_num", "count_exact_den", "count_float", "normalized"]);
        for (p, (c, n)) in counts.iter().zip(tally.normalized()).enumerate() {
            let (num_s, den_s) = match tally.counts() {
                Counts::Exact(e) => (e[p].numer().to_string(), e[p].denom().to_string()),
                Counts::Float(_) => (String::new(), String::new()),
            };
            csv.row(&[p.to_string(), num_s, den_s, num(*c), num(*n)]);
        }
        out.write("branch.csv", &csv.into_string())?;
    }
    if out.format.json() {
        let total_exact = tally.total_exact();
        let summary = BranchSummary {
            command: "branch",
            mode: config.mode(),
            method: if enumerate { "enumeration" } else { "closed_form" },
            runs: config.runs(),
            q: config.q(),
            q_exact: config.q_exact().map(ToString::to_string),
            total: total_exact
                .as_ref()
                .and_then(|t| t.to_f64())
                .unwrap_or_else(|| tally.total_f64()),
            total_exact: total_exact.map(|t| t.to_string()),
            peak: tally.peak(),
            born_peak: config.runs() as f64 * config.q(),
        };
        out.write("branch.json", &to_json(&summary)?)?;
    }
    if out.svg {
        let chart = Chart {
            title: format!(
                "{} branching, N = {}, q = {}",
                config.mode(),
                config.runs(),
                num(config.q())
            ),
            x_label: "p (number of plus results)".into(),
            y_label: "N(p)".into(),
            bars: vec![Bars {
                name: "N(p)".into(),
                color: "#4477aa",
                values: counts.iter().enumerate().map(|(p, &c)| (p as f64, c)).collect(),
            }],
            lines: vec![],
        };
        out.write("branch.svg", &chart.render())?;
    }
    Ok(out)
}

#[derive(Serialize)]
struct CompareOutput<'a> {
    command: &'static str,
    #[serde(flatten)]
    report: &'a DistributionReport,
}

fn distribution_chart(title: String, report: &DistributionReport, extra: Option<(&str, &[f64])>) -> Chart {
    let bars = |name: &str, color, v: &[f64]| Bars {
        name: name.into(),
        color,
        values: v.iter().enumerate().map(|(p, &x)| (p as f64, x)).collect(),
    };
    let mut lines = Vec::new();
    if let Some((name, values)) = extra {
        lines.push(Series {
            name: name.into(),
            color: "#228833",
            points: values.iter().enumerate().map(|(p, &x)| (p as f64, x)).collect(),
        });
    }
    if let Some(e) = &report.empirical {
        lines.push(Series {
            name: "sampled".into(),
            color: "#222222",
            points: e.distribution.iter().enumerate().map(|(p, &x)| (p as f64, x)).collect(),
        });
    }
    Chart {
        title,
        x_label: "p (number of plus results)".into(),
        y_label: "fraction of observers".into(),
        bars: vec![
            bars("weighted", "#ee6677", &report.predicted),
            bars("naive", "#4477aa", &report.naive),
        ],
        lines,
    }
}

fn empirical_column(report: &DistributionReport, p: usize) -> String {
    report
        .empirical
        .as_ref()
        .map(|e| num(e.distribution[p]))
        .unwrap_or_default()
}

pub fn cmd_compare(global: &GlobalArgs, args: &CompareArgs) -> Result<Output, CliError> {
    let file = load_config(global, &[&ANGLE_KEYS, &["N", "samples"]])?;
    let mut out = Output::resolve(&file, global)?;
    let theta = angle(&file, &args.angle)?;
    let runs = runs(&file, args.runs)?;
    let samples: usize = file.get_or("samples", args.samples, 0)?;
    let report = if samples > 0 {
        born_convergence(theta, runs, samples, out.seed)?
    } else {
        compare_narratives(runs, theta)?
    };

    if out.format.csv() {
        let mut csv = Csv::new(&["p", "predicted", "naive", "empirical"]);
        for p in 0..report.predicted.len() {
            csv.row(&[
                p.to_string(),
                num(report.predicted[p]),
                num(report.naive[p]),
                empirical_column(&report, p),
            ]);
        }
        out.write("compare.csv", &csv.into_string())?;
    }
    if out.format.json() {
        let json = to_json(&CompareOutput {
            command: "compare",
            report: &report,
        })?;
        out.write("compare.json", &json)?;
    }
    if out.svg {
        let title = format!("Naive vs weighted counting, N = {}, q = {:.4}", runs, report.q);
        out.write("compare.svg", &distribution_chart(title, &report, None).render())?;
    }
    Ok(out)
}

#[derive(Serialize)]
struct EndToEndOutput<'a> {
    command: &'static str,
    self_check_tolerance: f64,
    self_check_passed: bool,
    #[serde(flatten)]
    report: &'a EndToEndReport,
}

pub fn cmd_end_to_end(global: &GlobalArgs, args: &EndToEndArgs) -> Result<Output, CliError> {
    let file = load_config(
        global,
        &[&ANGLE_KEYS, &SG_KEYS, &["N", "samples", "self_check_tolerance"]],
    )?;
    let mut out = Output::resolve(&file, global)?;
    let theta = angle(&file, &args.angle)?;
    let params = sg_params(&file, &args.sg)?;
    let runs = runs(&file, args.runs)?;
    let samples: usize = file.get_or("samples", args.samples, 0)?;
    let tolerance = file.get_or("self_check_tolerance", args.self_check_tolerance, SELF_CHECK_TOLERANCE)?;
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(CliError::Config(format!(
            "self_check_tolerance must be non-negative, got {tolerance}"
        )));
    }
    let result = end_to_end(theta, &params, runs, samples, out.seed)?;
    let passed = result.q_deviation <= tolerance;

    if out.format.csv() {
        let r = &result.report;
        let mut csv = Csv::new(&["p", "predicted", "predicted_analytic", "naive", "empirical"]);
        for p in 0..r.predicted.len() {
            csv.row(&[
                p.to_string(),
                num(r.predicted[p]),
                num(result.analytic.predicted[p]),
                num(r.naive[p]),
                empirical_column(r, p),
            ]);
        }
        out.write("end_to_end.csv", &csv.into_string())?;
    }
    if out.format.json() {
        let json = to_json(&EndToEndOutput {
            command: "end-to-end",
            self_check_tolerance: tolerance,
            self_check_passed: passed,
            report: &result,
        })?;
        out.write("end_to_end.json", &json)?;
    }
    if out.svg {
        let title = format!("Simulated q = {:.6}, N = {}", result.q_numeric, runs);
        let chart = distribution_chart(title, &result.report, Some(("analytic q", &result.analytic.predicted)));
        out.write("end_to_end.svg", &chart.render())?;
    }
    self_check(&result, tolerance)?;
    Ok(out)
}

fn self_check(result: &EndToEndReport, tolerance: f64) -> Result<(), CliError> {
    if result.q_deviation <= tolerance {
        return Ok(());
    }
    Err(CliError::SelfCheck(format!(
        "simulated q = {} deviates from cos^2(theta/2) = {} by {:e} (> {:e})",
        result.q_numeric, result.q_analytic, result.q_deviation, tolerance
    )))
}

pub fn report_written(out: &Output) {
    for path in out.written() {
        println!("{}", display(path));
    }
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use multiverse_core::dynamics::SgParams;

    #[test]
    fn self_check_threshold() {
        let params = SgParams {
            t_final: 0.5,
            ..SgParams::default()
        };
        let mut report = end_to_end(1.0, &params, 4, 0, 0).unwrap();
        assert!(self_check(&report, SELF_CHECK_TOLERANCE).is_ok());
        report.q_deviation = 2.0 * SELF_CHECK_TOLERANCE;
        let err = self_check(&report, SELF_CHECK_TOLERANCE).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }
}
