//! The `solve`, `region-plot` and `verify` commands.

use std::fs;
use std::path::PathBuf;

use ccgeom::checks::{run_all, CheckConfig, CheckOutcome, Fault};
use ccgeom::criteria::{figure1_region, figure2_curves, GridConfig};
use ccgeom::io::figures::{figure1_csv, figure1_regression, figure1_svg, figure2_csv, figure2_regression, figure2_svg, RegressionPoint};
use ccgeom::io::svg::curves_svg;
use ccgeom::io::{curve_to_csv, flow_trace_csv, surface_from_toml, write_csv, CurveDocument};
use ccgeom::shortening::{solve_on_surface, SolveRequest};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{Failure, Output, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inject {
    OrientationFlip,
}

/// Validated parameters of one invocation.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Solve { surface: PathBuf, c: f64, grid: usize, tol: f64, seed: u64, formats: Vec<Format> },
    RegionPlot { grid: usize, tol: Option<f64>, formats: Vec<Format> },
    Verify { seed: u64, inject: Option<Inject>, formats: Vec<Format> },
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::Solve { .. } => "solve",
            RunConfig::RegionPlot { .. } => "region-plot",
            RunConfig::Verify { .. } => "verify",
        }
    }

    pub fn validate(&self) -> Result<(), Failure> {
        match self {
            RunConfig::Solve { c, grid, tol, .. } => {
                if !(c.is_finite() && *c > 0.0) {
                    return Err(Failure::config(format!("--c must be positive and finite, got {c}")));
                }
                if *grid < 16 {
                    return Err(Failure::config(format!("--grid must be at least 16 vertices, got {grid}")));
                }
                if !(tol.is_finite() && *tol > 0.0) {
                    return Err(Failure::config(format!("--tol must be positive, got {tol}")));
                }
            }
            RunConfig::RegionPlot { grid, tol, .. } => {
                if *grid < 2 {
                    return Err(Failure::config(format!("--grid must be at least 2, got {grid}")));
                }
                if let Some(t) = tol {
                    if !(t.is_finite() && *t >= 0.0) {
                        return Err(Failure::config(format!("--tol must be non-negative, got {t}")));
                    }
                }
            }
            RunConfig::Verify { .. } => {}
        }
        Ok(())
    }

    fn formats(&self) -> &[Format] {
        match self {
            RunConfig::Solve { formats, .. } | RunConfig::RegionPlot { formats, .. } | RunConfig::Verify { formats, .. } => formats,
        }
    }

    fn wants(&self, f: Format) -> bool {
        self.formats().contains(&f)
    }

    pub fn inputs(&self) -> Value {
        serde_json::to_value(self).unwrap_or(Value::Null)
    }

    pub fn tolerances(&self) -> Value {
        match self {
            RunConfig::Solve { tol, .. } => json!({ "max_curvature_residual": tol, "lift_contact": 1e-9 }),
            RunConfig::RegionPlot { tol, .. } => match tol {
                Some(t) => json!({ "regression": t }),
                None => json!({
                    "figure1_upper": ccgeom::io::figures::FIGURE1_UPPER_TOL,
                    "figure1_lower": ccgeom::io::figures::FIGURE1_LOWER_TOL,
                    "figure1_corner": ccgeom::io::figures::FIGURE1_CORNER_TOL,
                    "figure1_intercept": ccgeom::io::figures::FIGURE1_INTERCEPT_TOL,
                    "figure2": ccgeom::io::figures::FIGURE2_TOL,
                }),
            },
            RunConfig::Verify { .. } => Value::Null,
        }
    }

    pub fn execute(&self, out: &mut Output) -> Result<(), Failure> {
        self.validate()?;
        match self {
            RunConfig::Solve { surface, c, grid, tol, seed, .. } => solve(self, out, surface, *c, *grid, *tol, *seed),
            RunConfig::RegionPlot { grid, tol, .. } => region_plot(self, out, *grid, *tol),
            RunConfig::Verify { seed, inject, .. } => verify(self, out, *seed, *inject),
        }
    }
}

fn solve(cfg: &RunConfig, out: &mut Output, path: &PathBuf, c: f64, grid: usize, tol: f64, seed: u64) -> Result<(), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    let surface = surface_from_toml(&text).map_err(Failure::invalid_input)?;
    let req = SolveRequest { c, vertices: grid, tol, seed, perturbation: 0.02 };
    let sol = solve_on_surface(&surface, &req).map_err(Failure::numerical)?;
    let curve = &sol.region.boundary[0];
    let report = json!({
        "c": c,
        "length": sol.length,
        "area": sol.area,
        "ac": sol.ac,
        "max_residual": sol.max_residual,
        "tol": tol,
        "newton_steps": sol.trace.len().saturating_sub(1),
        "contact": sol.contact,
        "certificate": sol.certificate,
    });
    out.write_json("report.json", &report)?;
    if cfg.wants(Format::Json) {
        let mut doc = CurveDocument::new(&surface, curve);
        for key in ["c", "length", "area", "ac", "max_residual"] {
            doc.metadata.insert(key.into(), report[key].clone());
        }
        doc.metadata.insert("witnesses".into(), json!(sol.region.witnesses));
        out.write("solution.json", &(doc.to_json().map_err(Failure::numerical)? + "\n"))?;
    }
    if cfg.wants(Format::Csv) {
        out.write("solution.csv", &curve_to_csv(curve).map_err(Failure::numerical)?)?;
        out.write("flow_trace.csv", &flow_trace_csv(&sol.trace).map_err(Failure::numerical)?)?;
    }
    if cfg.wants(Format::Svg) {
        out.write("solution.svg", &curves_svg(std::slice::from_ref(curve), &format!("boundary of curvature {c}")))?;
    }
    println!("length        {:.9}", sol.length);
    println!("area          {:.9}", sol.area);
    println!("A^c           {:.9}", sol.ac);
    println!("max residual  {:.3e}", sol.max_residual);
    println!("second var.   {:.6} ({})", sol.certificate.second_variation, if sol.certificate.unstable { "unstable" } else { "no certificate" });
    if sol.certificate.expected_negative && !sol.certificate.unstable {
        return Err(Failure::numerical(ccgeom::Error::NoNegativeDirection(sol.certificate.second_variation)));
    }
    Ok(())
}

fn region_plot(cfg: &RunConfig, out: &mut Output, points: usize, tol: Option<f64>) -> Result<(), Failure> {
    let grid = GridConfig { points };
    let (trace, fig2) = std::thread::scope(|s| {
        let fig1 = s.spawn(|| figure1_region(&grid));
        let fig2 = figure2_curves(&grid);
        (fig1.join().expect("figure 1 worker panicked"), fig2)
    });
    let trace = trace.map_err(Failure::numerical)?;
    if cfg.wants(Format::Csv) {
        out.write("figure1.csv", &figure1_csv(&trace).map_err(Failure::numerical)?)?;
        out.write("figure2.csv", &figure2_csv(&fig2).map_err(Failure::numerical)?)?;
    }
    if cfg.wants(Format::Svg) {
        out.write("figure1.svg", &figure1_svg(&trace))?;
        out.write("figure2.svg", &figure2_svg(&fig2))?;
    }
    let mut checks: Vec<RegressionPoint> = figure1_regression(&trace, tol);
    checks.extend(figure2_regression(&fig2, tol));
    if cfg.wants(Format::Json) {
        out.write_json("regression.json", &checks)?;
    }
    let failing: Vec<&RegressionPoint> = checks.iter().filter(|r| !r.pass).collect();
    println!("corner        ({:.6}, {:.6})", trace.corner.0, trace.corner.1);
    println!("intercept     {:.6}", trace.intercept);
    println!("regression    {} of {} points within tolerance", checks.len() - failing.len(), checks.len());
    for r in &failing {
        println!("  FAIL figure {} {} ({}, {}): distance {:.3e} > {:.3e}", r.figure, r.curve, r.x, r.y, r.distance, r.tol);
    }
    if failing.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            status: Status::RegressionFailure,
            kind: "RegressionFailure".into(),
            message: format!("{} of {} reference points outside tolerance", failing.len(), checks.len()),
            details: json!({ "failing": failing }),
        })
    }
}

fn verify(cfg: &RunConfig, out: &mut Output, seed: u64, inject: Option<Inject>) -> Result<(), Failure> {
    let check_cfg = CheckConfig { seed, fault: inject.map(|Inject::OrientationFlip| Fault::OrientationFlip), ..CheckConfig::default() };
    let outcomes = run_all(&check_cfg);
    if cfg.wants(Format::Json) {
        out.write_json("checks.json", &outcomes)?;
    }
    if cfg.wants(Format::Csv) {
        out.write("checks.csv", &write_csv(&["module", "name", "pass", "detail"], &outcomes).map_err(Failure::numerical)?)?;
    }
    let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
    for o in &outcomes {
        println!("{:<10} {:<width$}  {}  {}", o.module, o.name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let failing: Vec<&CheckOutcome> = outcomes.iter().filter(|o| !o.pass).collect();
    println!("{} of {} checks passed", outcomes.len() - failing.len(), outcomes.len());
    if failing.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            status: Status::RegressionFailure,
            kind: "CheckFailure".into(),
            message: format!("{} of {} checks failed", failing.len(), outcomes.len()),
            details: json!({ "failing": failing }),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_rejects_bad_parameters() {
        let base = RunConfig::Solve { surface: "s.toml".into(), c: 1.0, grid: 128, tol: 1e-6, seed: 0, formats: vec![Format::Csv] };
        assert!(base.validate().is_ok());
        for bad in [
            RunConfig::Solve { surface: "s.toml".into(), c: -1.0, grid: 128, tol: 1e-6, seed: 0, formats: vec![] },
            RunConfig::Solve { surface: "s.toml".into(), c: 1.0, grid: 4, tol: 1e-6, seed: 0, formats: vec![] },
            RunConfig::Solve { surface: "s.toml".into(), c: 1.0, grid: 128, tol: 0.0, seed: 0, formats: vec![] },
        ] {
            assert_eq!(bad.validate().unwrap_err().status, Status::ConfigError);
        }
    }

    #[test]
    fn inputs_are_tagged_by_command() {
        let cfg = RunConfig::RegionPlot { grid: 200, tol: None, formats: vec![Format::Svg] };
        let v = cfg.inputs();
        assert_eq!(v["command"], "region-plot");
        assert_eq!(v["formats"][0], "svg");
        assert!(cfg.tolerances()["figure2"].is_number());
    }
}
