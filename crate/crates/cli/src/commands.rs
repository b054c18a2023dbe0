use std::fs;

use fiberdd::dephasing::{decoherence_curve, DecoherenceCurve, PointStatus};
use fiberdd::esd::ESD_LENGTH_TOL;
use fiberdd::presets::{run_figure, Figure, FigureData, Scenario, FIG3_LENGTH};
use fiberdd::{bisect_esd, mc_check};

use crate::config::RunConfig;
use crate::csv::{num, Table};
use crate::error::CliError;

/// Reported ESD: the first zero on the grid, refined by bisection against
/// the preceding grid point.
fn esd_from_curve(run: &RunConfig, curve: &DecoherenceCurve) -> Result<Option<f64>, CliError> {
    let Some(i) = curve.points.iter().position(|p| p.concurrence == 0.0) else {
        return Ok(None);
    };
    let hi = curve.points[i].length;
    let lo = if i == 0 {
        0.0
    } else {
        curve.points[i - 1].length
    };
    let l_max = *run.grid.last().expect("nonempty grid");
    let esd = bisect_esd(
        &run.sequence,
        &run.spec,
        &run.profile,
        &run.state,
        lo,
        hi,
        ESD_LENGTH_TOL * l_max,
    )?;
    Ok(Some(esd))
}

fn check_points(curve: &DecoherenceCurve, label: &str) -> Option<String> {
    for p in &curve.points {
        if let PointStatus::Loose { achieved } = p.status {
            eprintln!(
                "warning: {label}: L = {} converged only to {achieved:.3e}",
                p.length
            );
        }
    }
    let failed: Vec<String> = curve
        .points
        .iter()
        .filter_map(|p| match &p.status {
            PointStatus::Failed { reason } => Some(format!("{label}: L = {}: {reason}", p.length)),
            _ => None,
        })
        .collect();
    if failed.is_empty() {
        None
    } else {
        Some(failed.join("\n"))
    }
}

pub fn simulate(run: &RunConfig) -> Result<(), CliError> {
    let curve = decoherence_curve(
        &run.sequence,
        &run.spec,
        &run.profile,
        &run.grid,
        &run.state,
    )?;
    let mut table = Table::new(&[], &[]);
    for p in &curve.points {
        table.row(&[], p);
    }
    table.write(&run.out)?;
    if let Some(failures) = check_points(&curve, &run.sequence.to_string()) {
        return Err(CliError::Numerical(failures));
    }
    let esd = match esd_from_curve(run, &curve)? {
        Some(l) => format!("{l:.6}"),
        None => "none".to_string(),
    };
    let last = curve.points.last().expect("nonempty grid");
    println!("wrote {}", run.out.display());
    println!(
        "summary: sequence = {}, esd = {esd}, final concurrence = {} at L = {}",
        run.sequence,
        num(last.concurrence),
        last.length
    );
    Ok(())
}

pub fn figure(preset: Figure, run: &RunConfig) -> Result<(), CliError> {
    let scenario = Scenario {
        spec: run.spec,
        profile: run.profile,
        state: run.state,
        grid: run.grid.clone(),
    };
    let data = run_figure(preset, &scenario, run.max_pulses)?;
    fs::create_dir_all(&run.out)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", run.out.display())))?;
    let path = run.out.join(format!("{}.csv", preset.name()));
    let comments = [format!(
        "preset {}: {}",
        preset.name(),
        preset.description()
    )];
    let mut failures = Vec::new();
    match &data {
        FigureData::Curves(series) => {
            let mut table = Table::new(&comments, &["series"]);
            for s in series {
                for p in &s.curve.points {
                    table.row(&[&s.name], p);
                }
                failures.extend(check_points(&s.curve, &s.name));
                let last = s.curve.points.last().expect("nonempty grid");
                let esd = s
                    .curve
                    .first_zero()
                    .map_or("none".to_string(), |l| format!("{l}"));
                println!(
                    "summary: {}: first zero on grid = {esd}, final concurrence = {}",
                    s.name,
                    num(last.concurrence)
                );
            }
            table.write(&path)?;
        }
        FigureData::PulseScan { length, scan } => {
            let mut table = Table::new(&comments, &["series", "pulses"]);
            for (n, p) in scan {
                table.row(&["cpmg", &n.to_string()], p);
                if let PointStatus::Failed { reason } = &p.status {
                    failures.push(format!("N = {n}: {reason}"));
                }
            }
            table.write(&path)?;
            let revival = scan.iter().find(|(_, p)| p.concurrence > 0.0);
            println!(
                "summary: L = {length}, first N with entanglement = {}, concurrence at N = {} is {}",
                revival.map_or("none".to_string(), |(n, _)| n.to_string()),
                run.max_pulses,
                num(scan.last().map_or(f64::NAN, |(_, p)| p.concurrence)),
            );
            debug_assert_eq!(*length, FIG3_LENGTH);
        }
    }
    println!("wrote {}", path.display());
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(failures.join("\n")))
    }
}

pub fn mc(run: &RunConfig) -> Result<(), CliError> {
    let check = mc_check(
        &run.sequence,
        &run.spec,
        &run.profile,
        run.mc_length,
        &run.mc,
    )?;
    let report = format!(
        "sequence = {}\nlength = {}\nf_L = {}\nanalytic gamma = {}\nmc estimate = {}\nstd error = {}\nimaginary part = {}\nz = {:.6}\n",
        run.sequence,
        run.mc_length,
        num(check.f_l),
        num(check.analytic),
        num(check.mc.estimate),
        num(check.mc.std_error),
        num(check.mc.imag),
        check.z,
    );
    print!("{report}");
    let out = run.out.to_string_lossy();
    if out != "-" {
        fs::write(&run.out, &report)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", run.out.display())))?;
    }
    if check.z.abs() > 4.0 {
        return Err(CliError::ZScore(check.z.abs()));
    }
    Ok(())
}
