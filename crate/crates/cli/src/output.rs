//! CSV writers. Each file opens with `#` comment lines recording the tool
//! version, root seed, resolved parameters and any warnings, so a file is
//! enough to rerun the experiment. Nothing time-dependent is written.

use std::io::{self, Write};

use lwpa_core::analytic::AseBaseline;
use lwpa_core::montecarlo::McConfig;
use lwpa_core::point_process::ClosedExclusion;
use lwpa_core::NetworkParams;

use crate::config::EngineSettings;
use crate::presets::DensityTable;
use crate::sweep::{SweepResult, SweptParameter};

pub const SCHEMA_VERSION: u32 = 1;

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.9e}")
    }
}

fn exclusion_name(e: ClosedExclusion) -> &'static str {
    match e {
        ClosedExclusion::ActiveClosed => "active_closed",
        ClosedExclusion::AllClosed => "all_closed",
    }
}

fn baseline_name(b: AseBaseline) -> &'static str {
    match b {
        AseBaseline::ActiveClosed => "active_closed",
        AseBaseline::AllClosed => "all_closed",
    }
}

fn write_preamble<W: Write>(
    out: &mut W,
    params: &NetworkParams,
    mc: &McConfig,
    settings: &EngineSettings,
) -> io::Result<()> {
    writeln!(out, "# lwpa {} schema {}", env!("CARGO_PKG_VERSION"), SCHEMA_VERSION)?;
    writeln!(out, "# seed={}", mc.root_seed.0)?;
    writeln!(out, "# params: {params}")?;
    writeln!(
        out,
        "# montecarlo: replications={} window_m={} fading_draws={} confidence={} closed_exclusion={}",
        mc.replications,
        mc.window.width(),
        mc.fading_draws_per_geometry,
        mc.confidence_level,
        exclusion_name(mc.exclusion)
    )?;
    writeln!(
        out,
        "# analytic: ase_baseline={} rel_tol={:e} abs_tol={:e}",
        baseline_name(settings.ase_baseline),
        settings.quadrature.rel_tol(),
        settings.quadrature.abs_tol()
    )
}

fn write_notes<W: Write>(out: &mut W, notes: &[String], warnings: &[String]) -> io::Result<()> {
    for n in notes {
        writeln!(out, "# note: {n}")?;
    }
    for w in warnings {
        writeln!(out, "# warning: {w}")?;
    }
    Ok(())
}

/// Long-format sweep table: `swept,p,engine,value,ci_halfwidth,status`.
pub fn write_sweep_csv<W: Write>(mut out: W, result: &SweepResult) -> io::Result<()> {
    write_preamble(&mut out, &result.params, &result.mc, &result.settings)?;
    let spec = &result.spec;
    let p_set: Vec<String> = spec.p_set().iter().map(|p| p.to_string()).collect();
    let engines: Vec<&str> = spec.engines().iter().map(|e| e.name()).collect();
    writeln!(
        out,
        "# sweep: parameter={} unit={} metric={} p_set={} engines={}",
        spec.parameter().name(),
        spec.parameter().unit(),
        spec.metric().name(),
        if spec.parameter() == SweptParameter::PClosed {
            "swept".to_string()
        } else {
            p_set.join(";")
        },
        engines.join(";")
    )?;
    write_notes(&mut out, &result.notes, &result.warnings)?;

    let mut w = csv::Writer::from_writer(out);
    w.write_record([spec.parameter().name(), "p", "engine", "value", "ci_halfwidth", "status"])?;
    for r in &result.rows {
        w.write_record([
            num(r.swept),
            r.p.to_string(),
            r.engine.name().to_string(),
            num(r.value),
            r.ci_halfwidth.map(num).unwrap_or_default(),
            r.status.label(),
        ])?;
    }
    w.flush()
}

/// Wide density table: `xi_u,p,approx_1,approx_2,approx_3,mc_mean,mc_ci`.
pub fn write_density_csv<W: Write>(mut out: W, table: &DensityTable) -> io::Result<()> {
    write_preamble(&mut out, &table.params, &table.mc, &table.settings)?;
    writeln!(out, "# units: xi_u per_m2, densities per_m2")?;
    write_notes(&mut out, &table.notes, &table.warnings)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["xi_u", "p", "approx_1", "approx_2", "approx_3", "mc_mean", "mc_ci"])?;
    for r in &table.rows {
        let (mean, ci) = match &r.mc {
            Some(Ok(e)) => (num(e.mean), num(e.ci_halfwidth)),
            Some(Err(_)) | None => (String::new(), String::new()),
        };
        w.write_record([
            num(r.xi_u),
            r.p.to_string(),
            num(r.approx[0]),
            num(r.approx[1]),
            num(r.approx[2]),
            mean,
            ci,
        ])?;
    }
    w.flush()
}
