//! Cartesian sweep driver: expands the substitution grid, runs the target
//! subcommand at every point in its own directory, and writes an index
//! recording per-point status. Point failures are data, not sweep failures.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{dispatch, CmdContext, Failure};
use crate::config;
use crate::report::{self, ErrorReport, SweepIndex, SweepPoint, SCHEMA};

pub fn run(raw: &serde_json::Value, ctx: &CmdContext) -> Result<(), Failure> {
    let section = ctx
        .cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Failure::Config(anyhow::anyhow!("config has no sweep section")))?;
    let command = static_command(&section.command).ok_or_else(|| {
        Failure::Config(anyhow::anyhow!("sweep cannot drive {:?}", section.command))
    })?;

    let mut base = raw.clone();
    base.as_object_mut()
        .expect("a parsed config is a JSON object")
        .remove("sweep");

    // Substitution paths iterate in key order with the first varying slowest,
    // so point indices are stable across re-runs of the same config.
    let paths: Vec<&String> = section.substitutions.keys().collect();
    let lists: Vec<&Vec<serde_json::Value>> = section.substitutions.values().collect();
    let total: usize = lists.iter().map(|l| l.len()).product();

    let points: Vec<SweepPoint> = (0..total)
        .into_par_iter()
        .map(|i| {
            let mut rem = i;
            let mut subs = BTreeMap::new();
            for k in (0..paths.len()).rev() {
                let n = lists[k].len();
                subs.insert(paths[k].clone(), lists[k][rem % n].clone());
                rem /= n;
            }
            run_point(ctx, command, &base, i, subs)
        })
        .collect();

    let index = SweepIndex {
        schema: SCHEMA,
        kind: "sweep",
        command: section.command.clone(),
        points,
    };
    report::write_json(&ctx.path("index.json"), &index).map_err(Failure::Other)?;
    Ok(())
}

fn run_point(
    ctx: &CmdContext,
    command: &'static str,
    base: &serde_json::Value,
    index: usize,
    subs: BTreeMap<String, serde_json::Value>,
) -> SweepPoint {
    let dir = format!("point-{index:03}");
    let point_dir = ctx.out_dir.join(&dir);
    let mut point = SweepPoint {
        index,
        dir,
        substitutions: subs,
        status: "ok".to_string(),
        exit_code: 0,
        error: None,
    };

    let outcome = (|| -> Result<(), Failure> {
        std::fs::create_dir_all(&point_dir)
            .map_err(|e| Failure::Other(anyhow::anyhow!("cannot create {point_dir:?}: {e}")))?;
        let mut raw = base.clone();
        for (path, value) in &point.substitutions {
            config::set_dotted(&mut raw, path, value.clone()).map_err(Failure::Config)?;
        }
        let cfg = config::parse(raw).map_err(Failure::Config)?;
        let point_ctx = CmdContext {
            command,
            cfg: &cfg,
            out_dir: point_dir.clone(),
            overrides: ctx.overrides,
        };
        dispatch(command, &point_ctx)
    })();

    if let Err(f) = outcome {
        point.status = "failed".to_string();
        point.exit_code = f.exit_code();
        point.error = Some(f.message());
        // A point that never reached its runner still deserves a structured
        // report; runners write their own before returning.
        if !point_dir.join("report.json").exists() {
            let rep = ErrorReport::new(command, f.message(), f.exit_code());
            let _ = report::write_json(&point_dir.join("report.json"), &rep);
        }
    }
    point
}

fn static_command(name: &str) -> Option<&'static str> {
    match name {
        "analyze" => Some("analyze"),
        "normalize" => Some("normalize"),
        "ode-sim" => Some("ode-sim"),
        "pde-sim" => Some("pde-sim"),
        _ => None,
    }
}
