//! Reduced-flow simulation: dense-sampled trajectory as CSV, conservation
//! and global-bound summary as JSON.

use nlslab_core::{
    conserved_quantities, evaluate_conserved, integrate_sampled, ConservedQuantitySpec, OdeError,
};

use super::{fail_with_report, CmdContext, Failure};
use crate::report::{self, OdeQuantitySummary, OdeReport, QuantityBlock, SCHEMA};

pub fn run(ctx: &CmdContext) -> Result<(), Failure> {
    let resolved = ctx
        .cfg
        .system
        .resolve(ctx.seed())
        .map_err(Failure::Config)?;
    let s = &resolved.system;
    let sec = &ctx.cfg.ode;
    let specs: Vec<ConservedQuantitySpec> = conserved_quantities(s).unwrap_or_default();

    let traj = match integrate_sampled(
        s,
        &sec.initial_state(),
        sec.t0,
        sec.t1,
        sec.samples,
        &sec.options(),
    ) {
        Ok(t) => t,
        Err(e @ OdeError::StepSizeUnderflow { time }) => {
            return Err(fail_with_report(
                ctx,
                Failure::BlowUp {
                    message: e.to_string(),
                    time,
                },
            ));
        }
        Err(e) => {
            return Err(fail_with_report(ctx, Failure::Other(anyhow::anyhow!(e))));
        }
    };

    // One value series per quantity; a zero base under a negative exponent
    // leaves a hole rather than poisoning the whole series.
    let series: Vec<Vec<Option<f64>>> = specs
        .iter()
        .map(|spec| {
            traj.states
                .iter()
                .map(|p| evaluate_conserved(spec, p).ok())
                .collect()
        })
        .collect();

    if ctx.cfg.output.wants("csv") {
        write_csv(ctx, &traj, &series).map_err(Failure::Other)?;
    }

    let (mass_min, mass_max) = traj.mass_extremes();
    let global_bound_ratio = (mass_min > 0.0).then(|| mass_max / mass_min);
    let ratio_bound = nlslab_core::coercivity_bound(s).ok().map(|b| b.ratio_bound);
    let bound_satisfied = match (global_bound_ratio, ratio_bound) {
        (Some(r), Some(b)) => Some(r <= b * (1.0 + 1e-9)),
        _ => None,
    };

    let quantities = specs
        .iter()
        .zip(&series)
        .map(|(spec, vals)| {
            let defined: Vec<f64> = vals.iter().flatten().copied().collect();
            let initial = defined.first().copied();
            let drift_abs = initial.map(|first| {
                defined
                    .iter()
                    .map(|v| (v - first).abs())
                    .fold(0.0, f64::max)
            });
            let drift_rel = initial
                .zip(drift_abs)
                .filter(|(first, _)| first.abs() > 0.0)
                .map(|(first, drift)| drift / first.abs());
            OdeQuantitySummary {
                formula: QuantityBlock::from_spec(spec).formula,
                coercive: spec.coercive,
                initial,
                drift_abs,
                drift_rel,
            }
        })
        .collect();

    let rep = OdeReport {
        schema: SCHEMA,
        kind: "ode-sim",
        system: report::system_block(&resolved),
        t0: sec.t0,
        t1: sec.t1,
        samples: sec.samples,
        accepted_steps: traj.accepted_steps,
        rejected_steps: traj.rejected_steps,
        mass_min,
        mass_max,
        global_bound_ratio,
        ratio_bound,
        bound_satisfied,
        quantities,
    };
    report::write_json(&ctx.path("report.json"), &rep).map_err(Failure::Other)?;
    Ok(())
}

fn write_csv(
    ctx: &CmdContext,
    traj: &nlslab_core::Trajectory,
    series: &[Vec<Option<f64>>],
) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(ctx.path("series.csv"))?;
    let mut header = vec![
        "t".to_string(),
        "re_phi1".to_string(),
        "im_phi1".to_string(),
        "re_phi2".to_string(),
        "im_phi2".to_string(),
        "norm_sq".to_string(),
    ];
    for i in 0..series.len() {
        header.push(format!("q{}", i + 1));
    }
    w.write_record(&header)?;
    for (k, (&t, p)) in traj.times.iter().zip(&traj.states).enumerate() {
        let mut row = vec![
            t.to_string(),
            p.phi1.re.to_string(),
            p.phi1.im.to_string(),
            p.phi2.re.to_string(),
            p.phi2.im.to_string(),
            p.norm_sq().to_string(),
        ];
        for vals in series {
            row.push(vals[k].map(|v| v.to_string()).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
