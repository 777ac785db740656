//! Constructive reduction to a standard form, serialized step by step.

use nlslab_core::{normalize, NormalizeError};

use super::{fail_with_report, CmdContext, Failure};
use crate::report::{self, NormalizeReport};

pub fn run(ctx: &CmdContext) -> Result<(), Failure> {
    let resolved = ctx
        .cfg
        .system
        .resolve(ctx.seed())
        .map_err(Failure::Config)?;
    match normalize(&resolved.system) {
        Ok(r) => {
            let rep = NormalizeReport::new(report::system_block(&resolved), &r);
            report::write_json(&ctx.path("report.json"), &rep).map_err(Failure::Other)?;
            Ok(())
        }
        Err(e @ NormalizeError::AssumptionNotSatisfied) => {
            Err(fail_with_report(ctx, Failure::Assumption(e.to_string())))
        }
        Err(e) => Err(fail_with_report(ctx, Failure::Degenerate(e.to_string()))),
    }
}
