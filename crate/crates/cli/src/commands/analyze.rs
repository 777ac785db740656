//! Structure report: eigen decomposition, cone classification, solvability
//! assumptions, and the synthesized conserved quantities.

use nlslab_core::{classify, coercivity_bound, conserved_quantities, eigen_decompose};

use super::{CmdContext, Failure};
use crate::report::{
    self, vec3, AnalyzeReport, AssumptionBlock, CoercivityBlock, EigenBlock, QuantityBlock,
    WitnessBlock, SCHEMA,
};

pub fn run(ctx: &CmdContext) -> Result<(), Failure> {
    let resolved = ctx
        .cfg
        .system
        .resolve(ctx.seed())
        .map_err(Failure::Config)?;
    let s = &resolved.system;
    let cls = classify(s);
    let eigen = eigen_decompose(s, ctx.tol());
    let (quantities, note) = match conserved_quantities(s) {
        Ok(specs) => (specs.iter().map(QuantityBlock::from_spec).collect(), None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    let coercivity = coercivity_bound(s).ok();

    let borderline = cls.borderline || eigen.borderline;
    let borderline_detail = borderline.then(|| {
        format!(
            "eigenvalue layout is sensitive to the clustering band {:e}: values {:?}, complex pair {:?}",
            eigen.cluster_tol,
            eigen.real_values(),
            eigen.complex_pair
        )
    });

    let rep = AnalyzeReport {
        schema: SCHEMA,
        kind: "analyze",
        system: report::system_block(&resolved),
        eigen: EigenBlock::from_core(&eigen),
        case_label: cls.case_label.as_str().to_string(),
        wngc: cls.wngc,
        assumption1: cls.assumption1.as_ref().map(|a| AssumptionBlock {
            lambdas: vec![a.lambda1, a.lambda2],
            witnesses: vec![vec3(&a.p1), vec3(&a.p2)],
        }),
        assumption2: cls.assumption2.as_ref().map(|a| AssumptionBlock {
            lambdas: vec![a.lambda1, a.lambda2, a.lambda3],
            witnesses: vec![vec3(&a.p1), vec3(&a.p2), vec3(&a.p3)],
        }),
        witnesses: cls
            .witnesses
            .iter()
            .map(|(name, v)| WitnessBlock {
                name: (*name).to_string(),
                vector: vec3(v),
            })
            .collect(),
        borderline,
        borderline_detail: borderline_detail.clone(),
        conserved_quantities: quantities,
        conserved_quantities_note: note,
        coercivity: coercivity.as_ref().map(CoercivityBlock::from_core),
    };
    report::write_json(&ctx.path("report.json"), &rep).map_err(Failure::Other)?;

    if borderline {
        // The written report already carries the flag and detail; the exit
        // code makes the degeneracy visible to batch drivers.
        return Err(Failure::Degenerate(borderline_detail.unwrap_or_default()));
    }
    Ok(())
}
